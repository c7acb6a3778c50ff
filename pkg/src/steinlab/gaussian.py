"""Zero-mean Gaussian models, whitening and exact relative entropy.

A `GaussianModel` caches the spectral square-root factors, log-determinant
and differential entropy of its covariance.  `whiten` reduces a pair of
covariances to the equivalent diagonal-vs-identity test and records the
diagonal entries (kappas), under which the log-likelihood ratio has the
simple weighted chi-square form used throughout the detection code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numlin, streams
from .exceptions import (
    InvalidDimensionError,
    NotPositiveDefiniteError,
    NumericalFailureError,
)

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GaussianModel:
    """n-dimensional zero-mean Gaussian law with cached factors (nats)."""

    cov: np.ndarray = field(repr=False)
    sqrt_cov: np.ndarray = field(repr=False)
    inv_sqrt_cov: np.ndarray = field(repr=False)
    log_det: float
    entropy: float

    @property
    def n(self) -> int:
        return self.cov.shape[0]


def model_from_cov(cov: np.ndarray) -> GaussianModel:
    """Build a model from a symmetric positive-definite covariance."""
    cov = numlin.symmetrize(cov)
    dec = numlin.eig_sym(cov)
    w = dec.eigenvalues
    if w[0] <= numlin.PD_RTOL * max(w[-1], 0.0):
        raise NotPositiveDefiniteError(
            f"covariance is not positive definite: lambda_min={w[0]:.3e}"
        )
    sqrt_cov, inv_sqrt_cov = numlin.mat_sqrt_pair(cov)
    n = cov.shape[0]
    log_det = float(np.sum(np.log(w)))
    entropy = 0.5 * (n * (LOG_2PI + 1.0) + log_det)
    return GaussianModel(
        cov=cov,
        sqrt_cov=sqrt_cov,
        inv_sqrt_cov=inv_sqrt_cov,
        log_det=log_det,
        entropy=entropy,
    )


def _check_vector(model: GaussianModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise InvalidDimensionError(
            f"expected a vector of length {model.n}, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise NumericalFailureError("input vector has non-finite entries")
    return x


def log_density(model: GaussianModel, x: np.ndarray) -> float:
    """Natural log of the Gaussian PDF at x."""
    x = _check_vector(model, x)
    y = model.inv_sqrt_cov @ x
    return float(-0.5 * (model.n * LOG_2PI + model.log_det + y @ y))


def log_density_batch(model: GaussianModel, xs: np.ndarray) -> np.ndarray:
    """Log-density of each row of an (N, n) array."""
    xs = np.asarray(xs, dtype=float)
    ys = xs @ model.inv_sqrt_cov
    quad = np.einsum("ij,ij->i", ys, ys)
    return -0.5 * (model.n * LOG_2PI + model.log_det + quad)


def sample(model: GaussianModel, seed: int, count: int) -> np.ndarray:
    """Draw `count` vectors as Lambda^{1/2} z with chunked seeded streams."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    blocks = [
        z @ model.sqrt_cov
        for z in streams.standard_normal_chunks(seed, count, model.n)
    ]
    return np.concatenate(blocks, axis=0)


def kl_gaussian(cov_p: np.ndarray, cov_q: np.ndarray) -> float:
    """Relative entropy D(N(0, cov_p) || N(0, cov_q)) in nats.

    Closed form 0.5 tr(Lp Lq^-1) - 0.5 log(det Lp / det Lq) - n/2, evaluated
    through the kappas (eigenvalues of Lq^-1 Lp) so it is exactly the
    diagonal-form value 0.5 sum(kappa - log kappa - 1).
    """
    kappas = _kappas(cov_p, cov_q)
    return float(0.5 * np.sum(kappas - np.log(kappas) - 1.0))


def _inv_sqrt(cov: np.ndarray) -> np.ndarray:
    return numlin.mat_sqrt_pair(numlin.symmetrize(cov))[1]


def _kappas(cov_p: np.ndarray, cov_q: np.ndarray) -> np.ndarray:
    cov_p = np.asarray(cov_p, dtype=float)
    cov_q = np.asarray(cov_q, dtype=float)
    if cov_p.shape != cov_q.shape:
        raise InvalidDimensionError(
            f"covariance shapes differ: {cov_p.shape} vs {cov_q.shape}"
        )
    inv_sqrt_q = _inv_sqrt(cov_q)
    conj = numlin.symmetrize(inv_sqrt_q @ numlin.symmetrize(cov_p) @ inv_sqrt_q)
    w = numlin.eig_sym(conj).eigenvalues
    if w[0] <= 0.0:
        raise NotPositiveDefiniteError("p covariance is not positive definite")
    return w


@dataclass(frozen=True)
class HypothesisPair:
    """A (p, q) Gaussian pair with its whitened diagonal form.

    `whitener` maps the observation space to coordinates in which p has
    covariance diag(kappas) and q the identity; `kl` is the exact
    finite-n relative entropy in nats.
    """

    p: GaussianModel = field(repr=False)
    q: GaussianModel = field(repr=False)
    kappas: np.ndarray  # descending
    whitener: np.ndarray = field(repr=False)
    kl: float

    @property
    def n(self) -> int:
        return self.p.n

    @property
    def b_n(self) -> float:
        """CLT scale of the log-likelihood ratio: sqrt(sum (kappa-1)^2)."""
        return float(np.sqrt(np.sum((self.kappas - 1.0) ** 2)))


def whiten(cov_p: np.ndarray, cov_q: np.ndarray) -> HypothesisPair:
    """Reduce (cov_p, cov_q) to the diagonal-vs-identity equivalent test.

    The map M = V^T Lq^{-1/2} (V the eigenbasis of the conjugated p
    covariance) satisfies M Lq M^T = I and M Lp M^T = diag(kappas).
    Kappas are returned descending, ties adjacent.
    """
    cov_p = numlin.symmetrize(cov_p)
    cov_q = numlin.symmetrize(cov_q)
    if cov_p.shape != cov_q.shape:
        raise InvalidDimensionError(
            f"covariance shapes differ: {cov_p.shape} vs {cov_q.shape}"
        )
    inv_sqrt_q = _inv_sqrt(cov_q)
    conj = numlin.symmetrize(inv_sqrt_q @ cov_p @ inv_sqrt_q)
    dec = numlin.eig_sym(conj)
    if dec.eigenvalues[0] <= 0.0:
        raise NotPositiveDefiniteError("p covariance is not positive definite")
    order = np.argsort(dec.eigenvalues)[::-1]
    kappas = dec.eigenvalues[order]
    basis = dec.basis[:, order]
    whitener = basis.T @ inv_sqrt_q
    kl = float(0.5 * np.sum(kappas - np.log(kappas) - 1.0))
    return HypothesisPair(
        p=model_from_cov(cov_p),
        q=model_from_cov(cov_q),
        kappas=kappas,
        whitener=whitener,
        kl=kl,
    )


def diagonal_pair(kappas) -> HypothesisPair:
    """Pair with p = N(0, diag(kappas)) and q = N(0, I), already whitened."""
    kappas = np.asarray(kappas, dtype=float)
    return whiten(np.diag(kappas), np.eye(kappas.size))


def llr(pair: HypothesisPair, x: np.ndarray) -> float:
    """Log-likelihood ratio log p(x) - log q(x) in nats."""
    return log_density(pair.p, x) - log_density(pair.q, x)


def llr_batch(pair: HypothesisPair, xs: np.ndarray) -> np.ndarray:
    """Log-likelihood ratio of each row of an (N, n) array."""
    return log_density_batch(pair.p, xs) - log_density_batch(pair.q, xs)
