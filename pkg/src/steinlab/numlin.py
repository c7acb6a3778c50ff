"""Dense symmetric matrix kernel.

Builds the three covariance-matrix variants used by the asymptotic-equivalence
arguments (full Toeplitz, banded, circulant), exposes a symmetric
eigen-decomposition and spectral square roots, and implements the weak and
strong matrix norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import (
    InvalidDimensionError,
    NotPositiveDefiniteError,
    NumericalFailureError,
)

# Reject as non-PD when lambda_min <= PD_RTOL * lambda_max.
PD_RTOL = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order and the orthogonal eigenvector basis."""

    eigenvalues: np.ndarray
    basis: np.ndarray  # columns are eigenvectors

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return 0.5 * (M + M^T), enforcing exact symmetry."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def _check_square_finite(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalFailureError("matrix has non-finite entries")
    return m


def toeplitz_from_cov(cov, n: int) -> np.ndarray:
    """Toeplitz covariance matrix with entry (i, j) = K[|i - j|]."""
    if n < 1:
        raise InvalidDimensionError(f"n must be >= 1, got {n}")
    col = cov.k(np.arange(n))
    return scipy.linalg.toeplitz(col)


def banded_from_cov(cov, n: int) -> np.ndarray:
    """Toeplitz matrix with lags at or beyond floor(n/2)+1 zeroed."""
    if n < 3:
        raise InvalidDimensionError(f"n must be >= 3, got {n}")
    n_hat = n // 2 + 1
    col = cov.k(np.arange(n))
    col[n_hat:] = 0.0
    return scipy.linalg.toeplitz(col)


def circulant_from_cov(cov, n: int) -> np.ndarray:
    """Symmetric circulant completion of the banded covariance matrix.

    The first row keeps lags 0..floor(n/2) and wraps them back down so entry
    j equals K[min(j, n - j)]; this reproduces the even-n and odd-n templates
    (for even n the lag floor(n/2) appears once, for odd n twice).
    """
    if n < 3:
        raise InvalidDimensionError(f"n must be >= 3, got {n}")
    j = np.arange(n)
    row = cov.k(np.minimum(j, n - j))
    # scipy builds from the first column; the row is palindromic so the
    # result is both circulant and symmetric.
    return scipy.linalg.circulant(row)


def eig_sym(m: np.ndarray) -> EigenDecomposition:
    """Eigen-decomposition of a symmetric matrix, eigenvalues ascending."""
    m = _check_square_finite(m)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigen-decomposition failed: {exc}") from exc
    return EigenDecomposition(eigenvalues=w, basis=v)


def mat_sqrt_pair(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square root and inverse square root of a PD matrix.

    Both factors come from the spectral construction U diag(w)^(+-1/2) U^T,
    so they are symmetric and commute with the input.
    """
    dec = eig_sym(m)
    w = dec.eigenvalues
    if w[0] <= PD_RTOL * max(w[-1], 0.0):
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite: lambda_min={w[0]:.3e}, "
            f"lambda_max={w[-1]:.3e}"
        )
    root = np.sqrt(w)
    v = dec.basis
    sqrt_m = symmetrize((v * root) @ v.T)
    inv_sqrt_m = symmetrize((v / root) @ v.T)
    return sqrt_m, inv_sqrt_m


def weak_norm(m: np.ndarray) -> float:
    """Dimension-normalized Frobenius norm: sqrt((1/n) sum |a_kj|^2)."""
    m = _check_square_finite(m)
    n = m.shape[0]
    return float(np.linalg.norm(m, "fro") / np.sqrt(n))


def strong_norm(m: np.ndarray) -> float:
    """l2 operator norm; for symmetric input this is max |eigenvalue|."""
    m = _check_square_finite(m)
    if np.allclose(m, m.T, atol=0.0, rtol=0.0):
        w = np.linalg.eigvalsh(m)
        return float(np.max(np.abs(w)))
    return float(np.linalg.norm(m, 2))
