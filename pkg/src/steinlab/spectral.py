"""Covariance sequences, spectra and their asymptotics.

Houses the stationary-process side of the library: absolutely summable
auto-covariance sequences, their spectra (DTFTs), truncated spectra and
circulant eigenvalues, spectral integrals, the Stein rate, the CLT scale
limit, and the asymptotic-equivalence diagnostics for the three covariance
matrix constructions.

All logarithms are natural; bit-valued presentation is a reporting
conversion handled by `units`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from . import numlin
from .exceptions import (
    IllConditionedSpectraError,
    InvalidDimensionError,
    NumericalFailureError,
)

# Composite-Simpson evaluation grid on [0, 1]; odd count so Simpson is exact
# on the whole interval.
DEFAULT_GRID_SIZE = 4097

# Lags with |K[m]| below this fraction of K[0] are dropped.
TAIL_CUTOFF = 1e-14


def _grid(grid_size: int) -> np.ndarray:
    if grid_size < 3 or grid_size % 2 == 0:
        raise ValueError(f"grid size must be odd and >= 3, got {grid_size}")
    return np.linspace(0.0, 1.0, grid_size)


@dataclass(frozen=True)
class CovarianceSequence:
    """Symmetric, absolutely summable auto-covariance sequence.

    `values[m]` holds K[m] for m >= 0 up to the truncation lag; lags beyond
    it are treated as zero (geometric tails are truncated where they fall
    below double-precision relevance).
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("covariance values must be a non-empty 1-d array")
        if not np.all(np.isfinite(values)):
            raise ValueError("covariance values must be finite")
        if values[0] <= 0.0:
            raise ValueError(f"K[0] must be positive, got {values[0]}")
        object.__setattr__(self, "values", values)

    @classmethod
    def white(cls, scale: float = 1.0) -> "CovarianceSequence":
        """White noise: K[0] = scale, all other lags zero."""
        return cls(np.array([scale]))

    @classmethod
    def geometric(cls, rho: float, scale: float = 1.0) -> "CovarianceSequence":
        """K[m] = scale * rho^|m|, truncated below TAIL_CUTOFF * K[0]."""
        if not 0.0 <= abs(rho) < 1.0:
            raise ValueError(f"geometric ratio must satisfy |rho| < 1, got {rho}")
        if rho == 0.0:
            return cls.white(scale)
        length = int(np.ceil(np.log(TAIL_CUTOFF) / np.log(abs(rho)))) + 1
        return cls(scale * rho ** np.arange(length))

    @classmethod
    def from_table(cls, values: Sequence[float]) -> "CovarianceSequence":
        """Finitely supported sequence given as K[0], K[1], ..."""
        return cls(np.asarray(values, dtype=float))

    def k(self, m) -> np.ndarray | float:
        """K[|m|]; zero beyond the truncation lag."""
        lags = np.abs(np.asarray(m, dtype=int))
        scalar = lags.ndim == 0
        lags = np.atleast_1d(lags)
        out = np.zeros(lags.shape, dtype=float)
        inside = lags < self.values.size
        out[inside] = self.values[lags[inside]]
        if scalar:
            return float(out[0])
        return out

    @property
    def abs_sum(self) -> float:
        """Two-sided absolute sum: sum over all integer lags of |K[m]|."""
        return float(np.abs(self.values[0]) + 2.0 * np.sum(np.abs(self.values[1:])))

    def spectrum(self, grid_size: int = DEFAULT_GRID_SIZE) -> "Spectrum":
        return Spectrum.from_covariance(self, grid_size=grid_size)


@dataclass(frozen=True)
class Spectrum:
    """Power spectrum S(f) on f in [0, 1] with grid-scanned bounds.

    The lower and upper bounds are computed at construction on the
    evaluation grid; a non-positive lower bound is rejected.
    """

    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    lower: float
    upper: float

    @classmethod
    def from_covariance(
        cls, cov: CovarianceSequence, grid_size: int = DEFAULT_GRID_SIZE
    ) -> "Spectrum":
        values = cov.values.copy()

        def evaluator(f):
            f = np.asarray(f, dtype=float)
            m = np.arange(1, values.size)
            out = values[0] + 2.0 * np.cos(2.0 * np.pi * np.multiply.outer(f, m)) @ values[1:]
            return out

        grid = _grid(grid_size)
        samples = evaluator(grid)
        lower = float(np.min(samples))
        upper = float(np.max(samples))
        if lower <= 0.0:
            raise ValueError(
                f"induced spectrum is not positive on the grid (min {lower:.3e})"
            )
        return cls(evaluator=evaluator, lower=lower, upper=upper)

    @classmethod
    def constant(cls, level: float) -> "Spectrum":
        """Flat spectrum S(f) = level."""
        if level <= 0.0:
            raise ValueError(f"spectrum level must be positive, got {level}")

        def evaluator(f):
            return np.full(np.shape(np.asarray(f)), float(level))

        return cls(evaluator=evaluator, lower=float(level), upper=float(level))

    def __call__(self, f) -> np.ndarray | float:
        out = self.evaluator(np.asarray(f, dtype=float))
        if np.ndim(f) == 0:
            return float(out)
        return out


def spectrum_partial(cov: CovarianceSequence, n: int, f) -> np.ndarray | float:
    """Truncated spectrum with the +-floor(n/2) circulant window.

    For even n the window is m in [-n/2 + 1, n/2] (the extreme lag enters
    once), for odd n it is symmetric; in both cases the result is the real
    cosine sum, equal to the circulant eigenvalue at f = k/n.
    """
    if n < 3:
        raise InvalidDimensionError(f"n must be >= 3, got {n}")
    f = np.asarray(f, dtype=float)
    half = n // 2
    out = np.full(f.shape, cov.k(0), dtype=float)
    if n % 2 == 0:
        paired = np.arange(1, half)
        single = half
    else:
        paired = np.arange(1, half + 1)
        single = None
    if paired.size:
        out = out + 2.0 * np.cos(2.0 * np.pi * np.multiply.outer(f, paired)) @ np.asarray(
            cov.k(paired)
        )
    if single is not None:
        out = out + cov.k(single) * np.cos(2.0 * np.pi * f * single)
    if out.ndim == 0:
        return float(out)
    return out


def circulant_eigs(cov: CovarianceSequence, n: int) -> np.ndarray:
    """Eigenvalues of the circulant construction: S^[n] at f = k/n."""
    if n < 3:
        raise InvalidDimensionError(f"n must be >= 3, got {n}")
    return np.asarray(spectrum_partial(cov, n, np.arange(n) / n))


def spectral_integral(
    func: Callable[[np.ndarray], np.ndarray],
    spectrum: Spectrum,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> float:
    """Integral over [0, 1] of func(S(f)) by composite Simpson."""
    grid = _grid(grid_size)
    integrand = np.asarray(func(np.asarray(spectrum(grid))), dtype=float)
    if not np.all(np.isfinite(integrand)):
        raise NumericalFailureError("integrand is non-finite on the grid")
    return float(simpson(integrand, x=grid))


# Dynamic-range guard for spectral ratios.
RATIO_MIN = 1e-12
RATIO_MAX = 1e12


def _spectral_ratio(
    spectrum_p: Spectrum, spectrum_q: Spectrum, grid_size: int
) -> tuple[np.ndarray, np.ndarray]:
    grid = _grid(grid_size)
    ratio = np.asarray(spectrum_p(grid)) / np.asarray(spectrum_q(grid))
    if np.any(ratio < RATIO_MIN) or np.any(ratio > RATIO_MAX):
        raise IllConditionedSpectraError(
            "spectral ratio leaves the supported range "
            f"[{RATIO_MIN:g}, {RATIO_MAX:g}] on the grid"
        )
    return grid, ratio


def stein_rate(
    spectrum_p: Spectrum,
    spectrum_q: Spectrum,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> float:
    """Linear growth rate of the relative entropy, in nats per sample.

    One half the integral of (r - log r - 1) with r the spectral ratio;
    an Itakura-Saito-type divergence, zero iff the spectra agree on the
    grid.
    """
    grid, ratio = _spectral_ratio(spectrum_p, spectrum_q, grid_size)
    integrand = ratio - np.log(ratio) - 1.0
    return float(0.5 * simpson(integrand, x=grid))


def bn_limit(
    spectrum_p: Spectrum,
    spectrum_q: Spectrum,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> float:
    """Limit of B_n / sqrt(n): sqrt of the integral of (r - 1)^2."""
    grid, ratio = _spectral_ratio(spectrum_p, spectrum_q, grid_size)
    return float(np.sqrt(simpson((ratio - 1.0) ** 2, x=grid)))


def eig_functional_avg(func: Callable, eigs) -> float:
    """(1/n) sum of func over an eigenvalue sequence."""
    eigs = np.asarray(eigs, dtype=float)
    return float(np.mean(np.asarray(func(eigs), dtype=float)))


@dataclass(frozen=True)
class EquivalenceRow:
    """Norm diagnostics for one dimension of the matrix triple."""

    n: int
    weak_toeplitz_banded: float
    weak_banded_circulant: float
    weak_toeplitz_circulant: float
    strong_toeplitz: float
    strong_banded: float
    strong_circulant: float
    abs_sum_bound: float


def asym_equiv_report(
    cov: CovarianceSequence, n_list: Sequence[int]
) -> list[EquivalenceRow]:
    """Weak/strong norm table for the Toeplitz, banded and circulant triple.

    The weak-norm differences should decay with n while all strong norms
    stay below twice the absolute covariance sum.
    """
    bound = 2.0 * cov.abs_sum
    rows = []
    for n in n_list:
        toep = numlin.toeplitz_from_cov(cov, n)
        band = numlin.banded_from_cov(cov, n)
        circ = numlin.circulant_from_cov(cov, n)
        rows.append(
            EquivalenceRow(
                n=n,
                weak_toeplitz_banded=numlin.weak_norm(toep - band),
                weak_banded_circulant=numlin.weak_norm(band - circ),
                weak_toeplitz_circulant=numlin.weak_norm(toep - circ),
                strong_toeplitz=numlin.strong_norm(toep),
                strong_banded=numlin.strong_norm(band),
                strong_circulant=numlin.strong_norm(circ),
                abs_sum_bound=bound,
            )
        )
    return rows
