"""Detectors, error-rate estimation, and error-exponent extraction.

The minimal type-II error beta_tau is approximated by the likelihood-ratio
detector calibrated so its type-I error stays below tau; the typical-set
detector realizes the analytic upper-bound construction.  Type-II errors
are estimated by exact change of measure (sampling under p with weights
e^{-LLR}), which stays accurate down to e^{-200} through log-domain
accumulation.

Simulation runs in whitened coordinates: both error probabilities and the
LLR law are invariant under the whitening bijection, so samples are drawn
from diag(kappas) vs identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from . import gaussian, numlin, spectral, streams, typicality
from .exceptions import DegeneratePairError, VacuousBoundError

NEG_INF = float("-inf")


@dataclass(frozen=True)
class DetectorSpec:
    """Decision region for p: LLR above a threshold, or LLR near the KL.

    kind "np_threshold": decide p when llr(x) > threshold.
    kind "typical_set": decide p when |llr(x) - kl| <= gamma.
    """

    kind: str
    threshold: float = math.nan  # np_threshold
    gamma: float = math.nan  # typical_set

    @classmethod
    def np_threshold(cls, threshold: float) -> "DetectorSpec":
        if not math.isfinite(threshold):
            raise ValueError(f"threshold must be finite, got {threshold}")
        return cls(kind="np_threshold", threshold=threshold)

    @classmethod
    def typical_set(cls, gamma: float) -> "DetectorSpec":
        if gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        return cls(kind="typical_set", gamma=gamma)

    def accepts_p(self, llr_values: np.ndarray, kl: float) -> np.ndarray:
        """Boolean mask: which LLR values fall in the p-decision region."""
        if self.kind == "np_threshold":
            return llr_values > self.threshold
        return np.abs(llr_values - kl) <= self.gamma


@dataclass(frozen=True)
class ErrorEstimates:
    """Monte Carlo error-rate estimates for one detector at one n."""

    alpha_hat: float
    beta_hat: float
    beta_log: float  # -ln beta_hat, nats
    stderr_alpha: float
    stderr_beta_log: float
    count: int
    seed: int
    underflow: bool = False


def _require_pair(pair: gaussian.HypothesisPair) -> None:
    if pair.b_n == 0.0:
        raise DegeneratePairError("hypotheses are identical; no exponent to estimate")


def _llr_chunks_p(pair: gaussian.HypothesisPair, count: int, seed: int):
    # Under p (whitened), x_k = sqrt(kappa_k) z_k and the LLR reduces to
    # sum 0.5 (kappa_k - 1) z_k^2 - 0.5 sum log kappa_k.
    coef = 0.5 * (pair.kappas - 1.0)
    offset = -0.5 * float(np.sum(np.log(pair.kappas)))
    for z in streams.standard_normal_chunks(seed, count, pair.n):
        yield (z * z) @ coef + offset


def _llr_chunks_q(pair: gaussian.HypothesisPair, count: int, seed: int):
    coef = 0.5 * (1.0 - 1.0 / pair.kappas)
    offset = -0.5 * float(np.sum(np.log(pair.kappas)))
    for z in streams.standard_normal_chunks(seed, count, pair.n):
        yield (z * z) @ coef + offset


def sample_llr(
    pair: gaussian.HypothesisPair, count: int, seed: int, under: str = "p"
) -> np.ndarray:
    """LLR values of `count` draws from p or q, in whitened coordinates."""
    chunks = _llr_chunks_p if under == "p" else _llr_chunks_q
    return np.concatenate(list(chunks(pair, count, seed)))


def np_calibrate(
    pair: gaussian.HypothesisPair, tau: float, count: int, seed: int
) -> DetectorSpec:
    """Threshold detector at the empirical tau-quantile of the LLR under p.

    The LLR is continuous, so the quantile rule needs no randomization and
    the achieved type-I error concentrates below tau.
    """
    if not 0.0 < tau < 0.5:
        raise ValueError(f"tau must lie in (0, 1/2), got {tau}")
    if count < 10_000:
        raise ValueError(f"count must be >= 10000, got {count}")
    _require_pair(pair)
    llrs = sample_llr(pair, count, seed, under="p")
    threshold = float(np.quantile(llrs, tau, method="lower"))
    return DetectorSpec.np_threshold(threshold)


@dataclass(frozen=True)
class AlphaEstimate:
    alpha_hat: float
    stderr: float


def estimate_alpha(
    det: DetectorSpec, pair: gaussian.HypothesisPair, count: int, seed: int
) -> AlphaEstimate:
    """Fraction of p-samples the detector rejects."""
    if count < 1000:
        raise ValueError(f"count must be >= 1000, got {count}")
    rejects = 0
    for llrs in _llr_chunks_p(pair, count, seed):
        rejects += int(np.count_nonzero(~det.accepts_p(llrs, pair.kl)))
    alpha = rejects / count
    stderr = math.sqrt(max(alpha * (1.0 - alpha), 0.0) / count)
    return AlphaEstimate(alpha_hat=alpha, stderr=stderr)


def estimate_beta_is(
    det: DetectorSpec, pair: gaussian.HypothesisPair, count: int, seed: int
) -> ErrorEstimates:
    """Unbiased type-II error estimate from p-samples only.

    beta = q(decide p) = E_p[e^{-LLR} 1{decide p}]; the weights are summed
    with a max-shift so beta down to e^{-200} is representable.  The
    reported stderr is for -ln(beta_hat), by the delta method.
    """
    if count < 1000:
        raise ValueError(f"count must be >= 1000, got {count}")
    log_weight_blocks = []
    rejects = 0
    for llrs in _llr_chunks_p(pair, count, seed):
        accepted = det.accepts_p(llrs, pair.kl)
        rejects += int(np.count_nonzero(~accepted))
        block = np.where(accepted, -llrs, NEG_INF)
        log_weight_blocks.append(block)
    log_weights = np.concatenate(log_weight_blocks)
    alpha = rejects / count
    stderr_alpha = math.sqrt(max(alpha * (1.0 - alpha), 0.0) / count)

    if np.all(np.isneginf(log_weights)):
        return ErrorEstimates(
            alpha_hat=alpha,
            beta_hat=0.0,
            beta_log=math.inf,
            stderr_alpha=stderr_alpha,
            stderr_beta_log=math.inf,
            count=count,
            seed=seed,
            underflow=True,
        )

    log_beta = float(logsumexp(log_weights)) - math.log(count)
    # Relative spread of the weights: Var(w)/(N mean(w)^2) in log domain.
    log_second = float(logsumexp(2.0 * log_weights)) - math.log(count)
    rel_var = math.expm1(min(log_second - 2.0 * log_beta, _LOG_HUGE))
    stderr_beta_log = math.sqrt(max(rel_var, 0.0) / count)
    return ErrorEstimates(
        alpha_hat=alpha,
        beta_hat=math.exp(log_beta) if log_beta > -700.0 else 0.0,
        beta_log=-log_beta,
        stderr_alpha=stderr_alpha,
        stderr_beta_log=stderr_beta_log,
        count=count,
        seed=seed,
    )


_LOG_HUGE = 700.0


@dataclass(frozen=True)
class SteinBounds:
    """Two-sided window on beta_tau and on its exponent, in nats."""

    beta_lower: float
    beta_upper: float
    exp_lower: float  # lower edge of the -ln(beta) window
    exp_upper: float


def stein_bounds(
    kl: float, delta: float, gamma: float, eps: float, tau: float
) -> SteinBounds:
    """Sandwich (1-eps-tau)e^-(D+delta) <= beta_tau <= e^-(D-gamma)."""
    if delta <= 0.0 or gamma <= 0.0:
        raise ValueError(f"delta and gamma must be positive, got {delta}, {gamma}")
    if eps < 0.0 or tau < 0.0 or eps + tau >= 1.0:
        raise VacuousBoundError(f"eps + tau must be < 1, got {eps} + {tau}")
    exp_lower = kl - gamma
    exp_upper = kl + delta - math.log1p(-(eps + tau))
    return SteinBounds(
        beta_lower=typicality._exp_or_inf(-exp_upper),
        beta_upper=typicality._exp_or_inf(-exp_lower),
        exp_lower=exp_lower,
        exp_upper=exp_upper,
    )


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r2: float


def exponent_fit(ns: Sequence[int], beta_logs: Sequence[float]) -> ExponentFit:
    """Least-squares slope of -ln(beta) against n."""
    ns = np.asarray(ns, dtype=float)
    beta_logs = np.asarray(beta_logs, dtype=float)
    if ns.size < 3 or ns.size != beta_logs.size:
        raise ValueError("need at least 3 (n, beta_log) points")
    if np.ptp(ns) == 0.0:
        raise ValueError("abscissae are degenerate")
    slope, intercept = np.polyfit(ns, beta_logs, 1)
    fitted = slope * ns + intercept
    ss_res = float(np.sum((beta_logs - fitted) ** 2))
    ss_tot = float(np.sum((beta_logs - np.mean(beta_logs)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ExponentFit(slope=float(slope), intercept=float(intercept), r2=r2)


@dataclass(frozen=True)
class GcslRow:
    """Per-dimension results of the full pipeline run."""

    n: int
    kl: float
    kl_per_n: float
    b_n: float
    delta: float
    gamma: float
    exp_lower: float
    exp_upper: float
    np_threshold: float
    np_alpha: float
    np_beta_log: float
    np_beta_stderr: float
    ts_alpha: float
    ts_beta_log: float
    ts_beta_stderr: float
    in_window: bool


@dataclass(frozen=True)
class GcslResult:
    rows: list[GcslRow]
    stein_rate: float
    bn_rate: float
    slope: float
    intercept: float
    r2: float
    slope_rel_err: float


def gcsl_experiment(
    cov_p: spectral.CovarianceSequence,
    cov_q: spectral.CovarianceSequence,
    tau: float,
    ns: Sequence[int],
    count: int,
    seed: int,
) -> GcslResult:
    """Run the full exponent study for a pair of covariance sequences.

    For each n: exact KL and B_n, minimal good thresholds at (tau, eps=tau),
    the analytic exponent window, and Monte Carlo -ln(beta) for both the
    calibrated threshold detector and the typical-set detector.  Calibration
    and evaluation use independent derived seeds.
    """
    if not 0.0 < tau < 0.5:
        raise ValueError(f"tau must lie in (0, 1/2), got {tau}")
    ns = list(ns)
    if ns != sorted(ns) or len(set(ns)) != len(ns):
        raise ValueError("ns must be strictly ascending")
    spectrum_p = cov_p.spectrum()
    spectrum_q = cov_q.spectrum()
    rate = spectral.stein_rate(spectrum_p, spectrum_q)
    if rate == 0.0:
        raise DegeneratePairError("the two covariance sequences coincide")
    bn_rate = spectral.bn_limit(spectrum_p, spectrum_q)

    rows = []
    for i, n in enumerate(ns):
        lam_p = numlin.toeplitz_from_cov(cov_p, n)
        lam_q = numlin.toeplitz_from_cov(cov_q, n)
        pair = gaussian.whiten(lam_p, lam_q)
        _require_pair(pair)
        threshold_info = typicality.good_delta_correlated(pair, tau)
        delta = gamma = threshold_info.delta
        window = stein_bounds(pair.kl, delta, gamma, tau, tau)

        seed_cal = seed * 1000 + 2 * i
        seed_eval = seed * 1000 + 2 * i + 1
        det_np = np_calibrate(pair, tau, count, seed_cal)
        est_np = estimate_beta_is(det_np, pair, count, seed_eval)
        det_ts = DetectorSpec.typical_set(gamma)
        est_ts = estimate_beta_is(det_ts, pair, count, seed_eval)

        margin = 3.0 * est_np.stderr_beta_log
        in_window = (
            window.exp_lower - margin <= est_np.beta_log <= window.exp_upper + margin
        )
        rows.append(
            GcslRow(
                n=n,
                kl=pair.kl,
                kl_per_n=pair.kl / n,
                b_n=threshold_info.b_n,
                delta=delta,
                gamma=gamma,
                exp_lower=window.exp_lower,
                exp_upper=window.exp_upper,
                np_threshold=det_np.threshold,
                np_alpha=est_np.alpha_hat,
                np_beta_log=est_np.beta_log,
                np_beta_stderr=est_np.stderr_beta_log,
                ts_alpha=est_ts.alpha_hat,
                ts_beta_log=est_ts.beta_log,
                ts_beta_stderr=est_ts.stderr_beta_log,
                in_window=in_window,
            )
        )

    fit = exponent_fit([r.n for r in rows], [r.np_beta_log for r in rows])
    return GcslResult(
        rows=rows,
        stein_rate=rate,
        bn_rate=bn_rate,
        slope=fit.slope,
        intercept=fit.intercept,
        r2=fit.r2,
        slope_rel_err=abs(fit.slope - rate) / rate,
    )
