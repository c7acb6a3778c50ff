"""Experiment runner CLI.

Subcommands map one-to-one onto the studies the library supports:

    rate         relative-entropy growth vs the spectral rate
    typical      good-threshold coverage of typical sets
    detect       detector error exponents and the analytic sandwich
    asymptotics  Toeplitz/circulant equivalence diagnostics
    sublinear    the closed-form sublinear-KL example

Configuration comes from a JSON file (--config) with flag overrides; output
is CSV with '#'-prefixed metadata lines.  Exit codes: 0 success, 2 config
error, 3 numerical failure, 4 check failure (with --check).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from typing import Any

import numpy as np

from . import detect, gaussian, numlin, spectral, typicality, sublinear, units
from .exceptions import (
    DegeneratePairError,
    IllConditionedSpectraError,
    NumericalFailureError,
    SteinlabError,
)

LN2 = units.LN2


class ConfigError(Exception):
    pass


class CheckFailure(Exception):
    pass


DEFAULTS: dict[str, dict[str, Any]] = {
    "rate": {
        "cov_p": {"kind": "geometric", "rho": 0.5, "scale": 1.0},
        "cov_q": {"kind": "white", "scale": 1.0},
        "ns": [64, 128, 256, 512],
        "unit": "nats",
        "out": None,
    },
    "typical": {
        "variant": "rel_entropy",
        "cov_p": {"kind": "geometric", "rho": 0.5, "scale": 1.0},
        "cov_q": {"kind": "white", "scale": 1.0},
        "ns": [64, 128, 256],
        "eps": 0.05,
        "delta_factor": 1.1,
        "samples": 100_000,
        "seed": 1,
        "unit": "nats",
        "out": None,
    },
    "detect": {
        "cov_p": {"kind": "geometric", "rho": 0.5, "scale": 1.0},
        "cov_q": {"kind": "white", "scale": 1.0},
        "ns": [32, 64, 96, 128, 160, 192, 224, 256],
        "tau": 0.2,
        "samples": 100_000,
        "seed": 1,
        "unit": "nats",
        "out": None,
    },
    "asymptotics": {
        "cov_p": {"kind": "geometric", "rho": 0.5, "scale": 1.0},
        "ns": [64, 128, 256, 512],
        "unit": "nats",
        "out": None,
    },
    "sublinear": {
        "ns": [4, 16, 64, 256, 1024, 4096],
        "unit": "nats",
        "out": None,
    },
}

# Columns whose values are in nats; divided by ln 2 under --unit bits.
NAT_COLUMNS: dict[str, set[str]] = {
    "rate": {"D", "D_over_n", "C_s", "abs_err"},
    "typical": {"delta_min"},
    "detect": {"D", "lower", "upper", "np_beta_log", "ts_beta_log"},
    "asymptotics": {"eigavg_log", "spectral_log"},
    "sublinear": {"D", "ln_sqrt_n", "beta_log"},
}


def covariance_from_spec(spec: dict) -> spectral.CovarianceSequence:
    try:
        kind = spec["kind"]
        if kind == "white":
            return spectral.CovarianceSequence.white(float(spec.get("scale", 1.0)))
        if kind == "geometric":
            return spectral.CovarianceSequence.geometric(
                float(spec["rho"]), float(spec.get("scale", 1.0))
            )
        if kind == "table":
            return spectral.CovarianceSequence.from_table(spec["values"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad covariance spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown covariance kind {spec.get('kind')!r}")


def _validate(config: dict) -> None:
    ns = config.get("ns")
    if not ns or list(ns) != sorted(ns):
        raise ConfigError(f"field 'ns': must be a non-empty ascending list, got {ns}")
    for key in ("tau", "eps"):
        if key in config and not 0.0 < float(config[key]) < 1.0:
            raise ConfigError(f"field {key!r}: must lie in (0, 1), got {config[key]}")
    if "tau" in config and float(config["tau"]) >= 0.5:
        raise ConfigError(f"field 'tau': must be < 0.5, got {config['tau']}")
    if "samples" in config and int(config["samples"]) < 1000:
        raise ConfigError(f"field 'samples': must be >= 1000, got {config['samples']}")
    if config.get("unit") not in ("nats", "bits"):
        raise ConfigError(f"field 'unit': must be 'nats' or 'bits', got {config.get('unit')}")


def run_rate(config: dict) -> tuple[list[str], list[dict]]:
    cov_p = covariance_from_spec(config["cov_p"])
    cov_q = covariance_from_spec(config["cov_q"])
    rate = spectral.stein_rate(cov_p.spectrum(), cov_q.spectrum())
    if rate == 0.0:
        raise ConfigError("cov_p and cov_q induce identical spectra (degenerate pair)")
    rows = []
    for n in config["ns"]:
        kl = gaussian.kl_gaussian(
            numlin.toeplitz_from_cov(cov_p, n), numlin.toeplitz_from_cov(cov_q, n)
        )
        rows.append(
            {
                "n": n,
                "D": kl,
                "D_over_n": kl / n,
                "C_s": rate,
                "abs_err": abs(kl / n - rate),
            }
        )
    summary = [f"# summary: C_s={rate:.12g} final_abs_err={rows[-1]['abs_err']:.12g}"]
    return summary, rows


def run_typical(config: dict) -> tuple[list[str], list[dict]]:
    eps = float(config["eps"])
    factor = float(config.get("delta_factor", 1.0))
    samples = int(config["samples"])
    seed = int(config["seed"])
    variant = config.get("variant", "rel_entropy")
    cov_p = covariance_from_spec(config["cov_p"])
    rows = []
    for i, n in enumerate(config["ns"]):
        lam_p = numlin.toeplitz_from_cov(cov_p, n)
        if variant == "entropy":
            delta_min = typicality.good_delta_white_gaussian(n, eps)
            b_n = math.sqrt(n)
            spec = typicality.TypicalSetSpec.entropy(
                gaussian.model_from_cov(lam_p), factor * delta_min
            )
        elif variant == "rel_entropy":
            cov_q = covariance_from_spec(config["cov_q"])
            pair = gaussian.whiten(lam_p, numlin.toeplitz_from_cov(cov_q, n))
            threshold = typicality.good_delta_correlated(pair, eps)
            delta_min, b_n = threshold.delta, threshold.b_n
            spec = typicality.TypicalSetSpec.relative_entropy(pair, factor * delta_min)
        else:
            raise ConfigError(f"field 'variant': unknown value {variant!r}")
        mc = typicality.mc_typical_prob(spec, samples, seed * 1000 + i)
        rows.append(
            {
                "n": n,
                "B_n": b_n,
                "delta_min": delta_min,
                "p_hat": mc.estimate,
                "stderr": mc.stderr,
                "pass": mc.estimate >= 1.0 - eps - 3.0 * mc.stderr,
            }
        )
    summary = [f"# summary: variant={variant} eps={eps:g} delta_factor={factor:g}"]
    return summary, rows


def run_detect(config: dict) -> tuple[list[str], list[dict]]:
    cov_p = covariance_from_spec(config["cov_p"])
    cov_q = covariance_from_spec(config["cov_q"])
    result = detect.gcsl_experiment(
        cov_p,
        cov_q,
        float(config["tau"]),
        list(config["ns"]),
        int(config["samples"]),
        int(config["seed"]),
    )
    rows = [
        {
            "n": r.n,
            "D": r.kl,
            "lower": r.exp_lower,
            "upper": r.exp_upper,
            "np_beta_log": r.np_beta_log,
            "ts_beta_log": r.ts_beta_log,
            "in_window": r.in_window,
        }
        for r in result.rows
    ]
    summary = [
        f"# summary: slope={result.slope:.12g} C_s={result.stein_rate:.12g} "
        f"rel_err={result.slope_rel_err:.12g}"
    ]
    return summary, rows


def run_asymptotics(config: dict) -> tuple[list[str], list[dict]]:
    cov = covariance_from_spec(config["cov_p"])
    spectrum = cov.spectrum()
    targets = {
        "spectral_x": spectral.spectral_integral(lambda s: s, spectrum),
        "spectral_log": spectral.spectral_integral(np.log, spectrum),
        "spectral_inv": spectral.spectral_integral(lambda s: 1.0 / s, spectrum),
    }
    rows = []
    for n in config["ns"]:
        toep = numlin.toeplitz_from_cov(cov, n)
        circ = numlin.circulant_from_cov(cov, n)
        eigs = numlin.eig_sym(toep).eigenvalues
        rows.append(
            {
                "n": n,
                "weak_diff_toeplitz_circulant": numlin.weak_norm(toep - circ),
                "eigavg_x": spectral.eig_functional_avg(lambda v: v, eigs),
                "eigavg_log": spectral.eig_functional_avg(np.log, eigs),
                "eigavg_inv": spectral.eig_functional_avg(lambda v: 1.0 / v, eigs),
                **targets,
            }
        )
    return [], rows


def run_sublinear(config: dict) -> tuple[list[str], list[dict]]:
    rows = []
    for n in config["ns"]:
        kl = sublinear.sub_kl(n)
        errors = sublinear.exact_error_pair(n)
        rows.append(
            {
                "n": n,
                "D": kl,
                "ln_sqrt_n": 0.5 * math.log(n),
                "ratio": kl / (0.5 * math.log(n)),
                "p_B": sublinear.sub_typical_lb(n),
                "alpha_exact": errors.alpha,
                "beta_exact": errors.beta,
                "beta_log": errors.beta_log,
            }
        )
    return [], rows


RUNNERS = {
    "rate": run_rate,
    "typical": run_typical,
    "detect": run_detect,
    "asymptotics": run_asymptotics,
    "sublinear": run_sublinear,
}


def run_check(command: str, rows: list[dict]) -> None:
    """Built-in pass/fail assertions, one family per subcommand."""
    if command == "rate":
        if len(rows) >= 2 and not rows[-1]["abs_err"] < rows[0]["abs_err"]:
            raise CheckFailure("abs_err did not decrease with n")
    elif command == "typical":
        failed = [r["n"] for r in rows if not r["pass"]]
        if failed:
            raise CheckFailure(f"coverage check failed at n={failed}")
    elif command == "detect":
        failed = [r["n"] for r in rows if not r["in_window"]]
        if failed:
            raise CheckFailure(f"exponent left the analytic window at n={failed}")
    elif command == "asymptotics":
        if len(rows) >= 2:
            first, last = rows[0], rows[-1]
            if not last["weak_diff_toeplitz_circulant"] < first["weak_diff_toeplitz_circulant"]:
                raise CheckFailure("weak-norm difference did not decrease")
            for key in ("eigavg_x", "eigavg_log", "eigavg_inv"):
                target = last[key.replace("eigavg", "spectral")]
                if not abs(last[key] - target) <= abs(first[key] - target) + 1e-12:
                    raise CheckFailure(f"{key} did not approach its spectral integral")
    elif command == "sublinear":
        if len(rows) >= 2 and not abs(rows[-1]["ratio"] - 1.0) < abs(rows[0]["ratio"] - 1.0):
            raise CheckFailure("D / ln(sqrt n) did not approach 1")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def render_csv(command: str, config: dict, summary: list[str], rows: list[dict]) -> str:
    digest = hashlib.sha256(
        json.dumps(config, sort_keys=True, default=str).encode()
    ).hexdigest()[:12]
    seed = config.get("seed", "none")
    lines = [f"# command={command} config_hash={digest} seed={seed} unit={config['unit']}"]
    lines.extend(summary)
    if rows:
        columns = list(rows[0].keys())
        lines.append(",".join(columns))
        to_bits = config["unit"] == "bits"
        nat_cols = NAT_COLUMNS.get(command, set())
        for row in rows:
            cells = []
            for col in columns:
                value = row[col]
                if to_bits and col in nat_cols:
                    value = float(value) / LN2
                cells.append(_format_value(value))
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steinlab", description="Run error-exponent experiments and emit CSV."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} study")
        p.add_argument("--config", metavar="PATH", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--n-list", metavar="N1,N2,...", help="comma-separated n values")
        p.add_argument("--tau", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--unit", choices=["nats", "bits"])
        p.add_argument("--out", metavar="PATH", help="output CSV path (default stdout)")
        p.add_argument("--check", action="store_true", help="run built-in checks")
    return parser


def merge_config(args: argparse.Namespace) -> dict:
    config = dict(DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as handle:
                loaded = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        config.update(loaded)
    if args.n_list is not None:
        try:
            config["ns"] = [int(v) for v in args.n_list.split(",") if v]
        except ValueError as exc:
            raise ConfigError(f"bad --n-list {args.n_list!r}") from exc
    for key in ("seed", "tau", "eps", "samples", "unit", "out"):
        value = getattr(args, key)
        if value is not None:
            config[key] = value
    _validate(config)
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = merge_config(args)
        summary, rows = RUNNERS[args.command](config)
        text = render_csv(args.command, config, summary, rows)
        if config.get("out"):
            with open(config["out"], "w") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)
        if args.check:
            run_check(args.command, rows)
    except (ConfigError, DegeneratePairError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailureError, IllConditionedSpectraError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 4
    except SteinlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
