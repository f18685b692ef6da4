"""Command-line interface.

Subcommands:

* ``simulate``   — draw one observation series and dump it as CSV (u,v columns)
* ``estimate``   — read a series CSV and print ML and/or factor-graph estimates
* ``bounds``     — print every applicable lower bound for a model / N / sigma
* ``experiment`` — run a Monte-Carlo preset, write the summary CSV (+ figure)

Values resolve as: command-line flag, then --config file entry (keys are flag
names with '-' replaced by '_'), then built-in default.  The environment
variable CLOCKSYNC_SEED, when set, overrides the seed from any source.

Exit codes: 0 success, 2 configuration/usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .exchange import ExchangeParams, GaussMarkovParams, TrialStreams, simulate_gauss_markov
from .experiments import PRESETS, emit_csv, preset_config, run_trials
from .factor_graph import fge_theta
from .likelihoods import make_model
from .ml import ml_theta

__all__ = ["main"]

_DIST_CHOICES = ("gaussian", "lognormal", "exponential")

_DEFAULTS = {
    "dist": "gaussian",
    "assumed_dist": None,
    "sigma_xi": 0.1,
    "sigma_psi": 0.1,
    "lambda_xi": 10.0,
    "lambda_psi": 10.0,
    "d": 1.0,
    "theta0": 0.2,
    "n": 25,
    "trials": None,
    "seed": 20260810,
    "sigma_gm": None,
    "out": None,
    "estimator": "ml",
    "workers": None,
    "matched_variance": None,
}


def _ints_csv(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in str(text).split(","))


def _floats_csv(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in str(text).split(","))


def _add_model_flags(p: argparse.ArgumentParser, with_assumed: bool = False) -> None:
    p.add_argument("--dist", choices=_DIST_CHOICES, default=None, help="delay-likelihood family")
    if with_assumed:
        p.add_argument("--assumed-dist", choices=_DIST_CHOICES, default=None, dest="assumed_dist",
                       help="family the estimator assumes (mismatch studies)")
    p.add_argument("--sigma-xi", type=float, default=None, dest="sigma_xi")
    p.add_argument("--sigma-psi", type=float, default=None, dest="sigma_psi")
    p.add_argument("--lambda-xi", type=float, default=None, dest="lambda_xi")
    p.add_argument("--lambda-psi", type=float, default=None, dest="lambda_psi")
    p.add_argument("--d", type=float, default=None, help="fixed propagation delay")
    p.add_argument("--theta0", type=float, default=None, help="initial/static clock offset")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clocksync", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", default=None, help="key=value config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one observation series to CSV")
    _add_model_flags(p)
    p.add_argument("--n", type=int, default=None, help="number of exchanges")
    p.add_argument("--sigma-gm", type=float, default=None, dest="sigma_gm",
                   help="process-noise std dev (omit or 0 for a static offset)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output CSV path (default series.csv)")

    p = sub.add_parser("estimate", help="estimate the offset from a series CSV")
    p.add_argument("series", help="CSV file with 'u' and 'v' columns")
    _add_model_flags(p)
    p.add_argument("--estimator", choices=("ml", "fge", "both"), default=None)
    p.add_argument("--sigma-gm", type=float, default=None, dest="sigma_gm",
                   help="process-noise std dev (required for the fge estimator)")

    p = sub.add_parser("bounds", help="print lower bounds for a model")
    _add_model_flags(p)
    p.add_argument("--n", type=int, default=None, help="number of exchanges")
    p.add_argument("--sigma-gm", type=float, default=None, dest="sigma_gm",
                   help="process-noise std dev; adds the Bayesian bounds")

    p = sub.add_parser("experiment", help="run a Monte-Carlo preset")
    p.add_argument("preset", choices=PRESETS)
    _add_model_flags(p, with_assumed=True)
    p.add_argument("--n", type=_ints_csv, default=None, dest="n",
                   help="comma-separated list of exchange counts")
    p.add_argument("--sigma-gm", type=_floats_csv, default=None, dest="sigma_gm",
                   help="comma-separated list of process-noise std devs")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="summary CSV path (default <preset>.csv)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--matched-variance", action="store_const", const=True, default=None,
                   dest="matched_variance", help="match gaussian sigma to 1/lambda")
    p.add_argument("--no-plot", action="store_true", help="skip the figure next to the CSV")
    return parser


def _load_config(path: str) -> dict[str, str]:
    text = Path(path).read_text(encoding="utf-8")
    out: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key=value): {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key == "distribution":  # accepted alias for the --dist flag
            key = "dist"
        out[key] = value.strip()
    return out


def _resolve(args: argparse.Namespace, config: dict[str, str], key: str, convert=None):
    value = getattr(args, key, None)
    if value is None and key in config:
        value = config[key]
        if convert is not None:
            value = convert(value)
    if value is None:
        value = _DEFAULTS.get(key)
    return value


def _models(args, config):
    dist = _resolve(args, config, "dist")
    kwargs = {
        "sigma_xi": _resolve(args, config, "sigma_xi", float),
        "sigma_psi": _resolve(args, config, "sigma_psi", float),
        "lambda_xi": _resolve(args, config, "lambda_xi", float),
        "lambda_psi": _resolve(args, config, "lambda_psi", float),
    }
    model_u = make_model(dist, sigma=kwargs["sigma_xi"], rate=kwargs["lambda_xi"])
    model_v = make_model(dist, sigma=kwargs["sigma_psi"], rate=kwargs["lambda_psi"])
    return model_u, model_v


def _seed(args, config) -> int:
    env = os.environ.get("CLOCKSYNC_SEED")
    if env is not None:
        return int(env)
    return int(_resolve(args, config, "seed", int))


def _cmd_simulate(args, config) -> int:
    model_u, model_v = _models(args, config)
    params = ExchangeParams(_resolve(args, config, "d", float), _resolve(args, config, "theta0", float))
    n = int(_resolve(args, config, "n", int))
    sigma_gm = _resolve(args, config, "sigma_gm", float)
    gm = GaussMarkovParams(float(sigma_gm) if sigma_gm else 0.0)
    streams = TrialStreams.for_trial(_seed(args, config), 0)
    series, _ = simulate_gauss_markov(params, gm, model_u, model_v, n, streams)
    out = Path(_resolve(args, config, "out") or "series.csv")
    lines = ["u,v"] + [f"{float(u)!r},{float(v)!r}" for u, v in zip(series.u, series.v)]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {series.n} exchanges to {out}")
    return 0


def _read_series(path: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "u" not in reader.fieldnames or "v" not in reader.fieldnames:
            raise ValueError(f"{path}: expected a CSV with 'u' and 'v' columns")
        rows = [(float(row["u"]), float(row["v"])) for row in reader]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    u, v = zip(*rows)
    return np.array(u), np.array(v)


def _cmd_estimate(args, config) -> int:
    model_u, model_v = _models(args, config)
    estimator = _resolve(args, config, "estimator")
    sigma_gm = _resolve(args, config, "sigma_gm", float)
    if estimator in ("fge", "both") and not (sigma_gm and float(sigma_gm) > 0):
        raise ConfigError("the fge estimator needs --sigma-gm > 0")
    u, v = _read_series(args.series)
    if estimator in ("ml", "both"):
        est = ml_theta(u, v, model_u, model_v)
        for name in ("xi_hat", "psi_hat", "theta_hat", "d_hat"):
            print(f"ml_{name}={getattr(est, name)!r}")
    if estimator in ("fge", "both"):
        est = fge_theta(u, v, model_u, model_v, float(sigma_gm))
        print(f"fge_xi_hat={est.xi_hat_n!r}")
        print(f"fge_psi_hat={est.psi_hat_n!r}")
        print(f"fge_theta_hat={est.theta_hat_n!r}")
        print(f"fge_d_hat={est.d_hat_n!r}")
    return 0


def _cmd_bounds(args, config) -> int:
    model_u, model_v = _models(args, config)
    n = int(_resolve(args, config, "n", int))
    sigma_gm = _resolve(args, config, "sigma_gm", float)
    per_param = {}
    if not model_u.constrained:
        per_param["crb"] = (bnd.crb(model_u, n), bnd.crb(model_v, n))
    per_param["chrb"] = (
        bnd.chrb(model_u, n).per_param_bound,
        bnd.chrb(model_v, n).per_param_bound,
    )
    if sigma_gm and float(sigma_gm) > 0:
        s = float(sigma_gm)
        per_param["bcrb"] = (
            float(bnd.bcrb(model_u.sigma_eta_sq, s, n)[1][-1]),
            float(bnd.bcrb(model_v.sigma_eta_sq, s, n)[1][-1]),
        )
        per_param["bchrb"] = (
            bnd.bchrb(model_u, s, n).per_param_bound,
            bnd.bchrb(model_v, s, n).per_param_bound,
        )
    for kind, (bound_xi, bound_psi) in per_param.items():
        print(f"{kind}_xi={bound_xi!r}")
        print(f"{kind}_psi={bound_psi!r}")
        print(f"{kind}_theta_bound={bnd.mse_bound_theta(bound_xi, bound_psi)!r}")
    return 0


def _override(args, config, key: str, convert=None):
    """Flag value if given, else config-file value, else None (keep preset default)."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return convert(config[key]) if convert else config[key]
    return None


def _cmd_experiment(args, config) -> int:
    overrides = {
        "dist": _override(args, config, "dist"),
        "assumed_dist": _override(args, config, "assumed_dist"),
        "sigma_xi": _override(args, config, "sigma_xi", float),
        "sigma_psi": _override(args, config, "sigma_psi", float),
        "lambda_xi": _override(args, config, "lambda_xi", float),
        "lambda_psi": _override(args, config, "lambda_psi", float),
        "d": _override(args, config, "d", float),
        "theta0": _override(args, config, "theta0", float),
        "n_list": _override(args, config, "n", _ints_csv),
        "sigma_gm_list": _override(args, config, "sigma_gm", _floats_csv),
        "trials": _override(args, config, "trials", int),
        "seed": _seed(args, config),
        "workers": _override(args, config, "workers", int),
        "matched_variance": args.matched_variance,
    }
    cfg = preset_config(args.preset, **overrides)
    out = Path(_resolve(args, config, "out") or f"{args.preset}.csv")
    cfg = replace(cfg, out=str(out))

    records = run_trials(cfg)
    emit_csv(records, out)
    print(f"wrote {len(records)} records to {out}")
    if not args.no_plot:
        from .plotting import render_records

        figure = render_records(records, out.with_suffix(".png"))
        print(f"wrote figure to {figure}")
    return 0


class ConfigError(ValueError):
    """Bad flag/config combination detected after parsing."""


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "bounds": _cmd_bounds,
    "experiment": _cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else (0 if code is None else 2)

    try:
        config = _load_config(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        return _COMMANDS[args.command](args, config)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
