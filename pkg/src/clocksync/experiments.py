"""Monte-Carlo experiment harness: presets, trial runner, CSV emission.

A run is a grid of cells (true model pair, number of exchanges, process-noise
level).  Each cell simulates ``trials`` independent datasets, applies every
configured estimator to the same data, scores squared error against the true
offset (static cells) or the final-step offset (drifting cells), and attaches
the applicable lower bounds.  Trials are seeded per (trial, channel), so
results are byte-reproducible and independent of worker count.
"""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .exchange import (
    ExchangeParams,
    GaussMarkovParams,
    TrialStreams,
    simulate_gauss_markov,
    simulate_static,
)
from .factor_graph import fge_theta
from .likelihoods import Exponential, LikelihoodModel, make_model, model_label
from .ml import ml_theta

__all__ = [
    "ExperimentConfig",
    "MseRecord",
    "PRESETS",
    "preset_config",
    "run_trials",
    "emit_csv",
    "CSV_HEADER",
]

_N_SWEEP = (5, 10, 15, 20, 25)
_SIGMA_SWEEP = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
_FAMILIES = ("gaussian", "lognormal", "exponential")

PRESETS = (
    "ml-mismatch-lognormal",
    "fge-lognormal",
    "ml-vs-bounds",
    "fge-vs-bounds",
    "fge-vs-sigma",
    "custom",
)

_PRESET_DEFAULTS: dict[str, dict] = {
    # Static ML under log-normal truth vs estimators assuming the wrong family.
    "ml-mismatch-lognormal": {"dist": "lognormal", "n_list": _N_SWEEP, "trials": 10_000},
    # Drifting offset under log-normal truth, right and wrong assumed families.
    "fge-lognormal": {"dist": "lognormal", "n_list": _N_SWEEP, "sigma_gm_list": (1e-4,), "trials": 2_000},
    # Correct ML per family against the classical bounds, observation variances matched.
    "ml-vs-bounds": {"n_list": _N_SWEEP, "trials": 10_000, "matched_variance": True},
    # Correct factor-graph estimator per family against the Bayesian bounds.
    "fge-vs-bounds": {"n_list": _N_SWEEP, "sigma_gm_list": (1e-4,), "trials": 2_000, "matched_variance": True},
    # Factor-graph vs ML as the process noise sweeps from negligible to dominant.
    "fge-vs-sigma": {"n_list": (25,), "sigma_gm_list": _SIGMA_SWEEP, "trials": 2_000},
    "custom": {},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; presets fill the fields, flags may override."""

    preset: str = "custom"
    dist: str = "gaussian"
    sigma_xi: float = 0.1
    sigma_psi: float = 0.1
    lambda_xi: float = 10.0
    lambda_psi: float = 10.0
    d: float = 1.0
    theta0: float = 0.2
    n_list: tuple[int, ...] = (25,)
    sigma_gm_list: tuple[float, ...] = ()
    trials: int = 10_000
    seed: int = 20260810
    assumed_dist: str | None = None
    out: str = "results.csv"
    matched_variance: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r} (expected one of {PRESETS})")
        if self.dist not in _FAMILIES:
            raise ValueError(f"unknown distribution {self.dist!r}")
        if self.assumed_dist is not None and self.assumed_dist not in _FAMILIES:
            raise ValueError(f"unknown assumed distribution {self.assumed_dist!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ValueError("n_list must be a nonempty list of positive integers")
        if any(s <= 0 for s in self.sigma_gm_list):
            raise ValueError("sigma_gm values must be positive (omit the list for static runs)")
        if self.preset.startswith("fge") and not self.sigma_gm_list:
            raise ValueError(f"preset {self.preset!r} needs at least one sigma_gm value")
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "sigma_gm_list", tuple(float(s) for s in self.sigma_gm_list))


def preset_config(preset: str, **overrides) -> ExperimentConfig:
    """Config for a preset with its figure-specific defaults, then overrides."""
    if preset not in _PRESET_DEFAULTS:
        raise ValueError(f"unknown preset {preset!r} (expected one of {PRESETS})")
    kwargs: dict = {"preset": preset}
    kwargs.update(_PRESET_DEFAULTS[preset])
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**kwargs)


@dataclass(frozen=True)
class MseRecord:
    """One estimator's aggregated performance in one cell, plus bound values."""

    preset: str
    estimator: str
    true_model: str
    assumed_model: str
    n: int
    sigma_gm: float
    trials: int
    mse: float
    stderr: float
    crb: float | None = None
    chrb: float | None = None
    bcrb: float | None = None
    bchrb: float | None = None


@dataclass(frozen=True)
class _Estimator:
    kind: str  # "ml" | "fge"
    model_u: LikelihoodModel
    model_v: LikelihoodModel


@dataclass(frozen=True)
class _Cell:
    model_u: LikelihoodModel
    model_v: LikelihoodModel
    n: int
    sigma_gm: float  # 0.0 means static
    estimators: tuple[_Estimator, ...]


def _model_pair(config: ExperimentConfig, family: str) -> tuple[LikelihoodModel, LikelihoodModel]:
    if family == "exponential":
        return make_model(family, rate=config.lambda_xi), make_model(family, rate=config.lambda_psi)
    if family == "gaussian" and config.matched_variance:
        # Fair cross-family comparison: Exp(rate) delays have std 1/rate.
        return make_model(family, sigma=1.0 / config.lambda_xi), make_model(family, sigma=1.0 / config.lambda_psi)
    return make_model(family, sigma=config.sigma_xi), make_model(family, sigma=config.sigma_psi)


def _plan_cells(config: ExperimentConfig) -> list[_Cell]:
    preset = config.preset
    if preset == "ml-mismatch-lognormal":
        truth = _model_pair(config, "lognormal")
        ests = tuple(_Estimator("ml", *_model_pair(config, fam)) for fam in _FAMILIES)
        return [_Cell(*truth, n, 0.0, ests) for n in config.n_list]
    if preset == "fge-lognormal":
        truth = _model_pair(config, "lognormal")
        ests = tuple(_Estimator("fge", *_model_pair(config, fam)) for fam in _FAMILIES)
        return [_Cell(*truth, n, s, ests) for n in config.n_list for s in config.sigma_gm_list]
    if preset == "ml-vs-bounds":
        cells = []
        for fam in ("gaussian", "exponential"):
            truth = _model_pair(config, fam)
            cells += [_Cell(*truth, n, 0.0, (_Estimator("ml", *truth),)) for n in config.n_list]
        return cells
    if preset == "fge-vs-bounds":
        cells = []
        for fam in ("gaussian", "exponential"):
            truth = _model_pair(config, fam)
            cells += [
                _Cell(*truth, n, s, (_Estimator("fge", *truth),))
                for n in config.n_list
                for s in config.sigma_gm_list
            ]
        return cells
    if preset == "fge-vs-sigma":
        cells = []
        for fam in _FAMILIES:
            truth = _model_pair(config, fam)
            ests = (_Estimator("fge", *truth), _Estimator("ml", *truth))
            cells += [_Cell(*truth, n, s, ests) for n in config.n_list for s in config.sigma_gm_list]
        return cells
    # custom: one truth family, one assumed family, ML always, FGE when drifting.
    truth = _model_pair(config, config.dist)
    assumed = _model_pair(config, config.assumed_dist or config.dist)
    if not config.sigma_gm_list:
        return [_Cell(*truth, n, 0.0, (_Estimator("ml", *assumed),)) for n in config.n_list]
    ests = (_Estimator("fge", *assumed), _Estimator("ml", *assumed))
    return [_Cell(*truth, n, s, ests) for n in config.n_list for s in config.sigma_gm_list]


@functools.lru_cache(maxsize=None)
def _cached_chrb(model: LikelihoodModel, n: int) -> float:
    return bnd.chrb(model, n).per_param_bound


@functools.lru_cache(maxsize=None)
def _cached_bchrb(model: LikelihoodModel, sigma_gm: float, k: int) -> float:
    return bnd.bchrb(model, sigma_gm, k).per_param_bound


@functools.lru_cache(maxsize=None)
def _cached_bcrb_last(sigma_eta_sq: float, sigma_gm: float, k: int) -> float:
    _, bound = bnd.bcrb(sigma_eta_sq, sigma_gm, k)
    return float(bound[-1])


def _cell_bounds(cell: _Cell) -> dict[str, float | None]:
    """Offset-level bound columns for one cell (zero-bias combination)."""
    mu, mv, n = cell.model_u, cell.model_v, cell.n
    out: dict[str, float | None] = {"crb": None, "chrb": None, "bcrb": None, "bchrb": None}
    if cell.sigma_gm == 0.0:
        if not mu.constrained:
            out["crb"] = bnd.mse_bound_theta(bnd.crb(mu, n), bnd.crb(mv, n))
        out["chrb"] = bnd.mse_bound_theta(_cached_chrb(mu, n), _cached_chrb(mv, n))
    else:
        if mu.sigma_eta_sq > 0:
            out["bcrb"] = bnd.mse_bound_theta(
                _cached_bcrb_last(mu.sigma_eta_sq, cell.sigma_gm, n),
                _cached_bcrb_last(mv.sigma_eta_sq, cell.sigma_gm, n),
            )
        out["bchrb"] = bnd.mse_bound_theta(
            _cached_bchrb(mu, cell.sigma_gm, n),
            _cached_bchrb(mv, cell.sigma_gm, n),
        )
    return out


def _biased_chrb(cell: _Cell) -> float:
    # ML under exponential truth has known bias 1/(rate*N) per direction.
    biases = bnd.BiasPair(1.0 / (cell.model_u.rate * cell.n), 1.0 / (cell.model_v.rate * cell.n))
    return bnd.mse_bound_theta(_cached_chrb(cell.model_u, cell.n), _cached_chrb(cell.model_v, cell.n), biases)


def _pair_label(mu: LikelihoodModel, mv: LikelihoodModel) -> str:
    return model_label(mu) if mu == mv else f"{model_label(mu)}|{model_label(mv)}"


def _run_cell(config: ExperimentConfig, cell: _Cell) -> list[MseRecord]:
    params = ExchangeParams(config.d, config.theta0)
    drifting = cell.sigma_gm > 0.0
    gm = GaussMarkovParams(cell.sigma_gm) if drifting else None
    n_est = len(cell.estimators)

    def one_trial(trial: int) -> np.ndarray:
        streams = TrialStreams.for_trial(config.seed, trial)
        if drifting:
            series, trace = simulate_gauss_markov(params, gm, cell.model_u, cell.model_v, cell.n, streams)
            target = float(trace.theta[-1])
        else:
            series, _ = simulate_static(params, cell.model_u, cell.model_v, cell.n, streams)
            target = config.theta0
        errs = np.empty(n_est)
        for i, est in enumerate(cell.estimators):
            if est.kind == "ml":
                value = ml_theta(series.u, series.v, est.model_u, est.model_v).theta_hat
            else:
                value = fge_theta(series.u, series.v, est.model_u, est.model_v, cell.sigma_gm).theta_hat_n
            errs[i] = value - target
        return errs

    errors = np.empty((config.trials, n_est))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            for trial, errs in enumerate(pool.map(one_trial, range(config.trials))):
                errors[trial] = errs
    else:
        for trial in range(config.trials):
            errors[trial] = one_trial(trial)

    cell_bounds = _cell_bounds(cell)
    records = []
    for i, est in enumerate(cell.estimators):
        sq = errors[:, i] ** 2
        mse = float(np.mean(sq))
        stderr = float(np.std(sq, ddof=1) / np.sqrt(config.trials)) if config.trials > 1 else 0.0
        chrb_value = cell_bounds["chrb"]
        if (
            est.kind == "ml"
            and isinstance(cell.model_u, Exponential)
            and est.model_u == cell.model_u
            and est.model_v == cell.model_v
        ):
            chrb_value = _biased_chrb(cell)
        records.append(
            MseRecord(
                preset=config.preset,
                estimator=est.kind,
                true_model=_pair_label(cell.model_u, cell.model_v),
                assumed_model=_pair_label(est.model_u, est.model_v),
                n=cell.n,
                sigma_gm=cell.sigma_gm,
                trials=config.trials,
                mse=mse,
                stderr=stderr,
                crb=cell_bounds["crb"],
                chrb=chrb_value,
                bcrb=cell_bounds["bcrb"],
                bchrb=cell_bounds["bchrb"],
            )
        )
    return records


def run_trials(config: ExperimentConfig) -> list[MseRecord]:
    """Execute every cell of the configured experiment, in plan order."""
    records: list[MseRecord] = []
    for cell in _plan_cells(config):
        records.extend(_run_cell(config, cell))
    return records


CSV_HEADER = "preset,estimator,true_model,assumed_model,n,sigma_gm,trials,mse,stderr,crb,chrb,bcrb,bchrb"


def _format_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    # repr gives the shortest string that round-trips the double exactly.
    return repr(float(value))


def emit_csv(records: list[MseRecord], path) -> None:
    """Write records as CSV with full-precision, round-trippable numbers."""
    if not records:
        raise ValueError("no records to write")
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                (
                    r.preset,
                    r.estimator,
                    r.true_model,
                    r.assumed_model,
                    str(r.n),
                    _format_field(float(r.sigma_gm)),
                    str(r.trials),
                    _format_field(float(r.mse)),
                    _format_field(float(r.stderr)),
                    _format_field(r.crb),
                    _format_field(r.chrb),
                    _format_field(r.bcrb),
                    _format_field(r.bchrb),
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
