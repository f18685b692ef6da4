"""Variance lower bounds for location estimation in the exchange model.

Classical bounds for a fixed location rho observed N times:

* Cramer-Rao: 1 / (N * sigma_eta_sq), valid only for unconstrained
  likelihoods (support-constrained ones violate the regularity conditions).
* Chapman-Robbins: reciprocal of inf_h (S(h)**N - 1) / h**2 where S is the
  per-sample squared-likelihood-ratio moment, eta-MGF based for unconstrained
  laws and zeta-based for constrained ones.

Bayesian bounds for a Gauss-Markov-drifting location observed once per step:

* Bayesian Cramer-Rao: scalar information recursion
  J(k+1) = (sigma**2 + 1/J(k))**(-1) + sigma_eta_sq with J(0) = 0.
* Bayesian Chapman-Robbins: reciprocal of the infimum over a perturbation
  vector (h_1..h_k), whose objective multiplies the per-sample factors by the
  random-walk term exp(sum (h_j - h_{j-1})**2 / sigma**2), h_0 = 0.

The offset-level bound combines the two directions via
MSE(theta) >= (bound_xi + bound_psi) / 4 + (b_xi - b_psi)**2 / 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .likelihoods import Exponential, Gaussian, LikelihoodModel, LogNormal

__all__ = [
    "BiasPair",
    "BoundReport",
    "SearchDiagnostics",
    "Search1D",
    "SearchMultiD",
    "crb",
    "zeta",
    "zeta_monte_carlo",
    "chrb",
    "chrb_objective",
    "bcrb",
    "bchrb",
    "bchrb_objective",
    "mse_bound_theta",
    "ml_mse_oracle",
]

# exp() overflows float64 past ~709; treat larger exponents as +inf objective.
_MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class BiasPair:
    """Estimator biases on the two directions, entering the offset MSE bound."""

    b_xi: float = 0.0
    b_psi: float = 0.0


@dataclass(frozen=True)
class SearchDiagnostics:
    """What the infimum search saw: argmin, objective values, effort."""

    h_opt: object
    objective: float
    start_objective: float | None
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class BoundReport:
    """One computed bound with the per-parameter and offset-level values."""

    kind: str
    per_param_bound: float
    theta_mse_bound: float
    diagnostics: SearchDiagnostics | None = None


@dataclass(frozen=True)
class Search1D:
    """Log-spaced scan of h followed by golden-section refinement."""

    h_min: float = 1e-6
    h_max: float = 10.0
    grid_points: int = 200
    rel_tol: float = 1e-8


@dataclass(frozen=True)
class SearchMultiD:
    """Nelder-Mead over the perturbation vector, seeded by a constant-slice scan."""

    max_evals: int = 10_000
    rel_tol: float = 1e-8
    slice_search: Search1D = field(default_factory=Search1D)


def crb(model: LikelihoodModel, n: int) -> float:
    """Cramer-Rao variance bound 1 / (N * sigma_eta_sq) for unconstrained laws."""
    if model.constrained:
        raise ValueError("CRB undefined: regularity conditions fail for support-constrained likelihoods")
    if n < 1:
        raise ValueError("need n >= 1")
    s2 = model.sigma_eta_sq
    if s2 <= 0:
        raise ValueError("CRB undefined for zero sufficient-statistic variance")
    return 1.0 / (n * s2)


def _log_zeta(model: Exponential, h: float) -> float:
    # E[exp(2 h eta) * I(Z - rho - h)] for Z = rho + Exp(rate):
    # exp(2 rate h) * P(Z >= rho + h) = exp(rate h) for h >= 0; the indicator
    # is vacuous for h < 0, leaving exp(2 rate h).
    if h >= 0:
        return model.rate * h
    return 2.0 * model.rate * h


def zeta(model: LikelihoodModel, rho: float, h: float) -> float:
    """Constrained-likelihood moment E[exp(2 h eta(Z)) I(Z - rho - h)], in closed form.

    Location-invariant for the exponential law, so ``rho`` does not enter the
    value; it is kept in the signature to mirror the defining expectation.
    """
    if not model.constrained:
        raise ValueError("zeta applies to support-constrained likelihoods only")
    return math.exp(_log_zeta(model, h))


def zeta_monte_carlo(
    model: LikelihoodModel,
    rho: float,
    h: float,
    n_samples: int = 10**6,
    rng: np.random.Generator | None = None,
) -> float:
    """Sampling estimate of the zeta expectation, for verifying the closed form."""
    if rng is None:
        rng = np.random.default_rng(0)
    z = model.sample(rng, np.full(n_samples, float(rho)))
    return float(np.mean(np.exp(2.0 * h * model.eta(z)) * (z - rho - h >= 0)))


def _log_per_sample_factor(model: LikelihoodModel, h: float, rho: float) -> float:
    # log of the squared-likelihood-ratio moment of one sample:
    # M(h)**-2 * zeta(h) when constrained, M(h)**-2 * M(2h) otherwise.
    log_m = model.log_mgf_eta(rho, h)
    if model.constrained:
        return -2.0 * log_m + _log_zeta(model, h)
    return -2.0 * log_m + model.log_mgf_eta(rho, 2.0 * h)


def chrb_objective(model: LikelihoodModel, n: int, rho: float = 0.0):
    """Objective whose infimum over h is the Chapman-Robbins information.

    For constrained laws only h > 0 keeps the shifted support inside the
    original one, so nonpositive h evaluates to +inf.
    """

    def objective(h: float) -> float:
        if h == 0 or not math.isfinite(h):
            return math.inf
        if model.constrained and h <= 0:
            return math.inf
        x = n * _log_per_sample_factor(model, h, rho)
        if x > _MAX_EXPONENT:
            return math.inf
        return math.expm1(x) / (h * h)

    return objective


def _scan_and_refine(objective, search: Search1D) -> tuple[float, float, int]:
    """Log-grid scan plus golden refinement; returns (h_opt, value, evaluations)."""
    grid = np.geomspace(search.h_min, search.h_max, search.grid_points)
    values = np.array([objective(h) for h in grid])
    evals = grid.size
    best = int(np.argmin(values))
    h_opt, f_opt = float(grid[best]), float(values[best])
    if 0 < best < grid.size - 1 and np.isfinite(f_opt):
        counter = [0]

        def counted(h: float) -> float:
            counter[0] += 1
            return objective(h)

        try:
            result = optimize.minimize_scalar(
                counted,
                bracket=(grid[best - 1], grid[best], grid[best + 1]),
                method="golden",
                options={"xtol": search.rel_tol},
            )
            evals += counter[0]
            if np.isfinite(result.fun) and result.fun <= f_opt:
                h_opt, f_opt = float(result.x), float(result.fun)
        except ValueError:
            # Bracket degenerated (flat plateau); keep the grid minimum.
            pass
    return h_opt, f_opt, evals


def chrb(model: LikelihoodModel, n: int, search: Search1D = Search1D()) -> BoundReport:
    """Chapman-Robbins variance bound via a 1-D infimum search.

    For unconstrained quadratic-log-partition laws the objective decreases
    toward h -> 0 and the bound recovers the CRB; the search returning the
    lower grid edge is then the expected outcome, not a failure.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    objective = chrb_objective(model, n)
    h_opt, f_opt, evals = _scan_and_refine(objective, search)
    if not (np.isfinite(f_opt) and f_opt > 0):
        raise ValueError("Chapman-Robbins search failed to bracket a positive objective")
    bound = 1.0 / f_opt
    diag = SearchDiagnostics(
        h_opt=h_opt,
        objective=f_opt,
        start_objective=None,
        evaluations=evals,
        converged=h_opt < search.h_max * 0.99,
    )
    return BoundReport(kind="chrb", per_param_bound=bound, theta_mse_bound=bound / 2.0, diagnostics=diag)


def bcrb(sigma_eta_sq_steps, sigma_gm: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Bayesian information recursion and the bounds 1/J(1..k).

    ``sigma_eta_sq_steps`` may be a scalar (constant per step) or a length-k
    sequence.  A flat log-partition (all zeros, exponential law) leaves J at 0
    and the bound at +inf: the recursion carries no usable information and the
    Bayesian Chapman-Robbins bound is the tool for that case.
    """
    if not (sigma_gm > 0 and math.isfinite(sigma_gm)):
        raise ValueError("bcrb requires sigma_gm > 0")
    if k < 1:
        raise ValueError("need k >= 1")
    se = np.asarray(sigma_eta_sq_steps, dtype=float)
    if se.ndim == 0:
        se = np.full(k, float(se))
    if se.shape != (k,):
        raise ValueError(f"per-step variances must be scalar or length {k}")
    if np.any(se < 0):
        raise ValueError("sufficient-statistic variances must be nonnegative")
    s2 = sigma_gm**2
    info = np.empty(k)
    prev = 0.0
    for i in range(k):
        carried = 0.0 if prev == 0.0 else 1.0 / (s2 + 1.0 / prev)
        info[i] = carried + se[i]
        prev = info[i]
    with np.errstate(divide="ignore"):
        bound = np.where(info > 0, 1.0 / np.where(info > 0, info, 1.0), np.inf)
    return info, bound


def bchrb_objective(model: LikelihoodModel, sigma_gm: float, k: int, rho: float = 0.0):
    """Objective over the perturbation vector (h_1..h_k), h_0 pinned at 0."""
    s2 = sigma_gm**2

    def objective(h: np.ndarray) -> float:
        h = np.asarray(h, dtype=float)
        h_k = h[-1]
        if h_k == 0 or not np.all(np.isfinite(h)):
            return math.inf
        if model.constrained and np.any(h <= 0):
            return math.inf
        log_t = sum(_log_per_sample_factor(model, float(hj), rho) for hj in h)
        diffs = np.diff(h, prepend=0.0)
        log_t += float(np.sum(diffs * diffs)) / s2
        if log_t > _MAX_EXPONENT:
            return math.inf
        return math.expm1(log_t) / (h_k * h_k)

    return objective


def _scale_polish(objective, h: np.ndarray, f: float) -> tuple[np.ndarray, float, int]:
    # The infimum can sit at vanishing perturbation scale (quadratic families);
    # polish along the ray t*h with a golden search over log t.
    counter = [0]

    def along_ray(log_t: float) -> float:
        counter[0] += 1
        return objective(math.exp(log_t) * h)

    samples = np.linspace(math.log(1e-6), math.log(1e3), 60)
    values = [along_ray(t) for t in samples]
    best = int(np.argmin(values))
    t_opt, f_opt = samples[best], values[best]
    if 0 < best < len(samples) - 1 and np.isfinite(f_opt):
        try:
            result = optimize.minimize_scalar(
                along_ray,
                bracket=(samples[best - 1], samples[best], samples[best + 1]),
                method="golden",
                options={"xtol": 1e-10},
            )
            if np.isfinite(result.fun) and result.fun <= f_opt:
                t_opt, f_opt = float(result.x), float(result.fun)
        except ValueError:
            pass
    if f_opt < f:
        return math.exp(t_opt) * h, float(f_opt), counter[0]
    return h, f, counter[0]


def bchrb(
    model: LikelihoodModel,
    sigma_gm: float,
    k: int,
    search: SearchMultiD = SearchMultiD(),
) -> BoundReport:
    """Bayesian Chapman-Robbins bound at step k via a multi-D infimum search.

    The optimizer starts from the best constant slice h_j = c found by a 1-D
    scan, runs Nelder-Mead, then polishes the perturbation scale along the
    found ray.  Diagnostics keep the start and end objectives so a stalled
    search is visible to the caller.
    """
    if not (sigma_gm > 0 and math.isfinite(sigma_gm)):
        raise ValueError("bchrb requires sigma_gm > 0")
    if k < 1:
        raise ValueError("need k >= 1")
    objective = bchrb_objective(model, sigma_gm, k)

    scan = search.slice_search
    grid = np.geomspace(scan.h_min, scan.h_max, scan.grid_points)
    slice_values = np.array([objective(np.full(k, c)) for c in grid])
    evals = grid.size
    best = int(np.argmin(slice_values))
    if not np.isfinite(slice_values[best]):
        raise ValueError("Bayesian Chapman-Robbins search found no finite constant slice")
    start = np.full(k, float(grid[best]))
    start_objective = float(slice_values[best])

    counter = [0]

    def counted(h: np.ndarray) -> float:
        counter[0] += 1
        return objective(h)

    result = optimize.minimize(
        counted,
        start,
        method="Nelder-Mead",
        options={
            "maxfev": search.max_evals,
            "xatol": max(start[0] * search.rel_tol, 1e-15),
            "fatol": max(start_objective * search.rel_tol, 1e-300),
            "adaptive": k > 4,
        },
    )
    evals += counter[0]
    h_opt, f_opt = np.asarray(result.x, dtype=float), float(result.fun)
    if not np.isfinite(f_opt) or f_opt > start_objective:
        h_opt, f_opt = start, start_objective
    h_opt, f_opt, polish_evals = _scale_polish(objective, h_opt, f_opt)
    evals += polish_evals

    if not f_opt > 0:
        raise ValueError("Bayesian Chapman-Robbins objective must stay positive")
    bound = 1.0 / f_opt
    diag = SearchDiagnostics(
        h_opt=h_opt,
        objective=f_opt,
        start_objective=start_objective,
        evaluations=evals,
        converged=bool(result.success or f_opt <= start_objective),
    )
    return BoundReport(kind="bchrb", per_param_bound=bound, theta_mse_bound=bound / 2.0, diagnostics=diag)


def mse_bound_theta(bound_xi: float, bound_psi: float, biases: BiasPair = BiasPair()) -> float:
    """Offset-level MSE bound from per-direction variance bounds and biases."""
    if bound_xi < 0 or bound_psi < 0:
        raise ValueError("variance bounds must be nonnegative")
    return 0.25 * (bound_xi + bound_psi) + 0.25 * (biases.b_xi - biases.b_psi) ** 2


def ml_mse_oracle(model_u: LikelihoodModel, model_v: LikelihoodModel, n: int) -> float:
    """Exact MSE of the ML offset estimator for same-family direction models.

    Gaussian (and log-normal, in the log domain): (sigma_xi**2 + sigma_psi**2)
    / (4N), unbiased.  Exponential: each direction minimum is the location
    plus Exp(rate * N), giving variance and bias 1/(rate*N) each.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if type(model_u) is not type(model_v):
        raise ValueError("ML MSE oracle requires both directions from the same family")
    if isinstance(model_u, (Gaussian, LogNormal)):
        return (model_u.sigma**2 + model_v.sigma**2) / (4.0 * n)
    if isinstance(model_u, Exponential):
        var_term = (0.25 / n**2) * (1.0 / model_u.rate**2 + 1.0 / model_v.rate**2)
        bias_term = (0.25 / n**2) * (1.0 / model_u.rate - 1.0 / model_v.rate) ** 2
        return var_term + bias_term
    raise ValueError(f"unsupported model type {type(model_u).__name__}")
