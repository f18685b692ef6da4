"""Closed-form maximum-likelihood clock-offset estimation.

For quadratic-log-partition families the per-direction likelihood exponent

    L(rho) = rho * sum_j eta(z_j) - N * (sigma_eta_sq / 2) * rho**2

is strictly concave, so the unconstrained maximizer is the stationary point
sum_j eta(z_j) / (N * sigma_eta_sq).  For support-constrained likelihoods
the feasible set is rho <= min_j z_j and concavity pins the maximizer to
min(stationary point, first order statistic).  The offset estimate combines
the two directions as theta = (xi - psi) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exchange import d_from_xi_psi, theta_from_xi_psi
from .likelihoods import LikelihoodModel

__all__ = ["MlEstimate", "ml_unconstrained", "ml_constrained", "ml_theta"]


@dataclass(frozen=True)
class MlEstimate:
    """Joint ML solution for one series pair.

    ``clamped_u`` / ``clamped_v`` record whether the first-order-statistic
    branch of the constrained maximizer was active on that side.
    """

    xi_hat: float
    psi_hat: float
    theta_hat: float
    d_hat: float
    clamped_u: bool
    clamped_v: bool


def _as_series(series) -> np.ndarray:
    z = np.asarray(series, dtype=float)
    if z.ndim != 1 or z.size < 1:
        raise ValueError("series must be a nonempty 1-D vector")
    return z


def ml_unconstrained(series, model: LikelihoodModel) -> float:
    """Stationary-point ML location for an unconstrained likelihood.

    Equals the sample mean of the observations for the Gaussian law and the
    sample mean of their logs for the log-normal law.
    """
    if model.constrained:
        raise ValueError("constrained likelihood: use ml_constrained")
    z = _as_series(series)
    s2 = model.sigma_eta_sq
    if s2 <= 0:
        raise ValueError("unconstrained ML undefined: sufficient statistic has zero variance")
    return float(np.sum(model.eta(z)) / (z.size * s2))


def ml_constrained(series, model: LikelihoodModel) -> float:
    """ML location for a support-constrained likelihood.

    min(stationary point, min_j z_j); with a flat log-partition (exponential
    law) the stationary point is +inf and the estimate is exactly the sample
    minimum.
    """
    if not model.constrained:
        raise ValueError("unconstrained likelihood: use ml_unconstrained")
    z = _as_series(series)
    stationary = _stationary_point(z, model)
    return min(stationary, float(z.min()))


def _stationary_point(z: np.ndarray, model: LikelihoodModel) -> float:
    s2 = model.sigma_eta_sq
    if s2 == 0.0:
        return math.inf
    return float(np.sum(model.eta(z)) / (z.size * s2))


def _ml_location(series, model: LikelihoodModel) -> tuple[float, bool]:
    if model.constrained:
        z = _as_series(series)
        stationary = _stationary_point(z, model)
        first_order = float(z.min())
        if first_order < stationary:
            return first_order, True
        return stationary, False
    return ml_unconstrained(series, model), False


def ml_theta(u_series, v_series, model_u: LikelihoodModel, model_v: LikelihoodModel) -> MlEstimate:
    """ML clock-offset estimate from a series pair.

    Gaussian both sides: theta = sum(U - V) / (2N).  Exponential both sides:
    theta = (min U - min V) / 2.  Log-normal both sides: theta =
    sum(log U - log V) / (2N).
    """
    xi_hat, clamped_u = _ml_location(u_series, model_u)
    psi_hat, clamped_v = _ml_location(v_series, model_v)
    return MlEstimate(
        xi_hat=xi_hat,
        psi_hat=psi_hat,
        theta_hat=theta_from_xi_psi(xi_hat, psi_hat),
        d_hat=d_from_xi_psi(xi_hat, psi_hat),
        clamped_u=clamped_u,
        clamped_v=clamped_v,
    )
