"""Max-product factor-graph estimation of a Gauss-Markov-drifting location.

The posterior over the location chain (one direction of the exchange) is a
cycle-free chain of Gaussian transition factors and per-sample likelihood
factors ``exp(alpha * x**2 + beta_k * x)`` (optionally support-constrained to
``x <= z_k``).  Max-product message passing collapses every backward message
into a quadratic form with coefficients (A, B, C, D); maximizing step by step
gives the affine maps

    g_k(x) = -(C_k * x + D_k) / (2 * A_k),

which are strictly increasing (A_k < 0), so the constrained forward pass

    x_k = min(g_k(x_{k-1}), z_k)

both runs in O(N) and unfolds into an explicit min over composed maps.  The
unconstrained case never clamps, so it reduces to the pure composition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exchange import d_from_xi_psi, theta_from_xi_psi
from .likelihoods import LikelihoodModel

__all__ = [
    "BackwardCoefficients",
    "FgeEstimate",
    "backward_coefficients",
    "xi0_estimate",
    "g_apply",
    "forward_estimates",
    "composition_estimate",
    "exponential_closed_form",
    "fge_theta",
]


@dataclass(frozen=True)
class BackwardCoefficients:
    """Per-step quadratic-form coefficients of the backward recursion.

    Arrays are indexed 0..n-1 for steps 1..n.  ``b`` and ``c`` are the
    constants -1/(2 sigma**2) and 1/sigma**2 at every step; ``a`` stays
    strictly negative, which makes every forward map increasing.

    ``delta`` is the dimensionless gap -2 sigma**2 A_k - 1 >= 0.  It carries
    the same information as ``a`` but stays well-conditioned when the
    process noise is tiny (A_k is then a huge constant minus a small
    data-dependent part, and forming it directly would lose the data part
    to rounding); the solution paths evaluate through ``delta``.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    delta: np.ndarray
    alpha: float
    beta: np.ndarray
    sigma_gm: float

    @property
    def n(self) -> int:
        return self.a.size


def backward_coefficients(series, model: LikelihoodModel, sigma_gm: float) -> BackwardCoefficients:
    """Run the backward sweep over one observation series.

    Step n seeds A = -1/(2 sigma**2) + alpha, D = beta_n; earlier steps fold
    in the correction terms B - C**2/(4A) and -C D/(2A) from the step after
    them.  In gap form those folds become

        delta_k = sigma**2 * sigma_eta_sq + delta_{k+1} / (1 + delta_{k+1})
        D_k     = beta_k + D_{k+1} / (1 + delta_{k+1})

    which are free of cancellation for any sigma.
    """
    if not (sigma_gm > 0 and math.isfinite(sigma_gm)):
        raise ValueError("factor-graph recursion needs sigma_gm > 0; use the ML estimator for the static case")
    z = np.asarray(series, dtype=float)
    if z.ndim != 1 or z.size < 1:
        raise ValueError("series must be a nonempty 1-D vector")
    n = z.size
    s2 = sigma_gm**2
    step_info = s2 * model.sigma_eta_sq
    alpha = -model.sigma_eta_sq / 2.0
    beta = np.atleast_1d(np.asarray(model.eta(z), dtype=float))

    delta = np.empty(n)
    d = np.empty(n)
    delta[n - 1] = step_info
    d[n - 1] = beta[n - 1]
    for i in range(n - 2, -1, -1):
        shrink = 1.0 + delta[i + 1]
        delta[i] = step_info + delta[i + 1] / shrink
        d[i] = beta[i] + d[i + 1] / shrink
    if not np.all(delta >= 0):
        raise ValueError("backward recursion lost nonnegativity of the information gap")
    a = -(1.0 + delta) / (2.0 * s2)
    b = np.full(n, -1.0 / (2.0 * s2))
    c = np.full(n, 1.0 / s2)
    return BackwardCoefficients(a=a, b=b, c=c, d=d, delta=delta, alpha=alpha, beta=beta, sigma_gm=sigma_gm)


def xi0_estimate(coeffs: BackwardCoefficients) -> float:
    """Initial-state estimate C1 D1 / (4 A1 B1 - C1**2); +inf when singular.

    In gap form the denominator is exactly delta_1 / sigma**4, so the
    estimate is sigma**2 D_1 / delta_1.  delta_1 is zero precisely when the
    log-partition is flat (zero sufficient-statistic variance), in which case
    the unconstrained maximum runs away to +inf and the forward min absorbs
    it.
    """
    delta_1 = coeffs.delta[0]
    if delta_1 == 0.0:
        return math.inf
    return float(coeffs.sigma_gm**2 * coeffs.d[0] / delta_1)


def g_apply(coeffs: BackwardCoefficients, k: int, x: float) -> float:
    """Apply the k-th forward map (1-based): -(C_k x + D_k) / (2 A_k).

    Evaluated as (x + sigma**2 D_k) / (1 + delta_k); the slope is positive,
    so the map is increasing and sends +inf to +inf.
    """
    if not 1 <= k <= coeffs.n:
        raise ValueError(f"step index {k} out of range 1..{coeffs.n}")
    if coeffs.a[k - 1] >= 0:
        raise ValueError("forward map requires a negative quadratic coefficient")
    shrink = 1.0 + coeffs.delta[k - 1]
    intercept = coeffs.sigma_gm**2 * coeffs.d[k - 1] / shrink
    return x / shrink + intercept


def forward_estimates(series, model: LikelihoodModel, coeffs: BackwardCoefficients) -> tuple[np.ndarray, float]:
    """Forward min-recursion; returns the per-step states and the final one.

    x_k = g_k(x_{k-1}), clamped to the observation z_k when the likelihood is
    support-constrained.
    """
    z = np.atleast_1d(np.asarray(series, dtype=float))
    if z.size != coeffs.n:
        raise ValueError("coefficients were built for a different series length")
    x = xi0_estimate(coeffs)
    states = np.empty(coeffs.n)
    for k in range(1, coeffs.n + 1):
        x = g_apply(coeffs, k, x)
        if model.constrained:
            x = min(x, float(z[k - 1]))
        states[k - 1] = x
    return states, float(x)


def composition_estimate(series, model: LikelihoodModel, coeffs: BackwardCoefficients) -> float:
    """Final-state estimate via the explicit min over composed forward maps.

    Algebraically identical to the forward recursion (the maps are increasing,
    so min commutes with composition); kept as a cross-check path.
    """
    z = np.atleast_1d(np.asarray(series, dtype=float))
    if z.size != coeffs.n:
        raise ValueError("coefficients were built for a different series length")
    n = coeffs.n

    def compose(first: int, x: float) -> float:
        for k in range(first, n + 1):
            x = g_apply(coeffs, k, x)
        return x

    full_chain = compose(1, xi0_estimate(coeffs))
    if not model.constrained:
        return full_chain
    terms = [float(z[n - 1])]
    terms += [compose(j + 1, float(z[j - 1])) for j in range(n - 1, 0, -1)]
    terms.append(full_chain)
    return min(terms)


def exponential_closed_form(series, rate: float, sigma_gm: float) -> float:
    """Final-state estimate for the exponential law, as an explicit min.

    The backward recursion accumulates D_k = (n - k + 1) * rate, so each
    forward map shifts by D_k * sigma**2 and the observation k lags behind the
    final step by the triangular penalty rate * sigma**2 * m * (m + 1) / 2
    with m = n - k:

        min_m  z_{n-m} + rate * sigma**2 * m * (m + 1) / 2,   m = 0..n-1.

    (The per-step shift degenerates to a constant only at the last step; the
    lag penalties grow quadratically, not linearly, in the lag.)
    """
    if not rate > 0:
        raise ValueError("rate must be positive")
    if not sigma_gm > 0:
        raise ValueError("sigma_gm must be positive")
    z = np.atleast_1d(np.asarray(series, dtype=float))
    if z.size < 1:
        raise ValueError("series must be nonempty")
    lag = np.arange(z.size, dtype=float)
    penalties = rate * sigma_gm**2 * lag * (lag + 1.0) / 2.0
    return float(np.min(z[::-1] + penalties))


@dataclass(frozen=True)
class FgeEstimate:
    """Factor-graph offset estimate at the final exchange."""

    xi_hat_n: float
    psi_hat_n: float
    theta_hat_n: float
    d_hat_n: float
    xi0_hat: float
    psi0_hat: float
    per_step_xi: np.ndarray
    per_step_psi: np.ndarray


def fge_theta(
    u_series,
    v_series,
    model_u: LikelihoodModel,
    model_v: LikelihoodModel,
    sigma_gm: float,
) -> FgeEstimate:
    """Run both direction chains and combine them into the offset estimate."""
    u = np.atleast_1d(np.asarray(u_series, dtype=float))
    v = np.atleast_1d(np.asarray(v_series, dtype=float))
    if u.size != v.size:
        raise ValueError("u and v series must have equal length")
    coeffs_u = backward_coefficients(u, model_u, sigma_gm)
    coeffs_v = backward_coefficients(v, model_v, sigma_gm)
    states_u, xi_hat = forward_estimates(u, model_u, coeffs_u)
    states_v, psi_hat = forward_estimates(v, model_v, coeffs_v)
    return FgeEstimate(
        xi_hat_n=xi_hat,
        psi_hat_n=psi_hat,
        theta_hat_n=theta_from_xi_psi(xi_hat, psi_hat),
        d_hat_n=d_from_xi_psi(xi_hat, psi_hat),
        xi0_hat=xi0_estimate(coeffs_u),
        psi0_hat=xi0_estimate(coeffs_v),
        per_step_xi=states_u,
        per_step_psi=states_v,
    )
