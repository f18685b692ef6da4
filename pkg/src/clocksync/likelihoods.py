"""Delay-likelihood models in natural-parameter form.

The three supported delay laws — Gaussian, log-normal and exponential — all
reduce, as likelihoods of the location parameter ``rho``, to one-parameter
exponential families with a quadratic log-partition

    f(z; rho) ∝ exp(rho * eta(z) - phi(rho)),    phi(rho) = (sigma_eta_sq / 2) * rho**2

(times a support indicator ``z >= rho`` in the exponential case).  Each model
exposes the sufficient statistic ``eta``, its variance ``sigma_eta_sq``, the
moment generating function of ``eta`` implied by ``phi``, and a sampler for
the observation law centered at a given location.

The exponential law is *constrained*: its support depends on the location, so
``constrained`` is True and downstream code switches to the order-statistic /
Chapman-Robbins paths instead of the stationary-point / Cramer-Rao ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np

__all__ = [
    "Gaussian",
    "LogNormal",
    "Exponential",
    "LikelihoodModel",
    "make_model",
    "model_label",
    "empirical_sigma_eta_sq",
    "with_empirical_variance",
]


@dataclass(frozen=True)
class Gaussian:
    """Gaussian observation law: Z ~ Normal(location, sigma**2)."""

    sigma: float
    constrained: ClassVar[bool] = False
    family: ClassVar[str] = "gaussian"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"gaussian sigma must be positive and finite, got {self.sigma}")

    @property
    def sigma_eta_sq(self) -> float:
        """Variance of the sufficient statistic, 1 / sigma**2."""
        return 1.0 / self.sigma**2

    @property
    def a_coeff(self) -> float:
        """Quadratic log-partition coefficient, sigma_eta_sq / 2."""
        return self.sigma_eta_sq / 2.0

    def eta(self, z):
        """Sufficient statistic eta(z) = z / sigma**2 (elementwise on arrays)."""
        return np.asarray(z, dtype=float) / self.sigma**2 if np.ndim(z) else z / self.sigma**2

    def log_mgf_eta(self, rho: float, h: float) -> float:
        """log E[exp(h * eta(Z))] = phi(rho + h) - phi(rho) for the quadratic phi."""
        return self.sigma_eta_sq * (rho * h + 0.5 * h * h)

    def mgf_eta(self, rho: float, h: float) -> float:
        return math.exp(self.log_mgf_eta(rho, h))

    def sample(self, rng: np.random.Generator, loc, n: int | None = None) -> np.ndarray:
        size = n if n is not None else np.shape(loc)
        return rng.normal(loc, self.sigma, size)


@dataclass(frozen=True)
class LogNormal:
    """Log-normal observation law: log Z ~ Normal(location, sigma**2).

    The location parameter lives in the log domain, so it may be negative even
    though the observations themselves are strictly positive.
    """

    sigma: float
    constrained: ClassVar[bool] = False
    family: ClassVar[str] = "lognormal"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"lognormal sigma must be positive and finite, got {self.sigma}")

    @property
    def sigma_eta_sq(self) -> float:
        return 1.0 / self.sigma**2

    @property
    def a_coeff(self) -> float:
        return self.sigma_eta_sq / 2.0

    def eta(self, z):
        """Sufficient statistic eta(z) = log(z) / sigma**2; requires z > 0."""
        arr = np.asarray(z, dtype=float)
        if np.any(arr <= 0):
            raise ValueError("lognormal sufficient statistic requires strictly positive samples")
        out = np.log(arr) / self.sigma**2
        return out if np.ndim(z) else float(out)

    def log_mgf_eta(self, rho: float, h: float) -> float:
        return self.sigma_eta_sq * (rho * h + 0.5 * h * h)

    def mgf_eta(self, rho: float, h: float) -> float:
        return math.exp(self.log_mgf_eta(rho, h))

    def sample(self, rng: np.random.Generator, loc, n: int | None = None) -> np.ndarray:
        size = n if n is not None else np.shape(loc)
        return np.exp(rng.normal(loc, self.sigma, size))


@dataclass(frozen=True)
class Exponential:
    """Shifted-exponential observation law: Z = location + Exp(rate).

    The support [location, inf) depends on the parameter, so the likelihood is
    constrained.  Its sufficient statistic is the constant ``rate`` and the
    log-partition is flat: sigma_eta_sq = 0 and the eta-MGF is identically 1.
    """

    rate: float
    constrained: ClassVar[bool] = True
    family: ClassVar[str] = "exponential"

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"exponential rate must be positive and finite, got {self.rate}")

    @property
    def sigma_eta_sq(self) -> float:
        return 0.0

    @property
    def a_coeff(self) -> float:
        return 0.0

    def eta(self, z):
        if np.ndim(z):
            return np.full(np.shape(z), self.rate, dtype=float)
        return self.rate

    def log_mgf_eta(self, rho: float, h: float) -> float:
        # phi is constant, so the phi-based MGF is 1 for every h.
        return 0.0

    def mgf_eta(self, rho: float, h: float) -> float:
        return 1.0

    def sample(self, rng: np.random.Generator, loc, n: int | None = None) -> np.ndarray:
        size = n if n is not None else np.shape(loc)
        return np.asarray(loc, dtype=float) + rng.exponential(1.0 / self.rate, size)


LikelihoodModel = Union[Gaussian, LogNormal, Exponential]

_FAMILIES = {"gaussian": Gaussian, "lognormal": LogNormal, "exponential": Exponential}


def make_model(family: str, *, sigma: float | None = None, rate: float | None = None) -> LikelihoodModel:
    """Build a likelihood model from a family name and its parameter.

    ``sigma`` parameterizes gaussian/lognormal, ``rate`` the exponential law.
    """
    key = family.strip().lower()
    if key not in _FAMILIES:
        raise ValueError(f"unknown likelihood family {family!r} (expected one of {sorted(_FAMILIES)})")
    if key == "exponential":
        if rate is None:
            raise ValueError("exponential model requires a rate parameter")
        return Exponential(rate)
    if sigma is None:
        raise ValueError(f"{key} model requires a sigma parameter")
    return _FAMILIES[key](sigma)


def model_label(model: LikelihoodModel) -> str:
    """Short printable label, e.g. ``gaussian(0.1)`` or ``exponential(10.0)``."""
    param = model.rate if isinstance(model, Exponential) else model.sigma
    return f"{model.family}({param!r})"


def empirical_sigma_eta_sq(series, model: LikelihoodModel) -> float:
    """Unbiased sample variance of eta over a series (divisor N - 1).

    Substitute for the analytic ``sigma_eta_sq`` when the observation variance
    is not known a priori.
    """
    z = np.asarray(series, dtype=float)
    if z.size < 2:
        raise ValueError("empirical variance of the sufficient statistic needs at least 2 samples")
    return float(np.var(model.eta(z), ddof=1))


def with_empirical_variance(model: LikelihoodModel, series) -> LikelihoodModel:
    """Rebuild an unconstrained model with its spread calibrated from data.

    The default everywhere is known-variance mode; this is the opt-in
    substitution of the empirical moment.  For gaussian/lognormal models
    sigma_eta_sq = 1/sigma**2, so the calibrated sigma is the sample standard
    deviation of the observations (of their logs for the log-normal law).
    The exponential statistic is constant and carries no variance
    information, so calibration is undefined there.
    """
    if model.constrained:
        raise ValueError("empirical variance calibration is undefined for a constant sufficient statistic")
    z = np.asarray(series, dtype=float)
    spread = model.eta(z) * model.sigma**2  # back to the observation (or log) domain
    sample_std = float(np.std(spread, ddof=1))
    if sample_std <= 0:
        raise ValueError("series has zero spread; cannot calibrate the observation variance")
    return type(model)(sample_std)
