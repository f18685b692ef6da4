"""Two-way timing exchange data model and observation simulators.

One round trip stamps four times (T1..T4); the estimation-relevant residuals
are U = T2 - T1 = d + theta + X and V = T4 - T3 = d - theta + Y with fixed
propagation delay d, clock offset theta, and random network delays X, Y.
Substituting xi = d + theta and psi = d - theta decouples the two directions:
U is drawn from the delay law centered at xi, V from the law centered at psi.

Simulators cover the static case (constant xi, psi) and the Gauss-Markov case
where both locations drift by independent Normal(0, sigma**2) steps per
exchange.  All randomness flows through per-trial, per-channel substreams so
that serial and parallel Monte-Carlo runs produce identical observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .likelihoods import LikelihoodModel

__all__ = [
    "TimestampQuad",
    "ObservationSeries",
    "ExchangeParams",
    "GaussMarkovParams",
    "GroundTruthTrace",
    "TrialStreams",
    "derive_uv",
    "theta_from_xi_psi",
    "d_from_xi_psi",
    "simulate_static",
    "simulate_gauss_markov",
]


@dataclass(frozen=True)
class TimestampQuad:
    """The four stamps of one round trip, in a common time unit."""

    t1: float
    t2: float
    t3: float
    t4: float


@dataclass(frozen=True)
class ObservationSeries:
    """Paired residual vectors u = t2 - t1 and v = t4 - t3, one entry per exchange."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.ndim != 1 or v.ndim != 1 or u.size != v.size or u.size < 1:
            raise ValueError("u and v must be 1-D vectors of equal positive length")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("observations must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.u.size


@dataclass(frozen=True)
class ExchangeParams:
    """Fixed propagation delay d >= 0 and initial/static clock offset theta0."""

    d: float
    theta0: float

    def __post_init__(self):
        if not (self.d >= 0 and math.isfinite(self.d)):
            raise ValueError(f"propagation delay must be nonnegative and finite, got {self.d}")
        if not math.isfinite(self.theta0):
            raise ValueError("theta0 must be finite")


@dataclass(frozen=True)
class GaussMarkovParams:
    """Standard deviation of the per-step location drift; 0 degenerates to static."""

    sigma: float

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError(f"process-noise sigma must be nonnegative and finite, got {self.sigma}")


@dataclass(frozen=True)
class GroundTruthTrace:
    """Latent location states per exchange, with derived offset and delay tracks.

    ``theta`` and ``d_implied`` are computed from xi and psi at construction,
    so the identity theta[k] == (xi[k] - psi[k]) / 2 holds bit-exactly.
    """

    xi: np.ndarray
    psi: np.ndarray
    theta: np.ndarray = field(init=False)
    d_implied: np.ndarray = field(init=False)

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        psi = np.asarray(self.psi, dtype=float)
        if xi.shape != psi.shape or xi.ndim != 1:
            raise ValueError("xi and psi tracks must be 1-D and equally long")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "theta", (xi - psi) / 2.0)
        object.__setattr__(self, "d_implied", (xi + psi) / 2.0)


# Channel indices of the per-trial substreams.
_CH_U_NOISE = 0
_CH_V_NOISE = 1
_CH_U_PROCESS = 2
_CH_V_PROCESS = 3


@dataclass(frozen=True)
class TrialStreams:
    """Independent random substreams for one Monte-Carlo trial.

    Each channel is keyed by (trial, channel) under one master seed, so any
    subset of trials can be regenerated in any order — serial and parallel
    runs consume identical randomness.
    """

    u_noise: np.random.Generator
    v_noise: np.random.Generator
    u_process: np.random.Generator
    v_process: np.random.Generator

    @classmethod
    def for_trial(cls, seed: int, trial: int) -> "TrialStreams":
        def channel(ch: int) -> np.random.Generator:
            return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial, ch)))

        return cls(
            u_noise=channel(_CH_U_NOISE),
            v_noise=channel(_CH_V_NOISE),
            u_process=channel(_CH_U_PROCESS),
            v_process=channel(_CH_V_PROCESS),
        )


def derive_uv(quads: Sequence[TimestampQuad]) -> ObservationSeries:
    """Reduce timestamp quads to the residual pairs (t2 - t1, t4 - t3)."""
    quads = list(quads)
    if not quads:
        raise ValueError("no exchanges")
    u = np.array([q.t2 - q.t1 for q in quads], dtype=float)
    v = np.array([q.t4 - q.t3 for q in quads], dtype=float)
    return ObservationSeries(u=u, v=v)


def theta_from_xi_psi(xi_hat: float, psi_hat: float) -> float:
    """Clock offset implied by a location pair: (xi - psi) / 2."""
    return (xi_hat - psi_hat) / 2.0


def d_from_xi_psi(xi_hat: float, psi_hat: float) -> float:
    """Propagation delay implied by a location pair: (xi + psi) / 2."""
    return (xi_hat + psi_hat) / 2.0


def simulate_gauss_markov(
    params: ExchangeParams,
    gm: GaussMarkovParams,
    model_u: LikelihoodModel,
    model_v: LikelihoodModel,
    n: int,
    streams: TrialStreams,
) -> tuple[ObservationSeries, GroundTruthTrace]:
    """Simulate n exchanges while xi and psi drift as independent random walks.

    The walk starts from xi_0 = d + theta0 and psi_0 = d - theta0 (the
    pre-observation state); the trace holds the n post-step states k = 1..n,
    and observation k is drawn from the delay law centered at the k-th state.
    """
    if n < 1:
        raise ValueError("need at least one exchange")
    xi0 = params.d + params.theta0
    psi0 = params.d - params.theta0
    xi = xi0 + np.cumsum(streams.u_process.normal(0.0, gm.sigma, n))
    psi = psi0 + np.cumsum(streams.v_process.normal(0.0, gm.sigma, n))
    u = model_u.sample(streams.u_noise, xi)
    v = model_v.sample(streams.v_noise, psi)
    return ObservationSeries(u=u, v=v), GroundTruthTrace(xi=xi, psi=psi)


def simulate_static(
    params: ExchangeParams,
    model_u: LikelihoodModel,
    model_v: LikelihoodModel,
    n: int,
    streams: TrialStreams,
) -> tuple[ObservationSeries, GroundTruthTrace]:
    """Simulate n exchanges with constant xi = d + theta0 and psi = d - theta0.

    Delegates to the Gauss-Markov path with zero process noise, so a static
    run and a sigma = 0 drift run on the same streams are bit-identical.
    """
    return simulate_gauss_markov(params, GaussMarkovParams(0.0), model_u, model_v, n, streams)
