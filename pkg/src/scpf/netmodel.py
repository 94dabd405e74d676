"""Network, slices, and the stochastic traffic model.

A scenario is a set of base stations shared by slices. Each slice v is
described by a share s_v of the pooled resources, exogenous Poisson arrival
intensities per station, mean sojourn times, a substochastic routing matrix
(row deficit = exit probability), and per-station mean reciprocal capacities
delta_b = E[1/C_b]. Solving flow conservation yields the per-station offered
loads rho_b (mean stationary user counts), from which every analytic quantity
downstream is derived.

Units: arrival rates and sojourn times are in one consistent abstract time
unit; only their products (loads) enter the analysis, so the unit itself is
never needed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularRouting, UndefinedRelativeLoad, ZeroVector, ZeroLoadSlice

CONDITION_LIMIT = 1e12
SHARE_SUM_TOL = 1e-12

SOJOURN_KINDS = ("exponential", "deterministic", "lognormal")
CAPACITY_KINDS = ("deterministic", "lognormal")


@dataclass(frozen=True)
class CapacityModel:
    """Per-user peak-capacity distribution with fixed mean reciprocal.

    ``kind='deterministic'`` pins C = 1/delta. ``kind='lognormal'`` draws C
    lognormal with E[1/C] = delta and shape parameter ``sigma`` (std of log C).
    Mean BTD formulas depend on the distribution only through delta; the
    sampling distribution exists so Monte Carlo runs can check exactly that.
    """

    kind: str = "deterministic"
    sigma: float = 0.5

    def __post_init__(self):
        if self.kind not in CAPACITY_KINDS:
            raise ValueError(f"unknown capacity kind {self.kind!r}")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def sample(self, delta_b, rng: np.random.Generator, size=None):
        """Draw capacities with E[1/C] = delta_b (scalar or array)."""
        if self.kind == "deterministic":
            c = 1.0 / np.asarray(delta_b, dtype=float)
            if size is None:
                return c
            return np.broadcast_to(c, size).copy() if c.ndim else np.full(size, c)
        # E[1/C] = exp(-m + sigma^2/2) = delta  =>  m = sigma^2/2 - ln(delta)
        m = 0.5 * self.sigma**2 - np.log(np.asarray(delta_b, dtype=float))
        return np.exp(rng.normal(m, self.sigma, size=size))


@dataclass(frozen=True)
class SliceSpec:
    """Static description of one slice's traffic and capacity statistics."""

    share: float
    gamma: np.ndarray          # exogenous arrival intensities, length B
    mu: np.ndarray             # mean sojourn times, length B
    routing: np.ndarray        # substochastic B x B matrix
    delta: np.ndarray          # mean reciprocal capacities E[1/C_b], length B
    btd_target: float | None = None
    name: str = ""
    sojourn_kind: str = "exponential"
    sojourn_cv: float = 1.0    # used by the lognormal sojourn option only
    capacity: CapacityModel = field(default_factory=CapacityModel)

    def __post_init__(self):
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=float))
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "routing", np.asarray(self.routing, dtype=float))
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float))
        b = self.gamma.shape[0]
        if self.mu.shape != (b,) or self.delta.shape != (b,):
            raise ValueError("gamma, mu, delta must share length B")
        if self.routing.shape != (b, b):
            raise ValueError("routing must be B x B")
        if not (0.0 < self.share <= 1.0):
            raise ValueError("share must lie in (0, 1]")
        if np.any(self.gamma < 0) or not np.all(np.isfinite(self.gamma)):
            raise ValueError("arrival rates must be finite and nonnegative")
        if np.any(self.mu <= 0):
            raise ValueError("mean sojourn times must be positive")
        if np.any(self.routing < 0) or np.any(self.routing.sum(axis=1) > 1 + 1e-12):
            raise ValueError("routing matrix must be substochastic")
        if np.any(self.delta <= 0):
            raise ValueError("delta must be positive")
        if self.sojourn_kind not in SOJOURN_KINDS:
            raise ValueError(f"unknown sojourn kind {self.sojourn_kind!r}")

    @property
    def num_stations(self) -> int:
        return self.gamma.shape[0]

    def exit_probabilities(self) -> np.ndarray:
        return 1.0 - self.routing.sum(axis=1)

    def sample_sojourn(self, b: int, rng: np.random.Generator) -> float:
        m = self.mu[b]
        if self.sojourn_kind == "exponential":
            return rng.exponential(m)
        if self.sojourn_kind == "deterministic":
            return m
        # lognormal with mean m and coefficient of variation sojourn_cv
        s2 = math.log1p(self.sojourn_cv**2)
        return float(rng.lognormal(math.log(m) - 0.5 * s2, math.sqrt(s2)))


@dataclass(frozen=True)
class TrafficModel:
    """A full scenario: station count plus one SliceSpec per slice.

    Station identifiers are 0..B-1. Shares must be strictly positive and sum
    to one. Immutable once built; safe for concurrent reads.
    """

    num_stations: int
    slices: tuple[SliceSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))
        if self.num_stations < 1:
            raise ValueError("need at least one base station")
        if not self.slices:
            raise ValueError("need at least one slice")
        for sl in self.slices:
            if sl.num_stations != self.num_stations:
                raise ValueError("slice dimensioned for a different station count")
        total = sum(sl.share for sl in self.slices)
        if abs(total - 1.0) > SHARE_SUM_TOL:
            raise ValueError(f"shares must sum to 1 (got {total!r})")

    @property
    def num_slices(self) -> int:
        return len(self.slices)

    @property
    def shares(self) -> np.ndarray:
        return np.array([sl.share for sl in self.slices])


def solve_flow_conservation(gamma, routing, mu) -> np.ndarray:
    """Solve the per-slice flow balance and return offered loads rho.

    kappa = gamma + Q^T kappa gives the visit intensities; loads are
    rho_b = kappa_b * mu_b, i.e. rho = diag(mu) (I - Q^T)^{-1} gamma.

    Raises SingularRouting when I - Q^T is numerically singular (condition
    estimate above 1e12), which signals routing with no exit path. Small B
    makes a dense solve with an explicit condition check the simplest safe
    option here.
    """
    gamma = np.asarray(gamma, dtype=float)
    mu = np.asarray(mu, dtype=float)
    q = np.asarray(routing, dtype=float)
    a = np.eye(q.shape[0]) - q.T
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularRouting(
            f"I - Q^T condition estimate {cond:.3g} exceeds {CONDITION_LIMIT:.0e}"
        )
    kappa = np.linalg.solve(a, gamma)
    rho = mu * kappa
    residual = np.max(np.abs(rho / mu - gamma - q.T @ (rho / mu)))
    if residual > 1e-10 * (1.0 + np.max(np.abs(gamma), initial=0.0)):
        raise SingularRouting(f"flow conservation residual {residual:.3g} too large")
    return rho


@dataclass(frozen=True)
class LoadProfile:
    """Solved load statistics for a TrafficModel.

    Holds, per slice: the load vector rho, its total, and the relative load
    rho_tilde (a probability vector over stations, undefined when the total
    load is zero). Network aggregates:

      g_tilde_b       = sum_v s_v * rho_tilde_b^v
      g_tilde_act_b   = sum_v s_v (1 - exp(-rho_tot^v)) rho_tilde_b^v
      idle_share_b^v  = sum_{u != v} s_u exp(-rho_b^u)

    g_tilde_act weights each slice by its probability of having at least one
    active user anywhere; idle_share is the expected share voided at station b
    as seen by slice v.
    """

    model: TrafficModel
    rho: np.ndarray            # V x B loads
    rho_tot: np.ndarray        # length V
    rho_tilde: np.ndarray      # V x B; rows of zero-load slices are NaN
    g_tilde: np.ndarray        # length B
    g_tilde_act: np.ndarray    # length B
    idle_share: np.ndarray     # V x B

    @property
    def shares(self) -> np.ndarray:
        return self.model.shares

    def delta(self, v: int) -> np.ndarray:
        return self.model.slices[v].delta

    def has_relative_load(self, v: int) -> bool:
        return self.rho_tot[v] > 0.0

    def require_relative_load(self, v: int) -> np.ndarray:
        if not self.has_relative_load(v):
            raise UndefinedRelativeLoad(
                f"slice {v} has zero total load; relative load is undefined"
            )
        return self.rho_tilde[v]


def derive_load_profile(model: TrafficModel, loads=None) -> LoadProfile:
    """Solve all slices' flow equations and assemble the LoadProfile.

    ``loads`` may supply precomputed per-slice load vectors (V x B), e.g. the
    carried loads after admission control; otherwise flow conservation is
    solved from each slice's (gamma, Q, mu). A zero-load slice triggers a
    ZeroLoadSlice warning and leaves its relative-load row undefined (NaN):
    downstream formulas must reject it rather than guess.
    """
    v_count, b_count = model.num_slices, model.num_stations
    if loads is None:
        rho = np.empty((v_count, b_count))
        for v, sl in enumerate(model.slices):
            rho[v] = solve_flow_conservation(sl.gamma, sl.routing, sl.mu)
    else:
        rho = np.asarray(loads, dtype=float).reshape(v_count, b_count).copy()
        if np.any(rho < 0):
            raise ValueError("loads must be nonnegative")

    rho_tot = rho.sum(axis=1)
    rho_tilde = np.full_like(rho, np.nan)
    for v in range(v_count):
        if rho_tot[v] > 0.0:
            rho_tilde[v] = rho[v] / rho_tot[v]
        else:
            warnings.warn(f"slice {v} carries zero load", ZeroLoadSlice, stacklevel=2)

    shares = model.shares
    defined = rho_tot > 0.0
    rt = np.where(defined[:, None], rho_tilde, 0.0)
    g_tilde = shares[defined] @ rt[defined] if defined.any() else np.zeros(b_count)
    activity = -np.expm1(-rho_tot)          # 1 - exp(-rho_tot), exact near zero
    g_tilde_act = (shares * activity) @ rt

    idle = np.empty((v_count, b_count))
    decay = np.exp(-rho)                     # safe: rho <= ~700 by construction
    weighted = shares[:, None] * decay
    total = weighted.sum(axis=0)
    idle = total[None, :] - weighted
    return LoadProfile(
        model=model,
        rho=rho,
        rho_tot=rho_tot,
        rho_tilde=rho_tilde,
        g_tilde=np.asarray(g_tilde, dtype=float),
        g_tilde_act=g_tilde_act,
        idle_share=idle,
    )


def weighted_inner(x, y, w=None) -> float:
    """<x, y>_W with diagonal weight w (identity when omitted)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if w is None:
        return float(x @ y)
    return float(x @ (np.asarray(w, dtype=float) * y))


def weighted_norm(x, w=None) -> float:
    return math.sqrt(max(weighted_inner(x, x, w), 0.0))


def load_geometry(profile: LoadProfile, v: int, weighted: bool = True):
    """Norms of the slice and aggregate relative loads and the angle between.

    Returns (|rho_tilde^v|, |g_tilde|, theta_degrees) in the inner product
    weighted by the slice's delta (pass ``weighted=False`` for plain 2-norms,
    the convention used when quoting measured norms and angles). The angle
    lies in [0, 90] degrees since both vectors are nonnegative.
    """
    rt = profile.require_relative_load(v)
    w = profile.delta(v) if weighted else None
    n_rt = weighted_norm(rt, w)
    n_g = weighted_norm(profile.g_tilde, w)
    if n_rt <= 0.0 or n_g <= 0.0:
        raise ZeroVector("load geometry needs nonzero vectors")
    cosang = weighted_inner(profile.g_tilde, rt, w) / (n_rt * n_g)
    theta = math.degrees(math.acos(min(1.0, max(-1.0, cosang))))
    return n_rt, n_g, theta
