"""Monte Carlo engines that validate the analytics.

Two samplers:

  * a product-form sampler draws independent Poisson counts per (slice,
    station) and, with one tagged customer added at a station chosen by the
    slice's relative load, estimates the typical-customer mean BTD each
    allocation scheme delivers (unbiased for the closed forms in `btd`);

  * an event-driven open-network simulator runs the arrival / sojourn /
    Markov-routing dynamics directly, so stationary count distributions and
    time series can be checked without assuming the product form that the
    analysis relies on. A closed variant (fixed population per slice) mirrors
    the radio experiments; its counts are not Poisson and only mean occupancy
    is comparable.

Also here: the brute-force estimator for the conditional ratio
E[N_i / sum_j N_j | sum > 0] of independent Poissons, which equals
rho_i / sum_j rho_j and underpins the cross-slice terms of the BTD formulas.

Determinism: every entry point takes an integer seed or a numpy Generator;
identical seeds give bit-identical estimates. Replications are independent,
so concurrent execution only needs the spawned substreams from `spawn_rngs`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .allocation import Snapshot
from .errors import AllZero, HorizonTooShort
from .netmodel import LoadProfile, TrafficModel

_CHUNK = 20_000


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent substreams for concurrent replications of one master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    reps: int
    seed: int | None = None

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.stderr


def sample_stationary_snapshot(profile: LoadProfile, rng) -> Snapshot:
    """One product-form draw: counts ~ Poisson(rho[v, b]), capacities from
    each slice's capacity model (deterministic 1/delta by default)."""
    rng = as_rng(rng)
    counts = rng.poisson(profile.rho)
    caps = []
    for v, sl in enumerate(profile.model.slices):
        row = []
        for b in range(profile.model.num_stations):
            n = int(counts[v, b])
            row.append(np.asarray(sl.capacity.sample(sl.delta[b], rng, size=n)))
        caps.append(tuple(row))
    return Snapshot(counts, tuple(caps))


def _tagged_inverse_fraction(scheme, counts, tagged_station, v, shares):
    """1/f for the tagged user, vectorized over replications.

    ``counts`` has shape (R, V, B) and already includes the tagged user at
    (v, tagged_station[r]).
    """
    r_idx = np.arange(counts.shape[0])
    at_station = counts[r_idx, :, tagged_station]      # (R, V)
    n_tag = at_station[:, v].astype(float)
    if scheme == "ss":
        return n_tag / shares[v]
    if scheme == "gps":
        active_share = (at_station > 0) @ shares
        return n_tag * active_share / shares[v]
    if scheme == "scpf":
        totals = counts.sum(axis=2).astype(float)      # (R, V)
        weights = np.divide(shares, totals, out=np.zeros_like(totals), where=totals > 0)
        station_weight = (at_station * weights).sum(axis=1)
        return station_weight * totals[:, v] / shares[v]
    raise ValueError(f"unknown scheme {scheme!r}")


def palm_estimate_btd(
    profile: LoadProfile, v: int, scheme: str, reps: int, seed
) -> McEstimate:
    """Estimate the typical-customer mean BTD of slice v under a scheme.

    Each replication picks the tagged station with probability rho_tilde_b,
    draws the stationary counts, adds the tagged customer there, draws its
    capacity, and records the reciprocal of its allocated rate. Poisson
    arrivals see time averages, so the average over replications is unbiased
    for the closed-form mean BTD.
    """
    rng = as_rng(seed)
    rt = profile.require_relative_load(v)
    shares = profile.shares
    sl = profile.model.slices[v]
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < reps:
        n = min(_CHUNK, reps - done)
        stations = rng.choice(profile.model.num_stations, size=n, p=rt)
        counts = rng.poisson(profile.rho, size=(n,) + profile.rho.shape)
        counts[np.arange(n), v, stations] += 1
        inv_f = _tagged_inverse_fraction(scheme, counts, stations, v, shares)
        inv_c = 1.0 / np.asarray(sl.capacity.sample(sl.delta[stations], rng))
        btd = inv_c * inv_f
        total += btd.sum()
        total_sq += (btd**2).sum()
        done += n
    mean = total / reps
    var = max(total_sq / reps - mean**2, 0.0)
    stderr = math.sqrt(var / reps)
    return McEstimate(mean, stderr, reps, seed if isinstance(seed, int) else None)


def conditional_ratio_oracle(rho, i: int, reps: int, seed) -> McEstimate:
    """Estimate E[N_i / sum_j N_j | sum_j N_j > 0] for independent Poissons.

    The exact value is rho_i / sum_j rho_j regardless of the split, which is
    what this brute-force sampler exists to confirm.
    """
    rho = np.asarray(rho, dtype=float)
    if np.all(rho == 0):
        raise AllZero("every intensity is zero")
    rng = as_rng(seed)
    total = 0.0
    total_sq = 0.0
    kept = 0
    done = 0
    while done < reps:
        n = min(max(_CHUNK, 1), reps - done)
        draws = rng.poisson(rho, size=(n, rho.size))
        sums = draws.sum(axis=1)
        mask = sums > 0
        ratio = draws[mask, i] / sums[mask]
        total += ratio.sum()
        total_sq += (ratio**2).sum()
        kept += int(mask.sum())
        done += n
    mean = total / kept
    var = max(total_sq / kept - mean**2, 0.0)
    return McEstimate(mean, math.sqrt(var / kept), kept, seed if isinstance(seed, int) else None)


# ---------------------------------------------------------------------------
# Event-driven simulation
# ---------------------------------------------------------------------------

_ARRIVAL, _TRANSITION = 0, 1


@dataclass
class EventTrace:
    """Outputs of one event-driven run.

    Count samples are taken at regular instants (roughly one per
    ``sample_interval``); time_avg_counts integrates the count paths exactly
    over the post-warm-up window. btd_series holds
    (time, slice, station, user_id, scheme, btd) rows for tagged users.
    """

    horizon: float
    warmup: float
    sample_times: np.ndarray
    sampled_counts: np.ndarray          # S x V x B
    time_avg_counts: np.ndarray         # V x B
    arrivals: int
    departures: int
    in_system_at_end: int
    btd_series: list = field(default_factory=list)
    seed: int | None = None

    def count_histogram(self, v: int, b: int) -> dict[int, int]:
        vals, freq = np.unique(self.sampled_counts[:, v, b], return_counts=True)
        return dict(zip(vals.tolist(), freq.tolist()))

    def btd_csv_rows(self):
        yield ("time", "slice", "station", "user_id", "scheme", "btd")
        for row in self.btd_series:
            yield row


class _User:
    __slots__ = ("uid", "slice_index", "station", "inv_capacity")

    def __init__(self, uid, slice_index, station, inv_capacity):
        self.uid = uid
        self.slice_index = slice_index
        self.station = station
        self.inv_capacity = inv_capacity


def _slice_btds(counts, shares, user: _User):
    """BTD of one user under all three schemes given current counts."""
    v, b = user.slice_index, user.station
    n_b = counts[v, b]
    out = {}
    out["ss"] = user.inv_capacity * n_b / shares[v]
    active = (counts[:, b] > 0) @ shares
    out["gps"] = user.inv_capacity * n_b * active / shares[v]
    totals = counts.sum(axis=1).astype(float)
    weights = np.divide(shares, totals, out=np.zeros(len(shares)), where=totals > 0)
    station_weight = counts[:, b] @ weights
    out["scpf"] = user.inv_capacity * station_weight * totals[v] / shares[v]
    return out


def run_event_sim(
    model: TrafficModel,
    horizon: float,
    seed,
    warmup_frac: float = 0.2,
    sample_interval: float | None = None,
    min_samples: int = 50,
    closed_populations=None,
    tag_users: bool = False,
) -> EventTrace:
    """Simulate the open network of infinite-server stations (or the closed
    variant when ``closed_populations`` gives a fixed population per slice).

    Events are processed from a priority queue keyed by (time, sequence
    number), so ties break deterministically and identical seeds replay
    identical paths. The first ``warmup_frac`` of the horizon is discarded
    from all statistics. Counts are sampled every ``sample_interval``
    (default: twice the largest mean sojourn) for distributional checks;
    means use the exact time integral.
    """
    rng = as_rng(seed)
    v_count, b_count = model.num_slices, model.num_stations
    shares = model.shares
    closed = closed_populations is not None
    if sample_interval is None:
        sample_interval = 2.0 * max(float(np.max(sl.mu)) for sl in model.slices)
    warmup = warmup_frac * horizon

    heap: list = []
    seq = 0

    def push(t, kind, payload):
        nonlocal seq
        heapq.heappush(heap, (t, seq, kind, payload))
        seq += 1

    def draw_capacity(sl, b):
        return 1.0 / float(sl.capacity.sample(sl.delta[b], rng))

    counts = np.zeros((v_count, b_count), dtype=np.int64)
    integral = np.zeros((v_count, b_count))
    last_t = warmup
    arrivals = departures = 0
    next_uid = 0
    tagged: dict[int, _User] = {}
    btd_series: list = []

    routing = []
    for v, sl in enumerate(model.slices):
        if closed:
            rows = sl.routing.sum(axis=1)
            if np.any(rows <= 0):
                raise ValueError("closed mode needs positive routing row sums")
            routing.append(sl.routing / rows[:, None])
        else:
            routing.append(sl.routing)

    def admit(v, b, t):
        nonlocal next_uid
        sl = model.slices[v]
        user = _User(next_uid, v, b, draw_capacity(sl, b))
        next_uid += 1
        counts[v, b] += 1
        push(t + sl.sample_sojourn(b, rng), _TRANSITION, user)
        if tag_users and v not in tagged:
            tagged[v] = user
        return user

    if closed:
        # start from the per-slice stationary station distribution so the
        # warm-up has little to do
        for v, sl in enumerate(model.slices):
            pi = _closed_station_distribution(routing[v], sl.mu)
            stations = rng.choice(b_count, size=int(closed_populations[v]), p=pi)
            for b in stations:
                admit(v, int(b), 0.0)
                arrivals += 1
    else:
        for v, sl in enumerate(model.slices):
            for b in range(b_count):
                if sl.gamma[b] > 0:
                    push(rng.exponential(1.0 / sl.gamma[b]), _ARRIVAL, (v, b))

    sample_times = []
    samples = []
    next_sample = warmup + sample_interval

    def advance_integral(t):
        nonlocal last_t
        if t > last_t:
            integral[...] += counts * (t - last_t)
            last_t = t

    while heap:
        t, _, kind, payload = heapq.heappop(heap)
        if t > horizon:
            break
        while next_sample <= min(t, horizon):
            sample_times.append(next_sample)
            samples.append(counts.copy())
            next_sample += sample_interval
        if t > warmup:
            advance_integral(t)
        if kind == _ARRIVAL:
            v, b = payload
            sl = model.slices[v]
            admit(v, b, t)
            arrivals += 1
            push(t + rng.exponential(1.0 / sl.gamma[b]), _ARRIVAL, (v, b))
        else:
            user = payload
            v, b = user.slice_index, user.station
            sl = model.slices[v]
            dest_probs = routing[v][b]
            stay = dest_probs.sum()
            u = rng.random()
            if u < stay:
                dest = int(np.searchsorted(np.cumsum(dest_probs), u))
                counts[v, b] -= 1
                counts[v, dest] += 1
                user.station = dest
                user.inv_capacity = draw_capacity(sl, dest)
                push(t + sl.sample_sojourn(dest, rng), _TRANSITION, user)
            else:
                counts[v, b] -= 1
                departures += 1
                if user.slice_index in tagged and tagged[user.slice_index] is user:
                    del tagged[user.slice_index]
        if tag_users and t > warmup:
            for user in tagged.values():
                for scheme, btd in _slice_btds(counts, shares, user).items():
                    btd_series.append(
                        (t, user.slice_index, user.station, user.uid, scheme, btd)
                    )

    while next_sample <= horizon:
        sample_times.append(next_sample)
        samples.append(counts.copy())
        next_sample += sample_interval
    advance_integral(horizon)

    if len(samples) < min_samples:
        raise HorizonTooShort(
            f"{len(samples)} post-warm-up samples < required {min_samples}"
        )
    span = horizon - warmup
    return EventTrace(
        horizon=horizon,
        warmup=warmup,
        sample_times=np.asarray(sample_times),
        sampled_counts=np.stack(samples),
        time_avg_counts=integral / span,
        arrivals=arrivals,
        departures=departures,
        in_system_at_end=int(counts.sum()),
        btd_series=btd_series,
        seed=seed if isinstance(seed, int) else None,
    )


def _closed_station_distribution(stochastic_routing, mu) -> np.ndarray:
    """Time-stationary station occupancy for one closed-network user:
    embedded-chain stationary vector reweighted by mean dwell times."""
    p = np.asarray(stochastic_routing, dtype=float)
    vals, vecs = np.linalg.eig(p.T)
    k = int(np.argmin(np.abs(vals - 1.0)))
    pi = np.real(vecs[:, k])
    pi = np.abs(pi) / np.abs(pi).sum()
    w = pi * np.asarray(mu, dtype=float)
    return w / w.sum()


def poisson_gof_pvalue(samples, mean: float) -> float:
    """Chi-squared goodness-of-fit p-value of integer samples vs Poisson(mean).

    Bins are consecutive counts merged (from both tails inward) until every
    bin's expected frequency is at least 5; no parameters are estimated, so
    the degrees of freedom are #bins - 1.
    """
    from scipy import stats

    samples = np.asarray(samples, dtype=np.int64)
    n = samples.size
    hi = int(max(samples.max(initial=0), math.ceil(mean + 10 * math.sqrt(mean + 1))))
    probs = stats.poisson.pmf(np.arange(hi + 1), mean)
    probs = np.append(probs, max(1.0 - probs.sum(), 0.0))   # tail bin
    observed = np.bincount(np.minimum(samples, hi + 1), minlength=hi + 2).astype(float)

    merged_obs, merged_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, probs * n):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            merged_obs.append(acc_o)
            merged_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if merged_obs:
        merged_obs[-1] += acc_o
        merged_exp[-1] += acc_e
    else:
        return 1.0
    if len(merged_obs) < 2:
        return 1.0
    obs = np.asarray(merged_obs)
    exp = np.asarray(merged_exp) * obs.sum() / sum(merged_exp)
    chi2 = float(((obs - exp) ** 2 / exp).sum())
    return float(stats.chi2.sf(chi2, len(obs) - 1))
