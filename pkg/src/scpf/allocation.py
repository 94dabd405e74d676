"""Instantaneous per-user rate allocation for a network snapshot.

Three schemes over a common snapshot (user counts per slice and station, plus
each user's current peak capacity):

  static slicing    - every slice owns a fixed fraction of every station.
  processor sharing - stations split among the slices active there, in
                      proportion to shares.
  share-constrained proportional fairness - each slice spreads its share
                      equally over its active users network-wide; stations
                      then allocate in proportion to user weights.

Rates are real valued (quantization ignored) and never sampled here: the
snapshot carries one capacity per user.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Snapshot:
    """User counts n[v, b] and per-(v, b) capacity vectors, one entry per user."""

    counts: np.ndarray                       # V x B, nonnegative ints
    capacities: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        caps = tuple(
            tuple(np.asarray(c, dtype=float) for c in row) for row in self.capacities
        )
        object.__setattr__(self, "capacities", caps)
        v, b = counts.shape
        if len(caps) != v or any(len(row) != b for row in caps):
            raise ValueError("capacities must be a V x B grid of vectors")
        for vi in range(v):
            for bi in range(b):
                if caps[vi][bi].shape != (counts[vi, bi],):
                    raise ValueError(f"capacity list at ({vi},{bi}) mismatches count")
                if np.any(caps[vi][bi] <= 0):
                    raise ValueError("capacities must be positive")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")

    @property
    def num_slices(self) -> int:
        return self.counts.shape[0]

    @property
    def num_stations(self) -> int:
        return self.counts.shape[1]

    @property
    def slice_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @classmethod
    def from_counts(cls, counts, capacity=1.0) -> "Snapshot":
        """Snapshot with one shared capacity value, handy in tests."""
        counts = np.asarray(counts, dtype=np.int64)
        caps = tuple(
            tuple(np.full(int(n), float(capacity)) for n in row) for row in counts
        )
        return cls(counts, caps)


@dataclass(frozen=True)
class RateAllocation:
    """Per-user rates and resource fractions, grouped like the snapshot."""

    rates: tuple[tuple[np.ndarray, ...], ...]
    fractions: tuple[tuple[np.ndarray, ...], ...]

    def station_fraction_sum(self, b: int) -> float:
        return float(sum(row[b].sum() for row in self.fractions))

    def flat_rates(self) -> np.ndarray:
        chunks = [r for row in self.rates for r in row if r.size]
        return np.concatenate(chunks) if chunks else np.empty(0)


def _check_shares(shares, v: int, normalized: bool = True) -> np.ndarray:
    shares = np.asarray(shares, dtype=float)
    if shares.shape != (v,):
        raise ValueError("one share per slice required")
    if np.any(shares <= 0):
        raise ValueError("shares must be positive")
    if normalized and abs(shares.sum() - 1.0) > 1e-9:
        raise ValueError("shares must sum to 1")
    return shares


def _assemble(snap: Snapshot, fraction_of):
    """Build a RateAllocation from a per-(v, b) fraction rule."""
    rates, fracs = [], []
    for v in range(snap.num_slices):
        r_row, f_row = [], []
        for b in range(snap.num_stations):
            n = int(snap.counts[v, b])
            if n == 0:
                r_row.append(np.empty(0))
                f_row.append(np.empty(0))
                continue
            f = fraction_of(v, b, n)
            f_row.append(np.full(n, f))
            r_row.append(f * snap.capacities[v][b])
        rates.append(tuple(r_row))
        fracs.append(tuple(f_row))
    return RateAllocation(tuple(rates), tuple(fracs))


def rates_ss(snap: Snapshot, shares) -> RateAllocation:
    """Static slicing: slice v owns fraction s_v of each station outright."""
    shares = _check_shares(shares, snap.num_slices)
    return _assemble(snap, lambda v, b, n: shares[v] / n)


def rates_gps(snap: Snapshot, shares) -> RateAllocation:
    """Processor sharing among the slices active at each station."""
    shares = _check_shares(shares, snap.num_slices)
    active_share = (snap.counts > 0).T @ shares   # per station
    return _assemble(snap, lambda v, b, n: shares[v] / (n * active_share[b]))


def rates_scpf(snap: Snapshot, shares) -> RateAllocation:
    """Share-constrained proportional fairness.

    Each user of slice v gets weight s_v / n^v with n^v the slice's
    network-wide user count; station b serves its users in proportion to
    weight, so slice v's aggregate fraction there is
    (n_b^v s_v / n^v) / sum_u (n_b^u s_u / n^u). Only share ratios matter,
    so unnormalized share vectors are accepted here.
    """
    shares = _check_shares(shares, snap.num_slices, normalized=False)
    totals = snap.slice_totals
    weights = np.zeros(snap.num_slices)
    occupied = totals > 0
    weights[occupied] = shares[occupied] / totals[occupied]
    station_weight = weights @ snap.counts        # per station

    def fraction(v, b, n):
        return weights[v] / station_weight[b]

    return _assemble(snap, fraction)


SCHEMES = {"ss": rates_ss, "gps": rates_gps, "scpf": rates_scpf}
