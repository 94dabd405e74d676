"""Shared builders for test scenarios."""

import numpy as np

from scpf.netmodel import CapacityModel, SliceSpec, TrafficModel, derive_load_profile


def slice_from_loads(loads, share, delta=None, capacity=None, **kw):
    """SliceSpec whose flow solution equals ``loads`` (no routing, unit mu)."""
    loads = np.asarray(loads, dtype=float)
    b = loads.size
    return SliceSpec(
        share=share,
        gamma=loads,
        mu=np.ones(b),
        routing=np.zeros((b, b)),
        delta=np.full(b, 1.0) if delta is None else np.asarray(delta, float),
        capacity=capacity or CapacityModel(),
        **kw,
    )


def model_from_loads(shares, loads, deltas=None, **kw):
    loads = np.asarray(loads, dtype=float)
    v, b = loads.shape
    slices = tuple(
        slice_from_loads(
            loads[i],
            shares[i],
            delta=None if deltas is None else deltas[i],
            **kw,
        )
        for i in range(v)
    )
    return TrafficModel(num_stations=b, slices=slices)


def profile_from_loads(shares, loads, deltas=None, **kw):
    return derive_load_profile(model_from_loads(shares, loads, deltas, **kw))


def single_slice_profile(loads, delta=None):
    return profile_from_loads([1.0], np.atleast_2d(loads), None if delta is None else [delta])


def orthogonal_two_slice(rho_tot=(50.0, 50.0), shares=(0.5, 0.5)):
    loads = np.array([[rho_tot[0], 0.0], [0.0, rho_tot[1]]])
    return profile_from_loads(shares, loads)


def random_substochastic(rng, b, max_row_sum=0.95):
    q = rng.random((b, b))
    scale = rng.uniform(0.1, max_row_sum, size=b) / q.sum(axis=1)
    return q * scale[:, None]


def random_model(rng, v=None, b=None, rho_scale=5.0, routed=True):
    v = v or rng.integers(2, 5)
    b = b or rng.integers(2, 7)
    shares = rng.dirichlet(np.ones(v) * 2.0)
    slices = []
    for i in range(v):
        if routed:
            q = random_substochastic(rng, b)
        else:
            q = np.zeros((b, b))
        slices.append(
            SliceSpec(
                share=float(shares[i]),
                gamma=rng.uniform(0.05, rho_scale, size=b),
                mu=rng.uniform(0.5, 2.0, size=b),
                routing=q,
                delta=rng.uniform(0.5, 2.0, size=b),
            )
        )
    return TrafficModel(num_stations=int(b), slices=tuple(slices))


def heavy_profile(rng, v=None, b=None, rho_tot_range=(200.0, 1000.0)):
    """Random profile in the regime the heavy-load limit forms presume:
    every positive per-station load is large, zeros allowed."""
    v = v or int(rng.integers(2, 5))
    b = b or int(rng.integers(2, 7))
    shares = rng.dirichlet(np.ones(v) * 2.0)
    shares = 0.5 * shares + 0.5 / v     # keep shares away from zero
    loads = np.zeros((v, b))
    for i in range(v):
        support = rng.random(b) < 0.7
        if not support.any():
            support[rng.integers(b)] = True
        rt = np.zeros(b)
        rt[support] = rng.uniform(0.15, 1.0, size=int(support.sum()))
        rt /= rt.sum()
        loads[i] = rt * rng.uniform(*rho_tot_range)
    return profile_from_loads(shares, loads)
