import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scpf.errors import SingularRouting, UndefinedRelativeLoad, ZeroLoadSlice
from scpf.netmodel import (
    SliceSpec,
    TrafficModel,
    derive_load_profile,
    load_geometry,
    solve_flow_conservation,
)

from util import model_from_loads, profile_from_loads, random_substochastic


def test_flow_identity_when_everyone_exits():
    rho = solve_flow_conservation([3.0, 5.0], np.zeros((2, 2)), [1.0, 1.0])
    assert np.allclose(rho, [3.0, 5.0], atol=0, rtol=0)


def test_flow_two_station_feed_forward():
    # station 1 feeds half its flow to station 2: kappa = (1, 0.5)
    q = np.array([[0.0, 0.5], [0.0, 0.0]])
    rho = solve_flow_conservation([1.0, 0.0], q, [1.0, 1.0])
    assert np.allclose(rho, [1.0, 0.5], rtol=1e-14)


def test_flow_symmetric_recirculation():
    # kappa = 1 + 0.9 kappa at both stations -> kappa = 10
    q = np.array([[0.0, 0.9], [0.9, 0.0]])
    rho = solve_flow_conservation([1.0, 1.0], q, [1.0, 1.0])
    assert np.allclose(rho, [10.0, 10.0], rtol=1e-10)


def test_flow_singular_routing_raises():
    q = np.array([[0.0, 1.0], [1.0, 0.0]])   # nobody ever exits
    with pytest.raises(SingularRouting):
        solve_flow_conservation([1.0, 1.0], q, [1.0, 1.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000))
def test_flow_residual_property(b, seed):
    rng = np.random.default_rng(seed)
    q = random_substochastic(rng, b)
    gamma = rng.uniform(0.0, 10.0, size=b)
    mu = rng.uniform(0.1, 5.0, size=b)
    rho = solve_flow_conservation(gamma, q, mu)
    residual = np.max(np.abs(rho / mu - gamma - q.T @ (rho / mu)))
    assert residual <= 1e-10 * (1.0 + gamma.max())


def test_profile_single_slice():
    prof = profile_from_loads([1.0], [[2.0, 2.0]])
    assert np.allclose(prof.rho_tilde[0], [0.5, 0.5])
    assert np.allclose(prof.g_tilde, [0.5, 0.5])


def test_profile_orthogonal_slices():
    prof = profile_from_loads([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
    assert np.allclose(prof.g_tilde, [0.5, 0.5])


def test_profile_activity_factor_exact():
    # rho_tot = ln 2 gives activity factor exactly 1/2
    prof = profile_from_loads([0.5, 0.5], [[math.log(2), 0.0], [0.0, 3.0]])
    expected = 0.5 * 0.5 * 1.0   # share * activity * rho_tilde at station 0
    assert prof.g_tilde_act[0] == pytest.approx(expected, abs=1e-15)


def test_profile_aggregate_sums():
    rng = np.random.default_rng(7)
    loads = rng.uniform(0.1, 4.0, size=(3, 4))
    prof = profile_from_loads([0.2, 0.3, 0.5], loads)
    assert prof.g_tilde.sum() == pytest.approx(1.0, abs=1e-12)
    expected = sum(
        s * -math.expm1(-r) for s, r in zip(prof.shares, prof.rho_tot)
    )
    assert prof.g_tilde_act.sum() == pytest.approx(expected, abs=1e-12)


def test_profile_idle_share_identity():
    rng = np.random.default_rng(11)
    loads = rng.uniform(0.0, 3.0, size=(3, 5))
    prof = profile_from_loads([0.25, 0.35, 0.4], loads)
    for v in range(3):
        others = [u for u in range(3) if u != v]
        activity = sum(
            prof.shares[u] * -np.expm1(-prof.rho[u]) for u in others
        )
        total = prof.idle_share[v] + activity
        assert np.allclose(total, 1.0 - prof.shares[v], atol=1e-12)
        assert np.all(prof.idle_share[v] <= 1.0 - prof.shares[v] + 1e-12)
        assert np.all(prof.idle_share[v] >= 0.0)


def test_profile_activity_aggregate_converges():
    prof = profile_from_loads([0.5, 0.5], [[25.0, 25.0], [40.0, 10.0]])
    assert np.all(np.abs(prof.g_tilde_act - prof.g_tilde) <= 1e-20)


def test_zero_load_slice_flagged():
    with pytest.warns(ZeroLoadSlice):
        prof = profile_from_loads([0.5, 0.5], [[1.0, 1.0], [0.0, 0.0]])
    assert not prof.has_relative_load(1)
    with pytest.raises(UndefinedRelativeLoad):
        prof.require_relative_load(1)
    assert np.allclose(prof.g_tilde, [0.25, 0.25])   # only the live slice


def test_share_sum_validated():
    with pytest.raises(ValueError):
        model_from_loads([0.5, 0.6], [[1.0], [1.0]])


def test_geometry_parallel_and_skew():
    prof = profile_from_loads([1.0], [[3.0, 3.0]])
    _, _, theta = load_geometry(prof, 0)
    assert theta == pytest.approx(0.0, abs=1e-5)   # acos is ill-conditioned at 1

    prof = profile_from_loads([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
    n_rt, n_g, theta = load_geometry(prof, 0, weighted=False)
    assert theta == pytest.approx(45.0, abs=1e-9)
    assert n_rt == pytest.approx(1.0)
    assert n_g == pytest.approx(math.sqrt(0.5))


def test_geometry_angle_range_random():
    rng = np.random.default_rng(3)
    for _ in range(25):
        loads = rng.uniform(0.0, 5.0, size=(2, 4)) + 1e-3
        prof = profile_from_loads([0.4, 0.6], loads)
        for v in range(2):
            _, _, theta = load_geometry(prof, v)
            assert 0.0 <= theta <= 90.0


def test_sojourn_and_capacity_sampling_means():
    rng = np.random.default_rng(5)
    sl = SliceSpec(
        share=1.0,
        gamma=[1.0],
        mu=[2.0],
        routing=[[0.0]],
        delta=[0.5],
        sojourn_kind="lognormal",
        sojourn_cv=0.8,
    )
    draws = np.array([sl.sample_sojourn(0, rng) for _ in range(40_000)])
    assert draws.mean() == pytest.approx(2.0, rel=0.02)

    from scpf.netmodel import CapacityModel

    cap = CapacityModel(kind="lognormal", sigma=0.7)
    c = cap.sample(0.5, rng, size=200_000)
    assert (1.0 / c).mean() == pytest.approx(0.5, rel=0.02)


def test_model_rejects_bad_inputs():
    with pytest.raises(ValueError):
        SliceSpec(share=1.0, gamma=[1.0], mu=[0.0], routing=[[0.0]], delta=[1.0])
    with pytest.raises(ValueError):
        SliceSpec(share=1.0, gamma=[1.0], mu=[1.0], routing=[[1.5]], delta=[1.0])
    with pytest.raises(ValueError):
        TrafficModel(num_stations=0, slices=())
