import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scpf.allocation import Snapshot, rates_gps, rates_scpf, rates_ss

# the worked two-station example: slice 1 has two users at station 0,
# slice 2 has one user at each station, all capacities 1, equal shares
TWO_CELL = Snapshot.from_counts([[2, 0], [1, 1]])
HALVES = [0.5, 0.5]


def flat(alloc):
    out = []
    for row in alloc.rates:
        for arr in row:
            out.extend(arr.tolist())
    return out


def test_static_slicing_reference_rates():
    alloc = rates_ss(TWO_CELL, HALVES)
    assert alloc.rates[0][0].tolist() == [0.25, 0.25]
    assert alloc.rates[1][0].tolist() == [0.5]
    assert alloc.rates[1][1].tolist() == [0.5]


def test_processor_sharing_reference_rates():
    alloc = rates_gps(TWO_CELL, HALVES)
    assert alloc.rates[0][0].tolist() == [0.25, 0.25]
    assert alloc.rates[1][0].tolist() == [0.5]
    assert alloc.rates[1][1].tolist() == [1.0]


def test_scpf_reference_rates():
    alloc = rates_scpf(TWO_CELL, HALVES)
    assert alloc.rates[0][0].tolist() == [1 / 3, 1 / 3]
    assert alloc.rates[1][0].tolist() == [1 / 3]
    assert alloc.rates[1][1].tolist() == [1.0]


def test_sole_user_full_rate():
    snap = Snapshot.from_counts([[1]], capacity=7.0)
    assert rates_ss(snap, [1.0]).rates[0][0].tolist() == [7.0]
    assert rates_gps(snap, [1.0]).rates[0][0].tolist() == [7.0]
    assert rates_scpf(snap, [1.0]).rates[0][0].tolist() == [7.0]


def random_snapshot(rng, v, b, max_count=4):
    counts = rng.integers(0, max_count + 1, size=(v, b))
    caps = tuple(
        tuple(rng.uniform(0.5, 3.0, size=int(n)) for n in row) for row in counts
    )
    return Snapshot(counts, caps)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(2, 5))
def test_fraction_sums(seed, v, b):
    rng = np.random.default_rng(seed)
    snap = random_snapshot(rng, v, b)
    shares = rng.dirichlet(np.ones(v))
    ss = rates_ss(snap, shares)
    gps = rates_gps(snap, shares)
    scpf = rates_scpf(snap, shares)
    for station in range(b):
        active = snap.counts[:, station] > 0
        # direct summation oracle for the static split
        assert ss.station_fraction_sum(station) == pytest.approx(
            shares[active].sum(), abs=1e-12
        )
        if active.any():
            assert gps.station_fraction_sum(station) == pytest.approx(1.0, abs=1e-12)
            assert scpf.station_fraction_sum(station) == pytest.approx(1.0, abs=1e-12)
        assert ss.station_fraction_sum(station) <= 1.0 + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_scpf_share_scale_invariance(seed):
    rng = np.random.default_rng(seed)
    snap = random_snapshot(rng, 3, 3)
    shares = rng.dirichlet(np.ones(3))
    base = rates_scpf(snap, shares)
    scaled = rates_scpf(snap, shares * 4.5)
    for v in range(3):
        for b in range(3):
            assert np.allclose(base.rates[v][b], scaled.rates[v][b], atol=1e-12)


def test_scpf_colocated_equal_split():
    # two slices, two users each, all at the same station: every weight is
    # s/2 so each of the four users gets a quarter of the station
    snap = Snapshot.from_counts([[2, 0], [2, 0]], capacity=2.0)
    alloc = rates_scpf(snap, HALVES)
    for v in range(2):
        assert np.allclose(alloc.rates[v][0], 0.5)
        assert np.allclose(alloc.fractions[v][0], 0.25)


def test_gps_equals_scpf_for_single_station_slices():
    # each slice concentrated at exactly one station; stations hosting one
    # slice see identical GPS and SCPF allocations
    snap = Snapshot.from_counts([[3, 0], [0, 2]])
    gps = rates_gps(snap, [0.3, 0.7])
    scpf = rates_scpf(snap, [0.3, 0.7])
    assert np.allclose(gps.rates[0][0], scpf.rates[0][0], atol=1e-12)
    assert np.allclose(gps.rates[1][1], scpf.rates[1][1], atol=1e-12)


def test_single_slice_degenerate_schemes_agree():
    rng = np.random.default_rng(1)
    snap = random_snapshot(rng, 1, 4)
    shares = [1.0]
    a, b_, c = rates_ss(snap, shares), rates_gps(snap, shares), rates_scpf(snap, shares)
    assert flat(a) == pytest.approx(flat(b_), abs=1e-12)
    assert flat(a) == pytest.approx(flat(c), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_rates_positive(seed):
    rng = np.random.default_rng(seed)
    snap = random_snapshot(rng, 3, 4)
    shares = rng.dirichlet(np.ones(3))
    for fn in (rates_ss, rates_gps, rates_scpf):
        assert np.all(fn(snap, shares).flat_rates() > 0)


def test_snapshot_validation():
    with pytest.raises(ValueError):
        Snapshot([[1]], ((np.array([1.0, 2.0]),),))
    with pytest.raises(ValueError):
        Snapshot([[1]], ((np.array([-1.0]),),))
