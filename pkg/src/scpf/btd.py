"""Closed-form mean bit transmission delay (BTD) and gain expressions.

BTD is the reciprocal of a user's instantaneous rate, averaged over the
stationary network state as seen by a typical customer of a slice. All
formulas take a solved LoadProfile; none of them sample. Heavy- and
light-load limit forms are evaluated on the finite profile supplied: "heavy"
means plugging the given relative loads into the limiting expression, not
taking a symbolic limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry
from .netmodel import LoadProfile, weighted_inner

_DENOM_FLOOR = 1e-300


def _safe_div(num: float, den: float) -> float:
    if abs(den) < _DENOM_FLOOR:
        raise DegenerateGeometry(f"denominator {den!r} underflows")
    return num / den


def btd_scpf_per_station(profile: LoadProfile, v: int) -> np.ndarray:
    """Mean BTD of a typical slice-v user conditioned on each station.

    delta_b * (1 - rt_b + (rho+1) * (g_act_b / s + exp(-rho) * rt_b)), where
    rt is the slice's relative load and g_act the activity-weighted aggregate.
    The tagged user itself is included (Palm view: stationary state plus one
    extra customer).
    """
    rt = profile.require_relative_load(v)
    s = profile.shares[v]
    rho = profile.rho_tot[v]
    delta = profile.delta(v)
    return delta * (
        1.0 - rt + (rho + 1.0) * (profile.g_tilde_act / s + math.exp(-rho) * rt)
    )


def btd_ss_per_station(profile: LoadProfile, v: int) -> np.ndarray:
    rt = profile.require_relative_load(v)
    return profile.delta(v) * (profile.rho_tot[v] * rt + 1.0) / profile.shares[v]


def btd_gps_per_station(profile: LoadProfile, v: int) -> np.ndarray:
    return btd_ss_per_station(profile, v) * (1.0 - profile.idle_share[v])


_PER_STATION = {
    "scpf": btd_scpf_per_station,
    "ss": btd_ss_per_station,
    "gps": btd_gps_per_station,
}


def mean_btd(profile: LoadProfile, v: int, scheme: str) -> float:
    """Station-weighted mean BTD for a typical slice-v user under a scheme."""
    rt = profile.require_relative_load(v)
    return float(rt @ _PER_STATION[scheme](profile, v))


def mean_btd_scpf(profile: LoadProfile, v: int) -> float:
    return mean_btd(profile, v, "scpf")


def mean_btd_ss(profile: LoadProfile, v: int) -> float:
    return mean_btd(profile, v, "ss")


def mean_btd_gps(profile: LoadProfile, v: int) -> float:
    return mean_btd(profile, v, "gps")


def mean_btd_scpf_asymptotic(profile: LoadProfile, v: int) -> float:
    """Leading term of the mean BTD for large slice loads:
    (rho / s) <rho_tilde, g_tilde>_Delta. The dropped remainder is O(1)."""
    rt = profile.require_relative_load(v)
    return (profile.rho_tot[v] / profile.shares[v]) * weighted_inner(
        rt, profile.g_tilde, profile.delta(v)
    )


def _gain_denominator(profile: LoadProfile, v: int) -> float:
    """s * E[1/R] under the dynamic-sharing scheme, in expanded form."""
    rt = profile.require_relative_load(v)
    s = profile.shares[v]
    rho = profile.rho_tot[v]
    delta = profile.delta(v)
    n2 = weighted_inner(rt, rt, delta)
    return (
        s * weighted_inner(delta, rt)
        - s * (1.0 - (rho + 1.0) * math.exp(-rho)) * n2
        + (rho + 1.0) * weighted_inner(profile.g_tilde_act, rt, delta)
    )


def gain_ss(profile: LoadProfile, v: int) -> float:
    """BTD gain over static slicing (ratio of mean BTDs, closed form)."""
    rt = profile.require_relative_load(v)
    delta = profile.delta(v)
    num = profile.rho_tot[v] * weighted_inner(rt, rt, delta) + weighted_inner(delta, rt)
    return _safe_div(num, _gain_denominator(profile, v))


def gain_gps(profile: LoadProfile, v: int) -> float:
    """BTD gain over processor sharing."""
    rt = profile.require_relative_load(v)
    delta = profile.delta(v)
    idle = profile.idle_share[v]
    n2 = weighted_inner(rt, rt, delta)
    n2_idle = weighted_inner(rt, rt, delta * idle)
    num = profile.rho_tot[v] * (n2 - n2_idle) + weighted_inner(rt, 1.0 - idle, delta)
    return _safe_div(num, _gain_denominator(profile, v))


def _g_act_excluding(profile: LoadProfile, v: int) -> np.ndarray:
    """Activity-weighted aggregate with slice v's own term removed.

    This is the rho^v -> 0 limit of g_tilde_act holding other slices fixed,
    which is what the light-load gain forms assume.
    """
    s = profile.shares[v]
    act = -math.expm1(-profile.rho_tot[v])
    own = 0.0 if not profile.has_relative_load(v) else s * act * profile.rho_tilde[v]
    return profile.g_tilde_act - own


@dataclass(frozen=True)
class GainLimits:
    ss_light: float
    ss_heavy: float
    gps_light: float
    gps_heavy: float


def gain_limits(profile: LoadProfile, v: int) -> GainLimits:
    """Light- and heavy-load limit gains for slice v.

    Light forms send the slice's own load to zero (other slices as given), so
    the activity-weighted aggregate excludes the slice's own term; the SS
    light gain is then strictly above 1. Heavy forms plug the given relative
    loads into the limiting expressions; the GPS heavy form keeps the idle
    shares computed from the finite per-station loads supplied, since
    stations where the slice puts no load never empty out of others' shares.
    """
    rt = profile.require_relative_load(v)
    s = profile.shares[v]
    delta = profile.delta(v)
    idle = profile.idle_share[v]
    d_rt = weighted_inner(delta, rt)
    n2 = weighted_inner(rt, rt, delta)
    g_act_rest = weighted_inner(_g_act_excluding(profile, v), rt, delta)
    light_den = s * d_rt + g_act_rest
    g_rt = weighted_inner(profile.g_tilde, rt, delta)
    return GainLimits(
        ss_light=_safe_div(d_rt, light_den),
        ss_heavy=_safe_div(n2, g_rt),
        gps_light=_safe_div(weighted_inner(rt, 1.0 - idle, delta), light_den),
        gps_heavy=_safe_div(n2 - weighted_inner(rt, rt, delta * idle), g_rt),
    )


def gain_ss_heavy_from_geometry(
    norm_slice: float, norm_aggregate: float, theta_deg: float
) -> float:
    """Heavy-load gain over static slicing from measured load geometry.

    When a slice sees homogeneous mean reciprocal capacity across stations,
    the heavy-load gain reduces to (|rho_tilde| / |g_tilde|) / cos(theta):
    imbalance relative to the aggregate times misalignment with it.
    """
    return _safe_div(norm_slice / norm_aggregate, math.cos(math.radians(theta_deg)))


def normalized_btd(profile: LoadProfile, v: int, scheme: str) -> float:
    """Dimensionless mean BTD: per-station BTD rescaled by s / (rho * delta_b)
    before station-averaging, so capacity and share heterogeneity divide out."""
    rt = profile.require_relative_load(v)
    rho = profile.rho_tot[v]
    scale = profile.shares[v] / (rho * profile.delta(v))
    return float(rt @ (scale * _PER_STATION[scheme](profile, v)))


def overall_gains(profile: LoadProfile) -> tuple[float, float]:
    """Share-weighted normalized-BTD gains over SS and GPS across all slices."""
    weights = profile.shares
    base = sum(
        w * normalized_btd(profile, v, "scpf") for v, w in enumerate(weights)
    )
    num_ss = sum(w * normalized_btd(profile, v, "ss") for v, w in enumerate(weights))
    num_gps = sum(w * normalized_btd(profile, v, "gps") for v, w in enumerate(weights))
    return _safe_div(num_ss, base), _safe_div(num_gps, base)


def overall_gains_heavy(profile: LoadProfile) -> tuple[float, float]:
    """Heavy-load overall gains; both are >= 1 up to the finite-load idle terms."""
    num_ss = num_gps = den = 0.0
    for v, s in enumerate(profile.shares):
        rt = profile.require_relative_load(v)
        num_ss += s * float(rt @ rt)
        num_gps += s * float(rt @ ((1.0 - profile.idle_share[v]) * rt))
        den += s * float(profile.g_tilde @ rt)
    return _safe_div(num_ss, den), _safe_div(num_gps, den)


@dataclass(frozen=True)
class BtdReport:
    """Everything the analytics can say about one profile, per slice/scheme."""

    mean: dict            # (slice, scheme) -> mean BTD
    normalized: dict      # (slice, scheme) -> normalized BTD
    gains_ss: np.ndarray
    gains_gps: np.ndarray
    limits: tuple[GainLimits, ...]
    overall_ss: float
    overall_gps: float
    overall_ss_heavy: float
    overall_gps_heavy: float


def btd_report(profile: LoadProfile) -> BtdReport:
    v_count = profile.model.num_slices
    mean = {}
    normalized_vals = {}
    for v in range(v_count):
        for scheme in ("scpf", "ss", "gps"):
            mean[v, scheme] = mean_btd(profile, v, scheme)
            normalized_vals[v, scheme] = normalized_btd(profile, v, scheme)
    g_ss, g_gps = overall_gains(profile)
    g_ss_h, g_gps_h = overall_gains_heavy(profile)
    return BtdReport(
        mean=mean,
        normalized=normalized_vals,
        gains_ss=np.array([gain_ss(profile, v) for v in range(v_count)]),
        gains_gps=np.array([gain_gps(profile, v) for v in range(v_count)]),
        limits=tuple(gain_limits(profile, v) for v in range(v_count)),
        overall_ss=g_ss,
        overall_gps=g_gps,
        overall_ss_heavy=g_ss_h,
        overall_gps_heavy=g_gps_h,
    )
