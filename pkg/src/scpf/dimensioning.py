"""Share dimensioning: can a share vector meet every slice's mean-BTD target?

In the high-load regime the mean BTD grows linearly in the slice's carried
load, which turns each slice's BTD target into a linear constraint coupling
all shares. Stacking those constraints gives a coupling matrix H (diagonal 1,
off-diagonal nonpositive); a share vector s on the simplex is admissible iff
H s >= 0. The robust choice maximizes the minimum row slack, a small LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lp
from .errors import InfeasibleTarget, SliceOverloaded
from .netmodel import LoadProfile, weighted_inner


def max_admissible_load(target: float, rho_tilde, delta) -> float:
    """Largest carried load for which the high-load mean BTD stays below the
    target, with the relative load distribution held fixed:
    (d - <rho_tilde, delta>) / |rho_tilde|^2_Delta.

    <rho_tilde, delta> is the best case mean BTD (the whole network to
    oneself), so targets at or below it are infeasible outright.
    """
    rho_tilde = np.asarray(rho_tilde, float)
    delta = np.asarray(delta, float)
    floor = weighted_inner(rho_tilde, delta)
    if target <= floor:
        raise InfeasibleTarget(
            f"target {target:.6g} <= best-case mean BTD {floor:.6g}"
        )
    return (target - floor) / weighted_inner(rho_tilde, rho_tilde, delta)


@dataclass(frozen=True)
class CouplingMatrix:
    """H[u, v]: effect of slice v's share on slice u's BTD feasibility."""

    h: np.ndarray
    loads: np.ndarray       # carried loads rho^v used to build H
    limits: np.ndarray      # per-slice admissible-load limits l_v

    @property
    def num_slices(self) -> int:
        return self.h.shape[0]


def coupling_matrix(profile: LoadProfile, targets=None) -> CouplingMatrix:
    """Build H from a solved profile and per-slice BTD targets.

    Diagonal entries are 1 (a unit of own share is a unit of benefit);
    entry (u, v), v != u, is the sensitivity of slice u's feasibility to
    slice v's share: -(1 + rho_u)/(l_u - rho_u) scaled by the overlap of the
    two relative loads in slice u's capacity-weighted inner product.
    Orthogonal load pairs therefore decouple exactly.
    """
    model = profile.model
    v_count = model.num_slices
    if targets is None:
        targets = [sl.btd_target for sl in model.slices]
    targets = np.asarray(targets, float)
    if targets.shape != (v_count,) or np.any(~np.isfinite(targets)):
        raise ValueError("one finite BTD target per slice required")

    limits = np.empty(v_count)
    for u in range(v_count):
        limits[u] = max_admissible_load(
            targets[u], profile.require_relative_load(u), profile.delta(u)
        )
        if profile.rho_tot[u] >= limits[u]:
            raise SliceOverloaded(u, profile.rho_tot[u], limits[u])

    h = np.eye(v_count)
    for u in range(v_count):
        rt_u = profile.rho_tilde[u]
        delta_u = profile.delta(u)
        norm2 = weighted_inner(rt_u, rt_u, delta_u)
        sens = (1.0 + profile.rho_tot[u]) / (limits[u] - profile.rho_tot[u])
        for v in range(v_count):
            if v != u:
                overlap = weighted_inner(rt_u, profile.rho_tilde[v], delta_u)
                h[u, v] = -sens * overlap / norm2
    return CouplingMatrix(h=h, loads=profile.rho_tot.copy(), limits=limits)


@dataclass(frozen=True)
class ShareAllocation:
    shares: np.ndarray
    objective: float        # optimal min row slack t*
    status: str             # admissible | boundary | inadmissible

    @property
    def admissible(self) -> bool:
        return self.status == "admissible"


_BOUNDARY_TOL = 1e-10


def solve_maxmin_shares(coupling: CouplingMatrix | np.ndarray) -> ShareAllocation:
    """Maximize the minimum row slack of H s over the simplex (LP).

    A positive optimum certifies admissibility; the maximizer is the robust
    share split (largest margin against load perturbations). Optima within
    1e-10 of zero are reported as 'boundary' rather than either verdict.
    """
    h = coupling.h if isinstance(coupling, CouplingMatrix) else np.asarray(coupling, float)
    shares, t_star = lp.maxmin_weighted_rows(h)
    if t_star > _BOUNDARY_TOL:
        status = "admissible"
    elif t_star < -_BOUNDARY_TOL:
        status = "inadmissible"
    else:
        status = "boundary"
    return ShareAllocation(shares=shares, objective=t_star, status=status)


@dataclass(frozen=True)
class ShareCheck:
    """Per-slice feasibility diagnostics for a candidate share vector."""

    slacks: np.ndarray          # s_v minus the coupling requirement; >= 0 is ok
    asymptotic_btd: np.ndarray  # leading-order mean BTD at these shares
    exact_btd: np.ndarray       # full mean BTD at these shares
    targets: np.ndarray

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.slacks >= -1e-9))


def verify_shares(shares, profile: LoadProfile, targets=None) -> ShareCheck:
    """Check a share vector against each slice's coupling constraint.

    Also reports the mean BTD each slice would see at these shares, both the
    high-load leading term used by the dimensioning rule and the full
    expression, since the rule's dropped terms are only O(1).
    """
    coupling = coupling_matrix(profile, targets)
    shares = np.asarray(shares, float)
    if abs(shares.sum() - 1.0) > 1e-9 or np.any(shares < 0):
        raise ValueError("shares must be a simplex vector")
    slacks = coupling.h @ shares

    model = profile.model
    if targets is None:
        targets = [sl.btd_target for sl in model.slices]
    targets = np.asarray(targets, float)
    rt = profile.rho_tilde
    act = -np.expm1(-profile.rho_tot)
    g_tilde = shares @ rt
    g_act = (shares * act) @ rt
    asym = np.empty(model.num_slices)
    exact = np.empty(model.num_slices)
    for v in range(model.num_slices):
        delta = profile.delta(v)
        rho = profile.rho_tot[v]
        asym[v] = rho / shares[v] * weighted_inner(rt[v], g_tilde, delta)
        per_b = delta * (
            1.0 - rt[v]
            + (rho + 1.0) * (g_act / shares[v] + math.exp(-rho) * rt[v])
        )
        exact[v] = float(rt[v] @ per_b)
    return ShareCheck(slacks=slacks, asymptotic_btd=asym, exact_btd=exact, targets=targets)
