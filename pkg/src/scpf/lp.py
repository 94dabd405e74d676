"""Small dense linear programming via two-phase simplex.

Problems here have at most a few dozen variables (one per slice plus
slacks), so a dense tableau with Bland's pivoting rule (which cannot cycle)
is simpler and more predictable than an external solver dependency.

Standard form solved: minimize c @ x subject to A x {<=,>=,=} b, x >= 0.
"""

from __future__ import annotations

import numpy as np

_TOL = 1e-9


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


def _pivot(t, basis, row, col):
    t[row] /= t[row, col]
    for k in range(t.shape[0]):
        if k != row and t[k, col] != 0.0:
            t[k] -= t[k, col] * t[row]
    basis[row] = col


def _iterate(t, basis, cost, banned=frozenset()):
    """Bland-rule simplex sweep on tableau t (rows m, last column = rhs).

    Rows whose basic variable is banned (artificials kept at zero) are
    pivoted out eagerly: any nonzero entering coefficient there gives a
    zero-ratio pivot, which keeps them from ever turning positive.
    """
    m, width = t.shape
    n_total = width - 1
    for _ in range(500 * (m + n_total)):
        reduced = cost.copy()
        for i in range(m):
            if cost[basis[i]] != 0.0:
                reduced -= cost[basis[i]] * t[i, :-1]
        entering = -1
        for j in range(n_total):
            if j in banned:
                continue
            if reduced[j] < -_TOL and j not in basis:
                entering = j
                break
        if entering < 0:
            return
        # ratio test; rows with banned basics at zero leave first
        best = None
        for i in range(m):
            coeff = t[i, entering]
            if basis[i] in banned and abs(coeff) > _TOL:
                candidate = (0.0, basis[i], i)
            elif coeff > _TOL:
                candidate = (t[i, -1] / coeff, basis[i], i)
            else:
                continue
            if best is None or candidate < best:
                best = candidate
        if best is None:
            raise Unbounded("no blocking constraint for entering column")
        _pivot(t, basis, best[2], entering)
    raise RuntimeError("simplex iteration cap hit")


def solve_lp(c, a, b, senses):
    """Two-phase simplex. Returns (x, objective).

    ``senses`` is a string per row among '<', '>', '=' (inclusive
    inequalities). Rows are normalized to b >= 0; slack and artificial
    columns are appended internally.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    senses = list(senses)
    m, n = a.shape
    if len(senses) != m or b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    if any(s not in "<>=" for s in senses):
        raise ValueError("senses must be one of '<', '>', '='")

    flip = {"<": ">", ">": "<", "=": "="}
    for i in range(m):
        if b[i] < 0:
            a[i] *= -1.0
            b[i] *= -1.0
            senses[i] = flip[senses[i]]

    slack_cols = []
    slack_owner = []
    for i, s in enumerate(senses):
        if s in "<>":
            col = np.zeros(m)
            col[i] = 1.0 if s == "<" else -1.0
            slack_cols.append(col)
            slack_owner.append(i)
    n_slack = len(slack_cols)
    slack = np.column_stack(slack_cols) if n_slack else np.zeros((m, 0))

    basis = [-1] * m
    for j, i in enumerate(slack_owner):
        if senses[i] == "<":
            basis[i] = n + j

    art_rows = [i for i in range(m) if basis[i] == -1]
    n_art = len(art_rows)
    art = np.zeros((m, n_art))
    for j, i in enumerate(art_rows):
        art[i, j] = 1.0
        basis[i] = n + n_slack + j

    t = np.hstack([a, slack, art, b.reshape(-1, 1)])
    n_total = n + n_slack + n_art
    artificials = frozenset(range(n + n_slack, n_total))

    cost1 = np.zeros(n_total)
    for j in artificials:
        cost1[j] = 1.0
    _iterate(t, basis, cost1)
    infeas = sum(t[i, -1] for i in range(m) if basis[i] in artificials)
    if infeas > 1e-7:
        raise Infeasible(f"phase 1 optimum {infeas:.3g} > 0")

    cost2 = np.concatenate([c, np.zeros(n_slack + n_art)])
    _iterate(t, basis, cost2, banned=artificials)
    x = np.zeros(n_total)
    for i, bi in enumerate(basis):
        x[bi] = t[i, -1]
    x = x[:n]
    return x, float(c @ x)


def maxmin_weighted_rows(h) -> tuple[np.ndarray, float]:
    """max over the simplex of min_i (H s)_i.

    Variables: s (>= 0, sums to 1) and the free level t split into t+ - t-.
    Returns the maximizing s and the optimum t*.
    """
    h = np.asarray(h, dtype=float)
    rows, v = h.shape
    # -(H s) + t+ - t- <= 0 per row; sum s = 1
    a = np.zeros((rows + 1, v + 2))
    a[:rows, :v] = -h
    a[:rows, v] = 1.0
    a[:rows, v + 1] = -1.0
    a[rows, :v] = 1.0
    b = np.zeros(rows + 1)
    b[rows] = 1.0
    senses = ["<"] * rows + ["="]
    c = np.zeros(v + 2)
    c[v] = -1.0
    c[v + 1] = 1.0
    x, obj = solve_lp(c, a, b, senses)
    return x[:v], -obj


def min_linear_on_polytope(c, a_eq, b_eq, a_in, b_in) -> tuple[np.ndarray, float]:
    """minimize c @ x subject to a_eq x = b_eq, a_in x >= b_in, x free.

    Free variables are split x = u - w internally. Used for feasible-point
    searches on small polytopes.
    """
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    a_eq = np.asarray(a_eq, dtype=float).reshape(-1, n)
    a_in = np.asarray(a_in, dtype=float).reshape(-1, n)
    a = np.vstack([a_eq, a_in])
    b = np.concatenate([np.asarray(b_eq, dtype=float), np.asarray(b_in, dtype=float)])
    senses = ["="] * a_eq.shape[0] + [">"] * a_in.shape[0]
    split = np.hstack([a, -a])
    x, obj = solve_lp(np.concatenate([c, -c]), split, b, senses)
    return x[:n] - x[n:], obj
