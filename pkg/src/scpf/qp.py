"""Convex quadratic programming on small polytopes.

A primal active-set solver for

    minimize 1/2 x' G x + c' x   s.t.   A_eq x = b_eq,  A_in x >= b_in

with G positive definite, plus the polytope projections built on it. Problem
sizes here are tiny (tens of variables), so dense SVD-based nullspace steps
are exact enough and there is nothing to tune.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .errors import EmptyPolytope, SolverStall


@dataclass(frozen=True)
class Polytope:
    """{x : a_eq x = b_eq, a_in x >= b_in}."""

    a_eq: np.ndarray
    b_eq: np.ndarray
    a_in: np.ndarray
    b_in: np.ndarray

    def __post_init__(self):
        a_eq = np.atleast_2d(np.asarray(self.a_eq, float))
        a_in = np.atleast_2d(np.asarray(self.a_in, float))
        n = a_eq.shape[1] if a_eq.size else a_in.shape[1]
        object.__setattr__(self, "a_eq", a_eq.reshape(-1, n))
        object.__setattr__(self, "b_eq", np.asarray(self.b_eq, float).ravel())
        object.__setattr__(self, "a_in", a_in.reshape(-1, n))
        object.__setattr__(self, "b_in", np.asarray(self.b_in, float).ravel())

    @property
    def dim(self) -> int:
        return self.a_eq.shape[1]

    def contains(self, x, tol=1e-9) -> bool:
        x = np.asarray(x, float)
        ok_eq = np.all(np.abs(self.a_eq @ x - self.b_eq) <= tol) if self.a_eq.size else True
        ok_in = np.all(self.a_in @ x >= self.b_in - tol) if self.a_in.size else True
        return bool(ok_eq and ok_in)

    def feasible_point(self) -> np.ndarray:
        """Max-slack interior-ish point via one LP; raises EmptyPolytope."""
        n = self.dim
        m = self.a_in.shape[0]
        # variables (x, t): maximize t, a_in x - t >= b_in, t <= 1
        c = np.zeros(n + 1)
        c[n] = -1.0
        a_eq = np.hstack([self.a_eq, np.zeros((self.a_eq.shape[0], 1))])
        a_in = np.hstack([self.a_in, -np.ones((m, 1))])
        cap = np.zeros((1, n + 1))
        cap[0, n] = -1.0
        a_in_full = np.vstack([a_in, cap])
        b_in_full = np.concatenate([self.b_in, [-1.0]])
        try:
            z, _ = lp.min_linear_on_polytope(c, a_eq, self.b_eq, a_in_full, b_in_full)
        except lp.Infeasible as exc:
            raise EmptyPolytope(str(exc)) from exc
        if z[n] < -1e-9:
            raise EmptyPolytope(f"max inequality slack {z[n]:.3g} < 0")
        return z[:n]


def simplex_polytope(dim: int, extra_a=None, extra_b=None) -> Polytope:
    """Probability simplex, optionally intersected with extra rows a x >= b."""
    a_in = np.eye(dim)
    b_in = np.zeros(dim)
    if extra_a is not None:
        a_in = np.vstack([a_in, np.asarray(extra_a, float)])
        b_in = np.concatenate([b_in, np.asarray(extra_b, float)])
    return Polytope(np.ones((1, dim)), np.array([1.0]), a_in, b_in)


def solve_qp(g, c, poly: Polytope, x0=None, tol=1e-11, max_iter=None):
    """Primal active-set method. Returns (x, eq_multipliers, in_multipliers).

    Multipliers satisfy  G x + c = A_eq' nu + A_in' mu  with mu >= 0 and
    mu_i = 0 off the active set, so callers can report KKT residuals.
    """
    g = np.asarray(g, float)
    c = np.asarray(c, float)
    n = c.shape[0]
    a_eq, b_eq, a_in, b_in = poly.a_eq, poly.b_eq, poly.a_in, poly.b_in
    m_in = a_in.shape[0]
    if x0 is None:
        x = poly.feasible_point()
    else:
        x = np.asarray(x0, float).copy()
        if not poly.contains(x, tol=1e-7):
            x = poly.feasible_point()
    if max_iter is None:
        max_iter = 100 * (n + m_in + 1)

    slack = a_in @ x - b_in if m_in else np.zeros(0)
    working = set(np.nonzero(slack <= 1e-9 * (1.0 + np.abs(b_in)))[0].tolist())

    mu_full = np.zeros(m_in)
    nu = np.zeros(a_eq.shape[0])
    for _ in range(max_iter):
        rows = [a_eq] if a_eq.size else []
        w_sorted = sorted(working)
        if w_sorted:
            rows.append(a_in[w_sorted])
        a_w = np.vstack(rows) if rows else np.zeros((0, n))
        grad = g @ x + c

        # nullspace step
        if a_w.shape[0]:
            _, sv, vt = np.linalg.svd(a_w)
            rank = int((sv > 1e-12 * max(sv[0], 1.0)).sum()) if sv.size else 0
            z = vt[rank:].T
        else:
            z = np.eye(n)
        if z.shape[1]:
            h = z.T @ g @ z
            rhs = -(z.T @ grad)
            try:
                pz = np.linalg.solve(h, rhs)
            except np.linalg.LinAlgError:
                pz = np.linalg.lstsq(h, rhs, rcond=None)[0]
            p = z @ pz
        else:
            p = np.zeros(n)

        if np.linalg.norm(p) <= tol * (1.0 + np.linalg.norm(x)):
            # multipliers for the working constraints
            if a_w.shape[0]:
                lam = np.linalg.lstsq(a_w.T, grad, rcond=None)[0]
            else:
                lam = np.zeros(0)
            n_eq = a_eq.shape[0]
            nu = lam[:n_eq]
            mu = lam[n_eq:]
            mu_full = np.zeros(m_in)
            for k, i in enumerate(w_sorted):
                mu_full[i] = mu[k]
            negative = [i for k, i in enumerate(w_sorted) if mu[k] < -1e-9]
            if not negative:
                return x, nu, mu_full
            working.remove(min(negative, key=lambda i: (mu_full[i], i)))
            continue

        # ratio test against non-working rows
        alpha = 1.0
        blocker = -1
        if m_in:
            ap = a_in @ p
            for i in range(m_in):
                if i in working or ap[i] >= -1e-13:
                    continue
                step = (b_in[i] - (a_in[i] @ x)) / ap[i]
                if step < alpha - 1e-13:
                    alpha = max(step, 0.0)
                    blocker = i
        x = x + alpha * p
        if blocker >= 0:
            working.add(blocker)
    raise SolverStall("active-set QP exceeded its iteration budget")


def project(z, poly: Polytope, x0=None) -> np.ndarray:
    """Euclidean projection of z onto the polytope."""
    z = np.asarray(z, float)
    x, _, _ = solve_qp(np.eye(z.shape[0]), -z, poly, x0=x0)
    return x


def project_simplex(z) -> np.ndarray:
    """Projection onto the probability simplex (sort-based, exact)."""
    z = np.asarray(z, float)
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, z.size + 1)
    cond = u - css / idx > 0
    k = idx[cond][-1]
    tau = css[k - 1] / k
    return np.maximum(z - tau, 0.0)
