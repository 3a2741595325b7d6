"""Dense two-phase simplex with Bland's rule.

Solves   min c.x   s.t.  G x >= h,  A x = b,  x >= 0.

Desk-scale problems only (tens of variables, a few hundred rows); a full
tableau with Bland's anti-cycling rule is exact enough at tolerance 1e-9
and keeps the package dependency-free. Duals for the inequality rows are
recovered from the artificial columns, which is what turns a solved norm
LP into an admissible certificate tuple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None
    dual_ineq: np.ndarray | None = None
    dual_eq: np.ndarray | None = None
    iterations: int = 0


class _Tableau:
    def __init__(self, M, rhs, nv, tol):
        m = M.shape[0]
        self.nv = nv
        self.m = m
        self.tol = tol
        self.T = np.hstack([M, np.eye(m), rhs[:, None]])
        self.basis = [nv + i for i in range(m)]
        self.iterations = 0

    def art_col(self, i):
        return self.nv + i

    def reduced_costs(self, c_full):
        cb = c_full[self.basis]
        z = c_full - cb @ self.T[:, :-1]
        value = float(cb @ self.T[:, -1])
        return z, value

    def pivot(self, row, col):
        T = self.T
        T[row] = T[row] / T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        self.basis[row] = col

    def run(self, c_full, allowed_stop, max_iter):
        """Dantzig pivoting with Bland's rule engaged during stalls.

        Dantzig picks the most negative reduced cost; on a degenerate stall
        (no objective progress for a stretch) Bland's smallest-index rule
        takes over, which guarantees escape and termination.
        """
        tol = self.tol
        stall = 0
        last_value = None
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            z, value = self.reduced_costs(c_full)
            if last_value is None or value < last_value - tol * max(1.0, abs(value)):
                last_value = value
                stall = 0
            else:
                stall += 1
            z_view = z[:allowed_stop].copy()
            z_view[[b for b in self.basis if b < allowed_stop]] = 0.0
            if stall > 40:
                eligible = np.where(z_view < -tol)[0]
                entering = int(eligible[0]) if eligible.size else -1
            else:
                entering = int(np.argmin(z_view))
                if z_view[entering] >= -tol:
                    entering = -1
            if entering < 0:
                return "optimal"
            col = self.T[:, entering]
            rows = np.where(col > tol)[0]
            if rows.size == 0:
                return "unbounded"
            ratios = self.T[rows, -1] / col[rows]
            best = ratios.min()
            # smallest basic index among minimal ratios (Bland-compatible)
            candidates = rows[ratios <= best + tol * max(1.0, abs(best))]
            leaving = min(candidates, key=lambda i: self.basis[i])
            self.pivot(int(leaving), entering)
            self.iterations += 1


def solve_lp(c, G=None, h=None, A=None, b=None, tol=DEFAULT_TOL,
             max_iter=50000) -> LPResult:
    """min c.x subject to G x >= h, A x = b, x >= 0."""
    c = np.asarray(c, dtype=float).reshape(-1)
    n = c.shape[0]
    G = np.zeros((0, n)) if G is None else np.atleast_2d(np.asarray(G, dtype=float))
    h = np.zeros(0) if h is None else np.asarray(h, dtype=float).reshape(-1)
    A = np.zeros((0, n)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
    b = np.zeros(0) if b is None else np.asarray(b, dtype=float).reshape(-1)
    mg, me = G.shape[0], A.shape[0]
    if G.shape != (mg, n) or h.shape != (mg,) or A.shape != (me, n) or b.shape != (me,):
        raise ValueError("inconsistent LP shapes")

    nv = n + mg  # structural variables plus surplus for the >= rows
    M = np.zeros((mg + me, nv))
    M[:mg, :n] = G
    M[:mg, n:] = -np.eye(mg)
    M[mg:, :n] = A
    rhs = np.concatenate([h, b])

    flips = np.ones(mg + me)
    neg = rhs < 0
    flips[neg] = -1.0
    M[neg] *= -1.0
    rhs = rhs * flips

    tab = _Tableau(M, rhs, nv, tol)
    m = tab.m

    # Phase 1: drive artificials to zero.
    c1 = np.zeros(nv + m)
    c1[nv:] = 1.0
    status = tab.run(c1, allowed_stop=nv, max_iter=max_iter)
    _, feas = tab.reduced_costs(c1)
    if feas > 1e-7:
        return LPResult(status="infeasible", iterations=tab.iterations)

    # Pivot surviving artificials out of the basis; drop redundant rows.
    keep = []
    dropped = set()
    for i in range(m):
        if tab.basis[i] >= nv:
            pivot_col = -1
            for j in range(nv):
                if j not in tab.basis and abs(tab.T[i, j]) > tol:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                tab.pivot(i, pivot_col)
            else:
                dropped.add(i)
    if dropped:
        keep = [i for i in range(m) if i not in dropped]
        tab.T = tab.T[keep]
        tab.basis = [tab.basis[i] for i in keep]
        tab.m = len(keep)
    else:
        keep = list(range(m))

    # Phase 2.
    c2 = np.zeros(nv + m)
    c2[:n] = c
    status = tab.run(c2, allowed_stop=nv, max_iter=max_iter)
    if status == "unbounded":
        return LPResult(status="unbounded", iterations=tab.iterations)

    z, value = tab.reduced_costs(c2)
    x_full = np.zeros(nv)
    for i, col in enumerate(tab.basis):
        if col < nv:
            x_full[col] = tab.T[i, -1]

    # Duals from the artificial columns: z[art_i] = -y_i on surviving rows.
    y = np.zeros(m)
    for local, orig in enumerate(keep):
        y[orig] = -z[tab.art_col(orig)]
    y *= flips
    dual_ineq = np.maximum(y[:mg], 0.0) if mg else np.zeros(0)
    dual_eq = y[mg:]

    return LPResult(
        status="optimal",
        x=x_full[:n],
        value=value,
        dual_ineq=dual_ineq,
        dual_eq=dual_eq,
        iterations=tab.iterations,
    )
