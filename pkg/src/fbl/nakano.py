"""Directed families over l1^n: suprema, maximality diagnostics, least upper bounds.

Over l1^n every nonnegative function of finite norm is dominated by a
weighted coordinate form of equal total weight; minimizing that weight over
pointwise domination constraints turns the least-upper-bound statement for
directed families into a finite LP. The value it returns matches the
supremum of the member norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FBLError, SpaceMismatch
from .hfunc import GPhi, HFunc, as_hfunc, pointwise_max, MaxOf
from .norm import minimal_dominating_phi, search_lower, sup_norm
from .spaces import Space, sample_dual_sphere


def g_phi_eval(phi, xstar) -> float:
    """|sum_a phi_a |x*_a||."""
    phi = np.asarray(phi, dtype=float).reshape(-1)
    x = np.asarray(xstar, dtype=float).reshape(-1)
    if phi.shape != x.shape:
        raise FBLError(f"length mismatch: {phi.shape[0]} vs {x.shape[0]}")
    return float(abs(np.dot(phi, np.abs(x))))


def g_phi_norm(phi, verify: bool = False, seed: int = 0, tol: float = 1e-6) -> float:
    """sum_a |phi_a|: the supremum of |phi(x*)| over the dual unit cube.

    With ``verify`` the identity is cross-checked against a certificate
    search (the full axis tuple attains the value exactly).
    """
    phi = np.asarray(phi, dtype=float).reshape(-1)
    value = float(np.abs(phi).sum())
    if verify:
        space = Space(phi.shape[0], 1)
        est = search_lower(GPhi(space, phi), space, m_max=phi.shape[0],
                           restarts=2, seed=seed)
        if abs(est.lower - value) > tol:
            raise FBLError(
                f"coordinate-form norm {value} and search {est.lower} disagree"
            )
    return value


class DirectedFamily:
    """Finite family of nonnegative functions closed under pairwise max.

    Closure is computed on insertion: whenever the pointwise max of two
    members does not coincide with an existing member on the sample set,
    the max is inserted as a new member.
    """

    def __init__(self, members=(), space: Space = None, samples: int = 100,
                 seed: int = 0, max_members: int = 64, match_tol: float = 1e-9):
        self.space = space
        self.samples = samples
        self.seed = seed
        self.max_members = max_members
        self.match_tol = match_tol
        self._sample_points = None
        self.members: list[HFunc] = []
        for m in members:
            self.insert(m)

    def _points(self):
        if self._sample_points is None:
            rng = np.random.default_rng(self.seed)
            self._sample_points = sample_dual_sphere(self.space, self.samples, rng)
        return self._sample_points

    def _matches(self, values) -> bool:
        for member in self.members:
            existing = member.eval_many(self._points())
            if np.abs(existing - values).max() <= self.match_tol:
                return True
        return False

    def insert(self, f):
        f = as_hfunc(f, self.space)
        if self.space is None:
            self.space = f.space
        elif f.space != self.space:
            raise SpaceMismatch("family members live over different spaces")
        values = f.eval_many(self._points())
        if self._matches(values):
            return
        self.members.append(f)
        # close under pairwise max against everything already present
        queue = [(f, g) for g in self.members[:-1]]
        while queue:
            a, b = queue.pop(0)
            if len(self.members) > self.max_members:
                raise FBLError(
                    f"join closure exceeded {self.max_members} members"
                )
            joined = pointwise_max(a, b)
            jvals = joined.eval_many(self._points())
            if not self._matches(jvals):
                self.members.append(joined)
                queue.extend((joined, g) for g in self.members[:-1])

    def __len__(self):
        return len(self.members)


def directed_sup(family: DirectedFamily) -> HFunc:
    """The pointwise maximum of the members (attained: the family is finite)."""
    if not family.members:
        raise ValueError("empty family has no supremum")
    if len(family.members) == 1:
        return family.members[0]
    return MaxOf(family.members)


@dataclass
class DirectedSupReport:
    sup_lower: float
    member_lowers: list
    equal_within: float
    ok: bool


def directed_sup_report(family: DirectedFamily, seed: int = 0, m_max: int = None,
                        restarts: int = 4, tol: float = 2e-6) -> DirectedSupReport:
    """Check that the norm of the supremum equals the largest member norm."""
    sup_fn = directed_sup(family)
    m_max = m_max or min(family.space.dim, 6)
    sup_est = search_lower(sup_fn, family.space, m_max=m_max, restarts=restarts,
                           seed=seed)
    members = [
        search_lower(f, family.space, m_max=m_max, restarts=restarts, seed=seed)
        for f in family.members
    ]
    best = max(e.lower for e in members)
    gap = abs(sup_est.lower - best)
    return DirectedSupReport(
        sup_lower=sup_est.lower,
        member_lowers=[e.lower for e in members],
        equal_within=gap,
        ok=gap <= tol,
    )


@dataclass
class MaximalityReport:
    monotone: bool
    superadditive: bool
    flat_norm: bool

    def all_pass(self) -> bool:
        return self.monotone and self.superadditive and self.flat_norm

    def to_json(self) -> dict:
        return {
            "monotone": self.monotone,
            "superadditive": self.superadditive,
            "flat_norm": self.flat_norm,
        }


def maximality_check(f, space: Space = None, samples: int = 200, seed: int = 0,
                     tol: float = 1e-9, norm_gap_tol: float = 1e-4,
                     search_kwargs=None) -> MaximalityReport:
    """Necessary conditions for maximal nonnegative functions over l1^n.

    (i) monotonicity in |x*|; (ii) superadditivity on nonnegative
    functionals; (iii) the free norm collapses to the sup norm. All three
    are necessary, not sufficient; the report never decides maximality.
    """
    f = as_hfunc(f, space)
    space = f.space
    if space.p != 1:
        raise FBLError("the maximality diagnostics are specific to p = 1")
    rng = np.random.default_rng(seed)
    n = space.dim

    big = rng.uniform(-1.0, 1.0, size=(samples, n))
    shrink = rng.uniform(0.0, 1.0, size=(samples, n))
    flips = rng.choice([-1.0, 1.0], size=(samples, n))
    small = big * shrink * flips
    monotone = bool(
        (f.eval_many(small) <= f.eval_many(np.abs(big)) + tol).all()
    )

    superadditive = True
    for _ in range(samples // 4):
        kcount = int(rng.integers(2, 5))
        parts = rng.uniform(0.0, 1.0, size=(kcount, n))
        total = parts.sum(axis=0)
        if f.eval_many(parts).sum() > f(total) + tol:
            superadditive = False
            break

    kwargs = {"m_max": min(n, 6), "restarts": 4, "seed": seed}
    if search_kwargs:
        kwargs.update(search_kwargs)
    est = search_lower(f, space, **kwargs)
    flat = sup_norm(f, space, samples=2048, seed=seed)
    flat_norm = bool(abs(est.lower - flat) <= norm_gap_tol)

    return MaximalityReport(monotone, superadditive, flat_norm)


@dataclass
class NakanoBound:
    phi: np.ndarray
    value: float
    member_values: list
    gap: float
    max_violation: float

    def to_json(self) -> dict:
        return {
            "phi": self.phi.tolist(),
            "value": self.value,
            "member_values": self.member_values,
            "gap": self.gap,
            "max_violation": self.max_violation,
        }


def strong_nakano_bound(family: DirectedFamily, grid: int = 128, tol: float = 1e-6,
                        seed: int = 0, value_tol: float = 1e-4) -> NakanoBound:
    """Least-total-weight coordinate form dominating the family supremum.

    Returns (phi, value) with g_phi >= sup pointwise up to tol and value
    equal to the largest member norm within ``value_tol`` -- the least
    upper bound realizes the supremum of the norms.
    """
    space = family.space
    if space is None or space.p != 1:
        raise FBLError("the least-upper-bound construction is specific to p = 1")
    pts = sample_dual_sphere(space, 512, np.random.default_rng(seed + 1))
    for member in family.members:
        vals = member.eval_many(pts)
        if vals.min() < -1e-9:
            raise FBLError("family contains a function negative somewhere")

    sup_fn = directed_sup(family)
    phi, value, _, _, _, violation = minimal_dominating_phi(
        sup_fn, space, grid=grid, tol=tol, seed=seed
    )
    member_values = []
    for member in family.members:
        mval = minimal_dominating_phi(member, space, grid=grid, tol=tol, seed=seed)[1]
        member_values.append(float(mval))
    gap = abs(value - max(member_values))
    if gap > value_tol:
        raise FBLError(
            f"least upper bound {value} misses the member-norm supremum "
            f"{max(member_values)} by {gap}"
        )
    return NakanoBound(
        phi=np.maximum(phi, 0.0),
        value=float(value),
        member_values=member_values,
        gap=float(gap),
        max_violation=float(violation),
    )
