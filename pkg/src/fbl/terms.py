"""Free-vector-lattice terms over generator vectors.

A term is an expression tree whose leaves are generators d(x) for vectors x
of one space; it evaluates on dual points as a positively homogeneous
function (generators evaluate to the pairing, joins and meets pointwise).
Every term rewrites to a canonical difference-of-joins of linear forms,
which is what operator extension consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RewriteBudgetExceeded, SpaceMismatch
from .spaces import Functional, Space, Vector

#: Maximum number of linear forms per side during rewriting.
DEFAULT_REWRITE_BUDGET = 4096


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Gen(Term):
    vector: Vector


@dataclass(frozen=True)
class Scale(Term):
    c: float
    t: Term

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))


@dataclass(frozen=True)
class Sum(Term):
    a: Term
    b: Term


@dataclass(frozen=True)
class Neg(Term):
    t: Term


@dataclass(frozen=True)
class Join(Term):
    a: Term
    b: Term


@dataclass(frozen=True)
class Meet(Term):
    a: Term
    b: Term


def gen(space: Space, coords) -> Term:
    return Gen(Vector(space, coords))


def zero_term(space: Space) -> Term:
    """The zero function, as the generator of the zero vector."""
    return Gen(Vector(space, np.zeros(space.dim)))


def abs_term(t: Term) -> Term:
    """|t| = t v (-t)."""
    return Join(t, Neg(t))


def pos_term(t: Term) -> Term:
    """t+ = t v 0."""
    return Join(t, zero_term(term_space(t)))


def is_abs(t: Term):
    """Return the inner term when t is structurally |s|, else None."""
    if isinstance(t, (Join,)):
        if isinstance(t.b, Neg) and t.b.t == t.a:
            return t.a
        if isinstance(t.a, Neg) and t.a.t == t.b:
            return t.b
    return None


def term_space(t: Term) -> Space:
    """The common space of all generators; raises on inconsistency."""
    space = None
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Gen):
            if space is None:
                space = node.vector.space
            elif node.vector.space != space:
                raise SpaceMismatch("term mixes generators over different spaces")
        elif isinstance(node, Scale):
            stack.append(node.t)
        elif isinstance(node, Neg):
            stack.append(node.t)
        elif isinstance(node, (Sum, Join, Meet)):
            stack.append(node.a)
            stack.append(node.b)
        else:
            raise TypeError(f"not a term node: {node!r}")
    return space


def generators(t: Term) -> list:
    """Generator vectors in first-appearance order, deduplicated."""
    seen = []
    stack = [t]
    while stack:
        node = stack.pop(0)
        if isinstance(node, Gen):
            if node.vector not in seen:
                seen.append(node.vector)
        elif isinstance(node, Scale) or isinstance(node, Neg):
            stack.insert(0, node.t)
        elif isinstance(node, (Sum, Join, Meet)):
            stack.insert(0, node.a)
            stack.insert(1, node.b)
    return seen


def depth(t: Term) -> int:
    if isinstance(t, Gen):
        return 0
    if isinstance(t, (Scale, Neg)):
        return 1 + depth(t.t)
    return 1 + max(depth(t.a), depth(t.b))


def eval_many(t: Term, points: np.ndarray) -> np.ndarray:
    """Evaluate the term at each dual point (row of ``points``)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(t, Gen):
        return points @ t.vector.coords
    if isinstance(t, Scale):
        return t.c * eval_many(t.t, points)
    if isinstance(t, Sum):
        return eval_many(t.a, points) + eval_many(t.b, points)
    if isinstance(t, Neg):
        return -eval_many(t.t, points)
    if isinstance(t, Join):
        return np.maximum(eval_many(t.a, points), eval_many(t.b, points))
    if isinstance(t, Meet):
        return np.minimum(eval_many(t.a, points), eval_many(t.b, points))
    raise TypeError(f"not a term node: {t!r}")


def eval_term(t: Term, f) -> float:
    """Evaluate the term at one functional of the dual space."""
    space = term_space(t)
    if isinstance(f, Functional):
        if space is not None and f.space != space:
            raise SpaceMismatch(
                f"functional over {f.space.tag()}, term over {space.tag()}"
            )
        row = f.coords
    else:
        row = np.asarray(f, dtype=float).reshape(-1)
        if space is not None and row.shape != (space.dim,):
            raise SpaceMismatch(
                f"functional has {row.shape[0]} coordinates, term over {space.tag()}"
            )
    return float(eval_many(t, row[None, :])[0])


def substitute(t: Term, matrix, codomain: Space) -> Term:
    """Replace every generator d(v) by d(Mv); the tree shape is preserved.

    This realizes the unique lattice homomorphism determined by the linear
    map on generators.
    """
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != codomain.dim:
        raise SpaceMismatch(
            f"matrix shape {mat.shape} does not map into {codomain.tag()}"
        )

    def rec(node):
        if isinstance(node, Gen):
            if node.vector.coords.shape[0] != mat.shape[1]:
                raise SpaceMismatch(
                    f"matrix shape {mat.shape} cannot act on generators of "
                    f"dimension {node.vector.coords.shape[0]}"
                )
            return Gen(Vector(codomain, mat @ node.vector.coords))
        if isinstance(node, Scale):
            return Scale(node.c, rec(node.t))
        if isinstance(node, Sum):
            return Sum(rec(node.a), rec(node.b))
        if isinstance(node, Neg):
            return Neg(rec(node.t))
        if isinstance(node, Join):
            return Join(rec(node.a), rec(node.b))
        if isinstance(node, Meet):
            return Meet(rec(node.a), rec(node.b))
        raise TypeError(f"not a term node: {node!r}")

    return rec(t)


@dataclass(frozen=True)
class LinearForm:
    """A linear combination of generators."""

    generators: tuple
    coeffs: tuple


class DiffOfJoins:
    """max of linear forms minus max of linear forms, over shared generators."""

    __slots__ = ("space", "generators", "pluses", "minuses")

    def __init__(self, space, gens, pluses, minuses):
        self.space = space
        self.generators = tuple(gens)
        self.pluses = np.atleast_2d(np.asarray(pluses, dtype=float))
        self.minuses = np.atleast_2d(np.asarray(minuses, dtype=float))

    @property
    def width(self):
        return max(self.pluses.shape[0], self.minuses.shape[0])

    def gen_matrix(self) -> np.ndarray:
        return np.vstack([g.coords for g in self.generators])

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        pairings = points @ self.gen_matrix().T  # (N, G)
        plus = (pairings @ self.pluses.T).max(axis=1)
        minus = (pairings @ self.minuses.T).max(axis=1)
        return plus - minus

    def eval(self, f) -> float:
        row = f.coords if isinstance(f, Functional) else np.asarray(f, dtype=float)
        return float(self.eval_many(row[None, :])[0])

    def linear_forms(self):
        plus = tuple(
            LinearForm(self.generators, tuple(row)) for row in self.pluses
        )
        minus = tuple(
            LinearForm(self.generators, tuple(row)) for row in self.minuses
        )
        return plus, minus


def _dedup_rows(mat: np.ndarray) -> np.ndarray:
    return np.unique(np.atleast_2d(mat), axis=0)


def _shift_normalize(plus: np.ndarray, minus: np.ndarray):
    """When one linear form remains on the minus side, fold it into the plus
    side: max(P) - mu = max(P - mu) - 0. Keeps |a| = a v (-a) - 0 canonical."""
    if minus.shape[0] == 1 and np.any(minus):
        return _dedup_rows(plus - minus[0]), np.zeros((1, minus.shape[1]))
    return plus, minus


def _cross_sum(a: np.ndarray, b: np.ndarray, budget: int) -> np.ndarray:
    out = (a[:, None, :] + b[None, :, :]).reshape(-1, a.shape[1])
    out = _dedup_rows(out)
    if out.shape[0] > budget:
        raise RewriteBudgetExceeded(
            f"join width {out.shape[0]} exceeds the rewrite budget {budget}",
            width=out.shape[0],
        )
    return out


def _merge_gens(gens_a, a_mats, gens_b, b_mats):
    """Re-express both coefficient matrix groups over the union generator list."""
    gens = list(gens_a)
    index = {g: i for i, g in enumerate(gens)}
    for g in gens_b:
        if g not in index:
            index[g] = len(gens)
            gens.append(g)
    G = len(gens)

    def lift(mats, source):
        cols = [index[g] for g in source]
        out = []
        for m in mats:
            wide = np.zeros((m.shape[0], G))
            wide[:, cols] = m
            out.append(wide)
        return out

    return gens, lift(a_mats, gens_a), lift(b_mats, gens_b)


def to_diff_of_joins(t: Term, budget: int = DEFAULT_REWRITE_BUDGET) -> DiffOfJoins:
    """Rewrite a term as (max of linear forms) - (max of linear forms).

    Evaluation is preserved exactly; join widths can explode, so a budget
    bounds the number of linear forms per side.
    """
    space = term_space(t)

    def rec(node):
        if isinstance(node, Gen):
            return [node.vector], np.array([[1.0]]), np.array([[0.0]])
        if isinstance(node, Scale):
            gens, plus, minus = rec(node.t)
            c = node.c
            if c >= 0:
                return gens, _dedup_rows(c * plus), _dedup_rows(c * minus)
            return gens, _dedup_rows(-c * minus), _dedup_rows(-c * plus)
        if isinstance(node, Neg):
            gens, plus, minus = rec(node.t)
            return gens, minus, plus
        if isinstance(node, Sum):
            ga, pa, ma = rec(node.a)
            gb, pb, mb = rec(node.b)
            gens, (pa, ma), (pb, mb) = _merge_gens(ga, (pa, ma), gb, (pb, mb))
            plus, minus = _shift_normalize(
                _cross_sum(pa, pb, budget), _cross_sum(ma, mb, budget)
            )
            return gens, plus, minus
        if isinstance(node, Join):
            ga, pa, ma = rec(node.a)
            gb, pb, mb = rec(node.b)
            gens, (pa, ma), (pb, mb) = _merge_gens(ga, (pa, ma), gb, (pb, mb))
            # max(P_a - M_a, P_b - M_b) = max(P_a + M_b, P_b + M_a) - (M_a + M_b)
            plus = _dedup_rows(
                np.vstack([_cross_sum(pa, mb, budget), _cross_sum(pb, ma, budget)])
            )
            if plus.shape[0] > budget:
                raise RewriteBudgetExceeded(
                    f"join width {plus.shape[0]} exceeds the rewrite budget {budget}",
                    width=plus.shape[0],
                )
            plus, minus = _shift_normalize(plus, _cross_sum(ma, mb, budget))
            return gens, plus, minus
        if isinstance(node, Meet):
            return rec(Neg(Join(Neg(node.a), Neg(node.b))))
        raise TypeError(f"not a term node: {node!r}")

    gens, plus, minus = rec(t)
    return DiffOfJoins(space, gens, plus, minus)
