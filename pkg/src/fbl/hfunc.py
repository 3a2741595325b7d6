"""Positively homogeneous functions on the dual of a space.

These are the objects whose free-lattice norm the package estimates: either
term-backed (an expression tree evaluated pointwise) or closed forms that
show up repeatedly in the constructions (weighted coordinate forms g_phi,
measure averages f_mu, harmonic-weight suprema, dyadic block sums).
"""

from __future__ import annotations

import numpy as np

from .errors import SpaceMismatch
from .spaces import Functional, Space
from . import terms as _terms


class HFunc:
    """Base: a positively homogeneous function on E*, vectorized over rows."""

    space: Space

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, f) -> float:
        if isinstance(f, Functional):
            if f.space != self.space:
                raise SpaceMismatch(
                    f"functional over {f.space.tag()}, function over "
                    f"{self.space.tag()}"
                )
            row = f.coords
        else:
            row = np.asarray(f, dtype=float).reshape(-1)
            if row.shape != (self.space.dim,):
                raise SpaceMismatch(
                    f"functional has {row.shape[0]} coordinates, function over "
                    f"{self.space.tag()}"
                )
        return float(self.eval_many(row[None, :])[0])

    def seed_vectors(self):
        """Vectors of E whose norming functionals make good search starts."""
        return []

    def describe(self) -> dict:
        raise NotImplementedError


class TermFunc(HFunc):
    """A term evaluated pointwise on the dual."""

    __slots__ = ("space", "term")

    def __init__(self, term, space: Space = None):
        inferred = _terms.term_space(term)
        if space is None:
            space = inferred
        elif inferred is not None and inferred != space:
            raise SpaceMismatch("term space disagrees with the declared space")
        self.space = space
        self.term = term

    def eval_many(self, points):
        return _terms.eval_many(self.term, points)

    def seed_vectors(self):
        return [g.coords for g in _terms.generators(self.term)]

    def describe(self):
        from .grammar import print_term

        return {"kind": "term", "expr": print_term(self.term)}

    def __repr__(self):
        return f"TermFunc({self.term!r})"


class GPhi(HFunc):
    """x* -> |sum_a phi_a |x*_a||, the weighted coordinate form."""

    __slots__ = ("space", "phi")

    def __init__(self, space: Space, phi):
        phi = np.asarray(phi, dtype=float).reshape(-1)
        if phi.shape != (space.dim,):
            raise SpaceMismatch(
                f"phi has {phi.shape[0]} entries, space {space.tag()} needs "
                f"{space.dim}"
            )
        self.space = space
        self.phi = phi

    def eval_many(self, points):
        points = np.atleast_2d(points)
        return np.abs(np.abs(points) @ self.phi)

    def seed_vectors(self):
        return [row for row in np.eye(self.space.dim)]

    def describe(self):
        return {"kind": "gphi", "phi": self.phi.tolist()}


class FMu(HFunc):
    """x* -> sum_i w_i |x*(atom_i)|, the average of |x*| over a discrete measure."""

    __slots__ = ("space", "atoms", "weights")

    def __init__(self, space: Space, atoms, weights):
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if atoms.shape != (weights.shape[0], space.dim):
            raise SpaceMismatch("atom matrix and weights have inconsistent shapes")
        self.space = space
        self.atoms = atoms
        self.weights = weights

    def eval_many(self, points):
        points = np.atleast_2d(points)
        return np.abs(points @ self.atoms.T) @ self.weights

    def seed_vectors(self):
        return [row for row in self.atoms]

    def describe(self):
        return {
            "kind": "fmu",
            "atoms": self.atoms.tolist(),
            "weights": self.weights.tolist(),
        }


class Harmonic(HFunc):
    """x* -> max_a |x*_a| / a over l1^N; its norm certificates sum 1/k."""

    __slots__ = ("space", "inv_weights")

    def __init__(self, N: int):
        if N < 1:
            raise ValueError("need N >= 1")
        self.space = Space(N, 1)
        self.inv_weights = 1.0 / np.arange(1, N + 1)

    def eval_many(self, points):
        points = np.atleast_2d(points)
        return (np.abs(points) * self.inv_weights).max(axis=1)

    def seed_vectors(self):
        return [row for row in np.eye(self.space.dim)]

    def describe(self):
        return {"kind": "harmonic", "N": self.space.dim}


class MinSup(HFunc):
    """x* -> min(|x*_1|, max_{a>=2} |x*_a| / a) over l1^D."""

    __slots__ = ("space", "inv_weights")

    def __init__(self, D: int):
        if D < 2:
            raise ValueError("need dimension >= 2")
        self.space = Space(D, 1)
        self.inv_weights = 1.0 / np.arange(2, D + 1)

    def eval_many(self, points):
        points = np.atleast_2d(points)
        tail = (np.abs(points[:, 1:]) * self.inv_weights).max(axis=1)
        return np.minimum(np.abs(points[:, 0]), tail)

    def seed_vectors(self):
        eye = np.eye(self.space.dim)
        return [eye[0], eye[1]]

    def describe(self):
        return {"kind": "minsup", "D": self.space.dim}


class DyadicBlockSum(HFunc):
    """h -> sum over 2^n dyadic blocks of |integral of h over the block|.

    The argument is a dual point of the resolution-2^N grid space: the cell
    values of a bounded function h; cell weight is 2^-N.
    """

    __slots__ = ("space", "n", "N")

    def __init__(self, n: int, N: int):
        if not 1 <= n <= N:
            raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
        self.space = Space(2**N, 1)
        self.n = n
        self.N = N

    def eval_many(self, points):
        points = np.atleast_2d(points)
        blocks = points.reshape(points.shape[0], 2**self.n, -1).sum(axis=2)
        return np.abs(blocks).sum(axis=1) * 2.0**-self.N

    def seed_vectors(self):
        out = [np.ones(self.space.dim)]
        width = 2 ** (self.N - self.n)
        for j in range(2**self.n):
            block = np.zeros(self.space.dim)
            block[j * width : (j + 1) * width] = 2.0**-self.N
            out.append(block)
        return out

    def describe(self):
        return {"kind": "dyadic", "n": self.n, "N": self.N}


class _Combined(HFunc):
    __slots__ = ("space", "parts")

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise ValueError("need at least one function")
        space = parts[0].space
        for part in parts:
            if part.space != space:
                raise SpaceMismatch("combined functions live over different spaces")
        self.space = space
        self.parts = tuple(parts)

    def seed_vectors(self):
        out = []
        for part in self.parts:
            out.extend(part.seed_vectors())
        return out


class MaxOf(_Combined):
    """Pointwise maximum of finitely many functions."""

    def eval_many(self, points):
        return np.maximum.reduce([p.eval_many(points) for p in self.parts])

    def describe(self):
        return {"kind": "max", "parts": [p.describe() for p in self.parts]}


class MinOf(_Combined):
    """Pointwise minimum of finitely many functions."""

    def eval_many(self, points):
        return np.minimum.reduce([p.eval_many(points) for p in self.parts])

    def describe(self):
        return {"kind": "min", "parts": [p.describe() for p in self.parts]}


def pointwise_max(f: HFunc, g: HFunc) -> HFunc:
    if isinstance(f, TermFunc) and isinstance(g, TermFunc):
        return TermFunc(_terms.Join(f.term, g.term), f.space)
    parts = []
    for h in (f, g):
        parts.extend(h.parts if isinstance(h, MaxOf) else [h])
    return MaxOf(parts)


def as_hfunc(obj, space: Space = None) -> HFunc:
    """Coerce a Term or HFunc to an HFunc."""
    if isinstance(obj, HFunc):
        return obj
    if isinstance(obj, _terms.Term):
        return TermFunc(obj, space)
    raise TypeError(f"cannot interpret {obj!r} as a positively homogeneous function")


def homogeneity_defect(f: HFunc, seed: int = 0, count: int = 100,
                       lambdas=(0.5, 2.0, 7.0)) -> float:
    """Largest relative error of f(lam x*) = lam f(x*) on sampled functionals."""
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((count, f.space.dim))
    base = f.eval_many(pts)
    worst = 0.0
    for lam in lambdas:
        scaled = f.eval_many(lam * pts)
        denom = np.maximum(np.abs(lam * base), 1.0)
        worst = max(worst, float(np.abs(scaled - lam * base).max() / denom.max()))
        # relative per-sample defect
        rel = np.abs(scaled - lam * base) / np.maximum(np.abs(lam * base), 1e-300)
        mask = np.abs(base) > 1e-12
        if mask.any():
            worst = max(worst, float(rel[mask].max()))
    return worst
