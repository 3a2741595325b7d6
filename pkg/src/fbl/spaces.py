"""Finite-dimensional lp spaces, their duals, and admissible dual tuples.

The central quantity is the admissibility of a tuple of functionals
(x_1*, ..., x_m*): the supremum over the unit ball of sum_k |x_k*(x)|.
Tuples with admissibility at most 1 are the feasible set of the free-lattice
norm, so admissibility is computed exactly (by sign-pattern enumeration, or
the coordinate closed form when p = 1), never sampled.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapExceeded, DimensionMismatch, InvariantViolation, SpaceMismatch

INF = math.inf

#: Exact-arithmetic comparisons.
EXACT_TOL = 1e-12
#: Cross-oracle comparisons.
CROSS_TOL = 1e-9
#: Largest tuple length accepted by exact admissibility (2^(m-1) patterns).
DEFAULT_TUPLE_CAP = 20


def _as_exponent(p):
    """Coerce p to a Fraction in [1, oo) or the infinity marker."""
    if isinstance(p, str):
        if p.lower() in ("inf", "oo"):
            return INF
        return _validated(Fraction(p))
    if isinstance(p, np.generic):
        p = p.item()
    if isinstance(p, float) and math.isinf(p):
        return INF
    if isinstance(p, Fraction):
        frac = p
    elif isinstance(p, int):
        frac = Fraction(p)
    elif isinstance(p, float):
        frac = Fraction(p).limit_denominator(10**9)
    else:
        raise TypeError(f"cannot interpret {p!r} as a norm exponent")
    return _validated(frac)


def _validated(frac: Fraction) -> Fraction:
    if frac < 1:
        raise ValueError(f"norm exponent must satisfy p >= 1, got {frac}")
    return frac


def _conjugate(p):
    if p == INF:
        return Fraction(1)
    if p == 1:
        return INF
    # 1/p + 1/q = 1
    return 1 / (1 - 1 / p)


def _format_exponent(p) -> str:
    if p == INF:
        return "inf"
    if p.denominator == 1:
        return str(p.numerator)
    as_float = float(p)
    if Fraction(str(as_float)) == p:
        return str(as_float)
    return f"{p.numerator}/{p.denominator}"


@dataclass(frozen=True)
class Space:
    """A finite-dimensional lp space, tagged textually as ``p:n``."""

    dim: int
    p: object  # Fraction, or math.inf

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        object.__setattr__(self, "p", _as_exponent(self.p))

    @property
    def q(self):
        """The conjugate exponent: 1/p + 1/q = 1, with q = oo for p = 1."""
        return _conjugate(self.p)

    def dual(self) -> "Space":
        return Space(self.dim, self.q)

    def tag(self) -> str:
        return f"{_format_exponent(self.p)}:{self.dim}"

    @classmethod
    def from_tag(cls, text: str) -> "Space":
        try:
            p_part, n_part = text.split(":")
            return cls(int(n_part), _as_exponent(p_part))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"bad space tag {text!r}, expected 'p:n'") from exc

    def __repr__(self):
        return f"Space({self.tag()!r})"


class _CoordArray:
    """Immutable coordinate array attached to a space."""

    __slots__ = ("space", "coords")

    def __init__(self, space: Space, coords):
        arr = np.array(coords, dtype=float).reshape(-1)
        if arr.shape != (space.dim,):
            raise DimensionMismatch(
                f"expected {space.dim} coordinates, got {arr.shape[0]}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "coords", arr)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and self.space == other.space
            and np.array_equal(self.coords, other.coords)
        )

    def __hash__(self):
        return hash((type(self).__name__, self.space, self.coords.tobytes()))

    def __repr__(self):
        vals = ",".join(f"{v:g}" for v in self.coords)
        return f"{type(self).__name__}({self.space.tag()}, [{vals}])"


class Vector(_CoordArray):
    """A point of the space E, measured in the lp norm."""


class Functional(_CoordArray):
    """An element of the dual E*, measured in the conjugate lq norm."""


def _pnorm(x: np.ndarray, p) -> float:
    if x.size == 0:
        return 0.0
    if p == INF:
        return float(np.abs(x).max())
    pf = float(p)
    if pf == 1.0:
        return float(np.abs(x).sum())
    if pf == 2.0:
        return float(math.sqrt(float(np.dot(x, x))))
    m = float(np.abs(x).max())
    if m == 0.0:
        return 0.0
    return m * float(np.power(np.abs(x) / m, pf).sum()) ** (1.0 / pf)


def _pnorm_rows(mat: np.ndarray, p) -> np.ndarray:
    """lp norm of each row."""
    if p == INF:
        return np.abs(mat).max(axis=1)
    pf = float(p)
    if pf == 1.0:
        return np.abs(mat).sum(axis=1)
    if pf == 2.0:
        return np.sqrt((mat * mat).sum(axis=1))
    m = np.abs(mat).max(axis=1)
    safe = np.where(m > 0.0, m, 1.0)
    out = safe * np.power(np.abs(mat) / safe[:, None], pf).sum(axis=1) ** (1.0 / pf)
    return np.where(m > 0.0, out, 0.0)


def _coords_of(space: Space, obj, kind) -> np.ndarray:
    if isinstance(obj, _CoordArray):
        if not isinstance(obj, kind):
            raise SpaceMismatch(
                f"expected a {kind.__name__}, got {type(obj).__name__}"
            )
        if obj.space != space:
            raise SpaceMismatch(
                f"object lives in {obj.space.tag()}, not {space.tag()}"
            )
        return obj.coords
    arr = np.asarray(obj, dtype=float).reshape(-1)
    if arr.shape != (space.dim,):
        raise DimensionMismatch(
            f"expected {space.dim} coordinates, got {arr.shape[0]}"
        )
    return arr


def norm(space: Space, v) -> float:
    """The lp norm of a vector of the space."""
    return _pnorm(_coords_of(space, v, Vector), space.p)


def dual_norm(space: Space, f) -> float:
    """The lq norm of a functional on the space (q conjugate to p)."""
    return _pnorm(_coords_of(space, f, Functional), space.q)


def pair(f, v) -> float:
    """The bilinear pairing <f, v> = sum_i f_i v_i."""
    if isinstance(f, Functional) and isinstance(v, Vector):
        if f.space != v.space:
            raise SpaceMismatch(
                f"functional in {f.space.tag()}, vector in {v.space.tag()}"
            )
        fc, vc = f.coords, v.coords
    else:
        fc = f.coords if isinstance(f, _CoordArray) else np.asarray(f, dtype=float)
        vc = v.coords if isinstance(v, _CoordArray) else np.asarray(v, dtype=float)
        if fc.shape != vc.shape:
            raise DimensionMismatch(
                f"pairing shapes differ: {fc.shape} vs {vc.shape}"
            )
    return float(np.dot(fc, vc))


@functools.lru_cache(maxsize=32)
def _sign_patterns(m: int) -> np.ndarray:
    """All sign vectors in {-1,+1}^m with first entry +1 (global sign quotient)."""
    count = 1 << (m - 1)
    out = np.ones((count, m))
    for row in range(count):
        for j in range(1, m):
            if (row >> (j - 1)) & 1:
                out[row, j] = -1.0
    out.setflags(write=False)
    return out


def _tuple_matrix(functionals, space=None):
    """Stack functionals (or raw coordinate rows) into an (m, n) matrix."""
    if isinstance(functionals, np.ndarray):
        if space is None:
            raise ValueError("a space is required with a raw coordinate matrix")
        return np.atleast_2d(np.asarray(functionals, dtype=float)), space
    funcs = list(functionals)
    if not funcs:
        raise ValueError("empty tuple of functionals")
    rows = []
    for f in funcs:
        if isinstance(f, Functional):
            if space is None:
                space = f.space
            elif f.space != space:
                raise SpaceMismatch("tuple mixes functionals over different spaces")
            rows.append(f.coords)
        else:
            if space is None:
                raise ValueError("a space is required with raw coordinate rows")
            rows.append(_coords_of(space, f, Functional))
    return np.vstack(rows), space


def admissibility_matrix(space: Space, mat: np.ndarray) -> float:
    """Exact admissibility of the tuple given as rows of ``mat`` (no cap check).

    Uses sup_{x in B_E} sum_k |x_k*(x)| = max over sign patterns s of
    ||sum_k s_k x_k*||_q; the inner maximum over signs commutes with the
    supremum over the ball. For p = 1 this collapses to the coordinatewise
    closed form max_a sum_k |x_k*(a)|.
    """
    mat = np.atleast_2d(mat)
    if space.p == 1:
        return float(np.abs(mat).sum(axis=0).max())
    m = mat.shape[0]
    combos = _sign_patterns(m) @ mat
    return float(_pnorm_rows(combos, space.q).max())


def admissibility(functionals, space: Space = None, cap: int = DEFAULT_TUPLE_CAP) -> float:
    """sup over the unit ball of x -> sum_k |x_k*(x)|, computed exactly.

    Raises CapExceeded for tuples longer than ``cap``: the enumeration is
    2^(m-1) patterns and a silent approximation would corrupt certificates.
    """
    mat, space = _tuple_matrix(functionals, space)
    if mat.shape[0] == 0:
        raise ValueError("empty tuple of functionals")
    if mat.shape[0] > cap:
        raise CapExceeded(
            f"tuple length {mat.shape[0]} exceeds the exact-enumeration cap {cap}"
        )
    return admissibility_matrix(space, mat)


@dataclass(frozen=True)
class DualTuple:
    """A tuple of functionals over one space with its cached admissibility."""

    functionals: tuple
    admissibility: float

    def __post_init__(self):
        if not self.functionals:
            raise ValueError("a DualTuple needs at least one functional")
        space = self.functionals[0].space
        for f in self.functionals:
            if f.space != space:
                raise SpaceMismatch("tuple mixes functionals over different spaces")

    @property
    def space(self) -> Space:
        return self.functionals[0].space

    def matrix(self) -> np.ndarray:
        return np.vstack([f.coords for f in self.functionals])

    def __len__(self):
        return len(self.functionals)

    def to_json(self) -> dict:
        return {
            "functionals": [f.coords.tolist() for f in self.functionals],
            "admissibility": self.admissibility,
        }


def dual_tuple(functionals, space: Space = None, cap: int = DEFAULT_TUPLE_CAP) -> DualTuple:
    """Build a DualTuple, computing its admissibility exactly."""
    mat, space = _tuple_matrix(functionals, space)
    value = admissibility(mat, space, cap=cap)
    funcs = tuple(Functional(space, row) for row in mat)
    return DualTuple(funcs, value)


def normalize(functionals, space: Space = None, cap: int = DEFAULT_TUPLE_CAP) -> DualTuple:
    """Scale a tuple by 1/admissibility so the result has admissibility 1."""
    mat, space = _tuple_matrix(functionals, space)
    value = admissibility(mat, space, cap=cap)
    if value <= 0.0:
        raise ValueError("cannot normalize an all-zero tuple")
    scaled = mat / value
    new_value = admissibility_matrix(space, scaled)
    if abs(new_value - 1.0) > CROSS_TOL:
        raise InvariantViolation(
            f"normalized tuple has admissibility {new_value}, expected 1"
        )
    funcs = tuple(Functional(space, row) for row in scaled)
    return DualTuple(funcs, new_value)


def norming_functional(space: Space, v) -> Functional:
    """A dual-unit functional attaining <x*, v> = ||v||.

    For v = 0 returns the zero functional.
    """
    coords = _coords_of(space, v, Vector)
    n = norm(space, coords)
    if n == 0.0:
        return Functional(space, np.zeros(space.dim))
    p = space.p
    if p == 1:
        return Functional(space, np.sign(coords))
    if p == INF:
        idx = int(np.abs(coords).argmax())
        out = np.zeros(space.dim)
        out[idx] = math.copysign(1.0, coords[idx])
        return Functional(space, out)
    pf = float(p)
    out = np.sign(coords) * np.power(np.abs(coords), pf - 1.0) / n ** (pf - 1.0)
    return Functional(space, out)


def sample_dual_sphere(space: Space, count: int, rng) -> np.ndarray:
    """Rows: functionals of dual norm exactly 1, sampled via Gaussian directions."""
    mat = rng.standard_normal((count, space.dim))
    norms = _pnorm_rows(mat, space.q)
    bad = norms <= 1e-300
    if bad.any():
        mat[bad] = 0.0
        mat[bad, 0] = 1.0
        norms = _pnorm_rows(mat, space.q)
    return mat / norms[:, None]


def sample_sphere(space: Space, count: int, rng) -> np.ndarray:
    """Rows: vectors of norm exactly 1 in the space itself."""
    mat = rng.standard_normal((count, space.dim))
    norms = _pnorm_rows(mat, space.p)
    bad = norms <= 1e-300
    if bad.any():
        mat[bad] = 0.0
        mat[bad, 0] = 1.0
        norms = _pnorm_rows(mat, space.p)
    return mat / norms[:, None]


def cube_vertices(n: int) -> np.ndarray:
    """All 2^n sign vectors of dimension n (rows)."""
    if n > 22:
        raise CapExceeded(f"refusing to enumerate 2^{n} cube vertices")
    count = 1 << n
    out = np.ones((count, n))
    for row in range(count):
        for j in range(n):
            if (row >> j) & 1:
                out[row, j] = -1.0
    return out


def ball_sample_bound(space: Space, mat: np.ndarray, samples: int, rng) -> float:
    """Sampled lower oracle for admissibility: max of sum |<x_k*, x>| over
    random unit-ball points.

    The sample mixes Gaussian directions with sparse-support and sign-pattern
    points so that the polytope vertices of the p = 1 and p = infinity balls
    are covered; all draws lie in the ball, so the result never exceeds the
    exact value.
    """
    n = space.dim
    dense = sample_sphere(space, max(1, int(samples * 0.7)), rng)
    sparse_count = max(1, int(samples * 0.15))
    sparse = rng.standard_normal((sparse_count, n))
    keep = rng.integers(1, n + 1, size=sparse_count)
    for row in range(sparse_count):
        off = rng.permutation(n)[keep[row]:]
        sparse[row, off] = 0.0
    norms = _pnorm_rows(sparse, space.p)
    sparse = sparse[norms > 0] / norms[norms > 0, None]
    signs = rng.choice([-1.0, 1.0], size=(max(1, int(samples * 0.15)), n))
    signs /= _pnorm_rows(signs, space.p)[:, None]
    pts = np.vstack([dense, sparse, signs])
    return float(np.abs(pts @ mat.T).sum(axis=1).max())
