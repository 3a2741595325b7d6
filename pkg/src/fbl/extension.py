"""Lattice-homomorphism extension of linear operators into R^k.

An operator T: E -> X with X = R^k under the coordinatewise order extends
uniquely to a lattice homomorphism on terms: linear forms map through T and
joins become coordinatewise maxima. The extension produces sound norm lower
bounds (domination by ||T||) and pulls certificate tuples back through T*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, RewriteBudgetExceeded, SpaceMismatch
from .simplex import solve_lp
from .spaces import (
    CROSS_TOL,
    INF,
    DualTuple,
    Functional,
    Space,
    cube_vertices,
    dual_norm,
    dual_tuple,
    sample_sphere,
    _pnorm,
    _pnorm_rows,
)
from . import terms as _terms


@dataclass(frozen=True)
class LinOp:
    """A k x n matrix mapping ``domain`` into ``codomain`` (coordinatewise order)."""

    matrix: np.ndarray
    domain: Space
    codomain: Space

    def __post_init__(self):
        mat = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if mat.shape != (self.codomain.dim, self.domain.dim):
            raise SpaceMismatch(
                f"matrix shape {mat.shape} does not map {self.domain.tag()} "
                f"into {self.codomain.tag()}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def adjoint_apply(self, y) -> np.ndarray:
        return self.matrix.T @ np.asarray(y, dtype=float)

    def to_json(self) -> dict:
        return {
            "matrix": self.matrix.tolist(),
            "domain": self.domain.tag(),
            "codomain": self.codomain.tag(),
        }


@dataclass(frozen=True)
class OpNormBounds:
    lower: float
    upper: float

    def __iter__(self):
        return iter((self.lower, self.upper))


def _spectral_norm(mat: np.ndarray, tol: float = 1e-9, max_iter: int = 100000) -> float:
    """Largest singular value by power iteration on M^T M."""
    mtm = mat.T @ mat
    n = mtm.shape[0]
    v = np.ones(n) + 1e-3 * np.arange(n)
    v /= math.sqrt(float(v @ v))
    lam = 0.0
    for _ in range(max_iter):
        w = mtm @ v
        lam = float(v @ w)
        nw = math.sqrt(float(w @ w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        residual = _pnorm(mtm @ v - lam * v, 2)
        if residual <= tol * max(1.0, abs(lam)):
            break
    else:
        lam = float(np.linalg.svd(mat, compute_uv=False)[0]) ** 2
    return math.sqrt(max(lam, 0.0))


def op_norm(T: LinOp, samples: int = 256, seed: int = 0) -> OpNormBounds:
    """Bounds on the operator norm; exact for domain p = 1 (column rule),
    domain p = inf with dim <= 20 (vertex rule), and the 2 -> 2 case.

    Otherwise the lower end comes from sampled unit vectors and the upper
    end from interpolating the exact p = 1 and p = inf endpoint norms.
    """
    mat = T.matrix
    q_cod = T.codomain.p
    if T.domain.p == 1:
        exact = float(max(_pnorm(mat[:, j], q_cod) for j in range(mat.shape[1])))
        return OpNormBounds(exact, exact)
    if T.domain.p == INF and T.domain.dim <= 20:
        imgs = cube_vertices(T.domain.dim) @ mat.T
        exact = float(_pnorm_rows(imgs, q_cod).max())
        return OpNormBounds(exact, exact)
    if T.domain.p == 2 and q_cod == 2:
        exact = _spectral_norm(mat)
        return OpNormBounds(exact, exact)

    rng = np.random.default_rng(seed)
    cand = [np.eye(T.domain.dim), -np.eye(T.domain.dim)]
    if samples:
        cand.append(sample_sphere(T.domain, samples, rng))
    pts = np.vstack(cand)
    pts /= np.maximum(_pnorm_rows(pts, T.domain.p), 1e-300)[:, None]
    lower = float(_pnorm_rows(pts @ mat.T, q_cod).max())

    col_norm = float(max(_pnorm(mat[:, j], q_cod) for j in range(mat.shape[1])))
    if T.domain.dim <= 20:
        row_bound = float(_pnorm_rows(cube_vertices(T.domain.dim) @ mat.T, q_cod).max())
    else:
        row_bound = _pnorm(np.abs(mat).sum(axis=1), q_cod)
    if T.domain.p == INF:
        upper = row_bound
    else:
        theta = 1.0 / float(T.domain.p)  # interpolation weight of the p=1 endpoint
        upper = col_norm**theta * row_bound ** (1.0 - theta)
    upper = max(upper, lower)
    return OpNormBounds(lower, upper)


@dataclass
class Extension:
    """The image of a term under the extended lattice homomorphism."""

    values: np.ndarray
    via: str  # "diff_of_joins" | "direct"

    def to_json(self) -> dict:
        return {"values": self.values.tolist(), "via": self.via}


def _direct_lattice_eval(T: LinOp, t: _terms.Term) -> np.ndarray:
    if isinstance(t, _terms.Gen):
        return T(t.vector.coords)
    if isinstance(t, _terms.Scale):
        return t.c * _direct_lattice_eval(T, t.t)
    if isinstance(t, _terms.Sum):
        return _direct_lattice_eval(T, t.a) + _direct_lattice_eval(T, t.b)
    if isinstance(t, _terms.Neg):
        return -_direct_lattice_eval(T, t.t)
    if isinstance(t, _terms.Join):
        return np.maximum(_direct_lattice_eval(T, t.a), _direct_lattice_eval(T, t.b))
    if isinstance(t, _terms.Meet):
        return np.minimum(_direct_lattice_eval(T, t.a), _direct_lattice_eval(T, t.b))
    raise TypeError(f"not a term node: {t!r}")


def extend(T: LinOp, t: _terms.Term, budget: int = _terms.DEFAULT_REWRITE_BUDGET) -> Extension:
    """Apply the unique lattice homomorphism extending T to the term.

    Computes the difference-of-joins form and maps each linear form through
    T, taking coordinatewise maxima; if rewriting exceeds the budget, falls
    back to direct lattice evaluation of the tree (still exact).
    """
    space = _terms.term_space(t)
    if space is not None and space != T.domain:
        raise SpaceMismatch(
            f"term over {space.tag()}, operator domain {T.domain.tag()}"
        )
    try:
        d = _terms.to_diff_of_joins(t, budget=budget)
        images = np.vstack([T(g.coords) for g in d.generators])  # (G, k)
        plus = (d.pluses @ images).max(axis=0)
        minus = (d.minuses @ images).max(axis=0)
        return Extension(values=plus - minus, via="diff_of_joins")
    except RewriteBudgetExceeded:
        return Extension(values=_direct_lattice_eval(T, t), via="direct")


def hom_lower_bound(t: _terms.Term, T: LinOp, budget: int = _terms.DEFAULT_REWRITE_BUDGET) -> float:
    """||extension of t||_codomain / upper op norm; certified <= the norm of t."""
    bounds = op_norm(T)
    if bounds.upper <= 0.0:
        raise ValueError("the zero operator yields no lower bound")
    image = extend(T, t, budget=budget).values
    return _pnorm(image, T.codomain.p) / bounds.upper


def pullback_tuple(T: LinOp, decomposition) -> DualTuple:
    """Pull a positive decomposition on the codomain back to an admissible tuple.

    Given y_k* >= 0 with || sum y_k* || <= 1 in the codomain dual, returns
    {T*(y_k*) / ||T||_upper}; its admissibility is verified to be <= 1.
    """
    rows = []
    for y in decomposition:
        arr = y.coords if isinstance(y, Functional) else np.asarray(y, dtype=float)
        if arr.shape != (T.codomain.dim,):
            raise SpaceMismatch("decomposition entry has the wrong dimension")
        if arr.min() < 0.0:
            raise ValueError("decomposition entries must be coordinatewise >= 0")
        rows.append(arr)
    total = np.sum(rows, axis=0)
    if dual_norm(T.codomain, total) > 1.0 + CROSS_TOL:
        raise ValueError(
            "the summed decomposition exceeds the codomain dual unit ball"
        )
    bounds = op_norm(T)
    if bounds.upper <= 0.0:
        raise ValueError("cannot pull back through the zero operator")
    mat = np.vstack([T.adjoint_apply(y) / bounds.upper for y in rows])
    tup = dual_tuple(mat, T.domain)
    if tup.admissibility > 1.0 + CROSS_TOL:
        raise InvariantViolation(
            f"pulled-back tuple has admissibility {tup.admissibility} > 1"
        )
    return tup


def riesz_kantorovich(ystar, us, tol: float = CROSS_TOL) -> float:
    """y*(max_k u_k) via positive decompositions of y*.

    Computed two ways and asserted equal: the coordinatewise closed form
    sum_a y*_a max_k u_k[a], and the LP over decompositions y* = sum y_k*
    with y_k* >= 0 maximizing sum_k y_k*(u_k).
    """
    y = ystar.coords if isinstance(ystar, Functional) else np.asarray(ystar, dtype=float)
    if y.min() < 0.0:
        raise ValueError("the functional must be coordinatewise >= 0")
    U = np.vstack([np.asarray(u, dtype=float) for u in us])  # (m, k)
    m, k = U.shape
    closed = float(y @ U.max(axis=0))

    # LP: variables y_k* stacked, maximize sum_k <y_k*, u_k>
    c = -U.reshape(-1)
    A = np.zeros((k, m * k))
    for a in range(k):
        A[a, a::k] = 1.0
    res = solve_lp(c, A=A, b=y)
    if res.status != "optimal":
        raise InvariantViolation(f"decomposition LP reported {res.status}")
    lp_value = -res.value
    if abs(lp_value - closed) > tol * max(1.0, abs(closed)):
        raise InvariantViolation(
            f"closed form {closed} and LP {lp_value} disagree beyond {tol}"
        )
    return closed
