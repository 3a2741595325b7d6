"""The free-lattice norm: certified lower bounds, sound upper bounds.

A lower bound is always a value sum |f(x_k*)| over a tuple whose
admissibility was computed exactly and is at most 1; soundness is therefore
unconditional. Upper bounds come from lattice-norm axioms on term trees, or
exactly from the cutting-plane LP over l1^n.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapExceeded,
    FBLError,
    InadmissibleTuple,
    InvariantViolation,
    SpaceMismatch,
)
from .hfunc import FMu, GPhi, HFunc, TermFunc, as_hfunc
from .simplex import solve_lp
from .spaces import (
    CROSS_TOL,
    DEFAULT_TUPLE_CAP,
    INF,
    DualTuple,
    Functional,
    Space,
    admissibility_matrix,
    cube_vertices,
    dual_tuple,
    norm as space_norm,
    normalize,
    norming_functional,
    sample_dual_sphere,
)
from . import terms as _terms

INFINITE = math.inf


@dataclass
class NormEstimate:
    """Certified lower bound, sound upper bound, and the achieving tuple."""

    lower: float
    upper: float
    certificate: DualTuple
    seed: int
    iterations: int

    def __post_init__(self):
        if self.lower > self.upper + CROSS_TOL:
            raise InvariantViolation(
                f"lower bound {self.lower} exceeds upper bound {self.upper}"
            )

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": None if math.isinf(self.upper) else self.upper,
            "certificate": [f.coords.tolist() for f in self.certificate.functionals],
            "admissibility": self.certificate.admissibility,
            "seed": self.seed,
            "iterations": self.iterations,
        }


def lower_bound(f, tup: DualTuple) -> float:
    """sum_k |f(x_k*)| for an admissible tuple; certified <= the true norm.

    Tuples with admissibility above 1 + 1e-9 are refused, never rescaled.
    """
    f = as_hfunc(f)
    if not isinstance(tup, DualTuple):
        tup = dual_tuple(tup, f.space)
    if tup.space != f.space:
        raise SpaceMismatch("certificate tuple lives over a different space")
    mat = tup.matrix()
    if not np.any(mat):
        raise ValueError("tuple of zero functionals is not a certificate")
    if tup.admissibility > 1.0 + CROSS_TOL:
        raise InadmissibleTuple(
            f"admissibility {tup.admissibility} > 1; normalize the tuple first"
        )
    return float(np.abs(f.eval_many(mat)).sum())


def upper_bound_term(t) -> float:
    """Sound upper bound from lattice-norm axioms on the tree.

    Generators bound by their vector norm; joins/meets by the sum of the
    operand bounds, except that a structural |s| costs no more than s.
    """
    if isinstance(t, TermFunc):
        t = t.term
    if isinstance(t, _terms.Gen):
        return space_norm(t.vector.space, t.vector)
    if isinstance(t, _terms.Scale):
        return abs(t.c) * upper_bound_term(t.t)
    if isinstance(t, _terms.Neg):
        return upper_bound_term(t.t)
    inner = _terms.is_abs(t)
    if inner is not None:
        return upper_bound_term(inner)
    if isinstance(t, (_terms.Sum, _terms.Join, _terms.Meet)):
        return upper_bound_term(t.a) + upper_bound_term(t.b)
    raise TypeError(f"not a term node: {t!r}")


def upper_bound(f: HFunc) -> float:
    """Sound upper bound for an HFunc; +inf when no generic bound exists."""
    if isinstance(f, TermFunc):
        return upper_bound_term(f.term)
    if isinstance(f, GPhi):
        return float(np.abs(f.phi).sum())
    if isinstance(f, FMu):
        return float(f.weights.sum())
    return INFINITE


def sup_norm(f, space: Space = None, samples: int = 4096, seed: int = 0) -> float:
    """Lower estimate of sup_{B_E*} |f| by seeded sampling.

    Over p = 1 (dual ball a cube) with dim <= 20 the sign vertices are also
    evaluated exactly.
    """
    f = as_hfunc(f, space)
    space = f.space
    rng = np.random.default_rng(seed)
    best = 0.0
    if space.p == 1 and space.dim <= 20:
        vertices = cube_vertices(space.dim)
        best = float(np.abs(f.eval_many(vertices)).max())
    if samples > 0:
        pts = sample_dual_sphere(space, samples, rng)
        best = max(best, float(np.abs(f.eval_many(pts)).max()))
    return best


def _objective(f: HFunc, space: Space, X: np.ndarray) -> float:
    adm = admissibility_matrix(space, X)
    if adm <= 0.0:
        return 0.0
    return float(np.abs(f.eval_many(X)).sum() / adm)


def _coordinate_ascent(f, space, X0, max_passes=60, min_step=1e-7,
                       eval_budget=30000):
    """Greedy per-coordinate perturbation with decaying step."""
    X = np.array(X0, dtype=float)
    adm = admissibility_matrix(space, X)
    if adm > 0.0:
        X /= adm
    best = _objective(f, space, X)
    step = 0.5
    evals = 0
    passes = 0

    def better(s, current):
        return s > current * (1.0 + 1e-12) + 1e-15

    while step >= min_step and passes < max_passes and evals < eval_budget:
        passes += 1
        improved = False
        for k in range(X.shape[0]):
            for i in range(X.shape[1]):
                for sgn in (1.0, -1.0):
                    X[k, i] += sgn * step
                    s = _objective(f, space, X)
                    evals += 1
                    if better(s, best):
                        best = s
                        improved = True
                        for _ in range(25):
                            X[k, i] += sgn * step
                            s2 = _objective(f, space, X)
                            evals += 1
                            if better(s2, best):
                                best = s2
                            else:
                                X[k, i] -= sgn * step
                                break
                        break
                    X[k, i] -= sgn * step
        if not improved:
            step /= 3.0
    return best, X, evals


def _heuristic_starts(f: HFunc, space: Space, m: int, rng) -> list:
    """Deterministic good starts: norming functionals, axis tuples, vertices."""
    n = space.dim
    starts = []
    seeds = f.seed_vectors()
    if m == 1:
        for v in seeds[:8]:
            row = norming_functional(space, np.asarray(v, dtype=float)).coords
            if np.any(row):
                starts.append(row[None, :].copy())
        if space.p == 1 and n <= 12:
            vertices = cube_vertices(n)
            vals = np.abs(f.eval_many(vertices))
            order = np.argsort(-vals, kind="stable")[:2]
            for idx in order:
                starts.append(vertices[idx][None, :].copy())
        else:
            probe = sample_dual_sphere(space, 64, rng)
            vals = np.abs(f.eval_many(probe))
            starts.append(probe[int(vals.argmax())][None, :].copy())
    elif m <= n:
        # axis tuple: the m best coordinate functionals by |f|
        eye = np.eye(n)
        cand = np.vstack([eye, -eye])
        vals = np.abs(f.eval_many(cand))
        per_axis = np.maximum(vals[:n], vals[n:])
        signs = np.where(vals[:n] >= vals[n:], 1.0, -1.0)
        order = np.argsort(-per_axis, kind="stable")[:m]
        X = np.zeros((m, n))
        for row, axis in enumerate(order):
            X[row, axis] = signs[axis]
        starts.append(X)
    return starts


def search_lower(f, space: Space = None, m_max: int = 4, restarts: int = 6,
                 seed: int = 0, cap: int = DEFAULT_TUPLE_CAP,
                 max_passes: int = 40, extra_starts=(), workers: int = 1) -> NormEstimate:
    """Coordinate-ascent search for the best admissible certificate tuple.

    Maximizes the scale-invariant objective sum |f(x_k*)| / admissibility
    over tuple sizes 1..m_max with seeded random restarts, then normalizes
    the winner exactly. Deterministic for a fixed seed, independent of the
    worker count.
    """
    f = as_hfunc(f, space)
    if space is None:
        space = f.space
    elif f.space != space:
        raise SpaceMismatch("function lives over a different space")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    if m_max > cap:
        raise CapExceeded(f"m_max {m_max} exceeds the admissibility cap {cap}")
    n = space.dim
    rng = np.random.default_rng(seed)

    prev_best = None
    plan = []
    for m in range(1, m_max + 1):
        starts = _heuristic_starts(f, space, m, rng)
        starts.extend(rng.standard_normal((m, n)) for _ in range(restarts))
        plan.append((m, starts))
    for start in extra_starts:
        mat = np.atleast_2d(np.asarray(start, dtype=float))
        if mat.shape[0] <= cap and mat.shape[1] == n:
            plan.append((mat.shape[0], [mat]))

    total_evals = 0
    best_score = -1.0
    best_X = None

    def run_batch(starts):
        return [_coordinate_ascent(f, space, X0, max_passes=max_passes)
                for X0 in starts]

    for m, starts in plan:
        if prev_best is not None and prev_best.shape[0] == m - 1:
            grown = np.vstack([prev_best, sample_dual_sphere(space, 1, rng)])
            starts = [grown] + starts
        if workers > 1 and len(starts) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(
                    lambda X0: _coordinate_ascent(f, space, X0, max_passes=max_passes),
                    starts,
                ))
        else:
            results = run_batch(starts)
        for score, X, evals in results:
            total_evals += evals
            if score > best_score + 1e-15:
                best_score = score
                best_X = X
        if best_X is not None and best_X.shape[0] == m:
            prev_best = best_X

    if best_X is None or not np.any(best_X) or best_score <= 0.0:
        fallback = np.zeros((1, n))
        fallback[0, 0] = 1.0
        cert = normalize(fallback, space, cap=cap)
        value = float(np.abs(f.eval_many(cert.matrix())).sum())
        return NormEstimate(value, upper_bound(f), cert, seed, total_evals)

    cert = normalize(best_X, space, cap=cap)
    value = lower_bound(f, cert)
    return NormEstimate(value, upper_bound(f), cert, seed, total_evals)


# ---------------------------------------------------------------------------
# Exact norm over l1^n by cutting planes
# ---------------------------------------------------------------------------


@dataclass
class ExactNormResult:
    value: float
    phi: np.ndarray
    certificate: DualTuple
    lower: float
    gap: float
    rounds: int
    max_violation: float

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "phi": self.phi.tolist(),
            "certificate": self.certificate.to_json(),
            "lower": self.lower,
            "gap": self.gap,
            "rounds": self.rounds,
            "max_violation": self.max_violation,
        }


def _cube_surface_sample(n: int, count: int, rng) -> np.ndarray:
    pts = rng.uniform(-1.0, 1.0, size=(count, n))
    scale = np.abs(pts).max(axis=1)
    scale[scale == 0.0] = 1.0
    return pts / scale[:, None]


def _polish_violation(fun, x0, passes=12, step0=0.25):
    """Coordinate ascent of a scalar function over the cube [-1, 1]^n."""
    x = np.array(x0, dtype=float)
    best = fun(x)
    step = step0
    for _ in range(passes):
        improved = False
        for i in range(x.shape[0]):
            for sgn in (1.0, -1.0):
                trial = x.copy()
                trial[i] = min(1.0, max(-1.0, trial[i] + sgn * step))
                s = fun(trial)
                if s > best + 1e-14:
                    x, best = trial, s
                    improved = True
        if not improved:
            step /= 2.0
            if step < 1e-6:
                break
    return best, x


def minimal_dominating_phi(f, space: Space, grid: int = 128, tol: float = 1e-6,
                           seed: int = 0, max_rounds: int = 60,
                           balanced: bool = True):
    """Cutting-plane LP: min sum phi_a with phi >= 0 and phi.|x*| >= f(x*).

    Returns (phi, value, dual_rows, dual_weights, rounds, max_violation);
    the positive dual weights lambda_j on constraint rows x_j* form an
    admissible tuple {lambda_j x_j*} whose value sum equals the LP value.
    """
    f = as_hfunc(f, space)
    if space.p != 1:
        raise FBLError("the exact minimum-weight bound is specific to p = 1")
    n = space.dim
    if n > 10:
        raise CapExceeded("exact l1 norm is capped at dimension 10")
    rng = np.random.default_rng(seed)

    points = [cube_vertices(n), np.eye(n), -np.eye(n)]
    if grid > 0:
        points.append(_cube_surface_sample(n, grid, rng))
    pts = np.unique(np.vstack(points), axis=0)
    fvals = f.eval_many(pts)
    if fvals.min() < -1e-9:
        bad = int(fvals.argmin())
        raise FBLError(
            f"function is negative at {pts[bad].tolist()}: {fvals[bad]}"
        )

    phi = None
    value = None
    duals = None
    max_violation = INFINITE
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        res = solve_lp(np.ones(n), G=np.abs(pts), h=np.maximum(fvals, 0.0))
        if res.status != "optimal":
            raise InvariantViolation(
                f"norm LP reported {res.status}; impossible for bounded input"
            )
        phi, value, duals = res.x, res.value, res.dual_ineq

        def viol(x, phi=phi):
            return float(f.eval_many(x[None, :])[0] - np.abs(x) @ phi)

        cand = [cube_vertices(n), _cube_surface_sample(n, max(grid, 64), rng)]
        cand = np.vstack(cand)
        gaps = f.eval_many(cand) - np.abs(cand) @ phi
        order = np.argsort(-gaps, kind="stable")[:5]
        best_v = -INFINITE
        best_x = None
        new_rows = []
        for idx in order:
            v, x = _polish_violation(viol, cand[idx])
            if v > best_v:
                best_v, best_x = v, x
            if v > tol:
                new_rows.append(x)
        max_violation = max(best_v, 0.0)
        if max_violation <= tol:
            break
        add = np.vstack(new_rows) if new_rows else best_x[None, :]
        pts = np.vstack([pts, add])
        fvals = np.concatenate([fvals, f.eval_many(add)])
    else:
        raise InvariantViolation(
            f"cutting planes did not reach violation {tol} in {max_rounds} rounds"
        )

    dual_rows = pts
    if balanced:
        # Deterministic representative of the optimal face: minimize the
        # largest weight subject to keeping the optimal objective value.
        nb = n + 1
        c2 = np.zeros(nb)
        c2[n] = 1.0
        G2 = np.zeros((pts.shape[0] + n + 1, nb))
        h2 = np.zeros(pts.shape[0] + n + 1)
        G2[: pts.shape[0], :n] = np.abs(pts)
        h2[: pts.shape[0]] = np.maximum(fvals, 0.0)
        G2[pts.shape[0] : pts.shape[0] + n, :n] = -np.eye(n)
        G2[pts.shape[0] : pts.shape[0] + n, n] = 1.0
        G2[-1, :n] = -np.ones(n)
        h2[-1] = -(value + 1e-9)
        res2 = solve_lp(c2, G=G2, h=h2)
        if res2.status == "optimal":
            phi = res2.x[:n]
    return phi, value, dual_rows, duals, rounds, max_violation


def exact_norm_l1(f, space: Space, grid: int = 128, tol: float = 1e-6,
                  seed: int = 0, search_kwargs=None) -> ExactNormResult:
    """Exact free-lattice norm of a nonnegative function over l1^n.

    The norm equals the least total weight of a dominating coordinate form;
    the LP dual supplies a matching certificate tuple, which seeds the
    search so the reported lower bound is at least the LP value minus the
    separation slack.
    """
    f = as_hfunc(f, space)
    phi, value, rows, lam, rounds, violation = minimal_dominating_phi(
        f, space, grid=grid, tol=tol, seed=seed
    )
    support = np.where(lam > 1e-12)[0]
    cert_rows = lam[support, None] * rows[support]
    kwargs = {"m_max": 1, "restarts": 2, "seed": seed}
    if search_kwargs:
        kwargs.update(search_kwargs)
    estimate = search_lower(f, space, extra_starts=[cert_rows], **kwargs)
    gap = abs(value - estimate.lower)
    return ExactNormResult(
        value=value,
        phi=np.maximum(phi, 0.0),
        certificate=estimate.certificate,
        lower=estimate.lower,
        gap=gap,
        rounds=rounds,
        max_violation=violation,
    )
