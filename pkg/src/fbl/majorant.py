"""Discrete measures on the unit ball and dominating norm-one majorants.

Averaging |x*(.)| against a probability measure on the unit ball always has
free-lattice norm at most 1; conversely every nonnegative function of norm
L admits a majorant L * f_mu. At desk scale the measure is discrete and the
majorant is found by a cutting-plane feasibility LP over a grid of atoms
enriched with norming points of violated constraints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, MajorantInfeasible
from .hfunc import FMu, HFunc, as_hfunc
from .norm import NormEstimate, search_lower
from .simplex import solve_lp
from .spaces import (
    EXACT_TOL,
    Space,
    Vector,
    cube_vertices,
    norm as space_norm,
    norming_functional,
    normalize,
    sample_dual_sphere,
    sample_sphere,
    _pnorm_rows,
)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure supported on finitely many unit-ball atoms."""

    space: Space
    atoms: tuple  # of Vector
    weights: tuple  # of float

    def __post_init__(self):
        if len(self.atoms) != len(self.weights) or not self.atoms:
            raise ValueError("need matching, nonempty atoms and weights")
        w = np.asarray(self.weights, dtype=float)
        if w.min() < 0.0:
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > EXACT_TOL:
            raise ValueError(f"weights sum to {w.sum()}, expected 1")
        for atom in self.atoms:
            if atom.space != self.space:
                raise ValueError("atoms must live in the measure's space")
            if space_norm(self.space, atom) > 1.0 + EXACT_TOL:
                raise ValueError(f"atom {atom!r} lies outside the unit ball")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    def atom_matrix(self) -> np.ndarray:
        return np.vstack([a.coords for a in self.atoms])

    def hfunc(self) -> FMu:
        return FMu(self.space, self.atom_matrix(), np.asarray(self.weights))

    def to_json(self) -> dict:
        return {
            "atoms": [a.coords.tolist() for a in self.atoms],
            "weights": list(self.weights),
        }

    @classmethod
    def from_json(cls, space: Space, payload: dict) -> "DiscreteMeasure":
        atoms = tuple(Vector(space, row) for row in payload["atoms"])
        return cls(space, atoms, tuple(payload["weights"]))


def point_mass(space: Space, point) -> DiscreteMeasure:
    return DiscreteMeasure(space, (Vector(space, point),), (1.0,))


def f_mu_eval(mu: DiscreteMeasure, xstar) -> float:
    """sum_i w_i |x*(atom_i)|."""
    return mu.hfunc()(xstar)


@dataclass
class ContractionReport:
    estimate: NormEstimate
    bound: float
    ok: bool

    def to_json(self) -> dict:
        return {
            "lower": self.estimate.lower,
            "bound": self.bound,
            "ok": self.ok,
            "certificate": self.estimate.certificate.to_json(),
        }


def verify_fmu_contraction(mu: DiscreteMeasure, space: Space = None, seed: int = 0,
                           m_max: int = 3, restarts: int = 4,
                           tol: float = 1e-6) -> ContractionReport:
    """Search the norm of the measure average and check it stays <= 1.

    Exceeding 1 is impossible for a probability measure on the unit ball,
    so a failure here signals an implementation bug.
    """
    space = space or mu.space
    est = search_lower(mu.hfunc(), space, m_max=m_max, restarts=restarts, seed=seed)
    ok = est.lower <= 1.0 + tol
    if not ok:
        raise InvariantViolation(
            f"measure average produced norm bound {est.lower} > 1"
        )
    return ContractionReport(estimate=est, bound=1.0, ok=ok)


@dataclass
class MajorantResult:
    measure: DiscreteMeasure
    proxy: float  # the constant on the right-hand side of f <= proxy * f_mu
    constant: float  # minimal dominating constant found by the LP
    lower: float  # certified lower bound from the LP dual tuple
    certificate: object  # DualTuple or None
    rounds: int
    max_violation: float
    atom_count: int

    def to_json(self) -> dict:
        return {
            "measure": self.measure.to_json(),
            "proxy": self.proxy,
            "constant": self.constant,
            "lower": self.lower,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "rounds": self.rounds,
            "max_violation": self.max_violation,
            "atom_count": self.atom_count,
        }


def _initial_atoms(space: Space, count: int, rng, seeds=()) -> np.ndarray:
    n = space.dim
    blocks = [np.eye(n), -np.eye(n)]
    for seed_vec in seeds:
        arr = np.asarray(seed_vec, dtype=float).reshape(1, -1)
        nrm = _pnorm_rows(arr, space.p)[0]
        if nrm > 0:
            blocks.append(arr / nrm)
            blocks.append(-arr / nrm)
    if n <= 12:
        verts = cube_vertices(n)
        blocks.append(verts / _pnorm_rows(verts, space.p)[:, None])
    have = sum(b.shape[0] for b in blocks)
    if count > have:
        blocks.append(sample_sphere(space, count - have, rng))
    return np.unique(np.vstack(blocks), axis=0)


def _price_atom(space: Space, constraints: np.ndarray, duals: np.ndarray,
                cap: int = 20):
    """Best new atom a in B_E maximizing sum_j lambda_j |x_j*(a)|.

    The maximum over the ball equals the admissibility of the weighted
    tuple, attained at the norming vector of the best signed combination;
    both are computed exactly by sign enumeration (top-``cap`` weights if
    the support is larger).
    """
    support = np.where(duals > 1e-12)[0]
    if support.size == 0:
        return 0.0, None
    if support.size > cap:
        support = support[np.argsort(-duals[support], kind="stable")[:cap]]
    weighted = duals[support, None] * constraints[support]
    m = weighted.shape[0]
    from .spaces import _sign_patterns, _pnorm_rows

    combos = _sign_patterns(m) @ weighted
    norms = _pnorm_rows(combos, space.q)
    best = int(norms.argmax())
    price = float(norms[best])
    atom = norming_functional(space.dual(), combos[best]).coords
    return price, atom


def find_majorant(f, space: Space, proxy: float = None, atom_grid_size: int = 64,
                  tol: float = 1e-4, seed: int = 0, max_rounds: int = 60,
                  cap: int = 20) -> MajorantResult:
    """Dominating measure average f <= C * f_mu by column generation.

    Minimizes the total mass of a nonnegative atomic measure dominating f:
    the minimal constant equals the free-lattice norm, the LP duals form an
    admissible certificate tuple matching it from below, and the pricing
    step (best new atom) is exact by sign enumeration. When ``proxy`` is
    given the result is rescaled to a probability measure with
    f <= proxy * f_mu, which is infeasible when proxy falls short of the
    minimal constant -- reported with the violating functional.
    """
    f = as_hfunc(f, space)
    if space.dim > 4:
        raise ValueError("majorant construction is capped at dimension 4")
    rng = np.random.default_rng(seed)

    atoms = _initial_atoms(space, atom_grid_size, rng, seeds=f.seed_vectors())
    constraints = np.vstack([
        sample_dual_sphere(space, max(64, atom_grid_size), rng),
        np.eye(space.dim),
        -np.eye(space.dim),
    ])
    fvals = f.eval_many(constraints)
    if fvals.min() < -1e-9:
        worst = int(fvals.argmin())
        raise MajorantInfeasible(
            "the function is negative on the dual sphere",
            functional=constraints[worst].tolist(),
            violation=float(-fvals.min()),
        )
    if fvals.max() <= 0.0 and (proxy is None or proxy <= 0.0):
        uniform = atoms
        weights = np.full(uniform.shape[0], 1.0 / uniform.shape[0])
        measure = DiscreteMeasure(
            space,
            tuple(Vector(space, row) for row in uniform),
            tuple(weights),
        )
        return MajorantResult(measure, 0.0, 0.0, 0.0, None, 0, 0.0,
                              uniform.shape[0])

    mass = None
    duals = None
    max_violation = np.inf
    rounds = 0
    price_tol = 1e-9
    while rounds < max_rounds:
        rounds += 1
        gains = np.abs(constraints @ atoms.T)
        res = solve_lp(np.ones(atoms.shape[0]), G=gains,
                       h=np.maximum(fvals, 0.0))
        if res.status != "optimal":
            raise InvariantViolation(f"majorant LP reported {res.status}")
        mass, duals = res.x, res.dual_ineq

        price, new_atom = _price_atom(space, constraints, duals, cap=cap)
        if price > 1.0 + price_tol and new_atom is not None:
            atoms = np.unique(np.vstack([atoms, new_atom[None, :]]), axis=0)
            continue

        def violation(x):
            return float(
                f.eval_many(x[None, :])[0]
                - np.abs(x @ atoms.T) @ mass
            )

        cand = np.vstack([
            sample_dual_sphere(space, 2048, rng),
            constraints[np.argsort(-(fvals - gains @ mass), kind="stable")[:8]],
        ])
        gaps = f.eval_many(cand) - np.abs(cand @ atoms.T) @ mass
        order = np.argsort(-gaps, kind="stable")[:8]
        best_v, best_x = 0.0, None
        for idx in order:
            v, x = _polish_on_sphere(violation, cand[idx], space)
            if v > best_v:
                best_v, best_x = v, x
        max_violation = best_v
        if best_v <= tol * max(1.0, float(mass.sum())):
            break
        constraints = np.vstack([constraints, best_x[None, :]])
        fvals = np.concatenate([fvals, f.eval_many(best_x[None, :])])
    else:
        raise MajorantInfeasible(
            f"column generation did not converge in {max_rounds} rounds",
            functional=None,
            violation=float(max_violation),
        )

    constant = float(mass.sum())

    # certified lower bound from the dual prices: an admissible tuple
    certificate = None
    lower = 0.0
    support = np.where(duals > 1e-12)[0]
    if support.size and constant > 0.0:
        rows = duals[support, None] * constraints[support]
        if rows.shape[0] <= cap:
            try:
                certificate = normalize(rows, space, cap=cap)
                lower = float(
                    np.abs(f.eval_many(certificate.matrix())).sum()
                )
            except ValueError:
                certificate = None

    if proxy is None:
        proxy_used = constant
    else:
        if constant > proxy * (1.0 + tol) + 1e-12:
            gaps = fvals - np.abs(constraints @ atoms.T) @ (mass * proxy / constant)
            worst = int(np.argmax(gaps))
            raise MajorantInfeasible(
                f"the minimal dominating constant {constant} exceeds the "
                f"supplied proxy {proxy}",
                functional=constraints[worst].tolist(),
                violation=float(constant - proxy),
            )
        proxy_used = float(proxy)

    # probability weights: divide by the constant actually reported and pad
    # any missing mass (padding only increases the majorant)
    scale = max(proxy_used, constant, 1e-300)
    w = mass / scale
    deficit = 1.0 - float(w.sum())
    if deficit > 0.0:
        w[int(np.argmax(w))] += deficit
    keep = w > 1e-15
    idx = np.where(keep)[0]
    wk = w[idx] / w[idx].sum()
    measure = DiscreteMeasure(
        space,
        tuple(Vector(space, atoms[i]) for i in idx),
        tuple(wk),
    )
    return MajorantResult(
        measure=measure,
        proxy=proxy_used,
        constant=constant,
        lower=lower,
        certificate=certificate,
        rounds=rounds,
        max_violation=float(max_violation),
        atom_count=len(measure.atoms),
    )


def _polish_on_sphere(fun, x0, space, passes=40, step0=0.25):
    """Coordinate ascent of a degree-1 homogeneous score on the dual sphere."""
    from .spaces import _pnorm

    def project(x):
        nrm = _pnorm(x, space.q)
        return x / nrm if nrm > 0 else x

    x = project(np.array(x0, dtype=float))
    best = fun(x)
    step = step0
    for _ in range(passes):
        improved = False
        for i in range(x.shape[0]):
            for sgn in (1.0, -1.0):
                trial = x.copy()
                trial[i] += sgn * step
                trial = project(trial)
                s = fun(trial)
                if s > best + 1e-14:
                    x, best = trial, s
                    improved = True
        if not improved:
            step /= 2.5
            if step < 1e-8:
                break
    return best, x
