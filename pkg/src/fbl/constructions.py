"""Desk-scale reproductions of the quantitative free-lattice constructions.

Each operation is deterministic given its parameters and seed, and each
reported lower bound ships with the certificate achieving it: harmonic
growth of coordinate certificates, the 1/4 separation from the generated
sublattice, dyadic block-sum functions with their monotone-approximation
mechanics, the Rademacher route embedding coordinate absolute values, and
pairwise spread of order-interval elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import FBLError, InvariantViolation
from .extension import LinOp, extend
from .hfunc import DyadicBlockSum, Harmonic, MinSup, MinOf, TermFunc, as_hfunc
from .norm import NormEstimate, lower_bound, search_lower, upper_bound_term
from .spaces import (
    DualTuple,
    Functional,
    Space,
    Vector,
    dual_tuple,
    normalize,
)
from . import terms as _terms


# ---------------------------------------------------------------------------
# Harmonic growth
# ---------------------------------------------------------------------------


@dataclass
class HarmonicResult:
    N: int
    lower: float
    expected: Fraction
    certificate: DualTuple

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "lower": self.lower,
            "expected": str(self.expected),
            "certificate": self.certificate.to_json(),
        }


def harmonic_certificate(N: int) -> HarmonicResult:
    """Certify max_a |x*_a|/a over l1^N at value sum_{k<=N} 1/k.

    The coordinate tuple (e_1*, ..., e_N*) is admissible over l1 and the
    computed bound matches the exact rational partial sum to 1e-12.
    """
    if N < 1:
        raise ValueError("need N >= 1")
    f = Harmonic(N)
    cert = dual_tuple(np.eye(N), f.space)
    value = lower_bound(f, cert)
    expected = sum((Fraction(1, k) for k in range(1, N + 1)), Fraction(0))
    if abs(value - float(expected)) > 1e-12:
        raise InvariantViolation(
            f"certificate value {value} misses the rational sum {expected}"
        )
    return HarmonicResult(N=N, lower=value, expected=expected, certificate=cert)


# ---------------------------------------------------------------------------
# Distance from the generated sublattice
# ---------------------------------------------------------------------------


@dataclass
class DistanceResult:
    n: int
    bound: float
    expected_half_sum: Fraction
    x_tuple: DualTuple
    y_tuple: DualTuple
    cancellation: float

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "bound": self.bound,
            "expected_half_sum": str(self.expected_half_sum),
            "cancellation": self.cancellation,
            "x_tuple": self.x_tuple.to_json(),
            "y_tuple": self.y_tuple.to_json(),
        }


def nonmember_distance(n: int, g: _terms.Term = None) -> DistanceResult:
    """Distance bound from min(|x*_1|, max_{a>=2} |x*_a|/a) to a term g.

    g may use only the first n generators of l1^(2n). The two spike tuples
    x_k* = (1/n) e_1* + e_{n+k}* and y_k* = (1/n) e_1* agree on the first n
    coordinates, so g cancels exactly and the bound is at least
    (1/2) sum_k 1/(n+k) >= 1/4 regardless of g.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    dim = 2 * n
    space = Space(dim, 1)
    f = MinSup(dim)
    if g is None:
        g = _terms.zero_term(space)
    gspace = _terms.term_space(g)
    if gspace is not None and gspace != space:
        raise FBLError(f"g must live over {space.tag()}")
    for v in _terms.generators(g):
        if np.any(v.coords[n:]):
            raise FBLError(
                "g uses a generator outside the first n coordinates"
            )

    xs = np.zeros((n, dim))
    ys = np.zeros((n, dim))
    xs[:, 0] = 1.0 / n
    ys[:, 0] = 1.0 / n
    for k in range(n):
        xs[k, n + k] = 1.0

    gx = _terms.eval_many(g, xs)
    gy = _terms.eval_many(g, ys)
    cancellation = float(np.abs(gx - gy).max())
    if cancellation > 1e-12:
        raise InvariantViolation(
            f"g fails to cancel on the spike tuples: {cancellation}"
        )

    diff_x = np.abs(f.eval_many(xs) - gx).sum()
    diff_y = np.abs(f.eval_many(ys) - gy).sum()
    bound = float(max(diff_x, diff_y))

    expected = sum((Fraction(1, n + k) for k in range(1, n + 1)), Fraction(0)) / 2
    if bound + 1e-12 < float(expected):
        raise InvariantViolation(
            f"distance bound {bound} fell below the guaranteed {expected}"
        )
    if bound < 0.25:
        raise InvariantViolation(f"distance bound {bound} fell below 1/4")
    return DistanceResult(
        n=n,
        bound=bound,
        expected_half_sum=expected,
        x_tuple=dual_tuple(xs, space),
        y_tuple=dual_tuple(ys, space),
        cancellation=cancellation,
    )


# ---------------------------------------------------------------------------
# Dyadic grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DyadicGrid:
    """Step functions on [0,1] at resolution 2^N cells, cell weight 2^-N.

    Vectors store cell integrals, so the grid space is plain l1^(2^N) and
    dual points are the cell values of bounded functions. Lattice operations
    on integral coordinates agree with pointwise ones because the weights
    are uniform.
    """

    N: int

    def __post_init__(self):
        if not 1 <= self.N <= 14:
            raise ValueError("resolution exponent N must be in 1..14")

    @property
    def cells(self) -> int:
        return 2**self.N

    @property
    def weight(self) -> float:
        return 2.0**-self.N

    @property
    def space(self) -> Space:
        return Space(self.cells, 1)

    def rademacher_values(self, j: int) -> np.ndarray:
        """The j-th +-1 block pattern (j = 1..N), mean zero, block 2^(N-j)."""
        if not 1 <= j <= self.N:
            raise ValueError(f"need 1 <= j <= {self.N}")
        block = 2 ** (self.N - j)
        pattern = np.repeat(np.resize([1.0, -1.0], 2**j), block)
        return pattern

    def from_values(self, values) -> Vector:
        """Embed a step function (cell values) as its vector of cell integrals."""
        arr = np.asarray(values, dtype=float).reshape(-1)
        if arr.shape != (self.cells,):
            raise FBLError(f"expected {self.cells} cell values")
        return Vector(self.space, arr * self.weight)

    def ones_vector(self) -> Vector:
        """The constant-one function on [0,1]."""
        return self.from_values(np.ones(self.cells))

    def block_vector(self, n: int, j: int) -> Vector:
        """Indicator of the j-th (1-based) dyadic block at scale n."""
        if not (1 <= n <= self.N and 1 <= j <= 2**n):
            raise ValueError("block index out of range")
        values = np.zeros(self.cells)
        width = 2 ** (self.N - n)
        values[(j - 1) * width : j * width] = 1.0
        return self.from_values(values)

    def integral_abs(self, values) -> float:
        """The L1 norm of a step function given by cell values."""
        arr = np.asarray(values, dtype=float).reshape(-1)
        return float(np.abs(arr).sum() * self.weight)


def dyadic_fn(grid: DyadicGrid, n: int) -> DyadicBlockSum:
    """h -> sum over the 2^n dyadic blocks of |integral of h|, as an HFunc."""
    if n > grid.N:
        raise ValueError(f"scale n={n} exceeds grid resolution N={grid.N}")
    return DyadicBlockSum(n, grid.N)


def _dyadic_step_sample(grid: DyadicGrid, count: int, rng) -> np.ndarray:
    """Random step functions with dyadic-rational values: exact arithmetic."""
    return rng.integers(-1024, 1025, size=(count, grid.cells)) * 2.0**-10


# ---------------------------------------------------------------------------
# Monotone approximation and the gap report
# ---------------------------------------------------------------------------


@dataclass
class FatouReport:
    N: int
    g_scale: float
    monotone_violations: int
    lipschitz_violations: int
    fn_norms: list
    mechanics_ok: bool
    sup_fn_lower: float
    g_lower: float
    fn_lowers: list

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "g_scale": self.g_scale,
            "monotone_violations": self.monotone_violations,
            "lipschitz_violations": self.lipschitz_violations,
            "fn_norms": self.fn_norms,
            "mechanics_ok": self.mechanics_ok,
            "sup_fn": self.sup_fn_lower,
            "g": self.g_lower,
            "fn_lowers": self.fn_lowers,
        }


def fatou_suite(grid: DyadicGrid, g_scale: float = 1.5, samples: int = 1000,
                seed: int = 0, search_kwargs=None) -> FatouReport:
    """Verify the block-sum mechanics behind the norm/supremum gap.

    (a) monotonicity of the block sums in the scale, (b) the 1-Lipschitz
    bound in the L1 distance, (c) each block sum has norm exactly 1, (d) the
    shifted-argument identities making min(g, f_n) approach g pointwise,
    (e) the gap: every min(g, f_n) has norm at most 1 while g has norm
    g_scale. The random step functions use dyadic-rational values so every
    comparison is exact in IEEE arithmetic.
    """
    if grid.N < 3:
        raise ValueError("need grid resolution N >= 3")
    if g_scale <= 1.0:
        raise ValueError("need g_scale > 1")
    rng = np.random.default_rng(seed)
    space = grid.space
    fns = [dyadic_fn(grid, n) for n in range(1, grid.N + 1)]
    ones = grid.ones_vector()
    g_term = _terms.Scale(g_scale, _terms.abs_term(_terms.Gen(ones)))
    g_fn = TermFunc(g_term, space)

    # (a) monotonicity across scales, exact
    steps = _dyadic_step_sample(grid, samples, rng)
    vals = [f.eval_many(steps) for f in fns]
    monotone_violations = int(
        sum((vals[i] > vals[i + 1]).sum() for i in range(len(fns) - 1))
    )

    # (b) 1-Lipschitz in the L1 distance, exact
    pairs = _dyadic_step_sample(grid, 2 * min(samples, 200), rng)
    h1, h2 = pairs[::2], pairs[1::2]
    l1_dist = np.abs(h1 - h2).sum(axis=1) * grid.weight
    lipschitz_violations = 0
    for f in fns:
        gap = np.abs(f.eval_many(h1) - f.eval_many(h2))
        lipschitz_violations += int((gap > l1_dist).sum())

    # (c) norm exactly 1 per scale: the all-ones dual certificate meets the
    # additive upper bound over the block decomposition
    ones_dual = dual_tuple(np.ones((1, grid.cells)), space)
    fn_norms = []
    for n, f in enumerate(fns, start=1):
        low = lower_bound(f, ones_dual)
        up = math.fsum(
            float(np.abs(grid.block_vector(n, j).coords).sum())
            for j in range(1, 2**n + 1)
        )
        fn_norms.append({"n": n, "lower": low, "upper": up})
        if not (low == 1.0 and up == 1.0):
            raise InvariantViolation(
                f"block sum at scale {n} has (lower, upper) = ({low}, {up})"
            )

    # (d) the shifted-argument mechanics, exact
    mechanics_ok = True
    g_of = lambda values: float(g_fn.eval_many(values[None, :])[0])
    for h in _dyadic_step_sample(grid, 8, rng):
        norm1 = grid.integral_abs(h)
        K = g_scale * float(np.abs(h).max()) + norm1 + 1.0
        for j in range(1, grid.N + 1):
            hj = h + K * grid.rademacher_values(j)
            if g_of(hj) != g_of(h):
                mechanics_ok = False
            if grid.integral_abs(hj) < K - norm1:
                mechanics_ok = False
            capped = max(
                min(g_of(hj), float(f.eval_many(hj[None, :])[0])) for f in fns
            )
            if capped != g_of(hj):
                mechanics_ok = False
    if not mechanics_ok:
        raise InvariantViolation("shifted-argument identities failed")

    # (e) the gap: capped functions stay at norm <= 1, g sits at g_scale
    kwargs = {"m_max": 1, "restarts": 2, "seed": seed}
    if search_kwargs:
        kwargs.update(search_kwargs)
    fn_lowers = []
    for f in fns:
        capped = MinOf([g_fn, f])
        est = search_lower(capped, space, **kwargs)
        fn_lowers.append(est.lower)
    sup_fn_lower = max(fn_lowers)
    if sup_fn_lower > 1.0 + 1e-6:
        raise InvariantViolation(
            f"a capped block sum exceeded norm 1: {sup_fn_lower}"
        )
    g_est = search_lower(g_fn, space, **kwargs)
    if g_est.lower < g_scale - 1e-6:
        raise InvariantViolation(
            f"the scaled generator norm {g_est.lower} missed {g_scale}"
        )
    return FatouReport(
        N=grid.N,
        g_scale=g_scale,
        monotone_violations=monotone_violations,
        lipschitz_violations=lipschitz_violations,
        fn_norms=fn_norms,
        mechanics_ok=mechanics_ok,
        sup_fn_lower=sup_fn_lower,
        g_lower=g_est.lower,
        fn_lowers=fn_lowers,
    )


# ---------------------------------------------------------------------------
# Rademacher embedding
# ---------------------------------------------------------------------------


@dataclass
class RademacherResult:
    gamma: int
    p: str
    pairings: list
    sum_abs: float
    bound: float
    bound_exact: bool
    certificate: DualTuple | None
    certificate_lower: float | None
    search: NormEstimate | None
    search_consistent: bool
    j_norm_ok: bool

    def to_json(self) -> dict:
        return {
            "gamma": self.gamma,
            "p": self.p,
            "pairings": self.pairings,
            "sum_abs": self.sum_abs,
            "bound": self.bound,
            "bound_exact": self.bound_exact,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "certificate_lower": self.certificate_lower,
            "search": None if self.search is None else self.search.to_json(),
            "search_consistent": self.search_consistent,
            "j_norm_ok": self.j_norm_ok,
        }


def _operator_into_grid(space: Space, grid: DyadicGrid, members) -> LinOp:
    """Columns: selected coordinates map to Rademacher patterns, others to 0."""
    mat = np.zeros((grid.cells, space.dim))
    for gamma in members:
        mat[:, gamma - 1] = grid.rademacher_values(gamma) * grid.weight
    return LinOp(mat, space, grid.space)


def _sign_pattern_tuple(space: Space, members, scale: float) -> np.ndarray:
    """Rows: all +-1 patterns on ``members`` modulo global sign, times scale."""
    b = len(members)
    rows = np.zeros((2 ** (b - 1), space.dim))
    for idx in range(2 ** (b - 1)):
        for pos, gamma in enumerate(members):
            sign = 1.0
            if pos > 0 and (idx >> (pos - 1)) & 1:
                sign = -1.0
            rows[idx, gamma - 1] = sign * scale
    return rows


def rademacher_embedding(gamma: int, p, grid: DyadicGrid, A=(), coeffs=None,
                         seed: int = 0, cap: int = 20,
                         search_kwargs=None) -> RademacherResult:
    """Embed coordinate absolute values along Rademacher patterns.

    Maps e_k to the k-th pattern through the formal identity into l2 (norm 1
    for p <= 2) and verifies: the 0/1 pairing dichotomy of the pulled-back
    integration functional, exactly; and the certified lower bound
    sum |a| / 2 for sums of weighted coordinate absolute values. When the
    sign-pattern certificate tuple fits under the enumeration cap it is
    emitted and verified by exact admissibility; the rational certificate
    arithmetic is exact either way.
    """
    pfrac = Space(max(gamma, 1), p).p
    if not (1 < pfrac <= 2):
        raise ValueError("the embedding needs 1 < p <= 2")
    if gamma < 1 or gamma > grid.N:
        raise ValueError(f"need 1 <= gamma <= grid resolution {grid.N}")
    A = sorted(set(int(x) for x in A))
    if A and (A[0] < 1 or A[-1] > gamma):
        raise ValueError("A must be a subset of 1..gamma")
    space = Space(gamma, pfrac)
    rng = np.random.default_rng(seed)

    # ||j|| <= 1 on the grid, sampled: the L1 image norm never beats l2
    j_op = _operator_into_grid(space, grid, range(1, gamma + 1))
    xs = rng.standard_normal((64, gamma))
    images = xs @ j_op.matrix.T
    j_norm_ok = bool(
        (np.abs(images).sum(axis=1) <= np.sqrt((xs * xs).sum(axis=1)) + 1e-12).all()
    )

    # pairing dichotomy, via the extension of |d(e_gamma)| paired with 1
    T_A = _operator_into_grid(space, grid, A)
    pairings = []
    eye = np.eye(gamma)
    for g in range(1, gamma + 1):
        term = _terms.abs_term(_terms.Gen(Vector(space, eye[g - 1])))
        values = extend(T_A, term).values
        paired = float(values.sum())
        expected = 1.0 if g in A else 0.0
        if paired != expected:
            raise InvariantViolation(
                f"pairing at coordinate {g} is {paired}, expected {expected}"
            )
        pairings.append(int(expected))

    if coeffs is None:
        return RademacherResult(
            gamma=gamma,
            p=str(pfrac),
            pairings=pairings,
            sum_abs=0.0,
            bound=0.0,
            bound_exact=True,
            certificate=None,
            certificate_lower=None,
            search=None,
            search_consistent=True,
            j_norm_ok=j_norm_ok,
        )

    a = np.asarray(coeffs, dtype=float).reshape(-1)
    if a.shape != (gamma,):
        raise ValueError(f"need {gamma} coefficients")
    support = [g for g in range(1, gamma + 1) if a[g - 1] != 0.0]
    if not support:
        raise ValueError("the coefficient vector is zero")
    plus = [g for g in support if a[g - 1] > 0]
    minus = [g for g in support if a[g - 1] < 0]

    # exact rational certificate arithmetic for the two pulled-back
    # functionals: their difference halved is sum |a| / 2
    xi_plus = sum(Fraction(a[g - 1]) for g in plus)
    xi_minus = sum(Fraction(a[g - 1]) for g in minus)
    sum_abs_frac = sum(Fraction(abs(a[g - 1])) for g in support)
    bound_frac = (xi_plus - xi_minus) / 2
    bound_exact = bound_frac * 2 == sum_abs_frac
    if not bound_exact:
        raise InvariantViolation("certificate arithmetic failed to close")

    # float pipeline cross-check through the extension
    term_sum = None
    for g in support:
        piece = _terms.Scale(
            float(a[g - 1]), _terms.abs_term(_terms.Gen(Vector(space, eye[g - 1])))
        )
        term_sum = piece if term_sum is None else _terms.Sum(term_sum, piece)
    for members, frac in ((plus, xi_plus), (minus, xi_minus)):
        if not members:
            continue
        T = _operator_into_grid(space, grid, members)
        val = float(extend(T, term_sum).values.sum())
        if abs(val - float(frac)) > 1e-12:
            raise InvariantViolation(
                f"extension pairing {val} misses the rational value {frac}"
            )

    f = TermFunc(term_sum, space)
    sum_abs = float(sum_abs_frac)
    bound = float(bound_frac)

    # explicit admissible tuple when the sign patterns fit under the cap
    certificate = None
    certificate_lower = None
    rows = []
    if plus:
        rows.append(_sign_pattern_tuple(space, plus, 2.0 ** -len(plus)))
    if minus:
        rows.append(_sign_pattern_tuple(space, minus, 2.0 ** -len(minus)))
    tuple_rows = np.vstack(rows)
    if tuple_rows.shape[0] <= cap:
        certificate = normalize(tuple_rows, space, cap=cap)
        certificate_lower = lower_bound(f, certificate)
        if certificate_lower < bound:
            raise InvariantViolation(
                f"certified value {certificate_lower} fell below the exact "
                f"bound {bound}"
            )

    kwargs = {"m_max": min(gamma, 4), "restarts": 4, "seed": seed}
    if search_kwargs:
        kwargs.update(search_kwargs)
    search = search_lower(f, space, **kwargs)
    upper = upper_bound_term(term_sum)
    search_consistent = search.lower <= upper + 1e-9 and bound <= upper + 1e-9
    if not search_consistent:
        raise InvariantViolation("search contradicted the certified bounds")
    return RademacherResult(
        gamma=gamma,
        p=str(pfrac),
        pairings=pairings,
        sum_abs=sum_abs,
        bound=bound,
        bound_exact=bound_exact,
        certificate=certificate,
        certificate_lower=certificate_lower,
        search=search,
        search_consistent=search_consistent,
        j_norm_ok=j_norm_ok,
    )


# ---------------------------------------------------------------------------
# Order-interval spread
# ---------------------------------------------------------------------------


@dataclass
class IntervalSpreadResult:
    lowers: list  # pairwise matrix of certified lower bounds
    estimates: dict

    def to_json(self) -> dict:
        return {"lowers": self.lowers}


def interval_spread(f: _terms.Term, g: _terms.Term, us, seed: int = 0,
                    samples: int = 1000, search_kwargs=None) -> IntervalSpreadResult:
    """Pairwise norm lower bounds for z_s = (d(u_s) v f) ^ g.

    Requires f <= g on sampled functionals. The report is empirical
    separation evidence; no theorem-level constant is claimed.
    """
    space = _terms.term_space(f) or _terms.term_space(g)
    rng = np.random.default_rng(seed)
    from .spaces import sample_dual_sphere

    pts = sample_dual_sphere(space, samples, rng)
    fv = _terms.eval_many(f, pts)
    gv = _terms.eval_many(g, pts)
    if (fv > gv + 1e-12).any():
        worst = int(np.argmax(fv - gv))
        raise FBLError(
            f"f exceeds g at {pts[worst].tolist()} by {float(fv[worst]-gv[worst])}"
        )

    zs = [
        _terms.Meet(_terms.Join(_terms.Gen(Vector(space, u)), f), g)
        for u in np.atleast_2d(np.asarray(us, dtype=float))
    ]
    kwargs = {"m_max": 2, "restarts": 3, "seed": seed}
    if search_kwargs:
        kwargs.update(search_kwargs)
    count = len(zs)
    matrix = [[0.0] * count for _ in range(count)]
    estimates = {}
    for s in range(count):
        for t in range(s + 1, count):
            if zs[s] == zs[t]:
                continue
            est = search_lower(
                TermFunc(_terms.Sum(zs[s], _terms.Neg(zs[t])), space),
                space,
                **kwargs,
            )
            matrix[s][t] = est.lower
            matrix[t][s] = est.lower
            estimates[(s, t)] = est
    return IntervalSpreadResult(lowers=matrix, estimates=estimates)
