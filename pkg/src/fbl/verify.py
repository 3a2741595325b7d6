"""Independent re-verification of emitted certificates.

This module deliberately avoids the numpy code paths used to produce
results: admissibility is re-enumerated with itertools over pure-Python
floats, and functions are re-evaluated by a small recursive interpreter.
A certificate that passes here was checked twice by disjoint code.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import FBLError
from .spaces import INF, Space
from . import terms as _terms


def _py_pnorm(row, p):
    if p == INF:
        return max(abs(v) for v in row) if row else 0.0
    pf = float(p)
    if pf == 1.0:
        return math.fsum(abs(v) for v in row)
    if pf == 2.0:
        return math.sqrt(math.fsum(v * v for v in row))
    return math.fsum(abs(v) ** pf for v in row) ** (1.0 / pf)


def recheck_admissibility(space: Space, rows, cap: int = 22) -> float:
    """Exact admissibility by plain sign enumeration over pure-Python floats."""
    rows = [list(map(float, r)) for r in rows]
    if not rows:
        raise FBLError("empty certificate")
    m = len(rows)
    if space.p == 1:
        return max(
            math.fsum(abs(r[a]) for r in rows) for a in range(space.dim)
        )
    if m > cap:
        raise FBLError(f"certificate too long to re-enumerate ({m} > {cap})")
    q = space.q
    best = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=m - 1):
        combo = [
            math.fsum(
                s * r[a] for s, r in zip((1.0,) + signs, rows)
            )
            for a in range(space.dim)
        ]
        best = max(best, _py_pnorm(combo, q))
    return best


def _eval_term_py(t, row):
    if isinstance(t, _terms.Gen):
        return math.fsum(c * x for c, x in zip(t.vector.coords.tolist(), row))
    if isinstance(t, _terms.Scale):
        return t.c * _eval_term_py(t.t, row)
    if isinstance(t, _terms.Sum):
        return _eval_term_py(t.a, row) + _eval_term_py(t.b, row)
    if isinstance(t, _terms.Neg):
        return -_eval_term_py(t.t, row)
    if isinstance(t, _terms.Join):
        return max(_eval_term_py(t.a, row), _eval_term_py(t.b, row))
    if isinstance(t, _terms.Meet):
        return min(_eval_term_py(t.a, row), _eval_term_py(t.b, row))
    raise FBLError(f"not a term node: {t!r}")


def reevaluate(spec: dict, space: Space, row) -> float:
    """Evaluate a described function at one dual point, numpy-free."""
    kind = spec["kind"]
    row = list(map(float, row))
    if kind == "term":
        from .grammar import parse_term

        return _eval_term_py(parse_term(spec["expr"], space), row)
    if kind == "gphi":
        return abs(math.fsum(p * abs(x) for p, x in zip(spec["phi"], row)))
    if kind == "fmu":
        total = 0.0
        for atom, w in zip(spec["atoms"], spec["weights"]):
            total += w * abs(math.fsum(a * x for a, x in zip(atom, row)))
        return total
    if kind == "harmonic":
        return max(abs(x) / (a + 1) for a, x in enumerate(row))
    if kind == "minsup":
        tail = max(abs(row[a]) / (a + 1) for a in range(1, len(row)))
        return min(abs(row[0]), tail)
    if kind == "dyadic":
        n, N = spec["n"], spec["N"]
        width = 2 ** (N - n)
        total = 0.0
        for j in range(2**n):
            total += abs(math.fsum(row[j * width : (j + 1) * width]))
        return total * 2.0**-N
    if kind == "max":
        return max(reevaluate(part, space, row) for part in spec["parts"])
    if kind == "min":
        return min(reevaluate(part, space, row) for part in spec["parts"])
    raise FBLError(f"unknown function description {kind!r}")


@dataclass
class VerificationReport:
    admissibility: float
    admissible: bool
    recomputed_lower: float
    lower_matches: bool
    ok: bool

    def to_json(self) -> dict:
        return {
            "admissibility": self.admissibility,
            "admissible": self.admissible,
            "recomputed_lower": self.recomputed_lower,
            "lower_matches": self.lower_matches,
            "ok": self.ok,
        }


def verify_certificate(space: Space, func_spec: dict, certificate_rows,
                       claimed_lower: float, tol: float = 1e-9) -> VerificationReport:
    """Re-derive a lower bound from its certificate alone.

    Checks that the tuple is admissible (<= 1 + tol) and that the sum of
    |f(x_k*)| reproduces the claimed value to tol.
    """
    adm = recheck_admissibility(space, certificate_rows)
    admissible = adm <= 1.0 + tol
    value = math.fsum(
        abs(reevaluate(func_spec, space, row)) for row in certificate_rows
    )
    lower_matches = abs(value - claimed_lower) <= tol * max(1.0, abs(claimed_lower))
    return VerificationReport(
        admissibility=adm,
        admissible=admissible,
        recomputed_lower=value,
        lower_matches=lower_matches,
        ok=admissible and lower_matches,
    )
