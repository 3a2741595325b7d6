"""Exact and certified computation in free Banach lattices over l_p^n.

Lower bounds for the free-lattice norm are always certified by an
admissible dual tuple whose admissibility was computed exactly; upper
bounds come from lattice-norm axioms or exact LPs over l1^n.
"""

from .spaces import (
    DualTuple,
    Functional,
    Space,
    Vector,
    admissibility,
    dual_norm,
    dual_tuple,
    norm,
    normalize,
    pair,
)
from .terms import (
    DiffOfJoins,
    Gen,
    Join,
    LinearForm,
    Meet,
    Neg,
    Scale,
    Sum,
    Term,
    abs_term,
    eval_term,
    pos_term,
    substitute,
    to_diff_of_joins,
    zero_term,
)
from .grammar import parse_term, print_term
from .hfunc import FMu, GPhi, Harmonic, HFunc, MinSup, TermFunc
from .norm import (
    NormEstimate,
    exact_norm_l1,
    lower_bound,
    search_lower,
    sup_norm,
    upper_bound_term,
)
from .extension import (
    LinOp,
    extend,
    hom_lower_bound,
    op_norm,
    pullback_tuple,
    riesz_kantorovich,
)
from .majorant import DiscreteMeasure, f_mu_eval, find_majorant, verify_fmu_contraction
from .nakano import (
    DirectedFamily,
    directed_sup,
    g_phi_eval,
    g_phi_norm,
    maximality_check,
    strong_nakano_bound,
)
from .constructions import (
    DyadicGrid,
    dyadic_fn,
    fatou_suite,
    harmonic_certificate,
    interval_spread,
    nonmember_distance,
    rademacher_embedding,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
