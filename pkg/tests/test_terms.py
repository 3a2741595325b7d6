import numpy as np
import pytest

from conftest import random_term

from fbl.errors import ParseError, RewriteBudgetExceeded, SpaceMismatch
from fbl.grammar import parse_term, print_term
from fbl.spaces import Space, Vector
from fbl import terms as T

S2 = Space(2, 1)
S3 = Space(3, 1)


def test_eval_examples():
    assert T.eval_term(T.gen(S2, [1, 2]), [3, -1]) == 1.0
    assert T.eval_term(T.abs_term(T.gen(S2, [1, 0])), [-2, 5]) == 2.0
    m = T.Meet(T.abs_term(T.gen(S2, [1, 0])), T.abs_term(T.gen(S2, [0, 1])))
    assert T.eval_term(m, [1, 1]) == 1.0


def test_eval_space_mismatch():
    with pytest.raises(SpaceMismatch):
        T.eval_term(T.gen(S2, [1, 0]), [1, 2, 3])
    mixed = T.Sum(T.gen(S2, [1, 0]), T.gen(S3, [1, 0, 0]))
    with pytest.raises(SpaceMismatch):
        T.term_space(mixed)


def test_positive_homogeneity_relative(rng):
    for _ in range(30):
        t = random_term(rng, S3, depth=3)
        f = rng.normal(size=3)
        base = T.eval_term(t, f)
        for lam in (0.0, 0.5, 2.0, 7.0):
            val = T.eval_term(t, lam * f)
            assert val == pytest.approx(lam * base, rel=1e-12, abs=1e-12)


def test_lattice_identities_pointwise(rng):
    for _ in range(30):
        a = random_term(rng, S2, depth=2)
        b = random_term(rng, S2, depth=2)
        f = rng.normal(size=2)
        assert T.eval_term(T.Join(a, b), f) == max(T.eval_term(a, f), T.eval_term(b, f))
        assert T.eval_term(T.abs_term(a), f) == abs(T.eval_term(a, f))


def test_eval_is_lattice_homomorphism(rng):
    # for a fixed functional, evaluation commutes with the lattice operations
    for _ in range(20):
        a = random_term(rng, S3, depth=2)
        b = random_term(rng, S3, depth=2)
        f = rng.normal(size=3)
        ea, eb = T.eval_term(a, f), T.eval_term(b, f)
        assert T.eval_term(T.Meet(a, b), f) == min(ea, eb)
        assert T.eval_term(T.Sum(a, b), f) == pytest.approx(ea + eb, rel=1e-12)
        assert T.eval_term(T.Scale(2.5, a), f) == pytest.approx(2.5 * ea, rel=1e-12)


def test_diff_of_joins_base_cases():
    d = T.to_diff_of_joins(T.abs_term(T.gen(S2, [1, 0])))
    assert sorted(d.pluses.ravel().tolist()) == [-1.0, 1.0]
    assert d.minuses.tolist() == [[0.0]]

    lin = T.Sum(T.gen(S2, [1, 0]), T.gen(S2, [0, 1]))
    d = T.to_diff_of_joins(lin)
    assert d.pluses.shape == (1, 2)
    assert d.minuses.tolist() == [[0.0, 0.0]]


def test_diff_of_joins_matches_eval(rng):
    for _ in range(100):
        t = random_term(rng, S3, depth=4)
        d = T.to_diff_of_joins(t)
        pts = rng.normal(size=(10, 3))
        direct = T.eval_many(t, pts)
        canon = d.eval_many(pts)
        np.testing.assert_allclose(canon, direct, rtol=1e-9, atol=1e-9)


def test_diff_of_joins_budget():
    t = T.gen(S2, [1, 0])
    deep = t
    for k in range(12):
        deep = T.Join(T.Sum(deep, T.gen(S2, [1.0, float(k)])), T.Neg(deep))
    with pytest.raises(RewriteBudgetExceeded) as err:
        T.to_diff_of_joins(deep, budget=64)
    assert err.value.width > 64


def test_linear_forms_view():
    d = T.to_diff_of_joins(T.abs_term(T.gen(S2, [2, 0])))
    plus, minus = d.linear_forms()
    assert len(plus) == 2 and len(minus) == 1
    assert plus[0].generators == d.generators


def test_substitute_identity_and_zero(rng):
    t = random_term(rng, S2, depth=3)
    same = T.substitute(t, np.eye(2), S2)
    assert same == t

    killed = T.substitute(t, np.zeros((2, 2)), S2)
    pts = rng.normal(size=(20, 2))
    np.testing.assert_array_equal(T.eval_many(killed, pts), np.zeros(20))


def test_substitute_projection_adjoint(rng):
    # pairing with the image equals pairing of the pulled-back functional
    P = np.array([[1.0, 0.0]])
    target = Space(1, 1)
    for _ in range(20):
        t = random_term(rng, S2, depth=3)
        sub = T.substitute(t, P, target)
        f = rng.normal(size=1)
        assert T.eval_term(sub, f) == pytest.approx(
            T.eval_term(t, P.T @ f), rel=1e-12, abs=1e-12
        )


def test_substitute_shape_mismatch():
    with pytest.raises(SpaceMismatch):
        T.substitute(T.gen(S2, [1, 0]), np.eye(3), S2)


def test_parse_examples():
    t = parse_term(r"|d([1,0])|", S2)
    assert t == T.abs_term(T.gen(S2, [1, 0]))

    t = parse_term(r"d([1,0]) \/ 0.5*d([0,1])", S2)
    assert t == T.Join(T.gen(S2, [1, 0]), T.Scale(0.5, T.gen(S2, [0, 1])))

    t = parse_term(r"(d([1,1]) - d([1,0])) /\ d([0,1])", S2)
    # hand evaluation with the pairing <f, v> = sum f_i v_i
    assert T.eval_term(t, [1, 2]) == min((1 + 2) - 1, 2)


def test_parse_errors_have_positions():
    with pytest.raises(ParseError):
        parse_term("d([1,0)", S2)
    with pytest.raises(ParseError):
        parse_term("d([1,0,0])", S2)  # dimension mismatch against the space
    with pytest.raises(ParseError):
        parse_term("2 + d([1,0])", S2)  # nonzero constants are not terms
    with pytest.raises(ParseError):
        parse_term("d([1,0]) @ d([0,1])", S2)


def test_zero_literal_is_zero_function():
    t = parse_term(r"d([1,0]) \/ 0", S2)
    assert T.eval_term(t, [-3, 1]) == 0.0
    assert T.eval_term(t, [3, 1]) == 3.0


def test_print_parse_roundtrip(rng):
    for _ in range(60):
        t = random_term(rng, S2, depth=3)
        text = print_term(t)
        back = parse_term(text, S2)
        assert print_term(back) == text
        pts = rng.normal(size=(10, 2))
        np.testing.assert_allclose(
            T.eval_many(back, pts), T.eval_many(t, pts), rtol=1e-12, atol=1e-12
        )


def test_print_structural_roundtrip_simple():
    cases = [
        T.abs_term(T.gen(S2, [1, 0])),
        T.Neg(T.Scale(2.0, T.gen(S2, [1, 0]))),
        T.Scale(-2.0, T.gen(S2, [0.5, 1])),
        T.Sum(T.gen(S2, [1, 0]), T.Neg(T.gen(S2, [0, 1]))),
        T.Meet(T.Join(T.gen(S2, [1, 0]), T.gen(S2, [0, 1])), T.gen(S2, [1, 1])),
    ]
    for t in cases:
        assert parse_term(print_term(t), S2) == t


def test_generators_dedup():
    t = T.Sum(T.gen(S2, [1, 0]), T.Join(T.gen(S2, [1, 0]), T.gen(S2, [0, 1])))
    gens = T.generators(t)
    assert len(gens) == 2
