import math

import numpy as np
import pytest

from conftest import random_term

from fbl.errors import FBLError, InadmissibleTuple
from fbl.hfunc import (
    DyadicBlockSum,
    FMu,
    GPhi,
    Harmonic,
    MinOf,
    MinSup,
    TermFunc,
    homogeneity_defect,
)
from fbl.norm import (
    exact_norm_l1,
    lower_bound,
    search_lower,
    sup_norm,
    upper_bound,
    upper_bound_term,
)
from fbl.spaces import (
    Functional,
    Space,
    Vector,
    dual_tuple,
    norm as space_norm,
    norming_functional,
    normalize,
)
from fbl import terms as T

L1_2 = Space(2, 1)
L2_2 = Space(2, 2)


def test_hfunc_homogeneity_sampled():
    funcs = [
        GPhi(Space(3, 1), [1.0, -2.0, 0.5]),
        FMu(Space(3, 2), np.eye(3), np.full(3, 1 / 3)),
        Harmonic(5),
        MinSup(4),
        DyadicBlockSum(2, 4),
    ]
    for f in funcs:
        assert homogeneity_defect(f, seed=3) <= 1e-9


def test_lower_bound_isometry_case():
    x = Vector(L2_2, [3, -4])
    cert = dual_tuple([norming_functional(L2_2, x)])
    assert lower_bound(T.Gen(x), cert) == pytest.approx(5.0, abs=1e-12)


def test_lower_bound_two_coordinates():
    f = T.Sum(T.abs_term(T.gen(L1_2, [1, 0])), T.abs_term(T.gen(L1_2, [0, 1])))
    cert = dual_tuple(np.eye(2), L1_2)
    assert lower_bound(f, cert) == 2.0


def test_lower_bound_refuses_bad_tuples():
    f = T.gen(L1_2, [1, 0])
    with pytest.raises(ValueError):
        lower_bound(f, dual_tuple(np.zeros((2, 2)), L1_2))
    with pytest.raises(InadmissibleTuple):
        lower_bound(f, dual_tuple(2 * np.eye(2), L1_2))


def test_search_lower_linear_cases():
    est = search_lower(T.gen(L2_2, [3, -4]), m_max=1, restarts=2, seed=0)
    assert est.lower == pytest.approx(5.0, abs=1e-6)
    est = search_lower(GPhi(L1_2, [1, 1]), m_max=2, restarts=3, seed=0)
    assert est.lower == pytest.approx(2.0, abs=1e-6)


def test_search_lower_harmonic():
    est = search_lower(Harmonic(8), m_max=8, restarts=2, seed=0)
    target = sum(1.0 / k for k in range(1, 9))
    assert est.lower >= target - 1e-9
    assert est.certificate.admissibility <= 1 + 1e-9


def test_search_deterministic_and_worker_independent():
    f = TermFunc(
        T.Join(T.abs_term(T.gen(L2_2, [1, 0.3])), T.abs_term(T.gen(L2_2, [-0.2, 1])))
    )
    a = search_lower(f, m_max=3, restarts=4, seed=42)
    b = search_lower(f, m_max=3, restarts=4, seed=42)
    c = search_lower(f, m_max=3, restarts=4, seed=42, workers=3)
    assert a.lower == b.lower == c.lower
    assert np.array_equal(a.certificate.matrix(), c.certificate.matrix())


def test_upper_bound_term_rules():
    assert upper_bound_term(T.gen(L1_2, [3, -4])) == 7.0
    assert upper_bound_term(T.abs_term(T.gen(L1_2, [1, 0]))) == 1.0
    join = T.Join(T.abs_term(T.gen(L1_2, [1, 0])), T.abs_term(T.gen(L1_2, [0, 1])))
    assert upper_bound_term(join) == 2.0
    assert upper_bound_term(T.Scale(-3.0, T.gen(L1_2, [1, 0]))) == 3.0


def test_upper_bound_linear_is_tight():
    est = search_lower(T.gen(L1_2, [3, -4]), m_max=1, restarts=2, seed=0)
    assert est.lower == pytest.approx(7.0, abs=1e-6)
    assert est.upper == 7.0


def test_upper_bound_closed_forms():
    assert upper_bound(GPhi(L1_2, [1, -2])) == 3.0
    assert upper_bound(FMu(L1_2, np.eye(2), [0.5, 0.5])) == 1.0
    assert upper_bound(Harmonic(3)) == math.inf


def test_abs_certificates_transfer_exactly(rng):
    for _ in range(10):
        t = random_term(rng, L1_2, depth=3)
        est = search_lower(TermFunc(t), m_max=2, restarts=2, seed=1)
        mirrored = lower_bound(TermFunc(T.abs_term(t)), est.certificate)
        assert mirrored == est.lower


def test_sup_norm_examples():
    assert sup_norm(GPhi(L1_2, [1, 1]), seed=0) == 2.0
    meet = T.Meet(T.abs_term(T.gen(L1_2, [1, 0])), T.abs_term(T.gen(L1_2, [0, 1])))
    assert sup_norm(TermFunc(meet), seed=0) == 1.0
    assert sup_norm(TermFunc(T.gen(L2_2, [3, -4])), seed=0) == pytest.approx(
        5.0, rel=1e-3
    )


def test_sup_norm_below_upper_bound(rng):
    for _ in range(20):
        t = random_term(rng, Space(3, 1), depth=3)
        f = TermFunc(t)
        assert sup_norm(f, seed=0) <= upper_bound_term(t) + 1e-9


def test_exact_norm_l1_examples():
    join = TermFunc(
        T.Join(T.abs_term(T.gen(L1_2, [1, 0])), T.abs_term(T.gen(L1_2, [0, 1])))
    )
    res = exact_norm_l1(join, L1_2)
    assert res.value == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(res.phi, [1.0, 1.0], atol=1e-9)
    assert res.gap <= 1e-6

    meet = TermFunc(
        T.Meet(T.abs_term(T.gen(L1_2, [1, 0])), T.abs_term(T.gen(L1_2, [0, 1])))
    )
    res = exact_norm_l1(meet, L1_2)
    assert res.value == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(res.phi, [0.5, 0.5], atol=1e-7)

    phi0 = np.array([0.25, 0.75])
    res = exact_norm_l1(GPhi(L1_2, phi0), L1_2)
    assert res.value == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(res.phi, phi0, atol=1e-9)


def test_exact_norm_l1_meet_matches_grid_oracle():
    # brute-force LP over a phi grid as the independent route
    meet = TermFunc(
        T.Meet(T.abs_term(T.gen(L1_2, [1, 0])), T.abs_term(T.gen(L1_2, [0, 1])))
    )
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(4000, 2))
    pts /= np.abs(pts).max(axis=1)[:, None]
    fvals = meet.eval_many(pts)
    best = math.inf
    grid = np.linspace(0.0, 1.5, 61)
    for a in grid:
        for b in grid:
            if (a * np.abs(pts[:, 0]) + b * np.abs(pts[:, 1]) >= fvals - 1e-12).all():
                best = min(best, a + b)
    res = exact_norm_l1(meet, L1_2)
    assert res.value == pytest.approx(best, abs=0.06)


def test_exact_norm_l1_rejects_negative():
    with pytest.raises(FBLError):
        exact_norm_l1(TermFunc(T.gen(L1_2, [1, 0])), L1_2)


def test_exact_norm_vs_search_random_positive(rng):
    for _ in range(10):
        n = int(rng.integers(2, 4))
        space = Space(n, 1)
        t = random_term(rng, space, depth=3, positive=True)
        res = exact_norm_l1(TermFunc(t, space), space)
        assert res.lower <= res.value + 1e-9
        assert res.gap <= 1e-4 * max(1.0, res.value)


def test_norm_estimate_json_roundtrip():
    est = search_lower(T.gen(L2_2, [3, -4]), m_max=1, restarts=1, seed=0)
    payload = est.to_json()
    assert set(payload) == {
        "lower", "upper", "certificate", "admissibility", "seed", "iterations"
    }
    assert payload["lower"] == pytest.approx(5.0, abs=1e-6)

    inf_payload = search_lower(Harmonic(3), m_max=2, restarts=1, seed=0).to_json()
    assert inf_payload["upper"] is None
