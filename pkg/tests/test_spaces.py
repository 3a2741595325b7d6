import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbl.errors import CapExceeded, DimensionMismatch, SpaceMismatch
from fbl.spaces import (
    Functional,
    Space,
    Vector,
    admissibility,
    admissibility_matrix,
    ball_sample_bound,
    cube_vertices,
    dual_norm,
    dual_tuple,
    norm,
    norming_functional,
    normalize,
    pair,
)

L1_2 = Space(2, 1)
L2_2 = Space(2, 2)
LI_3 = Space(3, "inf")


def test_norm_examples():
    assert norm(L1_2, [3, -4]) == 7.0
    assert norm(L2_2, [3, -4]) == 5.0
    assert norm(LI_3, [1, -2, 0]) == 2.0


def test_norm_zero_iff_zero():
    assert norm(L1_2, [0.0, 0.0]) == 0.0
    assert norm(Space(3, "1.5"), [0, 1e-9, 0]) > 0.0


def test_dual_norm_examples():
    assert dual_norm(L1_2, [3, -4]) == 4.0  # dual of l1 is l-infinity
    assert dual_norm(Space(2, "inf"), [3, -4]) == 7.0
    assert dual_norm(L2_2, [3, -4]) == 5.0


def test_pair_examples():
    assert pair(Functional(L1_2, [3, -1]), Vector(L1_2, [1, 2])) == 1.0
    assert pair(Functional(L1_2, [0, 0]), Vector(L1_2, [7, -9])) == 0.0
    assert pair(Functional(L1_2, [1, 1]), Vector(L1_2, [1, 0])) == 1.0


def test_pair_cauchy_schwarz(rng):
    for p in (1, 1.5, 2, math.inf):
        space = Space(4, p)
        for _ in range(50):
            f = rng.normal(size=4)
            v = rng.normal(size=4)
            assert abs(pair(Functional(space, f), Vector(space, v))) <= (
                dual_norm(space, f) * norm(space, v) + 1e-12
            )


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        norm(L1_2, [1, 2, 3])
    with pytest.raises(SpaceMismatch):
        pair(Functional(L1_2, [1, 0]), Vector(LI_3, [1, 0, 0]))


def test_admissibility_examples():
    assert admissibility([Functional(L1_2, [1, 0]), Functional(L1_2, [0, 1])]) == 1.0
    val = admissibility([Functional(L2_2, [1, 0]), Functional(L2_2, [0, 1])])
    assert abs(val - math.sqrt(2)) < 1e-12
    s13 = Space(3, 1)
    assert (
        admissibility([Functional(s13, [1, 0, 0]), Functional(s13, [0.5, 0.5, 0])])
        == 1.5
    )


def test_admissibility_l2_circle_oracle():
    # dense sampling of the unit circle as brute-force lower oracle
    theta = np.linspace(0.0, 2.0 * math.pi, 100000)
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    sampled = np.abs(pts @ np.eye(2).T).sum(axis=1).max()
    exact = admissibility(np.eye(2), L2_2)
    assert exact >= sampled - 1e-12
    assert abs(exact - sampled) < 1e-6


def test_admissibility_empty_and_cap():
    with pytest.raises(ValueError):
        admissibility([], L1_2)
    too_many = np.ones((21, 2))
    with pytest.raises(CapExceeded):
        admissibility(too_many, L1_2)


@pytest.mark.parametrize("p", [1, 1.5, 2, math.inf])
def test_sign_pattern_identity_vs_sampling(p, rng):
    # exact value dominates a 1e5-point sampled lower oracle within 1e-3
    for _ in range(3):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 7))
        space = Space(n, p)
        mat = rng.normal(size=(m, n))
        exact = admissibility(mat, space)
        sampled = ball_sample_bound(space, mat, 100000, rng)
        assert exact >= sampled - 1e-12
        assert exact - sampled < 1e-3 * max(1.0, exact)


@pytest.mark.parametrize("p", [1, math.inf])
def test_vertex_enumeration_exact(p, rng):
    # for p in {1, inf} the ball is a polytope: vertex enumeration is exact
    for _ in range(5):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 7))
        space = Space(n, p)
        mat = rng.normal(size=(m, n))
        if p == 1:
            verts = np.vstack([np.eye(n), -np.eye(n)])
        else:
            verts = cube_vertices(n)
        oracle = np.abs(verts @ mat.T).sum(axis=1).max()
        assert abs(admissibility(mat, space) - oracle) <= 1e-12


def test_positive_homogeneity_exact(rng):
    for p in (1, 2, math.inf):
        space = Space(3, p)
        mat = rng.normal(size=(3, 3))
        base = admissibility(mat, space)
        for lam in (0.5, 2.0, 4.0):
            assert abs(admissibility(lam * mat, space) - lam * base) <= 1e-12 * max(
                1.0, base
            )


def test_monotone_in_appending(rng):
    for p in (1, 1.5, 2, math.inf):
        space = Space(3, p)
        mat = rng.normal(size=(2, 3))
        base = admissibility(mat, space)
        grown = admissibility(np.vstack([mat, rng.normal(size=3)]), space)
        assert grown >= base - 1e-12


def test_p1_closed_form(rng):
    space = Space(4, 1)
    mat = rng.normal(size=(5, 4))
    assert admissibility(mat, space) == np.abs(mat).sum(axis=0).max()


def test_normalize_examples():
    t = normalize([Functional(L1_2, [2, 0])])
    assert t.admissibility == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(t.matrix(), [[1.0, 0.0]])

    t = normalize(np.eye(2), L2_2)
    assert np.allclose(t.matrix(), np.eye(2) / math.sqrt(2))

    again = normalize(t.matrix(), L2_2)
    assert np.allclose(again.matrix(), t.matrix(), atol=1e-12)

    with pytest.raises(ValueError):
        normalize(np.zeros((2, 2)), L1_2)


def test_dual_tuple_caches_admissibility():
    tup = dual_tuple(np.eye(2), L2_2)
    assert abs(tup.admissibility - admissibility_matrix(L2_2, tup.matrix())) < 1e-9
    payload = tup.to_json()
    assert payload["functionals"] == [[1.0, 0.0], [0.0, 1.0]]


def test_norming_functional_attains(rng):
    for p in (1, 1.5, 2, math.inf):
        space = Space(4, p)
        for _ in range(20):
            v = rng.normal(size=4)
            fstar = norming_functional(space, v)
            assert dual_norm(space, fstar) <= 1.0 + 1e-12
            assert pair(fstar, Vector(space, v)) == pytest.approx(
                norm(space, v), abs=1e-10
            )


def test_space_tags():
    assert Space.from_tag("1:3").tag() == "1:3"
    assert Space.from_tag("inf:2").tag() == "inf:2"
    assert Space.from_tag("1.5:3").tag() == "1.5:3"
    assert Space.from_tag("3/2:3") == Space.from_tag("1.5:3")
    assert Space.from_tag("2:4").dual() == Space.from_tag("2:4")
    assert Space.from_tag("1:3").dual().p == math.inf
    with pytest.raises(ValueError):
        Space.from_tag("0.5:3")
    with pytest.raises(ValueError):
        Space(0, 1)


@settings(max_examples=50, deadline=None)
@given(
    coords=st.lists(st.floats(-100, 100), min_size=3, max_size=3),
    lam=st.floats(0, 50),
)
def test_norm_homogeneous_hypothesis(coords, lam):
    space = Space(3, "1.5")
    base = norm(space, coords)
    scaled = norm(space, [lam * c for c in coords])
    assert scaled == pytest.approx(lam * base, rel=1e-9, abs=1e-9)
