import numpy as np
import pytest

from fbl.spaces import Space, Vector
from fbl import terms as T


def random_term(rng, space, depth=3, positive=False):
    """Random term over the space; with positive=True the result is >= 0."""
    if depth <= 0 or rng.random() < 0.25:
        v = rng.uniform(-1.0, 1.0, space.dim)
        leaf = T.Gen(Vector(space, v))
        return T.abs_term(leaf) if positive else leaf
    roll = rng.random()
    if positive:
        if roll < 0.25:
            return T.abs_term(random_term(rng, space, depth - 1))
        if roll < 0.45:
            return T.Sum(
                random_term(rng, space, depth - 1, True),
                random_term(rng, space, depth - 1, True),
            )
        if roll < 0.65:
            return T.Join(
                random_term(rng, space, depth - 1, True),
                random_term(rng, space, depth - 1, True),
            )
        if roll < 0.85:
            return T.Meet(
                random_term(rng, space, depth - 1, True),
                random_term(rng, space, depth - 1, True),
            )
        return T.Scale(float(rng.uniform(0.0, 2.0)), random_term(rng, space, depth - 1, True))
    if roll < 0.2:
        return T.Scale(float(rng.uniform(-2.0, 2.0)), random_term(rng, space, depth - 1))
    if roll < 0.4:
        return T.Sum(
            random_term(rng, space, depth - 1), random_term(rng, space, depth - 1)
        )
    if roll < 0.55:
        return T.Neg(random_term(rng, space, depth - 1))
    if roll < 0.78:
        return T.Join(
            random_term(rng, space, depth - 1), random_term(rng, space, depth - 1)
        )
    return T.Meet(
        random_term(rng, space, depth - 1), random_term(rng, space, depth - 1)
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
