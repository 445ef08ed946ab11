"""Shared fixtures: a deterministic generator and small state factories."""

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=777))


def random_unit(rng, dim: int) -> np.ndarray:
    """A Haar-ish random unit vector with complex entries."""
    vec = rng.normal(size=dim) + 1.0j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)
