import numpy as np
import pytest

from chargeq.equilibrium import PolylineContinuum


def make_polyline(rng: np.random.Generator) -> PolylineContinuum:
    """A random polyline from -1 to +1 with interior vertices off the axis."""
    k = int(rng.integers(1, 4))
    re = np.sort(rng.uniform(-0.95, 0.95, k))
    im = rng.uniform(0.05, 0.8, k) * rng.choice([-1.0, 1.0], k)
    vertices = (-1 + 0j,) + tuple(complex(a, b) for a, b in zip(re, im)) + (1 + 0j,)
    return PolylineContinuum(vertices)


@pytest.fixture
def polyline_factory():
    return make_polyline
