import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from curvedopt.bodies import Ball, Ellipsoid, HalfspacePolytope, LpBall, VertexPolytope

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def zoo():
    """One instance of every body family, including asymmetric polytopes."""
    return {
        "ball": Ball(1.5, 3),
        "ellipsoid": Ellipsoid([[4.0, 1.0], [1.0, 2.0]]),
        "l1": LpBall(1, 1.0, 3),
        "l3": LpBall(3, 2.0, 2),
        "linf": LpBall(np.inf, 1.0, 2),
        "cube": HalfspacePolytope.cube(3),
        "halfspace": HalfspacePolytope([[1, 2], [-1, 1], [0, -1], [2, -1]], [1.0, 1.5, 0.8, 2.0]),
        "simplex": VertexPolytope([[1, 0], [0, 1], [-1, -1]]),
        "hexagon": VertexPolytope([[np.cos(a), np.sin(a)] for a in np.arange(6) * np.pi / 3]),
    }


@pytest.fixture(params=sorted(zoo()))
def body(request):
    return zoo()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
