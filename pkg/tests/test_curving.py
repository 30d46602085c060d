import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from curvedopt.bodies import Ball, Ellipsoid, HalfspacePolytope, LpBall, VertexPolytope
from curvedopt.certify import check_two_convex
from curvedopt.curving import (
    CurvedBody,
    MinkowskiRounding,
    approximation_factor,
    choose_t_for_eps,
    curved_gauge,
    curved_gauge_subgradient,
    polar_decomposition_max,
    regular_simplex_normals,
    weak_optimize,
)
from curvedopt.errors import IterationLimit, UnsupportedKind, ZeroPoint

from conftest import zoo

CUBE2 = HalfspacePolytope.cube(2)


def boundary_cloud(body, n, seed=0):
    """Dense sample of the boundary of ``body`` by radial projection."""
    z = np.random.default_rng(seed).standard_normal((n, body.dim))
    return z / np.asarray(body.gauge(z))[:, None]


# gauge -----------------------------------------------------------------------


def test_cube_example():
    Kt = CurvedBody(CUBE2, 0.5)
    assert curved_gauge(Kt, [1.0, 1.0]) == pytest.approx(math.sqrt(1.25), rel=1e-12)


def test_endpoints():
    x = np.array([0.3, -0.8])
    assert curved_gauge(CurvedBody(CUBE2, 0.0), x) == pytest.approx(0.8)
    assert curved_gauge(CurvedBody(CUBE2, 1.0), x) == pytest.approx(np.linalg.norm(x))


def test_subgradient_examples():
    g = curved_gauge_subgradient(CurvedBody(CUBE2, 1.0), [3.0, 4.0])
    np.testing.assert_allclose(g, [0.6, 0.8])
    g = curved_gauge_subgradient(CurvedBody(CUBE2, 0.5), [1.0, 0.0])
    np.testing.assert_allclose(g, [1.0, 0.0])


def test_subgradient_at_origin_raises():
    with pytest.raises(ZeroPoint):
        curved_gauge_subgradient(CurvedBody(CUBE2, 0.5), [0.0, 0.0])


def test_polar_is_unsupported():
    with pytest.raises(UnsupportedKind):
        CurvedBody(CUBE2, 0.5).polar()


def test_invalid_parameters():
    with pytest.raises(ValueError):
        CurvedBody(CUBE2, -0.1)
    with pytest.raises(ValueError):
        CurvedBody(CUBE2, 0.5, r=2.0)


def test_gauge_matches_polar_enumeration():
    # independent oracle: sup over a fine grid of sqrt(1-a) u + sqrt(a) v,
    # u a vertex of sqrt(1-t^2) K°, v the best point of t B(1/r)
    t = 0.7
    Kt = CurvedBody(CUBE2, t)
    verts = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
    a = np.linspace(0, 1, 200001)
    for y in np.random.default_rng(3).standard_normal((25, 2)):
        A = math.sqrt(1 - t * t) * np.max(verts @ y)
        B = t * np.linalg.norm(y)
        brute = np.max(np.sqrt(1 - a) * A + np.sqrt(a) * B)
        assert Kt.gauge(y) == pytest.approx(brute, rel=1e-9)


# sandwich ------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(zoo()))
@pytest.mark.parametrize("t", [0.1, 0.5, 0.9, 1.0])
def test_sandwich(name, t):
    K = zoo()[name]
    Kt = CurvedBody(K, t)
    r, R = K.sandwich_radii()
    x = np.random.default_rng(1).standard_normal((2000, K.dim))
    gK, gt, n2 = np.asarray(K.gauge(x)), np.asarray(Kt.gauge(x)), np.linalg.norm(x, axis=1)
    tol = 1e-9
    assert np.all(gt <= n2 / r * (1 + tol))  # B(r) ⊆ K_t
    assert np.all(gK <= gt * (1 + tol))  # K_t ⊆ K
    s = approximation_factor(r, R, t)
    assert np.all(gt <= s * gK * (1 + tol))  # K ⊆ s K_t


@given(
    t=st.floats(0.0, 1.0),
    x=arrays(float, 3, elements=st.floats(-1e3, 1e3)).filter(lambda v: np.linalg.norm(v) > 1e-6),
)
def test_gauge_properties(t, x):
    Kt = CurvedBody(HalfspacePolytope.cube(3), t)
    g = Kt.gauge(x)
    assert Kt.gauge(2.5 * x) == pytest.approx(2.5 * g, rel=1e-12)
    sub = Kt.gauge_subgradient(x)
    assert sub @ x == pytest.approx(g, rel=1e-9)
    # a gauge subgradient lies in the polar, so <sub, y> <= ||y|| everywhere
    y = np.array([0.3, -1.1, 0.7])
    assert sub @ y <= Kt.gauge(y) * (1 + 1e-9) + 1e-12


# support via the fast route ---------------------------------------------------


@pytest.mark.parametrize("name", sorted(zoo()))
def test_support_argmax_on_boundary_and_optimal(name):
    K = zoo()[name]
    Kt = CurvedBody(K, 0.6)
    cloud = boundary_cloud(Kt, 200000)
    for c in np.random.default_rng(5).standard_normal((5, K.dim)):
        x = Kt.support_argmax(c)
        assert Kt.gauge(x) == pytest.approx(1.0, abs=1e-7)
        assert c @ x == pytest.approx(Kt.support(c), rel=1e-9)
        assert c @ x >= np.max(cloud @ c) - 1e-9


def test_closed_form_matches_generic():
    E = Ellipsoid([[4.0, 1.0], [1.0, 2.0]])
    Kt = CurvedBody(E, 0.4)
    assert Kt._closed is not None
    c = np.array([0.3, -1.2])
    brute = np.max(boundary_cloud(Kt, 400000) @ c)
    assert Kt.support(c) == pytest.approx(brute, rel=1e-6)
    assert Kt.support(c) >= brute - 1e-12


# polar decomposition ---------------------------------------------------------


def test_decomposition_ball():
    cert = polar_decomposition_max(CurvedBody(Ball(1.0, 2), 0.5), [1.0, 0.0])
    assert cert.value == pytest.approx(1.0)
    assert cert.in_polar(CurvedBody(Ball(1.0, 2), 0.5))


def test_decomposition_cube():
    Kt = CurvedBody(CUBE2, 0.5)
    cert = polar_decomposition_max(Kt, [1.0, 1.0])
    assert cert.value == pytest.approx(math.sqrt(1.25), rel=1e-12)
    assert cert.alpha_star == pytest.approx(0.5 / 1.25)
    assert cert.in_polar(Kt)


def test_decomposition_t_zero():
    cert = polar_decomposition_max(CurvedBody(CUBE2, 0.0), [1.0, 0.0])
    assert cert.alpha_star == 0.0
    assert cert.value == pytest.approx(1.0)


def test_decomposition_origin_raises():
    with pytest.raises(ZeroPoint):
        polar_decomposition_max(CurvedBody(CUBE2, 0.5), [0.0, 0.0])


@given(
    name=st.sampled_from(sorted(zoo())),
    t=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_decomposition_value_is_gauge(name, t, seed):
    K = zoo()[name]
    Kt = CurvedBody(K, t)
    y = np.random.default_rng(seed).standard_normal((8, K.dim))
    cert = polar_decomposition_max(Kt, y)
    np.testing.assert_allclose(cert.value, Kt.gauge(y), rtol=1e-9)
    np.testing.assert_allclose(np.einsum("ij,ij->i", y, cert.point), cert.value, rtol=1e-9)
    assert np.all(cert.in_polar(Kt))


# weak optimization -------------------------------------------------------------


def test_regular_simplex_normals():
    for d in (1, 2, 3, 6):
        N = regular_simplex_normals(d)
        assert N.shape == (d + 1, d)
        np.testing.assert_allclose(np.linalg.norm(N, axis=1), 1.0)
        np.testing.assert_allclose(N.sum(axis=0), 0.0, atol=1e-12)


def test_weak_optimize_ball():
    res = weak_optimize(CurvedBody(Ball(1.0, 2), 0.5), np.array([1.0, 0.0]), 1e-6)
    assert res.value == pytest.approx(1.0, abs=1e-6)
    assert res.gap <= 1e-6
    assert np.linalg.norm(res.point) <= 1 + 1e-9


@pytest.mark.parametrize("name", ["cube", "simplex", "l3", "ellipsoid"])
def test_weak_optimize_within_two_delta(name):
    K = zoo()[name]
    Kt = CurvedBody(K, 0.5)
    cloud = boundary_cloud(Kt, 200000, seed=7)
    delta = 1e-4
    for c in np.random.default_rng(11).standard_normal((4, K.dim)):
        res = weak_optimize(Kt, c, delta)
        assert Kt.gauge(res.point) <= 1 + 1e-9
        assert res.value >= np.max(cloud @ c) - 2 * delta
        assert res.value >= Kt.support(c) - delta
        assert res.upper_bound >= Kt.support(c) - 1e-9


def test_weak_optimize_t_zero_matches_base():
    K = zoo()["halfspace"]
    c = np.array([0.4, 0.9])
    res = weak_optimize(CurvedBody(K, 0.0), c, 1e-8)
    assert res.value == pytest.approx(K.support(c), abs=1e-8)


def test_weak_optimize_zero_direction():
    res = weak_optimize(CUBE2, np.zeros(2), 1e-6)
    assert res.value == 0.0


def test_weak_optimize_iteration_limit_carries_result():
    with pytest.raises(IterationLimit) as info:
        weak_optimize(CurvedBody(Ball(1.0, 3), 0.5), np.array([1.0, 2.0, 3.0]), 1e-12, max_iters=2)
    res = info.value.result
    assert res is not None and res.gap > 1e-12
    assert np.linalg.norm(res.point) <= 1 + 1e-9


# choice of t ----------------------------------------------------------------


def test_choose_t_examples():
    assert choose_t_for_eps(1.0, 1.0, 0.1) == (0.0, "degenerate")
    t, flag = choose_t_for_eps(1.0, math.sqrt(2), 0.1)
    assert flag is None and t == pytest.approx(math.sqrt(0.2))
    assert choose_t_for_eps(1.0, math.sqrt(2), 0.9) == (1.0, "clamped")
    with pytest.raises(ValueError):
        choose_t_for_eps(1.0, 2.0, 1.5)


@given(ratio=st.floats(1.01, 50.0), eps=st.floats(1e-4, 0.99))
def test_choose_t_delivers_eps(ratio, eps):
    t, flag = choose_t_for_eps(1.0, ratio, eps)
    s = approximation_factor(1.0, ratio, t)
    if flag is None:
        # sqrt(1 + 2 eps) <= 1 + eps
        assert s <= 1 + eps + 1e-12


# Minkowski rounding is not strongly convex ------------------------------------


def test_minkowski_rounding_fails_strong_convexity():
    body = MinkowskiRounding(CUBE2, 0.5)
    rep = check_two_convex(body, 1e-4, n=20000, seed=0)
    assert not rep.passed
    x, y = rep.witness["x"], rep.witness["y"]
    # (1 - t) [-1, 1]^2 + t B(1) keeps the flat faces |x_i| = 1 on |x_j| <= 1 - t
    face = np.isclose(np.abs(x), 1.0, atol=1e-9) & np.isclose(np.abs(y), 1.0, atol=1e-9)
    assert face.any()
    assert rep.empirical_modulus <= 1e-9


def test_minkowski_support_exact():
    body = MinkowskiRounding(CUBE2, 0.5)
    c = np.array([1.0, 0.0])
    assert body.support(c) == pytest.approx(1.0)
    x = body.support_argmax(c)
    assert c @ x == pytest.approx(1.0)
