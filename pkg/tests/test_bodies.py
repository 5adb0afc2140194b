from math import pi

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import elliprg

from isosections.bodies import (
    Ball,
    ConvexBodySupport,
    Cube,
    DegenerateBodyError,
    Ellipsoid,
    SphericalFunction,
    ball,
    body_of_revolution_residual,
    constant_width_body,
    ellipsoid_plus_ball,
    fit_ellipsoid,
    minkowski_sum,
    polar_radial,
    projection_support,
    radial_harmonic_perturbation,
    restrict_to_equator,
    revolution_axis_search,
    star_cube,
    unconditionality_residual,
)
from isosections.quadrature import build_sphere_quadrature, equator_frame, equator_quadrature


def ellipsoid_area(a, b, c):
    """Carlson-form closed expression for the surface area."""
    return 4 * pi * a * b * c * elliprg(1 / a ** 2, 1 / b ** 2, 1 / c ** 2)


def test_carlson_oracle_matches_spheroid_formula():
    a, c = 1.0, 2.0
    e = np.sqrt(1 - a ** 2 / c ** 2)
    prolate = 2 * pi * a ** 2 * (1 + c / (a * e) * np.arcsin(e))
    assert abs(ellipsoid_area(a, a, c) - prolate) < 1e-12 * prolate


@pytest.mark.parametrize("axes", [(1, 1, 2), (1, 2, 3), (0.5, 1, 1.5)])
def test_ellipsoid_area_routes_agree(axes, quad3):
    E = Ellipsoid.from_axes(axes)
    ref = ellipsoid_area(*axes)
    boundary = E.surface_area(quad3)
    curvature = float(quad3.integrate(E.curvature_function(quad3.nodes)))
    assert abs(boundary - ref) < 1e-6 * ref
    assert abs(curvature - ref) < 1e-6 * ref


def test_gauss_curvature_matches_finite_differences():
    E = Ellipsoid.from_axes((1, 2, 3))
    u = np.array([[0.3, -0.5, 0.8], [1, 0, 0], [0.2, 0.9, 0.1]])
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    fd = ConvexBodySupport.curvature_function(E, u, step=1e-3)
    assert np.allclose(fd, E.curvature_function(u), rtol=1e-5)


def test_closed_form_areas():
    assert abs(Ball(2.0, 3).surface_area() - 16 * pi) < 1e-12
    assert Cube(1.0, 3).surface_area() == 24.0


def test_steiner_formula(coarse3, quad3):
    E = Ellipsoid.from_axes((1, 2, 3))
    r = 0.7
    S = minkowski_sum(E, Ball(r, 3))
    lhs = S.surface_area(quad3)
    W = float(quad3.integrate(E.h(quad3.nodes)))
    rhs = E.surface_area(quad3) + 2 * r * W + 4 * pi * r ** 2
    assert abs(lhs - rhs) < 1e-5 * rhs


def test_projection_support_is_projected_ellipse():
    E = Ellipsoid.from_axes((1, 2, 3))
    fr = equator_frame([0.2, 0.4, 0.9])
    h = projection_support(E, fr)
    v = equator_quadrature(fr, 4).local
    P = fr.basis @ E.M @ fr.basis.T
    assert np.allclose(h(v), np.sqrt(np.einsum("ij,jk,ik->i", v, P, v)))


def test_polar_of_ellipsoid(quad3):
    M = np.diag([1.0, 4.0, 9.0])
    rho = polar_radial(Ellipsoid(M)).radial
    ref = Ellipsoid(np.linalg.inv(M)).radial_function()
    assert np.allclose(rho(quad3.nodes), ref(quad3.nodes), rtol=1e-13)


def test_polar_rejects_nonpositive_support():
    bad = ConvexBodySupport(SphericalFunction(lambda x: x[:, 0] + 0.5, 3))
    with pytest.raises(DegenerateBodyError):
        polar_radial(bad)


def test_linear_image_of_ball_is_ellipsoid(quad3, rng):
    T = rng.standard_normal((3, 3))
    rho = ball(1.0).linear_image(T).radial
    ref = Ellipsoid(T @ T.T).radial_function()
    assert np.allclose(rho(quad3.nodes), ref(quad3.nodes), rtol=1e-12)


matrices = st.lists(st.floats(-2, 2), min_size=9, max_size=9).map(
    lambda v: np.array(v).reshape(3, 3)).filter(
    lambda T: abs(np.linalg.det(T)) > 0.3 and np.linalg.cond(T) < 8)


@given(matrices)
def test_linear_image_volume(T):
    q = build_sphere_quadrature(3, 16)
    K = radial_harmonic_perturbation(1.0, 0.2, 2)
    d = abs(np.linalg.det(T))
    assert abs(K.linear_image(T).volume(q) - d * K.volume(q)) < 1e-6 * d * K.volume(q)


def test_restrict_to_equator():
    f = SphericalFunction(lambda x: x[:, 0] ** 2 + 2 * x[:, 2], 3)
    fr = equator_frame([0.0, 0.0, 1.0])
    g = restrict_to_equator(f, fr)
    assert g.dimension == 2
    v = np.array([[0.6, 0.8]])
    assert abs(g(v[0]) - f(v[0] @ fr.basis)) < 1e-15
    with pytest.raises(ValueError):
        restrict_to_equator(SphericalFunction(lambda x: x[:, 0], 2), fr)


def test_parity_propagation():
    e = SphericalFunction(lambda x: x[:, 0] ** 2, 3, "even")
    o = SphericalFunction(lambda x: x[:, 1], 3, "odd")
    assert (e + e).parity == "even"
    assert (e * o).parity == "odd"
    assert (o * o).parity == "even"
    assert (e + o).parity == "none"
    assert e.reflect()([0.1, 0.2, 0.3]) == e([0.1, 0.2, 0.3])


def test_fit_ellipsoid(quad3):
    E = Ellipsoid.from_axes((1, 2, 3))
    M, res = fit_ellipsoid(E.support, quad3)
    assert res < 1e-12 and np.allclose(M, E.M, atol=1e-10)
    _, res_sum = fit_ellipsoid(ellipsoid_plus_ball().support, quad3)
    assert res_sum > 1e-3


def test_unconditionality(quad3):
    cube = Cube().support
    assert unconditionality_residual(cube, quad=quad3) < 1e-14
    R = np.linalg.qr(np.random.default_rng(0).standard_normal((3, 3)))[0]
    tilted = Ellipsoid(R @ np.diag([1.0, 4.0, 9.0]) @ R.T).support
    assert unconditionality_residual(tilted, quad=quad3) > 1e-2
    assert unconditionality_residual(tilted, basis=R.T, quad=quad3) < 1e-12


def test_body_of_revolution():
    rev = Ellipsoid.from_axes((1, 1, 2)).support
    assert body_of_revolution_residual(rev, [0, 0, 1]) < 1e-14
    assert body_of_revolution_residual(rev, [1, 0, 0]) > 0.1
    res, axis = revolution_axis_search(rev)
    assert res < 1e-14 and abs(abs(axis[2]) - 1) < 1e-14
    assert body_of_revolution_residual(ellipsoid_plus_ball().support) > 1e-3


def test_constant_width_body(quad3):
    K = constant_width_body(2.0, 0.05)
    s = K.h(quad3.nodes) + K.h(-quad3.nodes)
    assert np.ptp(s) < 1e-14 and abs(s[0] - 2.0) < 1e-14
    assert K.sublinearity_residual(500) < 1e-12
    assert np.ptp(K.h(quad3.nodes)) > 0.01


def test_harmonic_perturbation_parity(quad3):
    K = radial_harmonic_perturbation(1.0, 0.2, 2)
    res, _ = K.radial.parity_residual(quad3.nodes)
    assert res < 1e-15
    odd = radial_harmonic_perturbation(1.0, 0.2, 3)
    assert odd.radial.parity_residual(quad3.nodes)[0] > 0.1
