from math import factorial, gamma, pi

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isosections.bodies import (
    Ball,
    Cube,
    Ellipsoid,
    SphericalFunction,
    UnsupportedBodyError,
    ball,
    radial_harmonic_perturbation,
    star_cube,
)
from isosections.integral_geometry import (
    AsymmetricBodyError,
    PreconditionError,
    b_functional,
    b_functional_exact,
    b_functional_section,
    busemann_check,
    busemann_rhs_quadrature,
    calibrate_constants,
    centroid_body,
    centroid_body_support,
    cosine_transform,
    epsilon_isotropic_body,
    gamma_surface_area,
    legendre_isotropic_check,
    mean_width_functional,
    section_b_exact,
    stability_deviation,
    stability_sweep,
    theorem_chain,
    two_function_rigidity,
    urysohn_gap,
    weil_check,
)
from isosections.quadrature import build_sphere_quadrature, equator_frame, sample_directions, sphere_area
from isosections.symmetry import axis_rotation, group_closure, random_trig_polynomial, symmetrize


def uniform_in_ball(N, n, rng):
    """Rejection sampling from the unit cube: an oracle independent of the
    polar sampler."""
    out = []
    while sum(len(o) for o in out) < N:
        x = rng.uniform(-1, 1, (2 * N, n))
        out.append(x[np.sum(x * x, axis=1) <= 1])
    return np.concatenate(out)[:N]


# -- constants -----------------------------------------------------------------

def test_constants_closed_forms(constants3):
    C = constants3
    assert abs(C.k_cosine - 2 * pi) < 1e-8
    assert abs(C.c_urysohn - (4 * pi) ** 0.5 / (4 * pi)) < 1e-12
    assert abs(C.c_density - 2.0) < 1e-10
    assert abs(C.c_legendre - 3 / 6 ** (1 / 3)) < 1e-10
    assert abs(C.c_bar - 3 / 6 ** (1 / 3)) < 1e-10
    assert abs(C.c_busemann - 0.5) < 1e-10
    assert all(v > 0 and np.isfinite(v) for k, v in C.as_dict().items()
               if k.startswith(("c_", "k_")) and k != "c_busemann_stderr")


def busemann_closed_form(n):
    """c = |S|^{n-1} / (|S^{n-1}| |S^{n-2}|^{n-1} E|det|) with Gaussian
    moments of chi variables."""
    m = n - 1
    chi = lambda k: np.sqrt(2) * gamma((k + 1) / 2) / gamma(k / 2)
    e_det = np.prod([chi(k) for k in range(1, m + 1)]) / chi(m) ** m
    return sphere_area(n) ** (n - 1) / (
        sphere_area(n) * sphere_area(m) ** m * e_det)


def test_busemann_constant_closed_form(constants3):
    assert abs(busemann_closed_form(3) - 0.5) < 1e-14
    C4 = calibrate_constants(4, samples=200_000, seed=1)
    assert abs(C4.c_busemann - busemann_closed_form(4)) < 3 * C4.c_busemann_stderr
    assert abs(C4.c_density - 8 / 6) < 0.02


def test_calibration_reproducible():
    a = calibrate_constants(3, 8).as_dict()
    assert a == calibrate_constants(3, 8).as_dict()
    b1 = calibrate_constants(4, samples=50_000, seed=1)
    b2 = calibrate_constants(4, samples=50_000, seed=2)
    s = np.hypot(b1.c_busemann_stderr, b2.c_busemann_stderr)
    assert abs(b1.c_busemann - b2.c_busemann) < 3 * s


# -- the B functional ------------------------------------------------------------

def test_b_ball_closed_form_and_estimators(quad3):
    ref = 6 * (4 * pi / 15) ** 3
    assert abs(b_functional_exact(ball(1.0), quad3) - ref) < 1e-12 * ref
    est = b_functional(ball(1.0), 400_000, seed=5)
    assert abs(est.value - ref) < 3 * est.stderr
    rng = np.random.default_rng(0)
    N = 400_000
    pts = [uniform_in_ball(N, 3, rng) for _ in range(3)]
    g = np.linalg.det(np.stack(pts, axis=1)) ** 2 * (4 * pi / 3) ** 3
    assert abs(g.mean() - ref) < 3 * g.std() / np.sqrt(N)


def test_b_reproducible_and_seed_dependent():
    a = b_functional(star_cube(), 50_000, seed=3)
    assert a == b_functional(star_cube(), 50_000, seed=3)
    b = b_functional(star_cube(), 50_000, seed=4)
    assert a.value != b.value
    assert abs(a.value - b.value) < 3 * np.hypot(a.stderr, b.stderr)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_b_scaling_law(lam, quad3):
    K = radial_harmonic_perturbation(1.0, 0.2, 2)
    exact = b_functional_exact(K.scaled(lam), quad3) / b_functional_exact(K, quad3)
    assert abs(exact / lam ** 15 - 1) < 1e-10
    a = b_functional(K, 200_000, 1)
    b = b_functional(K.scaled(lam), 200_000, 2)
    ratio = b.value / a.value
    sig = ratio * np.hypot(a.rel_stderr, b.rel_stderr)
    assert abs(ratio - lam ** 15) < 3 * sig


def test_b_invariance_exact(quad3, rng):
    K = radial_harmonic_perturbation(1.0, 0.2, 2)
    T = rng.standard_normal((3, 3))
    T /= abs(np.linalg.det(T)) ** (1 / 3)
    q = build_sphere_quadrature(3, 24)
    assert abs(b_functional_exact(K.linear_image(T), q)
               / b_functional_exact(K, q) - 1) < 1e-6


def test_sections():
    E = Ellipsoid.from_axes((1, 1, 2)).as_star_body()
    e1, e3 = equator_frame([1.0, 0, 0]), equator_frame([0, 0, 1.0])
    ratio = section_b_exact(E, e1) / section_b_exact(E, e3)
    assert abs(ratio - 16) < 1e-9
    a = b_functional_section(E, e1, 200_000, 1)
    b = b_functional_section(E, e3, 200_000, 2)
    # 2D rejection oracle for the unit disk
    rng = np.random.default_rng(3)
    N = 400_000
    p, q = uniform_in_ball(N, 2, rng), uniform_in_ball(N, 2, rng)
    d = (p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]) ** 2 * pi ** 2
    assert abs(b.value - d.mean()) < 3 * np.hypot(b.stderr, d.std() / np.sqrt(N))
    assert abs(a.value / b.value - 16) < 3 * 16 * np.hypot(a.rel_stderr, b.rel_stderr)
    cube = star_cube()
    face = section_b_exact(cube, equator_frame([0, 0, 1.0]))
    diag = section_b_exact(cube, equator_frame([1.0, 1.0, 1.0]))
    assert abs(face - 2 * (4 / 3) ** 2) < 1e-10
    assert abs(diag - face) > 0.1


def test_ball_sections_agree():
    K = ball(1.3)
    vals = [b_functional_section(K, equator_frame(u), 100_000, 7).value
            for u in sample_directions(3, 3, 0)]
    ses = [b_functional_section(K, equator_frame(u), 100_000, 7).stderr
           for u in sample_directions(3, 3, 0)]
    assert np.ptp(vals) < 3 * np.sqrt(2) * max(ses)


# -- centroid bodies ---------------------------------------------------------------

def test_centroid_body_of_ball(quad3):
    U = sample_directions(3, 20, 1)
    h = centroid_body_support(ball(1.0), U, quad3)
    assert np.ptp(h) < 1e-8 * h[0] and abs(h[0] - pi / 2) < 1e-12
    rng = np.random.default_rng(2)
    x = uniform_in_ball(2_000_000, 3, rng)
    g = np.abs(x @ U[0]) * 4 * pi / 3
    assert abs(g.mean() - pi / 2) < 3 * g.std() / np.sqrt(len(g))


def test_centroid_body_monotone(quad3):
    K = radial_harmonic_perturbation(1.0, 0.2, 2)
    rho = K.radial(quad3.nodes)
    U = sample_directions(3, 10, 3)
    h = centroid_body_support(K, U, quad3)
    lo = centroid_body_support(ball(rho.min()), U, quad3)
    hi = centroid_body_support(ball(rho.max()), U, quad3)
    assert np.all(lo <= h) and np.all(h <= hi)


def test_density_lemma_pointwise(quad3, constants3):
    # curvature function of Gamma K by finite differences vs c1 B(K cap u^perp)
    K = Ellipsoid.from_axes((1, 1.2, 1.5)).as_star_body()
    G = centroid_body(K, quad3)
    for u in sample_directions(3, 3, 4):
        fd = G.curvature_function(u, step=2e-3)[0]
        ref = constants3.c_density * section_b_exact(K, equator_frame(u))
        assert abs(fd / ref - 1) < 1e-4


def test_gamma_surface_area(constants3):
    r = pi / 2
    assert abs(gamma_surface_area(ball(1.0)) - 4 * pi * r ** 2) < 1e-10
    K = Ellipsoid.from_axes((1, 1, 2)).as_star_body()
    s1, s2 = gamma_surface_area(K), gamma_surface_area(K.scaled(2.0))
    assert abs(s2 / s1 - 2 ** 8) < 1e-8 * 2 ** 8
    poles = sample_directions(3, 12, 0)
    ex = gamma_surface_area(K, poles)
    mc = gamma_surface_area(K, poles, method="mc", samples=20_000, seed=1)
    assert mc.value > 0 and abs(mc.value - ex) < 3 * mc.stderr


# -- widths and the Urysohn gap ------------------------------------------------------

def test_mean_width(quad3):
    assert abs(mean_width_functional(Ball(1.0), quad3) - 4 * pi) < 1e-9
    assert abs(mean_width_functional(Ball(2.5), quad3) - 10 * pi) < 1e-9
    assert abs(mean_width_functional(Cube(), quad3) - 6 * pi) < 1e-9


def test_urysohn_gap(quad3, constants3):
    for r in (0.5, 1.0, 3.0):
        L = Ball(r)
        assert abs(urysohn_gap(L, quad3, constants3)) < 1e-6 * mean_width_functional(L, quad3)
    E = Ellipsoid.from_axes((1, 1, 2))
    assert urysohn_gap(E, quad3, constants3) > 0.01 * mean_width_functional(E, quad3)


def test_urysohn_gap_of_centroid_bodies_shrinks():
    gaps = [theorem_chain(radial_harmonic_perturbation(1.0, a, 2), 10).urysohn_gap
            for a in (0.2, 0.1, 0.05)]
    assert gaps[0] > gaps[1] > gaps[2] > 0


# -- the chain ----------------------------------------------------------------------

@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_chain_on_balls(r):
    rep = theorem_chain(ball(r))
    assert rep.verdict == "ball-consistent"
    assert all(abs(v) < 1e-4 for v in rep.slacks.values())
    assert rep.lhs_mass <= rep.holder_rhs * (1 + 1e-10)


@pytest.mark.parametrize("K", [Ellipsoid.from_axes((1, 1, 1.5)).as_star_body(),
                               star_cube(), radial_harmonic_perturbation(1, 0.15, 4)],
                         ids=["ellipsoid", "cube", "harmonic"])
def test_chain_soundness_on_non_balls(K):
    rep = theorem_chain(K, 10)
    s = rep.slacks
    tol = 1e-4
    assert rep.verdict == "non-ball"
    assert s["section_isotropy"] > -tol and s["holder"] > -tol
    assert s["urysohn"] > 1e-4 and rep.urysohn_gap > -tol
    assert abs(s["density"]) < 1e-8 and abs(s["closure"]) < 1e-3
    # outside the isotropic-sections hypothesis the chain runs the other way
    assert rep.lhs_mass >= rep.holder_rhs - tol * rep.lhs_mass
    assert not rep.hypothesis_holds


def test_chain_rejects_asymmetric_bodies():
    with pytest.raises(AsymmetricBodyError):
        theorem_chain(radial_harmonic_perturbation(1.0, 0.1, 3))


# -- cosine transform and stability ---------------------------------------------------

def test_cosine_transform_basics(quad3):
    one = SphericalFunction.constant(1.0, 3)
    U = sample_directions(3, 5, 0)
    assert np.allclose(cosine_transform(one, U, quad3), 2 * pi, atol=1e-12)
    f = SphericalFunction(lambda x: 1 + x[:, 0] ** 2 + 0.3 * x[:, 1] * x[:, 2], 3)
    assert np.allclose(cosine_transform(f, U, quad3), cosine_transform(f, -U, quad3))
    r = 1.7
    assert abs(cosine_transform(ball(r).power(4), U[0], quad3) - r ** 4 * 2 * pi) < 1e-10


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 1000))
def test_cosine_transform_linear(a, b, seed):
    q = build_sphere_quadrature(3, 6)
    f = random_trig_polynomial(3, seed)
    g = random_trig_polynomial(3, seed + 1)
    u = sample_directions(3, 1, seed)[0]
    lhs = cosine_transform(f * a + g * b, u, q)
    rhs = a * cosine_transform(f, u, q) + b * cosine_transform(g, u, q)
    assert abs(lhs - rhs) < 1e-10 * max(1, abs(lhs))


def test_stability_sweep():
    rows, bound = stability_sweep()
    assert stability_deviation(SphericalFunction.constant(1.0, 3)).sup_dev < 1e-6
    sup = [r["sup_dev"] for r in rows]
    eps = [r["eps_max"] for r in rows]
    assert all(np.diff(sup) > 0) and all(np.diff(eps) > 0)
    assert np.isfinite(bound) and bound > 0
    assert not any(stability_deviation(
        SphericalFunction(lambda x, a=a: 1 + a * (x[:, 0] ** 2 - 1 / 3), 3, "even")
    ).contradiction for a in (0.05, 0.4))


def test_stability_odd_part_is_invisible():
    f = SphericalFunction(lambda x: 1 + 0.5 * x[:, 0], 3)
    res = stability_deviation(f)
    assert res.sup_dev < 1e-10 and res.eps_max < 1e-10
    assert res.evenness_residual > 0.1 and not res.contradiction


def test_stability_delta_from_excluded_poles():
    P = build_sphere_quadrature(3, 4)
    f = SphericalFunction(lambda x: 1 + 0.4 * x[:, 0] ** 2, 3, "even")
    full = stability_deviation(f, P)
    capped = stability_deviation(f, P, eps_cap=np.median(full.epsilons))
    assert 0 < capped.delta < 4 * pi and capped.eps_max < full.eps_max


# -- Busemann and rigidity ----------------------------------------------------------------

def test_busemann_quadrature_calibration(constants3):
    ones = [SphericalFunction.constant(1.0, 3)] * 2
    rhs = busemann_rhs_quadrature(ones)
    assert abs(constants3.c_busemann * rhs - (4 * pi) ** 2) < 1e-9


def test_busemann_mc_vs_quadrature(constants3):
    F = [random_trig_polynomial(3, 11, even=True), random_trig_polynomial(3, 12)]
    mc = busemann_check(F, 200_000, 3, constants3)
    det = busemann_check(F, constants=constants3, method="quadrature")
    assert det.rel_err < 1e-10
    assert mc.rel_err < 3 * mc.rel_sigma


def rotation_invariant_function(seed=0):
    R = axis_rotation([0, 0, 1.0], 2 * pi / 3)
    return symmetrize(random_trig_polynomial(3, seed), group_closure([R], 3)), R


def test_two_function_rigidity():
    f, R = rotation_invariant_function()
    res = two_function_rigidity(f, f)
    assert res.verdict == "f=g" and res.residual_same < 1e-9
    assert two_function_rigidity(f, f.rotate(R.T)).verdict == "f=g"
    assert two_function_rigidity(f, f.reflect()).verdict == "f=g(-x)"
    g = f + SphericalFunction(lambda x: x[:, 2] ** 2, 3)
    bad = two_function_rigidity(f, g)
    assert bad.verdict == "hypothesis-violated"
    assert bad.worst_equator_residual > 0.1 and abs(bad.worst_pole[2]) < 0.99
    even = SphericalFunction(lambda x: 1 + x[:, 0] ** 2, 3, "even")
    assert two_function_rigidity(even, even).verdict == "both"


# -- Weil, Legendre, epsilon-isotropic bodies ------------------------------------------------

def test_weil_ratio_constant():
    U = sample_directions(3, 20, 2)
    r112 = [weil_check(Ellipsoid.from_axes((1, 1, 2)), u).ratio for u in U]
    assert np.ptp(r112) / np.mean(r112) < 1e-2
    r123 = [weil_check(Ellipsoid.from_axes((1, 2, 3)), u).ratio for u in U[:5]]
    rb = [weil_check(Ellipsoid(np.eye(3)), u).ratio for u in U[:3]]
    assert abs(np.mean(r123) / np.mean(r112) - 1) < 1e-2
    assert np.ptp(rb) < 1e-6 and abs(rb[0] - 0.5) < 1e-4
    with pytest.raises(UnsupportedBodyError):
        weil_check(Cube(), U[0])


def test_legendre_identity(quad3, constants3):
    ex = legendre_isotropic_check(ball(1.0), quad3, method="exact")
    assert ex.rel_err < 1e-6
    mc = legendre_isotropic_check(ball(2.0), quad3, 200_000, 1)
    assert mc.rel_err < 3 * mc.rel_sigma
    with pytest.raises(PreconditionError) as info:
        legendre_isotropic_check(Ellipsoid.from_axes((1, 1, 2)).as_star_body(), quad3)
    assert info.value.values["anisotropy"] > 0.1


def test_epsilon_isotropic_body(quad3):
    eps_ball = epsilon_isotropic_body(ball(1.0), quad3, method="mc", samples=200_000)
    assert abs(eps_ball.epsilon) < 2 * eps_ball.stderr + 1e-12
    seq = [epsilon_isotropic_body(Ellipsoid.from_axes((1, 1, 1 + t)).as_star_body(), quad3)
           for t in (0.1, 0.2, 0.4)]
    assert seq[0].epsilon < seq[1].epsilon < seq[2].epsilon
    for e in seq:
        assert abs(e.epsilon - e.epsilon_function) < 1e-12
    cube = epsilon_isotropic_body(star_cube(), quad3, method="mc", samples=200_000)
    assert abs(cube.epsilon) < 3 * cube.stderr
    with pytest.raises(PreconditionError):
        epsilon_isotropic_body(radial_harmonic_perturbation(1.0, 0.3, 1), quad3)
