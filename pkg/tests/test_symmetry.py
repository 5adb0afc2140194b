from math import pi

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isosections.bodies import SphericalFunction
from isosections.quadrature import DimensionError, build_sphere_quadrature
from isosections.symmetry import (
    GroupOrderError,
    InvalidRotationError,
    NonOrthogonalError,
    antipodal_group,
    antipodal_reflection_group,
    axis_rotation,
    builtin_group,
    complete_symmetry_check,
    cube_group,
    cyclic_group,
    dihedral_group,
    group_closure,
    icosahedral_group,
    invariance_residual,
    invariant_quadratic_space,
    is_complete,
    planar_completeness,
    random_planar_groups,
    random_rotation,
    random_trig_polynomial,
    reflection_group,
    rotation_2d,
    rotation_equator_check,
    simplex_group,
    symmetrize,
)


def reynolds_dimension(G):
    """Oracle: rank of the group average applied to every symmetric matrix
    unit, using all elements rather than generators."""
    n = G.dimension
    S = G.stacked()
    imgs = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1
            imgs.append(np.einsum("gki,kl,glj->ij", S, E, S).ravel() / len(S))
    return int(np.linalg.matrix_rank(np.array(imgs), tol=1e-8))


CASES = [
    (lambda: cube_group(3), 48, 1),
    (lambda: cube_group(4), 384, 1),
    (lambda: simplex_group(3), 24, 1),
    (icosahedral_group, 120, 1),
    (lambda: dihedral_group(5), 10, 1),
    (lambda: cyclic_group(5), 5, 1),
    (lambda: antipodal_group(3), 2, 6),
    (lambda: reflection_group(2), 2, 2),
    (lambda: antipodal_reflection_group(2), 4, 2),
]


@pytest.mark.parametrize("make,order,dim", CASES)
def test_orders_and_invariant_dimensions(make, order, dim):
    G = make()
    assert G.order == order
    assert G.closure_residual() < 1e-9
    d, mats = invariant_quadratic_space(G)
    assert d == dim == reynolds_dimension(G)
    assert is_complete(G) == (dim == 1)
    for A in mats:
        for g in G.elements:
            assert np.abs(g.matrix.T @ A @ g.matrix - A).max() < 1e-10


def test_complete_group_basis_is_identity():
    _, mats = invariant_quadratic_space(cube_group(3))
    assert np.abs(mats[0] - np.eye(3) / np.sqrt(3)).max() < 1e-12


def test_antipodal_reflection_has_four_elements():
    G = antipodal_reflection_group(2)
    R = np.diag([-1.0, 1.0])
    for M in (np.eye(2), -np.eye(2), R, -R):
        assert G.contains(M)


def test_planar_criterion_agrees():
    groups = random_planar_groups(20, seed=3)
    assert len({g.order for g in groups}) > 3
    for G in groups:
        assert planar_completeness(G) == is_complete(G)
    with pytest.raises(DimensionError):
        planar_completeness(cube_group(3))


@given(st.integers(0, 10_000))
def test_completeness_conjugation_invariant(seed):
    rng = np.random.default_rng(seed)
    R = random_rotation(3, rng)
    for G in (cube_group(3), antipodal_group(3), reflection_group(3)):
        H = G.conjugate(R)
        assert H.closure_residual() < 1e-9
        assert invariant_quadratic_space(H)[0] == invariant_quadratic_space(G)[0]


def test_extension_is_monotone():
    G = reflection_group(3)
    H = G.extended([axis_rotation([1.0, 0, 0], pi / 2)])
    K = H.extended([axis_rotation([0, 0, 1.0], pi / 2)])
    dims = [invariant_quadratic_space(X)[0] for X in (G, H, K)]
    assert dims[0] >= dims[1] >= dims[2] == 1
    assert G.order < H.order < K.order


def test_invariance_residual_examples():
    q = build_sphere_quadrature(2, 12)
    f = SphericalFunction(lambda x: x[:, 0] ** 2, 2)
    # sampled at nodes; the nearest node to an axis sits ~4e-3 away
    assert abs(invariance_residual(f, rotation_2d(pi / 2), q) - 1.0) < 1e-4
    assert invariance_residual(f, -np.eye(2), q) < 1e-15
    with pytest.raises(DimensionError):
        invariance_residual(f, np.eye(3), q)


def test_complete_symmetry_forces_isotropy(quad3):
    G = cube_group(3)
    f = symmetrize(random_trig_polynomial(3, 5), G)
    rep = complete_symmetry_check(f, G, quad3)
    assert rep.complete and rep.predicted_isotropic and rep.consistent
    assert rep.anisotropy < 1e-8 and rep.invariance_residual < 1e-8
    # an incomplete group does not force isotropy
    H = reflection_group(3)
    g = symmetrize(random_trig_polynomial(3, 5), H)
    rep = complete_symmetry_check(g, H, quad3)
    assert not rep.predicted_isotropic and rep.anisotropy > 1e-3 and rep.consistent


def test_rotation_equator_check():
    const = SphericalFunction.constant(1.5, 3)
    r = rotation_equator_check(const, 2 * pi / 5, poles=50)
    assert r.passed and r.oscillation < 1e-12
    f = SphericalFunction(lambda x: 1 + x[:, 2] ** 2, 3)
    P = np.array([[0, 0, 1.0], [0, 0, -1.0], [1.0, 0, 0], [1, 1, 1 / np.sqrt(2)]])
    rep = rotation_equator_check(f, 2 * pi / 5, poles=P)
    assert not rep.passed and rep.oscillation is None
    assert rep.failing_poles == 2 and np.all(rep.residuals[:2] < 1e-12)
    varying = rotation_equator_check(const, lambda u: 1 + u[0] ** 2, poles=20)
    assert varying.passed
    for bad in (0.0, pi, 2 * pi):
        with pytest.raises(InvalidRotationError):
            rotation_equator_check(const, bad, poles=5)


def test_closure_errors():
    with pytest.raises(NonOrthogonalError):
        group_closure([np.array([[1.0, 0.1], [0, 1.0]])])
    with pytest.raises(GroupOrderError) as info:
        group_closure([rotation_2d(1.0)], max_order=500)
    assert info.value.cap == 500


def test_builtin_lookup():
    assert builtin_group("dihedral-7", 2).order == 14
    assert builtin_group("cube", 4).order == 384
    with pytest.raises(KeyError):
        builtin_group("nope")
    with pytest.raises(ValueError):
        builtin_group("cyclic-x")
    with pytest.raises(DimensionError):
        builtin_group("icosahedral", 4)
