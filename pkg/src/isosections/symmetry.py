"""Finite subgroups of O(n), completeness, and invariance checks.

A group ``G`` is complete when every origin-symmetric ellipsoid invariant
under ``G`` is a ball, i.e. when the only symmetric matrices with
``T^T A T = A`` for all ``T`` in ``G`` are multiples of the identity.
"""

from dataclasses import asdict, dataclass, field
from math import factorial, pi

import numpy as np

from .bodies import SphericalFunction
from .isotropy import centroid, moment_matrix, pole_set
from .quadrature import (
    DEFAULT_RESOLUTION,
    DimensionError,
    build_sphere_quadrature,
    equator_frame,
    equator_quadrature,
    sample_directions,
)

ORTHOGONALITY_TOL = 1e-10
MATCH_TOL = 1e-8
RANK_TOL = 1e-8
DEFAULT_MAX_ORDER = 10_000


class NonOrthogonalError(ValueError):
    pass


class GroupOrderError(ValueError):
    """Closure exceeded the order cap."""

    def __init__(self, cap):
        super().__init__(f"group order exceeds max_order={cap}")
        self.cap = cap


class InvalidRotationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OrthogonalElement:
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        Q = np.array(self.matrix, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise NonOrthogonalError("element must be a square matrix")
        err = np.linalg.norm(Q.T @ Q - np.eye(Q.shape[0]))
        if not err < ORTHOGONALITY_TOL:
            raise NonOrthogonalError(f"element {self.name!r} is not orthogonal "
                                     f"(|Q^T Q - I| = {err:.2e})")
        Q.setflags(write=False)
        object.__setattr__(self, "matrix", Q)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))

    def __matmul__(self, other):
        return OrthogonalElement(self.matrix @ other.matrix)

    def inverse(self):
        return OrthogonalElement(self.matrix.T, self.name and self.name + "^-1")


@dataclass(frozen=True, eq=False)
class FiniteSymmetryGroup:
    dimension: int
    elements: tuple
    generators: tuple
    name: str = ""

    @property
    def order(self):
        return len(self.elements)

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(self.elements)

    def stacked(self):
        return np.stack([g.matrix for g in self.elements])

    def contains(self, M, tol=MATCH_TOL):
        M = M.matrix if isinstance(M, OrthogonalElement) else np.asarray(M)
        return bool(np.min(np.max(np.abs(self.stacked() - M), axis=(1, 2))) < tol)

    def closure_residual(self):
        """Largest distance from a product or inverse to the element set."""
        S = self.stacked()
        worst = 0.0
        for A in S:
            cand = np.concatenate([A @ S, A.T[None]])
            d = np.max(np.abs(cand[:, None] - S[None]), axis=(2, 3))
            worst = max(worst, float(np.max(np.min(d, axis=1))))
        return worst

    def conjugate(self, R):
        """The group ``R G R^T``."""
        R = np.asarray(R, dtype=float)
        conj = lambda g: OrthogonalElement(R @ g.matrix @ R.T, g.name)
        return FiniteSymmetryGroup(self.dimension,
                                   tuple(conj(g) for g in self.elements),
                                   tuple(conj(g) for g in self.generators),
                                   f"conj({self.name})")

    def extended(self, extra, max_order=DEFAULT_MAX_ORDER):
        """The group generated by ``G`` and ``extra``."""
        return group_closure(list(self.generators) + list(extra), max_order,
                             name=f"<{self.name},+{len(extra)}>")


def _as_element(g):
    return g if isinstance(g, OrthogonalElement) else OrthogonalElement(g)


def group_closure(generators, max_order=DEFAULT_MAX_ORDER, name=""):
    """Breadth-first closure of ``generators`` under multiplication.

    Two matrices are identified when every entry agrees within 1e-8.

    Raises
    ------
    NonOrthogonalError
        For a generator that is not orthogonal.
    GroupOrderError
        When more than ``max_order`` distinct elements are produced.
    """
    gens = [_as_element(g) for g in generators]
    if not gens:
        raise ValueError("at least one generator is required")
    n = gens[0].dimension
    if any(g.dimension != n for g in gens):
        raise DimensionError("generators have different dimensions")
    found = np.empty((max_order + 1, n, n))
    found[0] = np.eye(n)
    count = 1
    frontier = [np.eye(n)]
    G = [g.matrix for g in gens]
    while frontier:
        nxt = []
        for A in frontier:
            for T in G:
                M = T @ A
                if np.min(np.max(np.abs(found[:count] - M), axis=(1, 2))) < MATCH_TOL:
                    continue
                if count == max_order:
                    raise GroupOrderError(max_order)
                found[count] = M
                count += 1
                nxt.append(M)
        frontier = nxt
    elements = tuple(OrthogonalElement(found[i]) for i in range(count))
    return FiniteSymmetryGroup(n, elements, tuple(gens), name)


def _sym_basis(n):
    basis = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            if i == j:
                E[i, i] = 1.0
            else:
                E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(E)
    return basis


def invariant_quadratic_space(G):
    """Symmetric matrices ``A`` with ``T^T A T = A`` for every generator.

    Returns ``(dimension, basis)`` with a Frobenius-orthonormal basis.  The
    rank decision uses singular values below 1e-8.
    """
    n = G.dimension
    basis = _sym_basis(n)
    gens = G.generators or G.elements
    # column k holds T^T E_k T - E_k for every generator, stacked
    blocks = []
    for g in gens:
        T = g.matrix
        blocks.append(np.stack([(T.T @ E @ T - E).ravel() for E in basis], axis=1))
    L = np.vstack(blocks)
    _, s, Vt = np.linalg.svd(L)
    s_full = np.zeros(len(basis))
    s_full[: len(s)] = s
    null = Vt[s_full < RANK_TOL]
    mats = [sum(c * E for c, E in zip(v, basis)) for v in null]
    if len(mats) == 1 and np.trace(mats[0]) < 0:
        mats[0] = -mats[0]
    return len(mats), mats


def is_complete(G):
    return invariant_quadratic_space(G)[0] == 1


def planar_completeness(G):
    """True iff ``G`` contains a rotation other than ``+-I`` (plane only)."""
    if G.dimension != 2:
        raise DimensionError("the planar criterion needs n = 2")
    for g in G.elements:
        M = g.matrix
        if g.det > 0 and not (np.allclose(M, np.eye(2), atol=MATCH_TOL)
                              or np.allclose(M, -np.eye(2), atol=MATCH_TOL)):
            return True
    return False


def invariance_residual(f, T, quad):
    """``max |f(T x) - f(x)|`` over the quadrature nodes."""
    M = T.matrix if isinstance(T, OrthogonalElement) else np.asarray(T, float)
    if M.shape[0] != f.dimension:
        raise DimensionError("element and function dimensions disagree")
    x = quad.nodes
    return float(np.max(np.abs(f(x @ M.T) - f(x))))


@dataclass
class SymmetryReport:
    group: str
    order: int
    complete: bool
    invariant_dimension: int
    centroid_norm: float
    invariance_residual: float
    anisotropy: float
    form_residual: float
    predicted_isotropic: bool
    consistent: bool
    tolerance: float

    def as_dict(self):
        return asdict(self)


def complete_symmetry_check(f, G, quad=None, tolerance=1e-8):
    """Complete symmetry of ``f`` and the isotropy it forces.

    ``form_residual`` is ``max_T |T^T M T - M| / |M|`` for the moment matrix
    ``M``: the quadratic form ``u -> u^T M u`` is ``G``-invariant whenever
    ``f`` is, hence a multiple of ``|u|^2`` when ``G`` is complete.  The
    report is ``consistent`` unless isotropy was predicted and not observed.
    """
    quad = quad or build_sphere_quadrature(f.dimension)
    vals = f(quad.nodes)
    scale = max(1.0, float(np.max(np.abs(vals))))
    c = float(np.linalg.norm(centroid(vals, quad))) / scale
    inv = max(invariance_residual(f, g, quad) for g in G.generators) / scale
    mm = moment_matrix(vals, quad)
    M = mm.matrix
    norm = np.linalg.norm(M) or 1.0
    form = max(float(np.linalg.norm(g.matrix.T @ M @ g.matrix - M)) / norm
               for g in G.elements)
    dim, _ = invariant_quadratic_space(G)
    complete = dim == 1
    aniso = mm.anisotropy()
    predicted = complete and inv < tolerance and c < tolerance
    consistent = (not predicted) or aniso < tolerance
    return SymmetryReport(G.name, G.order, complete, dim, c, inv, aniso, form,
                          predicted, consistent, tolerance)


@dataclass
class RotationEquatorReport:
    poles: np.ndarray = field(repr=False)
    angles: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    max_residual: float
    passed: bool
    oscillation: float | None
    failing_poles: int
    tolerance: float


def _angle_values(angle_map, P):
    if callable(angle_map):
        return np.array([float(angle_map(u)) for u in P])
    return np.full(len(P), float(angle_map))


def rotation_equator_check(f, angle_map, poles=200, resolution=DEFAULT_RESOLUTION,
                           tolerance=1e-8, seed=0):
    """Equator rotation invariance of ``f`` on ``S^2`` and its consequence.

    For each pole ``u`` the rotation ``T_u`` of ``u^perp`` by
    ``angle_map(u)`` (a number or a callable) is applied to the equator and
    ``max |f(T_u x) - f(x)|`` is recorded.  When every residual is below
    ``tolerance`` the global oscillation ``max f - min f`` is reported.

    Raises
    ------
    InvalidRotationError
        If an angle is congruent to 0 or pi (``T_u = +-I``).
    """
    if f.dimension != 3:
        raise DimensionError("rotation_equator_check is stated on S^2")
    if isinstance(poles, (int, np.integer)):
        P = sample_directions(3, int(poles), seed)
    else:
        P, _ = pole_set(poles)
    theta = _angle_values(angle_map, P)
    r = np.mod(theta, pi)
    if np.any(np.minimum(r, pi - r) < 1e-9):
        raise InvalidRotationError("rotation angles must avoid 0 and pi")
    rule = equator_quadrature(equator_frame([0.0, 0.0, 1.0]), resolution)
    v = rule.local
    res = np.empty(len(P))
    for k, (u, t) in enumerate(zip(P, theta)):
        B = equator_frame(u).basis
        c, s = np.cos(t), np.sin(t)
        w = v @ np.array([[c, s], [-s, c]])
        res[k] = np.max(np.abs(f(w @ B) - f(v @ B)))
    passed = bool(np.max(res) < tolerance)
    osc = None
    if passed:
        vals = f(build_sphere_quadrature(3, resolution).nodes)
        osc = float(np.ptp(vals))
    return RotationEquatorReport(P, theta, res, float(np.max(res)), passed, osc,
                                 int(np.sum(res >= tolerance)), tolerance)


# ---------------------------------------------------------------------------
# built-in groups


def rotation_2d(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def reflection_matrix(normal):
    v = np.asarray(normal, dtype=float)
    v = v / np.linalg.norm(v)
    return np.eye(len(v)) - 2.0 * np.outer(v, v)


def axis_rotation(axis, angle):
    """Rotation of ``R^3`` by ``angle`` about ``axis`` (Rodrigues)."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def cube_group(n=3):
    """Signed permutations (hyperoctahedral group), order ``2^n n!``."""
    gens = []
    for i in range(n - 1):
        P = np.eye(n)
        P[[i, i + 1]] = P[[i + 1, i]]
        gens.append(P)
    gens.append(reflection_matrix(np.eye(n)[0]))
    return group_closure(gens, 2 ** n * factorial(n), name=f"cube-{n}")


def simplex_vertices(n):
    """Vertices of a regular simplex in ``R^n`` centred at the origin."""
    E = np.eye(n + 1) - 1.0 / (n + 1)
    # orthonormal basis of the sum-zero hyperplane of R^{n+1}
    V = np.linalg.qr(E[:, :n])[0]
    return E @ V


def simplex_group(n=3):
    """Symmetries of the regular simplex, order ``(n+1)!``."""
    E = np.eye(n + 1) - 1.0 / (n + 1)
    V = np.linalg.qr(E[:, :n])[0]
    gens = []
    for i in range(n):
        P = np.eye(n + 1)
        P[[i, i + 1]] = P[[i + 1, i]]
        gens.append(V.T @ P @ V)
    return group_closure(gens, factorial(n + 1), name=f"simplex-{n}")


def icosahedral_group():
    """Full icosahedral group (rotations and ``-I``), order 120."""
    phi = (1 + np.sqrt(5.0)) / 2
    five = axis_rotation([0.0, 1.0, phi], 2 * pi / 5)
    face = np.array([0.0, 1.0, phi]) + np.array([0.0, -1.0, phi]) + np.array([phi, 0.0, 1.0])
    three = axis_rotation(face, 2 * pi / 3)
    return group_closure([five, three, -np.eye(3)], 120, name="icosahedral")


def cyclic_group(k):
    return group_closure([rotation_2d(2 * pi / k)], k, name=f"cyclic-{k}")


def dihedral_group(k):
    """Symmetries of the regular k-gon, order ``2k``."""
    return group_closure([rotation_2d(2 * pi / k), np.diag([1.0, -1.0])], 2 * k,
                         name=f"dihedral-{k}")


def antipodal_group(n=3):
    return group_closure([-np.eye(n)], 2, name="antipodal")


def reflection_group(n=3, normal=None):
    normal = np.eye(n)[0] if normal is None else normal
    return group_closure([reflection_matrix(normal)], 2, name="reflection")


def antipodal_reflection_group(n=2, normal=None):
    """The group generated by ``-I`` and one reflection: ``{I, -I, R, -R}``."""
    normal = np.eye(n)[0] if normal is None else normal
    return group_closure([-np.eye(n), reflection_matrix(normal)], 4,
                         name="antipodal-reflection")


def random_planar_groups(count=20, max_k=8, seed=0):
    """Cyclic and dihedral groups of random order, conjugated by random
    rotations."""
    rng = np.random.default_rng(seed)
    groups = []
    for _ in range(count):
        k = int(rng.integers(1, max_k + 1))
        base = dihedral_group(k) if rng.uniform() < 0.5 else cyclic_group(k)
        groups.append(base.conjugate(rotation_2d(rng.uniform(0, 2 * pi))))
    return groups


def random_rotation(n, rng):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def symmetrize(f, G):
    """Average of ``f`` over ``G``; invariant under every element."""
    mats = [g.matrix for g in G.elements]

    def F(x):
        return sum(f(x @ M.T) for M in mats) / len(mats)

    return SphericalFunction(F, f.dimension, "unknown", f"sym_{G.name}({f.name})")


def random_trig_polynomial(n, seed=0, terms=6, amplitude=0.3, even=False):
    """``2 + sum_k a_k cos(<w_k, x> + phi_k)``, strictly positive.

    ``even=True`` drops the phases, which makes every term even.
    """
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((terms, n)) * 1.5
    a = rng.uniform(-1.0, 1.0, terms) * amplitude / terms * 3
    phi = np.zeros(terms) if even else rng.uniform(0, 2 * pi, terms)

    def f(x):
        return 2.0 + np.cos(x @ W.T + phi) @ a

    return SphericalFunction(f, n, "even" if even else "unknown",
                             f"trig(seed={seed})")


BUILTIN_GROUPS = {
    "cube": cube_group,
    "simplex": simplex_group,
    "icosahedral": lambda n=3: icosahedral_group(),
    "antipodal": antipodal_group,
    "reflection": reflection_group,
    "antipodal-reflection": antipodal_reflection_group,
}


def builtin_group(name, n=3):
    """Look up ``cube``, ``simplex``, ``icosahedral``, ``dihedral-k``,
    ``cyclic-k``, ``antipodal``, ``reflection`` or ``antipodal-reflection``."""
    if name.startswith(("dihedral-", "cyclic-")):
        kind, _, k = name.partition("-")
        if not k.isdigit() or int(k) < 1:
            raise ValueError(f"bad group order in {name!r}")
        return dihedral_group(int(k)) if kind == "dihedral" else cyclic_group(int(k))
    if name not in BUILTIN_GROUPS:
        raise KeyError(f"unknown group {name!r}")
    if name == "icosahedral" and n != 3:
        raise DimensionError("the icosahedral group lives in R^3")
    return BUILTIN_GROUPS[name](n)
