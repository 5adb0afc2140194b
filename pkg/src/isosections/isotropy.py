"""Centroids, second moments and (epsilon-)isotropy of spherical functions.

A function ``f`` on a sphere ``S^{m-1}`` is isotropic when the signed measure
``f dx`` has its centroid at the origin and a moment matrix
``int f(x) x x^T dx`` proportional to the identity.
"""

from dataclasses import asdict, dataclass, field
from math import factorial

import numpy as np

from .bodies import SphericalFunction
from .quadrature import (
    Quadrature,
    build_sphere_quadrature,
    equator_frame,
    equator_quadrature,
    DEFAULT_RESOLUTION,
)

ANISOTROPY_TOL = 1e-9
NEGATIVITY_TOL = 1e-12


class DomainError(ValueError):
    """A function takes negative values where non-negativity is required."""


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    matrix: np.ndarray
    trace: float

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def anisotropy(self):
        """``||M - (tr M / m) I||_op / |tr M / m|``; zero exactly at isotropy."""
        m = self.dimension
        scale = self.trace / m
        if scale == 0.0:
            return float("inf")
        dev = np.linalg.eigvalsh(self.matrix - scale * np.eye(m))
        return float(np.max(np.abs(dev)) / abs(scale))

    def max_offdiagonal(self):
        off = self.matrix - np.diag(np.diag(self.matrix))
        return float(np.max(np.abs(off))) if self.dimension > 1 else 0.0


@dataclass
class IsotropyReport:
    centroid_norm: float
    anisotropy: float
    epsilon_estimate: float
    mass: float
    epsilon_stderr: float = 0.0
    shift: float = 0.0
    method: str = "exact"
    seed: int | None = None
    flagged: bool = False
    extras: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def _values(f, quad):
    if isinstance(f, SphericalFunction):
        if f.dimension != quad.sphere_dimension and f.dimension != quad.dimension:
            raise ValueError("function and quadrature dimensions disagree")
        local = quad.is_equator and f.dimension == quad.sphere_dimension
        return f(quad.local if local else quad.nodes)
    return np.asarray(f, dtype=float)


def centroid(f, quad):
    """``int f(x) x dx`` in the coordinates of ``quad`` (frame coordinates on
    an equator)."""
    v = _values(f, quad)
    return quad.integrate(v[:, None] * quad.coords)


def moment_matrix(f, quad):
    """Second-moment matrix ``int f(x) x x^T dx``, symmetrized."""
    v = _values(f, quad)
    X = quad.coords
    M = np.einsum("i,ij,ik->jk", quad.weights * v, X, X)
    M = 0.5 * (M + M.T)
    return MomentMatrix(M, float(np.trace(M)))


def determinant_integral(f, quad):
    """``int ... int det(x_1, ..., x_m)^2 f(x_1) ... f(x_m)``, exactly.

    Uses the Cauchy-Binet identity: the integral equals ``m! det(M)`` with
    ``M`` the moment matrix of ``f``.
    """
    M = moment_matrix(f, quad).matrix
    m = M.shape[0]
    return factorial(m) * float(np.linalg.det(M))


def _tuple_rng(seed):
    return np.random.default_rng(np.random.SeedSequence(seed))


def determinant_integral_mc(f, quad, samples=100000, seed=0, chunk=50000):
    """Monte Carlo estimate of the determinant integral over node tuples.

    Tuples of ``m`` nodes are drawn independently with probabilities
    proportional to the quadrature weights.  Returns ``(estimate, stderr)``.
    """
    v = _values(f, quad)
    X = quad.coords
    m = X.shape[1]
    p = quad.weights / quad.weights.sum()
    mass = quad.total_mass
    children = np.random.SeedSequence(seed).spawn(-(-samples // chunk))
    total, total_sq, done = 0.0, 0.0, 0
    # chunks use their own child streams and are summed in order
    for child in children:
        k = min(chunk, samples - done)
        rng = np.random.default_rng(child)
        idx = rng.choice(len(p), size=(k, m), p=p)
        d = np.linalg.det(X[idx])
        g = d * d * np.prod(v[idx], axis=1)
        total += g.sum()
        total_sq += (g * g).sum()
        done += k
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    scale = mass ** m
    return scale * mean, scale * np.sqrt(var / samples)


def calibration_constant(quad):
    """The constant making ``f == 1`` exactly 0-isotropic on ``quad``."""
    ones = np.ones(len(quad))
    m = quad.sphere_dimension
    return quad.total_mass / determinant_integral(ones, quad) ** (1.0 / m)


def epsilon_isotropy(f, quad, samples=None, seed=0, method="exact",
                     c_bar=None):
    """Smallest ``eps >= 0`` with ``int f <= (1 + eps) c_bar D(f)^{1/m}``.

    ``D(f)`` is the m-fold determinant integral.  ``c_bar`` defaults to the
    value that makes ``f == 1`` exactly 0-isotropic on ``quad``.  With
    ``method="mc"`` the determinant integral is sampled over node tuples and
    the function returns ``(eps, stderr)``; the exact route returns a float.

    Raises
    ------
    DomainError
        If ``f`` is negative beyond a round-off tolerance.
    """
    v = _values(f, quad)
    if np.min(v) < -NEGATIVITY_TOL * max(1.0, np.max(np.abs(v))):
        raise DomainError("epsilon-isotropy needs a non-negative function")
    v = np.clip(v, 0.0, None)
    m = quad.sphere_dimension
    if c_bar is None:
        c_bar = calibration_constant(quad)
    mass = float(quad.integrate(v))
    if method == "exact":
        D = determinant_integral(v, quad)
        if D <= 0.0:
            return float("inf")
        return max(mass / (c_bar * D ** (1.0 / m)) - 1.0, 0.0)
    if method == "mc":
        D, se = determinant_integral_mc(v, quad, samples or 100000, seed)
        if D <= 0.0:
            return float("inf"), float("inf")
        ratio = mass / (c_bar * D ** (1.0 / m))
        return ratio - 1.0, ratio * (se / D) / m
    raise ValueError(f"unknown method {method!r}")


def isotropy_report(f, quad, method="exact", samples=None, seed=0):
    """Centroid norm, anisotropy, mass and epsilon of ``f`` on ``quad``.

    A function with negative values is shifted by a constant before the
    epsilon computation; the shift is recorded.
    """
    v = _values(f, quad)
    c = centroid(v, quad)
    mm = moment_matrix(v, quad)
    mass = float(quad.integrate(v))
    shift = 0.0
    vmin = float(np.min(v))
    if vmin < 0.0:
        shift = -vmin + 1e-3 * max(1.0, float(np.max(np.abs(v))))
    vs = v + shift
    if method == "mc":
        eps, se = epsilon_isotropy(vs, quad, samples, seed, "mc")
    else:
        eps, se = epsilon_isotropy(vs, quad), 0.0
    return IsotropyReport(
        centroid_norm=float(np.linalg.norm(c)),
        anisotropy=mm.anisotropy(),
        epsilon_estimate=float(eps),
        mass=mass,
        epsilon_stderr=float(se),
        shift=shift,
        method=method,
        seed=seed if method == "mc" else None,
    )


def body_isotropy_check(K, quad, centroid_tol=1e-8):
    """Isotropy of a star body through the isotropy of ``rho_K^{n+2}``.

    The report's ``extras`` carry the relative centroid offset of ``K``, the
    largest relative off-diagonal entry of ``int_K x x^T dx``, and
    ``tr(M_K) / (n |K|^{(n+2)/n})`` (the squared isotropic constant).
    """
    n = K.dimension
    rho = K.radial(quad.nodes)
    f = rho ** (n + 2)
    rep = isotropy_report(f, quad)
    vol = float(quad.integrate(rho ** n)) / n
    body_centroid = quad.integrate((rho ** (n + 1))[:, None] * quad.nodes) / (
        (n + 1) * vol)
    scale = vol ** (1.0 / n)
    offset = float(np.linalg.norm(body_centroid)) / scale
    MK = moment_matrix(f, quad).matrix / (n + 2)
    diag = np.diag(MK)
    offdiag = float(np.max(np.abs(MK - np.diag(diag)))) / float(np.mean(diag))
    rep.extras.update(
        centroid_offset=offset,
        max_offdiagonal=offdiag,
        diagonal_spread=float(np.ptp(diag) / np.mean(diag)),
        volume=vol,
        isotropic_constant_sq=float(np.trace(MK)) / (n * vol ** ((n + 2) / n)),
    )
    rep.flagged = offset > centroid_tol
    return rep


@dataclass
class EquatorScan:
    """Per-pole isotropy reports for the equator restrictions of ``f``."""

    poles: np.ndarray
    reports: list
    pole_weights: np.ndarray | None = None
    evenness_residual: float = 0.0

    def __iter__(self):
        return iter(zip(self.poles, self.reports))

    def __len__(self):
        return len(self.reports)

    @property
    def anisotropies(self):
        return np.array([r.anisotropy for r in self.reports])

    @property
    def epsilons(self):
        return np.array([r.epsilon_estimate for r in self.reports])

    @property
    def centroid_norms(self):
        return np.array([r.centroid_norm for r in self.reports])

    @property
    def max_anisotropy(self):
        return float(np.max(self.anisotropies))

    @property
    def max_epsilon(self):
        return float(np.max(self.epsilons))

    @property
    def worst_pole(self):
        return self.poles[int(np.argmax(self.anisotropies))]


def pole_set(poles):
    """Directions and (optional) weights from a quadrature or an array."""
    if isinstance(poles, Quadrature):
        return np.asarray(poles.nodes), np.asarray(poles.weights)
    P = np.atleast_2d(np.asarray(poles, dtype=float))
    return P / np.linalg.norm(P, axis=1, keepdims=True), None


def equator_values(f, poles, resolution=DEFAULT_RESOLUTION):
    """Values of ``f`` on every pole's equator and the shared local rule.

    Returns ``(values, rule)`` with ``values[p, i] = f(B_p^T v_i)``.
    """
    P, _ = pole_set(poles)
    n = f.dimension
    rule = equator_quadrature(equator_frame(P[0]), resolution)
    bases = np.stack([equator_frame(u).basis for u in P])
    pts = np.einsum("ij,pjk->pik", rule.local, bases)
    vals = f(pts.reshape(-1, n)).reshape(len(P), len(rule))
    return vals, rule


def equator_isotropy_scan(f, poles, resolution=DEFAULT_RESOLUTION):
    """Restrict ``f`` to the equator of each pole and report its isotropy."""
    P, W = pole_set(poles)
    vals, rule = equator_values(f, P, resolution)
    reports = [isotropy_report(v, rule) for v in vals]
    probe = build_sphere_quadrature(f.dimension, 4).nodes
    even_res, _ = f.parity_residual(probe)
    return EquatorScan(P, reports, W, even_res)


def power_symmetrize(f, p):
    """``F_p(x) = (f(x)^p + f(-x)^p) / 2`` for a non-negative ``f``."""
    p = float(p)
    if p <= 0.0:
        raise ValueError("p must be positive")
    fn = f._fn
    probe = build_sphere_quadrature(f.dimension, 2).nodes
    if np.min(fn(probe)) < -NEGATIVITY_TOL:
        raise DomainError("power symmetrization needs a non-negative function")

    def F(x):
        a, b = fn(x), fn(-x)
        if min(np.min(a), np.min(b)) < -NEGATIVITY_TOL:
            raise DomainError("power symmetrization needs a non-negative function")
        a, b = np.clip(a, 0.0, None), np.clip(b, 0.0, None)
        return 0.5 * (a ** p + b ** p)

    return SphericalFunction(F, f.dimension, "even", f"F_{p:g}({f.name})")
