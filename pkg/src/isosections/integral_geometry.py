"""Centroid bodies, the determinant functional B(K) and the ball-rigidity chain.

Conventions
-----------
* ``B(K) = int_K ... int_K det(x_1, ..., x_n)^2 dx_1 ... dx_n``.  Two routes
  are provided: a polar-coordinate Monte Carlo estimator with a standard
  error, and an exact route through ``B(K) = n! det(int_K x x^T dx)``.
* All dimensional constants are fixed on their equality cases (unit ball or
  ``f == 1``) by :func:`calibrate_constants`.
* The cosine-transform deviation compares ``int f |<x,u>| dx`` with
  ``(k / |S^{n-1}|) int f dx``, ``k = int |x_1| dx``, so it vanishes for
  constant ``f``.
"""

from dataclasses import asdict, dataclass, field
from math import factorial

import numpy as np

from .bodies import (
    ConvexBodySupport,
    Ellipsoid,
    SphericalFunction,
    UnsupportedBodyError,
    ball,
)
from .isotropy import (
    body_isotropy_check,
    epsilon_isotropy,
    equator_values,
    moment_matrix,
    pole_set,
)
from .quadrature import (
    DEFAULT_RESOLUTION,
    DimensionError,
    build_sphere_quadrature,
    equator_frame,
    equator_quadrature,
    sphere_area,
)

DEFAULT_POLE_RESOLUTION = 4
DEFAULT_B_SAMPLES = 200_000
MC_CHUNK = 100_000


class AsymmetricBodyError(ValueError):
    """The operation requires an origin-symmetric body."""


class PreconditionError(ValueError):
    """A numerical precondition (isotropy, centering) is not met."""

    def __init__(self, message, **values):
        super().__init__(message)
        self.values = values


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate and its standard error."""

    value: float
    stderr: float
    samples: int = 0
    seed: int | None = None

    def __float__(self):
        return float(self.value)

    @property
    def rel_stderr(self):
        return self.stderr / abs(self.value) if self.value else float("inf")


# ---------------------------------------------------------------------------
# constants


@dataclass
class ConstantTable:
    dimension: int
    c_urysohn: float
    c_density: float
    c_legendre: float
    c_busemann: float
    c_bar: float
    k_cosine: float
    c_busemann_stderr: float = 0.0
    resolution: int = DEFAULT_RESOLUTION
    samples: int = 0
    seed: int = 0

    def as_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def calibrate_constants(n, resolution=DEFAULT_RESOLUTION, samples=200_000,
                        seed=0):
    """Fix every dimensional constant on its equality case.

    ``c_urysohn``, ``c_density``, ``c_legendre`` and ``k_cosine`` use the unit
    ball, ``c_bar`` the constant function.  ``c_busemann`` uses ``F_i == 1``:
    by nested deterministic quadrature for ``n == 3``, by Monte Carlo (with a
    recorded standard error) otherwise.
    """
    if n < 2:
        raise DimensionError(f"constants need n >= 2, got {n}")
    quad = build_sphere_quadrature(n, resolution, seed=seed)
    area = sphere_area(n)
    unit = ball(1.0, n)
    k_cos = float(cosine_transform(SphericalFunction.constant(1.0, n),
                                   np.eye(n)[0], quad))
    c_urysohn = area ** (1.0 / (n - 1)) / area
    r_gamma = float(centroid_body_support(unit, np.eye(n)[-1], quad))
    b_sec = section_b_exact(unit, equator_frame(np.eye(n)[-1]), resolution)
    c_density = r_gamma ** (n - 1) / b_sec
    lhs = area / (n + 2)
    c_legendre = lhs / b_functional_exact(unit, quad) ** (1.0 / n)
    ones = np.ones(len(quad))
    c_bar = quad.total_mass / (factorial(n) * np.linalg.det(
        moment_matrix(ones, quad).matrix)) ** (1.0 / n)
    one_fns = [SphericalFunction.constant(1.0, n)] * (n - 1)
    if n == 3:
        rhs = busemann_rhs_quadrature(one_fns, resolution=resolution)
        c_bus, c_bus_se = area ** (n - 1) / rhs, 0.0
    else:
        est = busemann_rhs_mc(one_fns, samples, seed)
        c_bus = area ** (n - 1) / est.value
        c_bus_se = c_bus * est.rel_stderr
    return ConstantTable(n, c_urysohn, c_density, c_legendre, c_bus, c_bar,
                         k_cos, c_bus_se, resolution, samples, seed)


_CONSTANTS_CACHE = {}


def default_constants(n, resolution=DEFAULT_RESOLUTION):
    key = (n, resolution)
    if key not in _CONSTANTS_CACHE:
        _CONSTANTS_CACHE[key] = calibrate_constants(n, resolution)
    return _CONSTANTS_CACHE[key]


# ---------------------------------------------------------------------------
# the determinant functional


def _polar_points(K, count, rng):
    n = K.dimension
    g = rng.standard_normal((count, n))
    theta = g / np.linalg.norm(g, axis=1, keepdims=True)
    rho = K.radial(theta)
    r = rho * rng.uniform(size=count) ** (1.0 / n)
    weight = sphere_area(n) * rho ** n / n
    return theta * r[:, None], weight


def b_functional(K, samples=DEFAULT_B_SAMPLES, seed=0, chunk=MC_CHUNK):
    """Monte Carlo estimate of ``B(K)`` with its standard error.

    Each of the ``n`` points of a tuple is drawn by polar sampling: a uniform
    direction ``theta`` and a radius ``rho_K(theta) U^{1/n}``, weighted by
    ``|S^{n-1}| rho_K(theta)^n / n`` so that the weighted sample is unbiased
    for Lebesgue measure on ``K``.  Chunks draw from child seeds of ``seed``
    and are reduced in a fixed order.
    """
    n = K.dimension
    children = np.random.SeedSequence(seed).spawn(-(-samples // chunk))
    s1 = s2 = 0.0
    done = 0
    for child in children:
        k = min(chunk, samples - done)
        rng = np.random.default_rng(child)
        pts, wts = zip(*(_polar_points(K, k, rng) for _ in range(n)))
        mats = np.stack(pts, axis=1)
        g = np.linalg.det(mats) ** 2 * np.prod(np.stack(wts, axis=1), axis=1)
        s1 += g.sum()
        s2 += (g * g).sum()
        done += k
    mean = s1 / samples
    var = max(s2 / samples - mean ** 2, 0.0)
    return Estimate(mean, float(np.sqrt(var / samples)), samples, seed)


def body_moment_matrix(K, quad):
    """``int_K x x^T dx = (1/(n+2)) int rho^{n+2} x x^T dx``."""
    n = K.dimension
    f = K.radial(quad.nodes) ** (n + 2)
    return moment_matrix(f, quad).matrix / (n + 2)


def b_functional_exact(K, quad=None):
    """``B(K) = n! det(int_K x x^T dx)`` by deterministic quadrature."""
    quad = quad or build_sphere_quadrature(K.dimension)
    n = K.dimension
    return factorial(n) * float(np.linalg.det(body_moment_matrix(K, quad)))


def b_functional_section(K, frame, samples=DEFAULT_B_SAMPLES, seed=0):
    """Monte Carlo ``B`` of the ``(n-1)``-dimensional section ``K cap u^perp``."""
    return b_functional(K.section(frame), samples, seed)


def section_b_exact(K, frame, resolution=DEFAULT_RESOLUTION):
    """Exact ``B(K cap u^perp)`` via the moment identity on the equator."""
    return float(section_b_values(K, frame.pole[None, :], resolution)[0])


def section_b_values(K, poles, resolution=DEFAULT_RESOLUTION):
    """Exact section functional ``B(K cap u^perp)`` for every pole."""
    n = K.dimension
    vals, rule = equator_values(K.power(n + 1), poles, resolution)
    X = rule.local
    M = np.einsum("pi,i,ij,ik->pjk", vals, rule.weights, X, X) / (n + 1)
    return factorial(n - 1) * np.linalg.det(M)


# ---------------------------------------------------------------------------
# centroid bodies, widths, surface areas


def cosine_transform(f, u, quad):
    """``int f(x) |<x, u>| dx``; ``u`` may be one direction or an array.

    The rule is re-aligned with each ``u`` so the kink of ``|<x, u>|`` lies on
    panel edges.
    """
    U = np.atleast_2d(np.asarray(u, dtype=float))
    out = np.empty(len(U))
    for k, uk in enumerate(U):
        q = quad.aligned_to(uk)
        t = q.nodes @ (uk / np.linalg.norm(uk))
        out[k] = q.integrate(f(q.nodes) * np.abs(t))
    return out[0] if np.ndim(u) == 1 else out


def centroid_body_support(K, u, quad):
    """``h_{Gamma K}(u) = (1/(n+1)) int |<x,u>| rho_K^{n+1}(x) dx``."""
    n = K.dimension
    return cosine_transform(K.power(n + 1), u, quad) / (n + 1)


def centroid_body(K, quad):
    """``Gamma K`` as a convex body with a quadrature-backed support function."""
    n = K.dimension

    def h(x):
        return np.atleast_1d(centroid_body_support(K, x, quad))

    return ConvexBodySupport(SphericalFunction(h, n, "even", "h_GammaK"),
                             f"Gamma({K.name})")


def gamma_surface_area(K, poles=None, resolution=DEFAULT_RESOLUTION,
                       constants=None, method="exact", samples=20_000, seed=0):
    """``d(Gamma K) = int c_density B(K cap u^perp) du`` over a pole rule.

    With ``method="mc"`` every section functional is a Monte Carlo estimate
    and an :class:`Estimate` is returned.
    """
    n = K.dimension
    poles = poles if poles is not None else build_sphere_quadrature(
        n, DEFAULT_POLE_RESOLUTION)
    P, W = pole_set(poles)
    if W is None:
        W = np.full(len(P), sphere_area(n) / len(P))
    constants = constants or default_constants(n, resolution)
    if method == "exact":
        B = section_b_values(K, P, resolution)
        return constants.c_density * float(W @ B)
    seeds = np.random.SeedSequence(seed).generate_state(len(P))
    ests = [b_functional_section(K, equator_frame(u), samples, int(s))
            for u, s in zip(P, seeds)]
    vals = np.array([e.value for e in ests])
    ses = np.array([e.stderr for e in ests])
    c = constants.c_density
    return Estimate(c * float(W @ vals), c * float(np.sqrt(W ** 2 @ ses ** 2)),
                    samples, seed)


def gamma_surface_area_direct(K, poles, quad, step=1e-3):
    """Surface area of ``Gamma K`` from finite-difference curvature of its
    support function (independent of the section functional)."""
    P, W = pole_set(poles)
    if W is None:
        W = np.full(len(P), sphere_area(K.dimension) / len(P))
    G = centroid_body(K, quad)
    return float(W @ G.curvature_function(P, step=step))


def mean_width_functional(L, quad):
    """``W(L) = int h_L dx``."""
    return float(quad.integrate(L.h(quad.nodes)))


def urysohn_gap(L, quad, constants=None, surface_area=None):
    """``c_urysohn W(L) - (dL)^{1/(n-1)}``, non-negative, zero only for balls.

    ``surface_area`` overrides the body's own surface-area routine; pass the
    value from :func:`gamma_surface_area` for centroid bodies.
    """
    n = L.dimension
    constants = constants or default_constants(n)
    S = L.surface_area(quad) if surface_area is None else float(surface_area)
    return constants.c_urysohn * mean_width_functional(L, quad) - S ** (1.0 / (n - 1))


# ---------------------------------------------------------------------------
# the inequality chain


@dataclass
class TheoremChainReport:
    lhs_mass: float
    isotropy_rhs: float
    holder_rhs: float
    surface_rhs: float
    width_rhs: float
    urysohn_gap: float
    gamma_surface_area: float
    gamma_mean_width: float
    slacks: dict
    tolerance: float
    verdict: str
    extras: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)

    @property
    def hypothesis_holds(self):
        return self.slacks["section_isotropy"] < self.tolerance


def _chain_quantities(K, quad, poles, resolution, constants):
    n = K.dimension
    P, W = pole_set(poles)
    rho = K.radial(quad.nodes)
    lhs = float(quad.integrate(rho ** (n + 1))) / (n + 1)
    B = section_b_values(K, P, resolution)
    iso = float(W @ B ** (1.0 / (n - 1)))
    holder = float(W @ B) ** (1.0 / (n - 1))
    surface = constants.c_density * float(W @ B)
    width = float(W @ centroid_body_support(K, P, quad))
    return lhs, iso, holder, surface, width


def theorem_chain(K, resolution=DEFAULT_RESOLUTION,
                  pole_resolution=DEFAULT_POLE_RESOLUTION, tolerance=1e-4,
                  constants=None):
    """Evaluate every stage of the rigidity chain for a symmetric star body.

    Stages, each normalized by the left-hand side ``int_K |x| dx``:

    ``section_isotropy``
        ``lhs - c5 int B(K cap u^perp)^{1/(n-1)} du``; zero iff almost every
        section is isotropic, positive otherwise.
    ``holder``
        Hölder gap ``c6 (int B du)^{1/(n-1)} - c5 int B^{1/(n-1)} du >= 0``.
    ``density``
        ``c8 d(Gamma K)^{1/(n-1)} - c6 (int B du)^{1/(n-1)}``; an identity.
    ``urysohn``
        ``c9 W(Gamma K) - c8 d(Gamma K)^{1/(n-1)} >= 0``, relative to the
        width term; zero iff ``Gamma K`` is a ball.
    ``closure``
        ``c9 W(Gamma K) - lhs``; an identity (the proof's ``c10 = 1``).

    The constants ``c5, c6, c8, c9`` are calibrated on the unit ball with the
    same rules, so every slack vanishes on balls.

    Raises
    ------
    AsymmetricBodyError
        If the radial function is not even.
    """
    n = K.dimension
    if n < 3:
        raise DimensionError("the chain is stated for n >= 3")
    quad = build_sphere_quadrature(n, resolution)
    poles = build_sphere_quadrature(n, pole_resolution)
    rho_plus, rho_minus = K.radial(quad.nodes), K.radial(-quad.nodes)
    odd = float(np.max(np.abs(rho_plus - rho_minus)) / np.max(rho_plus))
    if odd > 1e-10:
        raise AsymmetricBodyError(
            f"{K.name} is not origin symmetric (parity residual {odd:.2e})")
    constants = constants or default_constants(n, resolution)
    ref = _chain_quantities(ball(1.0, n), quad, poles, resolution, constants)
    lhs_b, iso_b, hold_b, surf_b, width_b = ref
    c5, c6 = lhs_b / iso_b, lhs_b / hold_b
    c8 = lhs_b / surf_b ** (1.0 / (n - 1))
    c9 = lhs_b / width_b
    lhs, iso, holder, surface, width = _chain_quantities(K, quad, poles,
                                                         resolution, constants)
    iso_rhs, holder_rhs = c5 * iso, c6 * holder
    surface_rhs = c8 * surface ** (1.0 / (n - 1))
    width_rhs = c9 * width
    slacks = {
        "section_isotropy": (lhs - iso_rhs) / lhs,
        "holder": (holder_rhs - iso_rhs) / lhs,
        "density": (surface_rhs - holder_rhs) / lhs,
        "urysohn": (width_rhs - surface_rhs) / width_rhs,
        "closure": (width_rhs - lhs) / lhs,
    }
    gap = constants.c_urysohn * width - surface ** (1.0 / (n - 1))
    ok = all(abs(v) < tolerance for v in slacks.values())
    return TheoremChainReport(
        lhs_mass=lhs, isotropy_rhs=iso_rhs, holder_rhs=holder_rhs,
        surface_rhs=surface_rhs, width_rhs=width_rhs, urysohn_gap=gap,
        gamma_surface_area=surface, gamma_mean_width=width,
        slacks={k: float(v) for k, v in slacks.items()}, tolerance=tolerance,
        verdict="ball-consistent" if ok else "non-ball",
        extras={"c5": c5, "c6": c6, "c8": c8, "c9": c9, "parity_residual": odd,
                "resolution": resolution, "pole_resolution": pole_resolution},
    )


# ---------------------------------------------------------------------------
# stability


@dataclass
class StabilityResult:
    sup_dev: float
    eps_max: float
    delta: float
    normalization: float
    evenness_residual: float
    contradiction: bool
    deviations: np.ndarray = field(repr=False)
    epsilons: np.ndarray = field(repr=False)

    @property
    def ratio(self):
        denom = self.eps_max + self.delta
        return self.sup_dev / denom if denom > 0 else float("inf")


def stability_deviation(f, poles=None, resolution=DEFAULT_RESOLUTION,
                        eps_cap=None, tolerance=1e-8, quad=None):
    """Cosine-transform deviation of ``f`` against its equator epsilons.

    ``sup_dev = max_u |int f |<x,u>| dx - (k / |S^{n-1}|) int f dx|`` over the
    poles, ``eps_max`` is the largest equator epsilon among poles whose
    epsilon does not exceed ``eps_cap``, and ``delta`` is the measure of the
    excluded poles (zero when ``eps_cap`` is None).  ``contradiction`` flags a
    non-constant even ``f`` whose equators all look isotropic.
    """
    n = f.dimension
    quad = quad or build_sphere_quadrature(n, resolution)
    poles = poles if poles is not None else build_sphere_quadrature(
        n, DEFAULT_POLE_RESOLUTION)
    P, W = pole_set(poles)
    if W is None:
        W = np.full(len(P), sphere_area(n) / len(P))
    area = quad.total_mass
    k = float(quad.integrate(np.abs(quad.nodes[:, 0])))
    kappa = k / area
    mass = float(quad.integrate(f(quad.nodes)))
    dev = np.abs(cosine_transform(f, P, quad) - kappa * mass)
    vals, rule = equator_values(f, P, resolution)
    eps = np.array([epsilon_isotropy(v, rule) for v in vals])
    keep = np.ones(len(P), dtype=bool) if eps_cap is None else eps <= eps_cap
    delta = float(W[~keep].sum())
    eps_max = float(eps[keep].max()) if keep.any() else 0.0
    even_res, _ = f.parity_residual(quad.nodes)
    fv = f(quad.nodes)
    nonconstant = float(np.ptp(fv)) > tolerance * max(1.0, float(np.max(np.abs(fv))))
    contradiction = bool(even_res < 1e-10 and nonconstant and eps_max < tolerance
                         and delta == 0.0)
    return StabilityResult(float(dev.max()), eps_max, delta, kappa, even_res,
                           contradiction, dev, eps)


STABILITY_AMPLITUDES = (0.05, 0.1, 0.2, 0.4)


def stability_sweep(amplitudes=STABILITY_AMPLITUDES, poles=None,
                    resolution=DEFAULT_RESOLUTION, axis=0):
    """Stability data for ``f_a = 1 + a (x_axis^2 - 1/3)`` on ``S^2``.

    Each row holds ``sup_dev``, ``eps_max``, ``delta``, the oscillation of
    ``f_a`` and the ratios ``sup_dev / (eps_max + delta)``,
    ``osc / (eps_max + delta)`` and ``sup_dev / sqrt(eps_max)``.  The
    returned ``bound`` is the largest oscillation ratio over the sweep.
    """
    quad = build_sphere_quadrature(3, resolution)
    rows = []
    for a in amplitudes:
        f = SphericalFunction(
            lambda x, a=a: 1.0 + a * (x[:, axis] ** 2 - 1.0 / 3.0), 3, "even")
        res = stability_deviation(f, poles, resolution, quad=quad)
        osc = float(np.ptp(f(quad.nodes)))
        denom = res.eps_max + res.delta
        rows.append({
            "amplitude": float(a), "sup_dev": res.sup_dev,
            "eps_max": res.eps_max, "delta": res.delta, "oscillation": osc,
            "ratio": res.sup_dev / denom if denom > 0 else float("inf"),
            "oscillation_ratio": osc / denom if denom > 0 else float("inf"),
            "sqrt_ratio": (res.sup_dev / np.sqrt(res.eps_max)
                           if res.eps_max > 0 else float("inf")),
        })
    bound = max(r["oscillation_ratio"] for r in rows)
    return rows, bound


# ---------------------------------------------------------------------------
# Busemann's formula and two-function rigidity


def busemann_rhs_mc(F, samples=200_000, seed=0, chunk=MC_CHUNK):
    """Monte Carlo ``int_u int_{u^perp}^{n-1} |det| F_1 ... F_{n-1}``.

    Poles are uniform on ``S^{n-1}`` and equator points uniform on each
    pole's equator.  Returns an :class:`Estimate`.
    """
    n = F[0].dimension
    m = n - 1
    if len(F) != m:
        raise ValueError(f"Busemann's formula takes n - 1 = {m} functions")
    scale = sphere_area(n) * sphere_area(m) ** m
    children = np.random.SeedSequence(seed).spawn(-(-samples // chunk))
    s1 = s2 = 0.0
    done = 0
    for child in children:
        k = min(chunk, samples - done)
        rng = np.random.default_rng(child)
        u = rng.standard_normal((k, n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        xs = []
        for _ in range(m):
            g = rng.standard_normal((k, n))
            g -= np.sum(g * u, axis=1, keepdims=True) * u
            xs.append(g / np.linalg.norm(g, axis=1, keepdims=True))
        # |det| of (x_1..x_m) inside u^perp equals |det(x_1..x_m, u)|
        d = np.abs(np.linalg.det(np.stack(xs + [u], axis=1)))
        g = d * np.prod([Fi(x) for Fi, x in zip(F, xs)], axis=0)
        s1 += g.sum()
        s2 += (g * g).sum()
        done += k
    mean = s1 / samples
    var = max(s2 / samples - mean ** 2, 0.0)
    return Estimate(scale * mean, scale * float(np.sqrt(var / samples)),
                    samples, seed)


def busemann_rhs_quadrature(F, resolution=DEFAULT_RESOLUTION,
                            pole_resolution=DEFAULT_POLE_RESOLUTION):
    """Deterministic nested quadrature of the Busemann integral for ``n = 3``.

    The inner circle rule is rotated to start at the outer point, so the
    kinks of ``|sin(theta_2 - theta_1)|`` fall on panel edges.
    """
    n = F[0].dimension
    if n != 3 or len(F) != 2:
        raise DimensionError("nested quadrature is implemented for n = 3")
    poles = build_sphere_quadrature(3, pole_resolution)
    circle = equator_quadrature(equator_frame([0, 0, 1.0]), resolution)
    ang = np.arctan2(circle.local[:, 1], circle.local[:, 0])
    w = circle.weights
    kernel = w * np.abs(np.sin(ang))
    total = 0.0
    for u, wu in zip(poles.nodes, poles.weights):
        B = equator_frame(u).basis
        x1 = circle.local @ B
        a2 = ang[:, None] + ang[None, :]
        x2 = (np.cos(a2)[..., None] * B[0] + np.sin(a2)[..., None] * B[1])
        f2 = F[1](x2.reshape(-1, 3)).reshape(len(w), len(w))
        inner = f2 @ kernel
        total += wu * float(np.sum(w * F[0](x1) * inner))
    return total


@dataclass
class BusemannResult:
    lhs: float
    rhs: float
    rel_err: float
    rel_sigma: float
    method: str


def busemann_check(F, samples=200_000, seed=0, constants=None,
                   method="mc", resolution=DEFAULT_RESOLUTION,
                   pole_resolution=DEFAULT_POLE_RESOLUTION):
    """Compare ``prod int F_i`` with ``c_busemann`` times the section integral."""
    n = F[0].dimension
    constants = constants or default_constants(n, resolution)
    quad = build_sphere_quadrature(n, resolution, seed=seed)
    lhs = float(np.prod([quad.integrate(Fi(quad.nodes)) for Fi in F]))
    if method == "mc":
        est = busemann_rhs_mc(F, samples, seed)
        rhs = constants.c_busemann * est.value
        rel_sigma = float(np.hypot(est.rel_stderr,
                                   constants.c_busemann_stderr / constants.c_busemann))
    elif method == "quadrature":
        rhs = constants.c_busemann * busemann_rhs_quadrature(F, resolution,
                                                             pole_resolution)
        rel_sigma = 0.0
    else:
        raise ValueError(f"unknown method {method!r}")
    rel_err = abs(rhs - lhs) / abs(lhs) if lhs else abs(rhs)
    return BusemannResult(lhs, rhs, float(rel_err), rel_sigma, method)


@dataclass
class RigidityResult:
    verdict: str
    residual_same: float
    residual_reflected: float
    busemann_product: float
    busemann_stderr: float
    hypothesis_ok: bool
    worst_pole: np.ndarray | None
    worst_equator_residual: float


def two_function_rigidity(f, g, poles=None, resolution=DEFAULT_RESOLUTION,
                          tolerance=1e-9, samples=100_000, seed=0):
    """Decide between ``f = g`` and ``f = g(-.)`` from equator data.

    On each pole's equator the better of ``max|f - g|`` and
    ``max|f - g(-.)|`` must vanish.  The Busemann right-hand side with
    ``F_1 = (f - g)^2`` and ``F_2 = ... = (f - g(-.))^2`` is then computed and
    the global identity with vanishing ``L^2`` residual is returned.  The
    Busemann product is a Monte Carlo estimate (``samples``, ``seed``) and is
    reported normalized by ``(int f^2)^{n-1}``.
    """
    n = f.dimension
    poles = poles if poles is not None else build_sphere_quadrature(
        n, DEFAULT_POLE_RESOLUTION)
    P, _ = pole_set(poles)
    quad = build_sphere_quadrature(n, resolution)
    gr = g.reflect()
    fv_eq, _ = equator_values(f, P, resolution)
    gv_eq, _ = equator_values(g, P, resolution)
    gr_eq, _ = equator_values(gr, P, resolution)
    scale = max(1.0, float(np.max(np.abs(f(quad.nodes)))))
    e_same = np.max(np.abs(fv_eq - gv_eq), axis=1)
    e_refl = np.max(np.abs(fv_eq - gr_eq), axis=1)
    per_pole = np.minimum(e_same, e_refl) / scale
    worst = int(np.argmax(per_pole))
    F1 = (f - g) ** 2
    F2 = (f - gr) ** 2
    Fs = [F1] + [F2] * (n - 2)
    product = busemann_rhs_mc(Fs, samples, seed)
    norm = float(quad.integrate(f(quad.nodes) ** 2)) or 1.0
    r_same = float(quad.integrate(F1(quad.nodes))) / norm
    r_refl = float(quad.integrate(F2(quad.nodes))) / norm
    ok = bool(per_pole[worst] <= tolerance)
    if not ok:
        verdict = "hypothesis-violated"
    elif r_same <= tolerance and r_refl <= tolerance:
        verdict = "both"
    elif r_same <= tolerance:
        verdict = "f=g"
    elif r_refl <= tolerance:
        verdict = "f=g(-x)"
    else:
        verdict = "inconclusive"
    scale_n = norm ** (n - 1)
    return RigidityResult(verdict, r_same, r_refl, product.value / scale_n,
                          product.stderr / scale_n, ok, P[worst],
                          float(per_pole[worst]))


# ---------------------------------------------------------------------------
# Weil's formula, the isotropic Legendre identity, epsilon-isotropic bodies


@dataclass
class WeilResult:
    lhs: float
    determinant_integral: float
    ratio: float


def _projection_body_support(L, quad):
    f_L = SphericalFunction(lambda x: L.curvature_function(x), L.dimension,
                            "even")

    def h(y):
        y = np.atleast_2d(y)
        r = np.linalg.norm(y, axis=1)
        return 0.5 * r * np.atleast_1d(cosine_transform(f_L, y / r[:, None], quad))

    return h


def weil_check(L, u, quad=None, step=2e-3, resolution=DEFAULT_RESOLUTION):
    """Curvature function of the projection body against the equator
    determinant integral of ``f_L``, for an ellipsoid in ``R^3``.

    ``lhs`` is the determinant of the finite-difference Hessian of
    ``h_{Pi L}`` on ``u^perp``; the returned ratio estimates ``c_1'``.
    """
    if not isinstance(L, Ellipsoid):
        raise UnsupportedBodyError("weil_check needs an Ellipsoid")
    if L.dimension != 3:
        raise DimensionError("weil_check is implemented for n = 3")
    quad = quad or build_sphere_quadrature(3, resolution)
    h = _projection_body_support(L, quad)
    frame = equator_frame(u)
    u = frame.pole
    e1, e2 = frame.basis
    s = step
    pts = np.array([u, u + s * e1, u - s * e1, u + s * e2, u - s * e2,
                    u + s * (e1 + e2), u + s * (e1 - e2), u - s * (e1 - e2),
                    u - s * (e1 + e2)])
    v = h(pts)
    h11 = (v[1] + v[2] - 2 * v[0]) / s ** 2
    h22 = (v[3] + v[4] - 2 * v[0]) / s ** 2
    h12 = (v[5] - v[6] - v[7] + v[8]) / (4 * s ** 2)
    lhs = h11 * h22 - h12 ** 2
    eq = equator_quadrature(frame, resolution)
    fv = L.curvature_function(eq.nodes)
    X = eq.local
    det = X[:, 0][:, None] * X[:, 1][None, :] - X[:, 1][:, None] * X[:, 0][None, :]
    wf = eq.weights * fv
    integral = float(wf @ (det ** 2) @ wf)
    return WeilResult(float(lhs), integral, float(lhs / integral))


@dataclass
class LegendreResult:
    lhs: float
    rhs: float
    rel_err: float
    rel_sigma: float
    anisotropy: float


def legendre_isotropic_check(K, quad=None, samples=DEFAULT_B_SAMPLES, seed=0,
                             constants=None, isotropy_tol=1e-6, method="mc"):
    """``int_K |x|^2 dx`` against ``c_legendre B(K)^{1/n}`` for isotropic K.

    ``rel_sigma`` is the standard error of the right-hand side propagated
    from the Monte Carlo estimate of ``B(K)``.

    Raises
    ------
    PreconditionError
        If ``K`` is not isotropic within ``isotropy_tol``.
    """
    n = K.dimension
    quad = quad or build_sphere_quadrature(n)
    constants = constants or default_constants(n)
    rep = body_isotropy_check(K, quad)
    if rep.anisotropy > isotropy_tol or rep.flagged:
        raise PreconditionError(f"{K.name} is not isotropic",
                                anisotropy=rep.anisotropy)
    lhs = float(quad.integrate(K.radial(quad.nodes) ** (n + 2))) / (n + 2)
    if method == "mc":
        est = b_functional(K, samples, seed)
        B, rel_sigma = est.value, est.rel_stderr / n
    else:
        B, rel_sigma = b_functional_exact(K, quad), 0.0
    rhs = constants.c_legendre * B ** (1.0 / n)
    return LegendreResult(lhs, float(rhs), abs(lhs / rhs - 1.0), rel_sigma,
                          rep.anisotropy)


@dataclass
class BodyEpsilon:
    epsilon: float
    epsilon_function: float
    stderr: float
    method: str


def epsilon_isotropic_body(K, quad=None, constants=None, method="exact",
                           samples=DEFAULT_B_SAMPLES, seed=0, centroid_tol=1e-8):
    """Smallest ``eps`` with ``int_K |x|^2 <= (1 + eps) c_legendre B(K)^{1/n}``.

    Also returns the epsilon of ``rho_K^{n+2}`` as a spherical function; the
    two agree for bodies centred at the origin.
    """
    n = K.dimension
    quad = quad or build_sphere_quadrature(n)
    constants = constants or default_constants(n)
    rep = body_isotropy_check(K, quad, centroid_tol)
    if rep.flagged:
        raise PreconditionError(f"{K.name} is not centred at the origin",
                                centroid_offset=rep.extras["centroid_offset"])
    lhs = float(quad.integrate(K.radial(quad.nodes) ** (n + 2))) / (n + 2)
    if method == "mc":
        est = b_functional(K, samples, seed)
        ratio = lhs / (constants.c_legendre * est.value ** (1.0 / n))
        eps, se = ratio - 1.0, ratio * est.rel_stderr / n
    else:
        B = b_functional_exact(K, quad)
        eps, se = max(lhs / (constants.c_legendre * B ** (1.0 / n)) - 1.0, 0.0), 0.0
    eps_f = epsilon_isotropy(K.radial(quad.nodes) ** (n + 2), quad,
                             c_bar=constants.c_bar)
    return BodyEpsilon(float(eps), float(eps_f), float(se), method)
