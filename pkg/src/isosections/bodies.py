"""Function-backed star bodies and convex bodies.

Every body is represented by a closed-form evaluator on the sphere: star
bodies by their radial function, convex bodies by their support function.
Evaluators are vectorized over arrays of unit vectors of shape ``(N, n)``.
"""

from itertools import product

import numpy as np

from .quadrature import (
    build_sphere_quadrature,
    direction,
    equator_frame,
    sphere_area,
)

PARITIES = ("even", "odd", "none", "unknown")


class DegenerateBodyError(ValueError):
    """A body quantity is non-positive where positivity is required."""


class UnsupportedBodyError(TypeError):
    """The operation needs a body type with more structure."""


def _as_points(x):
    return np.atleast_2d(np.asarray(x, dtype=float))


class SphericalFunction:
    """A real function on ``S^{n-1}`` with parity metadata.

    ``fn`` maps an ``(N, n)`` array of unit vectors to ``N`` values.
    Calling the object with a single vector returns a float.
    """

    def __init__(self, fn, dimension, parity="unknown", name=None):
        if parity not in PARITIES:
            raise ValueError(f"parity must be one of {PARITIES}")
        self._fn = fn
        self.dimension = int(dimension)
        self.parity = parity
        self.name = name or getattr(fn, "__name__", "f")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError(
                f"expected points in R^{self.dimension}, got shape {x.shape}")
        if x.ndim == 1:
            return float(self._fn(x[None, :])[0])
        return np.asarray(self._fn(x), dtype=float)

    def __repr__(self):
        return f"SphericalFunction({self.name!r}, n={self.dimension}, {self.parity})"

    @classmethod
    def constant(cls, c, n):
        c = float(c)
        return cls(lambda x: np.full(len(x), c), n, "even", f"const({c:g})")

    def _combine(self, other, op, parity):
        if isinstance(other, SphericalFunction):
            if other.dimension != self.dimension:
                raise ValueError("dimension mismatch")
            return SphericalFunction(lambda x: op(self._fn(x), other._fn(x)),
                                     self.dimension, parity)
        c = float(other)
        return SphericalFunction(lambda x: op(self._fn(x), c), self.dimension,
                                 parity)

    def _sum_parity(self, other):
        p = other.parity if isinstance(other, SphericalFunction) else "even"
        if self.parity == p and p in ("even", "odd"):
            return p
        if "unknown" in (self.parity, p):
            return "unknown"
        return "none"

    def _prod_parity(self, other):
        p = other.parity if isinstance(other, SphericalFunction) else "even"
        known = ("even", "odd")
        if self.parity in known and p in known:
            return "even" if self.parity == p else "odd"
        if "unknown" in (self.parity, p):
            return "unknown"
        return "none"

    def __add__(self, other):
        return self._combine(other, np.add, self._sum_parity(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract, self._sum_parity(other))

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a, self._sum_parity(other))

    def __mul__(self, other):
        return self._combine(other, np.multiply, self._prod_parity(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, np.divide, self._prod_parity(other))

    def __neg__(self):
        return self * -1.0

    def __pow__(self, p):
        p = float(p)
        parity = "even" if self.parity == "even" else "unknown"
        if self.parity == "odd" and p == int(p):
            parity = "even" if int(p) % 2 == 0 else "odd"
        return SphericalFunction(lambda x: self._fn(x) ** p, self.dimension,
                                 parity)

    def map(self, g, parity="unknown"):
        """Compose with a scalar map applied to the values."""
        return SphericalFunction(lambda x: g(self._fn(x)), self.dimension, parity)

    def reflect(self):
        """``x -> f(-x)``."""
        return SphericalFunction(lambda x: self._fn(-x), self.dimension,
                                 self.parity)

    def rotate(self, R):
        """The function ``x -> f(R^{-1} x)`` for an orthogonal ``R``."""
        R = np.asarray(R, dtype=float)
        # rows x_i -> R^T x_i is x @ R
        return SphericalFunction(lambda x: self._fn(x @ R), self.dimension,
                                 self.parity)

    def compose(self, T):
        """``x -> f(T x)`` for an orthogonal ``T``."""
        T = np.asarray(T, dtype=float)
        return SphericalFunction(lambda x: self._fn(x @ T.T), self.dimension,
                                 self.parity)

    def parity_residual(self, points):
        """``max |f(x) - f(-x)|`` and ``max |f(x) + f(-x)|`` on ``points``."""
        a, b = self._fn(points), self._fn(-points)
        return float(np.max(np.abs(a - b))), float(np.max(np.abs(a + b)))


def restrict_to_equator(f, frame):
    """Restriction of ``f`` to ``S^{n-1} cap u^perp`` in frame coordinates."""
    if frame.dimension != f.dimension:
        raise ValueError(
            f"frame lives in R^{frame.dimension}, function in R^{f.dimension}")
    B = frame.basis
    return SphericalFunction(lambda v: f._fn(v @ B), f.dimension - 1, f.parity,
                             f"{f.name}|eq")


# ---------------------------------------------------------------------------
# star bodies


class StarBody:
    """Star body given by a strictly positive radial function."""

    def __init__(self, radial, name="star"):
        self.radial = radial
        self.name = name

    @property
    def dimension(self):
        return self.radial.dimension

    def rho(self, x):
        return self.radial(x)

    def power(self, p):
        """``rho^p`` as a spherical function."""
        return self.radial ** p

    def check_positive(self, quad):
        vals = self.radial(quad.nodes)
        if np.any(~np.isfinite(vals)) or np.min(vals) <= 0.0:
            raise DegenerateBodyError(f"{self.name}: radial function not positive")
        return float(np.min(vals))

    def linear_image(self, T, name=None):
        """The star body ``T K`` for an invertible matrix ``T``."""
        T = np.asarray(T, dtype=float)
        Tinv = np.linalg.inv(T)
        fn = self.radial._fn

        def rho(x):
            y = x @ Tinv.T
            r = np.linalg.norm(y, axis=1)
            return fn(y / r[:, None]) / r

        return StarBody(SphericalFunction(rho, self.dimension, self.radial.parity),
                        name or f"T({self.name})")

    def scaled(self, lam):
        lam = float(lam)
        return StarBody(self.radial * lam, f"{lam:g}*{self.name}")

    def section(self, frame):
        """The section ``K cap u^perp`` as a star body in frame coordinates."""
        return StarBody(restrict_to_equator(self.radial, frame),
                        f"{self.name}|sec")

    def volume(self, quad):
        n = self.dimension
        return float(quad.integrate(self.radial(quad.nodes) ** n)) / n


def ball(radius=1.0, n=3):
    r = float(radius)
    return StarBody(SphericalFunction.constant(r, n), f"ball({r:g})")


def radial_harmonic_perturbation(radius=1.0, amplitude=0.1, degree=2, axis=None,
                                 n=3):
    """``rho(x) = radius * (1 + amplitude * P_degree(<x, axis>))``.

    ``P_degree`` is the Legendre polynomial; even degrees give an origin
    symmetric body.
    """
    axis = direction(np.eye(n)[0] if axis is None else axis)
    coeffs = np.zeros(degree + 1)
    coeffs[degree] = 1.0
    r, a = float(radius), float(amplitude)

    def rho(x):
        return r * (1.0 + a * np.polynomial.legendre.legval(x @ axis, coeffs))

    parity = "even" if degree % 2 == 0 else "none"
    return StarBody(SphericalFunction(rho, n, parity),
                    f"perturbed_ball(a={a:g},deg={degree})")


def star_cube(half_width=1.0, n=3):
    """The cube ``[-w, w]^n`` as a star body: ``rho(x) = w / max|x_i|``."""
    w = float(half_width)
    return StarBody(
        SphericalFunction(lambda x: w / np.max(np.abs(x), axis=1), n, "even",
                          "rho_cube"), f"cube({w:g})")


# ---------------------------------------------------------------------------
# convex bodies


class ConvexBodySupport:
    """Convex body given by its support function restricted to the sphere."""

    def __init__(self, support, name="convex"):
        self.support = support
        self.name = name

    @property
    def dimension(self):
        return self.support.dimension

    def h(self, x):
        return self.support(x)

    def h_homogeneous(self, y):
        """Support function extended 1-homogeneously to ``R^n``."""
        y = _as_points(y)
        r = np.linalg.norm(y, axis=1)
        return r * self.support._fn(y / r[:, None])

    def polar(self):
        return polar_radial(self)

    def curvature_function(self, u, step=1e-4):
        """Product of principal radii of curvature at outer normal ``u``.

        Determinant of the Hessian of the homogeneous support function
        restricted to ``u^perp``, by central differences.
        """
        u = _as_points(u)
        out = np.empty(len(u))
        for k, uk in enumerate(u):
            out[k] = np.linalg.det(self._tangent_hessian(uk, step))
        return out

    def _tangent_hessian(self, u, step):
        B = equator_frame(u).basis
        m = B.shape[0]
        H = np.empty((m, m))
        h0 = self.h_homogeneous(u)[0]
        for i in range(m):
            for j in range(i, m):
                if i == j:
                    pts = np.array([u + step * B[i], u - step * B[i]])
                    hp, hm = self.h_homogeneous(pts)
                    H[i, i] = (hp + hm - 2.0 * h0) / step ** 2
                else:
                    pts = np.array([u + step * (B[i] + B[j]),
                                    u + step * (B[i] - B[j]),
                                    u - step * (B[i] - B[j]),
                                    u - step * (B[i] + B[j])])
                    pp, pm, mp, mm = self.h_homogeneous(pts)
                    H[i, j] = H[j, i] = (pp - pm - mp + mm) / (4.0 * step ** 2)
        return H

    def surface_area(self, quad=None):
        """Surface area as the total mass of the curvature function."""
        quad = quad or build_sphere_quadrature(self.dimension)
        return float(quad.integrate(self.curvature_function(quad.nodes)))

    def sublinearity_residual(self, count=200, seed=0):
        """Largest violation of ``h(lx + (1-l)y) <= l h(x) + (1-l) h(y)``."""
        rng = np.random.default_rng(seed)
        n = self.dimension
        x = rng.standard_normal((count, n))
        y = rng.standard_normal((count, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        lam = rng.uniform(size=(count, 1))
        z = lam * x + (1 - lam) * y
        lhs = self.h_homogeneous(z)
        rhs = lam[:, 0] * self.h(x) + (1 - lam[:, 0]) * self.h(y)
        return float(max(0.0, np.max(lhs - rhs)))


class Ball(ConvexBodySupport):
    def __init__(self, radius=1.0, n=3):
        self.radius = float(radius)
        super().__init__(SphericalFunction.constant(self.radius, n),
                         f"ball({self.radius:g})")

    def surface_area(self, quad=None):
        n = self.dimension
        return sphere_area(n) * self.radius ** (n - 1)


class Ellipsoid(ConvexBodySupport):
    """Ellipsoid with support function ``h(u) = sqrt(u^T M u)``."""

    def __init__(self, M, name=None):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("support form must be a square matrix")
        if np.max(np.abs(M - M.T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
            raise ValueError("support form must be symmetric")
        M = 0.5 * (M + M.T)
        evals = np.linalg.eigvalsh(M)
        if evals[0] <= 0.0:
            raise DegenerateBodyError("support form must be positive definite")
        self.M = M
        self.Minv = np.linalg.inv(M)
        M_ = self.M

        def h(x):
            return np.sqrt(np.einsum("ij,jk,ik->i", x, M_, x))

        super().__init__(SphericalFunction(h, M.shape[0], "even", "h_E"),
                         name or "ellipsoid")

    @classmethod
    def from_axes(cls, axes):
        axes = np.asarray(axes, dtype=float)
        return cls(np.diag(axes ** 2),
                   "ellipsoid(" + ",".join(f"{a:g}" for a in axes) + ")")

    @property
    def axes_matrix(self):
        """Symmetric square root ``A`` of ``M``; the ellipsoid is ``A B``."""
        w, V = np.linalg.eigh(self.M)
        return (V * np.sqrt(w)) @ V.T

    def radial_function(self):
        Minv = self.Minv
        return SphericalFunction(
            lambda x: 1.0 / np.sqrt(np.einsum("ij,jk,ik->i", x, Minv, x)),
            self.dimension, "even", "rho_E")

    def as_star_body(self):
        return StarBody(self.radial_function(), self.name)

    def curvature_function(self, u, step=None):
        """Curvature function from the Gauss curvature at the support point.

        With ``Q = M^{-1}`` the boundary is ``x^T Q x = 1``; the support point
        of normal ``u`` is ``M u / h(u)`` and the Gauss curvature there is
        ``1 / (det(M) |Q x|^{n+1})``.
        """
        u = _as_points(u)
        n = self.dimension
        h = self.h(u)
        x = (u @ self.M) / h[:, None]
        grad = x @ self.Minv
        gauss = 1.0 / (np.linalg.det(self.M)
                       * np.linalg.norm(grad, axis=1) ** (n + 1))
        return 1.0 / gauss

    def surface_area(self, quad=None):
        """Boundary integral of ``A S^{n-1}``: ``|det A| int |A^{-1} s| ds``."""
        quad = quad or build_sphere_quadrature(self.dimension)
        A = self.axes_matrix
        Ainv = np.linalg.inv(A)
        jac = np.abs(np.linalg.det(A)) * np.linalg.norm(quad.nodes @ Ainv.T,
                                                        axis=1)
        return float(quad.integrate(jac))


class Cube(ConvexBodySupport):
    """``[-w, w]^n`` with ``h(u) = w * sum |u_i|``."""

    def __init__(self, half_width=1.0, n=3):
        self.half_width = float(half_width)
        w = self.half_width
        super().__init__(
            SphericalFunction(lambda x: w * np.sum(np.abs(x), axis=1), n, "even",
                              "h_cube"), f"cube({w:g})")

    def vertices(self):
        n = self.dimension
        return self.half_width * np.array(list(product((-1.0, 1.0), repeat=n)))

    def surface_area(self, quad=None):
        n = self.dimension
        return 2 * n * (2 * self.half_width) ** (n - 1)

    def as_star_body(self):
        return star_cube(self.half_width, self.dimension)


class MinkowskiSum(ConvexBodySupport):
    def __init__(self, A, B):
        if A.dimension != B.dimension:
            raise ValueError("Minkowski sum of bodies in different dimensions")
        self.parts = (A, B)
        super().__init__(A.support + B.support, f"{A.name}+{B.name}")


def minkowski_sum(A, B):
    """Body with support function ``h_A + h_B``."""
    return MinkowskiSum(A, B)


def constant_width_body(width=2.0, amplitude=0.05, n=3):
    """A convex body of constant width ``width`` (not a ball if ``amplitude``).

    ``h(u) = width/2 + amplitude * (u_1^3 - 3 u_1 / (n + 2))``.  The odd part
    is a pure degree-3 spherical harmonic, so the Steiner point is the
    origin; small amplitudes keep ``h`` convex.
    """
    w, a = float(width), float(amplitude)

    def h(x):
        t = x[:, 0]
        return 0.5 * w + a * (t ** 3 - 3.0 * t / (n + 2))

    return ConvexBodySupport(SphericalFunction(h, n, "none", "h_cw"),
                             f"constant_width(a={a:g})")


def ellipsoid_plus_ball(axes=(1.0, 2.0, 3.0), radius=1.0):
    """The convex body ``E + rB`` used as the unconditional counterexample."""
    E = Ellipsoid.from_axes(axes)
    sum_ = minkowski_sum(E, Ball(radius, len(axes)))
    sum_.ellipsoid = E
    sum_.radius = float(radius)
    return sum_


def polar_radial(L, check_quad=None):
    """Radial function of the polar body: ``rho_{L°} = 1 / h_L``."""
    quad = check_quad or build_sphere_quadrature(L.dimension, 4)
    if np.min(L.h(quad.nodes)) <= 0.0:
        raise DegenerateBodyError(f"{L.name}: support function not positive")
    fn = L.support._fn

    def rho(x):
        hv = fn(x)
        if np.any(hv <= 0.0):
            raise DegenerateBodyError(f"{L.name}: support function not positive")
        return 1.0 / hv

    return StarBody(SphericalFunction(rho, L.dimension, L.support.parity),
                    f"polar({L.name})")


def projection_support(L, frame):
    """Support function of ``L | u^perp`` on the equator, frame coordinates."""
    return restrict_to_equator(L.support, frame)


def fit_ellipsoid(h, quad):
    """Least-squares fit of ``h(x)^2`` by ``x^T M x`` on the nodes of ``quad``.

    Returns the symmetric matrix ``M`` and the relative weighted L2 residual
    ``||h^2 - x^T M x|| / ||h^2||``.
    """
    X = quad.coords
    m = X.shape[1]
    iu = np.triu_indices(m)
    design = X[:, iu[0]] * X[:, iu[1]]
    target = h(quad.nodes) ** 2
    sw = np.sqrt(quad.weights)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], target * sw, rcond=None)
    # an off-diagonal coefficient multiplies x_i x_j once; split it evenly
    M = _sym_from_upper(coef, m)
    resid = target - design @ coef
    rel = np.sqrt(np.sum(quad.weights * resid ** 2)
                  / np.sum(quad.weights * target ** 2))
    return M, float(rel)


def _sym_from_upper(coef, m):
    M = np.zeros((m, m))
    k = 0
    for i in range(m):
        for j in range(i, m):
            if i == j:
                M[i, i] = coef[k]
            else:
                M[i, j] = M[j, i] = 0.5 * coef[k]
            k += 1
    return M


def unconditionality_residual(f, basis=None, quad=None):
    """``max |f(sigma x) - f(x)|`` over nodes and coordinate sign flips.

    ``f`` is a function on ``S^{m-1}``; ``basis`` is an orthonormal ``m x m``
    matrix whose rows are the axes of the candidate symmetry.
    """
    m = f.dimension
    basis = np.eye(m) if basis is None else np.asarray(basis, dtype=float)
    if quad is None:
        quad = build_sphere_quadrature(m)
    x = quad.local if quad.is_equator else quad.nodes
    fx = f(x)
    c = x @ basis.T
    worst = 0.0
    for signs in product((1.0, -1.0), repeat=m):
        if all(s > 0 for s in signs):
            continue
        y = (c * np.array(signs)) @ basis
        worst = max(worst, float(np.max(np.abs(f(y) - fx))))
    return worst


def _candidate_axes(count=400):
    # Fibonacci points on the upper hemisphere plus the coordinate axes
    k = np.arange(count) + 0.5
    z = k / count
    phi = np.pi * (1.0 + 5 ** 0.5) * k
    r = np.sqrt(1.0 - z ** 2)
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return np.vstack([np.eye(3), pts])


def body_of_revolution_residual(f, axis=None, heights=41, angles=72,
                                candidates=400):
    """Largest oscillation of ``f`` along circles of rotation about ``axis``.

    With ``axis=None`` the residual is minimized over a fixed grid of
    candidate axes (see :func:`revolution_axis_search`).
    """
    if axis is not None:
        if f.dimension != 3:
            raise ValueError("body_of_revolution_residual is implemented for n = 3")
        return _revolution_residual(f, direction(axis), heights, angles)
    return revolution_axis_search(f, heights, angles, candidates)[0]


def revolution_axis_search(f, heights=41, angles=72, candidates=400):
    """Best candidate axis of revolution and its residual."""
    if f.dimension != 3:
        raise ValueError("body_of_revolution_residual is implemented for n = 3")
    best, best_axis = np.inf, None
    for a in _candidate_axes(candidates):
        r = _revolution_residual(f, a, heights, angles)
        if r < best:
            best, best_axis = r, a
    return best, best_axis


def _revolution_residual(f, axis, heights, angles):
    B = equator_frame(axis).basis
    t = np.cos(np.linspace(0.0, np.pi, heights))
    phi = np.linspace(0.0, 2 * np.pi, angles, endpoint=False)
    s = np.sqrt(np.clip(1.0 - t ** 2, 0.0, None))
    circ = np.cos(phi)[:, None] * B[0] + np.sin(phi)[:, None] * B[1]
    pts = t[:, None, None] * axis + s[:, None, None] * circ[None, :, :]
    vals = f(pts.reshape(-1, 3)).reshape(heights, angles)
    return float(np.max(vals.max(axis=1) - vals.min(axis=1)))
