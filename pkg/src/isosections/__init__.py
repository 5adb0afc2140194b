"""Isotropic sections, centroid bodies and ball rigidity on the sphere."""

from .bodies import (
    Ball,
    ConvexBodySupport,
    Cube,
    Ellipsoid,
    SphericalFunction,
    StarBody,
    ball,
    constant_width_body,
    ellipsoid_plus_ball,
    minkowski_sum,
    polar_radial,
    radial_harmonic_perturbation,
    star_cube,
)
from .integral_geometry import (
    ConstantTable,
    b_functional,
    b_functional_exact,
    busemann_check,
    calibrate_constants,
    centroid_body_support,
    cosine_transform,
    gamma_surface_area,
    mean_width_functional,
    stability_deviation,
    theorem_chain,
    two_function_rigidity,
    urysohn_gap,
    weil_check,
)
from .isotropy import (
    centroid,
    epsilon_isotropy,
    equator_isotropy_scan,
    isotropy_report,
    moment_matrix,
)
from .quadrature import (
    build_sphere_quadrature,
    equator_frame,
    equator_quadrature,
    sample_directions,
)
from .symmetry import (
    FiniteSymmetryGroup,
    OrthogonalElement,
    group_closure,
    invariant_quadratic_space,
    is_complete,
    planar_completeness,
)

__version__ = "0.1.0"
