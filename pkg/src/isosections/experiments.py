"""Experiment commands: each returns an :class:`ExperimentReport`.

Every threshold a command compares against lives in ``config.tolerances``
and is echoed in the report.
"""

import time
from dataclasses import asdict, dataclass, field
from math import factorial, gamma, pi

import numpy as np

from .bodies import (
    Ball,
    SphericalFunction,
    body_of_revolution_residual,
    constant_width_body,
    ellipsoid_plus_ball,
    fit_ellipsoid,
    polar_radial,
    projection_support,
    restrict_to_equator,
    unconditionality_residual,
)
from .integral_geometry import (
    AsymmetricBodyError,
    DEFAULT_POLE_RESOLUTION,
    busemann_check,
    calibrate_constants,
    default_constants,
    stability_deviation,
    stability_sweep,
    theorem_chain,
    two_function_rigidity,
)
from .isotropy import equator_isotropy_scan
from .quadrature import (
    DEFAULT_RESOLUTION,
    build_sphere_quadrature,
    equator_frame,
    equator_quadrature,
    sample_directions,
    sphere_area,
)
from .report import ExperimentReport
from .specs import SpecError, parse_body, parse_group
from .symmetry import (
    GroupOrderError,
    NonOrthogonalError,
    axis_rotation,
    complete_symmetry_check,
    invariant_quadratic_space,
    planar_completeness,
    random_trig_polynomial,
    rotation_equator_check,
    symmetrize,
    group_closure,
)

COMMANDS = ("isotropy", "theorem-chain", "symmetry", "counterexample",
            "busemann", "calibrate")

DEFAULT_TOLERANCES = {
    "isotropy": {"anisotropy": 1e-6, "centroid": 1e-8, "flat": 1e-8},
    "theorem-chain": {"slack": 1e-4, "identity": 1e-3},
    "symmetry": {"closure": 1e-8, "isotropy": 1e-8, "rotation": 1e-8,
                 "oscillation": 1e-8},
    "counterexample": {"fit_min": 1e-3, "revolution_min": 1e-3,
                       "unconditional": 1e-8, "polarity": 1e-10,
                       "control_fit": 1e-8, "constant_width": 1e-10,
                       "equator_moment": 1e-8},
    "busemann": {"sigma": 3.0, "rigidity": 1e-9},
    "calibrate": {"closed_form": 1e-8, "sigma": 3.0},
}

DEFAULT_POLES = {"isotropy": 64, "symmetry": 200, "counterexample": 50}

DEFAULT_BODIES = {"isotropy": "ball", "theorem-chain": "ball",
                  "symmetry": "ball", "counterexample": "ellipsoid_plus_ball"}


@dataclass
class ExperimentConfig:
    command: str
    dimension: int = 3
    resolution: int = DEFAULT_RESOLUTION
    pole_resolution: int = DEFAULT_POLE_RESOLUTION
    poles: int | None = None
    samples: int = 200_000
    seed: int = 0
    trials: int = 10
    tolerances: dict = field(default_factory=dict)
    body: object = None
    group: object = None
    out: str | None = None
    csv: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SpecError(f"unknown command {self.command!r}", "command")
        for name, lo in (("dimension", 2), ("resolution", 1),
                         ("pole_resolution", 1), ("samples", 1),
                         ("trials", 1)):
            if int(getattr(self, name)) < lo:
                raise SpecError(f"must be >= {lo}", name)
        defaults = DEFAULT_TOLERANCES[self.command]
        unknown = set(self.tolerances) - set(defaults)
        if unknown:
            raise SpecError(f"unknown tolerance(s) {sorted(unknown)} for "
                            f"{self.command}; known: {sorted(defaults)}",
                            "tolerance")
        self.tolerances = {**defaults,
                           **{k: float(v) for k, v in self.tolerances.items()}}
        if self.poles is None:
            self.poles = DEFAULT_POLES.get(self.command)
        if self.body is None:
            self.body = DEFAULT_BODIES.get(self.command)
        if self.command == "symmetry" and self.group is None:
            self.group = "cube"

    @property
    def tol(self):
        return self.tolerances

    def as_dict(self):
        return asdict(self)


def _report(config):
    return ExperimentReport(config.command, config.as_dict())


def _constants(config, report):
    C = default_constants(config.dimension, config.resolution)
    report.constants = C.as_dict()
    return C


def _full_quad(config):
    return build_sphere_quadrature(config.dimension, config.resolution,
                                   samples=max(config.samples, 1000),
                                   seed=config.seed)


def run(config):
    """Dispatch a config to its command and time it."""
    t0 = time.perf_counter()
    report = COMMAND_TABLE[config.command](config)
    report.wall_time = time.perf_counter() - t0
    return report


def cmd_isotropy(config):
    """Equator isotropy scan and cosine-transform stability of a body.

    The scanned function is ``rho_K^{n+1}`` (or ``h_K`` for bodies given only
    by a support function).
    """
    n, tol = config.dimension, config.tol
    body = parse_body(config.body, n)
    report = _report(config)
    _constants(config, report)
    if body.star is not None:
        f, label = body.star.power(n + 1), "rho^(n+1)"
    else:
        f, label = body.convex.support, "h"
    poles = sample_directions(n, config.poles, config.seed)
    scan = equator_isotropy_scan(f, poles, config.resolution)
    stab = stability_deviation(f, poles, config.resolution,
                               tolerance=tol["flat"], quad=_full_quad(config))
    aniso, cents = scan.anisotropies, scan.centroid_norms
    flagged = np.flatnonzero(aniso >= tol["anisotropy"])
    report.add("equator_isotropy", aniso.max() < tol["anisotropy"],
               {"max_anisotropy": aniso.max(), "flagged_poles": flagged.tolist()},
               {"anisotropy": tol["anisotropy"]})
    report.add("equator_centroid", cents.max() < tol["centroid"],
               {"max_centroid_norm": cents.max()}, {"centroid": tol["centroid"]})
    report.add("no_stability_contradiction", not stab.contradiction,
               {"sup_dev": stab.sup_dev, "eps_max": stab.eps_max,
                "evenness_residual": stab.evenness_residual},
               {"flat": tol["flat"]})
    report.results = {
        "function": label,
        "verdict": "isotropic-equators" if flagged.size == 0 else "anisotropic",
        "sup_dev": stab.sup_dev, "eps_max": stab.eps_max, "delta": stab.delta,
        "normalization": "k/|S^{n-1}|", "kappa": stab.normalization,
        "poles": poles, "anisotropies": aniso, "epsilons": scan.epsilons,
        "centroid_norms": cents,
    }
    report.tables["poles"] = {"pole": poles, "anisotropy": aniso,
                              "epsilon": scan.epsilons, "centroid_norm": cents,
                              "cosine_deviation": stab.deviations}
    return report


def cmd_theorem_chain(config):
    """All chain quantities and slacks for a symmetric star body."""
    n, tol = config.dimension, config.tol
    body = parse_body(config.body, n)
    K = body.require_star()
    report = _report(config)
    C = _constants(config, report)
    try:
        chain = theorem_chain(K, config.resolution, config.pole_resolution,
                              tol["slack"], C)
    except AsymmetricBodyError as exc:
        raise SpecError(str(exc), "body") from None
    s = chain.slacks
    quad = build_sphere_quadrature(n, config.resolution)
    rho = K.radial(quad.nodes)
    is_ball = float(np.ptp(rho) / np.mean(rho)) < tol["slack"]
    report.add("isotropy_stage_sound", s["section_isotropy"] >= -tol["slack"],
               {"slack": s["section_isotropy"]}, {"slack": tol["slack"]})
    report.add("holder_stage_sound", s["holder"] >= -tol["slack"],
               {"slack": s["holder"]}, {"slack": tol["slack"]})
    report.add("urysohn_stage_sound", chain.urysohn_gap >= -tol["slack"]
               and s["urysohn"] >= -tol["slack"],
               {"slack": s["urysohn"], "urysohn_gap": chain.urysohn_gap},
               {"slack": tol["slack"]})
    report.add("identities", abs(s["density"]) < tol["identity"]
               and abs(s["closure"]) < tol["identity"],
               {"density": s["density"], "closure": s["closure"]},
               {"identity": tol["identity"]})
    report.add("rigidity_consistent",
               (chain.verdict == "ball-consistent") == is_ball,
               {"verdict": chain.verdict, "radial_is_ball": is_ball},
               {"slack": tol["slack"]})
    report.results = {**chain.as_dict(),
                      "hypothesis_holds": chain.hypothesis_holds}
    return report


def _invariant_test_function(G, seed):
    return symmetrize(random_trig_polynomial(G.dimension, seed), G)


def cmd_symmetry(config):
    """Completeness of a group and the isotropy it forces."""
    tol = config.tol
    report = _report(config)
    try:
        G = parse_group(config.group, config.dimension)
    except GroupOrderError as exc:
        report.add("group_closure", False, {"error": str(exc)},
                   {"max_order": exc.cap})
        return report
    except NonOrthogonalError as exc:
        raise SpecError(str(exc), "group.generators") from None
    n = G.dimension
    report.constants = None
    res = G.closure_residual()
    report.add("group_closure", res < tol["closure"],
               {"order": G.order, "closure_residual": res},
               {"closure": tol["closure"]})
    dim, _ = invariant_quadratic_space(G)
    complete = dim == 1
    results = {"group": G.name, "order": G.order, "dimension": n,
               "invariant_dimension": dim, "complete": complete}
    if n == 2:
        planar = planar_completeness(G)
        results["planar_complete"] = planar
        report.add("planar_criterion_agrees", planar == complete,
                   {"planar": planar, "linear_algebra": complete})
    quad = build_sphere_quadrature(n, config.resolution, samples=config.samples,
                                   seed=config.seed)
    f = _invariant_test_function(G, config.seed)
    rep = complete_symmetry_check(f, G, quad, tol["isotropy"])
    report.add("complete_symmetry_implies_isotropy", rep.consistent,
               rep.as_dict(), {"isotropy": tol["isotropy"]})
    if n == 3:
        body = parse_body(config.body, 3)
        rho = body.require_star().radial
        _, bound = stability_sweep(resolution=config.resolution)
        rot = rotation_equator_check(rho, 2 * pi / 5, config.poles,
                                     config.resolution, tol["rotation"],
                                     config.seed)
        values = {"max_residual": rot.max_residual, "passed": rot.passed,
                  "failing_poles": rot.failing_poles,
                  "oscillation": rot.oscillation, "stability_constant": bound}
        ok = True
        if rot.passed:
            # bound the oscillation through the stability framework
            stab = stability_deviation(rho, rot.poles, config.resolution)
            limit = bound * (stab.eps_max + stab.delta) + tol["oscillation"]
            ok = rot.oscillation < limit
            values.update(eps_max=stab.eps_max, delta=stab.delta,
                          oscillation_bound=limit)
        report.add("rotation_equator_consequence", ok, values,
                   {"rotation": tol["rotation"], "oscillation": tol["oscillation"]})
        results["rotation_residuals"] = rot.residuals
    report.results = results
    return report


def _principal_basis(E, frame):
    """Principal axes of the projected ellipse, as rows in frame coordinates."""
    P = frame.basis @ E.M @ frame.basis.T
    _, V = np.linalg.eigh(P)
    return V.T


def cmd_counterexample(config):
    """The non-ellipsoid, non-revolution body with unconditional projections."""
    tol = config.tol
    if config.dimension != 3:
        raise SpecError("the counterexample is built in R^3", "dim")
    body = parse_body(config.body, 3)
    if body.kind != "ellipsoid_plus_ball":
        raise SpecError("expected kind 'ellipsoid_plus_ball'", "body.kind")
    L = body.convex
    E = L.ellipsoid
    report = _report(config)
    quad = build_sphere_quadrature(3, config.resolution)
    _, fit = fit_ellipsoid(L.support, quad)
    rev = body_of_revolution_residual(L.support)
    report.add("not_an_ellipsoid", fit > tol["fit_min"], {"fit_residual": fit},
               {"fit_min": tol["fit_min"]})
    report.add("not_a_body_of_revolution", rev > tol["revolution_min"],
               {"revolution_residual": rev}, {"revolution_min": tol["revolution_min"]})
    polar = polar_radial(L)
    U = sample_directions(3, config.poles, config.seed)
    unc, sec, pol = [], [], []
    for u in U:
        frame = equator_frame(u)
        circle = equator_quadrature(frame, config.resolution)
        basis = _principal_basis(E, frame)
        hp = projection_support(L, frame)
        rp = restrict_to_equator(polar.radial, frame)
        unc.append(unconditionality_residual(hp, basis, circle))
        sec.append(unconditionality_residual(rp, basis, circle))
        v = circle.local
        pol.append(float(np.max(np.abs(rp(v) * hp(v) - 1.0))))
    report.add("projections_unconditional", max(unc) < tol["unconditional"],
               {"max_residual": max(unc), "count": len(U)},
               {"unconditional": tol["unconditional"]})
    report.add("polar_sections_unconditional", max(sec) < tol["unconditional"],
               {"max_residual": max(sec)}, {"unconditional": tol["unconditional"]})
    report.add("polarity_identity", max(pol) < tol["polarity"],
               {"max_residual": max(pol)}, {"polarity": tol["polarity"]})
    control = ellipsoid_plus_ball((1.0, 1.0, 1.0), body.params["radius"])
    _, cfit = fit_ellipsoid(control.support, quad)
    report.add("control_ball_fit", cfit < tol["control_fit"],
               {"fit_residual": cfit}, {"control_fit": tol["control_fit"]})
    cw_checks = {}
    for name, K in (("ball", Ball(1.0, 3)),
                    ("constant_width", constant_width_body(2.0, 0.05, 3))):
        x = quad.nodes
        s = K.h(x) + K.h(-x)
        cw_checks[name] = float(np.ptp(s))
    report.add("constant_width_sum", max(cw_checks.values()) < tol["constant_width"],
               cw_checks, {"constant_width": tol["constant_width"]})
    cw = constant_width_body(2.0, 0.05, 3)
    scan = equator_isotropy_scan(cw.support, U, config.resolution)
    report.add("constant_width_equator_moments",
               scan.max_anisotropy < tol["equator_moment"],
               {"max_anisotropy": scan.max_anisotropy,
                "max_centroid_norm": float(scan.centroid_norms.max())},
               {"equator_moment": tol["equator_moment"]},
               note="second moments of h_K are isotropic on every equator; "
                    "equator centroids are not zero for this body")
    report.results = {"fit_residual": fit, "revolution_residual": rev,
                      "unconditional_residuals": unc,
                      "polar_section_residuals": sec}
    report.tables["projections"] = {"pole": U, "unconditional": np.array(unc),
                                    "polar_section": np.array(sec)}
    return report


def _child_seeds(seed, count):
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def cmd_busemann(config):
    """Busemann's identity on random inputs and two-function rigidity."""
    n, tol = config.dimension, config.tol
    report = _report(config)
    C = _constants(config, report)
    k_sigma = tol["sigma"]
    ones = [SphericalFunction.constant(1.0, n)] * (n - 1)
    cal = busemann_check(ones, config.samples, config.seed, C,
                         resolution=config.resolution)
    report.add("calibration", cal.rel_err < k_sigma * cal.rel_sigma,
               asdict(cal), {"sigma": k_sigma})
    seeds = _child_seeds(config.seed, 2 * config.trials)
    rows = []
    for i in range(config.trials):
        F = [random_trig_polynomial(n, seeds[2 * i + j], even=True)
             for j in range(n - 1)]
        r = busemann_check(F, config.samples, seeds[2 * i], C,
                           resolution=config.resolution)
        rows.append(r)
    worst = max(r.rel_err / r.rel_sigma for r in rows)
    report.add("random_functions", worst < k_sigma,
               {"count": len(rows), "worst_sigma_multiple": worst,
                "rel_errs": [r.rel_err for r in rows]}, {"sigma": k_sigma})
    if n == 3:
        R = axis_rotation([0.0, 0.0, 1.0], 2 * pi / 3)
        G = group_closure([R], 3, name="C3(e3)")
        f = symmetrize(random_trig_polynomial(3, config.seed + 1), G)
        g_rot = f.rotate(R.T)
        cases = {
            "f_composed_R": (g_rot, "f=g"),
            "f_reflected": (f.reflect(), "f=g(-x)"),
            "equator_e3_only": (f + SphericalFunction(lambda x: x[:, 2] ** 2, 3),
                                "hypothesis-violated"),
        }
        verdicts = {}
        for name, (g, expected) in cases.items():
            res = two_function_rigidity(f, g, resolution=config.resolution,
                                        tolerance=tol["rigidity"])
            verdicts[name] = {"verdict": res.verdict, "expected": expected,
                              "residual_same": res.residual_same,
                              "residual_reflected": res.residual_reflected,
                              "worst_equator_residual": res.worst_equator_residual}
        report.add("two_function_rigidity",
                   all(v["verdict"] == v["expected"] for v in verdicts.values()),
                   verdicts, {"rigidity": tol["rigidity"]})
    report.results = {"calibration": asdict(cal),
                      "random": [asdict(r) for r in rows]}
    return report


def cmd_calibrate(config):
    """Calibrate the constant table and compare with closed forms."""
    n, tol = config.dimension, config.tol
    report = _report(config)
    C = calibrate_constants(n, config.resolution, config.samples, config.seed)
    report.constants = C.as_dict()
    area = sphere_area(n)
    closed = {
        "c_urysohn": area ** (1.0 / (n - 1) - 1.0),
        "c_density": 2.0 ** (n - 1) / factorial(n - 1),
        "c_legendre": n / factorial(n) ** (1.0 / n),
        "c_bar": n / factorial(n) ** (1.0 / n),
        "k_cosine": 2.0 * pi ** ((n - 1) / 2) / gamma((n + 1) / 2),
    }
    if n == 3:
        closed["c_busemann"] = 0.5
    grid = n <= 3
    quad = build_sphere_quadrature(n, config.resolution, samples=config.samples,
                                   seed=config.seed)
    a = np.abs(quad.nodes[:, 0])
    # relative standard error of k_cosine; sets the scale for the others
    k_rel = 0.0 if grid else float(np.std(a) / np.mean(a) / np.sqrt(len(a)))
    mc_scale = {"k_cosine": k_rel, "c_density": (n - 1) * k_rel,
                "c_legendre": k_rel, "c_bar": k_rel}
    for name, ref in closed.items():
        val = getattr(C, name)
        rel = abs(val / ref - 1.0)
        if grid or name == "c_urysohn":
            ok, t = rel < tol["closed_form"], {"closed_form": tol["closed_form"]}
        elif name == "c_busemann":
            ok = abs(val - ref) < tol["sigma"] * C.c_busemann_stderr
            t = {"sigma": tol["sigma"]}
        else:
            ok, t = rel < tol["sigma"] * mc_scale[name], {"sigma": tol["sigma"]}
        report.add(f"closed_form_{name}", ok,
                   {"calibrated": val, "closed_form": ref, "rel_err": rel}, t)
    report.results = {"table": C.as_dict(), "closed_forms": closed}
    return report


COMMAND_TABLE = {
    "isotropy": cmd_isotropy,
    "theorem-chain": cmd_theorem_chain,
    "symmetry": cmd_symmetry,
    "counterexample": cmd_counterexample,
    "busemann": cmd_busemann,
    "calibrate": cmd_calibrate,
}
