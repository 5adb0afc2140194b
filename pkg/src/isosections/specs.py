"""Body and group specifications for the command line.

A spec is a built-in name (``"ball"``), an inline JSON object, or the path of
a JSON file.  Body objects carry a ``kind`` plus keyword parameters::

    {"kind": "ellipsoid", "axes": [1, 1, 2]}
    {"kind": "ellipsoid", "matrix": [[1, 0, 0], [0, 2, 0], [0, 0, 3]]}
    {"kind": "radial_harmonic_perturbation", "amplitude": 0.1, "degree": 2}

Group objects name a built-in or list generator matrices::

    {"builtin": "dihedral-5"}
    {"generators": [[[0, -1], [1, 0]]], "max_order": 100}
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bodies import (
    Ball,
    Cube,
    Ellipsoid,
    StarBody,
    ball,
    constant_width_body,
    ellipsoid_plus_ball,
    radial_harmonic_perturbation,
)
from .symmetry import DEFAULT_MAX_ORDER, builtin_group, group_closure


class SpecError(ValueError):
    """A malformed body or group specification; ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass
class BodySpec:
    kind: str
    params: dict
    star: StarBody | None
    convex: object | None

    def as_dict(self):
        return {"kind": self.kind, **self.params}

    def require_star(self):
        if self.star is None:
            raise SpecError(f"body kind {self.kind!r} has no radial function",
                            "body.kind")
        return self.star

    def require_convex(self):
        if self.convex is None:
            raise SpecError(f"body kind {self.kind!r} has no support function",
                            "body.kind")
        return self.convex


def _load_json(text, what):
    path = Path(text)
    if text.strip().startswith(("{", "[")):
        source = text
    elif path.suffix == ".json" or path.exists():
        if not path.exists():
            raise SpecError(f"file not found: {text}", what)
        source = path.read_text()
    else:
        return text
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON at line {exc.lineno} column {exc.colno}: "
                        f"{exc.msg}", what) from None


def _floats(value, field, length=None):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise SpecError("expected numbers", field) from None
    if length is not None and arr.shape != (length,):
        raise SpecError(f"expected {length} numbers", field)
    if not np.all(np.isfinite(arr)):
        raise SpecError("values must be finite", field)
    return arr


def _positive(value, field):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise SpecError("expected a number", field) from None
    if not v > 0:
        raise SpecError("must be positive", field)
    return v


_BODY_KEYS = {
    "ball": {"radius"},
    "ellipsoid": {"axes", "matrix"},
    "cube": {"half_width"},
    "ellipsoid_plus_ball": {"axes", "radius"},
    "radial_harmonic_perturbation": {"radius", "amplitude", "degree", "axis"},
    "constant_width": {"width", "amplitude"},
}


def parse_body(spec, n=3):
    """Build a :class:`BodySpec` from a name, JSON text, a file or a dict."""
    if isinstance(spec, str):
        spec = _load_json(spec, "body")
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict):
        raise SpecError("expected an object", "body")
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _BODY_KEYS:
        raise SpecError(f"unknown kind {kind!r}; expected one of "
                        f"{sorted(_BODY_KEYS)}", "body.kind")
    extra = set(spec) - _BODY_KEYS[kind]
    if extra:
        raise SpecError(f"unexpected fields {sorted(extra)}", f"body.{sorted(extra)[0]}")
    if kind == "ball":
        r = _positive(spec.get("radius", 1.0), "body.radius")
        return BodySpec(kind, {"radius": r}, ball(r, n), Ball(r, n))
    if kind == "cube":
        w = _positive(spec.get("half_width", 1.0), "body.half_width")
        C = Cube(w, n)
        return BodySpec(kind, {"half_width": w}, C.as_star_body(), C)
    if kind == "ellipsoid":
        if "matrix" in spec:
            M = _floats(spec["matrix"], "body.matrix")
            if M.shape != (n, n) or not np.allclose(M, M.T):
                raise SpecError(f"expected a symmetric {n}x{n} matrix", "body.matrix")
            if np.min(np.linalg.eigvalsh(M)) <= 0:
                raise SpecError("matrix must be positive definite", "body.matrix")
            E, params = Ellipsoid(M), {"matrix": M.tolist()}
        else:
            axes = _floats(spec.get("axes", [1.0] * (n - 1) + [1.5]), "body.axes", n)
            if np.min(axes) <= 0:
                raise SpecError("axes must be positive", "body.axes")
            E, params = Ellipsoid.from_axes(axes), {"axes": axes.tolist()}
        return BodySpec(kind, params, E.as_star_body(), E)
    if kind == "ellipsoid_plus_ball":
        if n != 3:
            raise SpecError("implemented for n = 3", "dim")
        axes = _floats(spec.get("axes", [1.0, 2.0, 3.0]), "body.axes", 3)
        r = _positive(spec.get("radius", 1.0), "body.radius")
        L = ellipsoid_plus_ball(tuple(axes), r)
        return BodySpec(kind, {"axes": axes.tolist(), "radius": r},
                        None, L)
    if kind == "radial_harmonic_perturbation":
        r = _positive(spec.get("radius", 1.0), "body.radius")
        a = float(spec.get("amplitude", 0.1))
        deg = spec.get("degree", 2)
        if not isinstance(deg, int) or deg < 0:
            raise SpecError("expected a non-negative integer", "body.degree")
        if abs(a) >= 1.0:
            raise SpecError("|amplitude| must be below 1", "body.amplitude")
        axis = spec.get("axis")
        axis = None if axis is None else _floats(axis, "body.axis", n)
        K = radial_harmonic_perturbation(r, a, deg, axis, n)
        params = {"radius": r, "amplitude": a, "degree": deg,
                  "axis": None if axis is None else axis.tolist()}
        return BodySpec(kind, params, K, None)
    w = _positive(spec.get("width", 2.0), "body.width")
    a = float(spec.get("amplitude", 0.05))
    L = constant_width_body(w, a, n)
    return BodySpec(kind, {"width": w, "amplitude": a}, None, L)


def parse_group(spec, n=3):
    """Build a finite group from a built-in name, JSON text, a file or a dict."""
    if isinstance(spec, str):
        spec = _load_json(spec, "group")
    if isinstance(spec, str):
        spec = {"builtin": spec}
    if not isinstance(spec, dict):
        raise SpecError("expected an object", "group")
    max_order = spec.get("max_order", DEFAULT_MAX_ORDER)
    if not isinstance(max_order, int) or max_order < 1:
        raise SpecError("expected a positive integer", "group.max_order")
    if "builtin" in spec:
        try:
            return builtin_group(str(spec["builtin"]), int(spec.get("dim", n)))
        except (KeyError, ValueError) as exc:
            raise SpecError(str(exc).strip("'\""), "group.builtin") from None
    if "generators" not in spec:
        raise SpecError("expected 'builtin' or 'generators'", "group")
    gens = []
    for i, g in enumerate(spec["generators"]):
        M = _floats(g, f"group.generators[{i}]")
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise SpecError("expected a square matrix", f"group.generators[{i}]")
        gens.append(M)
    if not gens:
        raise SpecError("at least one generator is required", "group.generators")
    # closure errors (non-orthogonal input, order overflow) propagate as-is
    return group_closure(gens, max_order, name=spec.get("name", "custom"))
