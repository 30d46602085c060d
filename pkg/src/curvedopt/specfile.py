"""JSON body specification documents.

A document is an object with ``kind`` and ``dim`` plus kind-specific fields:

===================== =====================================================
kind                  fields
===================== =====================================================
``ball``              ``radius`` (> 0, default 1)
``cube``              ``half_width`` (> 0, default 1); a halfspace polytope
``ellipsoid``         ``matrix``: dim x dim symmetric positive definite
``lp_ball``           ``p`` (>= 1, number or ``"inf"``), ``radius``
``halfspace_polytope`` ``normals``: m x dim, ``offsets``: m positive numbers
``vertex_polytope``   ``vertices``: n x dim, origin strictly interior
``curved``            ``base`` (nested document), ``t`` in [0, 1],
                      optional ``r`` (defaults to the base inscribed radius)
===================== =====================================================

:func:`body_from_spec` checks the invariants in a fixed order and reports the
first one violated as a :class:`~curvedopt.errors.BodySpecError`.
"""
import json
import math

import numpy as np

from .bodies import Ball, Ellipsoid, HalfspacePolytope, LpBall, VertexPolytope
from .errors import BodySpecError, DegenerateBody

KINDS = ("ball", "cube", "ellipsoid", "lp_ball", "halfspace_polytope", "vertex_polytope", "curved")


def _require(cond, message):
    if not cond:
        raise BodySpecError(message)


def _number(spec, key, default=None):
    if key not in spec:
        _require(default is not None, f"missing field '{key}'")
        return float(default)
    v = spec[key]
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"field '{key}' must be a number")
    _require(math.isfinite(v) or key == "p", f"field '{key}' must be finite")
    return float(v)


def _matrix(spec, key, cols):
    _require(key in spec, f"missing field '{key}'")
    try:
        M = np.asarray(spec[key], dtype=float)
    except (TypeError, ValueError):
        raise BodySpecError(f"field '{key}' must be a numeric matrix") from None
    _require(M.ndim == 2 and M.shape[1] == cols, f"field '{key}' must have {cols} columns")
    _require(bool(np.all(np.isfinite(M))), f"field '{key}' has non-finite entries")
    return M


def body_from_spec(spec):
    """Build a body from a parsed specification document."""
    _require(isinstance(spec, dict), "body specification must be a JSON object")
    kind = spec.get("kind")
    _require(kind in KINDS, f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    if kind == "curved":
        from .curving import CurvedBody

        _require("base" in spec, "missing field 'base'")
        base = body_from_spec(spec["base"])
        t = _number(spec, "t")
        _require(0.0 <= t <= 1.0, f"t = {t:g} must lie in [0, 1]")
        r = _number(spec, "r", base.sandwich_radii().r)
        try:
            return CurvedBody(base, t=t, r=r)
        except (ValueError, DegenerateBody) as exc:
            raise BodySpecError(str(exc)) from None

    _require("dim" in spec, "missing field 'dim'")
    dim = spec["dim"]
    _require(isinstance(dim, int) and not isinstance(dim, bool) and dim >= 1, "field 'dim' must be a positive integer")
    try:
        if kind == "ball":
            radius = _number(spec, "radius", 1.0)
            _require(radius > 0, f"radius = {radius:g} must be positive")
            return Ball(radius, dim)
        if kind == "cube":
            w = _number(spec, "half_width", 1.0)
            _require(w > 0, f"half_width = {w:g} must be positive")
            return HalfspacePolytope.cube(dim, w)
        if kind == "lp_ball":
            p = _number(spec, "p")
            _require(p >= 1, f"p = {p:g} must be at least 1")
            radius = _number(spec, "radius", 1.0)
            _require(radius > 0, f"radius = {radius:g} must be positive")
            return LpBall(p, radius, dim)
        if kind == "ellipsoid":
            A = _matrix(spec, "matrix", dim)
            _require(A.shape[0] == dim, f"field 'matrix' must be {dim} x {dim}")
            return Ellipsoid(A)
        if kind == "halfspace_polytope":
            A = _matrix(spec, "normals", dim)
            _require("offsets" in spec, "missing field 'offsets'")
            b = np.asarray(spec["offsets"], dtype=float).reshape(-1)
            _require(b.size == A.shape[0], "need exactly one offset per normal")
            bad = np.flatnonzero(~(b > 0))
            _require(bad.size == 0, f"offsets[{bad[0] if bad.size else 0}] must be positive (origin interior)")
            return HalfspacePolytope(A, b)
        if kind == "vertex_polytope":
            return VertexPolytope(_matrix(spec, "vertices", dim))
    except DegenerateBody as exc:
        raise BodySpecError(str(exc)) from None
    raise AssertionError("unreachable")


def load_body(path):
    """Read and validate a body specification file."""
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BodySpecError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return body_from_spec(spec)


def dump_body(body, path):
    with open(path, "w") as fh:
        json.dump(body.to_spec(), fh, indent=2)
