"""Convex bodies with the origin in their interior.

Each body exposes exact oracles for its gauge (Minkowski functional), a
subgradient of the gauge, its support function and a maximizer of it,
membership with a Euclidean tolerance, inscribed/circumscribed radii and,
where a closed form exists, its polar body.

All oracles are vectorized over leading axes: ``x`` of shape ``(..., d)``
gives results of shape ``(...)`` (or ``(..., d)`` for point-valued ones).
A single vector gives a Python float.

Polytopes are handled through one primitive, :func:`facet_rows`, which turns a
point set ``P`` with the origin in the interior of ``conv(P)`` into the rows
``L`` of the inequality description ``conv(P) = {y : L y <= 1}``.  Since the
polar of ``conv(P)`` is ``{x : P x <= 1}``, the same primitive also enumerates
the vertices of a halfspace polytope.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateBody, UnsupportedKind, ZeroPoint

#: relative slack used to decide ties in maximizer selection
TIE_TOL = 1e-12
#: minimum distance of the origin from the boundary of a vertex hull
INTERIOR_MARGIN = 1e-9


class Membership(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class SandwichRadii:
    """Radii with ``B(r) ⊆ K ⊆ B(R)`` for origin-centred Euclidean balls."""

    r: float
    R: float

    def __iter__(self):
        return iter((self.r, self.R))


def _scalar(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        raise ValueError(f"expected vectors of dimension {dim}, got shape {x.shape}")
    return x


def _unit_scale(x):
    """Split rows as ``x = m * y`` with ``max |y_i| = 1``; zero rows keep ``m = 1``.

    Norms and quadratic forms of ``y`` neither underflow nor overflow, and
    every oracle here is positively homogeneous, so evaluating on ``y`` is
    exact up to rounding.
    """
    m = np.max(np.abs(x), axis=-1, keepdims=True)
    m = np.where(m > 0, m, 1.0)
    return x / m, m[..., 0]


def first_max_index(values):
    """Index of the first entry within ``TIE_TOL`` of the maximum, along the last axis."""
    values = np.asarray(values)
    top = values.max(axis=-1, keepdims=True)
    slack = TIE_TOL * np.maximum(1.0, np.abs(top))
    return np.argmax(values >= top - slack, axis=-1)


def _dedupe_rows(rows, decimals=10):
    # lexicographic order of the rounded keys gives a canonical ordering
    _, idx = np.unique(np.round(rows, decimals), axis=0, return_index=True)
    return rows[idx]


def facet_rows(points, margin=INTERIOR_MARGIN):
    """Rows ``L`` with ``conv(points) = {y : L y <= 1}``.

    Raises :class:`DegenerateBody` when the hull is not full dimensional or the
    origin is not interior with at least ``margin`` Euclidean clearance.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise DegenerateBody("need a non-empty (n, d) array of points")
    d = P.shape[1]
    if d == 1:
        hi, lo = P.max(), P.min()
        if hi < margin or lo > -margin:
            raise DegenerateBody("origin is not interior to the hull of the points")
        return np.array([[-1.0 / -lo], [1.0 / hi]])
    if P.shape[0] <= d:
        raise DegenerateBody(f"{P.shape[0]} points cannot span a {d}-dimensional body")
    try:
        hull = ConvexHull(P)
    except QhullError as exc:
        raise DegenerateBody(f"hull is not full dimensional: {exc.args[0].splitlines()[0]}") from None
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]  # unit normals: offsets are distances from the origin
    if offsets.min() < margin:
        raise DegenerateBody(
            f"origin is within {offsets.min():.3g} of the hull boundary (margin {margin:g} required)"
        )
    return _dedupe_rows(normals / offsets[:, None])


def gauge_by_bisection(contains, x, tol=1e-10, hi=None):
    """Gauge of a body given only a membership predicate.

    Finds ``inf{lam > 0 : x / lam in K}`` by bisection to absolute precision
    ``tol``.  Meant as an oracle for the closed-form gauges, not for speed.
    """
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return 0.0
    lo = 0.0
    hi = 1.0 if hi is None else float(hi)
    while not contains(x / hi):
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid > 0 and contains(x / mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class ConvexBody:
    """Common interface; concrete families override the oracles."""

    kind = "abstract"
    dim: int

    def gauge(self, x):
        raise NotImplementedError

    def gauge_subgradient(self, x):
        raise NotImplementedError

    def support(self, c):
        raise NotImplementedError

    def support_argmax(self, c):
        raise NotImplementedError

    def anchor(self):
        """Deterministic point of ``K`` returned by ``support_argmax(0)``."""
        raise NotImplementedError

    def polar(self):
        raise UnsupportedKind(f"{self.kind} has no closed-form polar")

    def sandwich_radii(self) -> SandwichRadii:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise UnsupportedKind(f"{self.kind} has no body specification form")

    # shared machinery ---------------------------------------------------

    def contains(self, x, tol=1e-9):
        return np.asarray(self.gauge(x)) <= 1.0 + tol

    def membership(self, x, delta):
        """Classify ``x`` against ``K`` with Euclidean tolerance ``delta``.

        The tolerance is converted to gauge units through the inscribed
        radius, ``delta / r``.
        """
        if delta <= 0:
            raise ValueError("delta must be positive")
        slack = delta / self.sandwich_radii().r
        g = self.gauge(x)
        if g <= 1.0 - slack:
            return Membership.INSIDE
        if g >= 1.0 + slack:
            return Membership.OUTSIDE
        return Membership.BOUNDARY

    def bounding_box(self):
        """Coordinate box ``[lo, hi]`` containing the body (tight)."""
        eye = np.eye(self.dim)
        hi = np.asarray(self.support(eye), dtype=float)
        lo = -np.asarray(self.support(-eye), dtype=float)
        return lo, hi

    def _argmax_with_anchor(self, c, solve):
        # the argmax is scale invariant; normalizing avoids under/overflow
        c, _ = _unit_scale(_as_points(c, self.dim))
        zero = ~np.any(c != 0, axis=-1)
        if c.ndim == 1:
            return self.anchor() if zero else solve(c)
        out = np.empty_like(c)
        if np.any(~zero):
            out[~zero] = solve(c[~zero])
        out[zero] = self.anchor()
        return out

    def _check_nonzero(self, x):
        x = _as_points(x, self.dim)
        if np.any(~np.any(x != 0, axis=-1)):
            raise ZeroPoint("gauge subgradient requested at the origin")
        # subgradients of a gauge are scale invariant
        return _unit_scale(x)[0]

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class Ball(ConvexBody):
    """Euclidean ball ``B(radius)`` in R^dim."""

    kind = "ball"

    def __init__(self, radius=1.0, dim=2):
        if not radius > 0:
            raise DegenerateBody("ball radius must be positive")
        if int(dim) < 1:
            raise DegenerateBody("dimension must be at least 1")
        self.radius = float(radius)
        self.dim = int(dim)

    def gauge(self, x):
        y, m = _unit_scale(_as_points(x, self.dim))
        return _scalar(m * np.linalg.norm(y, axis=-1) / self.radius)

    def gauge_subgradient(self, x):
        x = self._check_nonzero(x)
        return x / (self.radius * np.linalg.norm(x, axis=-1, keepdims=True))

    def support(self, c):
        y, m = _unit_scale(_as_points(c, self.dim))
        return _scalar(self.radius * m * np.linalg.norm(y, axis=-1))

    def support_argmax(self, c):
        return self._argmax_with_anchor(
            c, lambda v: self.radius * v / np.linalg.norm(v, axis=-1, keepdims=True)
        )

    def anchor(self):
        e = np.zeros(self.dim)
        e[0] = self.radius
        return e

    def polar(self):
        return Ball(1.0 / self.radius, self.dim)

    def sandwich_radii(self):
        return SandwichRadii(self.radius, self.radius)

    def to_spec(self):
        return {"kind": "ball", "dim": self.dim, "radius": self.radius}

    def __repr__(self):
        return f"Ball(radius={self.radius:g}, dim={self.dim})"


class Ellipsoid(ConvexBody):
    """``{x : x^T A x <= 1}`` for a symmetric positive definite ``A``."""

    kind = "ellipsoid"

    def __init__(self, matrix):
        A = np.atleast_2d(np.asarray(matrix, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise DegenerateBody("ellipsoid matrix must be square")
        if not np.allclose(A, A.T, rtol=1e-12, atol=1e-12):
            raise DegenerateBody("ellipsoid matrix must be symmetric")
        A = 0.5 * (A + A.T)
        try:
            np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            raise DegenerateBody("ellipsoid matrix must be positive definite") from None
        self.matrix = A
        self.inverse = np.linalg.inv(A)
        self.dim = A.shape[0]
        self.matrix.setflags(write=False)
        self.inverse.setflags(write=False)

    def _quad(self, M, x):
        return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", x, M, x), 0.0))

    def gauge(self, x):
        y, m = _unit_scale(_as_points(x, self.dim))
        return _scalar(m * self._quad(self.matrix, y))

    def gauge_subgradient(self, x):
        x = self._check_nonzero(x)
        return (x @ self.matrix) / self._quad(self.matrix, x)[..., None]

    def support(self, c):
        y, m = _unit_scale(_as_points(c, self.dim))
        return _scalar(m * self._quad(self.inverse, y))

    def support_argmax(self, c):
        return self._argmax_with_anchor(
            c, lambda v: (v @ self.inverse) / self._quad(self.inverse, v)[..., None]
        )

    def anchor(self):
        e = np.zeros(self.dim)
        e[0] = 1.0 / np.sqrt(self.matrix[0, 0])
        return e

    def polar(self):
        return Ellipsoid(self.inverse)

    def sandwich_radii(self):
        eig = np.linalg.eigvalsh(self.matrix)
        return SandwichRadii(float(1.0 / np.sqrt(eig[-1])), float(1.0 / np.sqrt(eig[0])))

    def to_spec(self):
        return {"kind": "ellipsoid", "dim": self.dim, "matrix": self.matrix.tolist()}


def conjugate_exponent(p):
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


class LpBall(ConvexBody):
    """``{x : ||x||_p <= radius}`` for ``1 <= p <= inf``."""

    kind = "lp_ball"

    def __init__(self, p, radius=1.0, dim=2):
        p = float(p)
        if not p >= 1:
            raise DegenerateBody("p must be at least 1")
        if not radius > 0:
            raise DegenerateBody("radius must be positive")
        if int(dim) < 1:
            raise DegenerateBody("dimension must be at least 1")
        self.p = p
        self.q = conjugate_exponent(p)
        self.radius = float(radius)
        self.dim = int(dim)

    @property
    def gauge_rows(self):
        """Rows of the polyhedral gauge for p in {1, inf}; ``None`` otherwise."""
        d = self.dim
        if np.isinf(self.p):
            return np.vstack([np.eye(d), -np.eye(d)]) / self.radius
        if self.p == 1:
            signs = np.array(np.meshgrid(*[[1.0, -1.0]] * d, indexing="ij")).reshape(d, -1).T
            return signs / self.radius
        return None

    def gauge(self, x):
        y, m = _unit_scale(_as_points(x, self.dim))
        return _scalar(m * np.linalg.norm(y, ord=self.p, axis=-1) / self.radius)

    def gauge_subgradient(self, x):
        x = self._check_nonzero(x)
        if np.isinf(self.p):
            i = first_max_index(np.abs(x))
            g = np.zeros_like(x)
            np.put_along_axis(g, i[..., None], np.sign(np.take_along_axis(x, i[..., None], -1)), -1)
            return g / self.radius
        if self.p == 1:
            return np.sign(x) / self.radius
        n = np.linalg.norm(x, ord=self.p, axis=-1, keepdims=True)
        return np.sign(x) * (np.abs(x) / n) ** (self.p - 1) / self.radius

    def support(self, c):
        y, m = _unit_scale(_as_points(c, self.dim))
        return _scalar(self.radius * m * np.linalg.norm(y, ord=self.q, axis=-1))

    def _argmax(self, c):
        if np.isinf(self.q):
            i = first_max_index(np.abs(c))
            x = np.zeros_like(c)
            np.put_along_axis(x, i[..., None], np.sign(np.take_along_axis(c, i[..., None], -1)), -1)
            return self.radius * x
        if self.q == 1:
            return self.radius * np.sign(c)
        n = np.linalg.norm(c, ord=self.q, axis=-1, keepdims=True)
        return self.radius * np.sign(c) * (np.abs(c) / n) ** (self.q - 1)

    def support_argmax(self, c):
        return self._argmax_with_anchor(c, self._argmax)

    def anchor(self):
        e = np.zeros(self.dim)
        e[0] = self.radius
        return e

    def polar(self):
        return LpBall(self.q, 1.0 / self.radius, self.dim)

    def sandwich_radii(self):
        d, rho, p = self.dim, self.radius, self.p
        inv_p = 0.0 if np.isinf(p) else 1.0 / p
        if p >= 2:
            return SandwichRadii(rho, rho * d ** (0.5 - inv_p))
        return SandwichRadii(rho * d ** (0.5 - inv_p), rho)

    def to_spec(self):
        p = "inf" if np.isinf(self.p) else self.p
        return {"kind": "lp_ball", "dim": self.dim, "p": p, "radius": self.radius}

    def __repr__(self):
        return f"LpBall(p={self.p:g}, radius={self.radius:g}, dim={self.dim})"


class _Polytope(ConvexBody):
    """Shared oracles for bodies known by both gauge rows and vertices.

    ``gauge_rows`` are the rows ``L`` of ``K = {x : L x <= 1}``; ``vertices``
    are the extreme points of ``K``.
    """

    gauge_rows: np.ndarray
    vertices: np.ndarray

    def gauge(self, x):
        x = _as_points(x, self.dim)
        return _scalar(np.max(x @ self.gauge_rows.T, axis=-1))

    def gauge_subgradient(self, x):
        x = self._check_nonzero(x)
        return self.gauge_rows[first_max_index(x @ self.gauge_rows.T)]

    def support(self, c):
        c = _as_points(c, self.dim)
        return _scalar(np.max(c @ self.vertices.T, axis=-1))

    def support_argmax(self, c):
        return self._argmax_with_anchor(
            c, lambda v: self.vertices[first_max_index(v @ self.vertices.T)]
        )

    def anchor(self):
        return self.vertices[0].copy()

    def sandwich_radii(self):
        r = 1.0 / np.linalg.norm(self.gauge_rows, axis=1).max()
        R = np.linalg.norm(self.vertices, axis=1).max()
        return SandwichRadii(float(r), float(R))


class HalfspacePolytope(_Polytope):
    """``{x : <a_i, x> <= b_i for all i}`` with every ``b_i > 0``.

    Constraint order is kept: subgradient ties resolve to the first row.
    Vertices are enumerated once at construction and stored in lexicographic
    order, which fixes the tie-break of :meth:`support_argmax`.
    """

    kind = "halfspace_polytope"

    def __init__(self, normals, offsets):
        A = np.atleast_2d(np.array(normals, dtype=float))
        b = np.array(offsets, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise DegenerateBody("need one offset per normal")
        if np.any(b <= 0):
            i = int(np.argmax(b <= 0))
            raise DegenerateBody(f"offset b[{i}] = {b[i]:g} must be positive (origin interior)")
        self.normals = A
        self.offsets = b
        self.dim = A.shape[1]
        self.gauge_rows = A / b[:, None]
        try:
            # vertices of {L x <= 1} are the facet rows of conv(L), the polar
            self.vertices = facet_rows(self.gauge_rows)
        except DegenerateBody as exc:
            raise DegenerateBody(f"halfspace polytope is unbounded or degenerate: {exc}") from None
        for arr in (self.normals, self.offsets, self.gauge_rows, self.vertices):
            arr.setflags(write=False)

    @classmethod
    def box(cls, half_widths):
        """Axis-aligned box ``prod [-w_i, w_i]``; rows ordered ``e_1..e_d, -e_1..-e_d``."""
        w = np.asarray(half_widths, dtype=float).reshape(-1)
        d = w.size
        return cls(np.vstack([np.eye(d), -np.eye(d)]), np.concatenate([w, w]))

    @classmethod
    def cube(cls, dim, half_width=1.0):
        return cls.box(np.full(int(dim), float(half_width)))

    def polar(self):
        return VertexPolytope(self.gauge_rows)

    def to_spec(self):
        return {
            "kind": "halfspace_polytope",
            "dim": self.dim,
            "normals": self.normals.tolist(),
            "offsets": self.offsets.tolist(),
        }

    def __repr__(self):
        return f"HalfspacePolytope(m={len(self.offsets)}, dim={self.dim})"


class VertexPolytope(_Polytope):
    """Convex hull of ``points``; the origin must be interior.

    ``vertices`` keeps the points in the order given (non-extreme points are
    harmless), so argmax ties resolve to the first listed point.
    """

    kind = "vertex_polytope"

    def __init__(self, points):
        V = np.atleast_2d(np.array(points, dtype=float))
        self.vertices = V
        self.dim = V.shape[1]
        self.gauge_rows = facet_rows(V)
        self.vertices.setflags(write=False)
        self.gauge_rows.setflags(write=False)

    def polar(self):
        return HalfspacePolytope(self.vertices, np.ones(len(self.vertices)))

    def to_spec(self):
        return {"kind": "vertex_polytope", "dim": self.dim, "vertices": self.vertices.tolist()}

    def __repr__(self):
        return f"VertexPolytope(n={len(self.vertices)}, dim={self.dim})"


# functional spellings of the body methods --------------------------------

def gauge(body, x):
    return body.gauge(x)


def gauge_subgradient(body, x):
    return body.gauge_subgradient(x)


def support(body, c):
    return body.support(c)


def support_argmax(body, c):
    return body.support_argmax(c)


def polar(body):
    return body.polar()


def membership(body, x, delta):
    return body.membership(x, delta)


def sandwich_radii(body):
    return body.sandwich_radii()
