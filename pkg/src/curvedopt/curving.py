"""Strong convexification of a convex body.

Given ``B(r) ⊆ K ⊆ B(R)`` and ``t`` in ``[0, 1]``, the curved body ``K_t`` is
the body whose gauge satisfies

    ||x||_{K_t}^2 = (1 - t^2) ||x||_K^2 + t^2 (||x||_2 / r)^2.

It interpolates between ``K`` (``t = 0``) and ``B(r)`` (``t = 1``), is
``t^2 / 8``-strongly convex with respect to itself, and
``K_t ⊆ K ⊆ sqrt(1 + ((R/r)^2 - 1) t^2) K_t``.

Linear optimization over ``K_t`` is available through two independent
routes: :func:`weak_optimize` (a Kelley cutting-plane method driven only by
the gauge and its subgradients) and :meth:`CurvedBody.support_argmax`, which
solves the convex problem ``min 1/2 ||z||_{K_t}^2 - <c, z>`` directly (its
minimizer is ``sigma_{K_t}(c)`` times the maximizer).  For polyhedral bases
that problem is a small QP whose dual is a non-negative least squares
problem; ball and ellipsoid bases stay ellipsoids.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog, minimize, nnls

from .bodies import Ball, ConvexBody, Ellipsoid, SandwichRadii, _as_points, _scalar, _unit_scale, first_max_index
from .errors import DegenerateBody, IterationLimit, OracleFailure, UnsupportedKind, ZeroPoint


class CurvedBody(ConvexBody):
    """The curved approximation ``K_t`` of ``base``.

    Parameters
    ----------
    base : ConvexBody
        The body ``K``.
    t : float
        Curving parameter in ``[0, 1]``.
    r : float, optional
        Radius of a ball inscribed in ``base``; defaults to its exact
        inscribed radius.
    """

    kind = "curved"

    def __init__(self, base, t, r=None):
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t = {t:g} must lie in [0, 1]")
        base_radii = base.sandwich_radii()
        r = base_radii.r if r is None else float(r)
        if not r > 0:
            raise DegenerateBody("inscribed radius must be positive")
        if r > base_radii.r * (1 + 1e-12):
            raise ValueError(f"r = {r:g} exceeds the inscribed radius {base_radii.r:g} of the base")
        self.base = base
        self.t = t
        self.r = r
        self.dim = base.dim
        self._R = base_radii.R
        self._cos2 = 1.0 - t * t  # weight of the base gauge
        self._tau = (t / r) ** 2  # weight of the squared Euclidean norm
        self._closed = self._closed_form()
        self._nnls_matrix = None

    def _closed_form(self):
        if self.t == 1.0:
            return Ball(self.r, self.dim)
        if isinstance(self.base, Ball):
            k = self._cos2 / self.base.radius**2 + self._tau
            return Ball(1.0 / np.sqrt(k), self.dim)
        if isinstance(self.base, Ellipsoid):
            return Ellipsoid(self._cos2 * self.base.matrix + self._tau * np.eye(self.dim))
        return None

    # gauge side -----------------------------------------------------------

    def gauge(self, x):
        y, m = _unit_scale(_as_points(x, self.dim))
        g = np.asarray(self.base.gauge(y))
        e = np.einsum("...i,...i->...", y, y)
        return _scalar(m * np.sqrt(self._cos2 * g * g + self._tau * e))

    def gauge_subgradient(self, x):
        x = self._check_nonzero(x)
        g = np.asarray(self.base.gauge(x))[..., None]
        sub = self.base.gauge_subgradient(x) if self._cos2 > 0 else 0.0
        num = self._cos2 * g * sub + self._tau * x
        return num / np.asarray(self.gauge(x))[..., None]

    # support side ---------------------------------------------------------

    def support_argmax(self, c):
        return self._argmax_with_anchor(c, self._solve_argmax)

    def support(self, c):
        c = _as_points(c, self.dim)
        x = self.support_argmax(c)
        return _scalar(np.einsum("...i,...i->...", c, x))

    def anchor(self):
        e = np.zeros(self.dim)
        e[0] = 1.0
        return e / self.gauge(e)

    def _solve_argmax(self, c):
        # below this K_t and K share every gauge value to double precision
        if (self.t * self._R / self.r) ** 2 <= 4 * np.finfo(float).eps:
            return self.base.support_argmax(c)
        if self._closed is not None:
            return self._closed.support_argmax(c)
        single = c.ndim == 1
        cs = np.atleast_2d(c)
        rows = getattr(self.base, "gauge_rows", None)
        if rows is not None:
            out = np.array([self._argmax_polyhedral(ci, rows) for ci in cs])
        else:
            out = np.array([self._argmax_smooth(ci) for ci in cs])
        return out[0] if single else out

    def _argmax_polyhedral(self, c, rows):
        # dual of  min 1/2 cos2 s^2 + tau/2 |z|^2 - <c,z>  s.t.  rows @ z <= s
        if self._nnls_matrix is None:
            m = rows.shape[0]
            self._nnls_matrix = np.vstack(
                [rows.T / np.sqrt(self._tau), np.ones((1, m)) / np.sqrt(self._cos2)]
            )
        rhs = np.concatenate([c / np.sqrt(self._tau), [0.0]])
        mu, _ = nnls(self._nnls_matrix, rhs, maxiter=50 * self._nnls_matrix.shape[1])
        resid = c - rows.T @ mu
        if not np.linalg.norm(resid) > 64 * np.finfo(float).eps * np.linalg.norm(c):
            # residual below round-off: tau is too small to move off the base face
            return self.base.support_argmax(c)
        z = resid / self._tau
        return z / self.gauge(z)

    def _argmax_smooth(self, c):
        base, cos2, tau = self.base, self.cos2, self._tau

        def objective(z):
            g = base.gauge(z)
            val = 0.5 * cos2 * g * g + 0.5 * tau * (z @ z) - c @ z
            if g == 0:
                return val, tau * z - c
            return val, cos2 * g * base.gauge_subgradient(z) + tau * z - c

        z0 = base.support_argmax(c) * (c @ base.support_argmax(c))
        res = minimize(objective, z0, jac=True, method="BFGS", options={"gtol": 1e-13, "maxiter": 2000})
        z = res.x
        if not np.any(z):
            raise OracleFailure("smooth argmax solve collapsed to the origin")
        return z / self.gauge(z)

    @property
    def cos2(self):
        return self._cos2

    def sandwich_radii(self):
        # B(r) ⊆ K_t ⊆ K ⊆ B(R)
        return SandwichRadii(self.r, self._R)

    def polar(self):
        raise UnsupportedKind("the polar of a curved body is an L2 sum with no closed form here")

    def to_spec(self):
        return {"kind": "curved", "base": self.base.to_spec(), "t": self.t, "r": self.r}

    def __repr__(self):
        return f"CurvedBody({self.base!r}, t={self.t:g}, r={self.r:g})"


def curved_gauge(Kt, x):
    return Kt.gauge(x)


def curved_gauge_subgradient(Kt, x):
    return Kt.gauge_subgradient(x)


def approximation_factor(r, R, t):
    """Scale ``s`` with ``K ⊆ s K_t``."""
    return float(np.sqrt(1.0 + ((R / r) ** 2 - 1.0) * t * t))


# polar decomposition -----------------------------------------------------


@dataclass
class DecompositionCertificate:
    """Maximizer of ``<y, .>`` over ``K_t° = {sqrt(1-a) u + sqrt(a) v}``.

    ``u_star`` lies in ``sqrt(1 - t^2) K°``, ``v_star`` in ``t B(1/r)``, and
    ``point`` is their combination at ``alpha_star``.  ``value`` equals
    ``<y, point>``, the support function of ``K_t°`` at ``y``, which is the
    gauge of ``K_t`` at ``y``.
    """

    u_star: np.ndarray
    v_star: np.ndarray
    alpha_star: np.ndarray | float
    value: np.ndarray | float
    point: np.ndarray = field(repr=False)

    def in_polar(self, Kt, tol=1e-8):
        """Check ``point ∈ K_t°`` through ``sigma_{K_t}(point) <= 1``."""
        return np.asarray(Kt.support(self.point)) <= 1.0 + tol


def polar_decomposition_max(Kt, y):
    """Maximize ``<y, .>`` over ``K_t°`` in three steps.

    1. ``u*`` maximizes ``<y, u>`` over ``sqrt(1-t^2) K°``; the maximizer of a
       linear function over ``K°`` is a subgradient of ``||.||_K`` at ``y``.
    2. ``v* = (t / r) y / ||y||_2`` maximizes over the ball ``t B(1/r)``.
    3. ``phi(a) = sqrt(1-a) A + sqrt(a) B`` with ``A = <y,u*>``,
       ``B = <y,v*>`` (both non-negative) is concave on ``[0, 1]`` and peaks at
       ``a* = B^2 / (A^2 + B^2)`` with value ``sqrt(A^2 + B^2)``.
    """
    y = _as_points(y, Kt.dim)
    if np.any(~np.any(y != 0, axis=-1)):
        raise ZeroPoint("decomposition requested at the origin")
    scale_u = np.sqrt(Kt.cos2)
    u = scale_u * np.asarray(Kt.base.gauge_subgradient(y))
    norm_y = np.linalg.norm(y, axis=-1, keepdims=True)
    v = (Kt.t / Kt.r) * y / norm_y
    A = np.maximum(np.einsum("...i,...i->...", y, u), 0.0)
    B = (Kt.t / Kt.r) * norm_y[..., 0]
    total = A * A + B * B
    alpha = np.where(total > 0, B * B / np.where(total > 0, total, 1.0), 0.0)
    value = np.sqrt(total)
    point = np.sqrt(1.0 - alpha)[..., None] * u + np.sqrt(alpha)[..., None] * v
    return DecompositionCertificate(u, v, _scalar(alpha), _scalar(value), point)


# weak optimization -------------------------------------------------------


class WeakOptStatus(enum.Enum):
    POINT = "point"
    EMPTY = "empty"


@dataclass
class WeakOptResult:
    """Answer to the weak linear optimization problem at precision ``delta``.

    With status ``POINT``, ``point`` is feasible (gauge at most 1 up to
    round-off) and ``value = <c, point>`` is within ``upper_bound - value``
    of the true maximum over the body.
    """

    status: WeakOptStatus
    point: np.ndarray | None
    value: float
    delta: float
    upper_bound: float = np.inf
    iterations: int = 0

    @property
    def gap(self):
        return self.upper_bound - self.value


def regular_simplex_normals(d):
    """Unit outer normals of a regular simplex in R^d centred at the origin."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    E = np.eye(d + 1) - 1.0 / (d + 1)
    # orthonormal basis of the hyperplane sum(x) = 0
    Q, _ = np.linalg.qr(E[:, :d])
    N = E @ Q
    return N / np.linalg.norm(N, axis=1, keepdims=True)


# HiGHS defaults to 1e-7 feasibility, which caps the certified precision
_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def weak_optimize(body, c, delta, max_iters=500):
    """Maximize ``<c, x>`` over ``body`` with a Kelley cutting-plane method.

    The body is accessed only through its gauge and gauge subgradients.  The
    relaxation starts from the regular simplex whose inscribed ball is
    ``B(R)``; every infeasible LP optimum ``x_k`` adds the cut
    ``<g_k, x> <= 1`` with ``g_k`` a gauge subgradient at ``x_k``, valid on the
    whole body because ``<g_k, x> <= ||x||``.  Radially scaling ``x_k`` onto the
    boundary gives feasible points, so each iteration brackets the optimum.

    Raises
    ------
    IterationLimit
        If the bracket is still wider than ``delta`` after ``max_iters`` LPs;
        the best feasible answer is attached as ``result``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    c = np.asarray(c, dtype=float)
    d = body.dim
    if c.shape != (d,):
        raise ValueError(f"expected a vector of dimension {d}")
    if not np.any(c):
        x = body.anchor()
        return WeakOptResult(WeakOptStatus.POINT, x, 0.0, delta, 0.0, 0)

    R = body.sandwich_radii().R
    G = list(regular_simplex_normals(d) / R)
    best_x, best_val, upper = None, -np.inf, np.inf
    for it in range(1, max_iters + 1):
        lp = linprog(-c, A_ub=np.asarray(G), b_ub=np.ones(len(G)), bounds=(None, None), method="highs", options=_LP_OPTIONS)
        if lp.status != 0:
            raise OracleFailure(f"cutting-plane LP failed: {lp.message}")
        x = lp.x
        upper = min(upper, float(c @ x))
        g = float(body.gauge(x))
        if g <= 1.0:
            best_x, best_val = x, float(c @ x)
            upper = best_val
        else:
            y = x / g
            val = float(c @ y)
            if val > best_val:
                best_x, best_val = y, val
            G.append(np.asarray(body.gauge_subgradient(x), dtype=float))
        if upper - best_val <= delta:
            return WeakOptResult(WeakOptStatus.POINT, best_x, best_val, delta, upper, it)
    result = WeakOptResult(WeakOptStatus.POINT, best_x, best_val, delta, upper, max_iters)
    raise IterationLimit(
        f"gap {upper - best_val:.3g} > delta {delta:g} after {max_iters} cutting planes", result
    )


# choice of t ---------------------------------------------------------------


class TChoice(NamedTuple):
    t: float
    flag: str | None  # None, "clamped" or "degenerate"


def choose_t_for_eps(r, R, eps):
    """Curving parameter with ``K ⊆ (1 + eps) K_t``: ``t^2 = 2 eps / ((R/r)^2 - 1)``.

    Returns ``t = 0`` flagged ``"degenerate"`` when ``R == r`` (the body is
    already a ball) and clamps to ``t = 1`` flagged ``"clamped"`` when the
    formula exceeds one.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if not R >= r > 0:
        raise ValueError("need R >= r > 0")
    excess = (R / r) ** 2 - 1.0
    if excess <= 1e-15:
        return TChoice(0.0, "degenerate")
    t2 = 2.0 * eps / excess
    if t2 > 1.0:
        return TChoice(1.0, "clamped")
    return TChoice(float(np.sqrt(t2)), None)


# negative example ------------------------------------------------------------


class MinkowskiRounding(ConvexBody):
    """The Minkowski combination ``(1 - t) K + t B(r)``.

    Rounds the corners of ``K`` but keeps its flat faces, so it is not
    strongly convex for ``t < 1``.  Its support function is exact; the gauge
    is the outer polyhedral approximation ``max_u <u, x> / sigma(u)`` over a
    fixed direction set that contains every facet normal of a polyhedral base.
    Only intended as a counterexample generator.
    """

    kind = "minkowski_rounding"

    def __init__(self, base, t, r=None, n_directions=4096):
        self.base = base
        self.t = float(t)
        self.r = base.sandwich_radii().r if r is None else float(r)
        self.dim = d = base.dim
        dirs = []
        rows = getattr(base, "gauge_rows", None)
        if rows is not None:
            dirs.append(rows)
        if d == 2:
            th = np.linspace(0.0, 2 * np.pi, n_directions, endpoint=False)
            dirs.append(np.column_stack([np.cos(th), np.sin(th)]))
        else:
            rng = np.random.default_rng(0)
            z = rng.standard_normal((n_directions * d, d))
            dirs.append(z)
        U = np.vstack(dirs)
        U = U / np.linalg.norm(U, axis=1, keepdims=True)
        self._rows = U / np.asarray(self.support(U))[:, None]
        radii = base.sandwich_radii()
        self._radii = SandwichRadii(
            (1 - self.t) * radii.r + self.t * self.r, (1 - self.t) * radii.R + self.t * self.r
        )

    def gauge(self, x):
        x = _as_points(x, self.dim)
        flat = x.reshape(-1, self.dim)
        out = np.empty(len(flat))
        # chunked so the point-by-direction matrix stays small
        for i in range(0, len(flat), 8192):
            out[i : i + 8192] = np.max(flat[i : i + 8192] @ self._rows.T, axis=-1)
        return _scalar(out.reshape(x.shape[:-1]))

    def gauge_subgradient(self, x):
        x = self._check_nonzero(x)
        return self._rows[first_max_index(x @ self._rows.T)]

    def support(self, c):
        c = _as_points(c, self.dim)
        return _scalar((1 - self.t) * np.asarray(self.base.support(c)) + self.t * self.r * np.linalg.norm(c, axis=-1))

    def support_argmax(self, c):
        def solve(v):
            ball = self.r * v / np.linalg.norm(v, axis=-1, keepdims=True)
            return (1 - self.t) * self.base.support_argmax(v) + self.t * ball

        return self._argmax_with_anchor(c, solve)

    def anchor(self):
        return (1 - self.t) * self.base.anchor()

    def sandwich_radii(self):
        return self._radii
