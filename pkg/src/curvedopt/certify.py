"""Sampling-based certificates for curvature moduli.

Every check draws seeded samples, evaluates the defining inequality of one
curvature notion and reports the worst ratio it saw.  The result is a
one-sided certificate: a PASS means no violation was found among the
samples, never a proof; a FAIL comes with an explicit witness.

Sampling is uniform in the tight coordinate box around the body, rejected
into the body, with 20% of the pairs replaced by boundary pairs (near pairs
at log-uniform angular separations, near-antipodal pairs and random boundary
pairs), because the extremal configurations for these notions live on the
boundary.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .bodies import Ball
from .errors import DegenerateBody, DomainError
from .rng import stream, unit_vectors

PASS_TOL = 1e-7
CONTAIN_TOL = 1e-9
DEGENERATE_PAIR = 1e-6
ENRICH_FRACTION = 0.2
MIN_ACCEPTANCE = 1e-6
NEAR_SEPARATION = (1e-3, 0.5)


class Notion(enum.Enum):
    TWO_CONVEX = "TwoConvex"
    TWO_SMOOTH = "TwoSmooth"
    SET_STRONG_CONVEX = "SetStrongConvex"
    FN_STRONG_CONVEX = "FnStrongConvex"
    FN_STRONG_SMOOTH = "FnStrongSmooth"
    SPHERE_LIPSCHITZ = "SphereLipschitz"
    NON_MIDPOINT = "NonMidpoint"


# smoothness is an upper-bound notion; every other modulus is a lower bound
_UPPER = {Notion.TWO_SMOOTH, Notion.FN_STRONG_SMOOTH}


@dataclass
class ModulusReport:
    notion: Notion
    claimed_modulus: float
    empirical_modulus: float
    witness: dict = field(default_factory=dict)
    samples: int = 0
    seed: int = 0

    @property
    def passed(self):
        if self.notion in _UPPER:
            return bool(self.empirical_modulus <= self.claimed_modulus + PASS_TOL)
        return bool(self.empirical_modulus >= self.claimed_modulus - PASS_TOL)

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"

    def to_dict(self):
        def clean(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        emp = self.empirical_modulus
        return {
            "notion": self.notion.value,
            "claimed_modulus": self.claimed_modulus,
            "empirical_modulus": None if not np.isfinite(emp) else float(emp),
            "verdict": self.verdict,
            "witness": {k: clean(v) for k, v in self.witness.items()},
            "samples": self.samples,
            "seed": self.seed,
            "note": "sampled certificate: PASS means no violation was found, not a proof",
        }


# sampling ---------------------------------------------------------------------


def sample_in_body(body, n, rng, batch=None):
    """Uniform samples from ``body`` by rejection from its bounding box."""
    lo, hi = body.bounding_box()
    d = body.dim
    out, accepted, drawn = [], 0, 0
    batch = batch or max(4 * n, 1024)
    while accepted < n:
        z = lo + (hi - lo) * rng.random((batch, d))
        keep = z[np.asarray(body.gauge(z)) <= 1.0]
        drawn += batch
        accepted += len(keep)
        out.append(keep)
        if drawn >= 10_000_000 and accepted / drawn < MIN_ACCEPTANCE:
            raise DegenerateBody(f"rejection sampling acceptance {accepted / drawn:.2e} is too low")
    return np.vstack(out)[:n]


def boundary_points(body, directions):
    return directions / np.asarray(body.gauge(directions))[:, None]


def _perturb(rng, u, scale):
    """Unit vectors at angle about ``scale`` from ``u`` (rows)."""
    w = rng.standard_normal(u.shape)
    w -= np.einsum("ij,ij->i", w, u)[:, None] * u
    norms = np.linalg.norm(w, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    v = u + scale[:, None] * w / norms
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_pairs(body, n, rng, enrich=ENRICH_FRACTION):
    """``n`` pairs from ``body``: uniform pairs plus enriched boundary pairs."""
    d = body.dim
    n_e = int(round(enrich * n))
    n_u = n - n_e
    x = sample_in_body(body, n_u, rng) if n_u else np.empty((0, d))
    y = sample_in_body(body, n_u, rng) if n_u else np.empty((0, d))
    if n_e:
        u = unit_vectors(rng, n_e, d)
        sep = np.exp(rng.uniform(*np.log(NEAR_SEPARATION), size=n_e))
        kind = rng.integers(0, 3, size=n_e)
        near = _perturb(rng, u, sep)
        anti = _perturb(rng, -u, sep)
        other = unit_vectors(rng, n_e, d)
        u2 = np.where((kind == 0)[:, None], near, np.where((kind == 1)[:, None], anti, other))
        x = np.vstack([x, boundary_points(body, u)])
        y = np.vstack([y, boundary_points(body, u2)])
    return x, y


def _argbest(values, lower=True):
    if values.size == 0:
        return None
    return int(np.argmin(values) if lower else np.argmax(values))


def _report(notion, claimed, ratios, witness_fn, n, seed, lower=True):
    i = _argbest(ratios, lower)
    if i is None:
        emp = np.inf if lower else -np.inf
        return ModulusReport(notion, float(claimed), emp, {}, n, seed)
    return ModulusReport(notion, float(claimed), float(ratios[i]), witness_fn(i), n, seed)


def _check_n(n):
    if n < 1:
        raise DomainError("need at least one sample")


# notions -----------------------------------------------------------------------


def check_two_convex(body, D, n=2000, seed=0):
    """(2, D)-convexity: ``||(x+y)/2|| <= 1 - D ||x-y||^2`` on the unit ball."""
    _check_n(n)
    rng = stream(seed, 0)
    x, y = sample_pairs(body, n, rng)
    diff = np.asarray(body.gauge(x - y))
    ok = diff > DEGENERATE_PAIR
    x, y, diff = x[ok], y[ok], diff[ok]
    ratio = (1.0 - np.asarray(body.gauge(0.5 * (x + y)))) / diff**2
    return _report(
        Notion.TWO_CONVEX, D, ratio, lambda i: {"x": x[i], "y": y[i], "ratio": ratio[i]}, n, seed
    )


def check_two_smooth(body, D, n=2000, seed=0, y_radius=2.0):
    """(2, D)-smoothness: ``(||x+y|| + ||x-y||)/2 <= 1 + D ||y||^2`` for ``||x|| = 1``.

    ``y`` ranges over ``y_radius`` times the body; a fifth of the samples use
    small ``y`` at log-uniform scales, where the ratio of a smooth body peaks.
    """
    _check_n(n)
    rng = stream(seed, 1)
    d = body.dim
    x = boundary_points(body, unit_vectors(rng, n, d))
    n_e = int(round(ENRICH_FRACTION * n))
    y_u = y_radius * sample_in_body(body, n - n_e, rng) if n - n_e else np.empty((0, d))
    scale = y_radius * np.exp(rng.uniform(np.log(1e-3), 0.0, size=n_e))
    y_e = scale[:, None] * boundary_points(body, unit_vectors(rng, n_e, d)) if n_e else np.empty((0, d))
    y = np.vstack([y_u, y_e])
    gy = np.asarray(body.gauge(y))
    ok = gy > DEGENERATE_PAIR
    x, y, gy = x[ok], y[ok], gy[ok]
    excess = 0.5 * (np.asarray(body.gauge(x + y)) + np.asarray(body.gauge(x - y))) - 1.0
    ratio = excess / gy**2
    return _report(
        Notion.TWO_SMOOTH, D, ratio, lambda i: {"x": x[i], "y": y[i], "ratio": ratio[i]}, n, seed, lower=False
    )


def _largest_inflation(K, centre, push, cap=1e6, steps=64):
    """Largest ``lam`` with ``||centre + lam * push||_K <= 1 + tol``, per row.

    The gauge is convex in ``lam``, so the feasible set is an interval
    starting at zero and bisection applies.
    """
    lim = 1.0 + CONTAIN_TOL
    lo = np.zeros(len(centre))
    hi = np.ones(len(centre))
    inside = lambda lam: np.asarray(K.gauge(centre + lam[:, None] * push)) <= lim
    grow = inside(hi)
    while np.any(grow) and np.all(hi[grow] < cap):
        lo[grow] = hi[grow]
        hi[grow] *= 2.0
        grow = grow & inside(hi)
    hi[grow] = np.inf
    lo[grow] = np.inf
    active = ~grow
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        ok = inside(np.where(active, mid, 0.0)) & active
        lo = np.where(ok, mid, lo)
        hi = np.where(active & ~ok, mid, hi)
    return lo


def _inflation_check(K, C, lam, n, seed, notion, mu=None):
    _check_n(n)
    rng = stream(seed, 2 if notion is Notion.SET_STRONG_CONVEX else 3)
    x, y = sample_pairs(K, n, rng)
    d = K.dim
    if notion is Notion.SET_STRONG_CONVEX:
        m = np.full(len(x), 0.5)
    elif mu is None:
        m = rng.random(len(x))
    else:
        m = np.full(len(x), float(mu))
    z = m[:, None] * x + (1.0 - m)[:, None] * y
    # half the pushes point outward from z (through a K-subgradient), the
    # other half are uniform directions on the boundary of C
    dirs = unit_vectors(rng, len(x), d)
    outward = np.any(z != 0, axis=1) & (rng.random(len(x)) < 0.5)
    if np.any(outward):
        dirs[outward] = K.gauge_subgradient(z[outward])
    w = boundary_points(C, dirs)
    dist = np.asarray(C.gauge(x - y))
    factor = 4.0 * m * (1.0 - m) * dist**2
    ok = (dist > DEGENERATE_PAIR) & (factor > 1e-12)
    x, y, z, w, m, factor = x[ok], y[ok], z[ok], w[ok], m[ok], factor[ok]
    lam_hat = _largest_inflation(K, z, factor[:, None] * w)
    wit = lambda i: {"x": x[i], "y": y[i], "mu": m[i], "w": w[i], "lambda_hat": lam_hat[i]}
    return _report(notion, lam, lam_hat, wit, n, seed)


def check_set_strong_convexity(K, C, lam, n=2000, seed=0):
    """Set strong convexity: ``(x+y)/2 + lam ||x-y||_C^2 C ⊆ K``.

    The empirical modulus is the smallest, over sampled ``(x, y, w)`` with
    ``w`` on the boundary of ``C``, of the largest admissible ``lam`` (found
    by bisection on the containment).
    """
    return _inflation_check(K, C, lam, n, seed, Notion.SET_STRONG_CONVEX)


def check_nonmidpoint(K, C, lam, n=2000, seed=0, mu=None):
    """Non-midpoint strong convexity: ``z + 4 lam mu(1-mu) ||x-y||_C^2 C ⊆ K``.

    ``z = mu x + (1-mu) y`` with ``mu`` uniform in ``[0, 1]`` unless fixed.
    At ``mu = 1/2`` this is :func:`check_set_strong_convexity`; at ``mu`` in
    ``{0, 1}`` the inflation vanishes and the check passes for every ``lam``.
    """
    if mu is not None and not 0.0 <= mu <= 1.0:
        raise DomainError("mu must lie in [0, 1]")
    return _inflation_check(K, C, lam, n, seed, Notion.NON_MIDPOINT, mu)


def check_fn_strong_convexity(body, G, n=2000, seed=0):
    """Strong convexity of ``f = ||.||_K^2`` with respect to ``||.||_K``.

    The ratio ``(a f(x) + (1-a) f(y) - f(a x + (1-a) y)) / (a (1-a) ||x-y||^2)``
    is minimized over samples; ``a`` is drawn from ``[0.05, 0.95]`` to keep the
    cancellation in the numerator well conditioned.
    """
    _check_n(n)
    rng = stream(seed, 4)
    x, y = sample_pairs(body, n, rng)
    a = rng.uniform(0.05, 0.95, size=len(x))
    dist = np.asarray(body.gauge(x - y))
    ok = dist > DEGENERATE_PAIR
    x, y, a, dist = x[ok], y[ok], a[ok], dist[ok]
    f = lambda v: np.asarray(body.gauge(v)) ** 2
    mix = a[:, None] * x + (1 - a)[:, None] * y
    gap = a * f(x) + (1 - a) * f(y) - f(mix)
    ratio = gap / (a * (1 - a) * dist**2)
    wit = lambda i: {"x": x[i], "y": y[i], "alpha": a[i], "ratio": ratio[i]}
    return _report(Notion.FN_STRONG_CONVEX, G, ratio, wit, n, seed)


def check_sphere_lipschitz(body, lam, n=2000, seed=0, norm_body=None):
    """Lipschitz support gradients on the sphere.

    Checks ``||a(u) - a(v)||_* <= ||u - v|| / (4 lam)`` for unit ``u, v``, where
    ``a`` is ``support_argmax`` and the norm is the gauge of ``norm_body``
    (Euclidean by default).  The dual norm is the support function of
    ``norm_body``.  The empirical modulus is the smallest
    ``||u - v|| / (4 ||a(u) - a(v)||_*)``.
    """
    _check_n(n)
    if not lam > 0:
        raise DomainError("lam must be positive")
    C = norm_body if norm_body is not None else Ball(1.0, body.dim)
    rng = stream(seed, 5)
    d = body.dim
    u = unit_vectors(rng, n, d)
    n_e = int(round(ENRICH_FRACTION * n))
    sep = np.exp(rng.uniform(*np.log(NEAR_SEPARATION), size=n))
    v = np.where((np.arange(n) < n_e)[:, None], _perturb(rng, u, sep), unit_vectors(rng, n, d))
    u, v = boundary_points(C, u), boundary_points(C, v)
    gap = np.asarray(C.gauge(u - v))
    ok = gap > DEGENERATE_PAIR
    u, v, gap = u[ok], v[ok], gap[ok]
    moved = np.asarray(C.support(body.support_argmax(u) - body.support_argmax(v)))
    with np.errstate(divide="ignore"):
        ratio = np.where(moved > 0, gap / (4.0 * moved), np.inf)
    wit = lambda i: {"u": u[i], "v": v[i], "dual_distance": moved[i], "lambda_hat": ratio[i]}
    return _report(Notion.SPHERE_LIPSCHITZ, lam, ratio, wit, n, seed)


CHECKS = {
    "two_convex": check_two_convex,
    "two_smooth": check_two_smooth,
    "set_strong_convexity": check_set_strong_convexity,
    "fn_strong_convexity": check_fn_strong_convexity,
    "sphere_lipschitz": check_sphere_lipschitz,
    "nonmidpoint": check_nonmidpoint,
}
