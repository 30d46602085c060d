"""Vanilla Frank-Wolfe with duality-gap certificates.

Each iteration minimizes the linearization of the objective over the body,
``x~ = argmin <grad f(x), y>``, and moves toward it.  The duality gap
``<grad f(x), x - x~>`` upper-bounds ``f(x) - f*`` for convex ``f``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .curving import CurvedBody, weak_optimize
from .errors import InfeasibleStart, IterationLimit, OracleFailure

FEASIBILITY_TOL = 1e-9


class StepRule(enum.Enum):
    FIXED = "fixed"
    CLASSIC = "classic"  # 2 / (k + 2)
    LINE_SEARCH = "line_search"


@dataclass
class Quadratic:
    """``f(x) = (x - target)^T Q (x - target)``; ``Q`` defaults to the identity."""

    target: np.ndarray
    Q: np.ndarray | None = None

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=float)
        self.Q = np.eye(len(self.target)) if self.Q is None else np.asarray(self.Q, dtype=float)

    def __call__(self, x):
        r = np.asarray(x) - self.target
        return float(r @ self.Q @ r)

    def grad(self, x):
        return 2.0 * self.Q @ (np.asarray(x) - self.target)

    def exact_step(self, x, direction):
        """Minimizer of ``f(x + eta d)`` over ``eta`` in ``[0, 1]``."""
        curv = float(direction @ self.Q @ direction)
        if curv <= 0:
            return 1.0
        eta = -float(self.grad(x) @ direction) / (2.0 * curv)
        return min(max(eta, 0.0), 1.0)


def linear_oracle(body, weak=None, delta=1e-8, max_iters=2000):
    """Return ``c -> argmin_{x in body} <c, x>``.

    Base bodies use ``support_argmax``.  Curved bodies default to the
    cutting-plane :func:`weak_optimize` at precision ``delta``, which only
    touches their gauge; an unfinished run is reported as
    :class:`OracleFailure`.  Pass ``weak`` to override either default.
    """
    if weak is None:
        weak = isinstance(body, CurvedBody)

    if not weak:
        return lambda c: np.asarray(body.support_argmax(-np.asarray(c, dtype=float)), dtype=float)

    def oracle(c):
        try:
            return weak_optimize(body, -np.asarray(c, dtype=float), delta, max_iters).point
        except IterationLimit as exc:
            raise OracleFailure(str(exc)) from exc

    return oracle


@dataclass
class FwTrace:
    iterates: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    values: list = field(default_factory=list)
    rule: StepRule = StepRule.CLASSIC
    eta: float | None = None

    @property
    def best_values(self):
        return np.minimum.accumulate(self.values)

    @property
    def best_gaps(self):
        return np.minimum.accumulate(self.gaps)

    def rows(self):
        for k, (f, g) in enumerate(zip(self.values, self.gaps)):
            yield k, f, g


def fw_solve(body, f, x0, steps, rule=StepRule.CLASSIC, eta=None, tol=0.0, oracle=None):
    """Run Frank-Wolfe for at most ``steps`` iterations.

    ``f`` needs ``__call__`` and ``grad``; the line-search rule also needs
    ``exact_step`` (provided by :class:`Quadratic`).  ``gaps[k]`` is the
    duality gap at ``iterates[k]``; the run stops early once it drops to
    ``tol``.
    """
    rule = StepRule(rule)
    if rule is StepRule.FIXED and not (eta is not None and 0 < eta <= 1):
        raise ValueError("the fixed rule needs 0 < eta <= 1")
    x = np.asarray(x0, dtype=float)
    if float(body.gauge(x)) > 1.0 + FEASIBILITY_TOL:
        raise InfeasibleStart("x0 lies outside the feasible body")
    oracle = oracle or linear_oracle(body)
    trace = FwTrace(rule=rule, eta=eta)
    for k in range(steps + 1):
        grad = f.grad(x)
        vertex = oracle(grad)
        gap = float(grad @ (x - vertex))
        trace.iterates.append(x.copy())
        trace.values.append(f(x))
        trace.gaps.append(gap)
        if gap <= tol or k == steps:
            break
        direction = vertex - x
        if rule is StepRule.FIXED:
            step = eta
        elif rule is StepRule.CLASSIC:
            step = 2.0 / (k + 2.0)
        else:
            step = f.exact_step(x, direction)
        x = x + step * direction
    return trace

