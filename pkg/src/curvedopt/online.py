"""Online linear optimization: Follow the Leader, scripted adversaries and
regret certificates.

The protocol is the gain version: in round ``t`` the learner plays
``x_t ∈ K``, then sees ``g_t`` and collects ``<g_t, x_t>``.  Regret is
``sigma_K(s_T) - sum_t <g_t, x_t>`` with ``s_t = g_1 + ... + g_t``.

Every bound below is evaluated on the realized trace and reported as a
certificate (bound value, whether it holds, whether its hypotheses were met).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bodies import Ball
from .curving import CurvedBody, choose_t_for_eps
from .errors import AdversaryViolation, DomainError, InfeasibleAction
from .rng import stream

FEASIBILITY_TOL = 1e-9


# traces ------------------------------------------------------------------------


@dataclass(frozen=True)
class GameTrace:
    gains: np.ndarray  # (T, d)
    actions: np.ndarray  # (T, d)
    prefix: np.ndarray  # (T, d), prefix[t] = g_1 + ... + g_{t+1}
    round_gain: np.ndarray  # (T,)
    hints: np.ndarray | None = None

    @property
    def T(self):
        return len(self.gains)

    @property
    def total_gain(self):
        return float(self.round_gain.sum())


def ftl_step(K, s_prev, fallback):
    """Follow the Leader: maximize the cumulative gain so far, or play ``fallback``."""
    s_prev = np.asarray(s_prev, dtype=float)
    if not np.any(s_prev):
        return np.asarray(fallback, dtype=float)
    return np.asarray(K.support_argmax(s_prev), dtype=float)


class FollowTheLeader:
    """FTL over ``K``; the first action (and any action at ``s = 0``) is ``fallback``."""

    def __init__(self, K, fallback=None):
        self.K = K
        self.fallback = np.zeros(K.dim) if fallback is None else np.asarray(fallback, dtype=float)
        if float(K.gauge(self.fallback)) > 1.0 + FEASIBILITY_TOL:
            raise InfeasibleAction("FTL fallback point lies outside K")
        self.s = np.zeros(K.dim)

    def act(self, hint=None):
        return ftl_step(self.K, self.s, self.fallback)

    def observe(self, g):
        self.s = self.s + g


# adversaries ---------------------------------------------------------------------


class Adversary:
    """Oblivious gain generator; ``generate(T)`` returns the whole sequence."""

    dim: int
    seed: int = 0

    def generate(self, T):
        raise NotImplementedError

    def verify(self, gains):
        """Raise :class:`AdversaryViolation` if ``gains`` break the contract."""

    def hints(self, gains):
        return None


class GrowthCondition(Adversary):
    """Gains ``g_t = G e + xi_t`` with ``xi_t ⊥ e`` and ``||xi_t|| <= sqrt(M^2 - G^2)``.

    Then ``<s_t, e> = t G`` so ``||s_t|| >= t G``, and ``||g_t|| <= M``.
    ``pattern`` is ``"uniform"`` (independent noise of random size and
    direction) or ``"alternating"`` (full-size noise flipping sign each
    round, which keeps FTL moving).
    """

    def __init__(self, G, M, dim=2, pattern="uniform", seed=0, direction=None):
        if not 0 < G <= M:
            raise DomainError("need 0 < G <= M")
        if pattern not in ("uniform", "alternating"):
            raise DomainError(f"unknown noise pattern {pattern!r}")
        self.G, self.M, self.dim, self.pattern, self.seed = float(G), float(M), dim, pattern, seed
        e = np.zeros(dim)
        e[0] = 1.0
        if direction is not None:
            e = np.asarray(direction, dtype=float)
            e = e / np.linalg.norm(e)
        self.e = e

    def generate(self, T):
        rng = stream(self.seed, 10)
        rho = math.sqrt(max(self.M**2 - self.G**2, 0.0))
        w = rng.standard_normal((T, self.dim))
        w -= np.outer(w @ self.e, self.e)
        norms = np.linalg.norm(w, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        w /= norms
        if self.pattern == "uniform":
            size = rho * rng.random(T)
        else:
            w[:] = w[0]
            size = rho * np.where(np.arange(T) % 2 == 0, 1.0, -1.0)
        # shrink by one ulp-scale factor so ||g|| <= M survives rounding
        g = self.G * self.e + (size * (1 - 1e-12))[:, None] * w
        return g

    def verify(self, gains):
        norms = np.linalg.norm(gains, axis=1)
        if np.any(norms > self.M * (1 + 1e-12)):
            raise AdversaryViolation("gain norm exceeds M")
        s = np.linalg.norm(np.cumsum(gains, axis=0), axis=1)
        t = np.arange(1, len(gains) + 1)
        if np.any(s < t * self.G * (1 - 1e-12)):
            raise AdversaryViolation("growth condition ||s_t|| >= t G violated")


class NonNegative(Adversary):
    """i.i.d. gains in the non-negative orthant with ``||g_t||_2 <= M``."""

    def __init__(self, M, dim=2, seed=0):
        if not M > 0:
            raise DomainError("M must be positive")
        self.M, self.dim, self.seed = float(M), dim, seed

    def generate(self, T):
        rng = stream(self.seed, 11)
        z = np.abs(rng.standard_normal((T, self.dim)))
        z /= np.maximum(np.linalg.norm(z, axis=1, keepdims=True), 1e-300)
        return self.M * rng.random((T, 1)) * z

    def verify(self, gains):
        if np.any(gains < 0):
            raise AdversaryViolation("negative gain coordinate")
        if np.any(np.linalg.norm(gains, axis=1) > self.M * (1 + 1e-12)):
            raise AdversaryViolation("gain norm exceeds M")


class AlternatingBad(Adversary):
    """``g_1 = (1, 0.01)``, then ``(1, -0.1)`` and ``(1, 0.1)`` alternately.

    On the square ``[-1, 1]^2`` FTL flips between ``(1, 1)`` and ``(1, -1)``
    and always lands on the wrong vertex, so its regret grows linearly.
    """

    dim = 2

    def __init__(self, seed=0):
        self.seed = seed

    def generate(self, T):
        g = np.empty((T, 2))
        g[:, 0] = 1.0
        g[:, 1] = np.where(np.arange(T) % 2 == 1, -0.1, 0.1)
        g[0, 1] = 0.01
        return g


class Hinted(Adversary):
    """Wraps a gain adversary and emits unit hints with ``<h_t, g_t> >= alpha ||g_t||``."""

    def __init__(self, alpha, base, seed=0):
        if not 0 < alpha <= 1:
            raise DomainError("alpha must lie in (0, 1]")
        self.alpha, self.base, self.seed, self.dim = float(alpha), base, seed, base.dim

    def generate(self, T):
        return self.base.generate(T)

    def hints(self, gains):
        rng = stream(self.seed, 12)
        T, d = gains.shape
        norms = np.linalg.norm(gains, axis=1, keepdims=True)
        ghat = np.where(norms > 0, gains / np.where(norms > 0, norms, 1.0), 0.0)
        ghat[norms[:, 0] == 0, 0] = 1.0
        w = rng.standard_normal((T, d))
        w -= np.einsum("ij,ij->i", w, ghat)[:, None] * ghat
        wn = np.linalg.norm(w, axis=1, keepdims=True)
        w = np.where(wn > 0, w / np.where(wn > 0, wn, 1.0), 0.0)
        cos = self.alpha + (1 - self.alpha) * rng.random((T, 1))
        h = cos * ghat + np.sqrt(1 - cos**2) * w
        return h / np.linalg.norm(h, axis=1, keepdims=True)

    def verify(self, gains):
        self.base.verify(gains)

    def verify_hints(self, gains, hints):
        if np.any(np.abs(np.linalg.norm(hints, axis=1) - 1) > 1e-9):
            raise AdversaryViolation("hint is not a unit vector")
        lhs = np.einsum("ij,ij->i", hints, gains)
        if np.any(lhs < self.alpha * np.linalg.norm(gains, axis=1) - 1e-12):
            raise AdversaryViolation("hint correlation below alpha")


def play_game(K, learner, adversary, T):
    """Run ``T`` rounds; every action is checked for membership in ``K``."""
    if T < 1:
        raise DomainError("horizon must be at least 1")
    gains = np.asarray(adversary.generate(T), dtype=float)
    adversary.verify(gains)
    hints = adversary.hints(gains)
    if hints is not None:
        adversary.verify_hints(gains, hints)
    actions = np.empty_like(gains)
    for t in range(T):
        x = learner.act(None if hints is None else hints[t])
        actions[t] = x
        learner.observe(gains[t])
    if np.any(np.asarray(K.gauge(actions)) > 1.0 + FEASIBILITY_TOL):
        raise InfeasibleAction("learner played outside K")
    prefix = np.cumsum(gains, axis=0)
    round_gain = np.einsum("ij,ij->i", gains, actions)
    return GameTrace(gains, actions, prefix, round_gain, hints)


# certificates --------------------------------------------------------------------


@dataclass
class Certificate:
    bound: float
    holds: bool | None  # None when the hypotheses are not met
    note: str = ""

    @property
    def applicable(self):
        return self.holds is not None


@dataclass
class RegretReport:
    regret: float
    opt_value: float
    realized_gain: float
    certificates: dict = field(default_factory=dict)
    lam: float | None = None
    M: float | None = None
    G: float | None = None
    C: float | None = None

    def all_hold(self):
        return all(c.holds for c in self.certificates.values() if c.applicable)

    def to_dict(self):
        return {
            "regret": self.regret,
            "opt_value": self.opt_value,
            "realized_gain": self.realized_gain,
            "lambda": self.lam,
            "M": self.M,
            "G": self.G,
            "C": self.C,
            "C_redefined": None if self.C is None else 2.5 * self.C**2,
            "certificates": {
                k: {"bound": c.bound, "holds": c.holds, "note": c.note} for k, c in self.certificates.items()
            },
        }


def _norm(v, norm_body):
    if norm_body is None:
        return np.linalg.norm(v, axis=-1)
    return np.asarray(norm_body.gauge(v))


def running_certificates(K, trace, lam=None, M=None, G=None, norm_body=None, C=None, u=None):
    """Per-round regret and certificate values, one array per column.

    ``ftl_basic[t]`` is the stability sum up to round ``t`` with
    ``x_{t+1} = argmax_K <s_t, .>``.  Bounds whose hypotheses fail are NaN.
    """
    g, x, s = trace.gains, trace.actions, trace.prefix
    T = trace.T
    nxt = np.asarray(K.support_argmax(s), dtype=float)
    if nxt.ndim == 1:
        nxt = nxt[None, :]
    opt = np.einsum("ij,ij->i", s, nxt)
    cols = {
        "cumulative_gain": np.cumsum(trace.round_gain),
    }
    cols["regret"] = opt - cols["cumulative_gain"]
    cols["ftl_basic"] = np.cumsum(np.einsum("ij,ij->i", g, nxt - x))
    t = np.arange(1, T + 1)
    if lam is not None:
        sn = _norm(s, norm_body)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = _norm(g, norm_body) ** 2 / sn
        lip = np.cumsum(terms) / (2 * lam)
        # the Lipschitz bound needs s_t != 0 for every round so far
        lip[np.cumsum(sn == 0) > 0] = np.nan
        cols["regret_lip"] = lip
        if M is not None and G is not None:
            cols["growth_log"] = M**2 / (2 * lam * G) * (1 + np.log(t))
        if M is not None and np.all(g >= 0) and C is not None and u is not None:
            fg = g @ u
            fs = np.cumsum(fg)
            with np.errstate(divide="ignore", invalid="ignore"):
                lin = np.where(fs > 0, fg**2 / np.where(fs > 0, fs, 1.0), 0.0)
            cols["ftl_nonneg_linearized"] = C / (2 * lam) * np.cumsum(lin)
            cols["ftl_nonneg"] = 5 * C**2 * M / (2 * lam) * np.log(t)
    return cols


def regret_report(K, trace, lam=None, M=None, G=None, norm_body=None, ftl=True, slack=1e-8, linearization=None):
    """Regret of ``trace`` and every applicable bound as a certificate.

    ``ftl_basic`` and ``regret_lip`` assume the trace was produced by FTL.
    ``growth_log`` needs a growth condition ``||s_t|| >= t G`` (verified on the
    trace); the two non-negative bounds need every gain in the orthant.
    """
    s_T = trace.prefix[-1]
    opt = float(K.support(s_T))
    realized = trace.total_gain
    regret = opt - realized
    T = trace.T
    report = RegretReport(regret, opt, realized, lam=lam, M=M, G=G)
    certs = report.certificates

    if ftl:
        nxt = np.asarray(K.support_argmax(trace.prefix), dtype=float).reshape(trace.prefix.shape)
        stab = float(np.einsum("ij,ij->", trace.gains, nxt - trace.actions))
        certs["ftl_basic"] = Certificate(stab, regret <= stab + slack, "sum <g_t, x_{t+1} - x_t>")

    if lam is None:
        return report
    sn = _norm(trace.prefix, norm_body)
    if ftl:
        if np.all(sn > 0):
            bound = float(np.sum(_norm(trace.gains, norm_body) ** 2 / sn) / (2 * lam))
            certs["regret_lip"] = Certificate(bound, regret <= bound + 1e-6 * T, "(1/2 lam) sum ||g_t||^2/||s_t||")
        else:
            certs["regret_lip"] = Certificate(math.nan, None, "not applicable: some prefix sum is zero")

    if M is not None and G is not None:
        bound = M**2 / (2 * lam * G) * (1 + math.log(T))
        t = np.arange(1, T + 1)
        grows = bool(np.all(np.linalg.norm(trace.prefix, axis=1) >= t * G * (1 - 1e-12)))
        within = bool(np.all(np.linalg.norm(trace.gains, axis=1) <= M * (1 + 1e-12)))
        holds = (regret <= bound + slack) if (grows and within and ftl) else None
        certs["growth_log"] = Certificate(bound, holds, "M^2/(2 lam G) (1 + ln T)")

    if M is not None and np.all(trace.gains >= 0):
        if linearization is None:
            linearization = nonneg_linearization(norm_body if norm_body is not None else Ball(1.0, K.dim))
        u, C = linearization
        report.C = C
        fg = trace.gains @ u
        fs = np.cumsum(fg)
        keep = fs > 0
        lin = C / (2 * lam) * float(np.sum(fg[keep] ** 2 / fs[keep]))
        ok = ftl and T >= 2
        certs["ftl_nonneg_linearized"] = Certificate(
            lin, (regret <= lin + slack) if ok else None, "(C/2 lam) sum f(g_t)^2 / f(s_t)"
        )
        closed = 5 * C**2 * M / (2 * lam) * math.log(T) if T >= 2 else math.nan
        certs["ftl_nonneg"] = Certificate(closed, (regret <= closed + slack) if ok else None, "(5 C^2 M / 2 lam) ln T")
    return report


# non-negative linearization --------------------------------------------------


def nonneg_linearization(norm_body, d=None, starts=64, seed=0):
    """Linear majorant ``f(x) = <u, x>`` of a norm on the non-negative orthant.

    ``u_i = ||e_i||`` gives ``||x|| <= f(x)`` for ``x >= 0`` by the triangle
    inequality, and ``C = max {f(x) : x >= 0, ||x|| = 1}`` gives
    ``f(x) <= C ||x||``.  ``C`` is bracketed from both sides: feasible points
    (Dirichlet samples refined by SLSQP) give a lower bound and the dual
    ``C = min_{y >= 0} sigma(u + y)`` (support function of the unit ball)
    gives an upper bound.  The returned ``C`` is the upper bound, so the
    majorization is never understated.
    """
    d = norm_body.dim if d is None else d
    eye = np.eye(d)
    u = np.asarray(norm_body.gauge(eye), dtype=float)
    if d == 1:
        return u, 1.0

    ratio = lambda x: float(u @ x) / float(norm_body.gauge(x))
    rng = stream(seed, 13)
    cand = np.vstack([eye, np.ones((1, d)), rng.dirichlet(np.ones(d), size=max(starts, 256 * d))])
    vals = (cand @ u) / np.asarray(norm_body.gauge(cand))
    lower = float(vals.max())
    for x0 in cand[np.argsort(vals)[-min(starts, len(cand)):]]:
        res = minimize(
            lambda x: -ratio(x),
            x0,
            method="SLSQP",
            bounds=[(0.0, 1.0)] * d,
            constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1.0}],
            options={"ftol": 1e-14, "maxiter": 200},
        )
        x = np.clip(res.x, 0.0, None)
        if x.sum() > 0:
            lower = max(lower, ratio(x))

    sig = lambda y: float(norm_body.support(u + y))
    upper = sig(np.zeros(d))
    for y0 in [np.zeros(d)] + [rng.random(d) for _ in range(4)]:
        res = minimize(sig, y0, method="L-BFGS-B", bounds=[(0.0, None)] * d)
        upper = min(upper, float(res.fun))
    if upper < lower - 1e-9 * max(1.0, lower):
        raise AssertionError("non-negative linearization bracket is inverted")
    return u, max(upper, lower)


def log_estimate_check(a, A):
    """Evaluate ``sum a_t^2 / b_t`` against ``5 A ln T`` with ``b_t = a_1 + ... + a_t``.

    Terms with ``b_t = 0`` are skipped (they force ``a_t = 0``).
    Returns ``(lhs, bound, holds)``.
    """
    a = np.asarray(a, dtype=float)
    T = len(a)
    if T < 2:
        raise DomainError("need T >= 2 so that ln T > 0")
    if np.any(a < 0) or np.any(a > A):
        raise DomainError("every a_t must lie in [0, A]")
    b = np.cumsum(a)
    keep = b > 0
    lhs = float(np.sum(a[keep] ** 2 / b[keep]))
    bound = 5.0 * A * math.log(T)
    return lhs, bound, lhs <= bound


# curving reduction -----------------------------------------------------------


class HintsReduction:
    """Play an inner learner over the curved body ``K_t`` instead of ``K``.

    ``t`` is chosen so that ``K ⊆ (1 + eps) K_t``; every action of the inner
    learner lies in ``K_t ⊆ K`` and is validated against ``K``.  The price is
    at most a factor ``1 - eps`` in the comparator:
    ``OPT_{K_t} >= OPT_K / (1 + eps) >= (1 - eps) OPT_K``.
    """

    def __init__(self, K, eps, inner_learner_factory=None):
        if not 0 < eps < 1:
            raise DomainError("eps must lie in (0, 1)")
        radii = K.sandwich_radii()
        self.K, self.eps = K, eps
        self.choice = choose_t_for_eps(radii.r, radii.R, eps)
        self.Kt = CurvedBody(K, self.choice.t, r=radii.r)
        factory = inner_learner_factory or FollowTheLeader
        self.inner = factory(self.Kt)

    @property
    def t(self):
        return self.choice.t

    def act(self, hint=None):
        x = np.asarray(self.inner.act(hint), dtype=float)
        if float(self.K.gauge(x)) > 1.0 + FEASIBILITY_TOL:
            raise InfeasibleAction("inner learner left K")
        return x

    def observe(self, g):
        self.inner.observe(g)

    def opt_ratio(self, s):
        """``OPT_{K_t} / OPT_K`` for the cumulative gain ``s``."""
        full = float(self.K.support(s))
        if full <= 0:
            return 1.0
        return float(self.Kt.support(s)) / full


def hints_reduction(K, eps, inner_learner_factory=None):
    return HintsReduction(K, eps, inner_learner_factory)
