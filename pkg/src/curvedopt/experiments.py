"""Named experiment presets.

Each preset runs one family of checks, writes a CSV table and a JSON record
into the output directory and returns one PASS/FAIL line per certificate.
Every JSON record carries the config hash, the seed and the package version.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bodies import Ball, Ellipsoid, HalfspacePolytope, LpBall, VertexPolytope
from .certify import check_two_convex, check_two_smooth
from .curving import CurvedBody, approximation_factor, polar_decomposition_max, weak_optimize
from .frank_wolfe import Quadratic, StepRule, fw_solve
from .online import (
    AlternatingBad,
    FollowTheLeader,
    GrowthCondition,
    NonNegative,
    hints_reduction,
    nonneg_linearization,
    play_game,
    regret_report,
)
from .rng import stream, unit_vectors

SANDWICH_TOL = 1e-9


@dataclass
class ExperimentConfig:
    preset: str
    out_dir: str = "results"
    seed: int = 0
    params: dict = field(default_factory=dict)
    body_spec: str | None = None

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {', '.join(sorted(PRESETS))}")

    def param(self, name):
        return self.params.get(name, PRESET_DEFAULTS[self.preset][name])

    def config_hash(self):
        blob = json.dumps(
            {"preset": self.preset, "seed": self.seed, "params": self.params, "body_spec": self.body_spec},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class CheckLine:
    name: str
    passed: bool
    detail: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)

    def __str__(self):
        tail = f"  {self.detail}" if self.detail else ""
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}{tail}"


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


# presets ---------------------------------------------------------------------


def _ftl_growth(cfg):
    lam, G, M = 1 / 8, cfg.param("G"), cfg.param("M")
    T, seeds = cfg.param("T"), cfg.param("seeds")
    K = Ball(1.0, 2)
    rows, lines = [], []
    ok_bound = ok_basic = ok_lip = True
    for s in range(seeds):
        adv = GrowthCondition(G, M, 2, cfg.param("pattern"), seed=cfg.seed + s)
        rep = regret_report(K, play_game(K, FollowTheLeader(K), adv, T), lam=lam, M=M, G=G)
        c = rep.certificates
        ok_bound &= bool(c["growth_log"].holds)
        ok_basic &= bool(c["ftl_basic"].holds)
        ok_lip &= c["regret_lip"].holds is not False
        rows.append([cfg.seed + s, T, rep.regret, c["growth_log"].bound, c["ftl_basic"].bound, c["regret_lip"].bound])
    # regret / ln T stays below the bound's own constant across horizons
    const = M**2 / (2 * lam * G) * (1 + 1 / math.log(100))
    worst = 0.0
    for horizon in (100, 1000, 10000):
        adv = GrowthCondition(G, M, 2, cfg.param("pattern"), seed=cfg.seed)
        rep = regret_report(K, play_game(K, FollowTheLeader(K), adv, horizon))
        worst = max(worst, rep.regret / math.log(horizon))
    lines.append(CheckLine("ftl-growth/growth-log-bound", ok_bound, f"{seeds} seeds, T={T}"))
    lines.append(CheckLine("ftl-growth/ftl-basic", ok_basic))
    lines.append(CheckLine("ftl-growth/regret-lip", ok_lip))
    lines.append(CheckLine("ftl-growth/log-scaling", worst <= const, f"max regret/lnT={worst:.4g} <= {const:.4g}"))
    return ["seed", "T", "regret", "growth_log_bound", "ftl_basic", "regret_lip"], rows, lines


def _ftl_nonneg(cfg):
    lam, M, T, seeds = 1 / 8, cfg.param("M"), cfg.param("T"), cfg.param("seeds")
    rows, ok, ok_basic, ok_lip = [], True, True, True
    for d in cfg.param("dims"):
        K = Ball(1.0, d)
        lin = nonneg_linearization(K)
        for s in range(seeds):
            tr = play_game(K, FollowTheLeader(K), NonNegative(M, d, seed=cfg.seed + s), T)
            rep = regret_report(K, tr, lam=lam, M=M, linearization=lin)
            c = rep.certificates
            ok &= bool(c["ftl_nonneg"].holds)
            ok_basic &= bool(c["ftl_basic"].holds)
            ok_lip &= c["regret_lip"].holds is not False
            rows.append([d, cfg.seed + s, T, rep.regret, c["ftl_nonneg"].bound, c["ftl_nonneg_linearized"].bound, rep.C])
    lines = [
        CheckLine("ftl-nonneg/bound", ok, f"dims={list(cfg.param('dims'))}, {seeds} seeds, T={T}"),
        CheckLine("ftl-nonneg/ftl-basic", ok_basic),
        CheckLine("ftl-nonneg/regret-lip", ok_lip),
    ]
    return ["dim", "seed", "T", "regret", "nonneg_bound", "linearized_bound", "C"], rows, lines


def _ftl_bad(cfg):
    T = cfg.param("T")
    K = HalfspacePolytope.cube(2)
    tr = play_game(K, FollowTheLeader(K), AlternatingBad(), T)
    rep = regret_report(K, tr)
    expected = np.where((np.arange(1, T) % 2 == 1)[:, None], [1.0, 1.0], [1.0, -1.0])
    alternates = bool(np.array_equal(tr.actions[1:], expected))
    slope = rep.regret / T
    rows = [[t + 1, *tr.gains[t], *tr.actions[t]] for t in range(min(T, 20))]
    lines = [
        CheckLine("ftl-bad/alternation", alternates),
        CheckLine("ftl-bad/linear-regret", slope >= 0.05, f"regret/T={slope:.4g}"),
        CheckLine("ftl-bad/ftl-basic", bool(rep.certificates["ftl_basic"].holds)),
    ]
    return ["round", "g0", "g1", "x0", "x1"], rows, lines


def sandwich_violations(K, t, points):
    """Count failures of ``||x||_K <= ||x||_{K_t} <= min(||x||/r, s ||x||_K)``."""
    radii = K.sandwich_radii()
    Kt = CurvedBody(K, t)
    s = approximation_factor(radii.r, radii.R, t)
    gk = np.asarray(K.gauge(points))
    gt = np.asarray(Kt.gauge(points))
    ball = np.linalg.norm(points, axis=1) / radii.r
    tol = SANDWICH_TOL * np.maximum(1.0, gt)
    inner = gt > ball + tol  # B(r) ⊆ K_t
    middle = gk > gt + tol  # K_t ⊆ K
    outer = gt > s * gk + tol  # K ⊆ s K_t
    return int(inner.sum()), int(middle.sum()), int(outer.sum())


def _curve_sandwich(cfg):
    rng = stream(cfg.seed, 20)
    rows, clean = [], True
    for d in cfg.param("dims"):
        K = HalfspacePolytope.cube(d)
        for t in cfg.param("ts"):
            pts = rng.standard_normal((cfg.param("points"), d)) * rng.exponential(1.0, (cfg.param("points"), 1))
            v = sandwich_violations(K, t, pts)
            clean &= sum(v) == 0
            rows.append([d, t, cfg.param("points"), *v])
    lines = [CheckLine("curve-sandwich/inequalities", clean, "zero violations" if clean else "violations found")]
    return ["dim", "t", "points", "ball_violations", "base_violations", "scaled_violations"], rows, lines


def decomposition_bodies():
    return [
        HalfspacePolytope.cube(2),
        HalfspacePolytope.cube(3),
        HalfspacePolytope([[1, 2], [-1, 1], [0, -1], [2, -1]], [1.0, 1.5, 0.8, 2.0]),
        VertexPolytope([[1, 0], [0, 1], [-1, -1]]),
        Ball(1.5, 3),
        Ellipsoid(np.diag([4.0, 1.0, 0.25])),
        LpBall(1, 1.0, 3),
        LpBall(3, 1.0, 2),
    ]


def brute_force_support(Kt, c, n=200_000):
    """Support of a planar body by enumerating its boundary radially."""
    th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    U = np.column_stack([np.cos(th), np.sin(th)])
    B = U / np.asarray(Kt.gauge(U))[:, None]
    return float((B @ c).max())


def _curve_decomp(cfg):
    rng = stream(cfg.seed, 21)
    per = max(1, cfg.param("queries") // len(decomposition_bodies()))
    worst, rows = 0.0, []
    for K in decomposition_bodies():
        t = float(rng.uniform(0.05, 0.95))
        Kt = CurvedBody(K, t)
        y = rng.standard_normal((per, K.dim)) * rng.exponential(1.0, (per, 1))
        cert = polar_decomposition_max(Kt, y)
        g = np.asarray(Kt.gauge(y))
        rel = float(np.max(np.abs(cert.value - g) / g))
        worst = max(worst, rel)
        rows.append([repr(K), t, per, rel])
    delta = cfg.param("delta")
    Kt = CurvedBody(HalfspacePolytope.cube(2), 0.5)
    worst_gap = 0.0
    for c in unit_vectors(rng, cfg.param("directions"), 2):
        res = weak_optimize(Kt, c, delta)
        worst_gap = max(worst_gap, abs(res.value - brute_force_support(Kt, c)))
    lines = [
        CheckLine("curve-decomp/value-equals-gauge", worst <= 1e-9, f"max rel err={worst:.3g}"),
        CheckLine("curve-decomp/weak-vs-brute-force", worst_gap <= 2 * delta, f"max gap={worst_gap:.3g}"),
    ]
    return ["body", "t", "queries", "max_rel_err"], rows, lines


def _hints_reduction(cfg):
    K = HalfspacePolytope.cube(2)
    rows, ok_ratio, ok_feas = [], True, True
    for eps in cfg.param("eps"):
        for s in range(cfg.param("seeds")):
            rng = stream(cfg.seed + s, 22)
            learner = hints_reduction(K, eps)
            gains = rng.standard_normal((cfg.param("T"), 2))
            adv = _FixedGains(gains)
            tr = play_game(K, learner, adv, cfg.param("T"))
            ratio = learner.opt_ratio(tr.prefix[-1])
            ok_ratio &= ratio >= 1 - eps
            ok_feas &= bool(np.all(np.asarray(K.gauge(tr.actions)) <= 1 + 1e-9))
            rows.append([eps, cfg.seed + s, learner.t, ratio])
    lines = [
        CheckLine("hints-reduction/opt-ratio", ok_ratio),
        CheckLine("hints-reduction/feasible", ok_feas),
    ]
    return ["eps", "seed", "t", "opt_ratio"], rows, lines


class _FixedGains:
    """Replays a precomputed gain matrix."""

    def __init__(self, gains):
        self.gains = np.asarray(gains, dtype=float)
        self.dim = self.gains.shape[1]

    def generate(self, T):
        return self.gains[:T]

    def verify(self, gains):
        pass

    def hints(self, gains):
        return None


def _certify_ball(cfg):
    B = Ball(1.0, 2)
    n = cfg.param("samples")
    D = cfg.param("D")
    reports = [
        ("two-convex", check_two_convex(B, D, n, cfg.seed), True),
        ("two-convex-5pct-larger", check_two_convex(B, 1.05 * D, n, cfg.seed), False),
        ("two-smooth", check_two_smooth(B, cfg.param("D_smooth"), n, cfg.seed), True),
        ("two-smooth-5pct-smaller", check_two_smooth(B, 0.95 * cfg.param("D_smooth"), n, cfg.seed), False),
    ]
    rows, lines = [], []
    for name, rep, expect in reports:
        rows.append([name, rep.claimed_modulus, rep.empirical_modulus, rep.verdict])
        lines.append(CheckLine(f"certify-ball/{name}", rep.passed == expect, f"{rep.verdict} (expected {'PASS' if expect else 'FAIL'})"))
    return ["check", "claimed", "empirical", "verdict"], rows, lines


def _fw_demo(cfg):
    K = HalfspacePolytope.cube(2)
    f = Quadratic(cfg.param("target"))
    x0 = cfg.param("x0")
    steps = cfg.param("steps")
    flat = fw_solve(K, f, x0, steps, StepRule.LINE_SEARCH)
    curved = fw_solve(CurvedBody(K, cfg.param("t")), f, x0, steps, StepRule.LINE_SEARCH)
    rows = []
    for name, tr in (("cube", flat), ("curved", curved)):
        rows.extend([name, k, v, g] for k, v, g in tr.rows())
    gap_flat, gap_curved = flat.best_gaps[-1], curved.best_gaps[-1]
    lines = [
        CheckLine(
            "fw-demo/curvature-benefit",
            gap_curved < gap_flat,
            f"best gap cube={gap_flat:.3g} curved={gap_curved:.3g}",
        )
    ]
    return ["body", "iter", "f", "gap"], rows, lines


PRESETS = {
    "ftl-growth": _ftl_growth,
    "ftl-nonneg": _ftl_nonneg,
    "ftl-bad": _ftl_bad,
    "curve-sandwich": _curve_sandwich,
    "curve-decomp": _curve_decomp,
    "hints-reduction": _hints_reduction,
    "certify-ball": _certify_ball,
    "fw-demo": _fw_demo,
}

PRESET_DEFAULTS = {
    "ftl-growth": {"G": 0.5, "M": 1.0, "T": 10_000, "seeds": 20, "pattern": "uniform"},
    "ftl-nonneg": {"M": 1.0, "T": 10_000, "seeds": 20, "dims": (2, 5)},
    "ftl-bad": {"T": 10_000},
    "curve-sandwich": {"dims": (3,), "ts": (0.1, 0.5, 0.9, 1.0), "points": 10_000},
    "curve-decomp": {"queries": 100_000, "delta": 1e-4, "directions": 100},
    "hints-reduction": {"eps": (0.05, 0.1, 0.3), "seeds": 5, "T": 1000},
    "certify-ball": {"D": 1 / 8, "D_smooth": 1 / 2, "samples": 20_000},
    "fw-demo": {"target": (2.0, 0.3), "x0": (0.0, -0.5), "steps": 200, "t": 0.5},
}


def run_preset(config: ExperimentConfig):
    """Run a preset; return ``(exit_status, lines, paths)``.

    The exit status is 0 when every certificate passes and 2 otherwise.
    """
    header, rows, lines = PRESETS[config.preset](config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{config.preset}.csv"
    json_path = out / f"{config.preset}.json"
    write_csv(csv_path, header, rows)
    record = {
        "preset": config.preset,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "version": __version__,
        "params": {k: config.param(k) for k in PRESET_DEFAULTS[config.preset]},
        "checks": [asdict(line) for line in lines],
    }
    json_path.write_text(json.dumps(record, indent=2, default=list) + "\n")
    status = 0 if all(line.passed for line in lines) else 2
    return status, lines, [csv_path, json_path]
