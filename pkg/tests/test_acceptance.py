"""Acceptance criteria, each reported as one ``PASS``/``FAIL criterion N`` line.

Run with ``pytest -m acceptance -s`` or directly as ``python tests/test_acceptance.py``.
"""
import math
import sys
import time

import numpy as np
import pytest

from curvedopt.bodies import Ball, Ellipsoid, HalfspacePolytope, LpBall, VertexPolytope
from curvedopt.certify import check_two_convex, check_two_smooth
from curvedopt.curving import (
    CurvedBody,
    MinkowskiRounding,
    approximation_factor,
    polar_decomposition_max,
    weak_optimize,
)
from curvedopt.online import (
    AlternatingBad,
    FollowTheLeader,
    GrowthCondition,
    Hinted,
    NonNegative,
    hints_reduction,
    log_estimate_check,
    play_game,
    regret_report,
)
from curvedopt.rng import stream

pytestmark = pytest.mark.acceptance

BALL2 = Ball(1.0, 2)
CUBE2 = HalfspacePolytope.cube(2)
LAM_BALL = 1 / 8

# FTL traces from criteria 1-3, collected for criterion 10
TRACES = {}


def report(n, ok, detail, capsys=None):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return line


# 1 ------------------------------------------------------------------------------


def growth_regret(seed, T, pattern="uniform"):
    trace = play_game(BALL2, FollowTheLeader(BALL2), GrowthCondition(0.5, 1.0, 2, pattern, seed), T)
    return trace, regret_report(BALL2, trace, lam=LAM_BALL, M=1.0, G=0.5)


def test_criterion_1_growth_regret(capsys):
    start = time.perf_counter()
    T, G, M = 10_000, 0.5, 1.0
    bound = M**2 / (2 * LAM_BALL * G) * (1 + math.log(T))
    worst = -np.inf
    ok = True
    for seed in range(20):
        trace, rep = growth_regret(seed, T)
        TRACES[f"growth/seed{seed}"] = (BALL2, trace, LAM_BALL)
        worst = max(worst, rep.regret)
        ok &= rep.regret <= bound
    # regret / ln T stays below the bound's own constant at the smallest horizon
    scale_cap = M**2 / (2 * LAM_BALL * G) * (1 + 1 / math.log(100))
    ratios = []
    for T_k in (100, 1000, 10_000):
        r = max(growth_regret(seed, T_k)[1].regret for seed in range(5))
        ratios.append(r / math.log(T_k))
    ok &= max(ratios) <= scale_cap
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    report(
        1,
        ok,
        f"max regret {worst:.4f} <= {bound:.4f}; regret/lnT {[round(r, 4) for r in ratios]} <= {scale_cap:.3f}; {elapsed:.1f}s",
        capsys,
    )
    assert ok


# 2 ------------------------------------------------------------------------------


def test_criterion_2_nonneg_regret(capsys):
    start = time.perf_counter()
    T, M = 10_000, 1.0
    ok, worst = True, {}
    for d in (2, 5):
        K = Ball(1.0, d)
        C = math.sqrt(d)
        bound = 5 * C**2 * M / (2 * LAM_BALL) * math.log(T)
        w = -np.inf
        for seed in range(20):
            trace = play_game(K, FollowTheLeader(K), NonNegative(M, d, seed), T)
            TRACES[f"nonneg/d{d}/seed{seed}"] = (K, trace, LAM_BALL)
            regret = regret_report(K, trace).regret
            w = max(w, regret)
            ok &= regret <= bound
        worst[d] = (round(w, 4), round(bound, 1))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    report(2, ok, f"(max regret, bound) per d {worst}; {elapsed:.1f}s", capsys)
    assert ok


# 3 ------------------------------------------------------------------------------


def test_criterion_3_linear_regret(capsys):
    T = 10_000
    trace = play_game(CUBE2, FollowTheLeader(CUBE2), AlternatingBad(), T)
    TRACES["alternating"] = (CUBE2, trace, None)
    expected = np.empty((T, 2))
    expected[0] = 0.0
    expected[1:, 0] = 1.0
    expected[1:, 1] = np.where(np.arange(1, T) % 2 == 1, 1.0, -1.0)
    alternates = bool(np.array_equal(trace.actions, expected))
    regret = regret_report(CUBE2, trace).regret
    ok = alternates and regret >= 0.05 * T
    report(3, ok, f"alternation exact={alternates}; regret {regret:.2f} >= {0.05 * T:.0f}", capsys)
    assert ok


# 4 ------------------------------------------------------------------------------

GRID = [(d, t) for d in (2, 3, 5) for t in (0.1, 0.5, 0.9, 1.0)]


def test_criterion_4_sandwich(capsys):
    rng = np.random.default_rng(4)
    total = 0
    for d, t in GRID:
        K = HalfspacePolytope.cube(d)
        Kt = CurvedBody(K, t)
        r, R = 1.0, math.sqrt(d)
        s = approximation_factor(r, R, t)
        x = rng.standard_normal((10_000, d)) * rng.exponential(1.0, (10_000, 1))
        gK = np.max(np.abs(x), axis=1)  # cube gauge, computed independently
        gt = np.asarray(Kt.gauge(x))
        n2 = np.linalg.norm(x, axis=1)
        tol = 1e-9 * np.maximum(1.0, gt)
        total += int(np.sum(gt > n2 / r + tol))  # B(r) ⊆ K_t
        total += int(np.sum(gK > gt + tol))  # K_t ⊆ K
        total += int(np.sum(gt > s * gK + tol))  # K ⊆ s K_t
    ok = total == 0
    report(4, ok, f"{total} sandwich violations over {len(GRID)} configurations x 1e4 points", capsys)
    assert ok


# 5 ------------------------------------------------------------------------------


def test_criterion_5_curved_modulus(capsys):
    worst = np.inf
    ok = True
    for d, t in GRID:
        rep = check_two_convex(CurvedBody(HalfspacePolytope.cube(d), t), t * t / 8, n=100_000, seed=5)
        ok &= rep.passed
        worst = min(worst, rep.empirical_modulus / (t * t / 8))
    negative = [check_two_convex(MinkowskiRounding(CUBE2, t), 1e-4, n=100_000, seed=5) for t in (0.1, 0.5, 0.9)]
    neg_fail = all(not r.passed for r in negative)
    ok &= neg_fail
    report(
        5,
        ok,
        f"min empirical/claimed {worst:.6f}; Minkowski rounding fails at 1e-4: {neg_fail} "
        f"(moduli {[float(r.empirical_modulus) for r in negative]})",
        capsys,
    )
    assert ok


# 6 ------------------------------------------------------------------------------


def test_criterion_6_decomposition(capsys):
    rng = np.random.default_rng(6)
    bodies = [
        HalfspacePolytope.cube(2),
        HalfspacePolytope.cube(5),
        HalfspacePolytope([[1, 2], [-1, 1], [0, -1], [2, -1]], [1.0, 1.5, 0.8, 2.0]),
        VertexPolytope([[1, 0], [0, 1], [-1, -1]]),
        Ball(1.5, 3),
        Ellipsoid(np.diag([4.0, 1.0, 0.25])),
        LpBall(1, 1.0, 3),
        LpBall(3, 1.0, 2),
        LpBall(np.inf, 2.0, 4),
    ]
    per = -(-100_000 // len(bodies))
    worst = 0.0
    for K in bodies:
        Kt = CurvedBody(K, float(rng.uniform(0.05, 0.95)))
        y = rng.standard_normal((per, K.dim)) * rng.exponential(1.0, (per, 1))
        cert = polar_decomposition_max(Kt, y)
        g = np.asarray(Kt.gauge(y))
        worst = max(worst, float(np.max(np.abs(cert.value - g) / g)))
    ok_decomp = worst <= 1e-9

    delta = 1e-4
    Kt = CurvedBody(CUBE2, 0.5)
    th = np.linspace(0.0, 2 * np.pi, 400_000, endpoint=False)
    U = np.column_stack([np.cos(th), np.sin(th)])
    boundary = U / np.asarray(Kt.gauge(U))[:, None]
    miss = 0.0
    for c in rng.standard_normal((100, 2)):
        res = weak_optimize(Kt, c, delta)
        brute = float(np.max(boundary @ c))
        miss = max(miss, abs(res.value - brute))
    ok_weak = miss <= 2 * delta
    ok = ok_decomp and ok_weak
    report(6, ok, f"decomposition max rel err {worst:.2e} (1e5 queries); weak vs brute max |diff| {miss:.2e} <= {2 * delta:g}", capsys)
    assert ok


# 7 ------------------------------------------------------------------------------


def test_criterion_7_log_estimate(capsys):
    rng = stream(7, 0)
    violations = 0
    worst = 0.0
    for i in range(10_000):
        T = int(rng.integers(2, 1001))
        A = float(rng.uniform(0.1, 10.0))
        a = A * rng.random(T)
        if i % 2:  # sparse: most entries are zero
            a[rng.random(T) < 0.9] = 0.0
        if i % 5 == 0:  # adversarial tail: a_t = A everywhere after a zero prefix
            a[: T // 2] = 0.0
            a[T // 2 :] = A
        lhs, bound, holds = log_estimate_check(a, A)
        violations += not holds
        worst = max(worst, lhs / bound)
    ok = violations == 0
    report(7, ok, f"{violations} violations over 1e4 sequences; max lhs/bound {worst:.4f}", capsys)
    assert ok


# 8 ------------------------------------------------------------------------------


def test_criterion_8_ball_moduli(capsys):
    n = 20_000
    conv_ok = check_two_convex(BALL2, 1 / 8, n=n, seed=8)
    conv_bad = check_two_convex(BALL2, 1 / 8 * 1.05, n=n, seed=8)
    smooth_ok = check_two_smooth(BALL2, 1 / 2, n=n, seed=8)
    # for the upper modulus the failing side is the tighter (smaller) claim
    smooth_bad = check_two_smooth(BALL2, 1 / 2 * 0.95, n=n, seed=8)
    ok = conv_ok.passed and not conv_bad.passed and smooth_ok.passed and not smooth_bad.passed
    ok &= bool(conv_bad.witness) and bool(smooth_bad.witness)
    wc, ws = conv_bad.witness, smooth_bad.witness
    report(
        8,
        ok,
        f"2-convex PASS at 1/8 (emp {conv_ok.empirical_modulus:.6f}), FAIL at 0.13125 "
        f"witness x={np.round(wc['x'], 4).tolist()} y={np.round(wc['y'], 4).tolist()}; "
        f"2-smooth PASS at 1/2 (emp {smooth_ok.empirical_modulus:.6f}), FAIL at 0.475 "
        f"witness x={np.round(ws['x'], 4).tolist()} y={np.round(ws['y'], 4).tolist()}",
        capsys,
    )
    assert ok


# 9 ------------------------------------------------------------------------------


def test_criterion_9_hints(capsys):
    ok = True
    worst = {}
    for eps in (0.05, 0.1, 0.3):
        w = np.inf
        for seed in range(5):
            red = hints_reduction(CUBE2, eps)
            base = GrowthCondition(0.3, 1.0, 2, "uniform", seed, direction=stream(seed, 99).standard_normal(2))
            trace = play_game(CUBE2, red, Hinted(0.5, base, seed), 1000)
            feasible = bool(np.all(np.max(np.abs(trace.actions), axis=1) <= 1 + 1e-9))
            ratio = red.opt_ratio(trace.prefix[-1])
            ok &= feasible and ratio >= 1 - eps
            w = min(w, ratio)
        worst[eps] = round(w, 4)
    report(9, ok, f"min OPT_Kt/OPT per eps {worst} (need >= 1 - eps); all actions in K", capsys)
    assert ok


# 10 -----------------------------------------------------------------------------


def test_criterion_10_runtime_certificates(capsys):
    if not TRACES:
        for seed in range(20):
            TRACES[f"growth/seed{seed}"] = (BALL2, growth_regret(seed, 10_000)[0], LAM_BALL)
        for d in (2, 5):
            K = Ball(1.0, d)
            for seed in range(20):
                TRACES[f"nonneg/d{d}/seed{seed}"] = (K, play_game(K, FollowTheLeader(K), NonNegative(1.0, d, seed), 10_000), LAM_BALL)
        TRACES["alternating"] = (CUBE2, play_game(CUBE2, FollowTheLeader(CUBE2), AlternatingBad(), 10_000), None)
    checked = {"ftl_basic": 0, "regret_lip": 0, "regret_lip_skipped": 0}
    ok = True
    for name, (K, trace, lam) in TRACES.items():
        rep = regret_report(K, trace, lam=lam)
        ok &= bool(rep.certificates["ftl_basic"].holds)
        checked["ftl_basic"] += 1
        lip = rep.certificates.get("regret_lip")
        if lip is not None and lip.applicable:
            ok &= bool(lip.holds)
            checked["regret_lip"] += 1
        else:
            # the square has no positive strong convexity modulus, or some s_t = 0
            checked["regret_lip_skipped"] += 1
    report(10, ok, f"certificates checked {checked} over {len(TRACES)} traces", capsys)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
