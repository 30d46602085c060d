#!/usr/bin/env python3
"""Regret of FTL on the unit disc as the horizon grows.

Prints one CSV row per (adversary, T) with the worst regret over seeds,
regret / ln T and the matching closed-form bound.  Growth-condition and
non-negative gains give logarithmic regret; the alternating sequence on the
square gives linear regret for comparison.
"""
import argparse
import csv
import math
import sys

import numpy as np

from curvedopt.bodies import Ball, HalfspacePolytope
from curvedopt.online import AlternatingBad, FollowTheLeader, GrowthCondition, NonNegative, play_game, regret_report

LAM = 1 / 8


def worst_regret(K, make_adv, T, seeds):
    return max(regret_report(K, play_game(K, FollowTheLeader(K), make_adv(s), T)).regret for s in seeds)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizons", type=int, nargs="+", default=[100, 300, 1000, 3000, 10000])
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args(argv)
    disc, square = Ball(1.0, 2), HalfspacePolytope.cube(2)
    seeds = range(args.seeds)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["adversary", "T", "worst_regret", "regret_over_lnT", "bound"])
    for T in args.horizons:
        G, M = 0.5, 1.0
        r = worst_regret(disc, lambda s: GrowthCondition(G, M, 2, "uniform", s), T, seeds)
        w.writerow(["growth", T, r, r / math.log(T), M**2 / (2 * LAM * G) * (1 + math.log(T))])
        r = worst_regret(disc, lambda s: NonNegative(M, 2, s), T, seeds)
        w.writerow(["nonneg", T, r, r / math.log(T), 5 * 2 * M / (2 * LAM) * math.log(T)])
        r = worst_regret(square, lambda s: AlternatingBad(s), T, [0])
        w.writerow(["alternating", T, r, r / math.log(T), np.nan])
    return 0


if __name__ == "__main__":
    sys.exit(main())
