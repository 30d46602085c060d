#!/usr/bin/env python3
"""Run every named experiment preset and print its certificate lines.

Usage: python scripts/reproduce_presets.py [--out results] [--seed 0] [name ...]
"""
import argparse
import sys
import time

from curvedopt.experiments import PRESETS, ExperimentConfig, run_preset


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", choices=sorted(PRESETS), default=sorted(PRESETS), metavar="name")
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    worst = 0
    for name in args.names:
        start = time.perf_counter()
        status, lines, paths = run_preset(ExperimentConfig(name, out_dir=args.out, seed=args.seed))
        worst = max(worst, status)
        for line in lines:
            print(line)
        print(f"  [{name}] {time.perf_counter() - start:.1f}s -> {', '.join(map(str, paths))}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
