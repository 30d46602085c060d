"""Command-line entry point.

Exit codes: 0 when every certificate passes, 2 when one fails, 1 on usage
or I/O errors.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bodies import Ball
from .certify import CHECKS
from .curving import CurvedBody, approximation_factor, choose_t_for_eps, polar_decomposition_max
from .errors import CurvedOptError
from .experiments import PRESETS, ExperimentConfig, run_preset, sandwich_violations, write_csv
from .frank_wolfe import Quadratic, StepRule, fw_solve
from .online import (
    AlternatingBad,
    FollowTheLeader,
    GrowthCondition,
    NonNegative,
    nonneg_linearization,
    play_game,
    regret_report,
    running_certificates,
)
from .rng import stream
from .specfile import load_body

EXIT_PASS, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _vector(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    # repeated on every subcommand so the flags work before or after it
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)

    p = _Parser(prog="curvedopt", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("certify", parents=[common], help="sample a curvature modulus of a body")
    c.add_argument("body", help="body specification file (JSON)")
    c.add_argument("--notion", choices=sorted(CHECKS), default="two_convex")
    c.add_argument("--modulus", type=float, required=True, help="claimed D, lambda or G")
    c.add_argument("--samples", type=int, default=2000)
    c.add_argument("--reference", help="reference body C for set notions (default: the body itself)")
    c.add_argument("--y-radius", type=float, default=2.0, help="gauge radius of y for two_smooth")
    c.add_argument("--mu", type=float, help="fixed mu for nonmidpoint")

    k = sub.add_parser("curve", parents=[common], help="curve a body and check its guarantees")
    k.add_argument("body")
    g = k.add_mutually_exclusive_group(required=True)
    g.add_argument("--t", type=float)
    g.add_argument("--eps", type=float, help="pick t so that K ⊆ (1 + eps) K_t")
    k.add_argument("--points", type=int, default=10_000)

    o = sub.add_parser("olo", parents=[common], help="play FTL against a scripted adversary")
    o.add_argument("body")
    o.add_argument("--adversary", choices=("growth", "nonneg", "alternating"), required=True)
    o.add_argument("--T", type=int, default=1000, dest="T")
    o.add_argument("--G", type=float, default=0.5, dest="G")
    o.add_argument("--M", type=float, default=1.0, dest="M")
    o.add_argument("--lam", type=float, help="strong convexity modulus used by the bounds")
    o.add_argument("--pattern", choices=("uniform", "alternating"), default="uniform")

    f = sub.add_parser("fw", parents=[common], help="Frank-Wolfe on a quadratic")
    f.add_argument("body")
    f.add_argument("--target", type=_vector, required=True, help="minimizer z of ||x - z||^2")
    f.add_argument("--x0", type=_vector, help="feasible start (default origin)")
    f.add_argument("--steps", type=int, default=200)
    f.add_argument("--rule", choices=[r.value for r in StepRule], default="classic")
    f.add_argument("--eta", type=float, help="step size for the fixed rule")

    r = sub.add_parser("preset", parents=[common], help="run a named experiment")
    r.add_argument("name", choices=sorted(PRESETS))
    r.add_argument("--body-spec", help="recorded in the run metadata")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a preset parameter (JSON value)")
    return p


def _emit(args, payload_json, header=None, rows=None):
    """Write JSON or CSV to ``--out`` (or stdout)."""
    fmt = getattr(args, "format", None) or ("csv" if rows is not None else "json")
    out = getattr(args, "out", None)
    if fmt == "csv" and rows is not None:
        if out:
            write_csv(out, header, rows)
        else:
            import csv

            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        return
    text = json.dumps(payload_json, indent=2, default=_json_default) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    raise TypeError(type(v).__name__)


def _cmd_certify(args):
    body = load_body(args.body)
    check = CHECKS[args.notion]
    seed = getattr(args, "seed", 0)
    if args.notion in ("set_strong_convexity", "nonmidpoint"):
        C = load_body(args.reference) if args.reference else body
        kw = {"mu": args.mu} if args.notion == "nonmidpoint" else {}
        rep = check(body, C, args.modulus, args.samples, seed, **kw)
    elif args.notion == "two_smooth":
        rep = check(body, args.modulus, args.samples, seed, y_radius=args.y_radius)
    else:
        rep = check(body, args.modulus, args.samples, seed)
    _emit(args, rep.to_dict())
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _cmd_curve(args):
    body = load_body(args.body)
    radii = body.sandwich_radii()
    flag = None
    if args.t is not None:
        t = args.t
    else:
        t, flag = choose_t_for_eps(radii.r, radii.R, args.eps)
    Kt = CurvedBody(body, t)
    rng = stream(getattr(args, "seed", 0), 30)
    pts = rng.standard_normal((args.points, body.dim))
    violations = sandwich_violations(body, t, pts)
    nz = pts[np.any(pts != 0, axis=1)]
    cert = polar_decomposition_max(Kt, nz)
    g = np.asarray(Kt.gauge(nz))
    rel = float(np.max(np.abs(cert.value - g) / g)) if len(nz) else 0.0
    ok = sum(violations) == 0 and rel <= 1e-9
    payload = {
        "t": t,
        "t_flag": flag,
        "r": radii.r,
        "R": radii.R,
        "approximation_factor": approximation_factor(radii.r, radii.R, t),
        "strong_convexity_modulus": t * t / 8,
        "sandwich_violations": dict(zip(("ball", "base", "scaled"), violations)),
        "decomposition_max_rel_err": rel,
        "verdict": "PASS" if ok else "FAIL",
        "curved_body": Kt.to_spec(),
    }
    _emit(args, payload)
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_olo(args):
    K = load_body(args.body)
    seed = getattr(args, "seed", 0)
    d = K.dim
    if args.adversary == "growth":
        adv = GrowthCondition(args.G, args.M, d, args.pattern, seed)
    elif args.adversary == "nonneg":
        adv = NonNegative(args.M, d, seed)
    else:
        if d != 2:
            raise CurvedOptError("the alternating adversary lives in two dimensions")
        adv = AlternatingBad(seed)
    trace = play_game(K, FollowTheLeader(K), adv, args.T)
    G = args.G if args.adversary == "growth" else None
    M = args.M if args.adversary != "alternating" else None
    rep = regret_report(K, trace, lam=args.lam, M=M, G=G)
    u = C = None
    if args.lam is not None and M is not None and np.all(trace.gains >= 0):
        u, C = nonneg_linearization(Ball(1.0, d))
    cols = running_certificates(K, trace, lam=args.lam, M=M, G=G, C=C, u=u)
    names = list(cols)
    header = ["round"] + [f"g{i}" for i in range(d)] + [f"x{i}" for i in range(d)] + names
    rows = [
        [t + 1, *trace.gains[t], *trace.actions[t], *(cols[n][t] for n in names)] for t in range(trace.T)
    ]
    fmt = getattr(args, "format", None) or "csv"
    if fmt == "json":
        _emit(args, rep.to_dict())
    else:
        _emit(args, None, header, rows)
        sys.stderr.write(_summary(rep))
    return EXIT_PASS if rep.all_hold() else EXIT_FAIL


def _summary(rep):
    lines = [f"regret {rep.regret!r}"]
    for name, c in rep.certificates.items():
        state = "N/A" if c.holds is None else ("PASS" if c.holds else "FAIL")
        lines.append(f"{state} {name} bound={c.bound!r}")
    return "\n".join(lines) + "\n"


def _cmd_fw(args):
    body = load_body(args.body)
    x0 = args.x0 if args.x0 is not None else np.zeros(body.dim)
    trace = fw_solve(body, Quadratic(args.target), x0, args.steps, StepRule(args.rule), eta=args.eta)
    fmt = getattr(args, "format", None) or "csv"
    if fmt == "json":
        _emit(args, {"values": trace.values, "gaps": trace.gaps, "final": trace.iterates[-1]})
    else:
        _emit(args, None, ["iter", "f", "gap"], list(trace.rows()))
    return EXIT_PASS


def _cmd_preset(args):
    params = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise CurvedOptError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    cfg = ExperimentConfig(
        args.name, out_dir=getattr(args, "out", None) or "results", seed=getattr(args, "seed", 0),
        params=params, body_spec=args.body_spec,
    )
    status, lines, paths = run_preset(cfg)
    for line in lines:
        print(line)
    for path in paths:
        print(f"wrote {path}")
    return status


COMMANDS = {"certify": _cmd_certify, "curve": _cmd_curve, "olo": _cmd_olo, "fw": _cmd_fw, "preset": _cmd_preset}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except OSError as exc:
        name = getattr(exc, "filename", None)
        sys.stderr.write(f"curvedopt: {name or ''}{': ' if name else ''}{exc.strerror or exc}\n")
        return EXIT_USAGE
    except (CurvedOptError, ValueError) as exc:
        sys.stderr.write(f"curvedopt: {exc}\n")
        return EXIT_USAGE

