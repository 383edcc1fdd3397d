"""Command-line front end.

Exit codes: 0 ok, 1 input error, 2 non-convergence or failed check.
A ``--config`` file holds flat ``key=value`` lines naming any flag of the
sub-command (dashes or underscores); flags given on the command line win.
Verbosity follows the ``EXPOTH_LOG`` environment variable.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .address import (
    AddressSyntaxError,
    check_exponentially_bounded,
    estimate_ts,
    parse_address,
)
from .lifting import FAMILIES, run_batch
from .rcurve import PunctureSet, homotopy_word, parse_complex, parse_curve, word_length_bound_check
from .spider import (
    SolveOptions,
    contraction_profile,
    fixed_point_residual,
    solve,
    state_from_json,
    state_to_json,
)
from .verify import (
    auto_depth,
    forward_orbit_check,
    format_potential,
    ray_csv,
    ray_rows,
    verify_parameter,
)

log = logging.getLogger("expoth")


class InputError(ValueError):
    pass


def read_config(path: str) -> dict[str, str]:
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def _apply_config(parser: argparse.ArgumentParser, cfg: dict[str, str]) -> None:
    actions = {a.dest: a for a in parser._actions}
    defaults = {}
    for key, raw in cfg.items():
        if key in ("command", "config"):
            continue
        act = actions.get(key)
        if act is None:
            raise InputError(f"unknown config key {key!r}")
        if act.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = act.type(raw) if act.type else raw
    parser.set_defaults(**defaults)


# -- commands -------------------------------------------------------------------

def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def cmd_solve(args) -> int:
    resume = None
    if args.resume:
        with open(args.resume, encoding="utf-8") as fh:
            resume = state_from_json(fh.read())
    literal = args.address or (resume.addr.to_literal() if resume else None)
    t = args.potential if args.potential is not None else (resume.t if resume else None)
    if literal is None or t is None:
        raise InputError("solve needs --address and --potential (or --resume)")
    addr = parse_address(literal)
    if not t > 0:
        raise InputError("potential must be positive")
    opts = SolveOptions(T_cut=args.T_cut, tol=args.tol, max_iter=args.max_iter, mode=args.mode,
                        A=args.A, monitor=not args.no_monitor)

    trace_fh = open(args.trace, "w", encoding="utf-8") if args.trace else None

    def on_step(rec, state):
        if trace_fh:
            trace_fh.write(rec.to_json() + "\n")
        if args.checkpoint and args.checkpoint_every and state.iter % args.checkpoint_every == 0:
            _write(args.checkpoint, state_to_json(state))

    try:
        res = solve(addr, t, opts, resume=resume, on_step=on_step)
    finally:
        if trace_fh:
            trace_fh.close()
    if args.checkpoint:
        _write(args.checkpoint, state_to_json(res.state))
    for w in res.warnings:
        log.warning(w)
    residual = verify_parameter(res.kappa, addr, t, res.plan.N, min_seed=min(30.0, opts.T_cut))
    summary = {
        "all_ok": res.invariants_ok,
        "checked_iterates": len(res.reports),
        "failed_iterates": sum(not r.ok for r in res.reports),
        "indeterminate_cond3": sum(r.cond3 is None for r in res.reports),
    }
    if opts.mode == "tracked":
        summary["word_bound_checks"] = len(res.word_records)
        summary["word_bound_violations"] = res.word_bound_violations
        for r in res.word_records:
            log.info("word bound iter %d leg %d: %d < %g", r.iter, r.n, r.new_length, r.bound)
    result = {
        "kappa": [res.kappa.real, res.kappa.imag],
        "residual": residual,
        "fixed_point_residual": fixed_point_residual(res.state),
        "iterations": res.iterations,
        "converged": res.converged,
        "N": res.plan.N,
        "invariant_summary": summary,
        "warnings": res.warnings,
    }
    if len(res.trace) >= 3:
        prof = contraction_profile(res.trace)
        result["contraction_rate"] = prof.rate
    text = json.dumps(result, indent=2)
    if args.output:
        _write(args.output, text + "\n")
    print(text)
    return 0 if res.converged and residual < args.verify_threshold else 2


def cmd_word(args) -> int:
    V = PunctureSet(tuple(parse_complex(p) for p in args.punctures.split(";") if p.strip()))
    gamma = parse_curve(args.curve)
    if args.report:
        rep = word_length_bound_check(V, gamma)
        labels = None if args.index_labels else V.labels()
        print(f"word={rep.word.format(labels)} k={rep.k} |W|={rep.length} bound={rep.bound} "
              f"{'PASS' if rep.ok else 'FAIL'}")
        return 0
    w = homotopy_word(V, gamma)
    print(w.format(None if args.index_labels else V.labels()))
    return 0


def cmd_liftcheck(args) -> int:
    if args.instances < 0:
        raise InputError("instances must be >= 0")
    reports = run_batch(args.family, args.instances, args.seed, args.jobs)
    passed = sum(r.ok for r in reports)
    if not args.quiet:
        for r in reports:
            print(r.line())
    status = "PASS" if passed == len(reports) else "FAIL"
    print(f"{passed}/{len(reports)} {status}")
    return 0 if passed == len(reports) else 2


def cmd_ray(args) -> int:
    addr = parse_address(args.address)
    if args.potential is not None:
        ts = [args.potential]
    elif args.t_from is not None and args.t_to is not None:
        ts = list(np.linspace(args.t_from, args.t_to, args.samples))
    else:
        raise InputError("ray needs --potential or --from/--to")
    if any(not t > 0 for t in ts):
        raise InputError("potential must be positive")
    rows = ray_rows(args.kappa, addr, ts, args.depth, args.min_seed)
    text = ray_csv(rows)
    if args.output:
        _write(args.output, "t,re,im\n" + text)
    sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    addr = parse_address(args.address)
    if not args.potential > 0:
        raise InputError("potential must be positive")
    depth = args.depth if args.depth is not None else auto_depth(args.potential)
    res = verify_parameter(args.kappa, addr, args.potential, depth, args.min_seed)
    out = {"residual": res, "depth": depth}
    if args.forward is not None:
        fc = forward_orbit_check(args.kappa, addr, args.potential, args.forward)
        out["forward"] = {"residuals": list(fc.residuals), "noise": list(fc.noise),
                          "trusted": fc.trusted, "note": fc.note}
    print(json.dumps(out, indent=2))
    return 0 if res < args.threshold else 2


def cmd_address(args) -> int:
    addr = parse_address(args.address)
    out = {"literal": str(addr), "entries": addr.entries(args.count),
           "preperiodic": addr.is_preperiodic()}
    try:
        out["t_s_estimate"] = estimate_ts(addr, depth=args.depth)
    except ValueError as e:
        out["t_s_estimate"] = None
        out["t_s_note"] = str(e)
    if args.potential is not None:
        rep = check_exponentially_bounded(addr, args.potential, args.depth)
        out["verdict"] = rep.verdict
        out["ratios"] = list(rep.ratios)
    print(json.dumps(out, indent=2))
    return 0


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expoth", description="Spider solver for exponential maps")
    p.add_argument("--config", help="key=value file; flags override it")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute kappa for an address and potential")
    s.add_argument("--address")
    s.add_argument("--potential", type=float)
    s.add_argument("--T-cut", dest="T_cut", type=float, default=50.0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iter", dest="max_iter", type=int, default=500)
    s.add_argument("--mode", choices=("fast", "tracked"), default="fast")
    s.add_argument("--A", dest="A", type=float, default=42.0)
    s.add_argument("--no-monitor", dest="no_monitor", action="store_true")
    s.add_argument("--trace", help="JSON-lines trace file")
    s.add_argument("--checkpoint", help="state JSON written at the end")
    s.add_argument("--checkpoint-every", dest="checkpoint_every", type=int, default=0)
    s.add_argument("--resume", help="checkpoint to continue from")
    s.add_argument("--output", help="result JSON file")
    s.add_argument("--verify-threshold", dest="verify_threshold", type=float, default=1e-6)
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("word", help="homotopy word of a polygonal r-curve")
    w.add_argument("--punctures", required=True, help='e.g. "0;5"')
    w.add_argument("--curve", required=True, help='e.g. "0; 2-1i; 6-1i; tail"')
    w.add_argument("--index-labels", dest="index_labels", action="store_true")
    w.add_argument("--report", action="store_true", help="crossing count and length bound")
    w.set_defaults(func=cmd_word)

    lc = sub.add_parser("liftcheck", help="randomized lift-bound batch")
    lc.add_argument("--family", choices=tuple(FAMILIES), default="exp")
    lc.add_argument("--instances", type=int, default=1000)
    lc.add_argument("--seed", type=int, default=0)
    lc.add_argument("--jobs", type=int, default=1)
    lc.add_argument("--quiet", action="store_true")
    lc.set_defaults(func=cmd_liftcheck)

    r = sub.add_parser("ray", help="export ray points as CSV t,re,im")
    r.add_argument("--kappa", type=_complex_arg, default=0j)
    r.add_argument("--address", required=True)
    r.add_argument("--potential", type=float)
    r.add_argument("--from", dest="t_from", type=float)
    r.add_argument("--to", dest="t_to", type=float)
    r.add_argument("--samples", type=int, default=50)
    r.add_argument("--depth", type=int)
    r.add_argument("--min-seed", dest="min_seed", type=float, default=30.0)
    r.add_argument("--output")
    r.set_defaults(func=cmd_ray)

    v = sub.add_parser("verify", help="ray-trace residual of a parameter")
    v.add_argument("--kappa", type=_complex_arg, required=True)
    v.add_argument("--address", required=True)
    v.add_argument("--potential", type=float, required=True)
    v.add_argument("--depth", type=int)
    v.add_argument("--min-seed", dest="min_seed", type=float, default=30.0)
    v.add_argument("--forward", type=int, help="also run the forward check to this level")
    v.add_argument("--threshold", type=float, default=1e-6)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("address", help="inspect an address literal")
    a.add_argument("--address", required=True)
    a.add_argument("--potential", type=float)
    a.add_argument("--depth", type=int, default=12)
    a.add_argument("--count", type=int, default=16)
    a.set_defaults(func=cmd_address)
    return p


def _setup_logging() -> None:
    level = os.environ.get("EXPOTH_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        pre, _ = parser.parse_known_args(argv)
        if pre.config:
            cfg = read_config(pre.config)
            sub = parser._subparsers._group_actions[0].choices[pre.command]
            _apply_config(sub, cfg)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    except (InputError, AddressSyntaxError, ValueError, OSError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
