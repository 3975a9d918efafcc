"""Command-line front end: ``mmqp solve|generate|verify|trace|bench|attack``.

Exit codes: 0 optimal (or success), 1 verification rejected, 2 infeasible,
3 iteration limit, 4 input error.  Constraint indices are 1-based everywhere
on the command line and in output files.
"""
import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import portfolio
from .errors import InputError, IterationLimitExceeded, MMQPError
from .generator import GenSpec, generate
from .problem import load_problem, save_problem
from .solver import OPTIMAL, solve, trace_to_csv, trace_to_json
from .verify import enumerate_spairs, verify_spair

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_INFEASIBLE = 2
EXIT_ITERLIMIT = 3
EXIT_INPUT = 4

BUILTIN = ("example1", "example2")


def read_problem(source):
    """Load a problem from a file path or one of the bundled examples by name."""
    if source == "-":
        return load_problem(sys.stdin)
    path = Path(source)
    if not path.exists() and source in BUILTIN:
        with resources.files("mmqp").joinpath("data", f"{source}.json").open("r", encoding="utf-8") as fh:
            return load_problem(fh)
    if not path.exists():
        raise InputError(f"no such problem file: {source}")
    return load_problem(path)


def parse_indices(text):
    """``"2,3"`` -> ``[1, 2]`` (1-based on input, 0-based out)."""
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad index list {text!r}") from None
    if any(v < 1 for v in vals):
        raise InputError("constraint indices are 1-based")
    return [v - 1 for v in vals]


def _rule(args, problem):
    if getattr(args, "force_sequence", None):
        seq = parse_indices(args.force_sequence)
        if any(i >= problem.m for i in seq):
            raise InputError(f"forced index outside 1..{problem.m}")
        return seq
    return args.rule


def _emit(obj, out=None):
    text = json.dumps(obj, indent=1, default=float)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _status_code(outcome):
    return EXIT_OK if outcome.status == OPTIMAL else EXIT_INFEASIBLE


def cmd_solve(args):
    p = read_problem(args.problem)
    outcome = solve(p, rule=_rule(args, p), max_iter=args.max_iter)
    if args.trace:
        trace_to_csv(outcome.trace, args.trace)
    if args.json_trace:
        trace_to_json(outcome.trace, args.json_trace)
    summary = outcome.summary()
    if args.verify and outcome.optimal:
        rep = verify_spair(p, outcome.spair.z, outcome.spair.alpha, outcome.spair.u)
        summary["verification"] = rep.as_dict()
    _emit(summary, args.out)
    return _status_code(outcome)


def cmd_generate(args):
    spec = GenSpec(args.type, args.nx, args.ny, args.m, args.na, seed=args.seed)
    inst = generate(spec)
    text = save_problem(inst.problem, args.out, z_star=inst.z_star, u_star=inst.u_star,
                        active_set=inst.active_set)
    if not args.out:
        print(text)
    return EXIT_OK


def _solution_from(args, p):
    if args.solution:
        data = json.loads(Path(args.solution).read_text(encoding="utf-8"))
        z = data["z"]
        alpha = [int(i) - 1 for i in data.get("alpha", [])]
        u = data.get("u", [])
        if len(u) == p.m and len(alpha) != p.m:
            u = [u[i] for i in alpha]
        return np.asarray(z, dtype=float), alpha, np.asarray(u, dtype=float)
    meta = p.meta
    if "z_star" not in meta:
        raise InputError("problem has no planted solution; pass --solution FILE")
    alpha = [int(i) - 1 for i in meta.get("active_set", [])]
    u = np.asarray(meta.get("u_star", []), dtype=float)
    if u.size == p.m:
        u = u[alpha]
    return np.asarray(meta["z_star"], dtype=float), alpha, u


def cmd_verify(args):
    p = read_problem(args.problem)
    result = {}
    code = EXIT_OK
    if args.enumerate:
        pairs = enumerate_spairs(p, max_m=args.max_m)
        result["spairs"] = [{"alpha": [i + 1 for i in sp.alpha], "z": sp.z.tolist(),
                             "u": sp.u.tolist(), "f": sp.f} for sp in pairs]
    else:
        z, alpha, u = _solution_from(args, p)
        if z.shape != (p.n,) or u.shape != (len(alpha),):
            raise InputError("solution dimensions do not match the problem")
        rep = verify_spair(p, z, alpha, u)
        result = rep.as_dict()
        code = EXIT_OK if rep.accepted else EXIT_REJECT
    _emit(result, args.out)
    return code


def _frac(x, enabled):
    if x is None:
        return "-"
    x = float(x)
    if np.isinf(x):
        return "inf"
    if enabled:
        fr = Fraction(x).limit_denominator(10000)
        if abs(float(fr) - x) <= 1e-9 * (1.0 + abs(x)):
            return str(fr)
    return f"{x:.6g}"


def _vec(v, enabled):
    if v is None:
        return "-"
    return "[" + " ".join(_frac(x, enabled) for x in v) + "]"


def format_trace(records, fractions=False):
    header = ["iter", "z", "s", "f", "alpha", "u", "p", "d", "r", "t1", "t2", "k", "remark"]
    rows = []
    for rec in records:
        rows.append([
            str(rec.iter), _vec(rec.z, fractions), _vec(rec.s, fractions),
            _frac(rec.f, fractions),
            "{" + ",".join(str(i + 1) for i in rec.alpha) + "}",
            _vec(rec.u, fractions),
            "-" if rec.p is None else str(rec.p + 1),
            _vec(rec.d, fractions), _vec(rec.r, fractions),
            _frac(rec.t1, fractions), _frac(rec.t2, fractions),
            "-" if rec.k is None else str(rec.k + 1),
            rec.remark,
        ])
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines)


def cmd_trace(args):
    p = read_problem(args.problem)
    try:
        outcome = solve(p, rule=_rule(args, p), max_iter=args.max_iter)
        records = outcome.trace
        code = _status_code(outcome)
    except IterationLimitExceeded as exc:
        records, code = exc.trace, EXIT_ITERLIMIT
    print(format_trace(records, fractions=args.fractions))
    return code


def cmd_bench(args):
    scales = [bench_mod.parse_scale(s) for s in (args.scale or ["100,200,300,100"])]
    jobs = args.jobs if args.jobs else bench_mod.default_jobs()
    records = [bench_mod.bench_scale(args.type, sc, reps=args.reps, base_seed=args.seed, jobs=jobs)
               for sc in scales]
    text = bench_mod.records_to_csv(records, timing=not args.no_timing)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.steps_out:
        Path(args.steps_out).write_text(bench_mod.step_timings_csv(records), encoding="utf-8")
    return EXIT_OK


def cmd_attack(args):
    if args.synthetic:
        try:
            n, T, seed = (int(v) for v in args.synthetic.split(","))
        except ValueError:
            raise InputError("--synthetic expects n,T,seed") from None
        md = portfolio.synthetic_market(n, T, seed=seed)
    else:
        if not (args.prices and args.volumes):
            raise InputError("need --prices and --volumes, or --synthetic n,T,seed")
        md = portfolio.ingest_market_csv(args.prices, args.volumes)
    try:
        grid = portfolio.parse_b_grid(args.b_grid)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if any(not 0.0 <= b <= portfolio.BUDGET for b in grid):
        raise InputError("b values must lie in [0, 12]")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in portfolio.METHODS]
    if bad:
        raise InputError(f"unknown methods {bad}; choose from {list(portfolio.METHODS)}")
    results = portfolio.run_attacks(md, grid, methods=methods, trials=args.trials, seed=args.seed)
    text = portfolio.write_results_csv(results, args.out)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="mmqp", description="Dual active-set solver for minimax QPs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_rule_opts(sp):
        sp.add_argument("--rule", choices=["most-violated", "first-index"], default="most-violated")
        sp.add_argument("--force-sequence", metavar="I,J,...",
                        help="replay this entering order (1-based) before falling back to --rule")
        sp.add_argument("--max-iter", type=int, default=None)

    sp = sub.add_parser("solve", help="solve a problem file")
    sp.add_argument("problem", help="problem JSON (or 'example1' / 'example2')")
    add_rule_opts(sp)
    sp.add_argument("--trace", metavar="FILE", help="write the iteration CSV")
    sp.add_argument("--json-trace", metavar="FILE", help="write the verbose JSON trace")
    sp.add_argument("--verify", action="store_true", help="also run the independent verifier")
    sp.add_argument("--out", metavar="FILE")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("generate", help="generate a random instance with a planted solution")
    sp.add_argument("--type", type=int, choices=[1, 2], default=2)
    sp.add_argument("--nx", type=int, required=True)
    sp.add_argument("--ny", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--na", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", "-o", metavar="FILE")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("verify", help="check a candidate solution, or enumerate all S-pairs")
    sp.add_argument("problem")
    sp.add_argument("--solution", metavar="FILE",
                    help="JSON with z, alpha (1-based) and u; default is the planted solution")
    sp.add_argument("--enumerate", action="store_true", help="list every S-pair (small m only)")
    sp.add_argument("--max-m", type=int, default=16)
    sp.add_argument("--out", metavar="FILE")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("trace", help="print the iteration table")
    sp.add_argument("problem")
    add_rule_opts(sp)
    sp.add_argument("--fractions", action="store_true", help="show small rationals exactly")
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("bench", help="benchmark on generated instances")
    sp.add_argument("--type", type=int, choices=[1, 2], default=2)
    sp.add_argument("--scale", action="append", metavar="NX,NY,M,NA")
    sp.add_argument("--reps", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=None, help="parallel reps (default $MMQP_JOBS or 1)")
    sp.add_argument("--no-timing", action="store_true", help="omit timing columns (byte-stable output)")
    sp.add_argument("--out", metavar="FILE")
    sp.add_argument("--steps-out", metavar="FILE", help="per-step timing split CSV")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("attack", help="portfolio attack experiment")
    sp.add_argument("--prices", metavar="FILE")
    sp.add_argument("--volumes", metavar="FILE")
    sp.add_argument("--synthetic", metavar="N,T,SEED", help="use a synthetic market instead of CSVs")
    sp.add_argument("--b-grid", default="0:2:12")
    sp.add_argument("--methods", default="minimax,random,no-long")
    sp.add_argument("--trials", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", metavar="FILE")
    sp.set_defaults(func=cmd_attack)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which would read as "infeasible"
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return args.func(args)
    except IterationLimitExceeded as exc:
        print(f"mmqp: {exc}", file=sys.stderr)
        return EXIT_ITERLIMIT
    except (InputError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"mmqp: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MMQPError as exc:
        print(f"mmqp: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
