"""Command line front end: solve instance files, generate them, verify
pipelines against brute force, and run benchmark sweeps into a CSV.

Exit codes: 0 solved (or the command finished), 2 infeasible, 3 step budget
exhausted, 1 for usage errors, unreadable input, and verification mismatches.
Every failure prints a single line `error: <reason>` on stderr so callers can
grep for it instead of parsing tracebacks.

Instance files are the JSON documents described in problems (family, n,
seed, objectives, inequalities, equalities; polynomials as term lists or
expression strings). Files that declare integer bounds are lowered to binary
variables before solving and the reported decisions are translated back.

The environment variable MOPIP_BUDGET overrides the default Buchberger step
budget; an explicit --budget flag wins over the environment.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

from .groebner import DEFAULT_STEP_BUDGET, StepBudgetExceeded
from .problems import (
    FAMILIES,
    generate,
    generate_with_data,
    record_to_instance,
    serialize_instance,
)
from .solver import (
    ALGORITHMS,
    CONDITION_KINDS,
    BruteForceCapExceeded,
    EfficientPoint,
    ParetoResult,
    brute_force,
    run_algorithm,
)
from .systems import SLACK_KEEP, SLACK_LINEAR, binarize

EXIT_SOLVED = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_BUDGET = 3

# Pipeline aliases: the *_sl names rewrite inequalities through linear slack
# equalities before building the condition system.
PIPELINES = {
    "alg1": ("alg1", SLACK_KEEP),
    "kkt": ("kkt", SLACK_KEEP),
    "kkt_sl": ("kkt", SLACK_LINEAR),
    "fj": ("fj", SLACK_KEEP),
    "fj_sl": ("fj", SLACK_LINEAR),
    "mofj": ("mofj", SLACK_KEEP),
    "brute": ("brute", SLACK_KEEP),
}

VERIFY_PIPELINES = "alg1,kkt,kkt_sl,fj,fj_sl,mofj"

CSV_COLUMNS = (
    "family",
    "n",
    "seed",
    "algorithm",
    "gb_ms",
    "total_ms",
    "n_vars",
    "n_gens",
    "max_deg",
    "n_nd",
    "status",
)


class _CliError(Exception):
    """Raised for anything that should become a one-line error and exit 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; route them through the
    # shared error path so the exit code stays 1 and the message stays on
    # one line.
    def error(self, message):
        raise _CliError(message)


# -- plumbing ---------------------------------------------------------------------

def _now_ms() -> int:
    return time.monotonic_ns() // 10 ** 6


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise _CliError(str(e)) from None


def _write_bytes(path: str, payload: bytes) -> None:
    if path == "-":
        sys.stdout.write(payload.decode("utf-8"))
        return
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as e:
        raise _CliError(str(e)) from None


def _load_instance(path: str):
    """Read an instance file; returns (raw record, ProblemInstance)."""
    raw = _read_text(path)
    try:
        rec = json.loads(raw)
    except json.JSONDecodeError as e:
        raise _CliError(f"{path}: not valid JSON: {e}") from None
    try:
        inst = record_to_instance(rec)
    except ValueError as e:
        raise _CliError(f"{path}: {e}") from None
    return rec, inst


def _step_budget(args) -> int:
    explicit = getattr(args, "budget", None)
    if explicit is not None:
        if explicit < 1:
            raise _CliError("budget must be a positive integer")
        return explicit
    env = os.environ.get("MOPIP_BUDGET")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise _CliError(f"MOPIP_BUDGET is not an integer: {env!r}") from None
        if value < 1:
            raise _CliError("MOPIP_BUDGET must be a positive integer")
        return value
    return DEFAULT_STEP_BUDGET


def _parse_pipelines(text: str) -> list:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise _CliError("no pipelines selected")
    for nm in names:
        if nm not in PIPELINES:
            known = ",".join(PIPELINES)
            raise _CliError(f"unknown pipeline {nm!r} (known: {known})")
    return names


def _decode_binarized(result: ParetoResult, bounds) -> ParetoResult:
    """Map decisions of a binarized solve back to the original integer
    variables (x_i is the weighted sum of its bit group)."""
    widths = [u.bit_length() for u in bounds]
    points = []
    for pt in result.points:
        xs = []
        pos = 0
        for bits in widths:
            xs.append(sum(pt.decision[pos + j] * (1 << j) for j in range(bits)))
            pos += bits
        points.append(EfficientPoint(tuple(xs), pt.value, pt.origin))
    return ParetoResult(result.status, tuple(points))


def _run_pipeline(inst, algorithm: str, slack: str, budget: int):
    """One timed pipeline run. Returns (result, details, total_ms) with the
    instance binarized first when it declares integer bounds."""
    bounds = inst.bounds
    t0 = _now_ms()
    if bounds is not None:
        inst = binarize(inst)
    result, details = run_algorithm(
        inst, algorithm, step_budget=budget, slack_mode=slack
    )
    total = max(_now_ms() - t0, details["gb_ms"])
    if bounds is not None:
        result = _decode_binarized(result, bounds)
    return result, details, total


def _pipeline_alias(algorithm: str, slack: str) -> str:
    if slack == SLACK_LINEAR and algorithm in CONDITION_KINDS:
        return algorithm + "_sl"
    return algorithm


# -- subcommands ------------------------------------------------------------------

def cmd_solve(args) -> int:
    rec, inst = _load_instance(args.input)
    slack = SLACK_LINEAR if args.slack_mode == "linear" else SLACK_KEEP
    name = _pipeline_alias(args.algorithm, slack)
    budget = _step_budget(args)
    try:
        result, details, total = _run_pipeline(inst, args.algorithm, slack, budget)
    except StepBudgetExceeded:
        print("error: step budget exhausted", file=sys.stderr)
        return EXIT_BUDGET
    except BruteForceCapExceeded as e:
        raise _CliError(str(e)) from None

    n_nd = len(result.Y_E) if result.status == "solved" else 0
    record = {
        "family": rec.get("family"),
        "n": rec.get("n"),
        "seed": rec.get("seed"),
        "algorithm": name,
        "gb_millis": details["gb_ms"],
        "total_millis": total,
        "n_vars": details["n_vars"],
        "n_gens": details["n_gens"],
        "max_deg": details["max_deg"],
        "n_nondominated": n_nd,
        "status": result.status,
    }
    doc = {"record": record, "result": result.to_record()}
    _write_bytes(args.output, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return EXIT_SOLVED if result.status == "solved" else EXIT_INFEASIBLE


def cmd_gen(args) -> int:
    try:
        inst, data = generate_with_data(args.family, args.n, args.seed)
    except ValueError as e:
        raise _CliError(str(e)) from None
    payload = serialize_instance(inst, family=args.family, seed=args.seed, data=data)
    _write_bytes(args.output, payload)
    return EXIT_SOLVED


def cmd_verify(args) -> int:
    names = _parse_pipelines(args.algorithms)
    budget = _step_budget(args)
    for path in args.inputs:
        _, inst = _load_instance(path)
        if inst.bounds is not None:
            inst = binarize(inst)
        try:
            oracle = brute_force(inst)
        except BruteForceCapExceeded as e:
            raise _CliError(f"{path}: {e}") from None
        for name in names:
            algorithm, slack = PIPELINES[name]
            try:
                result, _ = run_algorithm(
                    inst, algorithm, step_budget=budget, slack_mode=slack
                )
            except StepBudgetExceeded:
                print(f"error: {path}: {name}: step budget exhausted", file=sys.stderr)
                return EXIT_BUDGET
            same = (
                result.status == oracle.status
                and set(result.Y_E) == set(oracle.Y_E)
                and set(result.X_E) == set(oracle.X_E)
            )
            if not same:
                print(f"error: {path}: {name} disagrees with brute force", file=sys.stderr)
                return EXIT_USAGE
        print(f"ok: {path}: {','.join(names)} match brute force")
    return EXIT_SOLVED


def cmd_bench(args) -> int:
    families = [s.strip() for s in args.families.split(",") if s.strip()]
    if not families:
        raise _CliError("no families selected")
    for fam in families:
        if fam not in FAMILIES:
            raise _CliError(f"unknown family {fam!r}")
    if args.n_min < 1 or args.n_max < args.n_min:
        raise _CliError("need 1 <= n-min <= n-max")
    if args.seeds < 1:
        raise _CliError("seeds must be a positive count")
    names = _parse_pipelines(args.algorithms)
    budget = _step_budget(args)

    rows = []
    for fam in families:
        for n in range(args.n_min, args.n_max + 1):
            for seed in range(1, args.seeds + 1):
                try:
                    inst = generate(fam, n, seed)
                except ValueError as e:
                    raise _CliError(f"{fam} n={n}: {e}") from None
                for name in names:
                    rows.append(_bench_cell(fam, n, seed, name, inst, budget))

    wrote_header = _append_csv(args.csv, rows)
    suffix = " (new file)" if wrote_header else ""
    print(f"appended {len(rows)} rows to {args.csv}{suffix}")
    return EXIT_SOLVED


def _bench_cell(family: str, n: int, seed: int, name: str, inst, budget: int):
    algorithm, slack = PIPELINES[name]
    try:
        result, details, total = _run_pipeline(inst, algorithm, slack, budget)
    except StepBudgetExceeded:
        # Record the blowup and keep sweeping; partial CSVs are still useful.
        return (family, n, seed, name, 0, 0, len(inst.decision_names), 0, 0, 0,
                "budget_exceeded")
    except BruteForceCapExceeded as e:
        raise _CliError(f"{family} n={n}: {e}") from None
    n_nd = len(result.Y_E) if result.status == "solved" else 0
    return (
        family, n, seed, name,
        details["gb_ms"], total,
        details["n_vars"], details["n_gens"], details["max_deg"],
        n_nd, result.status,
    )


def _append_csv(path: str, rows) -> bool:
    fresh = not (os.path.exists(path) and os.path.getsize(path) > 0)
    try:
        with open(path, "a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            if fresh:
                w.writerow(CSV_COLUMNS)
            w.writerows(rows)
    except OSError as e:
        raise _CliError(str(e)) from None
    return fresh


# -- entry point ------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mopip", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    sp = sub.add_parser("solve", help="run one pipeline on an instance file")
    sp.add_argument("input", help="instance file path, or - for stdin")
    sp.add_argument("--algorithm", choices=ALGORITHMS, default="alg1")
    sp.add_argument("--slack-mode", choices=("keep", "linear"), default="keep",
                    help="linear rewrites inequalities via slack equalities")
    sp.add_argument("--budget", type=int, default=None,
                    help=f"Buchberger step budget (default {DEFAULT_STEP_BUDGET})")
    sp.add_argument("--output", default="-", help="result document path (default stdout)")
    sp.set_defaults(func=cmd_solve)

    gp = sub.add_parser("gen", help="generate a random instance file")
    gp.add_argument("--family", required=True, choices=sorted(FAMILIES))
    gp.add_argument("--n", required=True, type=int)
    gp.add_argument("--seed", required=True, type=int)
    gp.add_argument("--output", default="-", help="instance file path (default stdout)")
    gp.set_defaults(func=cmd_gen)

    vp = sub.add_parser("verify", help="check pipelines against brute force")
    vp.add_argument("inputs", nargs="+", help="instance file paths")
    vp.add_argument("--against", choices=("brute",), default="brute")
    vp.add_argument("--algorithms", default=VERIFY_PIPELINES,
                    help="comma list of pipelines to check")
    vp.set_defaults(func=cmd_verify)

    bp = sub.add_parser("bench", help="benchmark sweep, appending CSV rows")
    bp.add_argument("--families", required=True, help="comma list of family names")
    bp.add_argument("--n-min", required=True, type=int)
    bp.add_argument("--n-max", required=True, type=int)
    bp.add_argument("--seeds", required=True, type=int, help="runs seeds 1..K")
    bp.add_argument("--csv", required=True, help="CSV path, appended to")
    bp.add_argument("--algorithms", default=VERIFY_PIPELINES,
                    help="comma list of pipelines to run")
    bp.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StepBudgetExceeded:
        print("error: step budget exhausted", file=sys.stderr)
        return EXIT_BUDGET
    except (OSError, ValueError, RuntimeError) as e:
        reason = " ".join(str(e).split()) or type(e).__name__
        print(f"error: {reason}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
