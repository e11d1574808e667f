"""Command-line interface: schedule | cert verify | solve | bench.

Exit codes: 0 when everything passes, 1 on a verification or benchmark
assertion failure, 2 on usage or I/O errors.  The environment variable
SILVERPROX_MAX_K caps the certificate/schedule order accepted on the
command line (default 8); library callers are not capped.

Reports are deterministic for a fixed seed: JSON is emitted with sorted
keys and CSV rows in a fixed order.  Benchmark wall times are recorded
only when --timings is passed, so that default outputs are bit-identical
across runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .certificate import (
    TAMPER_TARGETS,
    build_bundle,
    check_laplacian,
    check_multipliers_nonneg,
    check_schur_psd,
    rate_from_certificate,
    tamper_bundle,
    verify_descent_identity,
)
from .exactnum import ONE
from .schedule import StepSchedule, silver_schedule
from .solver import (
    constant_baseline,
    lower_bound_instance,
    proximal_gd_run,
    random_quadratic_instance,
    rate_bound,
)


CERT_SCHEMA = "silverprox.cert/1"


def _dist2(u, v) -> float:
    total = 0
    for a, b in zip(u, v):
        diff = a - b
        total = total + diff * diff
    return float(total)


class UsageError(Exception):
    pass


def _max_k() -> int:
    try:
        return int(os.environ.get("SILVERPROX_MAX_K", "8"))
    except ValueError:
        raise UsageError("SILVERPROX_MAX_K must be an integer")


def _parse_k_spec(text: str) -> list[int]:
    """Parse "3" or "1..6" into a list of orders, capped by SILVERPROX_MAX_K."""
    cap = _max_k()
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"cannot parse k specification {text!r}")
    if lo < 1 or hi < lo:
        raise UsageError(f"k range must satisfy 1 <= lo <= hi, got {text!r}")
    if hi > cap:
        raise UsageError(
            f"k={hi} exceeds the SILVERPROX_MAX_K cap ({cap}); "
            "raise the environment variable to allow larger orders"
        )
    return list(range(lo, hi + 1))


# ---------------------------------------------------------------------------
# schedule
# ---------------------------------------------------------------------------


def cmd_schedule(args) -> int:
    ks = _parse_k_spec(args.k)
    if len(ks) != 1:
        raise UsageError("schedule takes a single k, not a range")
    sched = StepSchedule.build(ks[0])
    sections = []
    if args.seq in ("pi", "both"):
        sections.append(("pi", sched.pi))
    if args.seq in ("c", "both"):
        sections.append(("c", sched.c))
    for label, seq in sections:
        print(f"# {label} k={sched.k} entries={sched.n}")
        for value in seq:
            print(repr(value.to_float()) if args.float else value.exact_str())
    if args.csv:
        rows = [
            (label, idx, v.a.numerator, v.a.denominator, v.b.numerator,
             v.b.denominator, repr(v.to_float()))
            for label, seq in sections
            for idx, v in enumerate(seq)
        ]
        _write_csv(
            args.csv,
            ["sequence", "index", "a_num", "a_den", "b_num", "b_den", "float"],
            rows,
        )
    return 0


# ---------------------------------------------------------------------------
# cert verify
# ---------------------------------------------------------------------------


def _verify_one(k: int, args) -> tuple[dict, str]:
    bundle = build_bundle(k)
    if args.tamper:
        bundle = tamper_bundle(bundle, args.tamper)
    nonneg = check_multipliers_nonneg(bundle)
    laplacian = check_laplacian(bundle)
    schur = check_schur_psd(bundle, float_eig_probe=args.eig_check)
    identity = verify_descent_identity(
        k, trials=args.trials, dim=args.dim, seed=args.seed + k, bundle=bundle
    )
    result = {
        "k": k,
        "n": bundle.n,
        "nonneg": "pass" if nonneg.passed else "fail",
        "laplacian": "pass" if laplacian.passed else "fail",
        "schur": "pass" if schur.passed else "fail",
        "identity": {"trials": identity.trials, "failures": len(identity.failures)},
        "rate_exact": rate_from_certificate(k).exact_str(),
        "rate_float": float(rate_from_certificate(k)),
    }
    detail = "; ".join(
        r.detail for r in (nonneg, laplacian, schur) if not r.passed and r.detail
    )
    return result, detail


def cmd_cert_verify(args) -> int:
    ks = _parse_k_spec(args.k)
    if args.trials < 1 or args.dim < 1:
        raise UsageError("--trials and --dim must be positive")
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            outcomes = list(pool.map(lambda k: _verify_one(k, args), ks))
    else:
        outcomes = [_verify_one(k, args) for k in ks]
    all_pass = True
    results = []
    for res, detail in outcomes:
        results.append(res)
        ok = (
            res["nonneg"] == "pass"
            and res["laplacian"] == "pass"
            and res["schur"] == "pass"
            and res["identity"]["failures"] == 0
        )
        all_pass &= ok
        print(
            f"k={res['k']} n={res['n']} nonneg={res['nonneg']} "
            f"laplacian={res['laplacian']} schur={res['schur']} "
            f"identity={res['identity']['trials'] - res['identity']['failures']}"
            f"/{res['identity']['trials']} rate={res['rate_float']:.6g} "
            f"{'OK' if ok else 'FAIL'}"
        )
        if detail:
            print(f"  {detail}")
    if args.json:
        payload = {"schema": CERT_SCHEMA, "results": results}
        _write_text(args.json, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def _make_problem(args):
    """Build the requested instance; returns (problem, x0, exact_mode)."""
    name = args.problem
    if name == "lower-bound":
        problem, _ = lower_bound_instance(args.k_value, exact=args.exact)
        x0 = [ONE] if args.exact else [1.0]
        return problem, x0, args.exact
    if args.exact:
        raise UsageError(f"--exact is only supported for lower-bound, not {name!r}")
    rng = np.random.default_rng(args.seed)
    kinds = {"lasso": "l1", "box-qp": "box", "vanilla-qp": "zero"}
    if name not in kinds:
        raise UsageError(f"unknown problem {name!r}")
    problem, x0 = random_quadratic_instance(args.dim, 0.0, 1.0, kinds[name], rng)
    return problem, x0, False


def _schedule_steps(choice: str, k: int, n: int, exact: bool):
    if choice == "silver":
        steps = silver_schedule(k)
        return steps if exact else [v.to_float() for v in steps]
    if choice.startswith("constant"):
        _, _, const = choice.partition(":")
        value = float(const) if const else 1.0
        if value <= 0:
            raise UsageError("constant stepsize must be positive")
        if exact and value != 1.0:
            raise UsageError("exact mode supports only constant:1")
        return [1 if exact else value] * n
    raise UsageError(f"unknown schedule {choice!r}")


def cmd_solve(args) -> int:
    ks = _parse_k_spec(args.k)
    if len(ks) != 1:
        raise UsageError("solve takes a single k, not a range")
    args.k_value = ks[0]
    n = 2**args.k_value - 1
    problem, x0, exact = _make_problem(args)
    steps = _schedule_steps(args.schedule, args.k_value, n, exact)
    trace = proximal_gd_run(problem, steps, x0)
    dist2_0 = _dist2(x0, problem.optimum)
    big_m = float(problem.smooth.smoothness)

    milestones = {2**j - 1 for j in range(1, args.k_value + 1)}
    rows = []
    for it in range(len(trace.xs)):
        gap = float(trace.Fs[it] - trace.F_star) if math.isfinite(float(trace.Fs[it])) else math.inf
        dist = math.sqrt(_dist2(trace.xs[it], problem.optimum))
        step_str = repr(float(trace.steps[it - 1])) if it > 0 else ""
        bound = ""
        if it in milestones:
            j = (it + 1).bit_length() - 1
            if args.schedule == "silver":
                bound = repr(rate_bound(j, big_m, dist2_0)[1])
            else:
                bound = repr(constant_baseline(it, big_m, dist2_0))
        rows.append((it, step_str, repr(gap), repr(dist), bound))
    if args.csv:
        _write_csv(
            args.csv,
            ["iter", "stepsize", "F_gap", "dist_to_opt", "bound_at_milestone"],
            rows,
        )
    final_gap = trace.Fs[-1] - trace.F_star
    print(f"problem={problem.name} schedule={args.schedule} n={n}")
    if exact:
        print(f"final F gap (exact) = {final_gap.exact_str()}")
    print(f"final F gap = {float(final_gap)!r}")
    print(f"certificate bound = {rate_bound(args.k_value, big_m, dist2_0)[1]!r}")
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _bench_families(args):
    rng = np.random.default_rng(args.seed)
    families = [("lower-bound", None, None)]
    for name, kind in (("vanilla-qp", "zero"), ("lasso", "l1"), ("box-qp", "box")):
        problem, x0 = random_quadratic_instance(args.dim, 0.0, 1.0, kind, rng)
        families.append((name, problem, x0))
    return families


def cmd_bench(args) -> int:
    ks = _parse_k_spec(args.k)
    rows = []
    sound = True
    for name, problem, x0 in _bench_families(args):
        for k in ks:
            n = 2**k - 1
            if name == "lower-bound":
                problem, _ = lower_bound_instance(k, exact=args.exact)
                x0 = [ONE] if args.exact else [1.0]
            dist2_0 = _dist2(x0, problem.optimum)
            big_m = float(problem.smooth.smoothness)
            base = constant_baseline(n, big_m, dist2_0)
            for schedule in ("silver", "constant"):
                exact_run = args.exact and name == "lower-bound"
                steps = _schedule_steps(schedule, k, n, exact_run)
                started = time.perf_counter()
                trace = proximal_gd_run(problem, steps, x0)
                elapsed = time.perf_counter() - started
                gap = float(trace.Fs[-1] - trace.F_star)
                bound = (
                    rate_bound(k, big_m, dist2_0)[1] if schedule == "silver" else base
                )
                if gap > bound * (1 + 1e-9) + 1e-12:
                    sound = False
                rows.append(
                    (
                        name,
                        schedule,
                        k,
                        n,
                        repr(gap),
                        repr(bound),
                        repr(gap / base),
                        repr(elapsed) if args.timings else "",
                    )
                )
    header = [
        "instance", "schedule", "k", "n", "F_gap", "bound",
        "ratio_to_constant", "wall_time",
    ]
    if args.csv:
        _write_csv(args.csv, header, rows)
    for row in rows:
        print(" ".join(str(v) for v in row[:7]))
    if not sound:
        print("bench: soundness violation, some F_gap exceeds its bound", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def _write_csv(path: str, header: list[str], rows) -> None:
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w") as handle:
            handle.write(text)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="silverprox",
        description="Silver-stepsize proximal gradient descent and its exact rate certificate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sched = sub.add_parser("schedule", help="print or export the stepsize schedule")
    p_sched.add_argument("--k", required=True, help="schedule order (single k)")
    p_sched.add_argument("--float", action="store_true", help="print floats instead of exact strings")
    p_sched.add_argument("--seq", choices=("pi", "c", "both"), default="both")
    p_sched.add_argument("--csv", help="CSV output path")
    p_sched.set_defaults(func=cmd_schedule)

    p_cert = sub.add_parser("cert", help="certificate operations")
    cert_sub = p_cert.add_subparsers(dest="cert_command", required=True)
    p_verify = cert_sub.add_parser("verify", help="verify the rate certificate exactly")
    p_verify.add_argument("--k", required=True, help="order or range, e.g. 3 or 1..6")
    p_verify.add_argument("--trials", type=int, default=20)
    p_verify.add_argument("--dim", type=int, default=4)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--json", help="JSON report path")
    p_verify.add_argument("--threads", type=int, default=1)
    p_verify.add_argument("--eig-check", action="store_true",
                          help="also probe min eigenvalue of S in floating point")
    p_verify.add_argument("--tamper", choices=TAMPER_TARGETS,
                          help="negative-control hook: perturb one certificate entry")
    p_verify.set_defaults(func=cmd_cert_verify)

    p_solve = sub.add_parser("solve", help="run proximal gradient descent on a test problem")
    p_solve.add_argument("--problem", required=True,
                         choices=("lasso", "box-qp", "lower-bound", "vanilla-qp"))
    p_solve.add_argument("--k", required=True, help="horizon order: n = 2**k - 1")
    p_solve.add_argument("--schedule", default="silver",
                         help="silver (default) or constant[:c]")
    p_solve.add_argument("--exact", action="store_true",
                         help="exact arithmetic (lower-bound only)")
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--dim", type=int, default=8)
    p_solve.add_argument("--csv", help="CSV trace path")
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="sweep instances x schedules x k")
    p_bench.add_argument("--k", default="1..8", help="order range, default 1..8")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--dim", type=int, default=8)
    p_bench.add_argument("--exact", action="store_true",
                         help="run the lower-bound family in exact arithmetic")
    p_bench.add_argument("--timings", action="store_true",
                         help="record wall times (makes output nondeterministic)")
    p_bench.add_argument("--csv", help="CSV report path")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except IOError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
