"""Command-line interface.

Subcommands: gen, solve, sweep, fig1, oracle-compare, bench. Structured
output is JSON on stdout, tabular output is CSV files. Exit codes: 0 on
success, 2 for usage/config/file problems, 3 when an algorithm emitted an
allocation that fails its own feasibility guarantee, 4 when the exhaustive
search budget is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .baselines import (
    BudgetExceededError,
    OracleBudget,
    brute_force_oracle,
    greedy_unconstrained,
    heuristic_solve,
)
from .core import ProblemInstance, check_feasibility, evaluate_wsu
from .sgpa import SgpaConfig, solve, write_trace_csv
from .simharness import (
    GenParams,
    SweepConfig,
    fig1_experiment,
    run_sweep,
    sample_instance,
    write_metadata,
    write_results_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVARIANT = 3
EXIT_BUDGET = 4


def _add_gen_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--K", type=int, required=True, help="number of users (>= 2)")
    parser.add_argument("--M", type=int, required=True, help="number of carriers (>= 2)")
    parser.add_argument("--N", type=int, required=True, help="blocks per carrier (>= 2)")
    parser.add_argument("--Mk", type=int, default=1, help="per-user carrier cap")
    parser.add_argument(
        "--M0-limit", type=int, default=None,
        help="system carrier cap limit (effective cap is min(M, limit); default M)",
    )
    parser.add_argument("--snr-low", type=float, default=-10.0, help="SNR range low (dB)")
    parser.add_argument("--snr-high", type=float, default=20.0, help="SNR range high (dB)")
    parser.add_argument(
        "--weights", choices=["equal", "uniform_simplex"], default="equal",
        help="user weight mode",
    )
    parser.add_argument("--seed", type=int, default=0, help="generator seed")


def _gen_params(args) -> GenParams:
    limit = args.M0_limit if args.M0_limit is not None else args.M
    return GenParams(
        K=args.K,
        M=args.M,
        N=args.N,
        ue_cc_cap=args.Mk,
        system_cc_cap_limit=limit,
        snr_db_range=(args.snr_low, args.snr_high),
        weight_mode=args.weights,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caralloc",
        description="Joint carrier and resource-block allocation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a random instance JSON file")
    _add_gen_flags(p_gen)
    p_gen.add_argument("-o", "--output", required=True, help="instance JSON path")

    p_solve = sub.add_parser("solve", help="solve an instance file with one algorithm")
    p_solve.add_argument("--instance", required=True, help="instance JSON path")
    p_solve.add_argument(
        "--algorithm", choices=["sgpa", "greedy", "heuristic", "oracle"], default="sgpa"
    )
    p_solve.add_argument("--max-iterations", type=int, default=20)
    p_solve.add_argument("--snap-tolerance", type=float, default=1e-9)
    p_solve.add_argument("--zero-tolerance", type=float, default=1e-12)
    p_solve.add_argument("--convergence-tolerance", type=float, default=1e-10)
    p_solve.add_argument("--trace", default=None, help="write per-iteration trace CSV here")
    p_solve.add_argument("--budget", type=int, default=10_000_000, help="oracle enumeration budget")
    p_solve.add_argument("--allocation-out", default=None, help="write the allocation JSON here")

    p_sweep = sub.add_parser("sweep", help="run a Monte-Carlo sweep from a JSON config")
    p_sweep.add_argument("--config", required=True, help="sweep config JSON path")
    p_sweep.add_argument("-o", "--output", required=True, help="results CSV path")
    p_sweep.add_argument("--jobs", type=int, default=None, help="parallel trial workers")

    p_fig1 = sub.add_parser("fig1", help="carrier-share convergence trajectory CSV")
    p_fig1.add_argument("--M", type=int, required=True)
    p_fig1.add_argument("--Mk", type=int, required=True)
    p_fig1.add_argument("--iterations", type=int, default=50)
    p_fig1.add_argument("--seed", type=int, default=0)
    p_fig1.add_argument("-o", "--output", required=True, help="trajectory CSV path")

    p_cmp = sub.add_parser(
        "oracle-compare", help="solver and heuristic vs exhaustive optimum on small instances"
    )
    p_cmp.add_argument("--trials", type=int, default=200)
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--K", type=int, default=2)
    p_cmp.add_argument("--M", type=int, default=3)
    p_cmp.add_argument("--N", type=int, default=2)
    p_cmp.add_argument("--Mk", type=int, default=1)
    p_cmp.add_argument("--M0-limit", type=int, default=2)
    p_cmp.add_argument("--budget", type=int, default=10_000_000)

    p_bench = sub.add_parser("bench", help="timing of solver and heuristic across an M grid")
    p_bench.add_argument("--m-grid", default="10,20,30,40", help="comma-separated carrier counts")
    p_bench.add_argument("--trials", type=int, default=20)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--K", type=int, default=10)
    p_bench.add_argument("--N", type=int, default=20)
    p_bench.add_argument("--Mk", type=int, default=2)
    p_bench.add_argument("--M0-limit", type=int, default=20)
    p_bench.add_argument("-o", "--output", required=True, help="results CSV path")

    return parser


def cmd_gen(args) -> int:
    params = _gen_params(args)
    instance = sample_instance(params)
    with open(args.output, "w") as fh:
        fh.write(instance.to_json())
    print(
        f"wrote {args.output}: K={instance.num_ues} M={instance.num_ccs} "
        f"N={instance.num_rbs_per_cc} M0={instance.system_cc_cap}"
    )
    return EXIT_OK


def cmd_solve(args) -> int:
    with open(args.instance) as fh:
        instance = ProblemInstance.from_json(fh.read())

    report_extra = {}
    if args.algorithm == "sgpa":
        config = SgpaConfig(
            max_iterations=args.max_iterations,
            snap_tolerance=args.snap_tolerance,
            zero_tolerance=args.zero_tolerance,
            convergence_tolerance=args.convergence_tolerance,
            record_trace=args.trace is not None,
        )
        result = solve(instance, config)
        allocation = result.binary
        wsu = result.wsu
        report_extra = {"iterations_run": result.iterations_run, "converged": result.converged}
        if args.trace is not None:
            write_trace_csv(result, args.trace)
    elif args.algorithm == "greedy":
        greedy = greedy_unconstrained(instance)
        allocation = greedy.allocation
        wsu = evaluate_wsu(instance, allocation)
        report_extra = {"within_caps": greedy.within_caps}
    elif args.algorithm == "heuristic":
        allocation = heuristic_solve(instance)
        wsu = evaluate_wsu(instance, allocation)
    else:
        allocation, wsu = brute_force_oracle(instance, OracleBudget(args.budget))

    feasibility = check_feasibility(instance, allocation)
    doc = {"algorithm": args.algorithm, "wsu": wsu, **feasibility.to_dict(), **report_extra}
    print(json.dumps(doc))

    if args.allocation_out is not None:
        with open(args.allocation_out, "w") as fh:
            fh.write(allocation.to_json())

    # Greedy deliberately ignores the carrier caps, so an infeasible greedy
    # result is reported, not treated as an internal error.
    if not feasibility.ok and args.algorithm != "greedy":
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = SweepConfig.from_json_file(args.config)
    if args.jobs is not None:
        from dataclasses import replace

        config = replace(config, jobs=args.jobs)
    rows = run_sweep(config)
    write_results_csv(rows, args.output)
    write_metadata(config, rows, str(args.output) + ".meta.json")
    print(f"wrote {args.output} ({len(rows)} rows)")
    return EXIT_OK


def cmd_fig1(args) -> int:
    trajectory = fig1_experiment(args.M, args.Mk, args.iterations, args.seed)
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration"] + [f"cc{m}" for m in range(args.M)])
        for i, row in enumerate(trajectory):
            writer.writerow([i] + [repr(v) for v in row])
    print(f"wrote {args.output} ({trajectory.shape[0]} rows)")
    return EXIT_OK


def cmd_oracle_compare(args) -> int:
    params = GenParams(
        K=args.K,
        M=args.M,
        N=args.N,
        ue_cc_cap=args.Mk,
        system_cc_cap_limit=args.M0_limit,
        seed=args.seed,
    )
    budget = OracleBudget(args.budget)
    sgpa_wsus, heuristic_wsus, oracle_wsus = [], [], []
    from dataclasses import replace

    for trial in range(args.trials):
        instance = sample_instance(replace(params, stream_key=(trial,)))
        sgpa_wsus.append(solve(instance).wsu)
        heuristic_wsus.append(evaluate_wsu(instance, heuristic_solve(instance)))
        oracle_wsus.append(brute_force_oracle(instance, budget)[1])

    mean_oracle = float(np.mean(oracle_wsus))
    doc = {
        "trials": args.trials,
        "mean_wsu_sgpa": float(np.mean(sgpa_wsus)),
        "mean_wsu_heuristic": float(np.mean(heuristic_wsus)),
        "mean_wsu_oracle": mean_oracle,
        "ratio_sgpa_oracle": float(np.mean(sgpa_wsus)) / mean_oracle,
        "ratio_heuristic_oracle": float(np.mean(heuristic_wsus)) / mean_oracle,
        "dominance_ok": bool(
            all(s <= o + 1e-9 for s, o in zip(sgpa_wsus, oracle_wsus))
            and all(h <= o + 1e-9 for h, o in zip(heuristic_wsus, oracle_wsus))
        ),
    }
    print(json.dumps(doc))
    return EXIT_OK


def cmd_bench(args) -> int:
    m_grid = tuple(int(v) for v in args.m_grid.split(","))
    gen = GenParams(
        K=args.K,
        M=m_grid[0],
        N=args.N,
        ue_cc_cap=args.Mk,
        system_cc_cap_limit=args.M0_limit,
        seed=args.seed,
    )
    config = SweepConfig(
        algorithms=("sgpa", "heuristic"),
        gen=gen,
        trials=args.trials,
        base_seed=args.seed,
        m_grid=m_grid,
        sgpa=SgpaConfig(max_iterations=20),
    )
    rows = run_sweep(config)
    write_results_csv(rows, args.output)
    write_metadata(config, rows, str(args.output) + ".meta.json")
    print(f"wrote {args.output} ({len(rows)} rows)")
    return EXIT_OK


_HANDLERS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "fig1": cmd_fig1,
    "oracle-compare": cmd_oracle_compare,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return _HANDLERS[args.command](args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
