"""Command-line front end.

Subcommands: exact (LP or exhaustive integer solve of a scenario file),
sinkhorn (fast approximate solve, optional per-sweep trace and eta sweep),
gospa (per-frame assignment metric), gen (synthetic scenario files), and
bench (accuracy/runtime sweeps over generated scenarios, TSV output).

Exit codes: 0 success, 1 usage error, 2 data error (parse/validation),
3 solver failure or non-convergence.
"""

from __future__ import annotations

import argparse
import platform
import statistics
import sys
from dataclasses import replace

from . import __version__
from ._backend import active_backend
from .costs import build_frame_costs
from .exact import (
    BudgetExceededError,
    ExactSolveError,
    PlanConstraintError,
    brute_force_tgospa,
    solve_gospa_frame,
    solve_relaxed_lp,
    tgospa_metric,
)
from .generator import GenParams, derive_seed, generate_scenario, sweep_params
from .model import (
    Config,
    ScenarioFormatError,
    ScenarioValidationError,
    load_scenario,
    save_scenario,
)
from .sinkhorn import SinkhornInfeasibleError, SinkhornNumericalError, run_sinkhorn

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SOLVER = 3


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=float, default=1.0, help="outlier exponent (>= 1)")
    parser.add_argument("--c", type=float, default=0.25, help="cut-off distance (> 0)")
    parser.add_argument("--gamma", type=float, default=1.0, help="switch penalty (> 0)")
    parser.add_argument("--eta", type=float, default=1e-4, help="scaled regularization (> 0)")
    parser.add_argument("--tol", type=float, default=1e-3, help="relative step-size threshold")
    parser.add_argument("--max-iter", type=int, default=10000, help="sweep limit")
    parser.add_argument("--seed", type=int, default=0, help="seed for seeded operations")


def _config_from(args) -> Config:
    return Config(
        p=args.p,
        c=args.c,
        gamma=args.gamma,
        eta=args.eta,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
    )


def _add_gen_args(parser: argparse.ArgumentParser) -> None:
    defaults = GenParams()
    parser.add_argument("--m-t", type=int, default=defaults.m_t, help="tracked target count")
    parser.add_argument("--m-f", type=int, default=defaults.m_f, help="missed-track count")
    parser.add_argument("--n-f", type=int, default=defaults.n_f, help="false-track count")
    parser.add_argument("--T", type=int, default=defaults.T, help="time steps")
    parser.add_argument("--r", type=float, default=defaults.r, help="nominal speed scale")
    parser.add_argument("--q", type=float, default=defaults.q, help="detection probability")
    parser.add_argument("--c-s", type=float, default=defaults.c_s, help="switch probability")
    parser.add_argument("--n-ts", type=int, default=defaults.n_ts, help="switch opportunities")
    parser.add_argument("--n-max", type=int, default=defaults.n_max, help="position grid bound")
    parser.add_argument("--sigma", type=float, default=defaults.sigma, help="noise std dev")


def _gen_params_from(args) -> GenParams:
    return GenParams(
        m_t=args.m_t,
        m_f=args.m_f,
        n_f=args.n_f,
        T=args.T,
        r=args.r,
        q=args.q,
        c_s=args.c_s,
        n_ts=args.n_ts,
        n_max=args.n_max,
        sigma=args.sigma,
        seed=args.seed,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="tgospa", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tgospa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_exact = sub.add_parser("exact", help="exact metric of a scenario file")
    p_exact.add_argument("scenario", help="scenario file path")
    p_exact.add_argument(
        "--integer", action="store_true", help="exhaustive integer solve instead of the LP"
    )
    p_exact.add_argument(
        "--budget", type=int, default=10_000_000, help="enumeration budget for --integer"
    )
    _add_config_args(p_exact)

    p_sink = sub.add_parser("sinkhorn", help="fast approximate metric of a scenario file")
    p_sink.add_argument("scenario", help="scenario file path")
    p_sink.add_argument("--trace", metavar="FILE", help="write a per-sweep TSV trace")
    p_sink.add_argument(
        "--eta-sweep",
        type=float,
        nargs="+",
        metavar="ETA",
        help="run once per value and emit one TSV summary row each",
    )
    p_sink.add_argument("--out", metavar="FILE", help="TSV output path for --eta-sweep")
    p_sink.add_argument(
        "--with-exact",
        action="store_true",
        help="also solve the LP to report relative errors",
    )
    p_sink.add_argument(
        "--backend", choices=("auto", "numba", "numpy"), default=None, help="kernel backend"
    )
    _add_config_args(p_sink)

    p_gospa = sub.add_parser("gospa", help="per-frame assignment metric (no switch term)")
    p_gospa.add_argument("scenario", help="scenario file path")
    _add_config_args(p_gospa)

    p_gen = sub.add_parser("gen", help="generate a synthetic scenario file")
    p_gen.add_argument("out", help="output scenario path")
    _add_gen_args(p_gen)
    p_gen.add_argument("--seed", type=int, default=0, help="generator seed")

    p_bench = sub.add_parser("bench", help="accuracy/runtime sweep over generated scenarios")
    p_bench.add_argument("--axis", choices=("targets", "time_steps"), required=True)
    p_bench.add_argument("--sizes", type=int, nargs="+", required=True)
    p_bench.add_argument("--reps", type=int, default=25, help="scenarios per size")
    p_bench.add_argument("--out", metavar="FILE", help="summary TSV (default: stdout)")
    p_bench.add_argument("--records", metavar="FILE", help="optional per-record TSV")
    _add_config_args(p_bench)
    return parser


def _print_report(label: str, pairs: list[tuple[str, object]], stream=None) -> None:
    stream = stream or sys.stdout
    print(f"[{label}]", file=stream)
    for key, value in pairs:
        print(f"{key}\t{value}", file=stream)


def _relative_error(f_opt: float, f: float) -> tuple[float, str]:
    if f_opt > 0:
        return abs(f_opt - f) / f_opt, "relative"
    return abs(f_opt - f), "absolute"


def cmd_exact(args) -> int:
    scenario = load_scenario(args.scenario)
    cfg = _config_from(args)
    if args.integer:
        result = brute_force_tgospa(scenario, cfg, budget=args.budget)
        label = "integer"
    else:
        result = solve_relaxed_lp(scenario, cfg)
        label = "lp"
    _print_report(
        f"exact-{label}",
        [
            ("m", scenario.num_truths),
            ("n", scenario.num_estimates),
            ("T", scenario.T),
            ("objective", f"{result.objective:.12g}"),
            ("metric", f"{result.metric:.12g}"),
            ("wall_time_s", f"{result.solver_stats.get('wall_time', 0.0):.6g}"),
        ],
    )
    return EXIT_OK


def _write_tsv(path: str | None, header: list[str], rows: list[list]) -> None:
    lines = ["\t".join(header)] + ["\t".join(str(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_sinkhorn(args) -> int:
    scenario = load_scenario(args.scenario)
    f_opt = None
    if args.with_exact or args.eta_sweep:
        f_opt = solve_relaxed_lp(scenario, _config_from(args)).objective

    if args.eta_sweep:
        header = [
            "eta",
            "objective",
            "metric",
            "f_opt",
            "error",
            "error_kind",
            "iterations",
            "converged",
            "step_size",
            "wall_time_s",
        ]
        rows = []
        all_converged = True
        for eta in args.eta_sweep:
            cfg = Config(
                p=args.p,
                c=args.c,
                gamma=args.gamma,
                eta=eta,
                tol=args.tol,
                max_iter=args.max_iter,
                seed=args.seed,
            )
            report, _ = run_sinkhorn(scenario, cfg, backend=args.backend)
            err, kind = _relative_error(f_opt, report.primal_objective)
            all_converged = all_converged and report.converged
            rows.append(
                [
                    f"{eta:g}",
                    f"{report.primal_objective:.12g}",
                    f"{tgospa_metric(report.primal_objective, args.p):.12g}",
                    f"{f_opt:.12g}",
                    f"{err:.6g}",
                    kind,
                    report.iterations,
                    int(report.converged),
                    f"{report.step_size:.6g}",
                    f"{report.wall_time:.6g}",
                ]
            )
        _write_tsv(args.out, header, rows)
        return EXIT_OK if all_converged else EXIT_SOLVER

    cfg = _config_from(args)
    report, _ = run_sinkhorn(
        scenario, cfg, backend=args.backend, collect_primal_trace=bool(args.trace)
    )
    pairs = [
        ("m", scenario.num_truths),
        ("n", scenario.num_estimates),
        ("T", scenario.T),
        ("objective", f"{report.primal_objective:.12g}"),
        ("metric", f"{tgospa_metric(report.primal_objective, cfg.p):.12g}"),
        ("dual_phi_tilde", f"{report.dual_phi_tilde:.12g}"),
        ("epsilon", f"{report.epsilon:.6g}"),
        ("iterations", report.iterations),
        ("converged", report.converged),
        ("step_size", f"{report.step_size:.6g}"),
        ("marginal_residual_inf", f"{report.marginal_residual_inf:.6g}"),
        ("wall_time_s", f"{report.wall_time:.6g}"),
    ]
    if f_opt is not None:
        err, kind = _relative_error(f_opt, report.primal_objective)
        pairs += [("f_opt", f"{f_opt:.12g}"), ("error", f"{err:.6g}"), ("error_kind", kind)]
    _print_report("sinkhorn", pairs)

    if args.trace:
        header = ["iteration", "objective", "dual_phi_tilde", "step_size"]
        rows = [
            [it, f"{f:.12g}", f"{phi:.12g}", f"{step:.6g}"] for it, f, phi, step in report.trace
        ]
        if f_opt is not None:
            header.append("error")
            for row, (_, f, _, _) in zip(rows, report.trace):
                row.append(f"{_relative_error(f_opt, f)[0]:.6g}")
        _write_tsv(args.trace, header, rows)
    return EXIT_OK if report.converged else EXIT_SOLVER


def cmd_gospa(args) -> int:
    scenario = load_scenario(args.scenario)
    cfg = _config_from(args)
    frame_costs = build_frame_costs(scenario, cfg.p, cfg.c)
    header = ["t", "objective", "metric"]
    rows = []
    total = 0.0
    for t in range(scenario.T):
        objective, _ = solve_gospa_frame(frame_costs[t])
        total += objective
        rows.append([t + 1, f"{objective:.12g}", f"{tgospa_metric(objective, cfg.p):.12g}"])
    _write_tsv(None, header, rows)
    print(f"total_objective\t{total:.12g}", file=sys.stderr)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = _gen_params_from(args)
    scenario = generate_scenario(params)
    save_scenario(scenario, args.out)
    _print_report(
        "gen",
        [
            ("out", args.out),
            ("m", scenario.num_truths),
            ("n", scenario.num_estimates),
            ("T", scenario.T),
        ],
    )
    return EXIT_OK


def _write_meta(path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"platform\t{platform.platform()}\n")
        fh.write(f"python\t{platform.python_version()}\n")
        fh.write(f"machine\t{platform.machine()}\n")
        fh.write(f"backend\t{active_backend()}\n")
        fh.write(f"version\t{__version__}\n")


def cmd_bench(args) -> int:
    cfg_base = _config_from(args)
    gen_base = GenParams(seed=args.seed)
    record_header = [
        "axis",
        "size",
        "rep",
        "seed",
        "m",
        "n",
        "T",
        "solver",
        "objective",
        "metric",
        "f_opt",
        "error",
        "error_kind",
        "wall_time_s",
        "iterations",
        "converged",
    ]
    records = []
    summary_header = [
        "axis",
        "size",
        "reps_requested",
        "reps_completed",
        "error_mean",
        "error_max",
        "error_std",
        "error_kind",
        "lp_time_mean_s",
        "sinkhorn_time_mean_s",
        "sinkhorn_iterations_mean",
        "sinkhorn_converged",
    ]
    summary_rows = []
    had_failure = False

    for size in args.sizes:
        params_list = sweep_params(gen_base, args.axis, [size])
        errors = []
        kinds = set()
        lp_times = []
        sk_times = []
        sk_iters = []
        converged_count = 0
        completed = 0
        for rep in range(args.reps):
            seed = derive_seed(args.seed, size, rep)
            params = replace(params_list[0], seed=seed)
            scenario = generate_scenario(params)
            m, n, T = scenario.num_truths, scenario.num_estimates, scenario.T
            try:
                lp = solve_relaxed_lp(scenario, cfg_base)
                report, _ = run_sinkhorn(scenario, cfg_base)
            except Exception as exc:  # record and continue with other scenarios
                had_failure = True
                print(f"bench: size {size} rep {rep} failed: {exc}", file=sys.stderr)
                continue
            completed += 1
            err, kind = _relative_error(lp.objective, report.primal_objective)
            errors.append(err)
            kinds.add(kind)
            lp_times.append(lp.solver_stats["wall_time"])
            sk_times.append(report.wall_time)
            sk_iters.append(report.iterations)
            converged_count += int(report.converged)
            had_failure = had_failure or not report.converged
            records.append(
                [
                    args.axis,
                    size,
                    rep,
                    seed,
                    m,
                    n,
                    T,
                    "lp",
                    f"{lp.objective:.12g}",
                    f"{lp.metric:.12g}",
                    f"{lp.objective:.12g}",
                    "0",
                    kind,
                    f"{lp.solver_stats['wall_time']:.6g}",
                    lp.solver_stats["iterations"],
                    1,
                ]
            )
            records.append(
                [
                    args.axis,
                    size,
                    rep,
                    seed,
                    m,
                    n,
                    T,
                    "sinkhorn",
                    f"{report.primal_objective:.12g}",
                    f"{tgospa_metric(report.primal_objective, cfg_base.p):.12g}",
                    f"{lp.objective:.12g}",
                    f"{err:.6g}",
                    kind,
                    f"{report.wall_time:.6g}",
                    report.iterations,
                    int(report.converged),
                ]
            )
        if completed:
            summary_rows.append(
                [
                    args.axis,
                    size,
                    args.reps,
                    completed,
                    f"{statistics.fmean(errors):.6g}",
                    f"{max(errors):.6g}",
                    f"{statistics.pstdev(errors):.6g}",
                    "+".join(sorted(kinds)),
                    f"{statistics.fmean(lp_times):.6g}",
                    f"{statistics.fmean(sk_times):.6g}",
                    f"{statistics.fmean(sk_iters):.6g}",
                    converged_count,
                ]
            )
        else:
            summary_rows.append(
                [args.axis, size, args.reps, 0, "", "", "", "", "", "", "", 0]
            )

    _write_tsv(args.out, summary_header, summary_rows)
    if args.records:
        _write_tsv(args.records, record_header, records)
    if args.out:
        _write_meta(args.out + ".meta")
    return EXIT_SOLVER if had_failure else EXIT_OK


_COMMANDS = {
    "exact": cmd_exact,
    "sinkhorn": cmd_sinkhorn,
    "gospa": cmd_gospa,
    "gen": cmd_gen,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (ScenarioFormatError, ScenarioValidationError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (
        BudgetExceededError,
        ExactSolveError,
        PlanConstraintError,
        SinkhornInfeasibleError,
        SinkhornNumericalError,
    ) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
