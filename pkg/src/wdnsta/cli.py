"""Command-line interface: ``wdnsta {optimize,evaluate,verify,sweep,montecarlo,replay}``.

Exit status is 0 on success, 1 on usage or input errors and 2 when a
verification or replay check fails.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .benchmarks import BENCHMARKS, load_benchmark, reference_designs, verify_all
from .evaluator import PenaltySchedule, evaluate
from .montecarlo import DEFAULT_GRID, cells_to_csv, format_table, monte_carlo_study
from .network import Design, Network, NetworkError, load_network
from .sta import SearchConfig, StaResult, run_many, run_sta, summarize, trace_to_csv

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _money(x: float) -> float:
    return round(float(x), 2)


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as err:
        raise UsageError(f"bad number list {text!r}") from err


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError as err:
        raise UsageError(f"bad integer list {text!r}") from err


def resolve_network(spec: str, omega: Optional[float]) -> Network:
    """Benchmark name or path to a network file."""
    if spec in BENCHMARKS:
        net, _ = load_benchmark(spec)
    else:
        path = Path(spec)
        if not path.exists():
            raise UsageError(f"{spec!r} is neither a benchmark ({', '.join(BENCHMARKS)}) nor a file")
        net = load_network(path)
    return net.with_omega(omega) if omega is not None else net


def _schedule(args) -> PenaltySchedule:
    if args.pc_linear:
        try:
            a, b = args.pc_linear.split(":")
            return PenaltySchedule.linear(float(a), float(b), rho=args.rho,
                                          deficit_unit=args.deficit_unit)
        except ValueError as err:
            raise UsageError(f"--pc-linear expects start:end, got {args.pc_linear!r}") from err
    return PenaltySchedule.fixed(args.pc, rho=args.rho, deficit_unit=args.deficit_unit)


def _config(args, net: Network, se: Optional[int] = None) -> SearchConfig:
    return SearchConfig(se=se or args.se or net.n_decisions, p1=args.p1, p2=args.p2,
                        m_a=args.m_a, m_b=args.m_b, m_c=args.m_c, m_d=args.m_d,
                        max_iterations=args.iters, seed=args.seed)


def _jobs(args) -> int:
    return args.jobs if args.jobs else (os.cpu_count() or 1)


def run_record(r: StaResult) -> dict:
    best = r.evaluation
    return {
        "run_index": r.run_index,
        "design": [int(i) for i in r.design.indices],
        "objective": _money(best.objective),
        "penalty": _money(best.penalty),
        "total": _money(best.total),
        "feasible": bool(best.feasible),
        "evaluations": r.evaluations,
        "evaluations_to_best": r.evaluations_to_reach(best.total) if best.feasible else None,
        "wall_time": round(r.wall_time, 3),
    }


def summary_record(results: Sequence[StaResult]) -> dict:
    s = summarize(list(results))
    for key in ("mean", "std", "mean_feasible", "best_total"):
        s[key] = _money(s[key])
    s["feasible_pct"] = round(s["feasible_pct"], 2)
    return s


def format_summary(s: dict) -> str:
    return (f"{s['mean']:.2f} +- {s['std']:.2f} ({s['feasible_pct']:g}% feasible), "
            f"best {s['best_total']:.2f} {'feasible' if s['best_feasible'] else 'infeasible'} "
            f"run {s['best_run']} design {','.join(map(str, s['best_design']))}")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# -- commands ------------------------------------------------------------------

def cmd_optimize(args) -> int:
    net = resolve_network(args.network, args.omega)
    schedule, config = _schedule(args), _config(args, net)
    results = run_many(net, schedule, config, args.runs, _jobs(args))
    out = Path(args.out)
    runs = []
    for r in results:
        rec = run_record(r)
        trace = out / f"trace_run{r.run_index:03d}.csv"
        _write(trace, trace_to_csv(r.trace))
        rec["trace"] = trace.name
        runs.append(rec)
        if not args.quiet:
            print(f"run {rec['run_index']:3d}: total {rec['total']:.2f} objective {rec['objective']:.2f} "
                  f"{'feasible' if rec['feasible'] else 'infeasible'} evaluations {rec['evaluations']}")
    summary = summary_record(results)
    report = {
        "tool": "wdnsta", "version": __version__, "command": "optimize",
        "network": args.network, "omega": net.hazen_williams_omega, "alpha": net.alpha, "beta": net.beta,
        "schedule": asdict(schedule), "config": asdict(config), "n_runs": args.runs,
        "runs": runs, "summary": summary,
    }
    _write(out / "report.json", json.dumps(report, indent=2) + "\n")
    print(format_summary(summary))
    print(f"report: {out / 'report.json'}")
    return EXIT_OK


def cmd_replay(args) -> int:
    report = json.loads(Path(args.report).read_text())
    net = resolve_network(report["network"], report["omega"])
    schedule = PenaltySchedule(**report["schedule"])
    config = SearchConfig(**report["config"])
    wanted = set(args.run_index) if args.run_index else {r["run_index"] for r in report["runs"]}
    ok = True
    for rec in report["runs"]:
        if rec["run_index"] not in wanted:
            continue
        r = run_sta(net, schedule, config, run_index=rec["run_index"])
        again = run_record(r)
        same = all(again[k] == rec[k] for k in ("design", "objective", "penalty", "total",
                                                  "feasible", "evaluations"))
        ok &= same
        print(f"run {rec['run_index']:3d}: {'identical' if same else 'DIFFERS'} total {again['total']:.2f}")
    return EXIT_OK if ok else EXIT_VERIFY


def _design_from_args(args, net: Network) -> Design:
    given = [x for x in (args.design, args.diameters, args.design_file) if x]
    if len(given) != 1:
        raise UsageError("give exactly one of --design, --diameters, --design-file")
    if args.design_file:
        indices = _int_list(Path(args.design_file).read_text())
    elif args.design:
        indices = _int_list(args.design)
    else:
        factor = net.units.diameter_factor
        try:
            indices = [net.catalog.index_of(d * factor) for d in _float_list(args.diameters)]
        except KeyError as err:
            raise UsageError(f"diameter {float(err.args[0]) / factor:g} is not in the catalog") from err
    try:
        net.link_diameters(indices)
    except ValueError as err:
        raise UsageError(str(err)) from err
    return Design(indices)


def evaluation_record(net: Network, design: Design, schedule: PenaltySchedule) -> dict:
    ev = evaluate(design, net, schedule)
    unit = net.units.head_factor
    rec = {
        "network": net.name, "omega": net.hazen_williams_omega,
        "design": [int(i) for i in design.indices],
        "objective": _money(ev.objective), "penalty": _money(ev.penalty), "total": _money(ev.total),
        "feasible": bool(ev.feasible), "hydraulic_ok": bool(ev.hydraulic_ok), "message": ev.message,
        "head_unit": net.units.head, "nodes": [],
    }
    if ev.heads is not None:
        for i, n in enumerate(net.nodes):
            rec["nodes"].append({
                "id": n.id,
                "head": round(ev.heads[i] / unit, 2),
                "pressure_head": round((ev.heads[i] - n.ground_level) / unit, 2),
                "required_head": round(n.required_head / unit, 2),
                "deficit": round(ev.deficits[i] / unit, 2),
            })
    return rec


def format_evaluation(rec: dict) -> str:
    lines = [f"objective {rec['objective']:.2f}  penalty {rec['penalty']:.2f}  total {rec['total']:.2f}",
             f"feasible: {'yes' if rec['feasible'] else 'no'}"]
    if not rec["hydraulic_ok"]:
        lines.append(f"hydraulic failure: {rec['message']}")
        return "\n".join(lines) + "\n"
    u = rec["head_unit"]
    lines.append(f"{'node':>6} {'head':>10} {'pressure':>10} {'required':>10} {'deficit':>9}  ({u})")
    for n in rec["nodes"]:
        lines.append(f"{n['id']:>6} {n['head']:10.2f} {n['pressure_head']:10.2f} "
                     f"{n['required_head']:10.2f} {n['deficit']:9.2f}")
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    net = resolve_network(args.network, args.omega)
    design = _design_from_args(args, net)
    rec = evaluation_record(net, design, _schedule(args))
    if args.json:
        print(json.dumps(rec, indent=2))
    else:
        print(format_evaluation(rec), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(BENCHMARKS) if args.benchmark == "all" else [args.benchmark]
    ok = True
    for name in names:
        refs = {r.name: r for r in reference_designs(name)}
        print(f"{name}")
        print(f"  {'reference':<24} {'omega':>8} {'cost':>14} {'published':>14} {'delta':>11} "
              f"{'max|dH|':>8} {'feasible':>8}  result")
        for rep in verify_all(name):
            asserted = refs[rep.reference].asserted
            verdict = ("PASS" if rep.passed else "FAIL") if asserted else (
                "info" if rep.passed else "info (mismatch)")
            if asserted:
                ok &= rep.passed
            dh = f"{rep.max_head_delta:8.3f}" if rep.heads_checked else f"{'-':>8}"
            extra = f" off-catalog {list(rep.off_catalog)}" if rep.off_catalog else ""
            print(f"  {rep.reference:<24} {rep.omega:>8g} {rep.cost:14.2f} {rep.published_cost:14.2f} "
                  f"{rep.cost_delta:+11.2f} {dh} {str(rep.feasible):>8}  {verdict}{extra}")
        for r in refs.values():
            if not r.evaluable:
                print(f"  {r.name:<24} annotation only ({r.note}), published {r.published_cost:.2f}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_sweep(args) -> int:
    net = resolve_network(args.network, args.omega)
    se_grid = _int_list(args.se_grid)
    pc_grid = args.pc_grid.replace(",", " ").split()
    if not se_grid or not pc_grid:
        raise UsageError("grids must be non-empty")
    rows = []
    for se in se_grid:
        for pc_text in pc_grid:
            try:
                schedule = PenaltySchedule.parse(pc_text, rho=args.rho, deficit_unit=args.deficit_unit)
            except ValueError as err:
                raise UsageError(f"bad pc {pc_text!r}: {err}") from err
            config = _config(args, net, se=se)
            s = summary_record(run_many(net, schedule, config, args.runs, _jobs(args)))
            rows.append((se, schedule.label(), s))
            if not args.quiet:
                print(f"se={se} pc={schedule.label()}: {format_summary(s)}", flush=True)
    lines = ["se,pc,mean,std,feasible_pct,mean_feasible,best_total,runs"]
    for se, label, s in rows:
        lines.append(f"{se},{label},{s['mean']},{s['std']},{s['feasible_pct']},{s['mean_feasible']},"
                     f"{s['best_total']},{s['runs']}")
    out = Path(args.out)
    _write(out / "sweep.csv", "\n".join(lines) + "\n")
    labels = list(dict.fromkeys(label for _, label, _ in rows))
    print("SE \\ pc " + " ".join(f"{label:>30}" for label in labels))
    for se in se_grid:
        cells = [f"{s['mean']:.4e} +- {s['std']:.4e} ({s['feasible_pct']:g}%)"
                 for r_se, _, s in rows if r_se == se]
        print(f"{se:<7} " + " ".join(f"{c:>30}" for c in cells))
    print(f"csv: {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    cells = monte_carlo_study(_float_list(args.p1_grid), _float_list(args.p2_grid),
                              args.iters, args.runs, args.seed)
    out = Path(args.out)
    _write(out / "montecarlo.csv", cells_to_csv(cells))
    print(format_table(cells), end="")
    print(f"csv: {out / 'montecarlo.csv'}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _search_flags(p: argparse.ArgumentParser, iters: int) -> None:
    p.add_argument("--se", type=int, default=None,
                   help="candidates per operator (default: number of decision pipes)")
    p.add_argument("--iters", type=int, default=iters, help="outer iterations")
    p.add_argument("--runs", type=int, default=20, help="independent seeded runs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p1", type=float, default=0.1, help="restore probability")
    p.add_argument("--p2", type=float, default=0.1, help="risk probability")
    p.add_argument("--m-a", dest="m_a", type=int, default=2)
    p.add_argument("--m-b", dest="m_b", type=int, default=1)
    p.add_argument("--m-c", dest="m_c", type=int, default=0)
    p.add_argument("--m-d", dest="m_d", type=int, default=1)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: logical cores)")
    p.add_argument("--quiet", action="store_true")


def _network_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("network", help=f"benchmark ({', '.join(BENCHMARKS)}) or network file")
    p.add_argument("--omega", type=float, default=None, choices=(10.6744, 10.5088),
                   help="Hazen-Williams constant (default: value in the network file, 10.6744 for benchmarks)")


def _penalty_flags(p: argparse.ArgumentParser, pc: float = 2e4) -> None:
    p.add_argument("--pc", type=float, default=pc, help="fixed penalty coefficient")
    p.add_argument("--pc-linear", default=None, metavar="START:END",
                   help="penalty ramped linearly over the iteration budget")
    p.add_argument("--rho", type=float, default=1.0, help="deficit exponent")
    _deficit_flag(p)


def _deficit_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--deficit-unit", choices=("network", "m"), default="network",
                   help="charge pressure deficits in the file's head unit (default) or in metres")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wdnsta", description="Least-cost pipe sizing for water distribution networks.")
    parser.add_argument("--version", action="version", version=f"wdnsta {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="seeded search runs with JSON report and CSV traces")
    _network_flags(p)
    _penalty_flags(p)
    _search_flags(p, iters=200)
    p.add_argument("--out", default="wdnsta-out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="cost, penalty and heads of one design")
    _network_flags(p)
    _penalty_flags(p)
    p.add_argument("--design", help="comma-separated 1-based catalog indices")
    p.add_argument("--diameters", help="comma-separated diameters in the file's diameter unit")
    p.add_argument("--design-file", help="file holding catalog indices")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("verify", help="check published reference designs")
    p.add_argument("benchmark", choices=list(BENCHMARKS) + ["all"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="grid of SE x pc settings")
    _network_flags(p)
    p.add_argument("--se-grid", default="4,8,16,24,32")
    p.add_argument("--pc-grid", default="1e4,2e4,4e4,8e4,1e5,1e4:1e5",
                   help="fixed values or start:end linear ramps")
    p.add_argument("--rho", type=float, default=1.0)
    _deficit_flag(p)
    _search_flags(p, iters=200)
    p.add_argument("--out", default="wdnsta-out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("montecarlo", help="risk/restore toy study")
    grid = ",".join(f"{g:g}" for g in DEFAULT_GRID)
    p.add_argument("--p1-grid", default=grid)
    p.add_argument("--p2-grid", default=grid)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="wdnsta-out")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("replay", help="re-run the runs recorded in an optimize report")
    p.add_argument("report")
    p.add_argument("--run-index", type=int, action="append", help="only these runs (repeatable)")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, NetworkError, ValueError, KeyError, OSError) as err:
        msg = err.args[0] if isinstance(err, KeyError) and err.args else err
        print(f"wdnsta: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
