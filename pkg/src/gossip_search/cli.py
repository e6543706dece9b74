"""Command-line entry point: ``gossip-search <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from dataclasses import asdict

from . import analysis
from .analytic_blind import blind_metrics
from .analytic_smart import smart_metrics
from .core_math import DEFAULT_EPSILON, SearchConfig
from .errors import ConfigError, GossipSearchError
from .exact_blind import exact_metrics
from .simulator import BLIND, SMART, BehaviorProfile, run_experiment


def _common(p: argparse.ArgumentParser, grid: bool = True):
    nargs = "+" if grid else None
    p.add_argument("--nodes", "-N", type=int, nargs=nargs, default=[50] if grid else 50)
    p.add_argument("--fanout", "-k", type=int, nargs=nargs, default=[1] if grid else 1)
    p.add_argument("--copies", "-m", type=int, nargs=nargs, default=[1] if grid else 1)
    p.add_argument("--coop", "-c", type=float, nargs=nargs, default=[1.0] if grid else 1.0)
    p.add_argument("--stifle", "-s", type=float, nargs=nargs, default=[0.0] if grid else 0.0)
    p.add_argument("--variant", choices=(BLIND, SMART), default=BLIND)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gossip-search", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("analytic-blind", "approximate blind-search model"),
        ("analytic-smart", "occupancy-based smart-search model"),
        ("exact-blind", "exact blind-search Markov chain (c = 1)"),
        ("simulate", "Monte-Carlo simulation"),
    ):
        p = sub.add_parser(name, help=help_)
        _common(p)
        if name == "simulate":
            p.add_argument("--persistent-refusal", action="store_true", help="a node that declines once never cooperates")

    p = sub.add_parser("accuracy-table", help="relative accuracy of the approximate blind model")
    _common(p)
    p.add_argument("--text", action="store_true", help="print the two-panel table instead of CSV/JSON")

    p = sub.add_parser("compare", help="relative changes between model variants")
    _common(p, grid=False)
    p.add_argument("--source", choices=("simulation", "analytic"), default="simulation")

    p = sub.add_parser("fit", help="least-squares scaling fits of the blind analytic model")
    _common(p, grid=False)
    p.add_argument("--grid", type=int, nargs="+", default=list(analysis.SCALING_GRID))

    p = sub.add_parser("bench", help="runtime of the approximate vs exact model")
    _common(p, grid=False)
    p.add_argument("--grid", type=int, nargs="+", default=[50, 100, 200])
    p.add_argument("--round", type=int, default=16, dest="round_index")
    return parser


def _configs(args):
    for n, k, m, c, s in itertools.product(args.nodes, args.fanout, args.copies, args.coop, args.stifle):
        yield SearchConfig(n, k, m, cooperation=c, stifling=s, epsilon=args.epsilon)


def _cells(args):
    cells = []
    for cfg in _configs(args):
        if args.command == "analytic-blind":
            cells.append(analysis.cell_from_metrics(blind_metrics(cfg), cfg, BLIND))
        elif args.command == "analytic-smart":
            if cfg.stifler_mode:
                raise ConfigError("the smart analytic model does not cover stiflers")
            cells.append(analysis.cell_from_metrics(smart_metrics(cfg), cfg, SMART))
        elif args.command == "exact-blind":
            cells.append(analysis.cell_from_metrics(exact_metrics(cfg), cfg, BLIND))
        else:
            profile = BehaviorProfile.from_config(cfg, args.persistent_refusal)
            rep = run_experiment(cfg, args.variant, profile, args.instances, args.runs, args.seed)
            cells.append(analysis.cell_from_metrics(analysis.report_metrics(rep), cfg, args.variant, args.seed))
    return cells


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def _emit(args, text: str, seeds=()):
    if args.out:
        analysis.write_atomic(args.out, text)
        meta = analysis.manifest(args.command, {k: v for k, v in vars(args).items() if k != "out"}, seeds)
        analysis.write_atomic(args.out + ".manifest.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def run(args) -> None:
    cmd = args.command
    if cmd in ("analytic-blind", "analytic-smart", "exact-blind", "simulate"):
        cells = _cells(args)
        text = analysis.cells_to_csv(cells) if args.format == "csv" else analysis.cells_to_json(cells)
        _emit(args, text, [args.seed] if cmd == "simulate" else [])
    elif cmd == "accuracy-table":
        km = list(itertools.product(args.fanout, args.copies)) if (args.fanout, args.copies) != ([1], [1]) else analysis.TABLE_KM
        ns = args.nodes if args.nodes != [50] else analysis.TABLE_N
        cells = analysis.accuracy_table(km, ns, args.epsilon)
        if args.text:
            _emit(args, analysis.format_accuracy_table(cells))
            return
        rows = [
            {"k": c.k, "m": c.m, "N": c.N, "metric": c.metric, "exact": c.report.exact, "approx": c.report.approx,
             "accuracy": c.report.formatted}
            for c in cells
        ]
        _emit(args, _rows_csv(rows) if args.format == "csv" else json.dumps(rows, indent=2) + "\n")
    elif cmd == "compare":
        pairs = analysis.tradeoff_comparisons(args.nodes)
        if args.source == "analytic":
            # no analytic model exists for smart search with stiflers
            skipped = [p for p in pairs if any(s.variant == SMART and s.config.stifler_mode for s in p[1:])]
            for label, *_ in skipped:
                sys.stderr.write(f"skipping {label!r}: no analytic model\n")
            pairs = [p for p in pairs if p not in skipped]
        rows = analysis.compare_models(pairs, args.source, args.instances, args.runs, args.seed)
        out = [
            {"label": r.label, "baseline_rounds": r.baseline.mean_rounds, "variant_rounds": r.variant.mean_rounds,
             "change_rounds_pct": r.change_rounds, "baseline_active": r.baseline.mean_active,
             "variant_active": r.variant.mean_active, "change_active_pct": r.change_active}
            for r in rows
        ]
        _emit(args, _rows_csv(out) if args.format == "csv" else json.dumps(out, indent=2) + "\n", [args.seed])
    elif cmd == "fit":
        ns, rounds, active = analysis.scaling_series(args.grid, args.fanout, args.copies, args.coop, args.stifle)
        result = {
            "series": [{"N": n, "mean_rounds": r, "mean_active": a} for n, r, a in zip(ns, rounds, active)],
            "active_linear": asdict(analysis.fit_scaling(ns, active, "linear")),
            "rounds_log": [asdict(f) for f in analysis.fit_log_bases(ns, rounds)],
        }
        if args.format == "csv":
            _emit(args, _rows_csv(result["series"]))
            sys.stderr.write(json.dumps({k: v for k, v in result.items() if k != "series"}, indent=2) + "\n")
        else:
            _emit(args, json.dumps(result, indent=2) + "\n")
    elif cmd == "bench":
        result = analysis.benchmark_complexity(args.grid, args.round_index, args.fanout, args.copies)
        if args.format == "csv":
            _emit(args, _rows_csv(result["rows"]))
            sys.stderr.write(f"approx exponent {result['approx_exponent']:.2f}, exact exponent {result['exact_exponent']:.2f}\n")
        else:
            _emit(args, json.dumps(result, indent=2) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run(args)
    except GossipSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
