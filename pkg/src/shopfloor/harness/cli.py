"""Command-line interface.

Subcommands: train, eval, sweep, zeroshot, graph build|inspect, gantt, report.
Failures print a machine-readable JSON error record to stderr and exit 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..allocator import AllocatorKind
from ..sim.scenario import scenario_graph
from ..spatial.nodegraph import load_node_graph, save_node_graph
from .algorithms import ALGORITHMS
from .gantt import export_gantt
from .report import build_report
from .runner import (
    apply_overrides,
    evaluate_grid,
    evaluate_orders,
    evaluate_policy,
    load_policy,
    load_scenario_document,
    make_decide_factory,
    read_trace,
    run_training,
    stats_table,
    write_csv,
)


def _parse_range(text: str) -> tuple[int, ...]:
    """'1..3' -> (1, 2, 3); '2' -> (2,); '1,3,5' -> (1, 3, 5)."""
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(p) for p in text.split(","))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", default="default", help="bundled name (default, mini) or a JSON file path")
    p.add_argument("--low", default="SAP", choices=[k.value for k in AllocatorKind], help="low-level allocator")
    p.add_argument("--out", default="runs/out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shopfloor", description="Production task planning and allocation benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a high-level agent")
    _add_common(p)
    p.add_argument("--algo", required=True, choices=sorted(k for k in ALGORITHMS if k != "Random"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=300)
    p.add_argument("--d-model", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--replay-capacity", type=int, default=None)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--eval-every", type=int, default=None)

    p = sub.add_parser("eval", help="evaluate a checkpoint (or the Random baseline) on one configuration")
    _add_common(p)
    p.add_argument("--algo", default=None, help="set to Random for the untrained baseline")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed-base", type=int, default=900_000)
    p.add_argument("--humans", type=int, default=None)
    p.add_argument("--robots", type=int, default=None)
    p.add_argument("--order", type=int, default=None)

    p = sub.add_parser("sweep", help="crew-size evaluation grid (humans x robots)")
    _add_common(p)
    p.add_argument("--algo", default=None)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--humans", default="1..3")
    p.add_argument("--robots", default="1..3")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed-base", type=int, default=910_000)

    p = sub.add_parser("zeroshot", help="order-quantity generalization sweep")
    _add_common(p)
    p.add_argument("--algo", default=None)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--orders", default="1..10")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed-base", type=int, default=920_000)

    p = sub.add_parser("graph", help="node-graph tooling")
    p.add_argument("action", choices=["build", "inspect"])
    p.add_argument("--scenario", default="default")
    p.add_argument("--file", default="node_graph.sfg")

    p = sub.add_parser("gantt", help="export a Gantt chart from an episode trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--out-svg", default="gantt.svg")
    p.add_argument("--out-json", default="gantt_bars.json")
    p.add_argument("--title", default="")

    p = sub.add_parser("report", help="compare completed run directories")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--baseline", default="D3QN")
    p.add_argument("--out", default="report")
    return parser


def _policy_args(args, scenario):
    if args.algo == "Random":
        return "Random", None, None
    if not args.checkpoint:
        raise ValueError("--checkpoint is required unless --algo Random")
    net, layout = load_policy(args.checkpoint, scenario)
    return args.algo or "checkpoint", net, layout


def _cmd_train(args) -> int:
    train_overrides = {}
    if args.batch_size is not None:
        train_overrides["batch_size"] = args.batch_size
    if args.replay_capacity is not None:
        train_overrides["replay_capacity"] = args.replay_capacity
    if args.warmup is not None:
        train_overrides["warmup_transitions"] = args.warmup
    if args.eval_every is not None:
        train_overrides["eval_every"] = args.eval_every
    net_overrides = {"d_model": args.d_model} if args.d_model is not None else {}
    run_training(
        args.scenario,
        args.algo,
        args.low,
        args.seed,
        Path(args.out),
        episodes=args.episodes,
        train_overrides=train_overrides,
        net_overrides=net_overrides,
    )
    print(f"run written to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    raw, _ = load_scenario_document(args.scenario)
    from ..sim.scenario import parse_scenario

    scenario = parse_scenario(apply_overrides(raw, humans=args.humans, robots=args.robots, order=args.order))
    algo_id, net, layout = _policy_args(args, scenario)
    stats = evaluate_policy(
        scenario,
        make_decide_factory(algo_id, net, args.seed_base),
        args.trials,
        args.seed_base,
        AllocatorKind.parse(args.low),
        layout=layout,
        label=f"H{scenario.n_humans},R{scenario.n_robots},Num{scenario.order_quantity}",
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    columns, rows = stats_table([stats])
    write_csv(out / "eval.csv", columns, rows)
    print(
        json.dumps(
            {"cell": stats.label, "makespan_mean": stats.makespan_mean, "success_rate": stats.success_rate},
            sort_keys=True,
        )
    )
    return 0


def _cmd_sweep(args) -> int:
    raw, scenario = load_scenario_document(args.scenario)
    algo_id, _, _ = _policy_args(args, scenario)
    cells = evaluate_grid(
        raw,
        algo_id,
        args.checkpoint,
        _parse_range(args.humans),
        _parse_range(args.robots),
        args.trials,
        args.seed_base,
        AllocatorKind.parse(args.low),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    columns, rows = stats_table(cells)
    write_csv(out / "sweep.csv", columns, rows)
    print((out / "sweep.csv").read_text())
    return 0


def _cmd_zeroshot(args) -> int:
    raw, scenario = load_scenario_document(args.scenario)
    algo_id, _, _ = _policy_args(args, scenario)
    cells = evaluate_orders(
        raw,
        algo_id,
        args.checkpoint,
        _parse_range(args.orders),
        args.trials,
        args.seed_base,
        AllocatorKind.parse(args.low),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    columns, rows = stats_table(cells)
    write_csv(out / "zeroshot.csv", columns, rows)
    print((out / "zeroshot.csv").read_text())
    return 0


def _cmd_graph(args) -> int:
    raw, scenario = load_scenario_document(args.scenario)
    if args.action == "build":
        graph = scenario_graph(scenario)
        Path(args.file).write_bytes(save_node_graph(graph))
        print(f"{len(graph.nodes)} nodes, {len(graph.paths)} stored paths -> {args.file}")
        return 0
    graph = load_node_graph(Path(args.file).read_bytes())
    info = {
        "nodes": graph.node_ids(),
        "pairs": len(graph.paths),
        "grid_hash": graph.grid_hash,
        "lengths": {f"{a}->{b}": round(p.length, 3) for (a, b), p in sorted(graph.paths.items())},
    }
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def _cmd_gantt(args) -> int:
    records, summary = read_trace(Path(args.trace))
    bars = export_gantt(records, summary, Path(args.out_json), Path(args.out_svg), title=args.title)
    print(f"{len(bars)} bars -> {args.out_svg}, {args.out_json}")
    return 0


def _cmd_report(args) -> int:
    md, csv_text = build_report([Path(p) for p in args.runs], baseline=args.baseline)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.md").write_text(md)
    (out / "report.csv").write_text(csv_text)
    print(md)
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "zeroshot": _cmd_zeroshot,
    "graph": _cmd_graph,
    "gantt": _cmd_gantt,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # surface a machine-readable failure record
        record = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
