from .algorithms import ALGORITHMS, AlgorithmSpec, algorithm
from .gantt import Bar, bars_from_trace, bars_to_json, bars_to_svg, export_gantt
from .report import build_report, summarize_run
from .runner import (
    CellStats,
    METRIC_COLUMNS,
    RunSpec,
    apply_overrides,
    evaluate_grid,
    evaluate_orders,
    evaluate_policy,
    execute_runspec,
    load_policy,
    load_scenario_document,
    make_decide_factory,
    read_trace,
    replay_run,
    run_training,
    stats_table,
    write_csv,
    write_trace,
)

__all__ = [
    "ALGORITHMS",
    "AlgorithmSpec",
    "algorithm",
    "Bar",
    "bars_from_trace",
    "bars_to_json",
    "bars_to_svg",
    "export_gantt",
    "build_report",
    "summarize_run",
    "CellStats",
    "METRIC_COLUMNS",
    "RunSpec",
    "apply_overrides",
    "evaluate_grid",
    "evaluate_orders",
    "evaluate_policy",
    "execute_runspec",
    "replay_run",
    "load_policy",
    "load_scenario_document",
    "make_decide_factory",
    "read_trace",
    "run_training",
    "stats_table",
    "write_csv",
    "write_trace",
]
