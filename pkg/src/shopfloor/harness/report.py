"""Cross-run comparison: aggregate run directories into one summary table."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class RunSummary:
    path: str
    algorithm: str
    seed: int
    scenario_hash: str
    final_makespan: float
    final_success: float
    mean_return: float
    episodes: int
    error: str | None = None


def _read_metrics(run_dir: Path) -> tuple[dict, list[dict]]:
    snapshot = json.loads((run_dir / "config.snapshot").read_text())
    lines = (run_dir / "metrics.csv").read_text().splitlines()
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    return snapshot, rows


def summarize_run(run_dir: Path, tail: int = 10) -> RunSummary:
    """Final-performance summary: mean over the last `tail` episodes, preferring
    the greedy evaluation log when present."""
    run_dir = Path(run_dir)
    try:
        snapshot, rows = _read_metrics(run_dir)
        evals_path = run_dir / "evals.csv"
        final_makespan = final_success = None
        if evals_path.exists():
            elines = evals_path.read_text().splitlines()
            erows = [dict(zip(elines[0].split(","), l.split(","))) for l in elines[1:]]
            if erows:
                last = erows[-1]
                final_makespan = float(last["eval_makespan"])
                final_success = float(last["eval_success"])
        if final_makespan is None:
            window = rows[-tail:]
            final_makespan = float(np.mean([float(r["makespan"]) for r in window]))
            final_success = float(np.mean([float(r["success"]) for r in window]))
        return RunSummary(
            path=str(run_dir),
            algorithm=snapshot["algorithm"],
            seed=snapshot["seed"],
            scenario_hash=snapshot["scenario_hash"],
            final_makespan=final_makespan,
            final_success=final_success,
            mean_return=float(np.mean([float(r["return"]) for r in rows])) if rows else float("nan"),
            episodes=len(rows),
        )
    except (OSError, KeyError, ValueError, IndexError) as exc:
        return RunSummary(
            path=str(run_dir),
            algorithm="?",
            seed=-1,
            scenario_hash="",
            final_makespan=float("nan"),
            final_success=float("nan"),
            mean_return=float("nan"),
            episodes=0,
            error=f"{type(exc).__name__}: {exc}",
        )


def build_report(run_dirs: list[Path], baseline: str = "D3QN") -> tuple[str, str]:
    """Markdown + CSV comparison across runs; improvement ratios are
    baseline_makespan / algorithm_makespan (>1 means better than baseline)."""
    if len(run_dirs) < 2:
        raise ValueError("need at least two runs to compare")
    summaries = [summarize_run(d) for d in run_dirs]
    good = [s for s in summaries if s.error is None]
    hashes = {s.scenario_hash for s in good}
    if len(hashes) > 1:
        raise ValueError(f"runs use inconsistent scenarios: {sorted(hashes)}")

    by_algo: dict[str, list[RunSummary]] = {}
    for s in good:
        by_algo.setdefault(s.algorithm, []).append(s)
    base_runs = by_algo.get(baseline)
    base_makespan = float(np.mean([s.final_makespan for s in base_runs])) if base_runs else None

    md = ["| algorithm | runs | mean makespan | success rate | improvement vs " + baseline + " |",
          "|---|---|---|---|---|"]
    csv_lines = ["algorithm,runs,mean_makespan,success_rate,improvement_vs_baseline"]
    for algo in sorted(by_algo):
        runs = by_algo[algo]
        mk = float(np.mean([s.final_makespan for s in runs]))
        sr = float(np.mean([s.final_success for s in runs]))
        imp = base_makespan / mk if base_makespan else float("nan")
        md.append(f"| {algo} | {len(runs)} | {mk:.2f} | {sr:.3f} | {imp:.3f} |")
        csv_lines.append(f"{algo},{len(runs)},{mk!r},{sr!r},{imp!r}")
    errors = [s for s in summaries if s.error is not None]
    if errors:
        md.append("")
        md.append("Runs with errors:")
        for s in errors:
            md.append(f"- `{s.path}`: {s.error}")
            csv_lines.append(f"ERROR:{s.path},,,,{s.error}")
    return "\n".join(md) + "\n", "\n".join(csv_lines) + "\n"
