"""Gantt export: per-entity task bars from an episode trace, as JSON + SVG."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

_PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)


@dataclass(frozen=True)
class Bar:
    entity: str
    task: str
    start_tick: int
    end_tick: int


class TraceError(ValueError):
    pass


def bars_from_trace(records: list[dict]) -> list[Bar]:
    """Collapse per-tick entity/task assignments into maximal bars.

    Record at tick t describes work during (t-1, t], so a run of records over
    ticks [a, b] becomes a bar [a-1, b]. Bars within a row touch at endpoints
    but never overlap.
    """
    if not records:
        return []
    by_entity: dict[str, list[tuple[int, str | None]]] = {}
    for rec in records:
        if "entities" not in rec or "tick" not in rec:
            raise TraceError("trace record missing 'tick' or 'entities'")
        for ent in rec["entities"]:
            by_entity.setdefault(ent["id"], []).append((rec["tick"], ent["task"]))
    bars: list[Bar] = []
    for entity, timeline in by_entity.items():
        timeline.sort()
        run_task: str | None = None
        run_start = 0
        prev_tick = None
        for tick, task in timeline:
            if task != run_task or (prev_tick is not None and tick != prev_tick + 1):
                if run_task is not None:
                    bars.append(Bar(entity, run_task, run_start - 1, prev_tick))
                run_task = task
                run_start = tick
            prev_tick = tick
        if run_task is not None:
            bars.append(Bar(entity, run_task, run_start - 1, prev_tick))
    bars.sort(key=lambda b: (b.entity, b.start_tick))
    return bars


def bars_to_json(bars: list[Bar]) -> str:
    payload = [
        {"entity": b.entity, "task": b.task, "start_tick": b.start_tick, "end_tick": b.end_tick} for b in bars
    ]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def bars_to_svg(bars: list[Bar], entities: list[str], horizon: int, title: str = "") -> str:
    """Self-contained SVG: one row per entity, colored bars per task, idle gaps
    left blank, with a tick axis."""
    row_h, label_w, pad, px_per_tick = 28, 90, 18, max(1.0, 720.0 / max(horizon, 1))
    width = label_w + int(horizon * px_per_tick) + 2 * pad
    height = pad * 2 + row_h * (len(entities) + 1) + 20
    tasks = sorted({b.task for b in bars})
    color = {t: _PALETTE[i % len(_PALETTE)] for i, t in enumerate(tasks)}
    rows = {e: i for i, e in enumerate(entities)}

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{pad}" y="{pad - 4}" font-size="13">{title}</text>' if title else "",
    ]
    for e, i in rows.items():
        y = pad + i * row_h
        parts.append(f'<text x="{pad}" y="{y + row_h * 0.65}">{e}</text>')
        parts.append(
            f'<line x1="{label_w}" y1="{y + row_h - 4}" x2="{width - pad}" y2="{y + row_h - 4}" '
            f'stroke="#ddd" stroke-width="1"/>'
        )
    for b in bars:
        if b.entity not in rows:
            continue
        y = pad + rows[b.entity] * row_h
        x = label_w + b.start_tick * px_per_tick
        w = max((b.end_tick - b.start_tick) * px_per_tick, 1.0)
        parts.append(
            f'<rect x="{x:.2f}" y="{y + 3}" width="{w:.2f}" height="{row_h - 10}" fill="{color[b.task]}">'
            f"<title>{b.entity}: {b.task} [{b.start_tick}, {b.end_tick}]</title></rect>"
        )
    axis_y = pad + len(entities) * row_h + 12
    parts.append(
        f'<line x1="{label_w}" y1="{axis_y}" x2="{width - pad}" y2="{axis_y}" stroke="#333" stroke-width="1"/>'
    )
    step = max(1, horizon // 10)
    for t in range(0, horizon + 1, step):
        x = label_w + t * px_per_tick
        parts.append(f'<line x1="{x:.2f}" y1="{axis_y}" x2="{x:.2f}" y2="{axis_y + 4}" stroke="#333"/>')
        parts.append(f'<text x="{x:.2f}" y="{axis_y + 16}" text-anchor="middle">{t}</text>')
    legend_x = label_w
    for i, t in enumerate(tasks):
        parts.append(
            f'<rect x="{legend_x + i * 110}" y="{height - 14}" width="10" height="10" fill="{color[t]}"/>'
            f'<text x="{legend_x + i * 110 + 14}" y="{height - 5}">{t}</text>'
        )
    parts.append("</svg>")
    return "\n".join(p for p in parts if p) + "\n"


def export_gantt(trace_records: list[dict], summary: dict, out_json: Path, out_svg: Path, title: str = "") -> list[Bar]:
    if not trace_records and not summary:
        raise TraceError("empty trace")
    bars = bars_from_trace(trace_records)
    entities = sorted({e["id"] for rec in trace_records for e in rec["entities"]}) if trace_records else []
    horizon = summary.get("makespan", trace_records[-1]["tick"] if trace_records else 0)
    Path(out_json).write_text(bars_to_json(bars))
    Path(out_svg).write_text(bars_to_svg(bars, entities, horizon, title=title))
    return bars
