"""Quantities the consensus theorems predict, measured on simulated traces.

Disagreement, edge-Lyapunov values, conservation error, per-agent inter-event
statistics, and a fitted exponential decay rate are collected into a flat
RunMetrics record that serializes to a key=value block or one CSV row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import ALL_AGENTS, Trace
from .errors import DimensionMismatch, InsufficientDecay


def disagreement(x) -> float:
    """Euclidean distance from x to the agreement subspace: ||x - mean(x) 1||."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - x.mean()))


def lyapunov_edge(x, laplacian_matrix) -> float:
    """Quadratic form x^T L x (nonnegative on weight-balanced graphs)."""
    x = np.asarray(x, dtype=float)
    lap = np.asarray(laplacian_matrix, dtype=float)
    if lap.shape != (x.shape[0], x.shape[0]):
        raise DimensionMismatch(
            f"x has length {x.shape[0]} but L has shape {lap.shape}"
        )
    return float(x @ lap @ x)


def fit_decay_rate(trace: Trace) -> float:
    """Exponential decay rate of the disagreement, by least squares on the log.

    The fit window keeps samples whose disagreement lies in
    [1e-10, 0.5 * initial]: the early transient is skipped and the numerical
    noise floor excluded. Raises InsufficientDecay when fewer than 10 samples
    carry disagreement above 1e-12 or the window holds fewer than two points.
    """
    d = np.array([disagreement(row) for row in trace.states])
    if int(np.sum(d > 1e-12)) < 10:
        raise InsufficientDecay("fewer than 10 samples with disagreement above 1e-12")
    mask = (d >= 1e-10) & (d <= 0.5 * d[0])
    if int(mask.sum()) < 2:
        raise InsufficientDecay("decay window holds fewer than two samples")
    slope = np.polyfit(trace.times[mask], np.log(d[mask]), 1)[0]
    return float(-slope)


def _gaps_by_agent(events) -> dict:
    """Per-agent sorted event times -> list of consecutive gaps.

    Network-wide records (agent ALL) count as one simultaneous event per
    agent, inferred from the broadcast vector length.
    """
    times: dict[int, list[float]] = {}
    for ev in events:
        if ev.agent == ALL_AGENTS:
            for i in range(len(np.asarray(ev.value))):
                times.setdefault(i, []).append(ev.t)
        else:
            times.setdefault(ev.agent, []).append(ev.t)
    return {
        agent: [b - a for a, b in zip(ts, ts[1:])]
        for agent, ts in times.items()
    }


def inter_event_stats(events, zeno_floor: float):
    """(min_gap, mean_gap, zeno_suspect) over per-agent inter-event gaps.

    With no gaps at all (empty log or a single event per agent) both
    statistics are +inf by convention and the suspect flag stays False.
    """
    gaps = [gap for agent_gaps in _gaps_by_agent(events).values() for gap in agent_gaps]
    if not gaps:
        return math.inf, math.inf, False
    min_gap = min(gaps)
    return min_gap, sum(gaps) / len(gaps), min_gap < zeno_floor


@dataclass(frozen=True)
class RunMetrics:
    """Flat summary of one simulation run."""

    final_disagreement: float
    conservation_error: float
    events_total: int
    events_per_agent: tuple
    min_gap: float
    mean_gap: float
    decay_rate: float  # NaN when the trace decays too little to fit
    zeno_suspect: bool


def compute_run_metrics(trace: Trace, zeno_floor: float) -> RunMetrics:
    """Collect RunMetrics from a trace; decay rate is NaN when unfittable."""
    sums = trace.states.sum(axis=1)
    conservation = float(np.max(np.abs(sums - sums[0])))
    counts = np.zeros(trace.n, dtype=int)
    for ev in trace.events:
        if ev.agent == ALL_AGENTS:
            counts += 1
        else:
            counts[ev.agent] += 1
    min_gap, mean_gap, zeno = inter_event_stats(trace.events, zeno_floor)
    try:
        rate = fit_decay_rate(trace)
    except InsufficientDecay:
        rate = math.nan
    return RunMetrics(
        final_disagreement=disagreement(trace.states[-1]),
        conservation_error=conservation,
        events_total=int(counts.sum()),
        events_per_agent=tuple(int(c) for c in counts),
        min_gap=min_gap,
        mean_gap=mean_gap,
        decay_rate=rate,
        zeno_suspect=bool(zeno),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

CSV_FIELDS = (
    "final_disagreement",
    "conservation_error",
    "events_total",
    "events_per_agent",
    "min_gap",
    "mean_gap",
    "decay_rate",
    "zeno_suspect",
)


def _fmt_value(name: str, value) -> str:
    if name == "events_per_agent":
        return ";".join(str(v) for v in value)
    if name == "events_total":
        return str(int(value))
    if name == "zeno_suspect":
        return "true" if value else "false"
    return repr(float(value))


def metrics_kv_block(m: RunMetrics) -> str:
    """Flat key=value text block, one field per line."""
    return "\n".join(f"{k}={_fmt_value(k, getattr(m, k))}" for k in CSV_FIELDS) + "\n"


def metrics_csv_header(extra_fields: tuple = ()) -> str:
    return ",".join(tuple(extra_fields) + CSV_FIELDS)


def metrics_csv_row(m: RunMetrics, extra_values: tuple = ()) -> str:
    """One CSV row; ``extra_values`` (already formatted) are prepended."""
    return ",".join(
        tuple(extra_values) + tuple(_fmt_value(k, getattr(m, k)) for k in CSV_FIELDS)
    )


def parse_metrics_csv(text: str) -> tuple:
    """Read back metrics rows written by this module.

    Returns (extra_columns, [(extra_values, RunMetrics), ...]) where
    extra_columns are any sweep parameter columns preceding the standard
    fields.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("metrics CSV is empty")
    header = lines[0].split(",")
    if tuple(header[-len(CSV_FIELDS):]) != CSV_FIELDS:
        raise ValueError("metrics CSV header does not match the expected schema")
    extra = tuple(header[: len(header) - len(CSV_FIELDS)])
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        extras = tuple(parts[: len(extra)])
        vals = parts[len(extra):]
        rec = dict(zip(CSV_FIELDS, vals))
        m = RunMetrics(
            final_disagreement=float(rec["final_disagreement"]),
            conservation_error=float(rec["conservation_error"]),
            events_total=int(rec["events_total"]),
            events_per_agent=tuple(
                int(v) for v in rec["events_per_agent"].split(";") if v
            ),
            min_gap=float(rec["min_gap"]),
            mean_gap=float(rec["mean_gap"]),
            decay_rate=float(rec["decay_rate"]),
            zeno_suspect=rec["zeno_suspect"] == "true",
        )
        rows.append((extras, m))
    return extra, rows
