"""Figure rendering for run and sweep reports.

Writes PNG files next to the delimited verdict output: the knowledge graph
with roles highlighted, a per-process decision timeline, and sweep
aggregates.  Rendering is headless (Agg) and deterministic.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, List, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import FancyArrowPatch

from .graphs import KnowledgeGraph, ProcessId
from .harness import SweepReport, Verdict
from .scenario import Scenario

SINK_COLOR = "#2e7d32"
FAULTY_COLOR = "#c62828"
PLAIN_COLOR = "#546e7a"
CORE_EDGE = "#1a237e"


def _circle_layout(ids: List[ProcessId]) -> Dict[ProcessId, Tuple[float, float]]:
    pos = {}
    for i, pid in enumerate(ids):
        angle = 2 * math.pi * i / len(ids) - math.pi / 2
        pos[pid] = (math.cos(angle), math.sin(angle))
    return pos


def graph_figure(
    graph: KnowledgeGraph,
    path: Path,
    sink: Tuple[ProcessId, ...] = (),
    core: Tuple[ProcessId, ...] = (),
    faulty: Tuple[ProcessId, ...] = (),
    title: str = "knowledge connectivity",
) -> Path:
    ids = sorted(graph.vertices)
    pos = _circle_layout(ids)
    fig, ax = plt.subplots(figsize=(6, 6))
    for a, b in sorted(graph.edges):
        xa, ya = pos[a]
        xb, yb = pos[b]
        arrow = FancyArrowPatch(
            (xa, ya), (xb, yb),
            arrowstyle="-|>", mutation_scale=9,
            color="#90a4ae", lw=0.8, alpha=0.7,
            shrinkA=12, shrinkB=12,
            connectionstyle="arc3,rad=0.08",
        )
        ax.add_patch(arrow)
    for pid in ids:
        x, y = pos[pid]
        if pid in faulty:
            face = FAULTY_COLOR
        elif pid in sink:
            face = SINK_COLOR
        else:
            face = PLAIN_COLOR
        edge = CORE_EDGE if pid in core else "white"
        ax.scatter([x], [y], s=620, c=face, edgecolors=edge, linewidths=2.4, zorder=3)
        ax.text(x, y, str(pid), ha="center", va="center", color="white",
                fontsize=10, zorder=4)
    ax.set_xlim(-1.35, 1.35)
    ax.set_ylim(-1.35, 1.35)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(title)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def timeline_figure(verdict: Verdict, path: Path, title: str = "decision timeline") -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    pids = sorted(verdict.per_process)
    accept_times = {e.process: e.time for e in verdict.acceptance_log}
    for row, pid in enumerate(pids):
        pv = verdict.per_process[pid]
        if pid in accept_times:
            ax.scatter([accept_times[pid]], [row], marker="D", c="#f9a825",
                       label="identified" if row == 0 else None, zorder=3)
        if pv.decide_time is not None:
            ax.scatter([pv.decide_time], [row], marker="o", c=SINK_COLOR,
                       label="decided" if row == 0 else None, zorder=3)
    ax.axvline(verdict.gst, color="#7b1fa2", ls="--", lw=1, label="GST")
    ax.set_yticks(range(len(pids)))
    ax.set_yticklabels([str(p) for p in pids])
    ax.set_xlabel("simulated time (ticks)")
    ax.set_ylabel("process")
    ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(axis="x", alpha=0.3)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def sweep_figure(report: SweepReport, path: Path, title: str = "sweep summary") -> Path:
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.8))
    labels = ["validity", "agreement", "termination", "all"]
    rates = [
        report.validity_rate,
        report.agreement_rate,
        report.termination_rate,
        report.pass_rate,
    ]
    left.bar(labels, rates, color=[SINK_COLOR, CORE_EDGE, "#f9a825", PLAIN_COLOR])
    left.set_ylim(0, 1.05)
    left.set_ylabel("pass rate")
    left.set_title(f"{len(report.seeds)} runs")
    for i, rate in enumerate(rates):
        left.text(i, rate + 0.02, f"{rate:.0%}", ha="center", fontsize=8)
    times = [
        pv.decide_time
        for v in report.verdicts.values()
        for pv in v.per_process.values()
        if pv.decide_time is not None
    ]
    if times:
        right.hist(times, bins=min(20, max(5, len(times) // 8)), color=PLAIN_COLOR)
        right.set_xlabel("decide time (ticks)")
        right.set_ylabel("processes")
    else:
        right.text(0.5, 0.5, "no decisions", ha="center", va="center")
        right.axis("off")
    right.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def render_run_figures(
    scenario: Scenario, verdict: Verdict, outdir: Path
) -> List[Path]:
    """Render the standard figure set for one run into ``outdir``."""
    outdir.mkdir(parents=True, exist_ok=True)
    name = scenario.name or "run"
    core = verdict.oracle_core[0] if verdict.oracle_core else ()
    out = [
        graph_figure(
            scenario.graph,
            outdir / f"{name}-graph.png",
            sink=verdict.oracle_sink,
            core=core,
            faulty=tuple(sorted(scenario.faulty)),
            title=f"{name}: knowledge connectivity",
        ),
        timeline_figure(verdict, outdir / f"{name}-timeline.png",
                        title=f"{name}: decision timeline"),
    ]
    return out


def render_sweep_figures(
    scenario: Scenario, report: SweepReport, outdir: Path
) -> List[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    name = scenario.name or "sweep"
    return [sweep_figure(report, outdir / f"{name}-sweep.png", title=name)]
