"""Figure rendering: files appear, are non-trivial, and honor highlights."""

from cuplab.gen import GenParams, generate
from cuplab.graphs import complete_graph
from cuplab.harness import run, sweep
from cuplab.presets import scenario_for_instance, twin_core_split_scenario
from cuplab.report import (
    graph_figure,
    render_run_figures,
    render_sweep_figures,
    sweep_figure,
    timeline_figure,
)


def test_graph_figure_with_roles(tmp_path):
    g = complete_graph([1, 2, 3, 4])
    out = graph_figure(
        g, tmp_path / "g.png", sink=(1, 2, 3), core=(1, 2, 3), faulty=(4,)
    )
    assert out.exists() and out.stat().st_size > 5_000


def test_run_figures_for_split_brain(tmp_path):
    scenario = twin_core_split_scenario(seed=7)
    verdict = run(scenario)
    paths = render_run_figures(scenario, verdict, tmp_path)
    assert len(paths) == 2
    assert all(p.exists() and p.stat().st_size > 5_000 for p in paths)


def test_timeline_handles_undecided(tmp_path):
    inst = generate(GenParams(7, 1, "cupft", extra_edge_density=1.0), 1)
    scenario = scenario_for_instance(inst, "unknownF", 1)  # stalls by design
    verdict = run(scenario)
    out = timeline_figure(verdict, tmp_path / "t.png")
    assert out.exists() and out.stat().st_size > 3_000


def test_sweep_figure_without_decisions(tmp_path):
    inst = generate(GenParams(7, 1, "cupft", extra_edge_density=1.0), 1)
    base = scenario_for_instance(inst, "unknownF", 1)
    report = sweep(base, [1])
    out = sweep_figure(report, tmp_path / "s.png")
    assert out.exists()


def test_render_sweep_figures(tmp_path):
    inst = generate(GenParams(7, 1, "cup"), 3)
    base = scenario_for_instance(inst, "knownF", 3)
    report = sweep(base, [3, 4])
    paths = render_sweep_figures(base, report, tmp_path)
    assert len(paths) == 1 and paths[0].exists()
