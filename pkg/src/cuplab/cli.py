"""Command-line surface for batch and CI use.

Exit codes: 0 success, 1 usage or I/O error, 2 validation verdict false,
3 property failure (run, sweep, replay mismatch), 4 generation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .gen import GenParams, GenerationError, generate
from .graphs import parse_adjacency_text, safe_subgraph
from .harness import Verdict, run as run_scenario, sweep as run_sweep
from .presets import scenario_for_instance
from .scenario import (
    Scenario,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .validation import (
    SizeLimitError,
    check_bft_cup,
    check_bft_cupft,
    enumerate_cores,
    sink_of,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_PROPERTY = 3
EXIT_GENERATION = 4

TRACE_HEADER = "# cuplab-trace v1"


def _load_graph(path: str):
    return parse_adjacency_text(Path(path).read_text())


def _parse_ids(raw: Optional[str]) -> frozenset:
    if not raw:
        return frozenset()
    return frozenset(int(tok) for tok in raw.replace(",", " ").split())


def cmd_validate(args) -> int:
    graph = _load_graph(args.graph)
    faulty = _parse_ids(args.faulty)
    checker = check_bft_cup if args.model == "cup" else check_bft_cupft
    report = checker(graph, faulty, args.f)
    print(f"model={args.model} f={args.f} faulty={sorted(faulty)}")
    print(report.describe())
    safe = safe_subgraph(graph, faulty)
    if safe.vertices:
        print(f"safe-sink={sorted(sink_of(safe))}")
    return EXIT_OK if report.verdict else EXIT_VALIDATION


def cmd_cores(args) -> int:
    graph = _load_graph(args.graph)
    entries = enumerate_cores(graph, cap=args.cap)
    print(f"cores={len(entries)}")
    for entry in entries:
        members = ",".join(str(v) for v in sorted(entry.members))
        print(f"core\tmembers={members}\tyMin={entry.y_min}\tyMax={entry.y_max}")
    return EXIT_OK


def cmd_generate(args) -> int:
    params = GenParams(args.n, args.f, args.model, args.density)
    try:
        inst = generate(params, args.seed)
    except GenerationError as exc:
        print(f"generation-failure: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    graph_path = Path(args.out_graph)
    graph_path.write_text(inst.graph.to_adjacency_text())
    mode = "knownF" if args.model == "cup" else "unknownF"
    f_inner_rule = "floorThird" if mode == "unknownF" else "y"
    scenario = scenario_for_instance(
        inst, mode, args.seed, f_inner_rule=f_inner_rule
    )
    if args.out_scenario:
        data = scenario_to_dict(scenario)
        data["graph"] = {"file": graph_path.name}
        Path(args.out_scenario).write_text(
            json.dumps(data, indent=2, sort_keys=True) + "\n"
        )
    print(
        f"generated model={args.model} n={args.n} f={args.f} seed={args.seed} "
        f"faulty={sorted(inst.faulty)} sink={sorted(inst.sink)} "
        f"attempts={inst.attempts}"
    )
    return EXIT_OK


def _print_verdict(verdict: Verdict) -> None:
    for entry in verdict.acceptance_log:
        r = ",".join(map(str, entry.members_r))
        k = ",".join(map(str, entry.kstar))
        print(f"acceptance\t{entry.process}\tt={entry.time}\tr={r}\tkstar={k}\ty={entry.y}")
    for pid, pv in sorted(verdict.per_process.items()):
        disc = ",".join(map(str, pv.discovered)) if pv.discovered else "-"
        y = pv.y if pv.y is not None else "-"
        decided = json.dumps(pv.decided) if pv.decided is not None else "-"
        at = pv.decide_time if pv.decide_time is not None else "-"
        print(f"process\t{pid}\tdiscovered={disc}\ty={y}\tdecided={decided}\tat={at}")
    oracle_core = (
        ",".join(map(str, verdict.oracle_core[0])) + f";y={verdict.oracle_core[1]}"
        if verdict.oracle_core
        else "-"
    )
    print(f"oracle\tsink={','.join(map(str, verdict.oracle_sink))}\tcore={oracle_core}")
    for note in verdict.notes:
        print(f"note\t{note}")
    print(
        f"summary\tvalidity={str(verdict.validity).lower()}"
        f"\tagreement={str(verdict.agreement).lower()}"
        f"\ttermination={str(verdict.termination).lower()}"
        f"\tgst={verdict.gst}\thorizon={verdict.horizon}"
    )
    print(f"digest\t{verdict.trace_digest}")


def _write_trace(path: Path, scenario: Scenario, trace: List[str], digest: str) -> None:
    blob = json.dumps(scenario_to_dict(scenario), sort_keys=True)
    lines = [TRACE_HEADER, f"# scenario: {blob}"] + trace + [f"# digest: {digest}"]
    path.write_text("\n".join(lines) + "\n")


def cmd_run(args) -> int:
    scenario = load_scenario(Path(args.scenario))
    verdict, trace = run_scenario(scenario, collect_trace=True)
    _print_verdict(verdict)
    if args.trace:
        _write_trace(Path(args.trace), scenario, trace, verdict.trace_digest)
    if args.figures:
        from .report import render_run_figures

        for path in render_run_figures(scenario, verdict, Path(args.figures)):
            print(f"figure\t{path}")
    return EXIT_OK if verdict.all_pass else EXIT_PROPERTY


def cmd_sweep(args) -> int:
    scenario = load_scenario(Path(args.scenario))
    seeds = list(range(scenario.seed, scenario.seed + args.seeds))
    report = run_sweep(scenario, seeds, jobs=args.jobs)
    for seed in seeds:
        verdict = report.verdicts[seed]
        print(
            f"run\tseed={seed}"
            f"\tvalidity={str(verdict.validity).lower()}"
            f"\tagreement={str(verdict.agreement).lower()}"
            f"\ttermination={str(verdict.termination).lower()}"
            f"\tdigest={verdict.trace_digest[:16]}"
        )
    print(
        f"aggregate\truns={len(seeds)}"
        f"\tvalidityRate={report.validity_rate:.3f}"
        f"\tagreementRate={report.agreement_rate:.3f}"
        f"\tterminationRate={report.termination_rate:.3f}"
        f"\tpassRate={report.pass_rate:.3f}"
    )
    if report.decide_time_max is not None:
        print(
            f"timing\tp50={report.decide_time_p50:.0f}"
            f"\tp90={report.decide_time_p90:.0f}"
            f"\tmax={report.decide_time_max}"
        )
    if args.figures:
        from .report import render_sweep_figures

        for path in render_sweep_figures(scenario, report, Path(args.figures)):
            print(f"figure\t{path}")
    return EXIT_OK if report.pass_rate == 1.0 else EXIT_PROPERTY


def cmd_replay(args) -> int:
    lines = Path(args.trace).read_text().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        print("not a trace file", file=sys.stderr)
        return EXIT_USAGE
    scenario_line = next(
        (l for l in lines if l.startswith("# scenario: ")), None
    )
    digest_line = next((l for l in lines if l.startswith("# digest: ")), None)
    if scenario_line is None or digest_line is None:
        print("trace file missing scenario or digest", file=sys.stderr)
        return EXIT_USAGE
    scenario = scenario_from_dict(
        json.loads(scenario_line[len("# scenario: "):]),
        base_dir=Path(args.trace).parent,
    )
    recorded = digest_line[len("# digest: "):].strip()
    verdict = run_scenario(scenario)
    print(f"recorded\t{recorded}")
    print(f"replayed\t{verdict.trace_digest}")
    if verdict.trace_digest == recorded:
        print("replay\tmatch")
        return EXIT_OK
    print("replay\tMISMATCH")
    return EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cuplab",
        description=(
            "Simulation lab for Byzantine consensus with unknown participants: "
            "validate knowledge graphs, generate test instances, and run "
            "deterministic protocol scenarios."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a graph against a feasibility model")
    p.add_argument("graph", help="graph file (adjacency-list text)")
    p.add_argument("--faulty", default="", help="comma-separated faulty ids")
    p.add_argument("--f", type=int, required=True, help="fault threshold")
    p.add_argument("--model", choices=["cup", "cupft"], default="cup")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("cores", help="enumerate self-sufficient vertex sets")
    p.add_argument("graph")
    p.add_argument("--cap", type=int, default=16, help="vertex-count cap")
    p.set_defaults(fn=cmd_cores)

    p = sub.add_parser("generate", help="synthesize a validated instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--f", type=int, required=True)
    p.add_argument("--model", choices=["cup", "cupft", "cup-only"], default="cup")
    p.add_argument("--density", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-graph", required=True)
    p.add_argument("--out-scenario")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("run", help="execute one scenario and print the verdict")
    p.add_argument("scenario")
    p.add_argument("--trace", help="write a replayable trace file")
    p.add_argument("--figures", help="render figures into this directory")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario across consecutive seeds")
    p.add_argument("scenario")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--figures", help="render figures into this directory")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("replay", help="re-execute a trace and compare digests")
    p.add_argument("trace")
    p.set_defaults(fn=cmd_replay)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, ValueError, SizeLimitError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
