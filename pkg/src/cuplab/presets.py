"""Ready-made scenarios: the scripted split-brain run and generated corpora."""

from __future__ import annotations

import random
from typing import Dict, Optional, Sequence

from .adversary import Crash, EquivocatePd, FakePd, Silent, Strategy
from .gen import GeneratedInstance
from .graphs import ProcessId
from .scenario import Scenario, default_proposals
from .topologies import twin_core_graph

PD_STRATEGY_KINDS = ("silent", "crash", "fakePd", "equivocatePd")


def twin_core_split_scenario(seed: int = 7) -> Scenario:
    """The split-brain regression: two clusters, cross traffic delayed out.

    All processes are correct and no one knows the fault threshold.  The
    cluster partition keeps side A and side B from ever hearing each other,
    so each side identifies its own core and decides alone: a deterministic
    Agreement violation on a graph that passes the known-threshold check.
    """
    graph, (side_a, side_b) = twin_core_graph()
    horizon = 4_000
    proposals = {pid: ("alpha" if pid in side_a else "bravo") for pid in graph.vertices}
    return Scenario(
        graph=graph,
        mode="unknownF",
        f=0,
        faulty={},
        proposals=proposals,
        seed=seed,
        gst=horizon + 1,
        delta=10,
        pre_rule={
            "kind": "clusterPartition",
            "groups": [sorted(side_a), sorted(side_b)],
            "slowDelay": horizon * 10,
            "fastLo": 1,
            "fastHi": 5,
        },
        horizon=horizon,
        name="twin-core-split",
    )


def sample_strategy(
    rng: random.Random,
    sink: Sequence[ProcessId],
    byz: ProcessId,
    gst: int,
    kinds: Sequence[str] = PD_STRATEGY_KINDS,
) -> Strategy:
    """Draw one knowledge-level Byzantine strategy for process ``byz``."""
    kind = rng.choice(list(kinds))
    targets = [v for v in sink if v != byz]
    if kind == "silent" or not targets:
        return Silent()
    if kind == "crash":
        return Crash(at=rng.randint(1, max(2, gst + 40)))
    if kind == "fakePd":
        claim = rng.sample(targets, rng.randint(min(2, len(targets)), len(targets)))
        return FakePd(claimed=frozenset(claim))
    per = []
    for receiver in rng.sample(targets, min(len(targets), rng.randint(1, 3))):
        claim = rng.sample(targets, rng.randint(1, len(targets)))
        per.append((receiver, frozenset(claim)))
    return EquivocatePd(per_receiver=tuple(sorted(per)), default=frozenset(targets))


def scenario_for_instance(
    inst: GeneratedInstance,
    mode: str,
    seed: int,
    strategies: Optional[Dict[ProcessId, Strategy]] = None,
    strategy_kinds: Sequence[str] = PD_STRATEGY_KINDS,
    gst: Optional[int] = 40,
    delta: int = 10,
    f_inner_rule: str = "y",
    name: str = "",
) -> Scenario:
    """Wrap a generated instance into a runnable scenario.

    Unless explicit strategies are given, each faulty process draws one at
    random (seeded) from the knowledge-level strategy set.  Corpora that
    must terminate under unknown thresholds should pass
    ``f_inner_rule="floorThird"``: an accepted threshold can overshoot the
    member count mid-discovery, while floor((|S|-1)/3) always covers the
    Byzantine members a returned set can contain.
    """
    rng = random.Random(seed * 7919 + 13)
    sink = sorted(inst.sink)
    if strategies is None:
        strategies = {
            byz: sample_strategy(rng, sink, byz, gst or 0, strategy_kinds)
            for byz in sorted(inst.faulty)
        }
    return Scenario(
        graph=inst.graph,
        mode=mode,
        f=inst.f,
        faulty=strategies,
        proposals=default_proposals(inst.graph),
        seed=seed,
        gst=gst,
        delta=delta,
        f_inner_rule=f_inner_rule,
        name=name or f"{inst.model}-n{len(inst.graph.vertices)}-f{inst.f}",
    )
