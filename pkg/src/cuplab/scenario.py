"""Scenario records: the full description of one experiment.

A scenario carries only data (graph, fault strategies, timing policy
specs, proposals, seed); callables are resolved at run time so scenarios
can be serialized, hashed, and shipped between processes.  The JSON layout
is the on-disk scenario file format.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from .adversary import (
    Composite,
    Crash,
    EquivocatePd,
    FakePd,
    FollowProtocol,
    InnerEquivocate,
    Silent,
    Strategy,
)
from .graphs import KnowledgeGraph, ProcessId, parse_adjacency_text
from .simnet import PreGstRule, cluster_partition_rule, uniform_pre_rule

DEFAULT_PRE_RULE = {"kind": "uniformRandom", "lo": 1, "hi": 30}
DEFAULT_VALID = {"kind": "acceptAll"}


@dataclass(frozen=True)
class Scenario:
    graph: KnowledgeGraph
    mode: str  # "knownF" | "unknownF"
    f: int
    faulty: Dict[ProcessId, Strategy] = field(default_factory=dict)
    proposals: Dict[ProcessId, object] = field(default_factory=dict)
    seed: int = 0
    gst: Optional[int] = None
    delta: int = 10
    pre_rule: dict = field(default_factory=lambda: dict(DEFAULT_PRE_RULE))
    valid_spec: dict = field(default_factory=lambda: dict(DEFAULT_VALID))
    horizon: Optional[int] = None
    enumeration_cap: int = 16
    f_inner_rule: str = "y"
    discovery_period: int = 20
    inner_timeout_base: int = 80
    name: str = ""

    def __post_init__(self) -> None:
        if self.mode not in ("knownF", "unknownF"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not frozenset(self.faulty) <= self.graph.vertices:
            raise ValueError("faulty processes must be graph vertices")
        if self.mode == "knownF" and len(self.faulty) > self.f:
            raise ValueError("knownF scenario has more faulty processes than f")
        missing = self.correct() - frozenset(self.proposals)
        if missing:
            raise ValueError(f"proposals missing for correct processes {sorted(missing)}")

    def correct(self) -> frozenset:
        return self.graph.vertices - frozenset(self.faulty)

    def with_seed(self, seed: int) -> "Scenario":
        return dataclasses.replace(self, seed=seed)


def default_proposals(graph: KnowledgeGraph) -> Dict[ProcessId, str]:
    return {pid: f"val-{pid}" for pid in sorted(graph.vertices)}


# -- resolved callables -------------------------------------------------------


def resolve_pre_rule(spec: dict) -> PreGstRule:
    kind = spec.get("kind")
    if kind == "uniformRandom":
        return uniform_pre_rule(int(spec.get("lo", 1)), int(spec.get("hi", 30)))
    if kind == "constant":
        delay = int(spec["delay"])
        return lambda s, r, t, rng: delay
    if kind == "clusterPartition":
        groups = tuple(frozenset(int(v) for v in grp) for grp in spec["groups"])
        return cluster_partition_rule(
            groups,
            slow_delay=int(spec["slowDelay"]),
            fast_lo=int(spec.get("fastLo", 1)),
            fast_hi=int(spec.get("fastHi", 5)),
        )
    raise ValueError(f"unknown pre-GST rule {spec!r}")


def resolve_valid(spec: dict):
    kind = spec.get("kind")
    if kind == "acceptAll":
        return lambda value: True
    if kind == "prefix":
        prefix = str(spec["prefix"])
        return lambda value: isinstance(value, str) and value.startswith(prefix)
    raise ValueError(f"unknown valid predicate {spec!r}")


# -- strategy codec -------------------------------------------------------------


def strategy_to_dict(strategy: Strategy) -> dict:
    if isinstance(strategy, Silent):
        return {"kind": "silent"}
    if isinstance(strategy, Crash):
        return {"kind": "crash", "at": strategy.at}
    if isinstance(strategy, FakePd):
        return {"kind": "fakePd", "pd": sorted(strategy.claimed)}
    if isinstance(strategy, EquivocatePd):
        return {
            "kind": "equivocatePd",
            "perReceiver": {str(r): sorted(pd) for r, pd in strategy.per_receiver},
            "default": sorted(strategy.default) if strategy.default is not None else None,
        }
    if isinstance(strategy, InnerEquivocate):
        return {"kind": "innerEquivocate"}
    if isinstance(strategy, FollowProtocol):
        return {"kind": "followProtocol"}
    if isinstance(strategy, Composite):
        return {"kind": "composite", "parts": [strategy_to_dict(p) for p in strategy.parts]}
    raise ValueError(f"unknown strategy {strategy!r}")


def strategy_from_dict(spec: dict) -> Strategy:
    kind = spec.get("kind")
    if kind == "silent":
        return Silent()
    if kind == "crash":
        return Crash(at=int(spec["at"]))
    if kind == "fakePd":
        return FakePd(claimed=frozenset(int(v) for v in spec["pd"]))
    if kind == "equivocatePd":
        per = tuple(
            sorted(
                (int(r), frozenset(int(v) for v in pd))
                for r, pd in spec.get("perReceiver", {}).items()
            )
        )
        default = spec.get("default")
        return EquivocatePd(
            per_receiver=per,
            default=frozenset(int(v) for v in default) if default is not None else None,
        )
    if kind == "innerEquivocate":
        return InnerEquivocate()
    if kind == "followProtocol":
        return FollowProtocol()
    if kind == "composite":
        return Composite(parts=tuple(strategy_from_dict(p) for p in spec["parts"]))
    raise ValueError(f"unknown strategy spec {spec!r}")


# -- scenario codec ---------------------------------------------------------------


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "name": scenario.name,
        "graph": {"inline": scenario.graph.to_adjacency_text()},
        "mode": scenario.mode,
        "f": scenario.f,
        "faulty": {
            str(pid): strategy_to_dict(strategy)
            for pid, strategy in sorted(scenario.faulty.items())
        },
        "proposals": {str(pid): v for pid, v in sorted(scenario.proposals.items())},
        "seed": scenario.seed,
        "gst": scenario.gst,
        "delta": scenario.delta,
        "preGstRule": scenario.pre_rule,
        "validSpec": scenario.valid_spec,
        "horizon": scenario.horizon,
        "enumerationCap": scenario.enumeration_cap,
        "fInnerRule": scenario.f_inner_rule,
        "discoveryPeriod": scenario.discovery_period,
        "innerTimeoutBase": scenario.inner_timeout_base,
    }


def scenario_from_dict(data: dict, base_dir: Optional[Path] = None) -> Scenario:
    graph_spec = data["graph"]
    if "inline" in graph_spec:
        graph = parse_adjacency_text(graph_spec["inline"])
    elif "file" in graph_spec:
        path = Path(graph_spec["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        graph = parse_adjacency_text(path.read_text())
    else:
        raise ValueError("graph spec needs 'inline' text or a 'file' reference")
    return Scenario(
        graph=graph,
        mode=data["mode"],
        f=int(data["f"]),
        faulty={
            int(pid): strategy_from_dict(spec)
            for pid, spec in data.get("faulty", {}).items()
        },
        proposals={int(pid): v for pid, v in data.get("proposals", {}).items()},
        seed=int(data.get("seed", 0)),
        gst=None if data.get("gst") is None else int(data["gst"]),
        delta=int(data.get("delta", 10)),
        pre_rule=data.get("preGstRule", dict(DEFAULT_PRE_RULE)),
        valid_spec=data.get("validSpec", dict(DEFAULT_VALID)),
        horizon=None if data.get("horizon") is None else int(data["horizon"]),
        enumeration_cap=int(data.get("enumerationCap", 16)),
        f_inner_rule=data.get("fInnerRule", "y"),
        discovery_period=int(data.get("discoveryPeriod", 20)),
        inner_timeout_base=int(data.get("innerTimeoutBase", 80)),
        name=data.get("name", ""),
    )


def save_scenario(scenario: Scenario, path: Path) -> None:
    path.write_text(json.dumps(scenario_to_dict(scenario), indent=2, sort_keys=True) + "\n")


def load_scenario(path: Path) -> Scenario:
    return scenario_from_dict(json.loads(path.read_text()), base_dir=path.parent)
