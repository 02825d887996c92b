"""Random generation of feasible (and deliberately infeasible) graphs.

Construction is always followed by re-validation with the model's checker;
a bounded rejection loop restarts from a fresh draw when a constraint
breaks.  Three models:

* ``cup``      - passes the known-threshold checker.
* ``cupft``    - additionally has a unique core (unknown-threshold checker).
* ``cup-only`` - passes the known-threshold checker but carries a second
  self-sufficient cluster, so the unknown-threshold checker rejects it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Set, Tuple

from .graphs import Edge, KnowledgeGraph, ProcessId, kappa_at_least, safe_subgraph
from .validation import (
    DEFAULT_ENUMERATION_CAP,
    FailedClause,
    check_bft_cup,
    check_bft_cupft,
    enumerate_cores,
    is_extended_k_osr,
)

MODELS = ("cup", "cupft", "cup-only")


def min_vertices(model: str, f: int) -> int:
    """Smallest n a model admits: the sink needs kappa >= f+1 (so at least
    max(2f+1, 2) members) plus f Byzantine vertices, and the two-core model
    adds its f+3 twin cluster."""
    base = max(2 * f + 1, 2) + f
    if model == "cup-only":
        return base + f + 3
    return base


@dataclass(frozen=True)
class GenParams:
    n: int
    f: int
    model: str
    extra_edge_density: float = 0.75

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.f < 0 or self.n < 1:
            raise ValueError("need n >= 1 and f >= 0")
        if not 0.0 <= self.extra_edge_density <= 1.0:
            raise ValueError("extra_edge_density must lie in [0, 1]")
        if self.n < min_vertices(self.model, self.f):
            raise ValueError(
                f"model {self.model} with f={self.f} needs "
                f"n >= {min_vertices(self.model, self.f)}, got {self.n}"
            )


@dataclass(frozen=True)
class GeneratedInstance:
    graph: KnowledgeGraph
    faulty: FrozenSet[ProcessId]
    f: int
    model: str
    sink: FrozenSet[ProcessId]
    clusters: Optional[Tuple[FrozenSet[ProcessId], FrozenSet[ProcessId]]] = None
    attempts: int = 1

    def as_pair(self) -> Tuple[KnowledgeGraph, FrozenSet[ProcessId]]:
        return self.graph, self.faulty


class GenerationError(RuntimeError):
    def __init__(self, params: GenParams, seed: int, attempts: int, reason: str):
        super().__init__(
            f"generation failed for model={params.model} n={params.n} f={params.f} "
            f"seed={seed} after {attempts} attempts: {reason}"
        )
        self.params = params
        self.seed = seed
        self.attempts = attempts
        self.reason = reason


MAX_ATTEMPTS = 40


def generate(params: GenParams, seed: int) -> GeneratedInstance:
    """Draw a validated instance for the requested model."""
    last_reason = "no attempt run"
    for attempt in range(1, MAX_ATTEMPTS + 1):
        rng = random.Random((seed * 1_000_003 + attempt) & 0xFFFFFFFF)
        try:
            if params.model == "cup":
                inst = _build_cup(params, rng)
            elif params.model == "cupft":
                inst = _build_cupft(params, rng)
            else:
                inst = _build_cup_only(params, rng)
        except _Retry as exc:
            last_reason = str(exc)
            continue
        ok, reason = _validate(params, inst)
        if ok:
            return GeneratedInstance(
                inst.graph, inst.faulty, params.f, params.model,
                inst.sink, inst.clusters, attempts=attempt,
            )
        last_reason = reason
    raise GenerationError(params, seed, MAX_ATTEMPTS, last_reason)


def _validate(params: GenParams, inst: "GeneratedInstance") -> Tuple[bool, str]:
    if params.model == "cup":
        report = check_bft_cup(inst.graph, inst.faulty, params.f)
        return report.verdict, report.describe()
    if params.model == "cupft":
        report = check_bft_cupft(inst.graph, inst.faulty, params.f)
        return report.verdict, report.describe()
    cup_report = check_bft_cup(inst.graph, inst.faulty, params.f)
    if not cup_report.verdict:
        return False, "known-threshold check failed: " + cup_report.describe()
    safe = safe_subgraph(inst.graph, inst.faulty)
    ext_report, _ = is_extended_k_osr(safe, params.f + 1)
    if ext_report.verdict or ext_report.failed_clause is not FailedClause.CORE_NOT_UNIQUE:
        return False, "expected competing cores, got " + ext_report.describe()
    return True, "ok"


class _Retry(Exception):
    pass


def _spread_ids(rng: random.Random, n: int) -> List[ProcessId]:
    # Ids deliberately non-consecutive.
    return sorted(rng.sample(range(1, 3 * n + 2), n))


def _thin_complete(
    rng: random.Random,
    members: List[ProcessId],
    k_min: int,
    density: float,
    keeps: "callable",
) -> Set[Edge]:
    """Start from the complete digraph and drop optional edges.

    An edge is only dropped when ``keeps`` still accepts the thinned edge
    set; the density knob is the retention probability per candidate.
    """
    edges = {(a, b) for a in members for b in members if a != b}
    candidates = sorted(edges)
    rng.shuffle(candidates)
    for edge in candidates:
        if rng.random() < density:
            continue
        trial = edges - {edge}
        if keeps(trial):
            edges = trial
    return edges


def _sink_only_graph(members: List[ProcessId], edges: Set[Edge]) -> KnowledgeGraph:
    return KnowledgeGraph(frozenset(members), frozenset(edges))


def _build_cup(params: GenParams, rng: random.Random) -> GeneratedInstance:
    ids = _spread_ids(rng, params.n)
    rng.shuffle(ids)
    f = params.f
    sink_min = max(2 * f + 1, 2)
    spare = params.n - f - sink_min
    sink_size = sink_min + (rng.randint(0, spare) if spare > 0 else 0)
    sink = sorted(ids[:sink_size])
    byz = sorted(ids[sink_size : sink_size + f])
    extras = sorted(ids[sink_size + f :])

    k_min = f + 1
    sink_edges = _thin_complete(
        rng, sink, k_min, params.extra_edge_density,
        lambda trial: kappa_at_least(_sink_only_graph(sink, trial), sink, k_min),
    )
    edges: Set[Edge] = set(sink_edges)
    edges |= _attach_extras(rng, extras, sink, f, params.extra_edge_density)
    edges |= _attach_byzantine(rng, byz, sink)
    graph = KnowledgeGraph(frozenset(ids), frozenset(edges))
    return GeneratedInstance(graph, frozenset(byz), f, "cup", frozenset(sink))


def _attach_extras(
    rng: random.Random,
    extras: List[ProcessId],
    sink: List[ProcessId],
    f: int,
    density: float,
) -> Set[Edge]:
    """Wire correct non-sink vertices with >= f+1 direct edges into the sink."""
    edges: Set[Edge] = set()
    seen: List[ProcessId] = []
    for w in extras:
        fanout = min(len(sink), f + 1 + rng.randint(0, max(0, int(density * 2))))
        for t in rng.sample(sink, fanout):
            edges.add((w, t))
        # Occasional sideways knowledge between non-sink vertices.
        for other in seen:
            if rng.random() < 0.3:
                edges.add((w, other))
        seen.append(w)
    return edges


def _attach_byzantine(
    rng: random.Random, byz: List[ProcessId], sink: List[ProcessId]
) -> Set[Edge]:
    """Byzantine vertices are known by a few sink members and know a few."""
    edges: Set[Edge] = set()
    for b in byz:
        knowers = rng.sample(sink, rng.randint(2, len(sink)))
        for s in knowers:
            edges.add((s, b))
        for t in rng.sample(sink, rng.randint(1, min(3, len(sink)))):
            edges.add((b, t))
    return edges


def _build_cupft(params: GenParams, rng: random.Random) -> GeneratedInstance:
    base = _build_cup(params, rng)
    safe = safe_subgraph(base.graph, base.faulty)
    cores = enumerate_cores(safe, max(DEFAULT_ENUMERATION_CAP, len(safe.vertices)))
    graph = base.graph
    sink = base.sink
    guard = 0
    while len(cores) != 1 or not cores[0].members == sink:
        guard += 1
        if guard > 3 * len(sink) ** 2:
            raise _Retry("could not collapse competing cores by adding edges")
        spurious = next((c.members for c in cores if c.members != sink), None)
        if spurious is None:
            raise _Retry("core enumeration empty on a validated sink")
        # Outgoing edges from the spurious cluster raise its outward path
        # count past its internal connectivity.
        targets = sorted(sink - spurious)
        if not targets:
            raise _Retry("spurious core covers the whole sink")
        additions = {(p, rng.choice(targets)) for p in sorted(spurious)}
        additions -= graph.edges
        if not additions:
            additions = {
                (p, t) for p in sorted(spurious) for t in targets
            } - graph.edges
            if not additions:
                raise _Retry("no edges left to add against a spurious core")
        graph = graph.with_edges(additions)
        safe = safe_subgraph(graph, base.faulty)
        cores = enumerate_cores(safe, max(DEFAULT_ENUMERATION_CAP, len(safe.vertices)))
    return GeneratedInstance(graph, base.faulty, params.f, "cupft", sink)


def _build_cup_only(params: GenParams, rng: random.Random) -> GeneratedInstance:
    f = params.f
    twin_size = f + 3
    main_params = GenParams(
        params.n - twin_size, f, "cup", params.extra_edge_density
    )
    main = _build_cup(main_params, rng)
    used = set(main.graph.vertices)
    pool = [v for v in range(1, 3 * params.n + 2) if v not in used]
    twin = sorted(rng.sample(pool, twin_size))
    # The twin cluster is complete, so it stays (f+2)-strongly connected and
    # qualifies on its own at threshold f+1 through exactly f+1 bridges.
    edges = set(main.graph.edges)
    edges |= {(a, b) for a in twin for b in twin if a != b}
    bridges = rng.sample(twin, f + 1)
    sink = sorted(main.sink)
    for b in bridges:
        for t in sink:
            edges.add((b, t))
    all_ids = frozenset(used | set(twin))
    graph = KnowledgeGraph(all_ids, frozenset(edges))
    clusters = (frozenset(used), frozenset(twin))
    return GeneratedInstance(
        graph, main.faulty, f, "cup-only", main.sink, clusters
    )
