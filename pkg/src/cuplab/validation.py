"""Feasibility validators for knowledge connectivity graphs.

``is_k_osr`` checks the one-sink-reducibility clauses in a fixed order and
reports the first failure with a witness.  ``enumerate_cores`` is the
exhaustive desk-scale oracle for self-sufficient vertex sets: every subset P
that is (y+1)-strongly connected while some member has at most y disjoint
paths to each outside vertex.  The two model checkers compose these on the
safe subgraph.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Tuple

from .graphs import (
    KnowledgeGraph,
    ProcessId,
    condense,
    disjoint_paths,
    kappa,
    kappa_at_least,
    safe_subgraph,
    undirected_connected,
)

DEFAULT_ENUMERATION_CAP = 16


class FailedClause(str, Enum):
    NOT_CONNECTED = "not-connected"
    MULTIPLE_SINKS = "multiple-sinks"
    SINK_CONNECTIVITY = "sink-connectivity"
    NONSINK_PATHS = "nonsink-paths"
    SINK_SIZE = "sink-size"
    CORE_MISSING = "core-missing"
    CORE_NOT_UNIQUE = "core-not-unique"
    CORE_SIZE = "core-size"


Witness = Optional[object]  # vertex set (frozenset) or vertex pair (tuple)


@dataclass(frozen=True)
class ValidationReport:
    verdict: bool
    failed_clause: Optional[FailedClause] = None
    witness: Witness = None

    def describe(self) -> str:
        if self.verdict:
            return "verdict=true"
        if isinstance(self.witness, frozenset):
            wit = "{" + ", ".join(str(v) for v in sorted(self.witness)) + "}"
        else:
            wit = str(self.witness)
        return f"verdict=false clause={self.failed_clause.value} witness={wit}"


@dataclass(frozen=True)
class CoreCertificate:
    core: FrozenSet[ProcessId]
    y: int


@dataclass(frozen=True)
class CoreCandidate:
    """One qualifying set with its full range of qualifying y values.

    ``y_min`` is the canonical threshold; ``y_max`` records how far the
    threshold could be raised before the connectivity condition fails, so
    that settings where several y values work stay observable.
    """

    members: FrozenSet[ProcessId]
    y_min: int
    y_max: int


class SizeLimitError(ValueError):
    """Vertex count exceeds the configured enumeration cap."""


def is_k_osr(g: KnowledgeGraph, k: int) -> ValidationReport:
    """Check the one-sink-reducibility clauses for threshold ``k``.

    Clause order: undirected connectivity, unique sink component, sink
    strong connectivity >= k, then k disjoint paths from every non-sink
    vertex to every sink vertex.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not g.vertices or not undirected_connected(g):
        witness = _disconnected_part(g)
        return ValidationReport(False, FailedClause.NOT_CONNECTED, witness)
    cond = condense(g)
    if len(cond.sink_components) != 1:
        extra = cond.components[cond.sink_components[1]]
        return ValidationReport(False, FailedClause.MULTIPLE_SINKS, extra)
    sink = cond.components[cond.sink_components[0]]
    if kappa(g.induced(sink), sink) < k:
        pair = _weakest_pair(g.induced(sink), sink, k)
        return ValidationReport(False, FailedClause.SINK_CONNECTIVITY, pair or sink)
    for v in sorted(g.vertices - sink):
        for s in sorted(sink):
            if disjoint_paths(g, v, s) < k:
                return ValidationReport(False, FailedClause.NONSINK_PATHS, (v, s))
    return ValidationReport(True)


def _disconnected_part(g: KnowledgeGraph) -> FrozenSet[ProcessId]:
    if not g.vertices:
        return frozenset()
    neigh = {v: set() for v in g.vertices}
    for a, b in g.edges:
        neigh[a].add(b)
        neigh[b].add(a)
    start = min(g.vertices)
    seen = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for w in neigh[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    rest = g.vertices - frozenset(seen)
    return rest if rest else frozenset(seen)


def _weakest_pair(sub: KnowledgeGraph, members: FrozenSet[ProcessId], k: int):
    if len(members) <= 1:
        return None
    for a in sorted(members):
        for b in sorted(members):
            if a != b and disjoint_paths(sub, a, b) < k:
                return (a, b)
    return None


def sink_of(g: KnowledgeGraph) -> FrozenSet[ProcessId]:
    """Union of all sink components (a single component on valid graphs)."""
    return condense(g).sink_members()


def enumerate_cores(
    g: KnowledgeGraph, cap: int = DEFAULT_ENUMERATION_CAP
) -> List[CoreCandidate]:
    """Exhaustively enumerate every self-sufficient vertex set.

    A subset P qualifies for threshold y when kappa(P) >= y+1 and every
    vertex outside P is reached by some member of P through at most y
    disjoint paths.  Checking single outside vertices suffices because the
    membership condition is conjunctive over the pair grid.  Results are
    sorted largest set first, then by member order.
    """
    n = len(g.vertices)
    if n > cap:
        raise SizeLimitError(f"{n} vertices exceed the enumeration cap of {cap}")
    ids = sorted(g.vertices)
    # Pairwise disjoint-path matrix over the full graph, shared by the
    # outside-vertex condition and the kappa pre-filter.
    dp = {(a, b): disjoint_paths(g, a, b) for a in ids for b in ids if a != b}
    found: List[CoreCandidate] = []
    for mask in range(1, 1 << n):
        members = [ids[i] for i in range(n) if mask >> i & 1]
        if len(members) < 2:
            continue
        outside = [v for v in ids if v not in members]
        # Least y admitted by the outside condition.
        y_min = 0
        for t in outside:
            y_min = max(y_min, min(dp[(p, t)] for p in members))
        if y_min > len(members) - 2:
            continue
        # kappa(P) can only be smaller in the induced subgraph.
        if any(
            dp[(a, b)] < y_min + 1 for a in members for b in members if a != b
        ):
            continue
        if not kappa_at_least(g, frozenset(members), y_min + 1):
            continue
        y_max = kappa(g, frozenset(members)) - 1
        found.append(CoreCandidate(frozenset(members), y_min, y_max))
    found.sort(key=lambda c: (-len(c.members), sorted(c.members)))
    return found


def is_extended_k_osr(
    g: KnowledgeGraph, k: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Tuple[ValidationReport, Optional[CoreCertificate]]:
    """k-OSR plus a unique core contained in the sink.

    Uniqueness is judged on the member set alone; the certificate carries
    the least qualifying threshold.
    """
    base = is_k_osr(g, k)
    if not base.verdict:
        return base, None
    cores = enumerate_cores(g, cap)
    sink = sink_of(g)
    if not cores:
        return ValidationReport(False, FailedClause.CORE_MISSING, sink), None
    if len(cores) > 1:
        competing = cores[0].members | cores[1].members
        return ValidationReport(False, FailedClause.CORE_NOT_UNIQUE, competing), None
    sole = cores[0]
    if not sole.members <= sink:
        return ValidationReport(False, FailedClause.CORE_MISSING, sole.members), None
    return ValidationReport(True), CoreCertificate(sole.members, sole.y_min)


def check_bft_cup(
    g: KnowledgeGraph, faulty: Iterable[ProcessId], f: int
) -> ValidationReport:
    """Feasibility with a known fault threshold.

    The safe subgraph must be (f+1)-OSR and its sink must hold at least
    2f+1 processes.
    """
    fset = frozenset(faulty)
    if len(fset) > f:
        raise ValueError(f"fault set of size {len(fset)} exceeds threshold f={f}")
    safe = safe_subgraph(g, fset)
    report = is_k_osr(safe, f + 1)
    if not report.verdict:
        return report
    sink = sink_of(safe)
    if len(sink) < 2 * f + 1:
        return ValidationReport(False, FailedClause.SINK_SIZE, sink)
    return ValidationReport(True)


def check_bft_cupft(
    g: KnowledgeGraph,
    faulty: Iterable[ProcessId],
    f: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> ValidationReport:
    """Feasibility without a known fault threshold.

    On top of the known-threshold requirements, the safe subgraph must have
    a unique core inside its sink and the core must hold at least 2f+1
    processes.
    """
    fset = frozenset(faulty)
    if len(fset) > f:
        raise ValueError(f"fault set of size {len(fset)} exceeds threshold f={f}")
    safe = safe_subgraph(g, fset)
    report, cert = is_extended_k_osr(safe, f + 1, cap)
    if not report.verdict:
        return report
    sink = sink_of(safe)
    if len(sink) < 2 * f + 1:
        return ValidationReport(False, FailedClause.SINK_SIZE, sink)
    assert cert is not None
    if len(cert.core) < 2 * f + 1:
        return ValidationReport(False, FailedClause.CORE_SIZE, cert.core)
    return ValidationReport(True)
