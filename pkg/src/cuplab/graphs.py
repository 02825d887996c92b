"""Directed knowledge graphs and their connectivity mathematics.

A knowledge graph records which processes initially know which others: an
edge (i, j) means "i knows j".  Everything downstream (validators, discovery
oracles, the simulation harness) runs on the vertex-connectivity quantities
computed here: counts of internally vertex-disjoint paths, strong
connectivity of vertex sets, and the condensation into strongly connected
components.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

ProcessId = int

Edge = Tuple[ProcessId, ProcessId]


@dataclass(frozen=True)
class KnowledgeGraph:
    """Immutable directed graph of process ids, no self-loops."""

    vertices: FrozenSet[ProcessId]
    edges: FrozenSet[Edge]

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if a not in self.vertices or b not in self.vertices:
                raise ValueError(f"edge ({a}, {b}) has endpoint outside the vertex set")

    @staticmethod
    def from_adjacency(adj: Dict[ProcessId, Iterable[ProcessId]]) -> "KnowledgeGraph":
        vertices = set(adj)
        edges = set()
        for a, succs in adj.items():
            for b in succs:
                vertices.add(b)
                edges.add((a, b))
        return KnowledgeGraph(frozenset(vertices), frozenset(edges))

    def successors(self, v: ProcessId) -> FrozenSet[ProcessId]:
        return self._adjacency().get(v, frozenset())

    def _adjacency(self) -> Dict[ProcessId, FrozenSet[ProcessId]]:
        cached = self.__dict__.get("_adj")
        if cached is None:
            out: Dict[ProcessId, Set[ProcessId]] = {v: set() for v in self.vertices}
            for a, b in self.edges:
                out[a].add(b)
            cached = {v: frozenset(s) for v, s in out.items()}
            object.__setattr__(self, "_adj", cached)
        return cached

    def induced(self, keep: Iterable[ProcessId]) -> "KnowledgeGraph":
        keep_set = frozenset(keep) & self.vertices
        edges = frozenset((a, b) for a, b in self.edges if a in keep_set and b in keep_set)
        return KnowledgeGraph(keep_set, edges)

    def with_edges(self, extra: Iterable[Edge]) -> "KnowledgeGraph":
        extra_set = set(extra)
        vertices = set(self.vertices)
        for a, b in extra_set:
            vertices.add(a)
            vertices.add(b)
        return KnowledgeGraph(frozenset(vertices), self.edges | frozenset(extra_set))

    def without_edges(self, gone: Iterable[Edge]) -> "KnowledgeGraph":
        return KnowledgeGraph(self.vertices, self.edges - frozenset(gone))

    def to_adjacency_text(self) -> str:
        """One line per vertex: ``id: successor successor ...``."""
        lines = []
        adj = self._adjacency()
        for v in sorted(self.vertices):
            succs = " ".join(str(s) for s in sorted(adj[v]))
            lines.append(f"{v}: {succs}".rstrip())
        return "\n".join(lines) + "\n"


def parse_adjacency_text(text: str) -> KnowledgeGraph:
    """Parse the plain adjacency-list graph format.

    Blank lines and lines starting with ``#`` are ignored.
    """
    adj: Dict[ProcessId, List[ProcessId]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ValueError(f"line {lineno}: expected 'id: successors', got {raw!r}")
        head, _, tail = line.partition(":")
        try:
            vid = int(head.strip())
            succs = [int(tok) for tok in tail.split()]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: non-integer id in {raw!r}") from exc
        if vid in adj:
            raise ValueError(f"line {lineno}: duplicate vertex {vid}")
        adj[vid] = succs
    if not adj:
        raise ValueError("graph file defines no vertices")
    return KnowledgeGraph.from_adjacency(adj)


def complete_graph(ids: Iterable[ProcessId]) -> KnowledgeGraph:
    vs = sorted(set(ids))
    return KnowledgeGraph(
        frozenset(vs), frozenset((a, b) for a in vs for b in vs if a != b)
    )


def chain_graph(ids: Sequence[ProcessId]) -> KnowledgeGraph:
    return KnowledgeGraph(
        frozenset(ids), frozenset(zip(ids, ids[1:]))
    )


# ---------------------------------------------------------------------------
# Vertex-disjoint paths via unit-vertex-capacity maximum flow.
# ---------------------------------------------------------------------------


def _unit_flow(adj: Dict[ProcessId, FrozenSet[ProcessId]], order: Sequence[ProcessId],
               s: ProcessId, t: ProcessId, stop_at: int = 1 << 30) -> int:
    """Max number of internally vertex-disjoint s->t paths.

    Each vertex except s and t is split into an in/out pair with capacity 1;
    every edge gets capacity 1.  Augment one unit at a time (flow <= n), stop
    early once ``stop_at`` units are reached.
    """
    index = {v: i for i, v in enumerate(order)}
    n = len(order)
    # Node 2i = v_in, 2i+1 = v_out; s uses only s_out, t only t_in.
    src = 2 * index[s] + 1
    dst = 2 * index[t]
    cap: Dict[int, Dict[int, int]] = {i: {} for i in range(2 * n)}
    for v in order:
        vi = index[v]
        if v != s and v != t:
            cap[2 * vi][2 * vi + 1] = 1
        for w in adj.get(v, ()):  # noqa: B905 - dict of frozensets
            if w in index:
                cap[2 * vi + 1][2 * index[w]] = 1
    flow = 0
    while flow < stop_at:
        parent = {src: -1}
        queue = deque([src])
        while queue and dst not in parent:
            u = queue.popleft()
            for w, c in cap[u].items():
                if c > 0 and w not in parent:
                    parent[w] = u
                    queue.append(w)
        if dst not in parent:
            break
        node = dst
        while node != src:
            prev = parent[node]
            cap[prev][node] -= 1
            cap[node].setdefault(prev, 0)
            cap[node][prev] += 1
            node = prev
        flow += 1
    return flow


def disjoint_paths(g: KnowledgeGraph, s: ProcessId, t: ProcessId) -> int:
    """Maximum count of internally vertex-disjoint directed paths s -> t.

    Endpoints are excluded from the disjointness constraint; a direct edge
    counts as one path.
    """
    if s == t:
        raise ValueError("source and target must differ")
    if s not in g.vertices or t not in g.vertices:
        raise ValueError(f"{s} and {t} must both be vertices of the graph")
    memo = g.__dict__.setdefault("_dp_memo", {})
    key = (s, t)
    if key not in memo:
        memo[key] = _unit_flow(g._adjacency(), sorted(g.vertices), s, t)
    return memo[key]


def _paths_at_least(g: KnowledgeGraph, s: ProcessId, t: ProcessId, k: int) -> bool:
    if k <= 0:
        return True
    memo = g.__dict__.get("_dp_memo", {})
    if (s, t) in memo:
        return memo[(s, t)] >= k
    return _unit_flow(g._adjacency(), sorted(g.vertices), s, t, stop_at=k) >= k


def kappa(g: KnowledgeGraph, members: Iterable[ProcessId]) -> int:
    """Strong connectivity of the subgraph induced by ``members``.

    Sets with at most one vertex have connectivity 0 by convention, which
    rules out degenerate singleton sinks in every downstream check.
    """
    mset = frozenset(members)
    if not mset <= g.vertices:
        raise ValueError("members must be a subset of the graph vertices")
    if len(mset) <= 1:
        return 0
    sub = g.induced(mset)
    order = sorted(mset)
    best = len(mset) - 1
    for a in order:
        for b in order:
            if a == b:
                continue
            best = min(best, _unit_flow(sub._adjacency(), order, a, b, stop_at=best + 1))
            if best == 0:
                return 0
    return best


def kappa_at_least(g: KnowledgeGraph, members: Iterable[ProcessId], k: int) -> bool:
    """Early-exit test for kappa(g, members) >= k."""
    mset = frozenset(members)
    if k <= 0:
        return True
    if len(mset) <= 1:
        return False
    sub = g.induced(mset)
    order = sorted(mset)
    for a in order:
        for b in order:
            if a != b and _unit_flow(sub._adjacency(), order, a, b, stop_at=k) < k:
                return False
    return True


def implies_k(g: KnowledgeGraph, senders: Iterable[ProcessId],
              targets: Iterable[ProcessId], k: int) -> bool:
    """True iff every sender reaches every target via >= k disjoint paths.

    Paths range over the whole graph, not only the two sets.
    """
    a_set, b_set = frozenset(senders), frozenset(targets)
    if not a_set or not b_set:
        raise ValueError("both sets must be nonempty")
    if a_set & b_set:
        raise ValueError("sets must be disjoint")
    if not (a_set <= g.vertices and b_set <= g.vertices):
        raise ValueError("both sets must be subsets of the graph vertices")
    return all(_paths_at_least(g, a, b, k) for a in sorted(a_set) for b in sorted(b_set))


# ---------------------------------------------------------------------------
# Strongly connected components and the condensation DAG.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Condensation:
    """SCC partition of a graph plus the acyclic component-level edges."""

    components: Tuple[FrozenSet[ProcessId], ...]
    dag_edges: FrozenSet[Tuple[int, int]]
    sink_components: Tuple[int, ...]
    _member_index: Dict[ProcessId, int] = field(repr=False, hash=False, compare=False, default_factory=dict)

    def component_of(self, v: ProcessId) -> int:
        return self._member_index[v]

    def sink_members(self) -> FrozenSet[ProcessId]:
        out: Set[ProcessId] = set()
        for idx in self.sink_components:
            out |= self.components[idx]
        return frozenset(out)


def condense(g: KnowledgeGraph) -> Condensation:
    """Tarjan SCC decomposition; components are ordered by smallest member."""
    if not g.vertices:
        raise ValueError("cannot condense an empty graph")
    adj = g._adjacency()
    order = sorted(g.vertices)
    index: Dict[ProcessId, int] = {}
    lowlink: Dict[ProcessId, int] = {}
    on_stack: Set[ProcessId] = set()
    stack: List[ProcessId] = []
    counter = 0
    raw_components: List[FrozenSet[ProcessId]] = []

    for root in order:
        if root in index:
            continue
        # Iterative Tarjan: (vertex, iterator position over sorted successors).
        work: List[Tuple[ProcessId, int]] = [(root, 0)]
        while work:
            v, pos = work[-1]
            if pos == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            succs = sorted(adj[v])
            advanced = False
            while pos < len(succs):
                w = succs[pos]
                pos += 1
                if w not in index:
                    work[-1] = (v, pos)
                    work.append((w, 0))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if lowlink[v] == index[v]:
                comp: Set[ProcessId] = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                raw_components.append(frozenset(comp))
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])

    components = tuple(sorted(raw_components, key=min))
    member_index = {v: i for i, comp in enumerate(components) for v in comp}
    dag_edges = frozenset(
        (member_index[a], member_index[b])
        for a, b in g.edges
        if member_index[a] != member_index[b]
    )
    with_out = {a for a, _ in dag_edges}
    sinks = tuple(i for i in range(len(components)) if i not in with_out)
    return Condensation(components, dag_edges, sinks, member_index)


def safe_subgraph(g: KnowledgeGraph, faulty: Iterable[ProcessId]) -> KnowledgeGraph:
    """Induced subgraph after removing the faulty vertices."""
    return g.induced(g.vertices - frozenset(faulty))


def undirected_connected(g: KnowledgeGraph) -> bool:
    """Connectivity of the undirected counterpart; empty graphs are not connected."""
    if not g.vertices:
        return False
    neigh: Dict[ProcessId, Set[ProcessId]] = {v: set() for v in g.vertices}
    for a, b in g.edges:
        neigh[a].add(b)
        neigh[b].add(a)
    start = min(g.vertices)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in sorted(neigh[v]):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(g.vertices)
