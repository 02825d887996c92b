"""Reference knowledge-graph topologies used by tests, docs, and demos.

All of these are small hand-built graphs whose feasibility status is known
and re-verified by the validators in the test suite.
"""

from __future__ import annotations

from typing import Tuple

from .graphs import KnowledgeGraph


def sink_with_satellite() -> Tuple[KnowledgeGraph, frozenset]:
    """Mutually-known triangle {1,2,3} plus process 4 known by all of them.

    Process 4 knows 1 and 2, so the whole graph is one strongly connected
    component.  With 4 faulty and f=1 the safe subgraph is the triangle,
    which passes the known-threshold check.  Returns (graph, faulty).
    """
    g = KnowledgeGraph.from_adjacency(
        {1: [2, 3, 4], 2: [1, 3, 4], 3: [1, 2, 4], 4: [1, 2]}
    )
    return g, frozenset({4})


def two_cluster_graph() -> Tuple[KnowledgeGraph, frozenset]:
    """Two self-contained clusters bridged only through process 4.

    {1,2,3} and {5,6,7,8} are complete among themselves and know 4; only 4
    knows members of both sides.  Removing 4 disconnects the graph, so the
    known-threshold check fails for F={4}, f=1.  Returns (graph, faulty).
    """
    adj = {
        1: [2, 3, 4],
        2: [1, 3, 4],
        3: [1, 2, 4],
        4: [1, 5],
        5: [6, 7, 8, 4],
        6: [5, 7, 8, 4],
        7: [5, 6, 8, 4],
        8: [5, 6, 7, 4],
    }
    return KnowledgeGraph.from_adjacency(adj), frozenset({4})


def twin_core_graph() -> Tuple[KnowledgeGraph, Tuple[frozenset, frozenset]]:
    """All-correct graph with one sink but two self-sufficient cores.

    Side A = {1,2,3,4} is a strongly connected cluster with no outgoing
    edges (the sink).  Side B = {5,6,7,8} is strongly connected and drains
    into A only through process 5, so B still satisfies the self-sufficiency
    conditions at threshold 1 while A satisfies them at threshold 0.  The
    graph is 1-OSR but has no unique core, which is exactly the situation
    where processes that do not know the fault threshold can split.

    Returns (graph, (side_a, side_b)).
    """
    adj = {
        1: [2, 3, 4],
        2: [1, 3, 4],
        3: [1, 2, 4],
        4: [1, 2],
        5: [6, 7, 2, 3],
        6: [5, 7, 8],
        7: [5, 6, 8],
        8: [5, 6, 7],
    }
    g = KnowledgeGraph.from_adjacency(adj)
    return g, (frozenset({1, 2, 3, 4}), frozenset({5, 6, 7, 8}))


def absorbed_core_graph() -> KnowledgeGraph:
    """Twin-core graph with one extra outgoing edge from 6 to 3.

    The extra link gives every member of side B two disjoint escape routes
    into side A, so B no longer qualifies as a core and the enumeration is
    a singleton again.
    """
    g, _ = twin_core_graph()
    return g.with_edges([(6, 3)])
