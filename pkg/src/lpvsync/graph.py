"""Directed communication topology with neighborhoods and degree bookkeeping.

Nodes are 0-based internally. Configuration files use 1-based labels; the
loader in :mod:`lpvsync.cli` converts. The reference plant is not a graph
node: it broadcasts to every agent through the measurement channel.
"""

from collections import deque
from dataclasses import dataclass, field

from .errors import NodeIndexError, SelfLoopError


@dataclass(frozen=True)
class DiGraph:
    """Immutable directed graph on nodes 0..node_count-1.

    ``in_neighbors[i]`` lists the nodes j with an edge (j, i), i.e. the
    nodes supplying information to agent i, in sorted order.
    """

    node_count: int
    edges: frozenset
    in_neighbors: tuple = field(repr=False, default=())
    in_degree: tuple = field(repr=False, default=())
    out_degree: tuple = field(repr=False, default=())

    @property
    def edge_count(self):
        return len(self.edges)


def build_graph(node_count, edges):
    """Build a :class:`DiGraph` from ordered (source, sink) pairs.

    Raises SelfLoopError for any (i, i) pair, NodeIndexError for indices
    outside range, and ValueError on duplicate edges.
    """
    if node_count < 1:
        raise ValueError(f"node_count must be positive, got {node_count}")
    seen = set()
    for (j, i) in edges:
        if not (0 <= j < node_count and 0 <= i < node_count):
            raise NodeIndexError(f"edge ({j}, {i}) outside 0..{node_count - 1}")
        if j == i:
            raise SelfLoopError(f"self-loop at node {i}")
        if (j, i) in seen:
            raise ValueError(f"duplicate edge ({j}, {i})")
        seen.add((j, i))

    nbrs = [[] for _ in range(node_count)]
    q = [0] * node_count
    for (j, i) in seen:
        nbrs[i].append(j)
        q[j] += 1
    for lst in nbrs:
        lst.sort()
    return DiGraph(
        node_count=node_count,
        edges=frozenset(seen),
        in_neighbors=tuple(tuple(lst) for lst in nbrs),
        in_degree=tuple(len(lst) for lst in nbrs),
        out_degree=tuple(q),
    )


def is_weakly_connected(g):
    """True iff the undirected version of ``g`` is a single component."""
    if g.node_count == 1:
        return True
    adj = [set() for _ in range(g.node_count)]
    for (j, i) in g.edges:
        adj[j].add(i)
        adj[i].add(j)
    seen = {0}
    frontier = deque([0])
    while frontier:
        u = frontier.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return len(seen) == g.node_count


def ring_graph(node_count):
    """Ring where agent i listens to agent i-1 (agent 0 listens to the last)."""
    if node_count == 1:
        return build_graph(1, [])
    edges = [((i - 1) % node_count, i) for i in range(node_count)]
    return build_graph(node_count, edges)
