"""Exhaustive enumeration of small graphs up to isomorphism.

Isomorphism classes are identified by canonical certificates from nauty.
Graphs on up to seven vertices come from the networkx atlas; larger ones are
produced by vertex extension, which reaches every class because deleting any
vertex of an ``n``-vertex graph leaves an ``(n-1)``-vertex graph.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import networkx as nx
import pynauty

from .errors import PreconditionViolated
from .ising import Graph

EdgeList = tuple[tuple[int, int], ...]


def certificate(n: int, edges) -> bytes:
    """Canonical form of a simple graph on vertices ``0..n-1``."""
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for u, v in edges:
        adj[u].append(v)
    return pynauty.certificate(pynauty.Graph(n, adjacency_dict=adj))


@lru_cache(maxsize=None)
def all_graphs(n: int) -> tuple[EdgeList, ...]:
    """One edge list per isomorphism class of simple graphs on ``n`` vertices."""
    if n < 0:
        raise PreconditionViolated("n must be non-negative")
    if n <= 7:
        return tuple(tuple(sorted(g.edges())) for g in nx.graph_atlas_g() if g.number_of_nodes() == n)
    seen: dict[bytes, EdgeList] = {}
    for base in all_graphs(n - 1):
        for mask in range(1 << (n - 1)):
            edges = base + tuple((i, n - 1) for i in range(n - 1) if (mask >> i) & 1)
            key = certificate(n, edges)
            if key not in seen:
                seen[key] = edges
    return tuple(seen.values())


def _is_connected(n: int, edges) -> bool:
    if n == 0:
        return True
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n


def _max_degree(n: int, edges) -> int:
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return max(deg, default=0)


@lru_cache(maxsize=None)
def connected_bounded_degree(n: int, max_degree: int = 3) -> tuple[EdgeList, ...]:
    """Connected graphs on ``n`` vertices with maximum degree at most ``max_degree``.

    Built by attaching a new vertex to a non-empty set of unsaturated vertices
    of a smaller connected graph; every connected graph has a vertex whose
    removal keeps it connected, so no class is missed.
    """
    if n < 1:
        raise PreconditionViolated("n must be positive")
    if n == 1:
        return ((),)
    seen: dict[bytes, EdgeList] = {}
    for base in connected_bounded_degree(n - 1, max_degree):
        deg = [0] * (n - 1)
        for u, v in base:
            deg[u] += 1
            deg[v] += 1
        open_vertices = [i for i in range(n - 1) if deg[i] < max_degree]
        for r in range(1, min(max_degree, len(open_vertices)) + 1):
            for nbrs in itertools.combinations(open_vertices, r):
                edges = base + tuple((i, n - 1) for i in nbrs)
                key = certificate(n, edges)
                if key not in seen:
                    seen[key] = edges
    return tuple(seen.values())


def connected_bounded_degree_by_filter(n: int, max_degree: int = 3) -> tuple[EdgeList, ...]:
    """Same classes as :func:`connected_bounded_degree`, by filtering :func:`all_graphs`."""
    return tuple(e for e in all_graphs(n) if _is_connected(n, e) and _max_degree(n, e) <= max_degree)


def connected_graphs(n: int) -> tuple[EdgeList, ...]:
    return tuple(e for e in all_graphs(n) if _is_connected(n, e))


def as_graph(n: int, edges) -> Graph:
    return Graph(list(range(n)), [(u, v, 1) for u, v in edges])


def certificate_set(n: int, graphs) -> set[bytes]:
    return {certificate(n, e) for e in graphs}
