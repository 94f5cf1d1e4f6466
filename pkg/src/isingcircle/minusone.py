"""The field ``lam = -1``: odd subgraphs, perfect matchings and the gadget chain.

At ``lam = -1``

    Z_G(-1, b) = (-2)^n ((1+b)/2)^m · Σ_{S odd} ((1-b)/(1+b))^{|S|},

where ``S`` ranges over edge sets giving every vertex odd degree.  Odd sets
of a max-degree-3 graph correspond to perfect matchings of a triangle
expansion, and weights ``(p/q)^{|S|}`` become plain matching counts after
replacing each external edge by parallel bundles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import DegreeViolation, NoPerfectMatching, PreconditionViolated, TooLarge
from .exact import GaussianRational, as_fraction
from .ising import Graph, partition_bruteforce, partition_function

FRONTIER_CAP = 24
MATCHING_STATE_CAP = 2_000_000


def _edge_copies(G: Graph) -> list[tuple]:
    """Every edge copy of a multigraph as a separate ``(u, v)`` pair."""
    if G.attachments or G.fields:
        raise PreconditionViolated("expected a plain (multi)graph without fields or trees")
    out = []
    for u, v, mult in G.edges:
        out.extend([(u, v)] * mult)
    return out


# ---------------------------------------------------------------------------
# Odd subgraphs
# ---------------------------------------------------------------------------


@dataclass
class OddSubgraphSum:
    """``c_s`` = number of odd spanning subgraphs with ``s`` edges."""

    coefficients: list
    n: int
    m: int

    def __call__(self, x) -> Fraction:
        x = as_fraction(x)
        return sum((c * x ** s for s, c in enumerate(self.coefficients)), Fraction(0))

    @property
    def total(self) -> int:
        return sum(self.coefficients)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "coefficients": self.coefficients}


def odd_subgraph_polynomial(G: Graph, frontier_cap: int = FRONTIER_CAP) -> OddSubgraphSum:
    """Generating polynomial of odd spanning subgraphs by a frontier parity DP.

    Edges are processed in order; a vertex leaves the frontier after its
    last edge, at which point its parity must be odd.  The state is the
    parity vector of frontier vertices together with the edge count.
    """
    edges = _edge_copies(G)
    verts = list(G.vertices)
    n, m = len(verts), len(edges)
    if n % 2 == 1 or any(G.degree(v) == 0 for v in verts):
        return OddSubgraphSum([0] * (m + 1), n, m)
    idx = {v: i for i, v in enumerate(verts)}
    # order edges by their later endpoint so vertices retire early
    edges.sort(key=lambda e: (max(idx[e[0]], idx[e[1]]), min(idx[e[0]], idx[e[1]])))
    last = {}
    for j, (u, v) in enumerate(edges):
        last[u] = j
        last[v] = j
    slot: dict = {}
    free: list[int] = []
    next_slot = 0
    # state: parity bitmask over slots -> coefficient list
    states: dict[int, list[int]] = {0: [1]}
    for j, (u, v) in enumerate(edges):
        bits = []
        for w in (u, v):
            if w not in slot:
                if free:
                    slot[w] = free.pop()
                else:
                    slot[w] = next_slot
                    next_slot += 1
                    if next_slot > frontier_cap:
                        raise TooLarge(f"frontier exceeds {frontier_cap} vertices")
            bits.append(1 << slot[w])
        flip = bits[0] ^ bits[1]
        new: dict[int, list[int]] = {}
        for mask, poly in states.items():
            for take in (0, 1):
                nm = mask ^ flip if take else mask
                tgt = new.setdefault(nm, [])
                shifted = [0] * take + poly
                if len(tgt) < len(shifted):
                    tgt.extend([0] * (len(shifted) - len(tgt)))
                for s, c in enumerate(shifted):
                    tgt[s] += c
        # retire vertices whose last edge this was: parity must be odd
        for w in {u, v}:
            if last[w] == j:
                bit = 1 << slot[w]
                new = {mask & ~bit: poly for mask, poly in new.items() if mask & bit}
                free.append(slot.pop(w))
        states = new
    coeffs = [0] * (m + 1)
    for mask, poly in states.items():
        if mask == 0:
            for s, c in enumerate(poly):
                coeffs[s] += c
    return OddSubgraphSum(coeffs, n, m)


def partition_minusone(G: Graph, b) -> Fraction:
    """``Z_G(-1, b)`` through the odd-subgraph expansion."""
    b = as_fraction(b)
    if b == -1:
        raise PreconditionViolated("b = -1 is excluded")
    poly = odd_subgraph_polynomial(G)
    n, m = poly.n, poly.m
    return Fraction(-2) ** n * ((1 + b) / 2) ** m * poly((1 - b) / (1 + b))


# ---------------------------------------------------------------------------
# Perfect matchings
# ---------------------------------------------------------------------------


@dataclass
class MatchingCount:
    count: int
    n: int
    fingerprint: str

    def to_json(self) -> dict:
        return {"count": self.count, "n": self.n, "fingerprint": self.fingerprint}


def _fingerprint(G: Graph) -> str:
    import hashlib

    return hashlib.sha256(repr(sorted((repr(u), repr(v), k) for u, v, k in G.edges)).encode()).hexdigest()[:16]


def count_perfect_matchings(G: Graph, state_cap: int = MATCHING_STATE_CAP) -> MatchingCount:
    """Number of perfect matchings, counting parallel edges separately.

    Memoised recursion on the set of unmatched vertices, always matching
    the lowest-indexed one; vertices are indexed in BFS order so the
    unmatched sets stay close to a moving frontier.
    """
    verts = list(G.vertices)
    n = len(verts)
    fp = _fingerprint(G)
    if n % 2 == 1:
        return MatchingCount(0, n, fp)
    order = []
    seen = set()
    for start in verts:
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        while queue:
            x = queue.pop(0)
            order.append(x)
            for y in G.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    idx = {v: i for i, v in enumerate(order)}
    mult: list[dict[int, int]] = [dict() for _ in range(n)]
    for u, v, k in G.edges:
        a, c = idx[u], idx[v]
        mult[a][c] = mult[a].get(c, 0) + k
        mult[c][a] = mult[c].get(a, 0) + k
    full = (1 << n) - 1
    memo: dict[int, int] = {0: 1}

    def count(rem: int) -> int:
        if rem in memo:
            return memo[rem]
        if len(memo) > state_cap:
            raise TooLarge("perfect-matching recursion exceeded its state budget")
        low = (rem & -rem).bit_length() - 1
        rest = rem & ~(1 << low)
        total = 0
        for nb, k in mult[low].items():
            if (rest >> nb) & 1:
                total += k * count(rest & ~(1 << nb))
        memo[rem] = total
        return total

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n + 100))
    try:
        c = count(full)
    finally:
        sys.setrecursionlimit(limit)
    return MatchingCount(c, n, fp)


def has_perfect_matching(G: Graph) -> bool:
    """Polynomial-time test via maximum matching."""
    import networkx as nx

    H = nx.Graph()
    H.add_nodes_from(G.vertices)
    H.add_edges_from((u, v) for u, v, _ in G.edges)
    return 2 * len(nx.max_weight_matching(H, maxcardinality=True)) == len(G.vertices)


# ---------------------------------------------------------------------------
# Gadget chain
# ---------------------------------------------------------------------------


@dataclass
class GadgetGraph:
    """A constructed graph with its edge classification and vertex mapping."""

    graph: Graph
    external: list
    internal: list
    mapping: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


def fisher_gadget(G: Graph) -> GadgetGraph:
    """Replace each degree-3 vertex by a triangle, one original edge per corner.

    Perfect matchings of the result correspond bijectively to odd
    spanning subgraphs of ``G``; ``mapping`` sends each original edge to its
    external image.
    """
    edges = _edge_copies(G)
    if G.max_degree() > 3:
        raise DegreeViolation("fisher_gadget needs maximum degree at most 3")
    out = Graph()
    corners: dict = {}
    internal = []
    for v in G.vertices:
        if G.degree(v) == 3:
            c = [(v, 1), (v, 2), (v, 3)]
            for x in c:
                out.add_vertex(x)
            for a, b in ((0, 1), (1, 2), (0, 2)):
                out.add_edge(c[a], c[b])
                internal.append((c[a], c[b]))
            corners[v] = c
        else:
            out.add_vertex(v)
            corners[v] = [v] * max(1, G.degree(v))
    used = {v: 0 for v in G.vertices}
    external, mapping = [], {}
    for j, (u, v) in enumerate(edges):
        a = corners[u][used[u]]
        c = corners[v][used[v]]
        used[u] += 1
        used[v] += 1
        out.add_edge(a, c)
        external.append((a, c))
        mapping[(j, u, v)] = (a, c)
    out.check_max_degree(3)
    return GadgetGraph(out, external, internal, mapping)


def bundle_ratio(b) -> tuple[int, int]:
    """Coprime ``(p, q)`` with ``p/q = (1 - b)/(1 + b)``."""
    b = as_fraction(b)
    if not 0 < b < 1:
        raise PreconditionViolated("b must lie in (0, 1)")
    x = (1 - b) / (1 + b)
    return x.numerator, x.denominator


def parallel_gadget(Gp: GadgetGraph, b) -> GadgetGraph:
    """Replace every external edge ``uv`` by ``u =p= w_e =q= z_e - v``.

    Then ``|M''| = Σ_{M'} p^{|M' ∩ ext|} q^{m - |M' ∩ ext|}``.
    """
    p, q = bundle_ratio(b)
    G = Gp.graph
    out = Graph(list(G.vertices))
    for u, v in Gp.internal:
        out.add_edge(u, v)
    ext = []
    for j, (u, v) in enumerate(Gp.external):
        w, z = ("w", j), ("z", j)
        out.add_vertex(w)
        out.add_vertex(z)
        out.add_edge(u, w, p)
        out.add_edge(w, z, q)
        out.add_edge(z, v)
        ext.append((z, v))
    return GadgetGraph(out, ext, list(Gp.internal), dict(Gp.mapping), {"p": p, "q": q, "m": len(Gp.external)})


def three_subdivision(G: Graph) -> Graph:
    """Replace each edge copy by a path of length 3; the result is a simple graph."""
    out = Graph(list(G.vertices))
    j = 0
    for u, v in _edge_copies(G):
        a, c = ("s", j, 0), ("s", j, 1)
        j += 1
        out.add_vertex(a)
        out.add_vertex(c)
        out.add_edge(u, a)
        out.add_edge(a, c)
        out.add_edge(c, v)
    if any(mult > 1 for *_, mult in out.edges):
        raise DegreeViolation("subdivided graph is not simple")
    return out


def resolve_normalizer_exponent(b) -> int:
    """Sign ``s`` such that ``Z_G(-1, b) = 2^n ((1+b)/2)^m q^{s m} |M'''|``, fixed on ``K_2``.

    Both candidate exponents are tried against the brute-force value; the
    chain on ``K_2`` has one external edge, so the candidates differ by
    ``q^2`` and at most one can match.
    """
    b = as_fraction(b)
    K2 = Graph([0, 1], [(0, 1, 1)])
    target = partition_bruteforce(K2, -1, b)
    chain = matching_chain(K2, b)
    _, q = bundle_ratio(b)
    hits = []
    for s in (1, -1):
        value = Fraction(4) * ((1 + b) / 2) * Fraction(q) ** s * chain["M3"]
        if GaussianRational(value) == target:
            hits.append(s)
    if len(hits) != 1:
        raise PreconditionViolated("normalizer exponent could not be resolved")
    return hits[0]


def matching_normalizer(n: int, m: int, b) -> Fraction:
    """``2^n ((1+b)/2)^m q^{-m}``: multiply ``|M'''|`` by this to get ``Z_G(-1, b)`` for even ``n``."""
    b = as_fraction(b)
    _, q = bundle_ratio(b)
    s = resolve_normalizer_exponent(b)
    return Fraction(2) ** n * ((1 + b) / 2) ** m * Fraction(q) ** (s * m)


def matching_chain(G: Graph, b, count_m3: bool = True) -> dict:
    """Build ``G' → G'' → G'''`` and count matchings at every stage."""
    odd = odd_subgraph_polynomial(G)
    g1 = fisher_gadget(G)
    g2 = parallel_gadget(g1, b)
    g3 = three_subdivision(g2.graph)
    M1 = count_perfect_matchings(g1.graph).count
    M2 = count_perfect_matchings(g2.graph).count
    M3 = count_perfect_matchings(g3).count if count_m3 else None
    p, q = g2.params["p"], g2.params["q"]
    # weighted count of M' by external edges, from the odd-set polynomial
    m = len(g1.external)
    weighted = sum(c * p ** s * q ** (m - s) for s, c in enumerate(odd.coefficients))
    return {"odd": odd.total, "M1": M1, "M2": M2, "M3": M3, "weighted_M1": weighted,
            "p": p, "q": q, "m": m, "n": len(G.vertices),
            "sizes": [len(g1.graph.vertices), len(g2.graph.vertices), len(g3.vertices)]}


# ---------------------------------------------------------------------------
# Degree reduction
# ---------------------------------------------------------------------------


@dataclass
class DegreeReduction:
    graph: Graph
    factor: Fraction
    T_size: int
    exponent: int
    paths: dict


def degree_reduce(G: Graph, b) -> DegreeReduction:
    """Replace each vertex of degree ``t ≥ 4`` by a path of alternating parity.

    The path has ``2t-1`` vertices for odd ``t`` and ``2t-3`` for even ``t``;
    the even positions form ``T_v`` and carry the original edges.  Each
    odd-position vertex contributes one factor, so
    ``Z_{G'}(-1, b) = (1-b²)^{Σ(|T_v|-1)} Z_G(-1, b)``.
    """
    b = as_fraction(b)
    edges = _edge_copies(G)
    out = Graph()
    slots: dict = {}
    paths = {}
    T_total = 0
    exponent = 0
    for v in G.vertices:
        t = G.degree(v)
        if t <= 3:
            out.add_vertex(v)
            slots[v] = [v] * t
            continue
        L = 2 * t - 1 if t % 2 else 2 * t - 3
        path = [(v, i) for i in range(L)]
        for x in path:
            out.add_vertex(x)
        for x, y in zip(path, path[1:]):
            out.add_edge(x, y)
        T = path[::2]
        T_total += len(T)
        exponent += len(T) - 1
        # endpoints take two edges for even t (one of them only once), inner T vertices one each
        caps = [1] * len(T)
        if t % 2 == 0:
            caps[0] = 2
        slot_list = []
        for x, c in zip(T, caps):
            slot_list.extend([x] * c)
        assert len(slot_list) == t
        slots[v] = slot_list
        paths[v] = path
    used = {v: 0 for v in G.vertices}
    for u, v in edges:
        a = slots[u][used[u]]
        c = slots[v][used[v]]
        used[u] += 1
        used[v] += 1
        out.add_edge(a, c)
    out.check_max_degree(3)
    return DegreeReduction(out, (1 - b * b) ** exponent, T_total, exponent, paths)


# ---------------------------------------------------------------------------
# Matchings as an Ising instance
# ---------------------------------------------------------------------------


@dataclass
class MatchingInstance:
    """Graph ``H`` with ``Z_H(-1, b)/normalizer ≈ |M(G)|`` and the proven error bound."""

    graph: Graph
    k: int
    b_k: Fraction
    normalizer: Fraction
    bound: Fraction
    A_pp: Fraction


def path_length_for(m: int, b, eps) -> int:
    """``k = 1 + 2⌈(m² + ln(1/ε))/(-ln(1-b))⌉``."""
    b, eps = as_fraction(b), as_fraction(eps)
    return 1 + 2 * math.ceil((m * m + math.log(1 / eps)) / (-math.log(1 - b)))


def pendant_path_weights(k: int, b) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Endpoint-pinned weights of a ``k``-vertex path whose internal vertices carry one pendant each, at ``lam = -1``."""
    b = as_fraction(b)
    P = Graph(list(range(k)), [(i, i + 1, 1) for i in range(k - 1)])
    for i in range(1, k - 1):
        P.add_vertex(("z", i))
        P.add_edge(i, ("z", i))
    vals = partition_function(P, -1, b, keep=[0, k - 1])
    # endpoint activities are excluded from the edge gadget weights
    strip = {1: GaussianRational(-1), -1: GaussianRational(1)}
    out = []
    for s1, s2 in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        w = vals[(s1, s2)] / (strip[s1] * strip[s2])
        if not w.im == 0:
            raise PreconditionViolated("pendant path weights should be real")
        out.append(w.re)
    return tuple(out)


def pm_to_ising_instance(G: Graph, b, eps, k: Optional[int] = None) -> MatchingInstance:
    """Replace every edge by a pendant-decorated path of ``k`` vertices.

    ``Z_H(-1, b) = A_{++}^m Z_G(-1, b_k)`` with ``b_k = A_{+-}/A_{++}``, and
    ``|Z_H/normalizer - |M|| ≤ 2^m (1 - b_k)/(1 + b_k)``.
    """
    b, eps = as_fraction(b), as_fraction(eps)
    n = len(G.vertices)
    if n % 2 == 1 or not has_perfect_matching(G):
        raise NoPerfectMatching("input graph has no perfect matching")
    if G.max_degree() > 3:
        raise DegreeViolation("input graph must have maximum degree at most 3")
    edges = _edge_copies(G)
    m = len(edges)
    if k is None:
        k = path_length_for(m, b, eps)
    if k < 3 or k % 2 == 0:
        raise PreconditionViolated("path length must be odd and at least 3")
    App, Apm, Amp, Amm = pendant_path_weights(k, b)
    b_k = Apm / App
    if Amm != App or Amp != Apm:
        raise PreconditionViolated("pendant path is not symmetric")
    H = Graph(list(G.vertices))
    for j, (u, v) in enumerate(edges):
        chain = [u] + [("p", j, i) for i in range(1, k - 1)] + [v]
        for x in chain[1:-1]:
            H.add_vertex(x)
        for i, x in enumerate(chain[1:-1], start=1):
            z = ("z", j, i)
            H.add_vertex(z)
            H.add_edge(x, z)
        for x, y in zip(chain, chain[1:]):
            H.add_edge(x, y)
    x = (1 - b_k) / (1 + b_k)
    normalizer = App ** m * Fraction(2) ** n * ((1 + b_k) / 2) ** m * x ** (n // 2)
    bound = Fraction(2) ** m * x
    return MatchingInstance(H, k, b_k, normalizer, bound, App)
