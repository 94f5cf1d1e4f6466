"""Graphs, rooted trees and exact Ising partition functions.

The partition function of a graph with vertex activities and ferromagnetic
edge interaction ``b`` is

    Z = sum over spins of  prod_{v: +} w_plus(v) * prod_{v: -} w_minus(v) * b^(#disagreeing edges),

with ``w_plus = lam`` and ``w_minus = 1`` for an ordinary vertex.  Field
overrides replace ``lam`` at single vertices and rooted trees can be hung on a
vertex (the tree root is identified with it), both of which only change that
vertex's weight pair.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence

import mpmath
import numpy as np
from mpmath import mp

from .errors import DegreeViolation, PreconditionViolated, TooLarge, ZeroDenominator
from .exact import (
    DEFAULT_PREC,
    GaussianRational,
    UnitPoint,
    as_fraction,
    format_gaussian,
    parse_gaussian,
)

BRUTE_FORCE_CAP = 24
_CHUNK_BITS = 20

PLUS, MINUS = 1, -1


# ---------------------------------------------------------------------------
# Rooted trees (shared-subtree DAG representation)
# ---------------------------------------------------------------------------


class TreeNode:
    """Node of a rooted tree; children are ``(node, copies)`` pairs.

    Identical subtrees may be shared, so a tree with ``d^N`` leaves can be
    stored in ``O(N)`` nodes.  ``field`` overrides the global activity at this
    node when set.
    """

    __slots__ = ("children", "field", "__weakref__")

    def __init__(self, children: Sequence[tuple["TreeNode", int]] = (), field: Optional[GaussianRational] = None):
        merged: dict[int, list] = {}
        for child, copies in children:
            if copies < 0:
                raise PreconditionViolated("negative copy count")
            if copies == 0:
                continue
            if id(child) in merged:
                merged[id(child)][1] += copies
            else:
                merged[id(child)] = [child, copies]
        self.children = tuple((c, n) for c, n in merged.values())
        self.field = None if field is None else GaussianRational.coerce(field)

    @property
    def child_count(self) -> int:
        return sum(n for _, n in self.children)


def _postorder(root: TreeNode) -> list[TreeNode]:
    """Distinct nodes, children before parents."""
    seen: set[int] = set()
    order: list[TreeNode] = []
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child, _ in node.children:
            if id(child) not in seen:
                stack.append((child, False))
    return order


class RootedTree:
    """A rooted tree gadget with cached partition pairs.

    Parameters
    ----------
    root : TreeNode
        Root node; the tree is the full expansion of the shared DAG.
    """

    def __init__(self, root: TreeNode):
        self.root = root
        self._cache: dict = {}
        self._size: Optional[int] = None
        self._maxdeg: Optional[int] = None

    # construction helpers -------------------------------------------------
    @classmethod
    def single(cls, field: Optional[GaussianRational] = None) -> "RootedTree":
        return cls(TreeNode((), field))

    @classmethod
    def path(cls, n: int) -> "RootedTree":
        """Path on ``n`` vertices rooted at an end."""
        node = TreeNode()
        for _ in range(n - 1):
            node = TreeNode(((node, 1),))
        return cls(node)

    @classmethod
    def star(cls, leaves: int) -> "RootedTree":
        return cls(TreeNode(((TreeNode(), leaves),)))

    @classmethod
    def from_parent_array(cls, parents: Sequence[int], root: int = 0) -> "RootedTree":
        """Tree from ``parents[v]`` (``-1`` or ``v`` itself at the root)."""
        n = len(parents)
        kids: list[list[int]] = [[] for _ in range(n)]
        for v, p in enumerate(parents):
            if v != root:
                kids[p].append(v)
        nodes: dict[int, TreeNode] = {}
        order = []
        stack = [root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(kids[v])
        for v in reversed(order):
            nodes[v] = TreeNode(tuple((nodes[c], 1) for c in kids[v]))
        return cls(nodes[root])

    # structure --------------------------------------------------------------
    @property
    def size(self) -> int:
        if self._size is None:
            sizes: dict[int, int] = {}
            for node in _postorder(self.root):
                sizes[id(node)] = 1 + sum(n * sizes[id(c)] for c, n in node.children)
            self._size = sizes[id(self.root)]
        return self._size

    @property
    def root_degree(self) -> int:
        return self.root.child_count

    @property
    def max_degree(self) -> int:
        if self._maxdeg is None:
            best = self.root.child_count
            for node in _postorder(self.root):
                if node is not self.root:
                    best = max(best, node.child_count + 1)
            self._maxdeg = best
        return self._maxdeg

    def check_degree(self, max_degree: int, root_degree: Optional[int] = None) -> None:
        if self.max_degree > max_degree:
            raise DegreeViolation(f"tree has maximum degree {self.max_degree} > {max_degree}")
        if root_degree is not None and self.root_degree > root_degree:
            raise DegreeViolation(f"root degree {self.root_degree} > {root_degree}")

    def distinct_nodes(self) -> int:
        return len(_postorder(self.root))

    # expansion --------------------------------------------------------------
    def to_graph(self, cap: int = 100_000) -> tuple["Graph", int]:
        """Expanded simple graph and the index of the root vertex."""
        if self.size > cap:
            raise TooLarge(f"tree has {self.size} vertices (cap {cap})")
        g = Graph()
        counter = itertools.count()

        def build(node: TreeNode) -> int:
            v = next(counter)
            g.add_vertex(v)
            if node.field is not None:
                g.fields[v] = node.field
            stack = [(node, v)]
            while stack:
                cur, cv = stack.pop()
                for child, copies in cur.children:
                    for _ in range(copies):
                        w = next(counter)
                        g.add_vertex(w)
                        if child.field is not None:
                            g.fields[w] = child.field
                        g.add_edge(cv, w)
                        stack.append((child, w))
            return v

        r = build(self.root)
        return g, r

    def to_dot(self, lam=None, b=None) -> str:
        """DOT text of the distinct nodes; shared children are drawn once with a copy count."""
        order = _postorder(self.root)
        names = {id(n): f"n{i}" for i, n in enumerate(order)}
        lines = ["digraph tree {"]
        pairs = tree_partition_all(self, lam, b) if lam is not None else {}
        for node in order:
            label = names[id(node)]
            if id(node) in pairs:
                zp, zm = pairs[id(node)]
                label += f"\\nZ+={format_gaussian(zp)}\\nZ-={format_gaussian(zm)}"
            lines.append(f'  {names[id(node)]} [label="{label}"];')
            for child, copies in node.children:
                lines.append(f'  {names[id(node)]} -> {names[id(child)]} [label="x{copies}"];')
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self):
        return f"RootedTree(size={self.size}, root_degree={self.root_degree})"


def tree_partition_all(T: RootedTree, lam, b) -> dict:
    """``(Z_plus, Z_minus)`` of every distinct subtree, keyed by node id."""
    lam = GaussianRational.coerce(lam)
    b = as_fraction(b)
    pairs: dict[int, tuple] = {}
    for node in _postorder(T.root):
        act = node.field if node.field is not None else lam
        zp = GaussianRational(1)
        zm = GaussianRational(1)
        for child, copies in node.children:
            cp, cm = pairs[id(child)]
            up = cp + cm * b
            dn = cp * b + cm
            if copies != 1:
                up, dn = up ** copies, dn ** copies
            zp = zp * up
            zm = zm * dn
        pairs[id(node)] = (act * zp, zm)
    return pairs


def tree_partition(T: RootedTree, lam, b) -> tuple[GaussianRational, GaussianRational]:
    """Root-pinned partition pair ``(Z_{T,+r}, Z_{T,-r})`` by bottom-up recursion."""
    key = (GaussianRational.coerce(lam), as_fraction(b))
    hit = T._cache.get(key)
    if hit is None:
        hit = tree_partition_all(T, *key)[id(T.root)]
        T._cache[key] = hit
    return hit


def tree_field(T: RootedTree, lam, b) -> GaussianRational:
    """The field ``Z_{T,+r}/Z_{T,-r}`` implemented by ``T``."""
    zp, zm = tree_partition(T, lam, b)
    if zm.is_zero():
        raise ZeroDenominator("Z_{T,-r} vanishes")
    f = zp / zm
    lam_c = GaussianRational.coerce(lam)
    if lam_c.norm2() == 1 and f.norm2() == 1:
        return UnitPoint(f.re, f.im)
    return f


def tree_field_fast(T: RootedTree, lam, b) -> GaussianRational:
    """Field computed on normalised ratios (avoids the full partition magnitudes)."""
    lam = GaussianRational.coerce(lam)
    b = as_fraction(b)
    ratios: dict[int, GaussianRational] = {}
    for node in _postorder(T.root):
        act = node.field if node.field is not None else lam
        r = act
        for child, copies in node.children:
            c = ratios[id(child)]
            h = (c + b) / (c * b + 1)
            r = r * (h ** copies if copies != 1 else h)
        ratios[id(node)] = r
    out = ratios[id(T.root)]
    if out.norm2() == 1:
        return UnitPoint(out.re, out.im)
    return out


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------


@dataclass
class Graph:
    """Multigraph with optional spin pins, field overrides and hung trees."""

    vertices: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    pins: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)
    attachments: dict = field(default_factory=dict)

    def __post_init__(self):
        self.edges = [self._norm_edge(e) for e in self.edges]
        self._vset = set(self.vertices)
        for e in self.edges:
            for x in e[:2]:
                if x not in self._vset:
                    self.add_vertex(x)

    @staticmethod
    def _norm_edge(e):
        if len(e) == 2:
            return (e[0], e[1], 1)
        return (e[0], e[1], int(e[2]))

    # construction -----------------------------------------------------------
    @classmethod
    def from_edges(cls, edges: Iterable, vertices: Optional[Iterable] = None) -> "Graph":
        g = cls(list(vertices) if vertices is not None else [], list(edges))
        return g

    @classmethod
    def from_networkx(cls, G) -> "Graph":
        return cls(list(G.nodes()), [(u, v, 1) for u, v in G.edges()])

    def to_networkx(self):
        import networkx as nx

        G = nx.MultiGraph()
        G.add_nodes_from(self.vertices)
        for u, v, m in self.edges:
            for _ in range(m):
                G.add_edge(u, v)
        return G

    def add_vertex(self, v: Hashable) -> None:
        if v in self._vset:
            raise PreconditionViolated(f"duplicate vertex {v!r}")
        self.vertices.append(v)
        self._vset.add(v)

    def add_edge(self, u, v, mult: int = 1) -> None:
        if u == v:
            raise PreconditionViolated("self-loops are not supported")
        for x in (u, v):
            if x not in self._vset:
                raise PreconditionViolated(f"unknown vertex {x!r}")
        self.edges.append((u, v, mult))

    def attach(self, v, tree: RootedTree) -> None:
        """Hang ``tree`` on ``v`` by identifying its root with ``v``."""
        if v not in self._vset:
            raise PreconditionViolated(f"unknown vertex {v!r}")
        self.attachments.setdefault(v, []).append(tree)

    def copy(self) -> "Graph":
        return Graph(list(self.vertices), list(self.edges), dict(self.pins), dict(self.fields),
                     {k: list(v) for k, v in self.attachments.items()})

    def with_pins(self, pins: dict) -> "Graph":
        g = self.copy()
        for v, s in pins.items():
            if v not in self._vset:
                raise PreconditionViolated(f"unknown vertex {v!r}")
            if s not in (PLUS, MINUS):
                raise PreconditionViolated("pins must be +1 or -1")
            g.pins[v] = s
        return g

    def without_edge(self, u, v) -> "Graph":
        g = self.copy()
        for i, (a, c, m) in enumerate(g.edges):
            if {a, c} == {u, v}:
                if m > 1:
                    g.edges[i] = (a, c, m - 1)
                else:
                    del g.edges[i]
                return g
        raise PreconditionViolated(f"no edge {u!r}-{v!r}")

    # queries -----------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.vertices)

    def degree(self, v) -> int:
        d = 0
        for a, c, m in self.edges:
            if a == v or c == v:
                d += m
        for t in self.attachments.get(v, ()):
            d += t.root_degree
        return d

    def degrees(self) -> dict:
        deg = {v: 0 for v in self.vertices}
        for a, c, m in self.edges:
            deg[a] += m
            deg[c] += m
        for v, ts in self.attachments.items():
            deg[v] += sum(t.root_degree for t in ts)
        return deg

    def max_degree(self) -> int:
        """Maximum degree, including inside hung trees."""
        best = max(self.degrees().values(), default=0)
        for ts in self.attachments.values():
            for t in ts:
                best = max(best, t.max_degree)
        return best

    def check_max_degree(self, cap: int) -> None:
        if self.max_degree() > cap:
            raise DegreeViolation(f"maximum degree {self.max_degree()} exceeds {cap}")

    def neighbors(self, v) -> list:
        out = []
        for a, c, m in self.edges:
            if a == v:
                out.append(c)
            elif c == v:
                out.append(a)
        return out

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = {v: set() for v in self.vertices}
        for a, c, _ in self.edges:
            adj[a].add(c)
            adj[c].add(a)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            x = stack.pop()
            for y in adj[x] - seen:
                seen.add(y)
                stack.append(y)
        return len(seen) == self.n

    def total_vertices(self) -> int:
        """Vertex count with every hung tree expanded."""
        return self.n + sum(t.size - 1 for ts in self.attachments.values() for t in ts)

    def total_edges(self) -> int:
        return sum(m for *_, m in self.edges) + sum(t.size - 1 for ts in self.attachments.values() for t in ts)

    # serialisation -----------------------------------------------------------
    def to_json(self) -> dict:
        if self.attachments:
            raise PreconditionViolated("graphs with hung trees have no JSON form; expand them first")
        return {
            "vertices": list(self.vertices),
            "edges": [[u, v, m] for u, v, m in self.edges],
            "pins": {str(k): ("+" if s == PLUS else "-") for k, s in self.pins.items()},
            "fields": {str(k): format_gaussian(f) for k, f in self.fields.items()},
        }

    @classmethod
    def from_json(cls, data) -> "Graph":
        if isinstance(data, str):
            data = json.loads(data)
        verts = list(data.get("vertices", []))
        lookup = {str(v): v for v in verts}
        edges = [tuple(e) for e in data.get("edges", [])]
        g = cls(verts, edges)
        for k, s in data.get("pins", {}).items():
            g.pins[lookup.get(str(k), k)] = PLUS if s in ("+", 1, "+1") else MINUS
        for k, f in data.get("fields", {}).items():
            g.fields[lookup.get(str(k), k)] = parse_gaussian(f) if isinstance(f, str) else GaussianRational.from_json(f)
        return g


def path_graph(n: int) -> Graph:
    return Graph(list(range(n)), [(i, i + 1, 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(list(range(n)), [(i, (i + 1) % n, 1) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(list(range(n)), [(i, j, 1) for i in range(n) for j in range(i + 1, n)])


# ---------------------------------------------------------------------------
# Vertex weights
# ---------------------------------------------------------------------------


def vertex_weight_pair(G: Graph, v, lam: GaussianRational, b: Fraction) -> tuple[GaussianRational, GaussianRational]:
    """``(w_plus, w_minus)`` of ``v`` including its override and hung trees."""
    wp = G.fields.get(v, lam)
    wp = GaussianRational.coerce(wp)
    wm = GaussianRational(1)
    for t in G.attachments.get(v, ()):
        zp, zm = tree_partition(t, lam, b)
        root_act = t.root.field if t.root.field is not None else lam
        wp = wp * zp / root_act
        wm = wm * zm
    return wp, wm


def _is_special(G: Graph, v) -> bool:
    return v in G.fields or bool(G.attachments.get(v))


# ---------------------------------------------------------------------------
# Brute force enumeration
# ---------------------------------------------------------------------------


@dataclass
class CountTable:
    """Configuration counts keyed by ``(n_plus, disagreements, special pattern, tracked spins)``.

    ``n_plus`` counts plus spins on ordinary vertices only; special vertices
    (overrides or hung trees) are recorded by their spin pattern instead.
    """

    counts: dict
    special: list
    tracked: list

    def evaluate(self, weights: dict, lam: GaussianRational, b: Fraction) -> dict:
        """Sum per tracked-spin pattern using special-vertex weight pairs ``weights[v]``."""
        lam_pows: dict[int, GaussianRational] = {}
        b_pows: dict[int, Fraction] = {}
        pat_cache: dict[int, GaussianRational] = {}
        out: dict[tuple, GaussianRational] = {}
        for (npl, dis, pat, tr), cnt in self.counts.items():
            if npl not in lam_pows:
                lam_pows[npl] = lam ** npl
            if dis not in b_pows:
                b_pows[dis] = b ** dis
            if pat not in pat_cache:
                w = GaussianRational(1)
                for j, v in enumerate(self.special):
                    wp, wm = weights[v]
                    w = w * (wp if (pat >> j) & 1 else wm)
                pat_cache[pat] = w
            key = tuple(PLUS if (tr >> j) & 1 else MINUS for j in range(len(self.tracked)))
            term = lam_pows[npl] * pat_cache[pat] * (b_pows[dis] * cnt)
            out[key] = out.get(key, GaussianRational(0)) + term
        return out


def count_table(G: Graph, tracked: Sequence = (), cap: int = BRUTE_FORCE_CAP) -> CountTable:
    """Aggregate all spin configurations of ``G`` into a :class:`CountTable`."""
    idx = {v: i for i, v in enumerate(G.vertices)}
    free = [v for v in G.vertices if v not in G.pins]
    if len(free) > cap:
        raise TooLarge(f"{len(free)} free vertices exceed the brute-force cap {cap}")
    special = [v for v in G.vertices if _is_special(G, v)]
    tracked = list(tracked)
    for v in tracked:
        if v not in idx:
            raise PreconditionViolated(f"unknown tracked vertex {v!r}")
    n_free = len(free)
    total = 1 << n_free
    free_pos = {v: j for j, v in enumerate(free)}
    max_dis = sum(m for *_, m in G.edges)
    S, Tn = len(special), len(tracked)
    counts: dict = {}
    chunk = 1 << min(_CHUNK_BITS, n_free)
    for start in range(0, total, chunk):
        cfg = np.arange(start, min(start + chunk, total), dtype=np.int64)

        def spin(v):
            if v in G.pins:
                val = 1 if G.pins[v] == PLUS else 0
                return np.full(cfg.shape, val, dtype=np.int64)
            return (cfg >> free_pos[v]) & 1

        spins = {v: spin(v) for v in G.vertices}
        npl = np.zeros(cfg.shape, dtype=np.int64)
        for v in G.vertices:
            if v not in special:
                npl += spins[v]
        dis = np.zeros(cfg.shape, dtype=np.int64)
        for u, v, m in G.edges:
            dis += m * (spins[u] ^ spins[v])
        pat = np.zeros(cfg.shape, dtype=np.int64)
        for j, v in enumerate(special):
            pat |= spins[v] << j
        tr = np.zeros(cfg.shape, dtype=np.int64)
        for j, v in enumerate(tracked):
            tr |= spins[v] << j
        key = ((npl * (max_dis + 1) + dis) << (S + Tn)) | (pat << Tn) | tr
        uniq, cnt = np.unique(key, return_counts=True)
        for k_, c_ in zip(uniq.tolist(), cnt.tolist()):
            counts[k_] = counts.get(k_, 0) + c_
    decoded = {}
    for k_, c_ in counts.items():
        tr = k_ & ((1 << Tn) - 1)
        pat = (k_ >> Tn) & ((1 << S) - 1)
        rest = k_ >> (S + Tn)
        decoded[(rest // (max_dis + 1), rest % (max_dis + 1), pat, tr)] = c_
    return CountTable(decoded, special, tracked)


def partition_bruteforce(G: Graph, lam, b, cap: int = BRUTE_FORCE_CAP) -> GaussianRational:
    """Exact ``Z_G(lam, b)`` by enumerating every configuration of the free vertices."""
    lam = GaussianRational.coerce(lam)
    b = as_fraction(b)
    table = count_table(G, (), cap)
    weights = {v: vertex_weight_pair(G, v, lam, b) for v in table.special}
    return table.evaluate(weights, lam, b).get((), GaussianRational(0))


@dataclass(frozen=True)
class PinnedWeights:
    """The four partition values with vertices ``u``, ``v`` pinned."""

    z_pp: GaussianRational
    z_pm: GaussianRational
    z_mp: GaussianRational
    z_mm: GaussianRational

    @property
    def total(self) -> GaussianRational:
        return self.z_pp + self.z_pm + self.z_mp + self.z_mm

    def to_json(self) -> dict:
        return {k: format_gaussian(getattr(self, k)) for k in ("z_pp", "z_pm", "z_mp", "z_mm")}


def pinned_partition(G: Graph, pins: dict, lam, b, cap: int = BRUTE_FORCE_CAP) -> GaussianRational:
    """Partition function restricted to configurations agreeing with ``pins``."""
    return partition_bruteforce(G.with_pins(pins), lam, b, cap)


def pinned_weights(G: Graph, u, v, lam, b, cap: int = BRUTE_FORCE_CAP) -> PinnedWeights:
    """``Z_{G,±u,±v}`` for all four sign choices from one enumeration."""
    lam = GaussianRational.coerce(lam)
    b = as_fraction(b)
    table = count_table(G, (u, v), cap)
    weights = {x: vertex_weight_pair(G, x, lam, b) for x in table.special}
    vals = table.evaluate(weights, lam, b)
    z = GaussianRational(0)
    return PinnedWeights(vals.get((PLUS, PLUS), z), vals.get((PLUS, MINUS), z),
                         vals.get((MINUS, PLUS), z), vals.get((MINUS, MINUS), z))


# ---------------------------------------------------------------------------
# General exact evaluator with graph reductions
# ---------------------------------------------------------------------------


def _edge_matrix(b: Fraction, mult: int):
    w = b ** mult
    return [[GaussianRational(1), GaussianRational(w)], [GaussianRational(w), GaussianRational(1)]]


def _mat_mul_diag(A, d, B):
    """``A · diag(d) · B`` for 2x2 matrices."""
    return [[A[i][0] * d[0] * B[0][j] + A[i][1] * d[1] * B[1][j] for j in range(2)] for i in range(2)]


def partition_function(G: Graph, lam, b, keep: Sequence = (), cap: int = BRUTE_FORCE_CAP) -> dict:
    """Exact partition function by series/parallel/leaf reduction plus enumeration.

    Vertices in ``keep`` are never eliminated; the result maps each spin
    pattern of ``keep`` (tuples of ``±1``) to its restricted partition value.
    With ``keep`` empty the single key is ``()``.
    """
    lam = GaussianRational.coerce(lam)
    b = as_fraction(b)
    keep = list(keep)
    keep_set = set(keep)
    weight: dict = {}
    for v in G.vertices:
        wp, wm = vertex_weight_pair(G, v, lam, b)
        if v in G.pins:
            if G.pins[v] == PLUS:
                wm = GaussianRational(0)
            else:
                wp = GaussianRational(0)
        weight[v] = [wp, wm]
    adj: dict = {v: {} for v in G.vertices}
    for u, v, m in G.edges:
        M = _edge_matrix(b, m)
        if v in adj[u]:
            old = adj[u][v]
            M = [[old[i][j] * M[i][j] for j in range(2)] for i in range(2)]
        adj[u][v] = M
        adj[v][u] = [[M[j][i] for j in range(2)] for i in range(2)]
    scale = GaussianRational(1)
    changed = True
    while changed:
        changed = False
        for v in list(adj):
            if v not in adj or v in keep_set:
                continue
            deg = len(adj[v])
            wv = weight[v]
            if deg == 0:
                scale = scale * (wv[0] + wv[1])
                del adj[v]
                changed = True
            elif deg == 1:
                (u, M), = adj[v].items()
                # M[su][sv] seen from v: adj[v][u][sv][su]
                for su in range(2):
                    weight[u][su] = weight[u][su] * (M[0][su] * wv[0] + M[1][su] * wv[1])
                del adj[u][v]
                del adj[v]
                changed = True
            elif deg == 2:
                (u, Mvu), (w, Mvw) = adj[v].items()
                # new matrix N[su][sw] = sum_sv Mvu[sv][su] * wv[sv] * Mvw[sv][sw]
                Muv = [[Mvu[j][i] for j in range(2)] for i in range(2)]
                N = _mat_mul_diag(Muv, wv, Mvw)
                del adj[u][v]
                del adj[w][v]
                del adj[v]
                if w in adj[u]:
                    old = adj[u][w]
                    N = [[old[i][j] * N[i][j] for j in range(2)] for i in range(2)]
                adj[u][w] = N
                adj[w][u] = [[N[j][i] for j in range(2)] for i in range(2)]
                changed = True
    core = list(adj)
    free = [v for v in core if v not in keep_set]
    if len(free) > cap:
        raise TooLarge(f"reduced core still has {len(free)} free vertices")
    order = keep + free
    pos = {v: i for i, v in enumerate(order)}
    edges = [(pos[u], pos[v], M) for u in core for v, M in adj[u].items() if pos[u] < pos[v]]
    out: dict = {}
    zero = GaussianRational(0)
    for cfg in itertools.product((0, 1), repeat=len(order)):
        w = scale
        for v in order:
            w = w * weight[v][cfg[pos[v]]]
            if w.is_zero():
                break
        if w.is_zero():
            key = tuple(PLUS if cfg[i] == 0 else MINUS for i in range(len(keep)))
            out.setdefault(key, zero)
            continue
        for i, j, M in edges:
            w = w * M[cfg[i]][cfg[j]]
        key = tuple(PLUS if cfg[i] == 0 else MINUS for i in range(len(keep)))
        out[key] = out.get(key, zero) + w
    return out


def partition_value(G: Graph, lam, b) -> GaussianRational:
    """``Z_G`` via :func:`partition_function`."""
    return partition_function(G, lam, b)[()]


# ---------------------------------------------------------------------------
# Compiled partition functions (linear in special-vertex weights)
# ---------------------------------------------------------------------------


@dataclass
class CompiledPartition:
    """``Z_G`` as a multilinear form in the weight pairs of its special vertices."""

    special: list
    coefficients: dict
    tracked: list

    def __call__(self, weights: dict) -> dict:
        out: dict = {}
        for (pat, tr), c in self.coefficients.items():
            w = c
            for j, v in enumerate(self.special):
                wp, wm = weights[v]
                w = w * (wp if (pat >> j) & 1 else wm)
            key = tuple(PLUS if (tr >> j) & 1 else MINUS for j in range(len(self.tracked)))
            out[key] = out.get(key, GaussianRational(0)) + w
        return out


def compile_partition(G: Graph, lam, b, special: Sequence, tracked: Sequence = (),
                      cap: int = BRUTE_FORCE_CAP) -> CompiledPartition:
    """Precompute ``Z_G`` with the listed vertices' weights left symbolic."""
    lam = GaussianRational.coerce(lam)
    b = as_fraction(b)
    g = G.copy()
    for v in special:
        g.fields.pop(v, None)
        g.attachments.pop(v, None)
    # mark the symbolic vertices as special through a placeholder field
    for v in special:
        g.fields[v] = lam
    table = count_table(g, tracked, cap)
    order = table.special
    coeffs: dict = {}
    sym_idx = [order.index(v) for v in special]
    fixed = [v for v in order if v not in special]
    fixed_w = {v: vertex_weight_pair(G, v, lam, b) for v in fixed}
    for (npl, dis, pat, tr), cnt in table.counts.items():
        w = (lam ** npl) * ((b ** dis) * cnt)
        for v in fixed:
            j = order.index(v)
            wp, wm = fixed_w[v]
            w = w * (wp if (pat >> j) & 1 else wm)
        sp = 0
        for k_, j in enumerate(sym_idx):
            if (pat >> j) & 1:
                sp |= 1 << k_
        coeffs[(sp, tr)] = coeffs.get((sp, tr), GaussianRational(0)) + w
    return CompiledPartition(list(special), coeffs, list(tracked))


# ---------------------------------------------------------------------------
# Paths and transfer matrices
# ---------------------------------------------------------------------------


def path_transfer(k: int, b) -> tuple[list, Fraction]:
    """``[[1, b], [b, 1]]^(k-1)`` and the effective interaction ``b_k`` of a ``k``-vertex path."""
    if k < 2:
        raise PreconditionViolated("paths need at least two vertices")
    b = as_fraction(b)
    m = k - 1
    diag = ((1 + b) ** m + (1 - b) ** m) / 2
    off = ((1 + b) ** m - (1 - b) ** m) / 2
    return [[diag, off], [off, diag]], off / diag


def effective_interaction(k: int, b) -> Fraction:
    return path_transfer(k, b)[1]


# ---------------------------------------------------------------------------
# Partition polynomial in lam and Lee-Yang zeros
# ---------------------------------------------------------------------------


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, c in enumerate(q):
            out[i + j] += a * c
    return out


def _poly_pow(p, e):
    out = [Fraction(1)]
    base = p
    while e:
        if e & 1:
            out = _poly_mul(out, base)
        e >>= 1
        if e:
            base = _poly_mul(base, base)
    return out


def _poly_add(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _poly_scale(p, c):
    return [c * a for a in p]


def tree_polynomial_pair(T: RootedTree, b) -> tuple[list, list]:
    """``(Z_plus(z), Z_minus(z))`` as coefficient lists in the activity ``z``."""
    b = as_fraction(b)
    pairs: dict = {}
    for node in _postorder(T.root):
        if node.field is not None:
            raise PreconditionViolated("polynomial in lam requires trees without overrides")
        zp, zm = [Fraction(0), Fraction(1)], [Fraction(1)]
        for child, copies in node.children:
            cp, cm = pairs[id(child)]
            up = _poly_add(cp, _poly_scale(cm, b))
            dn = _poly_add(_poly_scale(cp, b), cm)
            zp = _poly_mul(zp, _poly_pow(up, copies))
            zm = _poly_mul(zm, _poly_pow(dn, copies))
        pairs[id(node)] = (zp, zm)
    return pairs[id(T.root)]


def partition_polynomial_in_lambda(G, b, cap: int = BRUTE_FORCE_CAP) -> list[Fraction]:
    """Coefficients ``a_0, ..., a_n`` of ``Z_G(z, b) = sum a_j z^j``."""
    b = as_fraction(b)
    if isinstance(G, RootedTree):
        zp, zm = tree_polynomial_pair(G, b)
        return _trim(_poly_add(zp, zm))
    if G.fields or G.attachments or G.pins:
        raise PreconditionViolated("polynomial in lam requires a plain graph")
    table = count_table(G, (), cap)
    coeffs = [Fraction(0)] * (G.n + 1)
    for (npl, dis, _, _), cnt in table.counts.items():
        coeffs[npl] += cnt * b ** dis
    return _trim(coeffs)


def _trim(p):
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p


@dataclass(frozen=True)
class PolynomialRoot:
    value: mpmath.mpc
    multiplicity: int
    residual: mpmath.mpf

    @property
    def modulus(self):
        return abs(self.value)


def polynomial_zeros(coeffs: Sequence[Fraction], prec: int = DEFAULT_PREC) -> list[PolynomialRoot]:
    """All complex roots, multiplicities resolved by exact square-free decomposition."""
    import sympy

    x = sympy.Symbol("x")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(list(coeffs))], x,
                      domain="QQ")
    if poly.degree() < 1:
        return []
    _, factors = poly.sqf_list()
    out: list[PolynomialRoot] = []
    with mp.workprec(prec):
        for fac, mult in factors:
            cs = [mpmath.mpf(sympy.Rational(c).p) / sympy.Rational(c).q for c in fac.all_coeffs()]
            if fac.degree() == 1:
                roots = [-cs[1] / cs[0]]
            else:
                roots = mpmath.polyroots(cs, maxsteps=400, extraprec=prec)
            for r in roots:
                res = abs(mpmath.polyval(cs, r))
                out.append(PolynomialRoot(mpmath.mpc(r), mult, res))
    return out


def lee_yang_zeros(G, b, prec: int = DEFAULT_PREC) -> list[PolynomialRoot]:
    return polynomial_zeros(partition_polynomial_in_lambda(G, b), prec)
