"""Tree gadgets: tree building, seed search, field implementation and b̂ selection.

Moves on rooted trees realise maps on fields:

* hanging one copy of a tree with field ``z`` below the root of a seed tree
  with field ``xi`` (root degree 1) gives ``f_{xi,1}(z)``;
* a fresh root with ``d`` copies of a tree with field ``z`` gives ``f_{lam,d}(z)``;
* a fresh root with a single child gives ``f_{lam,1}(z)`` and root degree 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
from mpmath import mp, mpf

from .dynamics import LiftedMap, attracting_fixed_point_mp, derivative_magnitude, lambda_threshold, psi
from .errors import (
    BudgetExceeded,
    CertificationFailed,
    DegreeViolation,
    PreconditionViolated,
    SeedUnavailable,
)
from .exact import (
    MINUS_ONE,
    ONE,
    GaussianRational,
    UnitPoint,
    as_fraction,
    format_gaussian,
    point_angle,
    rational_circle_point,
)
from .graphs import as_graph, connected_bounded_degree, connected_bounded_degree_by_filter
from .ising import (
    Graph,
    RootedTree,
    TreeNode,
    effective_interaction,
    partition_bruteforce,
    partition_function,
    path_transfer,
    tree_field,
    tree_field_fast,
    tree_partition,
)


# ---------------------------------------------------------------------------
# Tree building
# ---------------------------------------------------------------------------


def attach_trees(T2: RootedTree, T1: RootedTree, k: int, max_degree: Optional[int] = None) -> RootedTree:
    """Attach ``k`` copies of ``T1`` to the root of ``T2``; the field becomes ``f_{xi2,k}(xi1)``."""
    if k < 0:
        raise PreconditionViolated("k must be non-negative")
    root = T2.root
    new_root = TreeNode(root.children + ((T1.root, k),), root.field)
    out = RootedTree(new_root)
    if max_degree is not None:
        if T1.root_degree + 1 > max_degree:
            raise DegreeViolation("attached root would exceed the degree cap")
        out.check_degree(max_degree)
    return out


def power_tree(T: RootedTree, d: int) -> RootedTree:
    """Fresh root carrying ``d`` copies of ``T``: field ``f_{lam,d}``."""
    return RootedTree(TreeNode(((T.root, d),)))


def edge_over(T: RootedTree) -> RootedTree:
    """Fresh root with ``T`` as its only child: root degree 1, field ``f_{lam,1}``."""
    return RootedTree(TreeNode(((T.root, 1),)))


def inverse_single_edge(lam: UnitPoint, b, w: GaussianRational) -> GaussianRational:
    """``f_{lam,1}^{-1}(w) = (w/lam - b)/(1 - b w/lam)``."""
    b = as_fraction(b)
    u = w / lam
    out = (u - b) / (GaussianRational(1) - u * b)
    if out.norm2() == 1:
        return UnitPoint(out.re, out.im)
    return out


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------


@dataclass
class Seed:
    """A root-degree-1 tree with its exact field and the multiplier at ``R_1(field)``."""

    tree: RootedTree
    field: UnitPoint
    angle: mpf
    fixed_point_angle: mpf
    multiplier: mpf

    def to_json(self) -> dict:
        return {"field": format_gaussian(self.field), "size": self.tree.size,
                "angle": mpmath.nstr(self.angle, 20), "multiplier": mpmath.nstr(self.multiplier, 20)}


@dataclass
class SeedPair:
    first: Seed
    second: Seed
    lower_multiplier: float
    upper_multiplier: float
    candidates_examined: int

    def to_json(self) -> dict:
        return {"xi1": self.first.to_json(), "xi2": self.second.to_json(),
                "candidates_examined": self.candidates_examined}


_SEED_CACHE: dict = {}


def _seed_record(tree: RootedTree, lam, b) -> Optional[Seed]:
    xi = tree_field_fast(tree, lam, b)
    ang = point_angle(xi).value
    R = attracting_fixed_point_mp(xi, 1, b)
    Ra = mpmath.arg(R)
    mult = derivative_magnitude(1, b, R)
    return Seed(tree, xi, ang, Ra, mult)


def seed_pair_search(delta: int, b, lam, budget: int = 400, max_multiplier=Fraction(9, 10),
                     beam: int = 64, use_cache: bool = True) -> SeedPair:
    """Two root-degree-1 trees whose fields lie in ``Arc(lam~, lam_1)``.

    The admissible arc is where the multiplier ``|f_1'(R_1(xi))|`` lies in
    ``(1/2, 1)``; ``max_multiplier`` tightens the upper end so that the
    contraction used later stays uniform.  Candidates are paths first (their
    fields form an orbit of ``f_{lam,1}``) and then trees grown by the
    tree-building moves, screened in floating point and confirmed exactly.
    The pair spanning the widest fixed-point arc is returned.
    """
    b = as_fraction(b)
    lam = UnitPoint.of(lam)
    if lam in (ONE, MINUS_ONE):
        raise PreconditionViolated("lam must differ from ±1")
    if delta < 3:
        raise PreconditionViolated("delta must be at least 3")
    if budget <= 0:
        raise BudgetExceeded("seed budget is zero", budget=budget)
    key = (delta, b, lam, budget, Fraction(max_multiplier), beam)
    if use_cache and key in _SEED_CACHE:
        return _SEED_CACHE[key]
    d = delta - 1
    thr = lambda_threshold(1, b)
    upper = thr.angle.value
    lo_m, hi_m = mpf(1) / 2, mpf(max_multiplier.numerator) / max_multiplier.denominator \
        if isinstance(max_multiplier, Fraction) else mpf(max_multiplier)

    def admissible(ang, mult):
        return 0 < ang < upper and lo_m < mult <= hi_m

    found: list[Seed] = []
    examined = 0
    lam_m = lam.to_mpc()
    bm = mpf(b.numerator) / b.denominator
    # paths: fields f_{lam,1}^{n-1}(lam), screened in floating point
    with mp.workprec(96):
        z = lam_m
        path_hits = []
        for n in range(2, budget + 2):
            z = lam_m * (z + bm) / (bm * z + 1)
            examined += 1
            ang = mpmath.arg(z)
            if 0 < ang < upper:
                path_hits.append((n, ang))
            if examined >= budget // 2:
                break
    for n, _ in path_hits:
        rec = _seed_record(RootedTree.path(n), lam, b)
        if admissible(rec.angle, rec.multiplier):
            found.append(rec)
    # composite trees: fresh root over up to d children drawn from a beam
    pool = [RootedTree.path(n) for n in range(1, 6)]
    while examined < budget and len(found) < 2:
        new_pool = []
        for i, a in enumerate(pool[:beam]):
            for c in pool[i:beam]:
                if examined >= budget:
                    break
                kids = ((a.root, 1),) if a is c else ((a.root, 1), (c.root, 1))
                if len(kids) > d or any(t.root_degree + 1 > delta for t in (a, c)):
                    continue
                inner = RootedTree(TreeNode(kids))
                cand = edge_over(inner)
                examined += 1
                new_pool.append(inner)
                with mp.workprec(96):
                    xi = tree_field_fast(cand, lam, b)
                    ang = mpmath.arg(xi.to_mpc())
                if 0 < ang < upper:
                    rec = _seed_record(cand, lam, b)
                    if admissible(rec.angle, rec.multiplier):
                        found.append(rec)
        if not new_pool:
            break
        pool = sorted(new_pool, key=lambda t: t.size)[:beam]
    if len(found) < 2:
        raise BudgetExceeded("seed search found fewer than two admissible fields",
                             budget=budget, found=len(found))
    # keep small trees: among admissible fields choose the widest arc, ties by size
    found.sort(key=lambda s: (s.fixed_point_angle, s.tree.size))
    first = min(found, key=lambda s: (s.fixed_point_angle, s.tree.size))
    second = max(found, key=lambda s: (s.fixed_point_angle, -s.tree.size))
    if first.field == second.field:
        raise BudgetExceeded("only one distinct admissible field found", budget=budget)
    for s in (first, second):
        s.tree.check_degree(delta, 1)
    pair = SeedPair(first, second, float(lo_m), float(hi_m), examined)
    if use_cache:
        _SEED_CACHE[key] = pair
    return pair


# ---------------------------------------------------------------------------
# Field implementation
# ---------------------------------------------------------------------------


@dataclass
class FieldPlan:
    """Record of one run of the field-implementation algorithm."""

    delta: int
    b: Fraction
    lam: UnitPoint
    target: GaussianRational
    eps: Fraction
    inner_eps: mpf
    inner_target: Optional[GaussianRational] = None
    arc: tuple = ()
    expansions: int = 0
    partition_size: int = 0
    partition_index: int = 0
    J: tuple = ()
    pullback: list = field(default_factory=list)
    N2: int = 0
    N3: int = 0
    route: str = ""
    script: list = field(default_factory=list)
    inner_size: int = 0
    predicted_size: int = 0
    notes: list = field(default_factory=list)

    def partition_points(self, accuracy=Fraction(1, 10 ** 30)) -> list[UnitPoint]:
        """Rational circle points ``x_0..x_m`` subdividing the fixed-point arc."""
        a0, a1 = self.arc
        m = self.partition_size
        return [rational_circle_point(a0 + (a1 - a0) * j / m, accuracy) for j in range(m + 1)]

    def to_json(self) -> dict:
        return {
            "delta": self.delta, "b": str(self.b), "lambda": format_gaussian(self.lam),
            "target": format_gaussian(self.target), "eps": str(self.eps),
            "inner_eps": mpmath.nstr(self.inner_eps, 15),
            "inner_target": format_gaussian(self.inner_target) if self.inner_target is not None else None,
            "arc": [mpmath.nstr(a, 20) for a in self.arc],
            "N": self.expansions, "partition_size": self.partition_size,
            "partition_index": self.partition_index,
            "J": [mpmath.nstr(a, 25) for a in self.J],
            "N1": len(self.pullback), "pullback": self.pullback, "N2": self.N2, "N3": self.N3,
            "route": self.route, "script": self.script,
            "inner_size": self.inner_size, "predicted_size": self.predicted_size, "notes": self.notes,
        }


@dataclass
class FieldImplementation:
    """A tree together with its exactly verified field."""

    tree: RootedTree
    field: UnitPoint
    distance_sq: Fraction
    plan: FieldPlan

    @property
    def distance(self) -> float:
        return math.sqrt(float(self.distance_sq))


def _angle_dist(a, c):
    two_pi = 2 * mp.pi
    x = (a - c) % two_pi
    return min(x, two_pi - x)


def implement_field(delta: int, b, lam, target, eps, seeds: Optional[SeedPair] = None,
                    seed_budget: int = 400, max_expansions: int = 60, max_partition: int = 1 << 22,
                    pullback_budget: int = 1 << 20) -> FieldImplementation:
    """Root-degree-1 tree in the degree-``delta`` class whose field is within ``eps`` of ``target``.

    The search runs in angle space; the returned tree is checked by exact
    evaluation of its field.
    """
    b = as_fraction(b)
    lam = UnitPoint.of(lam)
    target = GaussianRational.coerce(target)
    if target.norm2() != 1:
        raise PreconditionViolated("target must lie on the unit circle")
    target = UnitPoint(target.re, target.im)
    eps = as_fraction(eps)
    if eps <= 0:
        raise PreconditionViolated("eps must be positive")
    d = delta - 1
    if eps >= 2:
        tree = edge_over(RootedTree.single())
        f = tree_field_fast(tree, lam, b)
        plan = FieldPlan(delta, b, lam, target, eps, mpf(eps.numerator) / eps.denominator, notes=["eps >= 2: any tree qualifies"],
                         inner_size=1, predicted_size=2)
        return FieldImplementation(tree, f, (f - target).norm2(), plan)
    if seeds is None:
        try:
            seeds = seed_pair_search(delta, b, lam, seed_budget)
        except BudgetExceeded as exc:
            raise SeedUnavailable(str(exc)) from exc
    factor = min(Fraction(d - 1, d + 1), (1 - b) / (1 + b))
    bits = int(3 * math.log2(float(1 / eps)) + 40) if eps < 1 else 40
    prec = max(192, bits + 8 * max_expansions)
    with mp.workprec(prec):
        inner_eps = mpf(eps.numerator) / eps.denominator * mpf(factor.numerator) / factor.denominator
        inner_target = inner_single_target = inverse_single_edge(lam, b, target)
        plan = FieldPlan(delta, b, lam, target, eps, inner_eps, inner_target)
        tree, script = _implement_root_degree_d(delta, b, lam, inner_single_target, inner_eps, seeds, plan,
                                                max_expansions, max_partition, pullback_budget)
        final = edge_over(tree)
        script.append("edge")
        plan.script = _compress_script(script)
        plan.predicted_size += 1
    final.check_degree(delta, 1)
    if final.size != plan.predicted_size:
        raise CertificationFailed(f"tree size {final.size} differs from prediction {plan.predicted_size}")
    f = tree_field_fast(final, lam, b)
    dist = (f - target).norm2()
    if dist > eps * eps:
        raise CertificationFailed(f"implemented field misses the target: |Δ|² = {float(dist):.3e}",
                                  witness=final)
    return FieldImplementation(final, f, dist, plan)


def _compress_script(script: list) -> list:
    out: list = []
    for step in script:
        if out and out[-1][0] == step:
            out[-1][1] += 1
        else:
            out.append([step, 1])
    return out


def _implement_root_degree_d(delta, b, lam, target, eps_angle, seeds: SeedPair, plan: FieldPlan,
                             max_expansions, max_partition, pullback_budget):
    d = delta - 1
    s1, s2 = seeds.first, seeds.second
    bm = mpf(b.numerator) / b.denominator
    c = (1 - bm) / (1 + bm)
    theta1, theta2 = point_angle(s1.field).mp_value(mp.prec), point_angle(s2.field).mp_value(mp.prec)
    a0 = mpmath.arg(attracting_fixed_point_mp(s1.field, 1, b, mp.prec))
    a1 = mpmath.arg(attracting_fixed_point_mp(s2.field, 1, b, mp.prec))
    if not 0 < a0 < a1 < mp.pi:
        raise SeedUnavailable("seed fixed points are not ordered in the upper half-plane")
    plan.arc = (a0, a1)
    Fd = LiftedMap(point_angle(lam).mp_value(mp.prec), d, b)

    def FN(phi, n):
        for _ in range(n):
            phi = Fd(phi)
        return phi

    N = 0
    while FN(a1, N) - FN(a0, N) < 2 * mp.pi:
        N += 1
        if N > max_expansions:
            raise BudgetExceeded("fixed-point arc does not wrap the circle", expansions=N)
    plan.expansions = N
    C2 = d * (1 + bm) / (1 - bm)
    m = int(mpmath.ceil((a1 - a0) * C2 ** N / (2 * mp.pi))) + 1
    if m > max_partition:
        raise BudgetExceeded("partition too fine", partition=m)
    plan.partition_size = m
    xs = [a0 + (a1 - a0) * j / m for j in range(m + 1)]
    img = [FN(x, N) for x in xs]
    y = point_angle(target).mp_value(mp.prec)
    two_pi = 2 * mp.pi
    y = img[0] + (y - img[0]) % two_pi
    lo_i, hi_i = 0, m
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if img[mid] <= y:
            lo_i = mid
        else:
            hi_i = mid
    plan.partition_index = hi_i
    jl, jh = xs[lo_i], xs[hi_i]
    limit = eps_angle / 2 / C2 ** N
    while jh - jl > limit:
        mid = (jl + jh) / 2
        if FN(mid, N) <= y:
            jl = mid
        else:
            jh = mid
    plan.J = (jl, jh)
    # pull J back through f_{xi1,1}, f_{xi2,1} until it contains P = f_{xi2,1}(R_1(xi1))
    F1 = LiftedMap(theta1, 1, b)
    F2 = LiftedMap(theta2, 1, b)
    P = F2(a0)
    lo, hi = jl, jh
    pull: list[int] = []
    while not (lo <= P <= hi):
        if hi < P:
            lo, hi = F1.inverse(lo), F1.inverse(hi)
            pull.append(1)
        else:
            lo, hi = F2.inverse(lo), F2.inverse(hi)
            pull.append(2)
        if len(pull) > pullback_budget:
            raise BudgetExceeded("pull-back did not reach the split point", steps=len(pull))
    plan.pullback = pull
    Klo, Khi = F2.inverse(lo), F2.inverse(hi)
    if not Klo <= a0 <= Khi:
        raise CertificationFailed("pulled-back arc misses the fixed point of the first seed")
    klen = Khi - Klo
    start = theta1
    N3 = 0
    if a0 - Klo >= klen / 2:
        plan.route = "clockwise"
    else:
        plan.route = "counterclockwise"
        while start <= a0:
            start = F2(start)
            N3 += 1
            if N3 > pullback_budget:
                raise BudgetExceeded("orbit under the second seed never passes R_1(xi1)")
    N2 = 0
    while not (Klo < start < Khi):
        start = F1(start)
        N2 += 1
        if N2 > pullback_budget:
            raise BudgetExceeded("orbit under the first seed never enters K")
    plan.N2, plan.N3 = N2, N3
    # build the tree: innermost map first
    seed_of = {1: s1.tree, 2: s2.tree}
    cur = s1.tree
    script = []
    moves = [2] * N3 + [1] * N2 + [2] + list(reversed(pull))
    s_size = cur.size
    for idx in moves:
        cur = attach_trees(seed_of[idx], cur, 1)
        script.append(f"xi{idx}")
        s_size += seed_of[idx].size
    plan.inner_size = s_size
    for _ in range(N):
        cur = power_tree(cur, d)
        script.append("lam^d")
    plan.predicted_size = (d ** N - 1) // (d - 1) + d ** N * s_size
    return cur, script


# ---------------------------------------------------------------------------
# Effective edge interaction
# ---------------------------------------------------------------------------


@dataclass
class BhatCertificate:
    """Exhaustive non-vanishing check of ``Z_G(lam, b̂)`` on small bounded-degree graphs."""

    k: int
    b: Fraction
    bhat: Fraction
    lam: UnitPoint
    n_check: int
    max_degree: int
    graphs_checked: int
    min_norm_sq: Fraction
    argmin: tuple
    per_size: dict

    @property
    def min_modulus(self) -> float:
        return math.sqrt(float(self.min_norm_sq))

    def to_json(self) -> dict:
        return {"k": self.k, "b": str(self.b), "bhat": str(self.bhat), "lambda": format_gaussian(self.lam),
                "n_check": self.n_check, "max_degree": self.max_degree, "graphs_checked": self.graphs_checked,
                "min_norm_sq": str(self.min_norm_sq), "min_modulus": self.min_modulus,
                "argmin": {"n": self.argmin[0], "edges": [list(e) for e in self.argmin[1]]},
                "per_size": self.per_size}


def certify_nonvanishing(lam, bhat, n_check: int, max_degree: int = 3, method: str = "extension"):
    """Minimum ``|Z_G(lam, bhat)|²`` over connected graphs with ``n ≤ n_check`` and bounded degree.

    ``method="extension"`` enumerates by vertex extension and evaluates by
    brute force; ``"filter"`` filters all graphs and uses the reduction-based
    evaluator, giving an independent route to the same number.
    """
    lam = GaussianRational.coerce(lam)
    bhat = as_fraction(bhat)
    best = None
    arg = None
    total = 0
    per_size = {}
    for n in range(1, n_check + 1):
        family = connected_bounded_degree(n, max_degree) if method == "extension" \
            else connected_bounded_degree_by_filter(n, max_degree)
        per_size[n] = len(family)
        for edges in family:
            G = as_graph(n, edges)
            Z = partition_bruteforce(G, lam, bhat) if method == "extension" else partition_function(G, lam, bhat)[()]
            nz = Z.norm2()
            total += 1
            if nz == 0:
                raise CertificationFailed(f"Z_G vanishes on a graph with {n} vertices", witness=(n, edges))
            if best is None or nz < best:
                best, arg = nz, (n, tuple(edges))
    return Fraction(best), arg, total, per_size


def select_bhat(delta: int, lam, n_check: int, b=Fraction(1, 2), closeness=Fraction(1, 5),
                k_min: int = 2, k_max: int = 200) -> tuple[int, Fraction, BhatCertificate]:
    """Smallest path length ``k`` with ``1 - b_k ≤ closeness`` and a passing certificate."""
    lam = UnitPoint.of(lam)
    if lam == MINUS_ONE:
        raise PreconditionViolated("lam = -1 is excluded")
    b = as_fraction(b)
    closeness = as_fraction(closeness)
    for k in range(max(2, k_min), k_max + 1):
        bk = effective_interaction(k, b)
        if 1 - bk > closeness:
            continue
        mn, arg, total, per = certify_nonvanishing(lam, bk, n_check, min(delta, 3))
        cert = BhatCertificate(k, b, bk, lam, n_check, min(delta, 3), total, mn, arg, per)
        return k, bk, cert
    raise BudgetExceeded("no path length reaches the requested closeness", k_max=k_max)


# ---------------------------------------------------------------------------
# Decorated paths and the probe graphs H_theta
# ---------------------------------------------------------------------------


@dataclass
class GadgetWeights:
    """Root weights of the field tree and endpoint-pinned weights of a decorated path."""

    Q_plus: GaussianRational
    Q_minus: GaussianRational
    A_pp: GaussianRational
    A_pm: GaussianRational
    A_mp: GaussianRational
    A_mm: GaussianRational

    def ratio_deviation(self, bhat) -> tuple:
        """``(|A_{-+}/A_{++} - b̂|, |A_{--}/A_{++} - 1|)`` as floats."""
        bhat = as_fraction(bhat)
        r1 = self.A_mp / self.A_pp - bhat
        r2 = self.A_mm / self.A_pp - 1
        return math.sqrt(float(r1.norm2())), math.sqrt(float(r2.norm2()))


@dataclass
class DecoratedPath:
    graph: Graph
    u: int
    v: int
    k: int
    T0: Optional[RootedTree]


def build_decorated_path(k: int, T0: Optional[RootedTree]) -> DecoratedPath:
    """Path with ``k`` vertices whose ``k-2`` internal vertices each carry a copy of ``T0``."""
    if k < 2:
        raise PreconditionViolated("k must be at least 2")
    g = Graph(list(range(k)), [(i, i + 1, 1) for i in range(k - 1)])
    if T0 is not None:
        if T0.root_degree != 1:
            raise DegreeViolation("decorating tree must have root degree 1")
        for i in range(1, k - 1):
            g.attach(i, T0)
    return DecoratedPath(g, 0, k - 1, k, T0)


def decorated_path_weights(path: DecoratedPath, lam, b) -> GadgetWeights:
    """Endpoint-pinned weights of the path, without the endpoints' own activities.

    The endpoints are identified with vertices that keep their activity in
    the host graph, so only the internal part of the path is counted here.
    """
    lam = GaussianRational.coerce(lam)
    vals = partition_function(path.graph, lam, b, keep=[path.u, path.v])
    one = GaussianRational(1)
    own = {1: lam, -1: one}
    vals = {(s1, s2): w / (own[s1] * own[s2]) for (s1, s2), w in vals.items()}
    if path.T0 is not None:
        qp, qm = tree_partition(path.T0, lam, b)
    else:
        qp, qm = GaussianRational(1), GaussianRational(1)
    return GadgetWeights(qp, qm, vals[(1, 1)], vals[(1, -1)], vals[(-1, 1)], vals[(-1, -1)])


def decorated_path_error_bound(k: int, eps0) -> Fraction:
    """``ε₁`` implied by a decorating tree of precision ``ε₀``: ``ε₀ = ε₁/(k 4^k)``."""
    return as_fraction(eps0) * k * 4 ** k


@dataclass
class ProbeGraphs:
    """A probe graph with gadget trees and its ideal-field twin."""

    gadget: Graph
    ideal: Graph
    s: object
    variant: str
    edges_replaced: int
    predicted_vertices: int
    predicted_edges: int


def _subdivide(G: Graph, e, variant: str):
    u, v = e
    H = G.without_edge(u, v)
    if variant == "plain":
        s = ("s",)
        H.add_vertex(s)
        H.add_edge(u, s)
        H.add_edge(s, v)
        return H, s, ()
    up, sp, vp = ("u'",), ("s",), ("v'",)
    for x in (up, sp, vp):
        H.add_vertex(x)
    H.add_edge(u, up)
    H.add_edge(up, sp)
    H.add_edge(sp, vp)
    H.add_edge(vp, v)
    return H, sp, (up, vp)


def build_H_theta(G: Graph, e, k: int, T_theta: Optional[RootedTree], T0: Optional[RootedTree],
                  variant: str = "plain", T_pi: Optional[RootedTree] = None,
                  max_degree: int = 3) -> ProbeGraphs:
    """Subdivide ``e``, replace every edge by a decorated path and hang the field trees.

    The ideal twin keeps the subdivided graph with plain edges; the
    ``e^{iθ}`` activity at ``s`` (and ``-1`` at the primed helpers) is
    supplied at evaluation time.
    """
    if variant not in ("plain", "primed"):
        raise PreconditionViolated("variant must be 'plain' or 'primed'")
    if G.max_degree() > 3:
        raise DegreeViolation("input graph must have maximum degree at most 3")
    H, s, helpers = _subdivide(G, e, variant)
    ideal = H.copy()
    for x in helpers:
        ideal.fields[x] = MINUS_ONE
    gadget = Graph(list(H.vertices))
    counter = 0
    for a, c, mult in H.edges:
        for _ in range(mult):
            if k == 2:
                gadget.add_edge(a, c)
                continue
            inner = []
            for _ in range(k - 2):
                w = ("p", counter)
                counter += 1
                gadget.add_vertex(w)
                if T0 is not None:
                    gadget.attach(w, T0)
                inner.append(w)
            chain = [a] + inner + [c]
            for x, y in zip(chain, chain[1:]):
                gadget.add_edge(x, y)
    if T_theta is not None:
        gadget.attach(s, T_theta)
    if variant == "primed":
        if T_pi is None:
            raise PreconditionViolated("primed variant needs the tree implementing -1")
        for x in helpers:
            gadget.attach(x, T_pi)
    m_H = sum(mult for *_, mult in H.edges)
    t0 = T0.size - 1 if T0 is not None else 0
    pred_v = H.n + m_H * (k - 2) * (1 + t0)
    pred_e = m_H * (k - 1) + m_H * (k - 2) * t0
    for T in ([T_theta] if T_theta is not None else []) + ([T_pi, T_pi] if variant == "primed" else []):
        pred_v += T.size - 1
        pred_e += T.size - 1
    if gadget.total_vertices() != pred_v or gadget.total_edges() != pred_e:
        raise CertificationFailed("probe graph size differs from the closed-form count")
    gadget.check_max_degree(max_degree)
    return ProbeGraphs(gadget, ideal, s, variant, m_H, pred_v, pred_e)
