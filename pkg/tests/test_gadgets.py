from fractions import Fraction

import pytest

from isingcircle.errors import BudgetExceeded, DegreeViolation, PreconditionViolated
from isingcircle.exact import GaussianRational, I_UNIT, MINUS_ONE, ONE, UnitPoint
from isingcircle.gadgets import (
    attach_trees,
    build_decorated_path,
    build_H_theta,
    certify_nonvanishing,
    decorated_path_error_bound,
    decorated_path_weights,
    edge_over,
    implement_field,
    inverse_single_edge,
    power_tree,
    seed_pair_search,
    select_bhat,
)
from isingcircle.ising import (
    Graph,
    RootedTree,
    TreeNode,
    complete_graph,
    effective_interaction,
    partition_bruteforce,
    tree_field,
    tree_partition,
)

QUARTER = Fraction(1, 4)


def single_edge_map(lam, d, b, z):
    return lam * ((z + b) / (z * b + 1)) ** d


def test_attach_single_vertices_gives_path():
    T = attach_trees(RootedTree.single(), RootedTree.single(), 1)
    assert T.size == 2 and T.root_degree == 1
    assert tree_field(T, I_UNIT, QUARTER) == single_edge_map(I_UNIT, 1, QUARTER, I_UNIT)


def test_attach_star_field():
    lam = UnitPoint(Fraction(3, 5), Fraction(4, 5))
    T = attach_trees(RootedTree.single(), RootedTree.single(), 2)
    assert T.size == 3
    assert tree_field(T, lam, QUARTER) == single_edge_map(lam, 2, QUARTER, lam)


def test_attach_composes_with_seed_field():
    lam = I_UNIT
    T2 = edge_over(RootedTree.single())
    T1 = power_tree(RootedTree.single(), 2)
    xi2, xi1 = tree_field(T2, lam, QUARTER), tree_field(T1, lam, QUARTER)
    T = attach_trees(T2, T1, 1)
    assert tree_field(T, lam, QUARTER) == single_edge_map(xi2, 1, QUARTER, xi1)


def test_attach_over_capacity():
    with pytest.raises(DegreeViolation):
        attach_trees(RootedTree.single(), RootedTree.single(), 4, max_degree=3)


def test_inverse_single_edge_round_trip():
    lam = UnitPoint(Fraction(5, 13), Fraction(12, 13))
    w = UnitPoint(Fraction(-3, 5), Fraction(4, 5))
    z = inverse_single_edge(lam, QUARTER, w)
    assert single_edge_map(lam, 1, QUARTER, z) == w


def test_seed_pair_at_i():
    pair = seed_pair_search(3, QUARTER, I_UNIT)
    for seed in (pair.first, pair.second):
        assert seed.tree.root_degree == 1
        assert tree_field(seed.tree, I_UNIT, QUARTER) == seed.field
        assert 0.5 + 1e-10 < float(seed.multiplier) < 1 - 1e-10
    assert pair.first.field != pair.second.field


def test_seed_pair_preconditions():
    with pytest.raises(PreconditionViolated):
        seed_pair_search(3, QUARTER, ONE)
    with pytest.raises(BudgetExceeded):
        seed_pair_search(3, QUARTER, I_UNIT, budget=0, use_cache=False)


def test_implement_field_large_eps():
    out = implement_field(3, QUARTER, I_UNIT, MINUS_ONE, 2)
    assert out.tree.root_degree == 1
    assert out.distance_sq <= 4


def test_implement_field_minus_one():
    out = implement_field(3, QUARTER, I_UNIT, MINUS_ONE, Fraction(1, 100))
    assert out.tree.root_degree == 1
    assert tree_field(out.tree, I_UNIT, QUARTER) == out.field
    assert (out.field + 1).norm2() <= Fraction(1, 100) ** 2
    assert out.tree.size == out.plan.predicted_size
    out.tree.check_degree(3)


def test_implement_field_rejects_bad_input():
    with pytest.raises(PreconditionViolated):
        implement_field(3, QUARTER, I_UNIT, GaussianRational(Fraction(1, 2)), Fraction(1, 10))
    with pytest.raises(PreconditionViolated):
        implement_field(3, QUARTER, I_UNIT, MINUS_ONE, 0)


def test_effective_interaction_b5():
    assert effective_interaction(5, Fraction(1, 2)) == Fraction(40, 41)


def test_select_bhat_first_k():
    k, bk, cert = select_bhat(3, I_UNIT, 4)
    assert 1 - bk <= Fraction(1, 5)
    assert all(1 - effective_interaction(j, Fraction(1, 2)) > Fraction(1, 5) for j in range(2, k))
    assert cert.min_norm_sq > 0


def test_select_bhat_single_vertex_certificate():
    _, bk, cert = select_bhat(3, I_UNIT, 1)
    assert cert.graphs_checked == 1
    assert cert.min_norm_sq == (I_UNIT + 1).norm2()


def test_select_bhat_excludes_minus_one():
    with pytest.raises(PreconditionViolated):
        select_bhat(3, MINUS_ONE, 3)


def test_certificate_routes_agree():
    lam = UnitPoint(Fraction(3, 5), Fraction(4, 5))
    a = certify_nonvanishing(lam, Fraction(40, 41), 5, method="extension")
    b = certify_nonvanishing(lam, Fraction(40, 41), 5, method="filter")
    assert a[0] == b[0] and a[2] == b[2]


def _unit_field_tree(lam, b):
    # root with one child whose override makes the root field exactly 1
    c = inverse_single_edge(lam, b, GaussianRational(1))
    return RootedTree(TreeNode(((TreeNode((), c), 1),), None))


@pytest.mark.parametrize("k", [2, 3, 4, 6])
def test_decorated_path_with_exact_unit_field(k):
    T0 = _unit_field_tree(I_UNIT, QUARTER)
    assert tree_field(T0, I_UNIT, QUARTER) == 1
    W = decorated_path_weights(build_decorated_path(k, T0), I_UNIT, QUARTER)
    assert W.ratio_deviation(effective_interaction(k, QUARTER)) == (0.0, 0.0)
    assert W.A_pm == W.A_mp


def test_decorated_path_k2_is_plain_edge():
    W = decorated_path_weights(build_decorated_path(2, None), I_UNIT, QUARTER)
    assert (W.A_pp, W.A_pm, W.A_mp, W.A_mm) == (1, QUARTER, QUARTER, 1)


def test_decorated_path_error_within_bound():
    eps0 = Fraction(1, 10 ** 6)
    T0 = implement_field(3, QUARTER, I_UNIT, GaussianRational(1), eps0).tree
    W = decorated_path_weights(build_decorated_path(3, T0), I_UNIT, QUARTER)
    bound = float(decorated_path_error_bound(3, eps0))
    dev = W.ratio_deviation(effective_interaction(3, QUARTER))
    assert max(dev) <= bound


def test_decorated_path_needs_root_degree_one():
    with pytest.raises(DegreeViolation):
        build_decorated_path(3, power_tree(RootedTree.single(), 2))


def test_H_theta_on_K2():
    # the field tree is identified with s, so a pendant needs a two-vertex tree
    probe = build_H_theta(complete_graph(2), (0, 1), 2, edge_over(RootedTree.single()), None)
    assert probe.gadget.total_vertices() == 4
    assert probe.gadget.total_edges() == 3


def test_H_theta_primed_difference():
    T_pi = edge_over(RootedTree.single())
    G = complete_graph(4)
    G = G.without_edge(2, 3)
    plain = build_H_theta(G, (0, 1), 2, RootedTree.single(), None)
    primed = build_H_theta(G, (0, 1), 2, RootedTree.single(), None, variant="primed", T_pi=T_pi)
    extra = primed.gadget.total_vertices() - plain.gadget.total_vertices()
    assert extra == 2 + 2 * (T_pi.size - 1)
    assert primed.ideal.total_vertices() - plain.ideal.total_vertices() == 2


def test_H_theta_rejects_high_degree():
    G = Graph.from_edges([(0, 1), (0, 2), (0, 3), (0, 4)])
    with pytest.raises(DegreeViolation):
        build_H_theta(G, (0, 1), 2, None, None)


def test_H_theta_ideal_twin_matches_gadget_at_k2():
    # with k = 2 the gadget graph is the ideal twin with field 1 at s, scaled by Q-
    G = complete_graph(3)
    T = _unit_field_tree(I_UNIT, QUARTER)
    probe = build_H_theta(G, (0, 1), 2, T, None)
    ideal = probe.ideal.copy()
    ideal.fields[probe.s] = ONE
    _, q_minus = tree_partition(T, I_UNIT, QUARTER)
    assert partition_bruteforce(probe.gadget, I_UNIT, QUARTER) == q_minus * partition_bruteforce(ideal, I_UNIT, QUARTER)
