import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from isingcircle.errors import TooLarge
from isingcircle.exact import GaussianRational, I_UNIT, UnitPoint
from isingcircle.graphs import all_graphs, as_graph, connected_bounded_degree, connected_graphs
from isingcircle.ising import (
    Graph,
    RootedTree,
    compile_partition,
    complete_graph,
    count_table,
    cycle_graph,
    lee_yang_zeros,
    partition_bruteforce,
    partition_function,
    partition_polynomial_in_lambda,
    path_transfer,
    pinned_partition,
    pinned_weights,
    tree_field,
    tree_partition,
)

from oracles import brute_partition, random_pythagorean_point, random_tree_edges

HALF = Fraction(1, 2)


def gr(pair):
    return GaussianRational(*pair)


def test_bruteforce_examples():
    lam = UnitPoint(Fraction(3, 5), Fraction(4, 5))
    assert partition_bruteforce(Graph([0]), lam, HALF) == lam + 1
    assert partition_bruteforce(Graph([0, 1, 2]), lam, HALF) == (lam + 1) ** 3
    assert partition_bruteforce(complete_graph(2), I_UNIT, HALF) == I_UNIT


def test_pinned_all_vertices():
    G = cycle_graph(4)
    pins = {0: 1, 1: -1, 2: -1, 3: 1}
    assert pinned_partition(G, pins, I_UNIT, HALF) == I_UNIT ** 2 * HALF ** 2


def test_tree_examples():
    lam = UnitPoint(Fraction(5, 13), Fraction(12, 13))
    b = Fraction(2, 5)
    assert tree_partition(RootedTree.single(), lam, b) == (lam, GaussianRational(1))
    assert tree_field(RootedTree.single(), lam, b) == lam
    assert tree_field(RootedTree.path(2), lam, b) == lam * (lam + b) / (lam * b + 1)
    rng = random.Random(10)
    edges = random_tree_edges(10, rng)
    parents = _parents(10, edges)
    T = RootedTree.from_parent_array(parents)
    zp, zm = tree_partition(T, I_UNIT, b)
    assert zp == gr(brute_partition(10, edges, (0, 1), b, {0: 1}))
    assert zm == gr(brute_partition(10, edges, (0, 1), b, {0: -1}))


def _parents(n, edges):
    adj = {i: [] for i in range(n)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    parents = [-1] * n
    stack, seen = [0], {0}
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                parents[y] = x
                stack.append(y)
    return parents


@given(st.integers(1, 11), st.integers(0, 10 ** 6), st.fractions(min_value=0, max_value=2, max_denominator=30))
def test_tree_recursion_matches_bruteforce(n, seed, b):
    rng = random.Random(seed)
    edges = random_tree_edges(n, rng)
    lam = random_pythagorean_point(rng)
    T = RootedTree.from_parent_array(_parents(n, edges))
    zp, zm = tree_partition(T, gr(lam), b)
    assert zp == gr(brute_partition(n, edges, lam, b, {0: 1}))
    assert zm == gr(brute_partition(n, edges, lam, b, {0: -1}))


@given(st.integers(1, 7), st.integers(0, 10 ** 6))
def test_partition_function_matches_bruteforce(n, seed):
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
    lam = random_pythagorean_point(rng)
    b = Fraction(rng.randint(1, 9), 10)
    G = as_graph(n, edges)
    expected = gr(brute_partition(n, edges, lam, b))
    assert partition_function(G, gr(lam), b)[()] == expected
    assert partition_bruteforce(G, gr(lam), b) == expected


def test_pinned_weights_conjugation_on_small_graphs():
    lam = UnitPoint(Fraction(-7, 25), Fraction(24, 25))
    for n in range(2, 6):
        for edges in all_graphs(n):
            w = pinned_weights(as_graph(n, edges), 0, 1, lam, Fraction(3, 7))
            assert w.z_pp == lam ** n * w.z_mm.conj()
            assert w.z_pm == lam ** n * w.z_mp.conj()


def test_compiled_partition_is_linear_in_special_weight():
    G = cycle_graph(5)
    lam, b = UnitPoint(Fraction(3, 5), Fraction(-4, 5)), Fraction(1, 3)
    comp = compile_partition(G, lam, b, special=[0])
    for w in (GaussianRational(2, 1), GaussianRational(0, -3)):
        H = G.copy()
        H.fields[0] = w
        direct = partition_bruteforce(H, lam, b)
        assert comp({0: (w, GaussianRational(1))})[()] == direct


def test_path_transfer_examples():
    (m, b2) = path_transfer(2, HALF)
    assert b2 == HALF
    assert path_transfer(3, HALF)[1] == Fraction(4, 5)
    assert path_transfer(5, HALF)[1] == Fraction(40, 41)


@given(st.integers(2, 12), st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=40))
def test_path_interaction_matches_bruteforce(k, b):
    edges = [(i, i + 1) for i in range(k - 1)]
    lam = (1, 0)
    pp = brute_partition(k, edges, lam, b, {0: 1, k - 1: 1})[0]
    pm = brute_partition(k, edges, lam, b, {0: 1, k - 1: -1})[0]
    assert path_transfer(k, b)[1] == pm / pp


def test_polynomial_examples():
    b = Fraction(1, 3)
    assert partition_polynomial_in_lambda(complete_graph(2), b) == [1, 2 * b, 1]
    assert partition_polynomial_in_lambda(Graph([0]), b) == [1, 1]
    roots = lee_yang_zeros(Graph([0]), b)
    assert abs(roots[0].value + 1) < 1e-30
    star = RootedTree.star(3)
    coeffs = partition_polynomial_in_lambda(star, HALF)
    assert len(coeffs) == 5
    assert all(abs(abs(r.value) - 1) < 1e-10 for r in lee_yang_zeros(star, HALF))
    for r in lee_yang_zeros(complete_graph(2), b):
        with mpmath.workprec(200):
            expected = mpmath.mpc(-b.numerator / mpmath.mpf(b.denominator), mpmath.sqrt(1 - mpmath.mpf(1) / 9))
            assert min(abs(r.value - expected), abs(r.value - expected.conjugate())) < 1e-30


@given(st.integers(1, 6), st.integers(0, 10 ** 6))
def test_graph_json_round_trip(n, seed):
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
    G = as_graph(n, edges)
    G.fields[0] = GaussianRational(Fraction(1, 3), -2)
    H = Graph.from_json(G.to_json())
    assert H.to_json() == G.to_json()
    assert partition_function(H, I_UNIT, HALF)[()] == partition_function(G, I_UNIT, HALF)[()]


def test_enumeration_counts():
    assert [len(all_graphs(n)) for n in range(1, 9)] == [1, 2, 4, 11, 34, 156, 1044, 12346]
    assert [len(connected_graphs(n)) for n in range(1, 8)] == [1, 1, 2, 6, 21, 112, 853]
    assert sum(len(connected_bounded_degree(n, 3)) for n in range(1, 7)) == 49


def test_bruteforce_cap():
    with pytest.raises(TooLarge):
        count_table(Graph(list(range(30))), cap=20)
