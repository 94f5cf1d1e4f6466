import math
from fractions import Fraction

import gmpy2
import pytest

from isingcircle.errors import InconsistentOracle, PreconditionViolated
from isingcircle.exact import GaussianRational, I_UNIT, UnitPoint, rational_circle_point
from isingcircle.ising import Graph, complete_graph, cycle_graph, partition_bruteforce
from isingcircle.reduction import (
    IdealProbe,
    Interval,
    Oracle,
    ReductionParams,
    locate_interval_norm,
    partition_via_oracle,
    probe,
    recover_ratio,
    refine_interval_arg,
    refine_interval_norm,
    restore_edge_ratio,
    search_norm,
    subdivision_coefficients,
)

BHAT = Fraction(40, 41)
LAM = UnitPoint(Fraction(3, 5), Fraction(4, 5))
TAU_FLOAT = 1 / 500


def _synthetic_probe(oracle, kappa=None):
    r = -rational_circle_point(math.pi / 4, Fraction(1, 10 ** 12))
    return IdealProbe(GaussianRational(1), r, oracle, 200, kappa)


def test_params_chain_is_monotone():
    for maker in (ReductionParams.strict, ReductionParams.relaxed):
        p = maker(4, 5, I_UNIT, BHAT)
        assert p.epsilon0 < p.epsilon1 < p.epsilon2 < p.kappa < p.epsilon
        assert p.rounding_certified


def test_params_refuse_bad_noise():
    with pytest.raises(PreconditionViolated):
        ReductionParams.relaxed(3, 3, I_UNIT, BHAT, K=Fraction(11, 10))
    with pytest.raises(PreconditionViolated):
        ReductionParams.relaxed(3, 3, I_UNIT, BHAT, rho=1.0)


def test_probe_at_antipode_gives_twice_t():
    oracle = Oracle("exact")
    G = complete_graph(2)
    t, r = subdivision_coefficients(G, (0, 1), I_UNIT, BHAT)
    p = IdealProbe(t, r, oracle, 200)
    goal = float(p.theta_goal)
    est = float(p.norm(Fraction(goal + math.pi).limit_denominator(10 ** 12)))
    assert abs(est / (2 * abs(complex(t.to_mpc()))) - 1) < TAU_FLOAT


def test_probe_response_guard_flag():
    params = ReductionParams.relaxed(2, 1, I_UNIT, BHAT)
    G = complete_graph(2)
    t, r = subdivision_coefficients(G, (0, 1), I_UNIT, BHAT)
    goal = float(IdealProbe(t, r, Oracle(), 200).theta_goal)
    near = probe(G, (0, 1), Fraction(goal), Oracle(), params=params)
    far = probe(G, (0, 1), Fraction(goal + 1), Oracle(), params=params)
    assert not near.guarded and far.guarded


def test_probe_needs_parameters():
    with pytest.raises(PreconditionViolated):
        probe(complete_graph(2), (0, 1), Fraction(1), Oracle())


@pytest.mark.parametrize("mode", ["exact", "adversarial"])
def test_locate_synthetic(mode):
    p = _synthetic_probe(Oracle(mode, seed=3))
    arc = locate_interval_norm(p.norms)
    assert arc.contains_angle(math.pi / 4)
    assert float(arc.length) < 2 * math.pi / 3


def test_locate_rejects_constant_oracle():
    with pytest.raises(InconsistentOracle):
        locate_interval_norm(lambda thetas: [gmpy2.mpfr(1)] * len(thetas))


def test_refine_thirty_rounds():
    p = _synthetic_probe(Oracle("exact"))
    arc = Interval(gmpy2.mpq(0), gmpy2.mpq(2))
    for _ in range(30):
        arc = refine_interval_norm(p.norms, arc, 200)
    assert float(arc.length) <= 2 * 2.0 ** -30
    assert arc.contains_angle(float(p.theta_goal))


def test_refine_arg_brackets_goal():
    p = _synthetic_probe(Oracle("adversarial", seed=1))
    arc = refine_interval_arg(p.args, Fraction(0), Fraction(63, 10), 200)
    assert arc.contains_angle(math.pi / 4)
    assert float(arc.length) <= 4 * 6.3 / 26 + 1e-9


def test_search_respects_kappa():
    kappa = Fraction(1, 10 ** 12)
    p = _synthetic_probe(Oracle("factor", seed=5), kappa)
    arc = search_norm(p.norms, kappa, 200)
    assert float(arc.length) <= 100 * float(kappa)
    assert arc.contains_angle(float(p.theta_goal))


def test_recover_ratio_K2():
    G = complete_graph(2)
    params = ReductionParams.relaxed(2, 1, I_UNIT, BHAT)
    rec = recover_ratio(G, (0, 1), Oracle("adversarial", seed=2), params)
    lam = GaussianRational.coerce(I_UNIT)
    assert rec.ratio == ((lam * BHAT + 1) / (lam + BHAT)) ** 2
    assert rec.ratio.norm2() == 1
    assert rec.error_ratio <= 1


def test_recover_primed_ratio_K2():
    G = complete_graph(2)
    params = ReductionParams.relaxed(2, 1, LAM, BHAT)
    rec = recover_ratio(G, (0, 1), Oracle("factor", seed=7), params, variant="primed")
    lam = GaussianRational.coerce(LAM)
    assert rec.ratio == 1 / (lam * lam)


def test_recover_ratio_arg_oracle():
    G = complete_graph(2)
    params = ReductionParams.relaxed(2, 1, I_UNIT, BHAT)
    rec = recover_ratio(G, (0, 1), Oracle("adversarial", seed=9), params, kind="arg")
    lam = GaussianRational.coerce(I_UNIT)
    assert rec.ratio == ((lam * BHAT + 1) / (lam + BHAT)) ** 2


def test_restore_edge_ratio_K2():
    G = complete_graph(2)
    params = ReductionParams.relaxed(2, 1, LAM, BHAT)
    res = restore_edge_ratio(G, (0, 1), Oracle("exact"), params)
    lam = GaussianRational.coerce(LAM)
    assert res.ratio == (lam * lam + 1 + lam * 2 * BHAT) / (lam + 1) ** 2


def test_restore_edge_ratio_triangle():
    G = cycle_graph(3)
    params = ReductionParams.relaxed(3, 3, I_UNIT, BHAT)
    res = restore_edge_ratio(G, (0, 1), Oracle("exact"), params)
    expect = partition_bruteforce(G, I_UNIT, BHAT) / partition_bruteforce(G.without_edge(0, 1), I_UNIT, BHAT)
    assert res.ratio == expect


def test_edgeless_needs_no_calls():
    oracle = Oracle("exact")
    out = partition_via_oracle(Graph([0, 1, 2]), I_UNIT, BHAT, oracle)
    assert out.value == (GaussianRational.coerce(I_UNIT) + 1) ** 3
    assert out.calls == 0 and oracle.calls == 0


def test_triangle_exact_oracle():
    G = complete_graph(3)
    out = partition_via_oracle(G, I_UNIT, BHAT, Oracle("exact"))
    assert out.value == partition_bruteforce(G, I_UNIT, BHAT)
    assert out.worst_error_ratio <= 1


def test_four_cycle_adversarial():
    G = cycle_graph(4)
    out = partition_via_oracle(G, I_UNIT, BHAT, Oracle("adversarial", seed=11))
    assert out.value == partition_bruteforce(G, I_UNIT, BHAT)


def test_oracle_noise_is_replayable():
    a = Oracle("factor", seed=4)
    b = Oracle("factor", seed=4)
    xs = [a.norm(gmpy2.mpc(3, 4)) for _ in range(5)]
    ys = [b.norm(gmpy2.mpc(3, 4)) for _ in range(5)]
    assert xs == ys
    assert all(5 / 1.001 <= float(x) <= 5 * 1.001 for x in xs)


def test_oracle_rejects_unknown_mode():
    with pytest.raises(PreconditionViolated):
        Oracle("gadget")


def test_telescoping_rejects_high_degree():
    G = Graph.from_edges([(0, 1), (0, 2), (0, 3), (0, 4)])
    with pytest.raises(PreconditionViolated):
        partition_via_oracle(G, I_UNIT, BHAT, Oracle())
