"""Exact evaluation of ``Z_G(lam, b̂)`` from approximate norm or argument queries.

The pipeline recovers, for an edge ``e = uv``, the unit-modulus ratio
``R_goal = -r/t`` where ``g(θ) = t e^{iθ} + r`` is the partition function of
``G`` with ``e`` subdivided by a vertex ``s`` of activity ``e^{iθ}``.  A
binary search over ``θ`` locates ``θ_goal = arg R_goal`` using only noisy
values of ``|g|`` (or of ``arg g``); lattice rounding then makes the ratio
exact.  Three such ratios determine ``Z_G/Z_{G∖e}`` and a telescoping product
over the edges gives ``Z_G``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import gmpy2
from gmpy2 import mpc as gmpc, mpfr

from .errors import (
    BudgetExceeded,
    Indeterminate,
    InconsistentOracle,
    PreconditionViolated,
    SeparationFailure,
    ZeroDenominator,
)
from .exact import (
    MINUS_ONE,
    GaussianRational,
    UnitPoint,
    as_fraction,
    continued_fraction_round,
    format_gaussian,
    rational_circle_point,
)
from .ising import Graph, compile_partition, partition_function, tree_partition

TAU = Fraction(1, 500)
DEFAULT_K = Fraction(1001, 1000)
_THREE_FIFTHS_PI = 3 * math.pi / 5
_MPQ = type(gmpy2.mpq(0))


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


def _denominator_common(lam: GaussianRational, bhat: Fraction) -> int:
    q = math.lcm(lam.re.denominator, lam.im.denominator, bhat.denominator)
    return q


def lattice_bound(n: int, m: int, lam, bhat) -> int:
    """``M = 2^n |p|^m (|p'| + |p''|)^n q^{m+n}`` for ``b̂ = p/q`` and ``lam = (p' + i p'')/q``."""
    lam = GaussianRational.coerce(lam)
    bhat = as_fraction(bhat)
    q = _denominator_common(lam, bhat)
    p = bhat * q
    p1, p2 = lam.re * q, lam.im * q
    return int(2 ** n * abs(p) ** m * (abs(p1) + abs(p2)) ** n * q ** (m + n))


def lattice_bound_tight(n: int, m: int, lam, bhat) -> int:
    """Coordinate bound for ``r, t`` and their primed versions after clearing denominators.

    With ``c`` the denominator of ``lam`` and ``q`` that of ``b̂``, every
    spin configuration contributes a Gaussian rational whose denominator
    divides ``c^n q^{m+3}`` and whose scaled coordinates are at most
    ``c^n q^{m+3}``; there are at most ``2^n`` of them.
    """
    lam = GaussianRational.coerce(lam)
    bhat = as_fraction(bhat)
    c = math.lcm(lam.re.denominator, lam.im.denominator)
    return 2 ** n * c ** n * bhat.denominator ** (m + 3)


@dataclass(frozen=True)
class ReductionParams:
    """Accuracy chain of the reduction.

    ``epsilon`` controls the final rounding, ``kappa`` the width of the
    unreliable window around ``θ_goal`` and ``epsilon0..epsilon2`` the
    precision of the gadget trees and of their normalised probe values.
    The constructor refuses values that break any inequality the search
    and the rounding rely on.
    """

    n: int
    m: int
    k: int
    lam: GaussianRational
    bhat: Fraction
    M: int
    epsilon: Fraction
    kappa: Fraction
    epsilon2: Fraction
    epsilon1: Fraction
    epsilon0: Fraction
    K: Fraction = DEFAULT_K
    rho: float = math.pi / 40
    tau: Fraction = TAU
    mode: str = "strict"
    rounding_certified: bool = True

    def __post_init__(self):
        if not (self.epsilon0 < self.epsilon1 < self.epsilon2 < self.kappa < self.epsilon):
            raise PreconditionViolated("accuracy chain eps0 < eps1 < eps2 < kappa < eps is broken")
        if self.K < 1 or self.K > 1 + self.tau or 1 / self.K < 1 - self.tau:
            raise PreconditionViolated("noise factor K outside [1, 1 + tau]")
        if not Fraction(1, 100) > 2 * self.tau:
            raise PreconditionViolated("gap |t|/100 > 2 tau |t| fails")
        if 400 * self.kappa > self.epsilon / 2:
            raise PreconditionViolated("400 kappa must not exceed eps/2")
        if not 0 < self.rho <= math.pi / 40:
            raise PreconditionViolated("angle noise must lie in (0, pi/40]")
        certified = self.epsilon <= Fraction(1, 8 * self.M ** 4)
        if self.rounding_certified and not certified:
            raise PreconditionViolated("eps exceeds 1/(8 M^4): lattice rounding would not be certified")
        object.__setattr__(self, "rounding_certified", certified)

    @staticmethod
    def _chain(n, m, k, bhat, eps):
        kappa = eps / 1000
        eps2 = kappa * eps / 10 ** 5
        eps1 = eps2 / (2 ** (4 * n) * (2 * bhat) ** (2 * m))
        eps0 = eps1 / (k * 4 ** k)
        return kappa, eps2, eps1, eps0

    @classmethod
    def strict(cls, n: int, m: int, lam, bhat, k: int = 2, **kw) -> "ReductionParams":
        """The constants of the argument: ``ε = (10M)^{-16}`` with ``M`` from :func:`lattice_bound`.

        ``M`` is raised to the tight coordinate bound when that is larger so
        that rounding stays valid for the primed ratio as well.
        """
        lam = GaussianRational.coerce(lam)
        bhat = as_fraction(bhat)
        M = max(lattice_bound(n, m, lam, bhat), lattice_bound_tight(n, m, lam, bhat))
        eps = Fraction(1, (10 * M) ** 16)
        return cls(n, m, k, lam, bhat, M, eps, *cls._chain(n, m, k, bhat, eps), mode="strict", **kw)

    @classmethod
    def relaxed(cls, n: int, m: int, lam, bhat, k: int = 2, **kw) -> "ReductionParams":
        """Smallest accuracy that still certifies rounding: ``ε = (10M)^{-4}`` with the tight ``M``."""
        lam = GaussianRational.coerce(lam)
        bhat = as_fraction(bhat)
        M = lattice_bound_tight(n, m, lam, bhat)
        eps = Fraction(1, (10 * M) ** 4)
        return cls(n, m, k, lam, bhat, M, eps, *cls._chain(n, m, k, bhat, eps), mode="relaxed", **kw)

    @classmethod
    def custom(cls, n: int, m: int, lam, bhat, epsilon, k: int = 2, **kw) -> "ReductionParams":
        """Arbitrary ``ε``; rounding is flagged uncertified when ``ε > 1/(8M^4)``."""
        lam = GaussianRational.coerce(lam)
        bhat = as_fraction(bhat)
        eps = as_fraction(epsilon)
        M = lattice_bound_tight(n, m, lam, bhat)
        return cls(n, m, k, lam, bhat, M, eps, *cls._chain(n, m, k, bhat, eps), mode="custom",
                   rounding_certified=False, **kw)

    @property
    def working_bits(self) -> int:
        return int(math.log2(1 / self.kappa)) + 48

    def to_json(self) -> dict:
        def lg(x):
            return round(math.log10(x.numerator) - math.log10(x.denominator), 3)

        return {"mode": self.mode, "n": self.n, "m": self.m, "k": self.k, "lambda": format_gaussian(self.lam),
                "bhat": str(self.bhat), "M": self.M, "log10_epsilon": lg(self.epsilon),
                "log10_kappa": lg(self.kappa), "log10_epsilon2": lg(self.epsilon2),
                "log10_epsilon1": lg(self.epsilon1), "log10_epsilon0": lg(self.epsilon0),
                "K": str(self.K), "rho": self.rho, "tau": str(self.tau),
                "rounding_certified": self.rounding_certified}


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def _gmpc(z: GaussianRational):
    """High-precision complex value of an exact Gaussian rational (no float overflow)."""
    return gmpc(gmpy2.mpq(z.re.numerator, z.re.denominator), gmpy2.mpq(z.im.numerator, z.im.denominator))


class Oracle:
    """Noisy access to ``|Z|`` and ``arg Z``.

    Modes
    -----
    ``exact``
        returns the value itself (rounded to the working precision).
    ``factor``
        multiplies ``|Z|`` by ``K^u`` and shifts ``arg Z`` by ``ρ u`` with
        ``u`` uniform in ``[-1, 1]``.
    ``adversarial``
        always answers at the extreme allowed value, ``K^{±1}`` or ``±ρ``,
        with the sign drawn from the seeded generator.

    Noise is a deterministic function of the seed and the query index, so a
    run can be replayed exactly.  Values are returned as ``mpfr`` numbers,
    which are exact binary rationals.
    """

    MODES = ("exact", "factor", "adversarial")

    def __init__(self, mode: str = "exact", K=DEFAULT_K, rho: float = math.pi / 40, seed: int = 0,
                 record: bool = False):
        if mode not in self.MODES:
            raise PreconditionViolated(f"unknown oracle mode {mode!r}")
        self.mode = mode
        self.K = as_fraction(K)
        self.rho = rho
        self.seed = seed
        self.rng = random.Random(seed)
        self.calls = 0
        self.record = record
        self.transcript: list = []
        # shrink by one part in 2^40 so that rounding never leaves the allowed band
        self._logK = math.log(float(self.K)) * (1 - 2.0 ** -40)
        self._rho = rho * (1 - 2.0 ** -40)
        self._extreme = {1.0: math.exp(self._logK), -1.0: math.exp(-self._logK)}

    def _u(self) -> float:
        if self.mode == "exact":
            return 0.0
        if self.mode == "factor":
            return self.rng.uniform(-1.0, 1.0)
        return 1.0 if self.rng.random() < 0.5 else -1.0

    def norm(self, value) -> mpfr:
        """Estimate of ``|value|`` within factor ``K``."""
        return self.scale_norm(abs(value))

    def scale_norm(self, exact) -> mpfr:
        """Noisy version of an already computed modulus."""
        self.calls += 1
        u = self._u()
        # the factor needs no more than double precision; the product stays within K^{±1}
        if u:
            exact = exact * (self._extreme[u] if self.mode == "adversarial" else math.exp(u * self._logK))
        if self.record:
            self.transcript.append({"query": self.calls, "kind": "norm", "u": u})
        return exact

    def scale_norms(self, values) -> list:
        """Batch form of :meth:`scale_norm`; noise is drawn in query order."""
        if self.mode == "exact" and not self.record:
            self.calls += len(values)
            return list(values)
        return [self.scale_norm(v) for v in values]

    def arg(self, value) -> mpfr:
        """Estimate of ``arg(value)`` within ``ρ``."""
        self.calls += 1
        exact = gmpy2.phase(value)
        u = self._u()
        if self.record:
            self.transcript.append({"query": self.calls, "kind": "arg", "u": u})
        return exact + mpfr(u * self._rho) if u else exact

    def norm_query(self, G: Graph, lam, b) -> mpfr:
        """Noisy ``|Z_G(lam, b)|`` for a graph, evaluated exactly before noise."""
        return self.norm(_gmpc(partition_function(G, lam, b)[()]))

    def arg_query(self, G: Graph, lam, b) -> mpfr:
        return self.arg(_gmpc(partition_function(G, lam, b)[()]))


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------


@dataclass
class ProbeResponse:
    """One probe of ``g(θ) = t e^{iθ} + r``."""

    t: GaussianRational
    r: GaussianRational
    theta: Fraction
    g_value: complex
    estimate: float
    kind: str
    guarded: bool

    def to_json(self) -> dict:
        return {"theta": float(self.theta), "g": [self.g_value.real, self.g_value.imag],
                "estimate": self.estimate, "kind": self.kind, "guarded": self.guarded}


_COEFF_CACHE: dict = {}


def subdivision_coefficients(G: Graph, e, lam, bhat, variant: str = "plain") -> tuple[GaussianRational, GaussianRational]:
    """``(t, r)`` with ``Z_H = t·x + r`` when the subdivision vertex has activity ``x``.

    ``variant="primed"`` uses the path ``u–u'–s–v'–v`` with ``u', v'`` at
    activity ``-1``.
    """
    from .gadgets import _subdivide

    lam = GaussianRational.coerce(lam)
    bhat = as_fraction(bhat)
    u, v = e
    if not any({a, c} == {u, v} for a, c, _ in G.edges):
        raise PreconditionViolated(f"{e} is not an edge of the graph")
    key = (repr(G.to_json()), repr(e), lam, bhat, variant)
    if key in _COEFF_CACHE:
        return _COEFF_CACHE[key]
    H, s, helpers = _subdivide(G, e, variant)
    for x in helpers:
        H.fields[x] = MINUS_ONE
    comp = compile_partition(H, lam, bhat, [s])
    # coefficients are per unit weight of s, so Z_H = t·x + r for s-weights (x, 1)
    t = comp.coefficients.get((1, 0), GaussianRational(0))
    r = comp.coefficients.get((0, 0), GaussianRational(0))
    if len(_COEFF_CACHE) > 4096:
        _COEFF_CACHE.clear()
    _COEFF_CACHE[key] = (t, r)
    return t, r


class IdealProbe:
    """Probe ``|g(θ)|`` or ``arg g(θ)`` through an oracle, with ``g`` evaluated at high precision."""

    def __init__(self, t: GaussianRational, r: GaussianRational, oracle: Oracle, bits: int,
                 kappa: Optional[Fraction] = None, record: bool = False):
        if t.is_zero():
            raise ZeroDenominator("t vanishes; the probe curve is constant")
        self.t, self.r = t, r
        self.bits = bits
        self.ctx = gmpy2.context(precision=bits)
        with self.ctx:
            self._t = gmpc(gmpy2.mpq(t.re.numerator, t.re.denominator), gmpy2.mpq(t.im.numerator, t.im.denominator))
            self._r = gmpc(gmpy2.mpq(r.re.numerator, r.re.denominator), gmpy2.mpq(r.im.numerator, r.im.denominator))
            self.theta_goal = gmpy2.phase(-self._r / self._t)
            self.abs_t = abs(self._t)
            self._parts = (self._t.real, self._t.imag, self._r.real, self._r.imag)
        self.oracle = oracle
        self.kappa = kappa
        self.record = record
        self.responses: list[ProbeResponse] = []

    def value(self, theta):
        with self.ctx:
            th = mpfr(_mpq(theta))
            s, c = gmpy2.sin_cos(th)
            return self._t * gmpc(c, s) + self._r

    def guarded(self, theta) -> bool:
        """Whether ``θ`` is at least ``κ`` away from every lift of ``θ_goal``."""
        if self.kappa is None:
            return True
        d = (float(theta) - float(self.theta_goal)) % (2 * math.pi)
        return min(d, 2 * math.pi - d) >= float(self.kappa)

    def norm(self, theta):
        return self.norms([theta])[0]

    def arg(self, theta):
        return self.args([theta])[0]

    def _unit_points(self, thetas) -> list:
        """``e^{iθ}`` for each angle; evenly spaced batches cost one rotation per step."""
        out = []
        prev = point = step = rot = None
        for th in thetas:
            th = th if type(th) is _MPQ else _mpq(th)
            if prev is None:
                s, c = gmpy2.sin_cos(mpfr(th))
                point = gmpc(c, s)
            else:
                delta = th - prev
                if delta != step:
                    s, c = gmpy2.sin_cos(mpfr(delta))
                    step, rot = delta, gmpc(c, s)
                point = point * rot
            prev = th
            out.append(point)
        return out

    def norms(self, thetas) -> list:
        """Oracle estimates of ``|g(θ)|`` for a batch of angles.

        Points are chained by rotation, which loses about ``log2(len)`` bits
        against the guard bits of the working precision.
        """
        t, r = self._t, self._r
        with self.ctx:
            exact = [abs(t * e + r) for e in self._unit_points(thetas)]
        out = self.oracle.scale_norms(exact)
        if self.record:
            self._log(thetas, out, "norm")
        return out

    def args(self, thetas) -> list:
        """Oracle estimates of ``arg g(θ)`` for a batch of angles."""
        out = []
        with self.ctx:
            for th in thetas:
                s, c = gmpy2.sin_cos(mpfr(_mpq(th)))
                out.append(self.oracle.arg(self._t * gmpc(c, s) + self._r))
        if self.record:
            self._log(thetas, out, "arg")
        return out

    def _log(self, thetas, estimates, kind):
        for th, est in zip(thetas, estimates):
            g = complex(self.value(th))
            self.responses.append(ProbeResponse(self.t, self.r, _to_fraction(th), g, float(est), kind,
                                                self.guarded(th)))


class GadgetProbe:
    """Probe through the degree-3 probe graph with implemented field trees.

    For each ``θ`` a tree with field within ``ε₀`` of ``e^{iθ}`` is built and
    hung on the subdivision vertex; every edge becomes a decorated path.
    The normalised value ``Z_{H_θ}/(Q⁻_θ A_{++}^{m+1})`` approximates ``g(θ)``.
    """

    def __init__(self, G: Graph, e, params: ReductionParams, b, oracle: Oracle, T0=None,
                 variant: str = "plain", T_pi=None, seeds=None, delta: int = 3):
        from .gadgets import build_decorated_path, decorated_path_weights

        self.G, self.e, self.params, self.b = G, e, params, as_fraction(b)
        self.oracle = oracle
        self.T0, self.variant, self.T_pi, self.seeds, self.delta = T0, variant, T_pi, seeds, delta
        self.lam = UnitPoint.of(params.lam)
        path = build_decorated_path(params.k, T0)
        self.weights = decorated_path_weights(path, self.lam, self.b)
        self.edges_H = sum(mult for *_, mult in G.edges) + (1 if variant == "plain" else 3)
        self.last_tree = None

    def graph(self, theta: Fraction):
        from .gadgets import build_H_theta, implement_field

        target = rational_circle_point(theta, self.params.epsilon0 / 4)
        impl = implement_field(self.delta, self.b, self.lam, target, self.params.epsilon0 / 2, seeds=self.seeds)
        self.last_tree = impl
        probe = build_H_theta(self.G, self.e, self.params.k, impl.tree, self.T0, self.variant, self.T_pi)
        return probe, impl

    def evaluate(self, theta) -> tuple[GaussianRational, GaussianRational]:
        """Exact ``Z_{H_θ}`` and the normalising factor ``Q⁻_θ A_{++}^{m+1}`` (times ``Q⁻_π²`` if primed)."""
        theta = _to_fraction(theta)
        probe, impl = self.graph(theta)
        Z = partition_function(probe.gadget, self.lam, self.b)[()]
        _, q_minus = tree_partition(impl.tree, self.lam, self.b)
        scale = q_minus * self.weights.A_pp ** self.edges_H
        if self.variant == "primed":
            # each helper carries T_pi, whose weights replace (-1, 1) by about Q⁻_π·(-1, 1)
            _, qm_pi = tree_partition(self.T_pi, self.lam, self.b)
            scale = scale * qm_pi * qm_pi
        return Z, scale

    def normalised_value(self, theta) -> complex:
        Z, scale = self.evaluate(theta)
        return complex((Z / scale).to_mpc())

    def norms(self, thetas) -> list:
        return [self.norm(th) for th in thetas]

    def norm(self, theta):
        Z, scale = self.evaluate(theta)
        est = self.oracle.norm(_gmpc(Z))
        return est / abs(_gmpc(scale))


def probe(G: Graph, e, theta, oracle: Oracle, mode: str = "ideal", kind: str = "norm",
          params: Optional[ReductionParams] = None, lam=None, bhat=None, b=None, **gadget_kw):
    """Single probe of the subdivided graph at angle ``θ``."""
    theta = as_fraction(theta)
    if mode == "ideal":
        if lam is None or bhat is None:
            if params is None:
                raise PreconditionViolated("ideal probes need lam and bhat or params")
            lam, bhat = params.lam, params.bhat
        t, r = subdivision_coefficients(G, e, lam, bhat, gadget_kw.get("variant", "plain"))
        bits = params.working_bits if params else 256
        p = IdealProbe(t, r, oracle, bits, params.kappa if params else None, record=True)
        getattr(p, kind)(theta)
        return p.responses[-1]
    if mode == "gadget":
        if params is None or b is None:
            raise PreconditionViolated("gadget probes need params and the edge interaction b")
        gp = GadgetProbe(G, e, params, b, oracle, **gadget_kw)
        return gp.norm(theta)
    raise PreconditionViolated(f"unknown probe mode {mode!r}")


# ---------------------------------------------------------------------------
# Interval search
# ---------------------------------------------------------------------------


@dataclass
class Interval:
    """``[lo, lo + length]`` on the real line, representing an arc of the circle."""

    lo: object
    length: object

    @property
    def hi(self) -> Fraction:
        return self.lo + self.length

    def contains_angle(self, theta: float) -> bool:
        """Whether some lift ``θ + 2πh`` lies in the interval."""
        lo = float(self.lo)
        x = lo + (float(theta) - lo) % (2 * math.pi)
        return x <= float(self.hi)

    def to_json(self) -> dict:
        return {"lo": float(self.lo), "length": float(self.length)}


def _mpq(x) -> gmpy2.mpq:
    if isinstance(x, Fraction):
        return gmpy2.mpq(x.numerator, x.denominator)
    return gmpy2.mpq(x)


def _to_fraction(x) -> Fraction:
    x = _mpq(x)
    return Fraction(int(x.numerator), int(x.denominator))


def _dyadic_down(x, bits: int) -> gmpy2.mpq:
    x = _mpq(x)
    s = gmpy2.mpz(1) << bits
    return gmpy2.mpq(gmpy2.f_div(x.numerator * s, x.denominator) - 1, s)


def _dyadic_up(x, bits: int) -> gmpy2.mpq:
    x = _mpq(x)
    s = gmpy2.mpz(1) << bits
    return gmpy2.mpq(gmpy2.c_div(x.numerator * s, x.denominator) + 1, s)


def _two_pi_bounds(bits: int) -> tuple[Fraction, Fraction]:
    with gmpy2.context(precision=bits + 20):
        tp = gmpy2.mpq(*(2 * gmpy2.const_pi()).as_integer_ratio())
    eps = gmpy2.mpq(1, gmpy2.mpz(1) << bits)
    return tp - eps, tp + eps


def _signs(values) -> list[int]:
    out = []
    for a, c in zip(values, values[1:]):
        out.append(1 if c > a else (-1 if c < a else 0))
    return out


def locate_interval_norm(norm_probe: Callable, bits: int = 128) -> Interval:
    """Arc of length at most ``2`` containing ``θ_goal``, from 19 norm probes at ``θ_j = j/3``.

    With ``j*`` the index of the step containing ``θ_goal``, the probe values
    decrease on ``[j*-8, j*-1]`` and increase on ``[j*+2, j*+9]`` (indices
    mod 19).  Candidates consistent with that pattern lie within three steps
    of ``j*``.
    """
    vals = norm_probe([gmpy2.mpq(j, 3) for j in range(19)])
    diffs = _signs(vals + [vals[0]])  # cyclic: step 18 closes the circle
    cands = []
    for c in range(19):
        down = all(diffs[(c - w) % 19] == -1 for w in range(2, 9))
        up = all(diffs[(c + w) % 19] == 1 for w in range(2, 9))
        if down and up:
            cands.append(c)
    if not cands:
        raise InconsistentOracle("no index fits the monotonicity pattern of |g|")
    start = None
    for c0 in cands:
        if all((c - c0) % 19 <= 5 for c in cands):
            start = c0
            break
    if start is None:
        raise InconsistentOracle("candidate indices are spread over the circle")
    span = max((c - start) % 19 for c in cands)
    two_pi_lo, two_pi_hi = _two_pi_bounds(bits)
    lo = gmpy2.mpq(start, 3)
    end = start + span + 1
    if end >= 19:
        hi = gmpy2.mpq(end - 19, 3) + two_pi_hi
    else:
        hi = gmpy2.mpq(end, 3)
    if hi - lo >= gmpy2.mpq(2094, 1000):
        raise InconsistentOracle("located arc is not shorter than 2π/3")
    return Interval(lo, hi - lo)


def refine_interval_norm(norm_probe: Callable, arc: Interval, bits: int) -> Interval:
    """Cut the arc to at most ``7/19`` of its length using 20 norm probes."""
    lo, ell = _mpq(arc.lo), _mpq(arc.length)
    phis = [lo + ell * j / 19 for j in range(20)]
    vals = norm_probe(phis)
    diffs = _signs(vals)
    # down_ok[c]: all steps before c-1 decrease; up_ok[c]: all steps from c+2 on increase
    down_ok = [True] * 20
    for c in range(2, 20):
        down_ok[c] = down_ok[c - 1] and diffs[c - 2] == -1
    up_ok = [True] * 21
    for c in range(16, -1, -1):
        up_ok[c] = up_ok[c + 1] and diffs[c + 2] == 1
    cands = [c for c in range(19) if down_ok[c] and up_ok[c]]
    if not cands:
        raise InconsistentOracle("no index fits the monotonicity pattern of |g|")
    a, z = min(cands), max(cands)
    if z - a > 6:
        raise InconsistentOracle("candidate indices are too spread out")
    new_lo = _dyadic_down(phis[a], bits)
    new_hi = _dyadic_up(phis[z + 1], bits)
    return Interval(new_lo, new_hi - new_lo)


def _circ_dist(a, c) -> float:
    x = (float(a) - float(c)) % (2 * math.pi)
    return min(x, 2 * math.pi - x)


def refine_interval_arg(arg_probe: Callable, theta1: Fraction, ell: Fraction, bits: int) -> Interval:
    """Cut ``[θ₁, θ₁ + ℓ]`` to ``4ℓ/26`` using argument probes.

    ``arg g`` moves by half the change in ``θ`` except across ``θ_goal``,
    where it jumps by ``π``; a jump of at least ``3π/5`` across two steps
    marks the step containing ``θ_goal``.  Probes extend three steps beyond
    each end of the interval so that the flanking pairs exist for every
    step.
    """
    theta1, ell = _mpq(theta1), _mpq(ell)
    phis = {j: theta1 + ell * j / 26 for j in range(-3, 30)}
    keys = sorted(phis)
    est = dict(zip(keys, arg_probe([phis[j] for j in keys])))

    def D(i, j):
        x = float(est[i] - est[j]) % (2 * math.pi)
        return min(x, 2 * math.pi - x)

    # any firing pair brackets θ_goal up to κ, including pairs next to an
    # unreliable probe, so the scan covers every pair whose midpoint has
    # two probed neighbours on each side
    mid = None
    for j in range(-1, 28):
        if D(j - 1, j + 1) >= _THREE_FIFTHS_PI:
            mid = j
            break
        if D(j, j + 2) >= _THREE_FIFTHS_PI:
            mid = j + 1
            break
    if mid is None:
        raise InconsistentOracle("no argument jump found")
    new_lo = _dyadic_down(phis[mid - 2], bits)
    new_hi = _dyadic_up(phis[mid + 2], bits)
    return Interval(new_lo, new_hi - new_lo)


def search_norm(norm_probe: Callable, kappa: Fraction, bits: int, trace: Optional[list] = None,
                max_rounds: int = 100_000) -> Interval:
    arc = locate_interval_norm(norm_probe, bits)
    if trace is not None:
        trace.append({"step": "locate", **arc.to_json()})
    rounds = 0
    limit = 100 * _mpq(kappa)
    while arc.length > limit:
        arc = refine_interval_norm(norm_probe, arc, bits)
        rounds += 1
        if trace is not None:
            trace.append({"step": "refine", **arc.to_json()})
        if rounds > max_rounds:
            raise BudgetExceeded("norm search did not converge", rounds=rounds)
    return arc


def search_arg(arg_probe: Callable, kappa: Fraction, bits: int, trace: Optional[list] = None,
               max_rounds: int = 100_000) -> Interval:
    arc = Interval(gmpy2.mpq(0), gmpy2.mpq(63, 10))
    rounds = 0
    limit = 100 * _mpq(kappa)
    while arc.length > limit:
        arc = refine_interval_arg(arg_probe, arc.lo, arc.length, bits)
        rounds += 1
        if trace is not None:
            trace.append({"step": "refine-arg", **arc.to_json()})
        if rounds > max_rounds:
            raise BudgetExceeded("argument search did not converge", rounds=rounds)
    return arc


# ---------------------------------------------------------------------------
# Ratio recovery
# ---------------------------------------------------------------------------


@dataclass
class RatioRecovery:
    """Outcome of one ratio recovery with its audit trail."""

    ratio: GaussianRational
    theta_hat: Fraction
    theta_goal: float
    theta_error: float
    calls: int
    rounding: dict
    kappa: float = 0.0
    trace: list = field(default_factory=list)

    @property
    def error_ratio(self) -> float:
        """``|θ̂ - θ_goal| / (400κ)``; at most 1 on a correct run."""
        return self.theta_error / (400 * self.kappa)

    def to_json(self) -> dict:
        return {"ratio": format_gaussian(self.ratio), "theta_hat": float(self.theta_hat),
                "theta_goal": self.theta_goal, "theta_error": self.theta_error,
                "error_ratio": self.error_ratio, "calls": self.calls,
                "rounding": self.rounding, "trace": self.trace}


def round_to_lattice(theta_hat: Fraction, params: ReductionParams) -> tuple[UnitPoint, dict]:
    """Exact ``R_goal`` from an angle within ``ε/2`` of its argument."""
    eps = params.epsilon
    approx = rational_circle_point(theta_hat, eps / 2)
    K = 2 * params.M ** 2
    re = continued_fraction_round(approx.re, K)
    im = continued_fraction_round(approx.im, K)
    info = {"K": K, "approx_bits": approx.bit_size()}
    if re is None or im is None:
        raise SeparationFailure("no lattice value within the rounding radius")
    if re * re + im * im != 1:
        raise SeparationFailure("rounded value is not on the unit circle")
    info["re"], info["im"] = str(re), str(im)
    return UnitPoint(re, im), info


def recover_ratio(G: Graph, e, oracle: Oracle, params: ReductionParams, variant: str = "plain",
                  kind: str = "norm", record: bool = False) -> RatioRecovery:
    """Exact ``R_{G,e}`` (plain) or ``z₋₋/z₊₊`` (primed) from oracle answers alone.

    The probed polynomial is evaluated in ideal mode; only the oracle's noisy
    answers reach the search.  ``|θ̂ - θ_goal| ≤ 400κ`` is measured and
    recorded for audit.
    """
    t, r = subdivision_coefficients(G, e, params.lam, params.bhat, variant)
    bits = params.working_bits
    p = IdealProbe(t, r, oracle, bits, params.kappa, record=record)
    start = oracle.calls
    trace: list = []
    if kind == "norm":
        arc = search_norm(p.norms, params.kappa, bits, trace if record else None)
    elif kind == "arg":
        arc = search_arg(p.args, params.kappa, bits, trace if record else None)
    else:
        raise PreconditionViolated("kind must be 'norm' or 'arg'")
    theta_hat = _to_fraction(arc.lo + arc.length / 2)
    goal = float(p.theta_goal)
    with p.ctx:
        two_pi = 2 * gmpy2.const_pi()
        diff = gmpy2.fmod(mpfr(_mpq(theta_hat)) - p.theta_goal, two_pi)
        if diff < 0:
            diff += two_pi
        err = float(min(diff, two_pi - diff))
    Rgoal, info = round_to_lattice(theta_hat, params)
    ratio = -Rgoal
    if record:
        trace.extend(resp.to_json() for resp in p.responses)
    return RatioRecovery(ratio, theta_hat, goal, err, oracle.calls - start, info, float(params.kappa), trace)


# ---------------------------------------------------------------------------
# Edge ratio and telescoping
# ---------------------------------------------------------------------------


def _ratio_form(A, B, C, x, y):
    """``(A² + ABx + B²y)/(A²y + ACx + C²)``: the probed ratio with ``z₊₊`` normalised to 1."""
    return (A * A + A * B * x + B * B * y) / (A * A * y + A * C * x + C * C)


def extended_graph(G: Graph, e) -> tuple[Graph, tuple]:
    """``G∖e`` with the path ``u–u'–v'–v``; the new edge of interest is ``u'v'``."""
    u, v = e
    H = G.without_edge(u, v)
    up, vp = ("u'",), ("v'",)
    H.add_vertex(up)
    H.add_vertex(vp)
    H.add_edge(u, up)
    H.add_edge(up, vp)
    H.add_edge(vp, v)
    return H, (up, vp)


@dataclass
class EdgeRestoration:
    ratio: GaussianRational
    branch: str
    r: GaussianRational
    r_prime: GaussianRational
    r_double_prime: Optional[GaussianRational]
    calls: int
    recoveries: list

    def to_json(self) -> dict:
        return {"ratio": format_gaussian(self.ratio), "branch": self.branch, "r": format_gaussian(self.r),
                "r_prime": format_gaussian(self.r_prime),
                "r_double_prime": format_gaussian(self.r_double_prime) if self.r_double_prime is not None else None,
                "calls": self.calls, "recoveries": [rc.to_json() for rc in self.recoveries]}


def restore_edge_ratio(G: Graph, e, oracle: Oracle, params: ReductionParams, kind: str = "norm",
                       record: bool = False) -> EdgeRestoration:
    """Exact ``Z_G(lam, b̂)/Z_{G∖e}(lam, b̂)`` from three recovered ratios."""
    lam = params.lam
    bhat = GaussianRational(params.bhat)
    one = GaussianRational(1)
    A, B, C = bhat, one, one
    A1, B1, C1 = bhat * (lam + 1), one + bhat * bhat * lam, bhat * bhat + lam
    rec = []
    R1 = recover_ratio(G, e, oracle, params, "plain", kind, record)
    rec.append(R1)
    Gp, ep = extended_graph(G, e)
    # the extended graph has two more vertices and edges; the lattice bound must cover it
    p2 = _params_for(params, G.n + 2, sum(mm for *_, mm in G.edges) + 2)
    R2 = recover_ratio(Gp, ep, oracle, p2, "plain", kind, record)
    rec.append(R2)
    r, r1 = R1.ratio, R2.ratio
    calls = R1.calls + R2.calls
    if r == B / C and r1 == B1 / C1:
        return EdgeRestoration(GaussianRational(params.bhat), "z++ = 0", r, r1, None, calls, rec)
    R3 = recover_ratio(G, e, oracle, params, "primed", kind, record)
    rec.append(R3)
    calls += R3.calls
    y = R3.ratio
    if r == _ratio_form(A, B, C, 0, y) and r1 == _ratio_form(A1, B1, C1, 0, y):
        return EdgeRestoration(one, "z+- + z-+ = 0", r, r1, y, calls, rec)
    if r * C != B:
        x = (A * A + B * B * y - r * A * A * y - r * C * C) / (A * (r * C - B))
    elif r1 * C1 != B1:
        x = (A1 * A1 + B1 * B1 * y - r1 * A1 * A1 * y - r1 * C1 * C1) / (A1 * (r1 * C1 - B1))
    else:
        raise Indeterminate("both probed ratios are degenerate")
    den = one + y + x
    if den.is_zero():
        raise ZeroDenominator("Z of the edge-deleted graph vanishes")
    return EdgeRestoration((one + y + bhat * x) / den, "general", r, r1, y, calls, rec)


def _params_for(params: ReductionParams, n: int, m: int) -> ReductionParams:
    if params.mode == "strict":
        return ReductionParams.strict(n, m, params.lam, params.bhat, params.k, K=params.K, rho=params.rho)
    if params.mode == "relaxed":
        return ReductionParams.relaxed(n, m, params.lam, params.bhat, params.k, K=params.K, rho=params.rho)
    return params


@dataclass
class TelescopingResult:
    value: GaussianRational
    factors: list
    calls: int
    edges: list
    transcript: list
    worst_error_ratio: float = 0.0

    def to_json(self) -> dict:
        return {"value": format_gaussian(self.value), "calls": self.calls,
                "worst_error_ratio": self.worst_error_ratio,
                "edges": [list(map(str, e)) for e in self.edges],
                "factors": [format_gaussian(f) for f in self.factors], "transcript": self.transcript}


def partition_via_oracle(G: Graph, lam, bhat, oracle: Oracle, mode: str = "relaxed", kind: str = "norm",
                         record: bool = False, K=DEFAULT_K, rho: float = math.pi / 40) -> TelescopingResult:
    """``Z_G(lam, b̂)`` as ``(1 + lam)^n`` times one restored ratio per edge."""
    lam = GaussianRational.coerce(lam)
    bhat = as_fraction(bhat)
    if lam == MINUS_ONE:
        raise PreconditionViolated("lam = -1 is excluded; use the odd-subgraph expansion instead")
    if G.attachments or any(G.fields.values()):
        raise PreconditionViolated("the telescoping evaluation expects a plain graph")
    if G.max_degree() > 3:
        raise PreconditionViolated("graph must have maximum degree at most 3")
    edges = []
    for u, v, mult in G.edges:
        if mult != 1:
            raise PreconditionViolated("multigraphs are not supported")
        edges.append((u, v))
    value = (lam + 1) ** G.n
    cur = Graph(list(G.vertices))
    factors, transcript = [], []
    calls = 0
    worst = 0.0
    for idx, (u, v) in enumerate(edges):
        cur.add_edge(u, v)
        m = idx + 1
        maker = {"strict": ReductionParams.strict, "relaxed": ReductionParams.relaxed}[mode]
        params = maker(G.n, m, lam, bhat, K=K, rho=rho)
        res = restore_edge_ratio(cur.copy(), (u, v), oracle, params, kind, record)
        factors.append(res.ratio)
        value = value * res.ratio
        calls += res.calls
        transcript.append({"edge": [str(u), str(v)], "params": params.to_json(), **res.to_json()})
        worst = max([worst] + [rc.error_ratio for rc in res.recoveries])
    return TelescopingResult(value, factors, calls, edges, transcript, worst)
