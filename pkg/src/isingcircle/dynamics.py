"""Circle maps of the Ising tree recursion and the dynamics built on them.

The central object is ``z -> lam * ((z + b)/(b z + 1))**k`` acting on the
unit circle.  Exact evaluation lives in :func:`apply_map`; everything that
needs a real-analytic view (fixed points, image lengths, orbits beyond the
exact budget) works in angle space through the continuous lift

    psi(phi) = 2 * arctan(c * tan(phi / 2)),   c = (1 - b)/(1 + b),

of the Moebius factor, so that the lifted map is
``F(phi) = arg(lam) + k * psi(phi)`` with ``F(phi + 2π) = F(phi) + 2πk``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import mpmath
from mpmath import mp, mpf, mpc

from .errors import (
    BudgetExceeded,
    CoverViolated,
    HypothesisFailed,
    Indeterminate,
    NoConvergence,
    PreconditionViolated,
)
from .exact import (
    DEFAULT_PREC,
    MINUS_ONE,
    ONE,
    Angle,
    CircularArc,
    GaussianRational,
    UnitPoint,
    as_fraction,
    gaussian_from_mpc,
    point_angle,
)

Number = Union[Fraction, mpf]


# ---------------------------------------------------------------------------
# Map parameters and exact evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MapParams:
    """Parameters of ``f(z) = lam * ((z + b)/(b z + 1))**k``."""

    lam: UnitPoint
    k: int
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lam", UnitPoint.of(self.lam))
        object.__setattr__(self, "b", as_fraction(self.b))
        if self.k < 1:
            raise PreconditionViolated("degree k must be at least 1")
        if not 0 < self.b < 1:
            raise PreconditionViolated("b must lie strictly between 0 and 1")


def mobius_factor(b, z: GaussianRational) -> GaussianRational:
    """Exact ``(z + b)/(b z + 1)``."""
    return (z + b) / (z * b + 1)


def apply_map(p: MapParams, z: GaussianRational) -> UnitPoint:
    """Exact image of a circle point under ``f_{lam,k}``."""
    h = mobius_factor(p.b, z)
    out = p.lam * (h ** p.k)
    return UnitPoint(out.re, out.im)


def apply_map_general(lam: GaussianRational, k: int, b, z: GaussianRational) -> GaussianRational:
    """Same formula without the unit-circle check (used for arbitrary activities)."""
    return lam * (mobius_factor(b, z) ** k)


def apply_map_mp(lam: mpc, k: int, b: mpf, z: mpc) -> mpc:
    return lam * ((z + b) / (b * z + 1)) ** k


def derivative_magnitude(k: int, b, z) -> Number:
    """``|f_k'(z)| = k(1 - b²)/(b² + 2b Re z + 1)``; exact for exact ``z``.

    The value does not depend on ``lam``.
    """
    b = as_fraction(b)
    if isinstance(z, GaussianRational):
        return Fraction(k) * (1 - b * b) / (b * b + 2 * b * Fraction(z.re) + 1)
    bm = mpf(b.numerator) / b.denominator
    x = mpc(z).real
    return k * (1 - bm * bm) / (bm * bm + 2 * bm * x + 1)


def derivative_at_angle(k: int, b, phi: mpf) -> mpf:
    bm = _mpf(b)
    return k * (1 - bm * bm) / (1 + bm * bm + 2 * bm * mpmath.cos(phi))


def _mpf(x) -> mpf:
    if isinstance(x, mpf):
        return x
    f = as_fraction(x)
    return mpf(f.numerator) / f.denominator


# ---------------------------------------------------------------------------
# Angle-space lift
# ---------------------------------------------------------------------------


def psi(phi: mpf, c: mpf) -> mpf:
    """Continuous increasing lift of the Moebius factor with multiplier ``c`` at 1."""
    x = phi / 2
    s, co = mpmath.sin(x), mpmath.cos(x)
    return phi + 2 * mpmath.atan((c - 1) * s * co / (co * co + c * s * s))


@dataclass(frozen=True)
class LiftedMap:
    """Lift ``F(phi) = theta + k * psi(phi)`` of a circle map to the real line."""

    theta: mpf
    k: int
    b: Fraction

    @classmethod
    def of(cls, p: MapParams) -> "LiftedMap":
        return cls(point_angle(p.lam).mp_value(mp.prec), p.k, p.b)

    @classmethod
    def from_angle(cls, theta, k: int, b) -> "LiftedMap":
        return cls(mpf(theta), k, as_fraction(b))

    @property
    def c(self) -> mpf:
        bm = _mpf(self.b)
        return (1 - bm) / (1 + bm)

    def __call__(self, phi) -> mpf:
        return self.theta + self.k * psi(mpf(phi), self.c)

    def derivative(self, phi) -> mpf:
        return derivative_at_angle(self.k, self.b, mpf(phi))

    def inverse(self, y) -> mpf:
        """The preimage branch with ``F(inverse(y)) = y``."""
        return psi((mpf(y) - self.theta) / self.k, 1 / self.c)


# ---------------------------------------------------------------------------
# Fixed points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedPoint:
    """A fixed point on the circle with its derivative magnitude."""

    point: Optional[UnitPoint]
    approx: mpc
    multiplier: Number
    stability: str
    residual: mpf

    @property
    def angle(self) -> mpf:
        a = mpmath.arg(self.approx)
        return a if a >= 0 else a + 2 * mp.pi


def _stability(mult, tol) -> str:
    if isinstance(mult, Fraction):
        if mult == 1:
            return "parabolic"
    elif abs(mult - 1) <= tol:
        return "parabolic"
    return "attracting" if mult < 1 else "repelling"


def gaussian_sqrt(d: GaussianRational) -> Optional[GaussianRational]:
    """Exact square root in Q(i) if one exists."""
    if d.is_zero():
        return GaussianRational(0)
    n = d.norm2()
    m = _rational_sqrt(Fraction(n))
    if m is None:
        return None
    x = _rational_sqrt((m + Fraction(d.re)) / 2)
    if x is None:
        return None
    if x == 0:
        y = _rational_sqrt((m - Fraction(d.re)) / 2)
        if y is None:
            return None
        return GaussianRational(0, y)
    y = Fraction(d.im) / (2 * x)
    return GaussianRational(x, y)


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def fixed_points_on_circle(p: MapParams, tol=Fraction(1, 10 ** 12), grid: int = 4096,
                           prec: int = DEFAULT_PREC, max_iter: int = 600) -> list[FixedPoint]:
    """Fixed points of ``f_{lam,k}`` on the unit circle.

    For ``k = 1`` the quadratic ``b z² + (1 - lam) z - lam b = 0`` is solved
    exactly when its discriminant is a square in Q(i) and at high precision
    otherwise; the Moebius class decides whether the roots lie on the circle.
    For ``k ≥ 2`` the roots of ``F(phi) - phi ∈ 2πZ`` are isolated on a grid
    and refined by bisection.
    """
    tol_m = _mpf(tol)
    with mp.workprec(prec):
        if p.k == 1:
            return _fixed_points_k1(p, tol_m)
        return _fixed_points_general(p, tol_m, grid, max_iter)


def _fixed_point_record(p: MapParams, z, tol) -> FixedPoint:
    if isinstance(z, GaussianRational):
        pt = UnitPoint(z.re, z.im)
        mult = derivative_magnitude(p.k, p.b, pt)
        approx = pt.to_mpc()
        res = abs(apply_map(p, pt).to_mpc() - approx)
        return FixedPoint(pt, approx, mult, _stability(mult, tol), res)
    mult = derivative_magnitude(p.k, p.b, z)
    res = abs(apply_map_mp(p.lam.to_mpc(), p.k, _mpf(p.b), z) - z)
    return FixedPoint(None, z, mult, _stability(mult, tol), res)


def _fixed_points_k1(p: MapParams, tol) -> list[FixedPoint]:
    cls = mobius_classify(p.lam, p.b)
    if cls.kind == "elliptic":
        return []
    lam, b = p.lam, p.b
    lin = GaussianRational(1) - lam
    disc = lin * lin + lam * (4 * b * b)
    root = gaussian_sqrt(disc)
    out = []
    if root is not None:
        cands = {(-lin + root) / (2 * b), (-lin - root) / (2 * b)}
        for z in sorted(cands, key=lambda w: (w.re, w.im)):
            out.append(_fixed_point_record(p, z, tol))
    else:
        s = mpmath.sqrt(disc.to_mpc())
        for sg in (1, -1):
            z = (-lin.to_mpc() + sg * s) / (2 * _mpf(b))
            z = z / abs(z)
            out.append(_fixed_point_record(p, z, tol))
    return out


def _fixed_points_general(p: MapParams, tol, grid: int, max_iter: int) -> list[FixedPoint]:
    F = LiftedMap.of(p)
    two_pi = 2 * mp.pi

    def g(phi):
        return F(phi) - phi

    # irrational offset keeps grid nodes off exactly representable fixed points
    offset = two_pi * (mpmath.sqrt(2) - 1) / (3 * grid)
    phis = [offset + two_pi * j / grid for j in range(grid + 1)]
    vals = [g(x) for x in phis]
    roots: list[mpf] = []
    for j in range(grid):
        a, c = vals[j], vals[j + 1]
        na, nc = mpmath.floor(a / two_pi), mpmath.floor(c / two_pi)
        if na != nc:
            lo_k, hi_k = (na, nc) if na < nc else (nc, na)
            for level in range(int(lo_k) + 1, int(hi_k) + 1):
                roots.append(_bisect_level(g, phis[j], phis[j + 1], level * two_pi, tol, max_iter))
    # tangential (parabolic) roots give no sign change; look for near-touching minima
    for j in range(1, grid):
        d = [_dist_to_lattice(vals[i], two_pi) for i in (j - 1, j, j + 1)]
        if d[1] <= d[0] and d[1] <= d[2] and d[1] < 10 * two_pi / grid:
            x, dist = _golden_min(lambda t: _dist_to_lattice(g(t), two_pi), phis[j - 1], phis[j + 1], max_iter)
            if dist <= tol and all(abs(x - r) > 4 * two_pi / grid for r in roots):
                roots.append(x)
    out = []
    seen: list[mpf] = []
    for r in sorted(roots):
        r = r % two_pi
        if any(min(abs(r - s), two_pi - abs(r - s)) < tol for s in seen):
            continue
        seen.append(r)
        z = mpmath.expj(r)
        exact = None
        for cand in (ONE, MINUS_ONE):
            if abs(cand.to_mpc() - z) < mpf(10) ** -6 and apply_map(p, cand) == cand:
                exact = cand
        rec = _fixed_point_record(p, exact if exact is not None else z, tol)
        if rec.residual > tol and exact is None:
            raise NoConvergence(f"fixed point residual {rec.residual} exceeds tolerance")
        out.append(rec)
    return out


def _dist_to_lattice(v, step):
    r = v % step
    return min(r, step - r)


def _bisect_level(g, a, c, level, tol, max_iter):
    fa = g(a) - level
    if fa == 0:
        return a
    for _ in range(max_iter):
        mid = (a + c) / 2
        fm = g(mid) - level
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            c = mid
        if c - a < mpf(2) ** (-(mp.prec - 20)):
            return (a + c) / 2
    raise NoConvergence("bisection budget exhausted")


def _golden_min(fn, a, c, max_iter):
    invphi = (mpmath.sqrt(5) - 1) / 2
    x1 = c - invphi * (c - a)
    x2 = a + invphi * (c - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_iter):
        if f1 < f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - invphi * (c - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (c - a)
            f2 = fn(x2)
        if c - a < mpf(2) ** (-(mp.prec - 20)):
            break
    x = (a + c) / 2
    return x, fn(x)


def attracting_fixed_point_mp(lam, k: int, b, prec: int = DEFAULT_PREC, grid: int = 512) -> mpc:
    """``R_k(lam)`` at high precision for ``lam`` in the closed non-chaotic arc.

    For ``Im lam ≥ 0`` the orbit of 1 increases monotonically to ``R_k``, so
    ``R_k`` is the first zero of ``F(phi) - phi`` on ``[0, π]``.
    """
    with mp.workprec(prec + 20):
        lam_m = lam.to_mpc() if isinstance(lam, GaussianRational) else mpc(lam)
        if lam_m.imag < 0:
            return mpmath.conj(attracting_fixed_point_mp(mpmath.conj(lam_m), k, b, prec, grid))
        bm = _mpf(b)
        if k == 1:
            lin = 1 - lam_m
            s = mpmath.sqrt(lin * lin + 4 * bm * bm * lam_m)
            cands = [(-lin + s) / (2 * bm), (-lin - s) / (2 * bm)]
            z = max(cands, key=lambda w: w.real)
            return z / abs(z)
        theta = mpmath.arg(lam_m)
        F = LiftedMap(theta, k, as_fraction(b))

        def g(phi):
            return F(phi) - phi

        prev = mpf(0)
        if g(prev) <= 0:
            return mpc(1)
        for j in range(1, grid + 1):
            x = mp.pi * j / grid
            if g(x) <= 0:
                root = _bisect_level(g, prev, x, mpf(0), mpf(2) ** (-prec), 4 * prec)
                return mpmath.expj(root)
            prev = x
        raise PreconditionViolated("no attracting fixed point: lam is in the chaotic regime")


# ---------------------------------------------------------------------------
# Thresholds and regimes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    """The threshold field ``lam_k(b)`` with its parabolic fixed point."""

    k: int
    b: Fraction
    exists: bool
    lambda_k: Optional[mpc]
    angle: Optional[Angle]
    parabolic_point: Optional[mpc]
    err: mpf

    @property
    def re_parabolic(self) -> Optional[Fraction]:
        return parabolic_real_part(self.k, self.b) if self.lambda_k is not None else None


def parabolic_real_part(k: int, b) -> Fraction:
    """``Re z*`` where ``|f_k'(z*)| = 1``: ``(k(1 - b²) - b² - 1)/(2b)``."""
    b = as_fraction(b)
    return (k * (1 - b * b) - b * b - 1) / (2 * b)


def lambda_threshold(k: int, b, prec: int = DEFAULT_PREC) -> ThresholdResult:
    """The field ``lam_k(b)`` bounding the chaotic regime of ``f_{lam,k}``."""
    b = as_fraction(b)
    if k < 1 or not 0 < b < 1:
        raise PreconditionViolated("need k ≥ 1 and 0 < b < 1")
    boundary = Fraction(k - 1, k + 1)
    if b < boundary:
        return ThresholdResult(k, b, False, None, None, None, mpf(0))
    if b == boundary:
        return ThresholdResult(k, b, False, mpc(1), Angle.pi_multiple(0), mpc(1), mpf(0))
    with mp.workprec(prec + 32):
        x = parabolic_real_part(k, b)
        xm = _mpf(x)
        zs = mpc(xm, mpmath.sqrt(1 - xm * xm))
        bm = _mpf(b)
        lam = zs * ((bm * zs + 1) / (zs + bm)) ** k
        th = mpmath.arg(lam)
        err = mpf(2) ** (-(prec - 8))
        return ThresholdResult(k, b, True, lam, Angle(th, err), zs, err)


def in_chaotic_regime(k: int, b, lam: UnitPoint) -> bool:
    """Whether every circle fixed point of ``f_{lam,k}`` is repelling."""
    b = as_fraction(b)
    lam = UnitPoint.of(lam)
    boundary = Fraction(k - 1, k + 1)
    if b < boundary:
        return True
    if b == boundary:
        return lam != ONE
    thr = lambda_threshold(k, b)
    a = point_angle(lam)
    # fold into [0, π]
    v = a.value if a.value <= mp.pi else 2 * mp.pi - a.value
    margin = a.err + thr.angle.err
    if abs(v - thr.angle.value) <= margin:
        raise Indeterminate("lam lies within the error bound of the threshold")
    return v > thr.angle.value


@dataclass(frozen=True)
class MobiusClass:
    """Classification of ``f_{lam,1}`` by its normalised squared trace."""

    kind: str
    trace_sq: Fraction
    rotation_cos: Optional[Fraction] = None


def mobius_classify(lam: UnitPoint, b) -> MobiusClass:
    """``tr² = 2(Re lam + 1)/(1 - b²)`` decides elliptic / parabolic / hyperbolic."""
    lam = UnitPoint.of(lam)
    b = as_fraction(b)
    t = 2 * (Fraction(lam.re) + 1) / (1 - b * b)
    if t < 4:
        return MobiusClass("elliptic", t, t / 2 - 1)
    if t == 4:
        return MobiusClass("parabolic", t)
    return MobiusClass("hyperbolic", t)


# Rational points of the curves Y² = X³ - (t-2) t X² + t² X, t = 1, 2, 3.
# The three curves have rank 0; their rational points are the torsion points below.
ROTATION_CURVE_POINTS = {
    1: frozenset({(Fraction(0), Fraction(0))}),
    2: frozenset({(Fraction(0), Fraction(0)), (Fraction(2), Fraction(4)), (Fraction(2), Fraction(-4))}),
    3: frozenset({(Fraction(0), Fraction(0))}),
}


def rotation_curve_rhs(t: int, X: Fraction) -> Fraction:
    return X ** 3 - (t - 2) * t * X ** 2 + t * t * X


def rotation_curve_point(lam: UnitPoint, b, t: int) -> tuple[Fraction, Fraction]:
    """Point ``(t(1+b)/(1-b), 2t Im(lam)/(1-b)²)`` attached to ``(lam, b)`` at trace ``t``."""
    b = as_fraction(b)
    y = Fraction(lam.im)
    return t * (1 + b) / (1 - b), 2 * t * y / (1 - b) ** 2


def is_rational_rotation(lam: UnitPoint, b, search_height: int = 0) -> bool:
    """Decide whether the elliptic map ``f_{lam,1}`` is a rational rotation.

    A rational rotation forces the squared trace ``t`` to be an integer in
    ``{0, 1, 2, 3}``.  ``t = 0`` means ``lam = -1`` (excluded); for
    ``t ∈ {1, 2, 3}`` a rational rotation would produce a rational point of the
    curve ``E_t`` outside the known finite list.  The result is therefore
    always False on valid input; ``search_height > 0`` additionally runs the
    bounded rational-point search as a regression tripwire.
    """
    lam = UnitPoint.of(lam)
    b = as_fraction(b)
    if lam in (ONE, MINUS_ONE):
        raise PreconditionViolated("lam must differ from ±1")
    cls = mobius_classify(lam, b)
    if cls.kind != "elliptic":
        raise PreconditionViolated("map is not elliptic")
    if search_height:
        for t in (1, 2, 3):
            found = set(rational_points_bounded(t, search_height))
            if not found <= ROTATION_CURVE_POINTS[t]:
                raise AssertionError(f"unexpected rational point on E_{t}: {found - ROTATION_CURVE_POINTS[t]}")
    t = cls.trace_sq
    if t.denominator != 1 or int(t) not in (1, 2, 3):
        return False
    X, Y = rotation_curve_point(lam, b, int(t))
    if Y * Y != rotation_curve_rhs(int(t), X):
        raise AssertionError("curve parametrisation inconsistent")
    return (X, Y) in ROTATION_CURVE_POINTS[int(t)]


def rational_points_bounded(t: int, height: int):
    """Rational points ``(a/d², c/d³)`` of ``E_t`` with ``|a| ≤ height``, ``d² ≤ height``."""
    d = 1
    while d * d <= height:
        d2 = d * d
        for a in range(-height, height + 1):
            if math.gcd(a, d) != 1:
                continue
            # Y² d⁶ = a³ - (t-2) t a² d² + t² a d⁴
            rhs = a ** 3 - (t - 2) * t * a * a * d2 + t * t * a * d2 * d2
            if rhs < 0:
                continue
            r = math.isqrt(rhs)
            if r * r == rhs:
                X = Fraction(a, d2)
                for s in ({r, -r} if r else {0}):
                    yield X, Fraction(s, d2 * d)
        d += 1


# ---------------------------------------------------------------------------
# Orbits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitPoint:
    """One orbit step: exact point if still affordable, plus an angle with error."""

    step: int
    point: Optional[UnitPoint]
    angle: mpf
    err: mpf
    deriv: Number

    @property
    def approx(self) -> mpc:
        return mpmath.expj(self.angle)

    def csv_row(self, digits: int = 20) -> list[str]:
        with mp.workprec(max(mp.prec, 4 * digits)):
            if self.point is not None:
                re, im = _mpf(self.point.re), _mpf(self.point.im)
            else:
                z = self.approx
                re, im = z.real, z.imag
            return [str(self.step), mpmath.nstr(re, digits), mpmath.nstr(im, digits),
                    mpmath.nstr(self.angle, digits), mpmath.nstr(_mpf(self.deriv), digits)]


ORBIT_CSV_HEADER = ["step", "re", "im", "arg", "deriv_mag"]


def orbit(p: MapParams, z0: UnitPoint, n: int, mode: str = "auto", exact_steps: int = 64,
          bit_budget: int = 1 << 16, prec: int = DEFAULT_PREC) -> list[OrbitPoint]:
    """Iterates ``z_0, ..., z_n``.

    ``mode="exact"`` keeps every iterate exact and raises BudgetExceeded if the
    bit size passes ``bit_budget``.  ``"auto"`` stays exact for at most
    ``exact_steps`` steps (and within budget), then continues in angle space at
    ``prec`` bits with a per-step error bound.  ``"float"`` starts in angle space.
    """
    if n < 0:
        raise PreconditionViolated("n must be non-negative")
    z0 = UnitPoint.of(z0)
    out: list[OrbitPoint] = []
    with mp.workprec(prec):
        z: Optional[UnitPoint] = z0 if mode != "float" else None
        ang = point_angle(z0).mp_value(prec)
        err = mpf(2) ** (-(prec - 8))
        F = LiftedMap.of(p)
        for step in range(n + 1):
            if z is not None:
                ang = point_angle(z, prec).value
                out.append(OrbitPoint(step, z, ang, mpf(0), derivative_magnitude(p.k, p.b, z)))
            else:
                out.append(OrbitPoint(step, None, ang % (2 * mp.pi), err, derivative_at_angle(p.k, p.b, ang)))
            if step == n:
                break
            if z is not None:
                if mode == "exact" or (step < exact_steps and z.bit_size() <= bit_budget):
                    nz = apply_map(p, z)
                    if nz.bit_size() > bit_budget:
                        if mode == "exact":
                            raise BudgetExceeded("exact orbit exceeded bit budget", step=step + 1,
                                                 bits=nz.bit_size())
                        z = None
                        ang = F(ang)
                        err = mpf(2) ** (-(prec - 8))
                    else:
                        z = nz
                    continue
                z = None
            lip = _local_lipschitz(p.k, p.b, ang, err)
            ang = F(ang)
            err = lip * err + mpf(2) ** (-(prec - 8))
    return out


def _local_lipschitz(k, b, phi, err) -> mpf:
    bm = _mpf(b)
    cmin = mpmath.cos(phi) - err
    den = 1 + bm * bm + 2 * bm * max(cmin, mpf(-1))
    return k * (1 - bm * bm) / den


@dataclass(frozen=True)
class ExpandingPoint:
    """First orbit point where ``|f_k'| > 1``."""

    m: int
    point: Optional[UnitPoint]
    angle: mpf
    derivative: Number
    certified: bool


def find_expanding_point(p: MapParams, z0: UnitPoint, budget: int = 10 ** 6,
                         bit_budget: int = 1 << 14, prec: int = 128) -> ExpandingPoint:
    """Smallest ``m ≤ budget`` with ``|f_k'(z_m)| > 1`` along the orbit of ``z0``."""
    if p.lam == MINUS_ONE:
        raise PreconditionViolated("lam = -1 is excluded")
    if not in_chaotic_regime(p.k, p.b, p.lam):
        raise PreconditionViolated("lam is not in the chaotic regime")
    z: Optional[UnitPoint] = UnitPoint.of(z0)
    with mp.workprec(prec):
        F = LiftedMap.of(p)
        ang = mpf(0)
        err = mpf(0)
        for m in range(budget + 1):
            if z is not None:
                d = derivative_magnitude(p.k, p.b, z)
                if d > 1:
                    return ExpandingPoint(m, z, point_angle(z, prec).value, d, True)
                nz = apply_map(p, z)
                if nz.bit_size() > bit_budget:
                    ang = point_angle(nz, prec).value
                    err = mpf(2) ** (-(prec - 8))
                    z = None
                else:
                    z = nz
                continue
            d = derivative_at_angle(p.k, p.b, ang)
            # derivative is Lipschitz in phi with constant at most max|f'| * 2b/(1-b)²
            slope_bound = p.k * (1 + _mpf(p.b)) / (1 - _mpf(p.b)) * 2 * _mpf(p.b) / (1 - _mpf(p.b)) ** 2
            if d - slope_bound * err > 1:
                return ExpandingPoint(m, None, ang % (2 * mp.pi), d, err < mpf(2) ** (-(prec // 2)))
            lip = _local_lipschitz(p.k, p.b, ang, err)
            ang = F(ang)
            err = lip * err + mpf(2) ** (-(prec - 8))
    raise BudgetExceeded("no expanding orbit point within budget", budget=budget)


# ---------------------------------------------------------------------------
# Interval maps and the contracting-cover engine
# ---------------------------------------------------------------------------


class IntervalMap:
    """Increasing self-map of ``[0, 1]`` with an optional explicit inverse."""

    def __init__(self, forward: Callable, inverse: Optional[Callable] = None, name: str = ""):
        self.forward = forward
        self._inverse = inverse
        self.name = name

    def __call__(self, x):
        return self.forward(x)

    def inverse(self, y):
        if self._inverse is not None:
            return self._inverse(y)
        lo, hi = mpf(0), mpf(1)
        for _ in range(mp.prec + 10):
            mid = (lo + hi) / 2
            if self.forward(mid) < y:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    def __repr__(self):
        return f"IntervalMap({self.name})"


class LinearMap(IntervalMap):
    """``x -> slope * x + offset`` with exact rational coefficients."""

    def __init__(self, slope, offset=0):
        self.slope = as_fraction(slope)
        self.offset = as_fraction(offset)
        super().__init__(lambda x: self.slope * x + self.offset,
                         lambda y: (y - self.offset) / self.slope,
                         f"{self.slope}x+{self.offset}")


def compose_image(maps: Sequence[IntervalMap], indices: Sequence[int], x):
    """``(f_{m_1} ∘ ... ∘ f_{m_N})(x)``: the last index acts first."""
    for m in reversed(indices):
        x = maps[m](x)
    return x


def check_cover(maps: Sequence[IntervalMap], grid: int = 1024) -> None:
    """Raise CoverViolated unless the images cover ``[0, 1]`` and the maps contract."""
    images = sorted((maps[i](0), maps[i](1)) for i in range(len(maps)))
    reach = 0
    for lo, hi in images:
        if lo > reach:
            raise CoverViolated(f"gap in images between {reach} and {lo}")
        reach = max(reach, hi)
    if reach < 1:
        raise CoverViolated(f"images stop at {reach}")
    for i, f in enumerate(maps):
        prev = f(0)
        for j in range(1, grid + 1):
            cur = f(Fraction(j, grid)) if not isinstance(prev, mpf) else f(mpf(j) / grid)
            slope = (cur - prev) * grid
            if not 0 < slope < 1:
                raise CoverViolated(f"map {i} has slope {float(slope):.6g} outside (0,1) on the grid")
            prev = cur


def cover_and_contract(maps: Sequence[IntervalMap], J: tuple, budget: int = 100_000,
                       grid: int = 1024) -> list[int]:
    """Indices whose composed image of ``[0, 1]`` lies inside the open interval ``J``.

    Follows the pull-back procedure: while ``J`` sits inside the image of some
    map, replace it by its preimage; once it escapes every image it contains
    an image endpoint, which is seized with a short tail of iterates of the
    map fixing the corresponding end of ``[0, 1]``.  The result is certified
    by evaluating the composition at both endpoints.
    """
    check_cover(maps, grid)
    a, b = J
    if a >= b:
        raise PreconditionViolated("J must be a non-empty open interval")
    if a <= 0 and b >= 1:
        return []
    fix0 = next(i for i, f in enumerate(maps) if _negligible(f(0)))
    fix1 = next(i for i, f in enumerate(maps) if _negligible(f(1) - 1))
    seq: list[int] = []
    lengths = []
    for _ in range(budget):
        lengths.append(b - a)
        if a < 0 < b:
            seq += _tail(maps, fix0, lambda x: x < b, start=1, budget=budget)
            break
        if a < 1 < b:
            seq += _tail(maps, fix1, lambda x: x > a, start=0, budget=budget)
            break
        inside = [i for i, f in enumerate(maps) if f(0) <= a and b <= f(1)]
        if inside:
            m = inside[0]
            seq.append(m)
            a, b = maps[m].inverse(a), maps[m].inverse(b)
            continue
        done = False
        for i, f in enumerate(maps):
            lo, hi = f(0), f(1)
            if a < lo < b:
                bound = f.inverse(b)
                seq += [i] + _tail(maps, fix0, lambda x, t=bound: x < t, start=1, budget=budget)
                done = True
                break
            if a < hi < b:
                bound = f.inverse(a)
                seq += [i] + _tail(maps, fix1, lambda x, t=bound: x > t, start=0, budget=budget)
                done = True
                break
        if not done:
            raise CoverViolated("interval escaped every image without containing an endpoint")
        break
    else:
        raise BudgetExceeded("pull-back did not terminate", lengths=lengths[-5:])
    lo_img = compose_image(maps, seq, 0)
    hi_img = compose_image(maps, seq, 1)
    if not (J[0] < lo_img and hi_img < J[1]):
        raise BudgetExceeded("post-hoc certification failed", image=(lo_img, hi_img))
    return seq


def _negligible(x) -> bool:
    if isinstance(x, mpf):
        return abs(x) < mpf(2) ** (-(mp.prec - 8))
    return x == 0


def _tail(maps, i, ok, start, budget) -> list[int]:
    x = start
    for n in range(budget):
        x = maps[i](x)
        if ok(x):
            return [i] * (n + 1)
    raise BudgetExceeded("endpoint-fixing iterates did not enter the target")


# ---------------------------------------------------------------------------
# Covering certificates for circle maps
# ---------------------------------------------------------------------------


@dataclass
class CoveringCertificate:
    """Measured instance of an arc-covering inequality."""

    kind: str
    arc_start: mpf
    arc_length: mpf
    maps: list
    image_lengths: dict
    holds: bool
    inequality: str
    hypotheses: dict
    grid: int
    notes: list = field(default_factory=list)

    def arc(self) -> CircularArc:
        return CircularArc.closed(Angle(self.arc_start, mpf(2) ** -200),
                                  Angle(self.arc_start + self.arc_length, mpf(2) ** -200))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "arc_start": mpmath.nstr(self.arc_start, 25),
            "arc_length": mpmath.nstr(self.arc_length, 25),
            "maps": [{"field": str(x), "k": k} for x, k in self.maps],
            "image_lengths": {k: mpmath.nstr(v, 25) for k, v in self.image_lengths.items()},
            "holds": self.holds,
            "inequality": self.inequality,
            "hypotheses": {k: (v if isinstance(v, bool) else str(v)) for k, v in self.hypotheses.items()},
            "grid": self.grid,
            "notes": self.notes,
        }


def _angle_of(z) -> mpf:
    zc = z.to_mpc() if isinstance(z, GaussianRational) else mpc(z)
    return mpmath.arg(zc)


class _ArcChart:
    """Affine chart ``t ∈ [0,1] -> start + t*length`` of a short arc."""

    def __init__(self, start: mpf, length: mpf):
        self.start, self.length = start, length

    def interval_map(self, xi, k: int, b) -> IntervalMap:
        F = LiftedMap(_angle_of(xi), k, as_fraction(b))
        mid = F(self.start + self.length / 2)
        shift = 2 * mp.pi * mpmath.nint((mid - (self.start + self.length / 2)) / (2 * mp.pi))

        def fwd(t):
            return (F(self.start + mpf(t) * self.length) - shift - self.start) / self.length

        def inv(s):
            return (F.inverse(self.start + mpf(s) * self.length + shift) - self.start) / self.length

        return IntervalMap(fwd, inv if k == 1 else None, f"f[{xi},{k}]")

    def image_length(self, xi, k, b) -> mpf:
        f = self.interval_map(xi, k, b)
        return (f(1) - f(0)) * self.length


def _same_half_plane(a, b) -> bool:
    return (_im(a) > 0 and _im(b) > 0) or (_im(a) < 0 and _im(b) < 0)


def _im(z):
    return z.im if isinstance(z, GaussianRational) else mpc(z).imag


def _in_closed_threshold_arc(xi, k, b) -> bool:
    thr = lambda_threshold(k, b)
    if not thr.exists:
        return thr.lambda_k is not None and _angle_of(xi) == 0
    return abs(_angle_of(xi)) <= thr.angle.value + thr.angle.err


def _chart_for(points: list, prec_pad: int = 0) -> _ArcChart:
    angs = [_angle_of(p) for p in points]
    lo, hi = min(angs), max(angs)
    return _ArcChart(lo, hi - lo)


def _deriv_mp(k, b, z) -> mpf:
    return derivative_magnitude(k, b, mpc(z))


def covering_easy_even(xi1, xi2, k: int, b, grid: int = 1024) -> CoveringCertificate:
    """Two maps ``f_{xi1,k}``, ``f_{xi2,k}`` on ``A = Arc[R_k(xi1), R_k(xi2)]``.

    Claims ``ℓ(f_{xi_i,k}(A)) > ℓ(A)/2`` for both maps, hence covering.
    """
    b = as_fraction(b)
    if xi1 == xi2:
        return CoveringCertificate("easy_even", _angle_of(xi1), mpf(0), [(xi1, k), (xi2, k)], {},
                                   True, "degenerate arc", {"distinct": False}, grid,
                                   ["R_k(xi1) = R_k(xi2): empty arc, holds trivially"])
    hyp = {}
    if b < Fraction(k - 1, k + 1):
        raise HypothesisFailed(f"b = {b} < (k-1)/(k+1)")
    hyp["b >= (k-1)/(k+1)"] = True
    if not _same_half_plane(xi1, xi2):
        raise HypothesisFailed("xi1 and xi2 are not in the same open half-plane")
    hyp["same half-plane"] = True
    for name, xi in (("xi1", xi1), ("xi2", xi2)):
        if not _in_closed_threshold_arc(xi, k, b):
            raise HypothesisFailed(f"{name} not in Arc[conj(lam_k), lam_k]")
    hyp["fields in Arc[conj(lam_k), lam_k]"] = True
    R = [attracting_fixed_point_mp(xi, k, b) for xi in (xi1, xi2)]
    for name, r in zip(("xi1", "xi2"), R):
        d = _deriv_mp(2 * k, b, r)
        hyp[f"|f'_2k(R_k({name}))|"] = d
        if d < 1:
            raise HypothesisFailed(f"|f'_{2 * k}(R_{k}({name}))| = {mpmath.nstr(d, 10)} < 1")
    chart = _chart_for(R)
    lengths = {f"f[xi{i + 1},{k}]": chart.image_length(xi, k, b) for i, xi in enumerate((xi1, xi2))}
    half = chart.length / 2
    holds = all(v > half for v in lengths.values())
    _check_contracting(chart, [(xi1, k), (xi2, k)], b, grid, hyp)
    return CoveringCertificate("easy_even", chart.start, chart.length, [(xi1, k), (xi2, k)], lengths,
                               holds, "l(f_i(A)) > l(A)/2 for both maps", hyp, grid)


def covering_easy_odd(xi, k: int, b, grid: int = 1024) -> CoveringCertificate:
    """Maps ``f_{xi,k}``, ``f_{xi,k+1}`` on ``A = Arc[R_k(xi), R_{k+1}(xi)]``."""
    b = as_fraction(b)
    hyp = {}
    if not (Fraction(k, k + 2) <= b < 1):
        raise HypothesisFailed(f"b = {b} outside [k/(k+2), 1)")
    hyp["b in [k/(k+2),1)"] = True
    if _angle_of(xi) == 0:
        raise HypothesisFailed("xi = 1")
    if not _in_closed_threshold_arc(xi, k + 1, b):
        raise HypothesisFailed("xi not in Arc[conj(lam_{k+1}), lam_{k+1}]")
    hyp["xi in Arc[conj(lam_{k+1}), lam_{k+1}]"] = True
    Rk = attracting_fixed_point_mp(xi, k, b)
    Rk1 = attracting_fixed_point_mp(xi, k + 1, b)
    d = _deriv_mp(2 * k + 1, b, Rk)
    hyp["|f'_{2k+1}(R_k)|"] = d
    if d < 1:
        raise HypothesisFailed(f"|f'_{2 * k + 1}(R_k(xi))| = {mpmath.nstr(d, 10)} < 1")
    chart = _chart_for([Rk, Rk1])
    lengths = {f"f[xi,{j}]": chart.image_length(xi, j, b) for j in (k, k + 1)}
    holds = sum(lengths.values()) > chart.length
    _check_contracting(chart, [(xi, k), (xi, k + 1)], b, grid, hyp)
    return CoveringCertificate("easy_odd", chart.start, chart.length, [(xi, k), (xi, k + 1)], lengths,
                               holds, "l(f_k(A)) + l(f_{k+1}(A)) > l(A)", hyp, grid)


def _images_cover(chart: _ArcChart, maps: list, b) -> bool:
    spans = []
    for xi, k in maps:
        f = chart.interval_map(xi, k, b)
        spans.append((f(0), f(1)))
    spans.sort()
    reach = mpf(0)
    tol = mpf(2) ** (-(mp.prec - 16))
    for lo, hi in spans:
        if lo > reach + tol:
            return False
        reach = max(reach, hi)
    return reach >= 1 - tol


def _check_contracting(chart, maps, b, grid, hyp) -> None:
    worst = mpf(0)
    for xi, k in maps:
        for j in range(grid + 1):
            phi = chart.start + chart.length * j / grid
            worst = max(worst, derivative_at_angle(k, b, phi))
    hyp["max |f'| on grid"] = worst
    hyp["contracting on A (grid)"] = bool(worst < 1)


def covering_three_maps(xi, k: int, p: int, b, grid: int = 1024) -> CoveringCertificate:
    """Maps ``f_{xi,k-2}, f_{xi,k-1}, f_{xi,k}`` on ``Arc[R_{k-2}, R_k]``, or the multiplier bound."""
    b = as_fraction(b)
    hyp = {}
    if k < 5:
        raise HypothesisFailed("k must be at least 5")
    if not (Fraction(k - 1, k + 1) < b < 1):
        raise HypothesisFailed("b must lie in ((k-1)/(k+1), 1)")
    if not 2 * k <= p <= 3 * k - 5:
        raise HypothesisFailed("need 2k ≤ p ≤ 3k - 5")
    if _angle_of(xi) == 0 or not _in_closed_threshold_arc(xi, k, b):
        raise HypothesisFailed("xi must be in Arc[conj(lam_k), lam_k] and differ from 1")
    dxi = _deriv_mp(p, b, _as_mpc(xi))
    hyp["|f'_p(xi)|"] = dxi
    if dxi < 1:
        raise HypothesisFailed(f"|f'_p(xi)| = {mpmath.nstr(dxi, 10)} < 1")
    R = [attracting_fixed_point_mp(xi, j, b) for j in (k - 2, k - 1, k)]
    chart = _chart_for(R)
    maps = [(xi, k - 2), (xi, k - 1), (xi, k)]
    lengths = {f"f[xi,{j}]": chart.image_length(xi, j, b) for _, j in maps}
    covered = _images_cover(chart, maps, b)
    bound = 1 - Fraction(p - k + 2, p) * Fraction(p - 2 * k + 1, k)
    mult = _deriv_mp(k, b, R[2])
    alt = mult > _mpf(bound)
    hyp["multiplier |f'_k(R_k)|"] = mult
    hyp["multiplier bound"] = bound
    return CoveringCertificate("three_maps", chart.start, chart.length, maps, lengths, bool(covered or alt),
                               "images cover A1 ∪ A2, or |f'_k(R_k)| exceeds the bound", hyp, grid,
                               [f"covered={covered}", f"multiplier_alternative={alt}"])


def covering_remaining_cases(xi, m: int, b, variant: str = "a", grid: int = 1024) -> CoveringCertificate:
    """Covering by ``f_{xi,m-3..m-1}`` on ``Arc[R_{m-3}, R_{m-1}]`` or by ``f_{xi,m-1}, f_{xi,m}`` on ``Arc[R_{m-1}, R_m]``."""
    b = as_fraction(b)
    hyp = {}
    if variant == "a":
        if m < 8:
            raise HypothesisFailed("variant a needs m ≥ 8")
        p = 2 * m
    elif variant == "b":
        if m < 9:
            raise HypothesisFailed("variant b needs m ≥ 9")
        p = 2 * m + 1
    else:
        raise PreconditionViolated("variant must be 'a' or 'b'")
    if not (Fraction(m - 1, m + 1) < b < 1):
        raise HypothesisFailed("b must lie in ((m-1)/(m+1), 1)")
    if _angle_of(xi) == 0 or not _in_closed_threshold_arc(xi, m, b):
        raise HypothesisFailed("xi must be in Arc[conj(lam_m), lam_m] and differ from 1")
    d = _deriv_mp(p, b, _as_mpc(xi))
    hyp[f"|f'_{p}(xi)|"] = d
    if d < 1:
        raise HypothesisFailed(f"|f'_{p}(xi)| = {mpmath.nstr(d, 10)} < 1")
    R = {j: attracting_fixed_point_mp(xi, j, b) for j in (m - 3, m - 2, m - 1, m)}
    chart3 = _chart_for([R[m - 3], R[m - 1]])
    maps3 = [(xi, m - 3), (xi, m - 2), (xi, m - 1)]
    cov3 = _images_cover(chart3, maps3, b)
    chart2 = _chart_for([R[m - 1], R[m]])
    maps2 = [(xi, m - 1), (xi, m)]
    cov2 = _images_cover(chart2, maps2, b)
    chart, maps = (chart3, maps3) if cov3 else (chart2, maps2)
    lengths = {f"f[xi,{j}]": chart.image_length(xi, j, b) for _, j in maps}
    return CoveringCertificate("remaining_cases", chart.start, chart.length, maps, lengths, bool(cov3 or cov2),
                               "three-map or two-map covering", hyp, grid,
                               [f"three_map_cover={cov3}", f"two_map_cover={cov2}"])


def _as_mpc(z) -> mpc:
    return z.to_mpc() if isinstance(z, GaussianRational) else mpc(z)


def verify_arc_covering(kind: str, *args, **kwargs) -> CoveringCertificate:
    """Dispatch to ``easy_odd``, ``easy_even``, ``three_maps`` or ``remaining_cases``."""
    table = {
        "easy_odd": covering_easy_odd,
        "easy_even": covering_easy_even,
        "three_maps": covering_three_maps,
        "remaining_cases": covering_remaining_cases,
    }
    if kind not in table:
        raise PreconditionViolated(f"unknown covering kind {kind!r}")
    return table[kind](*args, **kwargs)


def dense_points(cert: CoveringCertificate, b, delta, budget: int = 10_000) -> list[mpf]:
    """Angles of semigroup-orbit points within ``delta`` of every point of the certified arc."""
    if not cert.holds or cert.arc_length == 0:
        return [cert.arc_start]
    chart = _ArcChart(cert.arc_start, cert.arc_length)
    maps = [chart.interval_map(xi, k, b) for xi, k in cert.maps]
    step = mpf(delta) / chart.length
    pts = []
    t = mpf(0)
    while t < 1:
        J = (t, min(t + step, mpf(1) + step))
        seq = cover_and_contract(maps, J, budget=budget, grid=64)
        pts.append(chart.start + chart.length * compose_image(maps, seq, mpf(1) / 2))
        t += step
    return pts


# ---------------------------------------------------------------------------
# Cantor sets and near arithmetic progressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinaryWord:
    """Finite word over ``{0, 1}``; ``phi_w = phi_{w_1} ∘ ... ∘ phi_{w_n}``."""

    bits: tuple = ()

    def __add__(self, other: "BinaryWord") -> "BinaryWord":
        return BinaryWord(self.bits + other.bits)

    def __len__(self):
        return len(self.bits)

    def append(self, bit: int) -> "BinaryWord":
        return BinaryWord(self.bits + (bit,))

    def interval(self, alpha) -> tuple[Fraction, Fraction]:
        """``phi_w([0, 1])`` for ``phi_0(x) = αx`` and ``phi_1(x) = αx + 1 - α``."""
        alpha = as_fraction(alpha)
        left = Fraction(0)
        scale = Fraction(1)
        for bit in self.bits:
            left += scale * bit * (1 - alpha)
            scale *= alpha
        return left, left + scale

    def image(self, maps: Sequence[IntervalMap]) -> tuple:
        return compose_image(maps, self.bits, 0), compose_image(maps, self.bits, 1)

    def __str__(self):
        return "".join(map(str, self.bits)) or "∅"


def ratio_deviation(intervals) -> Fraction:
    """``max |(p2 - p1)/(p3 - p2) - 1|`` over the eight endpoint combinations.

    The ratio is monotone in each ``p_i`` separately, so its extremes over the
    box of intervals are attained at corners.
    """
    (a1, b1), (a2, b2), (a3, b3) = intervals
    worst = Fraction(0)
    for p1 in (a1, b1):
        for p2 in (a2, b2):
            for p3 in (a3, b3):
                if p3 <= p2:
                    return Fraction(10 ** 9)
                worst = max(worst, abs((p2 - p1) / (p3 - p2) - 1))
    return worst


@dataclass
class NearAPResult:
    """Words whose intervals form a near arithmetic progression."""

    words: tuple
    intervals: tuple
    deviation: Fraction
    levels: list
    verified: bool
    delta_estimate: Optional[mpf] = None
    heuristic: bool = False


def near_ap_triple(alpha, eps, maps: Optional[Sequence[IntervalMap]] = None,
                   max_depth: int = 200) -> NearAPResult:
    """Words ``w1, w2, w3`` with ``|(p2-p1)/(p3-p2) - 1| < eps`` on their intervals."""
    alpha = as_fraction(alpha)
    eps = as_fraction(eps)
    if alpha < Fraction(1, 3) or alpha >= 1:
        raise PreconditionViolated("alpha must lie in [1/3, 1)")
    if eps <= 0:
        raise PreconditionViolated("eps must be positive")
    if maps is not None:
        return _near_ap_perturbed(alpha, eps, maps, max_depth)
    if alpha >= Fraction(1, 2):
        return _near_ap_pinning(alpha, eps, max_depth)
    return _near_ap_refinement(alpha, eps, max_depth)


def _near_ap_pinning(alpha, eps, max_depth) -> NearAPResult:
    lin = [LinearMap(alpha, 0), LinearMap(alpha, 1 - alpha)]
    delta = eps / 8
    for _ in range(60):
        n = 1
        while alpha ** n > delta and n < max_depth:
            n += 1
        w1 = BinaryWord((0,) * n)
        w3 = BinaryWord((1,) * n)
        mid = cover_and_contract(lin, (Fraction(1, 2) - delta, Fraction(1, 2) + delta))
        w2 = BinaryWord(tuple(mid))
        ivs = (w1.interval(alpha), w2.interval(alpha), w3.interval(alpha))
        dev = ratio_deviation(ivs)
        if dev < eps:
            return NearAPResult((w1, w2, w3), ivs, dev, [], True)
        delta /= 2
    raise BudgetExceeded("pinning construction did not reach the requested eps")


def _sum_interval(i1, i2):
    return i1[0] + i2[0], i1[1] + i2[1]


def _intersect(i1, i2):
    lo, hi = max(i1[0], i2[0]), min(i1[1], i2[1])
    return (lo, hi) if lo <= hi else None


def _near_ap_refinement(alpha, eps, max_depth) -> NearAPResult:
    words = [BinaryWord((0, 0)), BinaryWord((0, 1)), BinaryWord((1, 0))]
    levels = []
    for _ in range(max_depth):
        ivs = tuple(w.interval(alpha) for w in words)
        common = _intersect(_sum_interval(ivs[0], ivs[2]), (2 * ivs[1][0], 2 * ivs[1][1]))
        if common is None:
            raise AssertionError("refinement invariant lost")
        c = common[0]
        q1 = max(ivs[0][0], c - ivs[2][1])
        levels.append({"words": tuple(str(w) for w in words), "intervals": ivs,
                       "q": (q1, c / 2, c - q1)})
        dev = ratio_deviation(ivs)
        if dev < eps:
            return NearAPResult(tuple(words), ivs, dev, levels, True)
        words = _refine_step(words, alpha)
    raise BudgetExceeded("near-AP refinement did not reach eps", depth=max_depth)


def _refine_step(words, alpha):
    w1, w2, w3 = words
    i1, i3 = w1.interval(alpha), w3.interval(alpha)
    s13 = _sum_interval(i1, i3)
    for b2 in (0, 1):
        c2 = w2.append(b2)
        i2 = c2.interval(alpha)
        if _intersect(s13, (2 * i2[0], 2 * i2[1])) is None:
            continue
        for b1 in (0, 1):
            for b3 in (0, 1):
                c1, c3 = w1.append(b1), w3.append(b3)
                s = _sum_interval(c1.interval(alpha), c3.interval(alpha))
                if _intersect(s, (2 * i2[0], 2 * i2[1])) is not None:
                    return [c1, c2, c3]
    raise AssertionError("three-sum cover failed; alpha below 1/3?")


def _near_ap_perturbed(alpha, eps, maps, max_depth) -> NearAPResult:
    grid = 512
    worst = mpf(0)
    for f in maps:
        for j in range(grid):
            x0, x1 = mpf(j) / grid, mpf(j + 1) / grid
            slope = (f(x1) - f(x0)) * grid
            worst = max(worst, abs(slope - _mpf(alpha)))
    target = eps / 2
    for _ in range(8):
        lin = near_ap_triple(alpha, target, max_depth=max_depth)
        ivs = tuple(w.image(maps) for w in lin.words)
        (a1, b1), (a2, b2), (a3, b3) = ivs
        dev = mpf(0)
        for p1 in (a1, b1):
            for p2 in (a2, b2):
                for p3 in (a3, b3):
                    dev = max(dev, abs((p2 - p1) / (p3 - p2) - 1))
        if dev < _mpf(eps):
            return NearAPResult(lin.words, ivs, dev, lin.levels, True, worst, True)
        target /= 4
    return NearAPResult(lin.words, ivs, dev, lin.levels, False, worst, True)
