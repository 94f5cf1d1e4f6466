"""Exact Gaussian-rational arithmetic, unit-circle points, angles and arcs.

Everything that influences a decision (membership, equality, ordering of
points on the circle) is computed from exact rational data.  Angles are the
only transcendental quantity; they carry a high-precision approximation with
an explicit error bound, plus an exact value whenever one is known.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction
from typing import Optional, Union

import gmpy2
import mpmath
from mpmath import mp, mpf, mpc

from .errors import Indeterminate, PreconditionViolated

DEFAULT_PREC = int(os.environ.get("ISINGCIRCLE_PREC_BITS", "256"))

Rational = Union[int, Fraction]
MPQ = type(gmpy2.mpq(0))
MPZ = type(gmpy2.mpz(0))
RATIONAL_TYPES = (int, Fraction, MPQ, MPZ)


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions and rational strings (``"3/4"``, ``"0.25"``, ``"1e-3"``) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, MPZ)):
        return Fraction(int(x))
    if isinstance(x, MPQ):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def as_mpq(x) -> MPQ:
    """Convert a rational-like value to a GMP rational (always reduced)."""
    if isinstance(x, MPQ):
        return x
    if isinstance(x, (int, MPZ)):
        return gmpy2.mpq(x)
    if isinstance(x, Fraction):
        return gmpy2.mpq(x.numerator, x.denominator)
    f = as_fraction(x)
    return gmpy2.mpq(f.numerator, f.denominator)


class GaussianRational:
    """Complex number with exact rational real and imaginary parts.

    Components are GMP rationals (``gmpy2.mpq``), which compare and hash equal
    to the corresponding ``fractions.Fraction`` and are reduced after every
    operation.  Instances are immutable and hashable.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: Rational = 0, im: Rational = 0):
        object.__setattr__(self, "re", as_mpq(re))
        object.__setattr__(self, "im", as_mpq(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, RATIONAL_TYPES):
            return cls(x, 0)
        if isinstance(x, str):
            return parse_gaussian(x)
        raise TypeError(f"cannot interpret {x!r} as a Gaussian rational")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, RATIONAL_TYPES):
            return GaussianRational(self.re * other, self.im * other)
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, o.re, o.im
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        n = o.norm2()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conj()
        return GaussianRational(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        result = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def conj(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        """Squared modulus, exact."""
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    # comparison and hashing ----------------------------------------------
    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    # conversions ----------------------------------------------------------
    def to_mpc(self) -> mpc:
        return mpc(_frac_to_mpf(self.re), _frac_to_mpf(self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def bit_size(self) -> int:
        """Total number of bits in numerators and denominators."""
        return sum(
            x.numerator.bit_length() + x.denominator.bit_length()
            for x in (self.re, self.im)
        )

    def to_json(self) -> dict:
        return {"re": _frac_str(self.re), "im": _frac_str(self.im)}

    @classmethod
    def from_json(cls, data: dict) -> "GaussianRational":
        return cls(Fraction(data["re"]), Fraction(data["im"]))

    def __repr__(self):
        return f"{type(self).__name__}({_frac_str(self.re)}, {_frac_str(self.im)})"

    def __str__(self):
        return format_gaussian(self)


def _coerce_or_none(x) -> Optional[GaussianRational]:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, RATIONAL_TYPES):
        return GaussianRational(x, 0)
    return None


def _frac_str(x) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _frac_to_mpf(x) -> mpf:
    return mpf(int(x.numerator)) / int(x.denominator)


def format_gaussian(z: GaussianRational) -> str:
    """Render as ``a/b+c/d i`` (the CLI literal form)."""
    if z.im == 0:
        return _frac_str(z.re)
    im = _frac_str(abs(z.im))
    im_part = "i" if abs(z.im) == 1 else f"{im} i"
    if z.re == 0:
        return ("-" if z.im < 0 else "") + im_part
    return f"{_frac_str(z.re)}{'-' if z.im < 0 else '+'}{im_part}"


_NUM = r"[0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?(?:/[0-9]+)?"


def parse_gaussian(text: str) -> GaussianRational:
    """Parse literals such as ``"i"``, ``"-1"``, ``"3/5+4/5 i"``, ``"0.6-0.8i"``."""
    s = text.replace(" ", "").replace("*", "").replace("j", "i")
    if not s:
        raise ValueError("empty complex literal")
    m = re.fullmatch(rf"([-+]?{_NUM})?(?:([-+])({_NUM})?i)?", s)
    if m and (m.group(1) or m.group(2)):
        re_part = Fraction(m.group(1)) if m.group(1) else Fraction(0)
        if m.group(2):
            mag = Fraction(m.group(3)) if m.group(3) else Fraction(1)
            im_part = mag if m.group(2) == "+" else -mag
        else:
            im_part = Fraction(0)
        return GaussianRational(re_part, im_part)
    m = re.fullmatch(rf"([-+]?)({_NUM})?i", s)
    if m:
        mag = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        return GaussianRational(0, -mag if m.group(1) == "-" else mag)
    raise ValueError(f"cannot parse complex literal {text!r}")


class UnitPoint(GaussianRational):
    """A Gaussian rational of modulus exactly one.

    The constructor checks ``re**2 + im**2 == 1`` and never normalises.
    """

    __slots__ = ()

    def __init__(self, re: Rational = 1, im: Rational = 0):
        super().__init__(re, im)
        if self.norm2() != 1:
            raise PreconditionViolated(
                f"({_frac_str(self.re)}, {_frac_str(self.im)}) is not on the unit circle"
            )

    @classmethod
    def of(cls, z) -> "UnitPoint":
        if isinstance(z, UnitPoint):
            return z
        z = GaussianRational.coerce(z)
        return cls(z.re, z.im)

    def __mul__(self, other):
        result = GaussianRational.__mul__(self, other)
        if isinstance(other, UnitPoint) and result is not NotImplemented:
            return UnitPoint(result.re, result.im)
        return result

    def conj(self) -> "UnitPoint":
        return UnitPoint(self.re, -self.im)

    def inverse(self) -> "UnitPoint":
        return self.conj()

    def arg(self) -> "Angle":
        """Argument in ``[0, 2π)``, exact for the four quarter-turn points."""
        return point_angle(self)

    @classmethod
    def from_json(cls, data: dict) -> "UnitPoint":
        return cls(Fraction(data["re"]), Fraction(data["im"]))


ONE = UnitPoint(1, 0)
I_UNIT = UnitPoint(0, 1)
MINUS_ONE = UnitPoint(-1, 0)
MINUS_I = UnitPoint(0, -1)
_QUARTER_POINTS = {ONE: 0, I_UNIT: 1, MINUS_ONE: 2, MINUS_I: 3}


# ---------------------------------------------------------------------------
# Angles
# ---------------------------------------------------------------------------


class Angle:
    """An angle in radians with a tracked error bound.

    Parameters
    ----------
    value : mpf
        High-precision approximation in radians.
    err : mpf
        Guaranteed bound on ``|value - true angle|``.
    exact : Fraction, optional
        Exact value when known; interpreted as ``exact * π`` if ``unit == "pi"``
        and as plain radians if ``unit == "rad"``.
    """

    __slots__ = ("value", "err", "exact", "unit")

    def __init__(self, value, err=0, exact: Optional[Fraction] = None, unit: str = "rad"):
        if unit not in ("rad", "pi"):
            raise ValueError("unit must be 'rad' or 'pi'")
        object.__setattr__(self, "value", mpf(value))
        object.__setattr__(self, "err", mpf(err))
        object.__setattr__(self, "exact", None if exact is None else as_fraction(exact))
        object.__setattr__(self, "unit", unit)

    def __setattr__(self, name, value):
        raise AttributeError("Angle is immutable")

    @classmethod
    def pi_multiple(cls, q) -> "Angle":
        q = as_fraction(q)
        with mp.workprec(DEFAULT_PREC + 16):
            v = mp.pi * q.numerator / q.denominator
        return cls(v, _ulp_bound(v), q, "pi")

    @classmethod
    def rational(cls, q) -> "Angle":
        q = as_fraction(q)
        with mp.workprec(DEFAULT_PREC + 16):
            v = mpf(q.numerator) / q.denominator
        return cls(v, _ulp_bound(v), q, "rad")

    def mp_value(self, prec: int = DEFAULT_PREC) -> mpf:
        """Value at precision ``prec``; recomputed from the exact form when available."""
        if self.exact is None:
            return self.value
        with mp.workprec(prec + 16):
            v = mpf(self.exact.numerator) / self.exact.denominator
            if self.unit == "pi":
                v = v * mp.pi
            return +v

    def error_at(self, prec: int) -> mpf:
        if self.exact is None:
            return self.err
        return _ulp_bound(self.mp_value(prec), prec)

    def _combine(self, other: "Angle", sign: int) -> "Angle":
        if self.exact is not None and other.exact is not None and self.unit == other.unit:
            ex = self.exact + sign * other.exact
            return Angle.pi_multiple(ex) if self.unit == "pi" else Angle.rational(ex)
        v = self.value + sign * other.value
        return Angle(v, self.err + other.err + _ulp_bound(v))

    def __add__(self, other):
        return self._combine(as_angle(other), 1)

    def __sub__(self, other):
        return self._combine(as_angle(other), -1)

    def __neg__(self):
        if self.exact is not None:
            return Angle(-self.value, self.err, -self.exact, self.unit)
        return Angle(-self.value, self.err)

    def scale(self, q) -> "Angle":
        q = as_fraction(q)
        if self.exact is not None:
            return Angle(self.value * q.numerator / q.denominator, self.err * abs(q), self.exact * q, self.unit)
        v = self.value * q.numerator / q.denominator
        return Angle(v, self.err * abs(q) + _ulp_bound(v))

    def mod_2pi(self) -> "Angle":
        """Representative in ``[0, 2π)``."""
        if self.exact is not None and self.unit == "pi":
            q = self.exact % 2
            return Angle.pi_multiple(q)
        two_pi = 2 * mp.pi
        k = mpmath.floor(self.value / two_pi)
        v = self.value - k * two_pi
        return Angle(v, self.err + _ulp_bound(v) * (1 + abs(k)), None)

    def certainly_lt(self, other) -> bool:
        o = as_angle(other)
        return self.value + self.err < o.value - o.err

    def compare(self, other) -> int:
        """Three-way comparison; raises Indeterminate if the error bands overlap."""
        o = as_angle(other)
        if self.exact is not None and o.exact is not None and self.unit == o.unit:
            return (self.exact > o.exact) - (self.exact < o.exact)
        if self.value + self.err < o.value - o.err:
            return -1
        if self.value - self.err > o.value + o.err:
            return 1
        raise Indeterminate(f"angles {self} and {o} are within error")

    def close_to(self, other, tol) -> bool:
        o = as_angle(other)
        return abs(self.value - o.value) <= mpf(tol) + self.err + o.err

    def __float__(self):
        return float(self.value)

    def to_json(self) -> dict:
        data = {
            "rad_num": None if self.exact is None else str(self.exact.numerator),
            "rad_den": None if self.exact is None else str(self.exact.denominator),
            "unit": self.unit,
            "float": mpmath.nstr(self.value, 30),
            "err": mpmath.nstr(self.err, 5),
        }
        return data

    @classmethod
    def from_json(cls, data: dict) -> "Angle":
        if data.get("rad_num") is not None:
            q = Fraction(int(data["rad_num"]), int(data["rad_den"]))
            return cls.pi_multiple(q) if data.get("unit") == "pi" else cls.rational(q)
        return cls(mpf(data["float"]), mpf(data["err"]))

    def __repr__(self):
        if self.exact is not None:
            suffix = "π" if self.unit == "pi" else ""
            return f"Angle({_frac_str(self.exact)}{suffix})"
        return f"Angle({mpmath.nstr(self.value, 15)} ± {mpmath.nstr(self.err, 3)})"


def _ulp_bound(v, prec: int = DEFAULT_PREC) -> mpf:
    return mpf(2) ** (-(prec - 4)) * max(mpf(1), abs(mpf(v)))


def as_angle(x) -> Angle:
    """Coerce an Angle, Fraction/int (radians), or string such as ``"pi/3"``."""
    if isinstance(x, Angle):
        return x
    if isinstance(x, RATIONAL_TYPES):
        return Angle.rational(x)
    if isinstance(x, str):
        return parse_angle(x)
    if isinstance(x, (float, mpf)):
        return Angle(mpf(x), _ulp_bound(mpf(x), 53))
    raise TypeError(f"cannot interpret {x!r} as an angle")


def parse_angle(text: str) -> Angle:
    """Parse ``"pi/3"``, ``"2pi/3"``, ``"-pi"``, ``"3/4"`` (radians) and decimals."""
    s = text.replace(" ", "").replace("*", "").replace("π", "pi")
    m = re.fullmatch(r"([-+]?)([0-9]*(?:/[0-9]+)?)pi(?:/([0-9]+))?", s)
    if m:
        coeff = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        if m.group(3):
            coeff /= int(m.group(3))
        if m.group(1) == "-":
            coeff = -coeff
        return Angle.pi_multiple(coeff)
    return Angle.rational(Fraction(s))


def point_angle(z: GaussianRational, prec: int = DEFAULT_PREC) -> Angle:
    """Argument of a nonzero Gaussian rational in ``[0, 2π)``."""
    if z.im == 0 or z.re == 0:
        if z.is_zero():
            raise PreconditionViolated("argument of zero")
        if z.im == 0:
            return Angle.pi_multiple(0 if z.re > 0 else 1)
        return Angle.pi_multiple(Fraction(1, 2) if z.im > 0 else Fraction(3, 2))
    with mp.workprec(prec + 16):
        v = mpmath.atan2(_frac_to_mpf(z.im), _frac_to_mpf(z.re))
        if v < 0:
            v += 2 * mp.pi
        return Angle(v, _ulp_bound(v, prec))


def angle_point_mp(theta) -> mpc:
    """High-precision ``e^{iθ}``."""
    th = as_angle(theta)
    return mpmath.expj(th.mp_value(mp.prec))


# ---------------------------------------------------------------------------
# Exact ordering of points on the circle
# ---------------------------------------------------------------------------


def _half(w: GaussianRational) -> int:
    # 0 for arguments in [0, π), 1 for [π, 2π)
    return 0 if (w.im > 0 or (w.im == 0 and w.re > 0)) else 1


def ccw_less(w1: GaussianRational, w2: GaussianRational) -> bool:
    """Exact test ``arg(w1) < arg(w2)`` with arguments taken in ``[0, 2π)``."""
    h1, h2 = _half(w1), _half(w2)
    if h1 != h2:
        return h1 < h2
    return w1.re * w2.im - w1.im * w2.re > 0


def ccw_offset_less(base: GaussianRational, a: GaussianRational, b: GaussianRational) -> bool:
    """Exact test: ``a`` comes strictly before ``b`` going counterclockwise from ``base``."""
    bc = base.conj()
    return ccw_less(a * bc, b * bc)


# ---------------------------------------------------------------------------
# Arcs
# ---------------------------------------------------------------------------

Endpoint = Union[UnitPoint, Angle]


class CircularArc:
    """Counterclockwise arc from ``start`` to ``end``.

    Endpoints are UnitPoints (exact membership) or Angles (membership via
    error-bounded comparison, raising Indeterminate near an endpoint).
    ``full=True`` denotes the whole circle.
    """

    __slots__ = ("start", "end", "closed_start", "closed_end", "full")

    def __init__(self, start: Endpoint, end: Endpoint, closed_start: bool = True,
                 closed_end: bool = True, full: bool = False):
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)
        object.__setattr__(self, "closed_start", closed_start)
        object.__setattr__(self, "closed_end", closed_end)
        object.__setattr__(self, "full", full)

    def __setattr__(self, name, value):
        raise AttributeError("CircularArc is immutable")

    @classmethod
    def full_circle(cls) -> "CircularArc":
        return cls(ONE, ONE, True, True, full=True)

    @classmethod
    def closed(cls, a: Endpoint, b: Endpoint) -> "CircularArc":
        return cls(a, b, True, True)

    @classmethod
    def open(cls, a: Endpoint, b: Endpoint) -> "CircularArc":
        return cls(a, b, False, False)

    @property
    def exact_endpoints(self) -> bool:
        return isinstance(self.start, GaussianRational) and isinstance(self.end, GaussianRational)

    def contains(self, z: GaussianRational) -> bool:
        if self.full:
            return True
        if self.exact_endpoints:
            a, b = self.start, self.end
            if z == a:
                return self.closed_start or (a == b and self.closed_end)
            if z == b:
                return self.closed_end
            if a == b:
                return False
            return ccw_offset_less(a, z, b)
        return self._contains_approx(z)

    def _contains_approx(self, z: GaussianRational) -> bool:
        s = _endpoint_angle(self.start)
        ln = self.length()
        t = (point_angle(z) - s).mod_2pi()
        tol = t.err + ln.err + s.err
        if abs(t.value) <= tol or abs(t.value - 2 * mp.pi) <= tol:
            if self.closed_start:
                return True
            raise Indeterminate("point within error of arc start")
        if abs(t.value - ln.value) <= tol:
            if self.closed_end:
                return True
            raise Indeterminate("point within error of arc end")
        return t.value < ln.value

    def length(self) -> Angle:
        if self.full:
            return Angle.pi_multiple(2)
        if self.exact_endpoints:
            if self.start == self.end:
                return Angle.pi_multiple(0)
            return point_angle(self.end * self.start.conj())
        return (_endpoint_angle(self.end) - _endpoint_angle(self.start)).mod_2pi()

    def to_json(self) -> dict:
        def ep(x):
            return {"point": x.to_json()} if isinstance(x, GaussianRational) else {"angle": x.to_json()}

        return {
            "start": ep(self.start),
            "end": ep(self.end),
            "closed_start": self.closed_start,
            "closed_end": self.closed_end,
            "full": self.full,
        }

    def __repr__(self):
        lb = "[" if self.closed_start else "("
        rb = "]" if self.closed_end else ")"
        if self.full:
            return "CircularArc(full)"
        return f"Arc{lb}{self.start}, {self.end}{rb}"


def _endpoint_angle(x: Endpoint) -> Angle:
    return point_angle(x) if isinstance(x, GaussianRational) else as_angle(x)


def arc_contains(arc: CircularArc, z: GaussianRational) -> bool:
    return arc.contains(z)


def arc_length(arc: CircularArc) -> Angle:
    return arc.length()


# ---------------------------------------------------------------------------
# Rational points from angles
# ---------------------------------------------------------------------------


def point_from_half_tangent(r: Fraction) -> UnitPoint:
    """The rational point ``((1-r²)/(1+r²), 2r/(1+r²))`` at angle ``2·arctan r``."""
    r = as_fraction(r)
    d = 1 + r * r
    return UnitPoint((1 - r * r) / d, 2 * r / d)


def rational_circle_point_with_angle(theta, eps) -> tuple[UnitPoint, Angle]:
    """Rational point within angular distance ``eps`` of ``theta``.

    Returns the point and its angle ``θ̂`` (an Angle with an error bound).
    The angle is reduced by exact quarter turns to ``|y| ≤ π/4`` and the
    half-angle tangent of the remainder is rounded to a dyadic rational.
    """
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise PreconditionViolated("eps must lie in (0, 1)")
    th = as_angle(theta)
    if th.exact is not None and th.unit == "pi" and (2 * th.exact).denominator == 1:
        k = int(2 * th.exact) % 4
        pt = [ONE, I_UNIT, MINUS_ONE, MINUS_I][k]
        return pt, Angle.pi_multiple(Fraction(k, 2))
    bits = max(8, (eps.denominator // max(eps.numerator, 1)).bit_length() + 8)
    prec = bits + 64
    with mp.workprec(prec):
        x = th.mp_value(prec)
        err_in = th.error_at(prec)
        if err_in * 4 >= _frac_to_mpf(eps):
            raise PreconditionViolated("angle error bound too large for requested eps")
        quarter = mp.pi / 2
        k = int(mpmath.nint(x / quarter))
        y = x - k * quarter
        t = mpmath.tan(y / 2)
        r = Fraction(int(mpmath.nint(t * mpf(2) ** bits)), 2 ** bits)
        pt = point_from_half_tangent(r)
        rot = [ONE, I_UNIT, MINUS_ONE, MINUS_I][k % 4]
        pt = pt * rot
        approx = 2 * mpmath.atan(_frac_to_mpf(r)) + k * quarter
        bound = err_in + mpf(2) ** (-(prec - 8)) * (1 + abs(x))
    return pt, Angle(approx, bound)


def rational_circle_point(theta, eps) -> UnitPoint:
    """Rational point ``(c, s)`` on the unit circle at angle within ``eps`` of ``theta``."""
    return rational_circle_point_with_angle(theta, eps)[0]


# ---------------------------------------------------------------------------
# Continued fractions
# ---------------------------------------------------------------------------


def convergents(alpha: Fraction):
    """Yield the continued-fraction convergents of a rational number."""
    alpha = as_fraction(alpha)
    p0, q0, p1, q1 = 0, 1, 1, 0
    num, den = alpha.numerator, alpha.denominator
    while den:
        a, rem = divmod(num, den)
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        yield Fraction(p1, q1)
        num, den = den, rem


def continued_fraction_round(alpha, K: int) -> Optional[Fraction]:
    """The unique ``p/q`` with ``q ≤ K`` and ``|alpha − p/q| < 1/(2K²)``, or None.

    Any such fraction satisfies ``|alpha − p/q| < 1/(2q²)`` and is therefore a
    convergent of ``alpha``, so scanning convergents with ``q ≤ K`` suffices.
    """
    if K < 1:
        raise PreconditionViolated("K must be a positive integer")
    alpha = as_fraction(alpha)
    bound = Fraction(1, 2 * K * K)
    for c in convergents(alpha):
        if c.denominator > K:
            break
        if abs(alpha - c) < bound:
            return c
    return None


def mp_to_fraction(x: mpf) -> Fraction:
    """Exact rational value of a binary floating-point number."""
    man, exp = mpmath.mpf(x).man_exp
    if exp >= 0:
        return Fraction(int(man) << exp)
    return Fraction(int(man), 1 << (-exp))


def gaussian_from_mpc(z: mpc) -> GaussianRational:
    return GaussianRational(mp_to_fraction(z.real), mp_to_fraction(z.imag))
