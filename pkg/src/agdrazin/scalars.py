"""Complex scalars with an exact (rational) and an approximate (float) mode.

Exact scalars hold ``Fraction`` real and imaginary parts and support
decidable equality; approximate scalars hold floats and are compared
within a tolerance.  Mixed-mode arithmetic demotes to approximate.

Modulus comparisons are done through the squared modulus, which stays
rational in exact mode, so "is |z| smaller than eps" is decided exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import isqrt
from typing import Union

from .errors import ParseError

RationalLike = Union[int, Fraction]
NumberLike = Union[int, float, complex, Fraction, str]


def as_fraction(value) -> Fraction:
    """Parse an exact rational from an int, Fraction or 'p/q' string."""
    if isinstance(value, bool):
        raise ParseError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {value!r}") from exc
    if isinstance(value, float):
        # floats are exact dyadic rationals; conversion is faithful
        return Fraction(value)
    raise ParseError(f"not a rational: {value!r}")


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


class Scalar:
    """A complex number whose parts are both Fraction (exact) or both float."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        if isinstance(re, float) or isinstance(im, float):
            re = float(re)
            im = float(im)
        else:
            re = Fraction(re)
            im = Fraction(im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    # -- construction -----------------------------------------------------

    @classmethod
    def exact(cls, re, im=0) -> "Scalar":
        return cls(Fraction(re), Fraction(im))

    @classmethod
    def approx(cls, re, im=0.0) -> "Scalar":
        return cls(float(re), float(im))

    @classmethod
    def from_value(cls, value: NumberLike) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, complex):
            return cls(float(value.real), float(value.imag))
        if isinstance(value, float):
            return cls(Fraction(value), Fraction(0))
        if isinstance(value, (int, Fraction, str)):
            return cls(as_fraction(value), Fraction(0))
        raise ParseError(f"cannot build a scalar from {value!r}")

    # -- predicates --------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return isinstance(self.re, Fraction)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "Scalar":
        return Scalar(-self.re, -self.im)

    def __mul__(self, other: "Scalar") -> "Scalar":
        return Scalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other: "Scalar") -> "Scalar":
        d = other.mod2()
        if d == 0:
            raise ZeroDivisionError("division by zero scalar")
        re = (self.re * other.re + self.im * other.im) / d
        im = (self.im * other.re - self.re * other.im) / d
        return Scalar(re, im)

    def conjugate(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def reciprocal(self) -> "Scalar":
        return ONE / self

    def mod2(self):
        """Squared modulus; a Fraction in exact mode, else a float."""
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.hypot(float(self.re), float(self.im))

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scalar):
            return NotImplemented
        # Fraction == float compares exact values, so mixed modes are sound
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def close_to(self, other: "Scalar", tol: float) -> bool:
        return abs(self - other) <= tol

    def sort_key(self):
        return (float(self.re), float(self.im), str(self.re), str(self.im))

    # -- rendering -------------------------------------------------------------

    def __repr__(self) -> str:
        if self.is_exact:
            if self.im == 0:
                return str(self.re)
            return f"({self.re}{'+' if self.im >= 0 else ''}{self.im}i)"
        if self.im == 0:
            return repr(self.re)
        return f"({self.re!r}{'+' if self.im >= 0 else ''}{self.im!r}i)"


ZERO = Scalar(0)
ONE = Scalar(1)


# ---------------------------------------------------------------------------
# JSON-facing scalar forms: number | "p/q" | [re, im] with rational parts


def parse_scalar(obj) -> Scalar:
    """Parse a scalar from its serialized form.

    Bare ints and 'p/q' strings parse exactly; bare floats parse as
    approximate; a two-element list is (re, im) with each part either
    exact (int or 'p/q') or approximate (float).
    """
    if isinstance(obj, Scalar):
        return obj
    if isinstance(obj, bool):
        raise ParseError("booleans are not scalars")
    if isinstance(obj, int):
        return Scalar(Fraction(obj))
    if isinstance(obj, float):
        return Scalar(float(obj), 0.0)
    if isinstance(obj, str):
        return Scalar(as_fraction(obj))
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        parts = []
        approx = any(isinstance(p, float) for p in obj)
        for p in obj:
            if isinstance(p, bool):
                raise ParseError("booleans are not scalar parts")
            if isinstance(p, (int, str)):
                parts.append(as_fraction(p))
            elif isinstance(p, float):
                parts.append(p)
            else:
                raise ParseError(f"bad scalar part: {p!r}")
        if approx:
            return Scalar(float(parts[0]), float(parts[1]))
        return Scalar(parts[0], parts[1])
    raise ParseError(f"bad scalar: {obj!r}")


def format_scalar(s: Scalar):
    """Serialized form of a scalar (inverse of parse_scalar)."""
    if s.is_exact:
        if s.im == 0:
            return format_fraction(s.re)
        return [format_fraction(s.re), format_fraction(s.im)]
    if s.im == 0:
        return float(s.re)
    return [float(s.re), float(s.im)]


# ---------------------------------------------------------------------------
# rational square roots and bounds


def exact_sqrt(q: Fraction):
    """Exact square root of a nonnegative rational, or None."""
    if q < 0:
        raise ValueError("negative radicand")
    if q == 0:
        return Fraction(0)
    rn = isqrt(q.numerator)
    rd = isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def sqrt_bounds(q: Fraction, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational lo <= sqrt(q) <= hi with hi - lo <= 2^-bits * scale."""
    if q < 0:
        raise ValueError("negative radicand")
    if q == 0:
        return Fraction(0), Fraction(0)
    scale = 1 << bits
    n = q.numerator * scale * scale
    r = isqrt(n // q.denominator)
    lo = Fraction(r, scale)
    hi = Fraction(r + 2, scale)
    # widen lo slightly: integer division may round inside
    while lo * lo > q:
        lo = Fraction(lo.numerator - 1, scale)
    while hi * hi < q:
        hi = Fraction(hi.numerator + 1, scale)
    return lo, hi


def ceil_root(q: Fraction, k: int) -> int:
    """Smallest positive integer N with N^k >= q."""
    if k <= 0:
        raise ValueError("root order must be positive")
    if q <= 1:
        return 1
    # integer k-th root of ceil(q)
    target = -(-q.numerator // q.denominator)  # ceil(q)
    n = max(1, int(round(target ** (1.0 / k))))
    while n**k >= target and n > 1 and (n - 1) ** k >= target:
        n -= 1
    while n**k < target:
        n += 1
    # strictness: need N^k >= q, not just >= ceil approximation artifacts
    while Fraction(n**k) < q:
        n += 1
    return n
