"""Structured point families: the building blocks of representable spectra.

A family describes a bounded, countable multiset of complex points together
with exact rules for its accumulation points:

* ``Finite``    -- an explicit list of points; no accumulation.
* ``Constant``  -- the constant sequence v, v, v, ...; point set {v}.
* ``Power``     -- entries ``shift + c * n**(-p)`` for n >= 1; accumulates
  exactly at ``shift``.
* ``Geometric`` -- entries ``shift + c * r**n`` with 0 < |r| < 1; accumulates
  exactly at ``shift``.
* ``Cluster``   -- entries ``shift + mu_m * (1 + nu_n)`` where ``mu_m`` runs
  over a centers family and ``nu_n`` over a spread family vanishing in the
  limit; the spread values are offsets relative to each center, so the set
  accumulates exactly at the closure of the (shifted) centers.

Families double as diagonal sequences: ``entry(k)`` is the k-th value in a
fixed enumeration (Cantor diagonal order for ``Cluster``).  The ``skip`` set
removes finitely many positions from the *set* semantics; it never affects
accumulation.

All modulus comparisons go through squared moduli, which remain rational for
exact data, so cut decisions are exact whenever the inputs are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Iterator, Optional, Union

from .errors import CutInvalid, MalformedFamily
from .scalars import Scalar, as_fraction, ceil_root, format_scalar, parse_scalar, sqrt_bounds

_SCAN_CAP = 10**7


def scalar_pow(s: Scalar, k: int) -> Scalar:
    if k < 0:
        raise ValueError("negative power")
    out = Scalar(1)
    base = s
    while k:
        if k & 1:
            out = out * base
        base = base * base
        k >>= 1
    return out


def cluster_pair(m: int, n: int) -> int:
    """Linear position of the (m, n) cluster entry, both 1-based."""
    d = m + n - 2
    return d * (d + 1) // 2 + m


def cluster_unpair(k: int) -> tuple[int, int]:
    """Inverse of cluster_pair."""
    d = (isqrt(8 * k - 7) - 1) // 2
    base = d * (d + 1) // 2
    if k - base > d + 1:
        d += 1
        base = d * (d + 1) // 2
    j = k - base
    return j, d + 2 - j


def _is_exact_num(x) -> bool:
    return isinstance(x, (int, Fraction))


def _mod_lo(x2) -> Union[Fraction, float]:
    """Rational (or float) lower bound on sqrt(x2)."""
    if _is_exact_num(x2):
        return sqrt_bounds(Fraction(x2))[0]
    return math.sqrt(x2) * (1 - 1e-14)


def _mod_hi(x2) -> Union[Fraction, float]:
    if _is_exact_num(x2):
        return sqrt_bounds(Fraction(x2))[1]
    return math.sqrt(x2) * (1 + 1e-14)


def _check_skip(skip) -> frozenset:
    skip = frozenset(skip)
    if any((not isinstance(i, int)) or i < 1 for i in skip):
        raise MalformedFamily("skip positions must be positive integers")
    return skip


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Finite:
    """An explicit finite point set (not usable as an infinite diagonal)."""

    points: tuple

    def __init__(self, points):
        pts = tuple(p if isinstance(p, Scalar) else Scalar.from_value(p) for p in points)
        seen = []
        for p in pts:
            if p not in seen:
                seen.append(p)
        object.__setattr__(self, "points", tuple(sorted(seen, key=Scalar.sort_key)))

    @property
    def is_exact(self) -> bool:
        return all(p.is_exact for p in self.points)

    def values(self, depth: int) -> list[Scalar]:
        return list(self.points)

    def acc_parts(self) -> tuple[tuple, tuple]:
        return (), ()

    def contains_value(self, v: Scalar) -> bool:
        return v in self.points

    def near_value(self, v: Scalar, tol: float) -> bool:
        return any(p.close_to(v, tol) for p in self.points)

    def affine(self, alpha: Scalar, beta: Scalar) -> "Finite":
        return Finite([p * alpha + beta for p in self.points])

    def kind_tag(self) -> str:
        return "finite"


@dataclass(frozen=True)
class Constant:
    """The constant diagonal sequence; as a set, the singleton {value}."""

    value: Scalar

    def __init__(self, value):
        object.__setattr__(
            self, "value", value if isinstance(value, Scalar) else Scalar.from_value(value)
        )

    @property
    def is_exact(self) -> bool:
        return self.value.is_exact

    @property
    def skip(self) -> frozenset:
        return frozenset()

    def entry(self, k: int) -> Scalar:
        return self.value

    def values(self, depth: int) -> list[Scalar]:
        return [self.value]

    def acc_parts(self) -> tuple[tuple, tuple]:
        return (), ()

    def contains_value(self, v: Scalar) -> bool:
        return v == self.value

    def near_value(self, v: Scalar, tol: float) -> bool:
        return self.value.close_to(v, tol)

    def affine(self, alpha: Scalar, beta: Scalar):
        return Constant(self.value * alpha + beta)

    def kind_tag(self) -> str:
        return "constant"


@dataclass(frozen=True)
class Power:
    """Entries ``shift + c * n**(-p)``, n >= 1, with c != 0 and p > 0."""

    c: Scalar
    p: Fraction
    shift: Scalar = Scalar(0)
    skip: frozenset = frozenset()

    def __init__(self, c, p, shift=Scalar(0), skip=frozenset()):
        c = c if isinstance(c, Scalar) else Scalar.from_value(c)
        shift = shift if isinstance(shift, Scalar) else Scalar.from_value(shift)
        p = as_fraction(p)
        if c.is_zero():
            raise MalformedFamily("power family needs c != 0 (use a constant family)")
        if p <= 0:
            raise MalformedFamily("power exponent must be positive")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "skip", _check_skip(skip))

    @property
    def is_exact(self) -> bool:
        return self.c.is_exact and self.shift.is_exact and self.p.denominator == 1

    def _scale(self, n: int) -> Scalar:
        # n**(-p); exact when p is an integer
        if self.p.denominator == 1:
            return Scalar(Fraction(1, n ** self.p.numerator))
        return Scalar(float(n) ** (-float(self.p)), 0.0)

    def entry(self, k: int) -> Scalar:
        return self.shift + self.c * self._scale(k)

    def values(self, depth: int) -> list[Scalar]:
        out = []
        k = 1
        while len(out) < depth:
            if k not in self.skip:
                out.append(self.entry(k))
            k += 1
        return out

    def acc_parts(self) -> tuple[tuple, tuple]:
        return (self.shift,), ()

    # squared modulus of the deviation c * n**(-p): exact when 2p is integral
    def dev_mod2(self, n: int):
        c2 = self.c.mod2()
        two_p = 2 * self.p
        if two_p.denominator == 1 and _is_exact_num(c2):
            return c2 / Fraction(n ** two_p.numerator)
        return float(c2) * float(n) ** (-2.0 * float(self.p))

    def positions_dev_above(self, t2) -> list[int]:
        """Positions n (unskipped) with |c n^-p|^2 > t2, a finite prefix."""
        if t2 <= 0:
            raise ValueError("threshold must be positive")
        c2 = self.c.mod2()
        if _is_exact_num(c2) and _is_exact_num(t2) and (2 * self.p).denominator <= 2:
            q = Fraction(c2) / Fraction(t2)
            a = (2 * self.p).numerator
            b = (2 * self.p).denominator
            bound = ceil_root(q**b, a)  # smallest N with N^(2p) >= q
            hi = bound + 2
        else:
            hi = int((float(c2) / float(t2)) ** (1.0 / (2.0 * float(self.p)))) + 2
        if hi > _SCAN_CAP:
            raise CutInvalid("cut requires scanning too many entries")
        return [n for n in range(1, hi + 1) if n not in self.skip and self.dev_mod2(n) > t2]

    def contains_value(self, v: Scalar) -> bool:
        if not (self.is_exact and v.is_exact):
            raise ValueError("exact membership needs exact data")
        target = v - self.shift
        # target = c / n**p with integral p
        ratio = target
        if self.c.is_zero():
            return False
        ratio = target / self.c
        # ratio must be 1/n**p: real, positive, with rational structure
        if ratio.im != 0 or ratio.re <= 0:
            return False
        q = Fraction(ratio.re) ** -1  # n**p
        p_int = self.p.numerator  # denominator == 1 by is_exact
        if q.denominator != 1:
            return False
        n = round(q.numerator ** (1.0 / p_int))
        for cand in (n - 1, n, n + 1):
            if cand >= 1 and cand**p_int == q.numerator and cand not in self.skip:
                return True
        return False

    def near_value(self, v: Scalar, tol: float) -> bool:
        lo = max(abs(v) - tol, 0.0)
        c_abs = abs(self.c)
        if abs(self.shift) > 1e-300:
            # shifted: scan until deviation is below tol plus shift clearance
            limit = int((c_abs / max(tol, 1e-300)) ** (1.0 / float(self.p))) + 2
            limit = min(limit, _SCAN_CAP)
            for n in range(1, limit + 1):
                if n not in self.skip and self.entry(n).close_to(v, tol):
                    return True
            return self.shift.close_to(v, tol)
        if lo <= 0:
            return False  # entries never vanish; 0 is only the limit
        n_hi = int((c_abs / lo) ** (1.0 / float(self.p))) + 2
        n_lo = max(1, int((c_abs / (abs(v) + tol)) ** (1.0 / float(self.p))) - 2)
        for n in range(n_lo, min(n_hi, _SCAN_CAP) + 1):
            if n not in self.skip and self.entry(n).close_to(v, tol):
                return True
        return False

    def affine(self, alpha: Scalar, beta: Scalar):
        if alpha.is_zero():
            return Constant(beta)
        return Power(self.c * alpha, self.p, self.shift * alpha + beta, self.skip)

    def with_extra_skip(self, positions) -> "Power":
        return Power(self.c, self.p, self.shift, self.skip | frozenset(positions))

    def kind_tag(self) -> str:
        return "power"


@dataclass(frozen=True)
class Geometric:
    """Entries ``shift + c * r**n``, n >= 1, with c != 0 and 0 < |r| < 1."""

    c: Scalar
    r: Scalar
    shift: Scalar = Scalar(0)
    skip: frozenset = frozenset()

    def __init__(self, c, r, shift=Scalar(0), skip=frozenset()):
        c = c if isinstance(c, Scalar) else Scalar.from_value(c)
        r = r if isinstance(r, Scalar) else Scalar.from_value(r)
        shift = shift if isinstance(shift, Scalar) else Scalar.from_value(shift)
        if c.is_zero():
            raise MalformedFamily("geometric family needs c != 0 (use a constant family)")
        rho = r.mod2()
        if not (0 < rho < 1):
            raise MalformedFamily("geometric ratio needs 0 < |r| < 1")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "skip", _check_skip(skip))

    @property
    def is_exact(self) -> bool:
        return self.c.is_exact and self.r.is_exact and self.shift.is_exact

    def entry(self, k: int) -> Scalar:
        return self.shift + self.c * scalar_pow(self.r, k)

    def values(self, depth: int) -> list[Scalar]:
        out = []
        k = 1
        while len(out) < depth:
            if k not in self.skip:
                out.append(self.entry(k))
            k += 1
        return out

    def acc_parts(self) -> tuple[tuple, tuple]:
        return (self.shift,), ()

    def dev_mod2(self, n: int):
        c2 = self.c.mod2()
        rho = self.r.mod2()
        if _is_exact_num(c2) and _is_exact_num(rho):
            return Fraction(c2) * Fraction(rho) ** n
        return float(c2) * float(rho) ** n

    def positions_dev_above(self, t2) -> list[int]:
        """Positions n (unskipped) with |c r^n|^2 > t2, a finite prefix."""
        if t2 <= 0:
            raise ValueError("threshold must be positive")
        c2 = float(self.c.mod2())
        rho = float(self.r.mod2())
        if c2 <= float(t2):
            hi = 1
        else:
            hi = int(math.log(float(t2) / c2) / math.log(rho)) + 3
        if hi > _SCAN_CAP:
            raise CutInvalid("cut requires scanning too many entries")
        return [n for n in range(1, hi + 1) if n not in self.skip and self.dev_mod2(n) > t2]

    def contains_value(self, v: Scalar) -> bool:
        if not (self.is_exact and v.is_exact):
            raise ValueError("exact membership needs exact data")
        target = (v - self.shift) / self.c if not self.c.is_zero() else None
        if target is None:
            return False
        t2 = Fraction(target.mod2())
        if t2 == 0:
            return False
        rho = Fraction(self.r.mod2())
        # |r^n|^2 = rho^n must equal t2; find candidate n from moduli
        est = math.log(float(t2)) / math.log(float(rho)) if t2 != 1 else 0.0
        for n in range(max(1, int(est) - 2), int(est) + 3):
            if n >= 1 and n not in self.skip and scalar_pow(self.r, n) == target:
                return True
        return False

    def near_value(self, v: Scalar, tol: float) -> bool:
        c_abs = abs(self.c)
        rho = math.sqrt(float(self.r.mod2()))
        limit = int(math.log(max(tol, 1e-300) / max(c_abs, 1e-300)) / math.log(rho)) + 3
        limit = max(1, min(limit, _SCAN_CAP))
        for n in range(1, limit + 1):
            if n not in self.skip and self.entry(n).close_to(v, tol):
                return True
        return self.shift.close_to(v, tol)

    def affine(self, alpha: Scalar, beta: Scalar):
        if alpha.is_zero():
            return Constant(beta)
        return Geometric(self.c * alpha, self.r, self.shift * alpha + beta, self.skip)

    def with_extra_skip(self, positions) -> "Geometric":
        return Geometric(self.c, self.r, self.shift, self.skip | frozenset(positions))

    def kind_tag(self) -> str:
        return "geometric"


@dataclass(frozen=True)
class Cluster:
    """Entries ``shift + mu_m * (1 + nu_n)`` in Cantor diagonal order.

    ``centers`` is a Finite, Power or Geometric family (unshifted when
    infinite); ``spread`` is an unshifted Power or Geometric family, so the
    relative offsets vanish in the limit and the set accumulates exactly at
    the closure of the shifted centers.
    """

    centers: Union[Finite, Power, Geometric]
    spread: Union[Power, Geometric]
    shift: Scalar = Scalar(0)
    skip: frozenset = frozenset()

    def __init__(self, centers, spread, shift=Scalar(0), skip=frozenset()):
        shift = shift if isinstance(shift, Scalar) else Scalar.from_value(shift)
        if isinstance(centers, (Power, Geometric)):
            if not centers.shift.is_zero() or centers.skip:
                raise MalformedFamily("cluster centers must be unshifted and skip-free")
        elif isinstance(centers, Finite):
            if not centers.points:
                raise MalformedFamily("cluster centers must be nonempty")
        else:
            raise MalformedFamily("cluster centers must be finite, power or geometric")
        if not isinstance(spread, (Power, Geometric)):
            raise MalformedFamily("cluster spread must be a power or geometric family")
        if not spread.shift.is_zero() or spread.skip:
            raise MalformedFamily("cluster spread must be unshifted and skip-free")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "spread", spread)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "skip", _check_skip(skip))

    @property
    def is_exact(self) -> bool:
        return self.centers.is_exact and self.spread.is_exact and self.shift.is_exact

    def center_entry(self, m: int) -> Scalar:
        if isinstance(self.centers, Finite):
            pts = self.centers.points
            return pts[(m - 1) % len(pts)]
        return self.centers.entry(m)

    def center_count(self) -> Optional[int]:
        if isinstance(self.centers, Finite):
            return len(self.centers.points)
        return None

    def entry(self, k: int) -> Scalar:
        m, n = cluster_unpair(k)
        return self.shift + self.center_entry(m) * (Scalar(1) + self.spread.entry(n))

    def values(self, depth: int) -> list[Scalar]:
        out = []
        k = 1
        while len(out) < depth:
            if k not in self.skip:
                out.append(self.entry(k))
            k += 1
        return out

    def acc_parts(self) -> tuple[tuple, tuple]:
        fam = self.centers.affine(Scalar(1), self.shift)
        if isinstance(fam, Finite):
            return tuple(fam.points), ()
        return (), (fam,)

    def spread_mod2_max(self):
        return self.spread.dev_mod2(1)

    def centers_mod2_max(self):
        if isinstance(self.centers, Finite):
            vals = [p.mod2() for p in self.centers.points]
            return max(vals) if vals else 0
        return self.centers.dev_mod2(1)

    def _center_positions_above(self, t2) -> list[int]:
        """Center indices m with |mu_m|^2 > t2 (finite)."""
        if isinstance(self.centers, Finite):
            return [
                m + 1 for m, p in enumerate(self.centers.points) if p.mod2() > t2
            ]
        return self.centers.positions_dev_above(t2)

    def contains_value(self, v: Scalar) -> bool:
        if not (self.is_exact and v.is_exact):
            raise ValueError("exact membership needs exact data")
        target = v - self.shift
        t2 = target.mod2()
        s_hi = _mod_hi(self.spread_mod2_max())
        # candidate centers: |mu| >= |target| / (1 + s_hi)
        if t2 == 0:
            cands = [
                m
                for m in range(1, (self.center_count() or 0) + 1)
                if self.center_entry(m).is_zero()
            ]
            # infinite centers never hit zero exactly
        else:
            floor2 = Fraction(t2) / (Fraction(1) + s_hi) ** 2
            if isinstance(self.centers, Finite):
                cands = [
                    m + 1
                    for m, p in enumerate(self.centers.points)
                    if p.mod2() > floor2 or p.mod2() == floor2
                ]
            else:
                cands = self.centers.positions_dev_above(floor2 / 2)
        for m in cands:
            mu = self.center_entry(m)
            if mu.is_zero():
                if target.is_zero():
                    # entry equals shift at every n for this center
                    for n in range(1, 4):
                        if cluster_pair(m, n) not in self.skip:
                            return True
                continue
            ratio = target / mu - Scalar(1)
            if ratio.is_zero():
                continue
            if self.spread.contains_value(ratio):
                n = self._spread_index_of(ratio)
                if n is not None and cluster_pair(m, n) not in self.skip:
                    return True
        return False

    def _spread_index_of(self, value: Scalar) -> Optional[int]:
        v2 = value.mod2()
        hits = self.spread.positions_dev_above(v2 / 2)
        for n in hits:
            if self.spread.entry(n) == value:
                return n
        return None

    def near_value(self, v: Scalar, tol: float) -> bool:
        target_abs = abs(v - self.shift)
        s_hi = math.sqrt(float(self.spread_mod2_max()))
        floor = max((target_abs - tol) / (1 + s_hi), 0.0)
        if floor > 0:
            cands = self._center_positions_above(floor * floor / 2)
        else:
            cands = self._center_positions_above(max(tol * tol / 4, 1e-300))
            if isinstance(self.centers, Finite):
                cands = list(range(1, len(self.centers.points) + 1))
        for m in cands:
            mu = self.center_entry(m)
            mu_abs = abs(mu)
            if mu_abs <= 1e-300:
                if abs(v - self.shift) <= tol:
                    return True
                continue
            rel_tol = tol / mu_abs
            ratio = (v - self.shift) / mu - Scalar(1)
            if self.spread.near_value(ratio, rel_tol * 1.0000001):
                return True
        return False

    def affine(self, alpha: Scalar, beta: Scalar):
        if alpha.is_zero():
            return Constant(beta)
        new_centers = self.centers.affine(alpha, Scalar(0))
        return Cluster(new_centers, self.spread, self.shift * alpha + beta, self.skip)

    def with_extra_skip(self, positions) -> "Cluster":
        return Cluster(self.centers, self.spread, self.shift, self.skip | frozenset(positions))

    def kind_tag(self) -> str:
        return "cluster"


Family = Union[Finite, Constant, Power, Geometric, Cluster]
INFINITE_KINDS = (Constant, Power, Geometric, Cluster)


# ---------------------------------------------------------------------------
# circle clearance: is the closure of a family disjoint from a band around
# the circle |z| = eps, and how close does it come?


@dataclass(frozen=True)
class Clearance:
    clear: bool
    gap: Union[Fraction, float]
    gap_exact: bool

    def merge(self, other: "Clearance") -> "Clearance":
        if other.gap < self.gap:
            return Clearance(self.clear and other.clear, other.gap, other.gap_exact)
        return Clearance(self.clear and other.clear, self.gap, self.gap_exact and other.gap_exact)


def _point_gap(mod2_value, eps: Fraction) -> tuple[Union[Fraction, float], bool]:
    """|sqrt(mod2) - eps| with an exactness flag."""
    if _is_exact_num(mod2_value):
        from .scalars import exact_sqrt

        root = exact_sqrt(Fraction(mod2_value))
        if root is not None:
            return abs(root - eps), True
        lo, hi = sqrt_bounds(Fraction(mod2_value))
        if lo >= eps:
            return lo - eps, False
        if hi <= eps:
            return eps - hi, False
        return Fraction(0), False
    root = math.sqrt(mod2_value)
    return abs(root - float(eps)), False


def _band_sides(mod2_value, lo2, hi2) -> int:
    """-1 below band, +1 above band, 0 inside (violating)."""
    if mod2_value <= lo2:
        return -1
    if mod2_value >= hi2:
        return 1
    return 0


def _clearance_from_mod2s(mod2s, eps: Fraction, lo2, hi2) -> Clearance:
    clear = True
    gap: Union[Fraction, float] = eps * 10**6 + 1
    gap_exact = True
    for m2 in mod2s:
        if _band_sides(m2, lo2, hi2) == 0:
            clear = False
        g, ex = _point_gap(m2, eps)
        if g < gap:
            gap, gap_exact = g, ex
        elif g == gap:
            gap_exact = gap_exact and ex
    return Clearance(clear, gap, gap_exact)


def family_clearance(fam: Family, eps: Fraction, delta: Fraction) -> Clearance:
    """Clearance of the family closure from the band (eps-delta, eps+delta).

    The boolean decision is rigorous.  The gap is the exact minimum distance
    to the circle for finite data and unshifted power/geometric families with
    real rational moduli; otherwise it is a rigorous lower bound.
    """
    lo2 = (eps - delta) ** 2
    hi2 = (eps + delta) ** 2
    eps2 = eps * eps
    if isinstance(fam, Finite):
        return _clearance_from_mod2s([p.mod2() for p in fam.points], eps, lo2, hi2)
    if isinstance(fam, Constant):
        return _clearance_from_mod2s([fam.value.mod2()], eps, lo2, hi2)
    if isinstance(fam, (Power, Geometric)):
        shift2 = fam.shift.mod2()
        if fam.shift.is_zero():
            # entries have monotone deviation moduli: |entry| = |c| * scale(n)
            # candidates: entries with dev_mod2 above a floor below eps^2,
            # i.e. the bracketing entries, plus the limit point 0
            floor = lo2 / 4 if lo2 > 0 else eps2 / 4
            positions = fam.positions_dev_above(floor)
            mod2s = [fam.dev_mod2(n) for n in positions]
            # first entry below the floor dominates the remaining tail
            nxt = _next_unskipped(fam, positions)
            if nxt is not None:
                mod2s.append(fam.dev_mod2(nxt))
            mod2s.append(Fraction(0) if fam.is_exact else 0.0)
            return _clearance_from_mod2s(mod2s, eps, lo2, hi2)
        return _shifted_clearance(fam, eps, delta, lo2, hi2)
    if isinstance(fam, Cluster):
        return _cluster_clearance(fam, eps, delta, lo2, hi2)
    raise TypeError(f"unknown family {fam!r}")


def _next_unskipped(fam, positions) -> Optional[int]:
    n = (max(positions) if positions else 0) + 1
    while n in fam.skip:
        n += 1
    return n


def _shifted_clearance(fam, eps, delta, lo2, hi2) -> Clearance:
    """Power/Geometric with nonzero shift: entries approach the shift."""
    s2 = fam.shift.mod2()
    side = _band_sides(s2, lo2, hi2)
    base = _clearance_from_mod2s([s2], eps, lo2, hi2)
    if side == 0:
        return base
    # margin between |shift| and the nearer band edge, as a squared modulus
    if _is_exact_num(s2) and _is_exact_num(lo2):
        s_lo, s_hi = sqrt_bounds(Fraction(s2))
        edge = (eps - delta) if side < 0 else (eps + delta)
        margin = (edge - s_hi) if side < 0 else (s_lo - edge)
    else:
        s_abs = math.sqrt(float(s2))
        edge = float(eps - delta) if side < 0 else float(eps + delta)
        margin = abs(edge - s_abs) * 0.999999
    if margin <= 0:
        # shift is numerically on the band edge: treat as violating
        return Clearance(False, base.gap, False)
    half2 = (margin * margin) / 4
    positions = fam.positions_dev_above(half2)
    mod2s = [_entry_mod2(fam, n) for n in positions]
    mod2s.append(s2)
    out = _clearance_from_mod2s(mod2s, eps, lo2, hi2)
    # tail entries stay within margin/2 of |shift|: they cannot enter the band,
    # and their circle distance is at least gap(shift) - margin/2
    tail_gap = base.gap - margin / 2 if base.gap > margin / 2 else base.gap * 0
    if tail_gap < out.gap:
        out = Clearance(out.clear, tail_gap, False)
    return out


def _entry_mod2(fam, n: int):
    return fam.entry(n).mod2()


def _cluster_clearance(fam: Cluster, eps, delta, lo2, hi2) -> Clearance:
    acc_points, acc_fams = fam.acc_parts()
    pieces = [_clearance_from_mod2s([p.mod2() for p in acc_points], eps, lo2, hi2)] if acc_points else []
    for f in acc_fams:
        pieces.append(family_clearance(f, eps, delta))
    acc_clear = pieces[0]
    for p in pieces[1:]:
        acc_clear = acc_clear.merge(p)
    if not acc_clear.clear:
        return Clearance(False, acc_clear.gap, acc_clear.gap_exact)
    # levels: for spread index n, entries form the affine image of centers by
    # (1 + nu_n), plus the cluster shift; each level is a plain family
    margin = acc_clear.gap - delta if acc_clear.gap > delta else acc_clear.gap * 0
    bc_hi = _mod_hi(fam.centers_mod2_max())
    out = acc_clear
    n = 1
    while n <= _SCAN_CAP:
        nu = fam.spread.entry(n)
        level = fam.centers.affine(Scalar(1) + nu, fam.shift)
        out = out.merge(family_clearance(level, eps, delta))
        # tail bound: remaining levels deviate from the accumulation family by
        # at most B_c * |nu_(n+1)|
        dev_hi = _mod_hi(fam.spread.dev_mod2(n + 1))
        if bc_hi * dev_hi < margin / 2 if margin > 0 else False:
            tail_gap = acc_clear.gap - bc_hi * dev_hi
            if tail_gap < out.gap:
                out = Clearance(out.clear, tail_gap, False)
            return out
        if margin <= 0:
            return Clearance(False, out.gap, False)
        n += 1
    raise CutInvalid("cluster clearance scan did not terminate")


# ---------------------------------------------------------------------------
# cut partition: which diagonal positions fall strictly inside |z| < eps


@dataclass(frozen=True)
class CutSplit:
    """Per-position split of a diagonal family by the circle |z| = eps.

    ``tail_inside`` is the side taken by all but finitely many positions;
    ``flips`` lists the exceptional positions (position -> inside flag).
    """

    tail_inside: bool
    flips: dict

    def inside(self, k: int) -> bool:
        return self.flips.get(k, self.tail_inside)

    def outside_positions(self) -> list[int]:
        if self.tail_inside:
            return sorted(k for k, v in self.flips.items() if not v)
        raise CutInvalid("outside part is infinite")


def _side_inside(mod2_value, eps2) -> bool:
    if mod2_value == eps2:
        raise CutInvalid("spectrum point lies exactly on the cut circle")
    return mod2_value < eps2


def cut_split(fam: Family, eps: Fraction) -> CutSplit:
    """Partition a diagonal family's positions by the circle |z| = eps.

    Requires the circle to avoid the family closure (checked coarsely here;
    callers validate clearance first).  Raises CutInvalid when both sides are
    infinite, i.e. the accumulation set straddles the circle.
    """
    eps2 = eps * eps
    if isinstance(fam, Constant):
        return CutSplit(_side_inside(fam.value.mod2(), eps2), {})
    if isinstance(fam, (Power, Geometric)):
        tail_inside = _side_inside(fam.shift.mod2(), eps2)
        if fam.shift.is_zero():
            # outside positions are exactly those with deviation above eps
            positions = fam.positions_dev_above(eps2)
            flips = {n: False for n in positions}
            # entries with dev_mod2 == eps2 would sit on the circle
            nxt = _next_unskipped(fam, positions)
            if nxt is not None and fam.dev_mod2(nxt) == eps2:
                raise CutInvalid("spectrum point lies exactly on the cut circle")
            if not tail_inside:
                raise CutInvalid("cut excludes the accumulation point 0")
            return CutSplit(True, flips)
        return _shifted_cut_split(fam, eps, eps2, tail_inside)
    if isinstance(fam, Cluster):
        return _cluster_cut_split(fam, eps, eps2)
    raise TypeError(f"diagonal families only: {fam!r}")


def _shifted_cut_split(fam, eps, eps2, tail_inside: bool) -> CutSplit:
    s2 = fam.shift.mod2()
    if _is_exact_num(s2) and _is_exact_num(eps2):
        s_lo, s_hi = sqrt_bounds(Fraction(s2))
        margin = (eps - s_hi) if tail_inside else (s_lo - eps)
    else:
        margin = abs(math.sqrt(float(s2)) - float(eps)) * 0.999999
    if margin <= 0:
        raise CutInvalid("cut circle too close to an accumulation point")
    positions = fam.positions_dev_above(margin * margin)
    flips = {}
    for n in positions:
        inside = _side_inside(fam.entry(n).mod2(), eps2)
        if inside != tail_inside:
            flips[n] = inside
    return CutSplit(tail_inside, flips)


def _cluster_cut_split(fam: Cluster, eps, eps2) -> CutSplit:
    # the accumulation set (shifted centers closure) must lie inside, else
    # infinitely many positions sit on the outside around some center
    acc_points, acc_fams = fam.acc_parts()
    for p in acc_points:
        if not _side_inside(p.mod2(), eps2):
            raise CutInvalid("a cluster center lies outside the cut")
    for f in acc_fams:
        for p in f.acc_parts()[0]:
            if not _side_inside(p.mod2(), eps2):
                raise CutInvalid("a cluster center limit lies outside the cut")
        outside = f.positions_dev_above(eps2) if f.shift.is_zero() else None
        if outside is None:
            raise CutInvalid("shifted cluster centers are not splittable")
        if outside:
            raise CutInvalid("a cluster center lies outside the cut")
    # every center strictly inside: find exceptional (m, n) entries outside
    flips = {}
    s_hi = _mod_hi(fam.spread_mod2_max())
    shift_hi = _mod_hi(fam.shift.mod2())
    one_plus = (1 + s_hi) ** 2
    # centers with |mu| * (1 + s_max) + |shift| >= eps can produce outside entries
    if _is_exact_num(eps2):
        eps_lo = eps
    else:
        eps_lo = float(eps)
    floor = (eps_lo - shift_hi) if eps_lo > shift_hi else None
    if floor is None:
        # shift alone reaches the circle: fall back to a conservative scan of
        # all centers above a tiny floor
        cand_centers = fam._center_positions_above(eps2 / (4 * one_plus))
    else:
        cand_centers = fam._center_positions_above((floor * floor) / (2 * one_plus))
    for m in cand_centers:
        mu = fam.center_entry(m)
        mu_hi = _mod_hi(mu.mod2())
        if mu_hi == 0:
            continue
        # entries at this center: shift + mu (1 + nu_n) -> shift + mu; the
        # limit is inside; levels with |mu| |nu_n| below the center's own
        # clearance stay inside
        base2 = (fam.shift + mu).mod2()
        if not _side_inside(base2, eps2):
            raise CutInvalid("a cluster center lies outside the cut")
        if _is_exact_num(base2) and _is_exact_num(eps2):
            b_lo, b_hi = sqrt_bounds(Fraction(base2))
            margin = eps - b_hi
        else:
            margin = float(eps) - math.sqrt(float(base2))
        if margin <= 0:
            raise CutInvalid("cut circle too close to a cluster center")
        rel2 = (margin * margin) / (mu_hi * mu_hi) if mu_hi > 0 else None
        levels = fam.spread.positions_dev_above(rel2)
        for n in levels:
            k = cluster_pair(m, n)
            inside = _side_inside(fam.entry(k).mod2(), eps2)
            if not inside:
                flips[k] = False
    return CutSplit(True, flips)


# ---------------------------------------------------------------------------
# serialization


def family_to_json(fam: Family) -> dict:
    out: dict = {"family": fam.kind_tag()}
    if isinstance(fam, Finite):
        out["points"] = [format_scalar(p) for p in fam.points]
        return out
    if isinstance(fam, Constant):
        out["value"] = format_scalar(fam.value)
        return out
    if isinstance(fam, Power):
        out["c"] = format_scalar(fam.c)
        out["p"] = f"{fam.p.numerator}/{fam.p.denominator}"
    elif isinstance(fam, Geometric):
        out["c"] = format_scalar(fam.c)
        out["r"] = format_scalar(fam.r)
    elif isinstance(fam, Cluster):
        out["centers"] = family_to_json(fam.centers)
        out["spread"] = family_to_json(fam.spread)
    if not fam.shift.is_zero():
        out["shift"] = format_scalar(fam.shift)
    if fam.skip:
        out["skip"] = sorted(fam.skip)
    return out


def family_from_json(obj) -> Family:
    if not isinstance(obj, dict) or "family" not in obj:
        raise MalformedFamily(f"family record must be an object with a 'family' tag: {obj!r}")
    tag = obj["family"]
    known = {
        "finite": {"points"},
        "constant": {"value"},
        "power": {"c", "p", "shift", "skip"},
        "geometric": {"c", "r", "shift", "skip"},
        "cluster": {"centers", "spread", "shift", "skip"},
    }
    if tag not in known:
        raise MalformedFamily(f"unknown family kind: {tag!r}")
    extra = set(obj) - known[tag] - {"family"}
    if extra:
        raise MalformedFamily(f"unexpected fields for {tag} family: {sorted(extra)}")
    skip = frozenset(obj.get("skip", ()))
    shift = parse_scalar(obj.get("shift", 0))
    if tag == "finite":
        return Finite([parse_scalar(p) for p in obj.get("points", ())])
    if tag == "constant":
        return Constant(parse_scalar(obj["value"]))
    if tag == "power":
        return Power(parse_scalar(obj["c"]), as_fraction(obj["p"]), shift, skip)
    if tag == "geometric":
        return Geometric(parse_scalar(obj["c"]), parse_scalar(obj["r"]), shift, skip)
    return Cluster(
        family_from_json(obj["centers"]), family_from_json(obj["spread"]), shift, skip
    )
