"""Spectral sets: finitely described closed subsets of the complex plane.

A ``SpectralSet`` is a finite union of family closures plus an optional
explicit zero.  The represented set is always closed: the accumulation
points of every family are part of the set by construction.

The accumulation operation is computed from per-family rules, never by
numerical limit detection:

* finite and constant families have no accumulation points;
* power and geometric families accumulate exactly at their shift;
* cluster families accumulate exactly at the closure of their shifted
  centers.

Union distributes over acc, so the catalog is closed under the operation
and ``acc(acc(S))`` is always a finite set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .config import DEFAULT_TOLERANCES
from .errors import EmptySpectrum
from .families import (
    Cluster,
    Clearance,
    Constant,
    Family,
    Finite,
    Geometric,
    Power,
    family_clearance,
    family_from_json,
    family_to_json,
)
from .scalars import Scalar, as_fraction, exact_sqrt, format_scalar


@dataclass(frozen=True)
class ClassFlags:
    """Membership flags for the nested element classes.

    The implications qnil => acc_class => ag_drazin and
    g_drazin => ag_drazin hold for every constructed instance.
    """

    qnil: bool
    acc_class: bool
    g_drazin: bool
    ag_drazin: bool

    def __post_init__(self) -> None:
        if self.qnil and not self.acc_class:
            raise AssertionError("qnil must imply acc_class")
        if self.acc_class and not self.ag_drazin:
            raise AssertionError("acc_class must imply ag_drazin")
        if self.g_drazin and not self.ag_drazin:
            raise AssertionError("g_drazin must imply ag_drazin")

    def to_json(self) -> dict:
        return {
            "qnil": self.qnil,
            "acc_class": self.acc_class,
            "g_drazin": self.g_drazin,
            "ag_drazin": self.ag_drazin,
        }


class SpectralSet:
    """A closed set: the union of family closures and an optional {0}."""

    __slots__ = ("families", "contains_zero", "_canon")

    def __init__(self, families: Iterable[Family] = (), contains_zero: bool = False):
        object.__setattr__(self, "families", tuple(families))
        object.__setattr__(self, "contains_zero", bool(contains_zero))
        object.__setattr__(self, "_canon", None)

    # -- basic structure ---------------------------------------------------

    @classmethod
    def empty(cls) -> "SpectralSet":
        return cls((), False)

    @classmethod
    def of_points(cls, points) -> "SpectralSet":
        pts = [p if isinstance(p, Scalar) else Scalar.from_value(p) for p in points]
        return cls((Finite(pts),) if pts else (), False)

    def is_empty(self) -> bool:
        c = self.canonical()
        return not c.families and not c.points and not c.contains_zero

    @property
    def is_exact(self) -> bool:
        return all(f.is_exact for f in self.families)

    def canonical(self) -> "CanonicalSet":
        if self._canon is None:
            object.__setattr__(self, "_canon", _canonicalize(self))
        return self._canon

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpectralSet):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def __repr__(self) -> str:
        return f"SpectralSet({describe(self)})"

    # -- enumeration ---------------------------------------------------------

    def sample_points(self, depth: int) -> list[Scalar]:
        """Finitely many points of the set: all finite data plus the first
        ``depth`` entries of each infinite family (closure points included)."""
        c = self.canonical()
        out = list(c.points)
        if c.contains_zero:
            out.append(Scalar(0))
        for fam in c.families:
            out.extend(fam.values(depth))
            pts, fams = fam.acc_parts()
            out.extend(pts)
            for f in fams:
                out.extend(f.values(depth))
                out.extend(f.acc_parts()[0])
        seen: list[Scalar] = []
        for p in out:
            if p not in seen:
                seen.append(p)
        return seen

    def is_finite(self) -> bool:
        return not self.canonical().families

    def finite_points(self) -> list[Scalar]:
        c = self.canonical()
        if c.families:
            raise ValueError("set has infinite families")
        pts = list(c.points)
        if c.contains_zero:
            pts.append(Scalar(0))
        return pts

    def to_json(self) -> dict:
        return {
            "families": [family_to_json(f) for f in self.families],
            "contains_zero": self.contains_zero,
        }

    @classmethod
    def from_json(cls, obj) -> "SpectralSet":
        fams = [family_from_json(f) for f in obj.get("families", ())]
        return cls(fams, bool(obj.get("contains_zero", False)))


@dataclass(frozen=True)
class CanonicalSet:
    """Normal form: infinite families, pooled finite points, explicit zero."""

    families: tuple
    points: tuple
    contains_zero: bool


def _family_sort_key(fam: Family) -> str:
    return json.dumps(family_to_json(fam), sort_keys=True)


def _closure_contains_exact(fam: Family, v: Scalar) -> bool:
    if isinstance(fam, Finite):
        return fam.contains_value(v)
    if isinstance(fam, Constant):
        return fam.contains_value(v)
    if fam.contains_value(v):
        return True
    pts, fams = fam.acc_parts()
    if any(p == v for p in pts):
        return True
    return any(_closure_contains_exact(f, v) for f in fams)


def _closure_near(fam: Family, v: Scalar, tol: float) -> bool:
    if fam.near_value(v, tol):
        return True
    pts, fams = fam.acc_parts()
    if any(p.close_to(v, tol) for p in pts):
        return True
    return any(_closure_near(f, v, tol) for f in fams)


def _canonicalize(s: SpectralSet, eq_tol: float = DEFAULT_TOLERANCES.eq) -> CanonicalSet:
    zero = s.contains_zero
    infinite: list[Family] = []
    points: list[Scalar] = []
    for fam in s.families:
        if isinstance(fam, Finite):
            points.extend(fam.points)
        elif isinstance(fam, Constant):
            points.append(fam.value)
        else:
            infinite.append(fam)

    # merge same-parameter families: a value is present if any copy keeps it
    merged: dict[str, Family] = {}
    for fam in infinite:
        base = json.dumps({k: v for k, v in family_to_json(fam).items() if k != "skip"},
                          sort_keys=True)
        if base in merged:
            prev = merged[base]
            merged[base] = prev.__class__(**_merge_params(prev, fam))
        else:
            merged[base] = fam
    fams = sorted(merged.values(), key=_family_sort_key)

    # zero membership through families (entries or accumulation)
    zero_scalar = Scalar(0)
    if not zero:
        for fam in fams:
            if fam.is_exact:
                if _closure_contains_exact(fam, zero_scalar):
                    zero = True
                    break
            elif _closure_near(fam, zero_scalar, eq_tol):
                zero = True
                break

    out_points: list[Scalar] = []
    for p in points:
        if p.is_zero() or (not p.is_exact and abs(p) <= eq_tol):
            zero = True
            continue
        if any(p == q for q in out_points):
            continue
        absorbed = False
        for fam in fams:
            if p.is_exact and fam.is_exact:
                if _closure_contains_exact(fam, p):
                    absorbed = True
                    break
            elif _closure_near(fam, p, eq_tol):
                absorbed = True
                break
        if not absorbed:
            out_points.append(p)
    out_points.sort(key=Scalar.sort_key)
    return CanonicalSet(tuple(fams), tuple(out_points), zero)


def _merge_params(a: Family, b: Family) -> dict:
    skip = a.skip & b.skip
    if isinstance(a, Power):
        return dict(c=a.c, p=a.p, shift=a.shift, skip=skip)
    if isinstance(a, Geometric):
        return dict(c=a.c, r=a.r, shift=a.shift, skip=skip)
    if isinstance(a, Cluster):
        return dict(centers=a.centers, spread=a.spread, shift=a.shift, skip=skip)
    raise TypeError(a)


# ---------------------------------------------------------------------------
# operations


def acc_of(s: SpectralSet) -> SpectralSet:
    """Accumulation points, computed by the per-family rules."""
    c = s.canonical()
    points: list[Scalar] = []
    fams: list[Family] = []
    for fam in c.families:
        pts, sub = fam.acc_parts()
        points.extend(pts)
        fams.extend(sub)
    if points:
        fams.append(Finite(points))
    return SpectralSet(fams, False)


@dataclass(frozen=True)
class IsoPart:
    """The isolated points of a set, as the symbolic difference S \\ acc S."""

    base: SpectralSet
    acc: SpectralSet

    def contains(self, value, tol: Optional[float] = None) -> bool:
        return contains(self.base, value, tol) and not contains(self.acc, value, tol)

    def sample(self, depth: int) -> list[Scalar]:
        return [p for p in self.base.sample_points(depth) if not contains(self.acc, p)]

    def __repr__(self) -> str:
        return f"IsoPart({describe(self.base)} minus {describe(self.acc)})"


def derive_structure(s: SpectralSet) -> tuple[SpectralSet, IsoPart]:
    """Accumulation set and a symbolic description of the isolated part."""
    acc = acc_of(s)
    return acc, IsoPart(s, acc)


def sigma_d_of(s: SpectralSet) -> SpectralSet:
    """Generalized Drazin spectrum of an element with spectrum ``s``."""
    return acc_of(s)


def sigma_ad_of(s: SpectralSet) -> SpectralSet:
    """Second-level accumulation: always a finite set on this catalog."""
    return acc_of(acc_of(s))


def classify_set(s: SpectralSet) -> ClassFlags:
    """Class flags of an element from its spectrum.

    qnil:      the spectrum is exactly {0};
    acc_class: all accumulation points sit at 0;
    g_drazin:  0 is not an accumulation point;
    ag_drazin: 0 is not an accumulation point of the accumulation set.
    """
    c = s.canonical()
    if not c.families and not c.points and not c.contains_zero:
        raise EmptySpectrum("spectra of algebra elements are nonempty")
    qnil = not c.families and not c.points and c.contains_zero
    acc1 = acc_of(s)
    c1 = acc1.canonical()
    acc_class = not c1.families and not c1.points
    g_drazin = not c1.contains_zero
    c2 = acc_of(acc1).canonical()
    ag_drazin = not c2.contains_zero
    return ClassFlags(qnil=qnil, acc_class=acc_class, g_drazin=g_drazin, ag_drazin=ag_drazin)


def contains(s: SpectralSet, value, tol: Optional[float] = None) -> bool:
    """Membership in the closed set; exact for exact data when tol is None."""
    v = value if isinstance(value, Scalar) else Scalar.from_value(value)
    c = s.canonical()
    exact_query = tol is None and v.is_exact and s.is_exact
    eff_tol = tol if tol is not None else DEFAULT_TOLERANCES.eq
    if c.contains_zero:
        if exact_query:
            if v.is_zero():
                return True
        elif abs(v) <= eff_tol:
            return True
    for p in c.points:
        if exact_query:
            if p == v:
                return True
        elif p.close_to(v, eff_tol):
            return True
    for fam in c.families:
        if exact_query:
            if _closure_contains_exact(fam, v):
                return True
        elif _closure_near(fam, v, eff_tol):
            return True
    return False


def affine_map(s: SpectralSet, alpha, beta) -> SpectralSet:
    """Pointwise map z -> alpha*z + beta; families keep their kind."""
    a = alpha if isinstance(alpha, Scalar) else Scalar.from_value(alpha)
    b = beta if isinstance(beta, Scalar) else Scalar.from_value(beta)
    fams = [f.affine(a, b) for f in s.families]
    if s.contains_zero:
        fams.append(Finite([b]))
    return SpectralSet(fams, False)


def set_union(s1: SpectralSet, s2: SpectralSet) -> SpectralSet:
    return SpectralSet(s1.families + s2.families, s1.contains_zero or s2.contains_zero)


@dataclass(frozen=True)
class AnnulusReport:
    clear: bool
    gap: Union[Fraction, float]
    gap_exact: bool

    def __bool__(self) -> bool:
        return self.clear


def annulus_clear(
    s: SpectralSet, eps, gap_rel: Fraction = DEFAULT_TOLERANCES.gap_rel
) -> AnnulusReport:
    """Does the circle |z| = eps stay clear of the set by gap_rel * eps?

    The decision is exact for exact data.  The reported gap is the minimal
    distance from the set to the circle; it is exact whenever all nearby
    moduli are rational, otherwise a rigorous lower bound.
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("cut radius must be positive")
    gap_rel = as_fraction(gap_rel)
    if not 0 < gap_rel < 1:
        raise ValueError("relative gap must lie strictly between 0 and 1")
    delta = eps * gap_rel
    c = s.canonical()
    lo2 = (eps - delta) ** 2
    hi2 = (eps + delta) ** 2
    best = Clearance(True, eps * 10**9, True)
    if c.contains_zero:
        best = best.merge(Clearance(True, eps, True))
    for p in c.points:
        m2 = p.mod2()
        inside_band = lo2 < m2 < hi2
        root = exact_sqrt(Fraction(m2)) if isinstance(m2, (int, Fraction)) else None
        if root is not None:
            gap = abs(root - eps)
            best = best.merge(Clearance(not inside_band, gap, True))
        else:
            gap = abs(math.sqrt(float(m2)) - float(eps))
            best = best.merge(Clearance(not inside_band, gap, False))
    for fam in c.families:
        best = best.merge(family_clearance(fam, eps, delta))
    return AnnulusReport(best.clear, best.gap, best.gap_exact)


# ---------------------------------------------------------------------------
# rendering


def describe_family(fam: Family) -> str:
    if isinstance(fam, Finite):
        return "{" + ", ".join(repr(p) for p in fam.points) + "}"
    if isinstance(fam, Constant):
        return f"const {fam.value!r}"
    skip = f" minus {len(fam.skip)} entr{'y' if len(fam.skip) == 1 else 'ies'}" if fam.skip else ""
    if isinstance(fam, Power):
        base = f"{fam.c!r}*n^-{fam.p}"
    elif isinstance(fam, Geometric):
        base = f"{fam.c!r}*({fam.r!r})^n"
    else:
        base = f"cluster[{describe_family(fam.centers)} spread {describe_family(fam.spread)}]"
    if not fam.shift.is_zero():
        base = f"{fam.shift!r} + " + base
    return "{" + base + "}" + skip


def describe(s: SpectralSet) -> str:
    c = s.canonical()
    parts = []
    if c.contains_zero:
        parts.append("{0}")
    if c.points:
        parts.append("{" + ", ".join(repr(p) for p in c.points) + "}")
    parts.extend(describe_family(f) for f in c.families)
    return " U ".join(parts) if parts else "(empty)"
