"""Structured operators: a dense matrix block direct-summed with a diagonal
block over a point family.

The two blocks never interact; the spectrum is the union of the matrix
eigenvalues and the closure of the diagonal values.  Diagonal blocks carry
finitely many positional overrides, which is how finite-rank edits and the
eventually-zero diagonals enter the model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import EmptyOperator, FamilyNotClosed, MalformedFamily, ShapeMismatch
from .families import (
    Cluster,
    Constant,
    Family,
    Finite,
    Geometric,
    Power,
)
from .matrices import MatrixBlock, matrix_spectrum_points, rel_residual
from .scalars import Scalar
from .sets import SpectralSet, set_union


class DiagonalBlock:
    """An infinite diagonal: a sequence family plus finitely many overrides."""

    __slots__ = ("family", "overrides")

    def __init__(self, family: Family, overrides: Optional[dict] = None):
        overrides = {
            int(k): (v if isinstance(v, Scalar) else Scalar.from_value(v))
            for k, v in (overrides or {}).items()
        }
        if any(k < 1 for k in overrides):
            raise MalformedFamily("override positions must be positive integers")
        if isinstance(family, Finite):
            # a finite list acts as the zero-padded sequence: store it as
            # overrides over the constant-zero tail
            pts = family.points
            if not pts:
                raise MalformedFamily("finite diagonal needs at least one entry")
            base = {i + 1: p for i, p in enumerate(pts)}
            base.update(overrides)
            family, overrides = Constant(Scalar(0)), base
        if not isinstance(family, (Constant, Power, Geometric, Cluster)):
            raise MalformedFamily(f"not a diagonal family: {family!r}")
        if family.skip:
            raise MalformedFamily("diagonal families use overrides, not skips")
        clean = {}
        for k, v in overrides.items():
            if v != family.entry(k):
                clean[k] = v
        self.family = family
        self.overrides = dict(sorted(clean.items()))

    @property
    def is_exact(self) -> bool:
        return self.family.is_exact and all(v.is_exact for v in self.overrides.values())

    def entry(self, k: int) -> Scalar:
        if k < 1:
            raise IndexError("diagonal positions are 1-based")
        got = self.overrides.get(k)
        return got if got is not None else self.family.entry(k)

    def values(self, depth: int) -> list[Scalar]:
        return [self.entry(k) for k in range(1, depth + 1)]

    def spectrum(self) -> SpectralSet:
        fams: list[Family] = []
        pts = list(self.overrides.values())
        if isinstance(self.family, Constant) or not self.overrides:
            fams.append(self.family)
        else:
            fams.append(self.family.with_extra_skip(self.overrides.keys()))
        if pts:
            fams.append(Finite(pts))
        return SpectralSet(fams, False)

    def leading_matrix(self, k: int) -> MatrixBlock:
        vals = self.values(k)
        exact = all(v.is_exact for v in vals)
        return MatrixBlock(np.diag([v.to_complex() for v in vals]), exact=exact)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiagonalBlock):
            return NotImplemented
        return self.family == other.family and self.overrides == other.overrides

    def __hash__(self) -> int:
        return hash((self.family, tuple(self.overrides.items())))

    def __repr__(self) -> str:
        ov = f" with {len(self.overrides)} overrides" if self.overrides else ""
        return f"DiagonalBlock({self.family!r}{ov})"


class StructuredOperator:
    """Direct sum of an optional matrix block and an optional diagonal block."""

    __slots__ = ("m", "d")

    def __init__(self, m: Optional[MatrixBlock] = None, d: Optional[DiagonalBlock] = None):
        if m is not None and m.n == 0:
            m = None
        if m is None and d is None:
            raise EmptyOperator("operator needs at least one block")
        self.m = m
        self.d = d

    @property
    def mode(self) -> str:
        exact = (self.m is None or self.m.exact) and (self.d is None or self.d.is_exact)
        return "exact" if exact else "approximate"

    @property
    def matrix_dim(self) -> int:
        return self.m.n if self.m is not None else 0

    def same_shape(self, other: "StructuredOperator") -> bool:
        return self.matrix_dim == other.matrix_dim and (self.d is None) == (other.d is None)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StructuredOperator):
            return NotImplemented
        if not self.same_shape(other):
            return False
        if self.d != other.d:
            return False
        if self.m is None:
            return True
        return bool(np.array_equal(self.m.data, other.m.data))

    def __hash__(self) -> int:  # pragma: no cover - operators rarely hashed
        return hash((self.matrix_dim, self.d))

    def __repr__(self) -> str:
        parts = []
        if self.m is not None:
            parts.append(f"matrix {self.m.n}x{self.m.n}")
        if self.d is not None:
            parts.append(repr(self.d))
        return "StructuredOperator(" + " + ".join(parts) + ")"


def build_operator(matrix=None, diagonal=None) -> StructuredOperator:
    """Validated construction from raw blocks.

    ``matrix`` may be a MatrixBlock or any square array-like; ``diagonal``
    may be a DiagonalBlock or a bare family (finite families become
    zero-padded sequences).
    """
    m = None
    if matrix is not None:
        m = matrix if isinstance(matrix, MatrixBlock) else MatrixBlock(matrix)
    d = None
    if diagonal is not None:
        if isinstance(diagonal, DiagonalBlock):
            d = diagonal
        elif isinstance(diagonal, (Constant, Power, Geometric, Cluster, Finite)):
            d = DiagonalBlock(diagonal)
        else:
            raise MalformedFamily(f"not a diagonal description: {diagonal!r}")
    return StructuredOperator(m, d)


def spectrum_of(op: StructuredOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> SpectralSet:
    """Union of matrix eigenvalues and the diagonal closure."""
    pieces: list[SpectralSet] = []
    if op.m is not None:
        points, has_zero = matrix_spectrum_points(op.m, tol)
        fams = [Finite(points)] if points else []
        pieces.append(SpectralSet(fams, has_zero))
    if op.d is not None:
        pieces.append(op.d.spectrum())
    out = pieces[0]
    for s in pieces[1:]:
        out = set_union(out, s)
    return out


# ---------------------------------------------------------------------------
# block algebra


def _seq_add(f1: Family, f2: Family) -> Family:
    if isinstance(f1, Constant):
        if isinstance(f2, Constant):
            return Constant(f1.value + f2.value)
        return f2.affine(Scalar(1), f1.value)
    if isinstance(f2, Constant):
        return _seq_add(f2, f1)
    if isinstance(f1, Power) and isinstance(f2, Power) and f1.p == f2.p:
        c = f1.c + f2.c
        shift = f1.shift + f2.shift
        return Constant(shift) if c.is_zero() else Power(c, f1.p, shift)
    if isinstance(f1, Geometric) and isinstance(f2, Geometric) and f1.r == f2.r:
        c = f1.c + f2.c
        shift = f1.shift + f2.shift
        return Constant(shift) if c.is_zero() else Geometric(c, f1.r, shift)
    if isinstance(f1, Cluster) and isinstance(f2, Cluster) and f1.spread == f2.spread:
        centers = _seq_add_centers(f1.centers, f2.centers)
        if centers is not None:
            return Cluster(centers, f1.spread, f1.shift + f2.shift)
    raise FamilyNotClosed(
        f"entrywise sum of {f1.kind_tag()} and {f2.kind_tag()} families "
        "leaves the catalog"
    )


def _seq_add_centers(c1, c2):
    if isinstance(c1, Finite) and isinstance(c2, Finite) and len(c1.points) == len(c2.points):
        return Finite([a + b for a, b in zip(c1.points, c2.points)])
    if isinstance(c1, Power) and isinstance(c2, Power) and c1.p == c2.p:
        c = c1.c + c2.c
        if not c.is_zero():
            return Power(c, c1.p)
    if isinstance(c1, Geometric) and isinstance(c2, Geometric) and c1.r == c2.r:
        c = c1.c + c2.c
        if not c.is_zero():
            return Geometric(c, c1.r)
    return None


def _seq_mul(f1: Family, f2: Family) -> Family:
    if isinstance(f1, Constant):
        return f2.affine(f1.value, Scalar(0))
    if isinstance(f2, Constant):
        return f1.affine(f2.value, Scalar(0))
    if (
        isinstance(f1, Power)
        and isinstance(f2, Power)
        and f1.shift.is_zero()
        and f2.shift.is_zero()
    ):
        return Power(f1.c * f2.c, f1.p + f2.p)
    if (
        isinstance(f1, Geometric)
        and isinstance(f2, Geometric)
        and f1.shift.is_zero()
        and f2.shift.is_zero()
    ):
        return Geometric(f1.c * f2.c, f1.r * f2.r)
    raise FamilyNotClosed(
        f"entrywise product of {f1.kind_tag()} and {f2.kind_tag()} families "
        "leaves the catalog"
    )


def algebra(op1: StructuredOperator, op2: StructuredOperator, kind: str) -> StructuredOperator:
    """Blockwise sum or product; diagonal arithmetic is entrywise and must
    stay inside the family catalog."""
    if kind not in ("add", "mul"):
        raise ValueError("kind must be 'add' or 'mul'")
    if not op1.same_shape(op2):
        raise ShapeMismatch("operators have different block shapes")
    m = None
    if op1.m is not None:
        a, b = op1.m.data, op2.m.data
        data = a + b if kind == "add" else a @ b
        m = MatrixBlock(data, exact=op1.m.exact and op2.m.exact)
    d = None
    if op1.d is not None:
        combine = _seq_add if kind == "add" else _seq_mul
        fam = combine(op1.d.family, op2.d.family)
        keys = set(op1.d.overrides) | set(op2.d.overrides)
        ov = {}
        for k in keys:
            x, y = op1.d.entry(k), op2.d.entry(k)
            ov[k] = x + y if kind == "add" else x * y
        d = DiagonalBlock(fam, ov)
    return StructuredOperator(m, d)


def scale_shift(op: StructuredOperator, alpha, beta) -> StructuredOperator:
    """alpha * op + beta * identity, blockwise."""
    a = alpha if isinstance(alpha, Scalar) else Scalar.from_value(alpha)
    b = beta if isinstance(beta, Scalar) else Scalar.from_value(beta)
    m = None
    if op.m is not None:
        data = a.to_complex() * op.m.data + b.to_complex() * np.eye(op.m.n)
        m = MatrixBlock(data, exact=op.m.exact and a.is_exact and b.is_exact)
    d = None
    if op.d is not None:
        fam = op.d.family.affine(a, b)
        ov = {k: v * a + b for k, v in op.d.overrides.items()}
        d = DiagonalBlock(fam, ov)
    return StructuredOperator(m, d)


def identity_like(op: StructuredOperator) -> StructuredOperator:
    m = MatrixBlock(np.eye(op.m.n), exact=True) if op.m is not None else None
    d = DiagonalBlock(Constant(Scalar(1))) if op.d is not None else None
    return StructuredOperator(m, d)


def zero_like(op: StructuredOperator) -> StructuredOperator:
    m = MatrixBlock(np.zeros((op.m.n, op.m.n)), exact=True) if op.m is not None else None
    d = DiagonalBlock(Constant(Scalar(0))) if op.d is not None else None
    return StructuredOperator(m, d)


@dataclass(frozen=True)
class StructureReport:
    commutes: bool
    idempotent: bool
    commute_residual: float
    idempotent_residual: float


def structure_checks(
    op1: StructuredOperator,
    op2: Optional[StructuredOperator] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> StructureReport:
    """Commutation of the pair and idempotency of the first operator.

    Diagonal blocks of compatible operators commute exactly; matrix blocks
    are residual-tested.  Idempotency is exact on diagonal entries (every
    entry must be 0 or 1) and residual-tested on the matrix block.
    """
    commutes = True
    commute_res = 0.0
    if op2 is not None:
        if not op1.same_shape(op2):
            raise ShapeMismatch("operators have different block shapes")
        if op1.m is not None:
            a, b = op1.m.data, op2.m.data
            scale = max(op1.m.norm * op2.m.norm, 1e-300)
            commute_res = rel_residual(a @ b - b @ a, scale)
            commutes = commute_res <= tol.res

    idem = True
    idem_res = 0.0
    if op1.d is not None:
        fam = op1.d.family
        fam_ok = isinstance(fam, Constant) and (fam.value.is_zero() or fam.value == Scalar(1))
        ovs_ok = all(v.is_zero() or v == Scalar(1) for v in op1.d.overrides.values())
        idem = fam_ok and ovs_ok
    if op1.m is not None:
        p = op1.m.data
        nrm = np.linalg.norm(p, 2) if p.size else 0.0
        idem_res = float(np.linalg.norm(p @ p - p, 2) / (1.0 + nrm * nrm))
        idem = idem and idem_res <= tol.idem
    return StructureReport(commutes, idem, commute_res, idem_res)


def finite_rank_perturb(
    op: StructuredOperator,
    edits: Optional[dict] = None,
    matrix_delta=None,
) -> StructuredOperator:
    """Override finitely many diagonal entries and/or add a matrix block.

    Diagonal edits never change the accumulation structure of the spectrum,
    so the generalized Drazin spectrum is invariant under them.
    """
    d = op.d
    if edits:
        if d is None:
            raise ShapeMismatch("no diagonal block to edit")
        ov = dict(d.overrides)
        for k, v in edits.items():
            ov[int(k)] = v if isinstance(v, Scalar) else Scalar.from_value(v)
        d = DiagonalBlock(d.family, ov)
    m = op.m
    if matrix_delta is not None:
        delta = matrix_delta if isinstance(matrix_delta, MatrixBlock) else MatrixBlock(matrix_delta)
        if m is None or delta.n != m.n:
            raise ShapeMismatch("matrix delta has the wrong dimension")
        m = MatrixBlock(m.data + delta.data, exact=m.exact and delta.exact)
    return StructuredOperator(m, d)


def ops_close(
    a: StructuredOperator, b: StructuredOperator, tol: float
) -> bool:
    """Structural equality on diagonals, residual comparison on matrices."""
    if not a.same_shape(b):
        return False
    if a.d is not None and a.d != b.d:
        return False
    if a.m is not None:
        scale = max(a.m.norm, b.m.norm, 1.0)
        if rel_residual(a.m.data - b.m.data, scale) > tol:
            return False
    return True
