"""Dense complex matrix engine: spectral splits and Drazin-type inverses.

The invariant-subspace split is computed by unitary triangularization with
eigenvalue reordering, then block decoupling through the coupling (Sylvester)
equation.  Rank decisions use singular-value thresholding; the Drazin index
comes from rank stabilization of powers, evaluated through a full-rank
factorization cascade so that no explicit high power of the matrix is ever
ranked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import CircleHitsSpectrum, IllConditionedSplit, IndexTooLarge


class MatrixBlock:
    """A square complex matrix with a cached operator norm.

    ``exact`` marks matrices whose float entries are the intended values
    (integers, dyadics); such diagonal matrices keep exact spectra.
    """

    __slots__ = ("data", "exact", "_norm")

    def __init__(self, data, exact: bool = False):
        arr = np.array(data, dtype=np.complex128)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("matrix block must be square")
        if arr.size and not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("matrix entries must be finite")
        arr.setflags(write=False)
        self.data = arr
        self.exact = bool(exact)
        self._norm: Optional[float] = None

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def norm(self) -> float:
        if self._norm is None:
            self._norm = float(np.linalg.norm(self.data, 2)) if self.n else 0.0
        return self._norm

    def is_diagonal(self) -> bool:
        return bool(np.all(self.data == np.diag(np.diag(self.data))))

    def is_triangular(self) -> bool:
        d = self.data
        return bool(np.all(np.tril(d, -1) == 0) or np.all(np.triu(d, 1) == 0))

    def __repr__(self) -> str:
        return f"MatrixBlock(n={self.n}, exact={self.exact})"


@dataclass(frozen=True)
class ProjectionPair:
    """A spectral idempotent and its complement."""

    p: MatrixBlock
    complement: MatrixBlock
    inside_dim: int
    outside_dim: int


def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def rel_residual(delta: np.ndarray, scale: float) -> float:
    if delta.size == 0:
        return 0.0
    return float(np.linalg.norm(delta, 2) / max(scale, 1e-300))


def _svd_rank(m: np.ndarray, thresh: float) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    if m.size == 0:
        return 0, np.zeros((0,)), np.zeros((0, 0)), np.zeros((0, 0))
    u, s, vh = np.linalg.svd(m)
    r = int(np.sum(s > thresh))
    return r, s, u, vh


def _rank_cascade(A: np.ndarray, tol: Tolerances) -> tuple[list[int], list, list, np.ndarray]:
    """Ranks of successive powers via full-rank factorizations.

    Returns (ranks, B_factors, C_factors, last_core) where ranks[i] is the
    rank of A**(i+1) and last_core is the square core matrix at the step
    where the ranks stabilized (invertible, or empty when A is nilpotent).
    """
    ranks: list[int] = []
    bs: list[np.ndarray] = []
    cs: list[np.ndarray] = []
    cur = A
    prev_dim = A.shape[0]
    # rank each compressed core against its parent's scale, so a residual
    # core that is pure rounding noise cannot rank itself as invertible
    thresh_scale = float(np.linalg.norm(A, 2)) if A.size else 0.0
    while True:
        r, s, u, vh = _svd_rank(cur, tol.rank * thresh_scale)
        if r == prev_dim:
            return ranks, bs, cs, cur
        ranks.append(r)
        if r == 0:
            return ranks, bs, cs, np.zeros((0, 0), dtype=np.complex128)
        b = u[:, :r] * s[:r]
        c = vh[:r, :]
        bs.append(b)
        cs.append(c)
        thresh_scale = float(np.linalg.norm(cur, 2))
        cur = c @ b
        prev_dim = r


def drazin_index(A: MatrixBlock, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Smallest k with rank(A^k) == rank(A^(k+1))."""
    if A.n == 0:
        return 0
    ranks, _, _, _ = _rank_cascade(A.data, tol)
    return len(ranks)


def _zero_multiplicity(A: MatrixBlock, tol: Tolerances) -> int:
    """Algebraic multiplicity of the eigenvalue 0 (rank-stabilized)."""
    ranks, _, _, _ = _rank_cascade(A.data, tol)
    return A.n - (ranks[-1] if ranks else A.n)


def riesz_projection(
    A: MatrixBlock, eps, tol: Tolerances = DEFAULT_TOLERANCES
) -> ProjectionPair:
    """Spectral idempotent onto the invariant subspace for |lambda| < eps.

    Raises CircleHitsSpectrum when an eigenvalue sits within the relative
    clearance of the circle, and IllConditionedSplit when the two spectral
    parts are closer than the separation threshold.
    """
    eps = float(eps)
    if eps <= 0:
        raise ValueError("split radius must be positive")
    n = A.n
    if n == 0:
        z = MatrixBlock(np.zeros((0, 0)), exact=True)
        return ProjectionPair(z, z, 0, 0)

    if A.is_diagonal():
        d = np.diag(A.data)
        gap = tol.gap_rel * eps
        if np.any(np.abs(np.abs(d) - eps) < float(gap) * eps):
            raise CircleHitsSpectrum(f"an eigenvalue lies on the circle |z| = {eps}")
        inside = np.abs(d) < eps
        p = np.diag(inside.astype(np.complex128))
        pm = MatrixBlock(p, exact=A.exact)
        cm = MatrixBlock(_eye(n) - p, exact=A.exact)
        return ProjectionPair(pm, cm, int(inside.sum()), int(n - inside.sum()))

    eigs = np.linalg.eigvals(A.data)
    dist = np.abs(np.abs(eigs) - eps)
    if np.any(dist < float(tol.gap_rel) * eps):
        raise CircleHitsSpectrum(f"an eigenvalue lies within the gap of the circle |z| = {eps}")

    # clusters of nearly equal eigenvalues must not straddle the circle
    clust_tol = tol.clust * max(A.norm, 1.0)
    order = np.argsort(np.abs(eigs))
    sides = np.abs(eigs) < eps
    for i in order:
        for j in order:
            if i < j and abs(eigs[i] - eigs[j]) <= clust_tol and sides[i] != sides[j]:
                raise CircleHitsSpectrum("an eigenvalue cluster straddles the circle")

    inside_eigs = eigs[sides]
    outside_eigs = eigs[~sides]
    if inside_eigs.size and outside_eigs.size:
        sep = np.min(np.abs(inside_eigs[:, None] - outside_eigs[None, :]))
        if sep < tol.sep:
            raise IllConditionedSplit(
                f"spectral parts separated by {sep:.3e} < {tol.sep:.3e}"
            )

    if not inside_eigs.size:
        return ProjectionPair(
            MatrixBlock(np.zeros((n, n)), exact=True),
            MatrixBlock(_eye(n), exact=True),
            0,
            n,
        )
    if not outside_eigs.size:
        return ProjectionPair(
            MatrixBlock(_eye(n), exact=True),
            MatrixBlock(np.zeros((n, n)), exact=True),
            n,
            0,
        )

    t, z, sdim = sla.schur(A.data, output="complex", sort=lambda lam: abs(lam) < eps)
    if sdim != inside_eigs.size:
        raise IllConditionedSplit("triangular reordering disagreed with the eigenvalue split")
    t11 = t[:sdim, :sdim]
    t12 = t[:sdim, sdim:]
    t22 = t[sdim:, sdim:]
    # decouple: t11 @ y - y @ t22 = -t12
    y = sla.solve_sylvester(t11, -t22, -t12)
    p_t = np.zeros((n, n), dtype=np.complex128)
    p_t[:sdim, :sdim] = _eye(sdim)
    p_t[:sdim, sdim:] = -y
    p = z @ p_t @ z.conj().T

    scale = max(A.norm, 1.0)
    if rel_residual(A.data @ p - p @ A.data, scale * max(np.linalg.norm(p, 2), 1.0)) > tol.res:
        raise IllConditionedSplit("projection does not commute within tolerance")
    pm = MatrixBlock(p)
    return ProjectionPair(pm, MatrixBlock(_eye(n) - p), sdim, n - sdim)


def _split_radius(A: MatrixBlock, zero_mult: int, tol: Tolerances) -> float:
    """A circle radius strictly between the zero group and the rest."""
    moduli = np.sort(np.abs(np.linalg.eigvals(A.data)))
    small = float(moduli[zero_mult - 1]) if zero_mult > 0 else 0.0
    large = float(moduli[zero_mult])
    floor = max(small, large * 1e-8, A.norm * 1e-15)
    return math.sqrt(floor * large)


def drazin_inverse(A: MatrixBlock, tol: Tolerances = DEFAULT_TOLERANCES) -> MatrixBlock:
    """The Drazin inverse: core part inverted, nilpotent part zeroed.

    Built through the spectral projection onto the zero group at a radius
    below the smallest nonzero eigenvalue modulus, then (A + p)^(-1) (1 - p).
    """
    n = A.n
    if n == 0:
        return MatrixBlock(np.zeros((0, 0)), exact=True)
    m0 = _zero_multiplicity(A, tol)
    if m0 == 0:
        return MatrixBlock(np.linalg.solve(A.data, _eye(n)), exact=False)
    if m0 == n:
        return MatrixBlock(np.zeros((n, n)), exact=True)
    eps = _split_radius(A, m0, tol)
    pair = riesz_projection(A, eps, tol)
    if pair.inside_dim != m0:
        raise IllConditionedSplit("zero-group projection has the wrong dimension")
    p = pair.p.data
    x = np.linalg.solve(A.data + p, _eye(n) - p)
    return MatrixBlock(x)


def group_inverse(A: MatrixBlock, tol: Tolerances = DEFAULT_TOLERANCES) -> MatrixBlock:
    """Drazin inverse when the index is at most one."""
    k = drazin_index(A, tol)
    if k > 1:
        raise IndexTooLarge(f"index {k} exceeds 1; no group inverse")
    x = drazin_inverse(A, tol)
    res = rel_residual(A.data @ x.data @ A.data - A.data, max(A.norm, 1e-300))
    if res > tol.res:
        raise IllConditionedSplit(f"group identity residual {res:.3e} exceeds tolerance")
    return x


def core_nilpotent(
    A: MatrixBlock, tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[MatrixBlock, MatrixBlock]:
    """Split A = C + N with C group invertible, N nilpotent, CN = NC = 0."""
    n = A.n
    if n == 0:
        z = MatrixBlock(np.zeros((0, 0)), exact=True)
        return z, z
    m0 = _zero_multiplicity(A, tol)
    if m0 == 0:
        return A, MatrixBlock(np.zeros((n, n)), exact=True)
    if m0 == n:
        return MatrixBlock(np.zeros((n, n)), exact=True), A
    eps = _split_radius(A, m0, tol)
    pair = riesz_projection(A, eps, tol)
    c = A.data @ pair.complement.data
    nmat = A.data @ pair.p.data
    return MatrixBlock(c, exact=False), MatrixBlock(nmat, exact=False)


# ---------------------------------------------------------------------------
# spectrum extraction for the operator model


def matrix_spectrum_points(
    A: MatrixBlock, tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[list, bool]:
    """Distinct eigenvalue representatives and whether 0 is an eigenvalue.

    Triangular matrices read their diagonal directly (exactly, when flagged
    exact).  Otherwise the zero group is sized by rank stabilization, snapped
    to an exact zero, and the remaining eigenvalues are clustered.
    """
    from .scalars import Scalar

    n = A.n
    if n == 0:
        return [], False
    if A.is_triangular():
        diag = np.diag(A.data)
        points = []
        has_zero = False
        for v in diag:
            if A.exact:
                if v == 0:
                    has_zero = True
                    continue
                s = Scalar(Fraction(float(np.real(v))), Fraction(float(np.imag(v))))
            else:
                if abs(v) <= tol.rank * max(A.norm, 1.0):
                    has_zero = True
                    continue
                s = Scalar(float(np.real(v)), float(np.imag(v)))
            if s not in points:
                points.append(s)
        return points, has_zero

    m0 = _zero_multiplicity(A, tol)
    eigs = sorted(np.linalg.eigvals(A.data), key=abs)
    nonzero = eigs[m0:]
    has_zero = m0 > 0
    clust_tol = tol.clust * max(A.norm, 1.0)
    reps: list[complex] = []
    groups: list[list[complex]] = []
    for lam in nonzero:
        placed = False
        for g in groups:
            if abs(lam - g[0]) <= clust_tol:
                g.append(lam)
                placed = True
                break
        if not placed:
            groups.append([lam])
    points = []
    for g in groups:
        mean = sum(g) / len(g)
        points.append(Scalar(float(mean.real), float(mean.imag)))
    return points, has_zero
