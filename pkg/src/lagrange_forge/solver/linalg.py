"""Numerical kernel computation used by both methods and by reconstruction."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import IllConditioned

# minimum ratio sigma_r / sigma_{r+1} across the rank boundary
MIN_GAP = 10.0


@dataclass(frozen=True)
class Kernel:
    basis: np.ndarray       # K x d, orthonormal columns
    singular_values: np.ndarray
    rank: int
    gap: float

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.T


def _fix_signs(B, eps=1e-12):
    """Make the first entry above ``eps`` of each column positive."""
    B = B.copy()
    for c in range(B.shape[1]):
        col = B[:, c]
        nz = np.flatnonzero(np.abs(col) > eps * max(1.0, np.abs(col).max()))
        if nz.size and col[nz[0]] < 0:
            B[:, c] = -col
    return B


def nullspace(A, tol: float = 1e-9, check_gap: bool = True) -> Kernel:
    """Orthonormal kernel basis of ``A`` via SVD.

    Singular values at or below ``tol * sigma_max`` count as zero.  When the
    kernel is neither trivial nor everything, the ratio between the smallest
    kept and the largest discarded singular value must be at least
    :data:`MIN_GAP`, otherwise :class:`IllConditioned` is raised.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("nullspace expects a 2-D array")
    S, K = A.shape
    if K == 0:
        return Kernel(np.zeros((0, 0)), np.zeros(0), 0, float("inf"))
    if S == 0:
        return Kernel(np.eye(K), np.zeros(0), 0, float("inf"))
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    sv = np.concatenate([s, np.zeros(max(0, K - s.size))])
    if 0 < rank < K:
        gap = float(sv[rank - 1] / sv[rank]) if sv[rank] > 0 else float("inf")
    else:
        gap = float("inf")
    if check_gap and gap < MIN_GAP:
        raise IllConditioned(
            f"ambiguous numerical rank {rank}: singular value gap {gap:.3g} < {MIN_GAP:g}", gap)
    B = vt[rank:].T
    return Kernel(_fix_signs(B), sv, rank, gap)


def rref_basis(B, eps: float = 1e-9):
    """Canonical basis of span(columns of ``B``): reduced row echelon form of Bᵀ.

    Each returned row has its first nonzero coefficient equal to +1 and zeros
    in the pivot columns of the other rows, so the result depends only on the
    subspace.
    """
    R = np.array(np.asarray(B, dtype=float).T, copy=True)
    d, K = R.shape
    row = 0
    pivots = []
    for col in range(K):
        if row >= d:
            break
        p = row + int(np.argmax(np.abs(R[row:, col])))
        if abs(R[p, col]) <= eps:
            continue
        R[[row, p]] = R[[p, row]]
        R[row] /= R[row, col]
        for r in range(d):
            if r != row:
                R[r] -= R[r, col] * R[row]
        pivots.append(col)
        row += 1
    R[np.abs(R) < eps] = 0.0
    return R[:row], pivots


def snap(x: float, max_den: int = 1000, tol: float = 1e-8):
    """Nearest small-denominator rational if within ``tol`` (relative), else None."""
    fr = Fraction(float(x)).limit_denominator(max_den)
    if abs(float(fr) - x) <= tol * max(1.0, abs(x)):
        return fr
    return None


def snap_vector(vec, max_den: int = 1000, tol: float = 1e-8):
    """Rationals where every entry snaps; otherwise exact binary fractions of the floats."""
    out = [snap(x, max_den, tol) for x in vec]
    if all(f is not None for f in out):
        return out, True
    return [Fraction(float(x)) for x in vec], False


def normalize_rows(A):
    """Scale rows to unit 2-norm; all-zero rows are dropped."""
    A = np.asarray(A, dtype=float)
    norms = np.linalg.norm(A, axis=1)
    keep = norms > 0
    return A[keep] / norms[keep, None]
