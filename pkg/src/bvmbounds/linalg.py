"""Small dense symmetric linear algebra (k <= 8).

Eigendecompositions use cyclic Jacobi rotations. At these sizes the method is
fast, needs no LAPACK, and gives orthogonal eigenvectors to working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, NotPositiveDefinite

SYMMETRY_TOL = 1e-12
SPD_TOL = 1e-12
MAX_SWEEPS = 100


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """A validated, immutable symmetric matrix.

    Construction averages ``(M + M.T) / 2`` and rejects inputs whose asymmetry
    exceeds ``1e-12`` relative to the largest entry.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix has non-finite entries")
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        asym = float(np.max(np.abs(a - a.T)))
        if asym > SYMMETRY_TOL * max(scale, 1e-300) and asym > 0.0:
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        object.__setattr__(self, "entries", _frozen(0.5 * (a + a.T)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        out = self.entries if dtype is None else self.entries.astype(dtype)
        return np.array(out, copy=True) if copy else out

    def __matmul__(self, other):
        return self.entries @ np.asarray(other)

    def __rmatmul__(self, other):
        return np.asarray(other) @ self.entries

    def __repr__(self) -> str:
        return f"SymMatrix({self.entries.tolist()!r})"


def as_sym(m) -> SymMatrix:
    return m if isinstance(m, SymMatrix) else SymMatrix(np.asarray(m, dtype=float))


def inf_norm(m) -> float:
    """Maximum absolute row sum."""
    a = np.asarray(m, dtype=float)
    return float(np.max(np.sum(np.abs(a), axis=1)))


def _off_mass(a: np.ndarray, mask: np.ndarray) -> float:
    # summed directly: the difference of total and diagonal mass cancels badly
    return math.sqrt(float(np.sum(a[mask] ** 2)))


def eigen_sym(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    Cyclic-by-row Jacobi with the Rutishauser rotation formulas. Iteration
    stops once the off-diagonal Frobenius mass falls below ``4 eps`` of the
    total; quadratic convergence makes that a handful of sweeps for k <= 8.
    """
    a = np.array(as_sym(m).entries, dtype=float)
    k = a.shape[0]
    v = np.eye(k)
    total = math.sqrt(float(np.sum(a * a)))
    if total == 0.0 or k == 1:
        return np.diag(a).copy(), v
    tol = 4.0 * np.finfo(float).eps * total
    mask = ~np.eye(k, dtype=bool)
    for _ in range(MAX_SWEEPS):
        off = _off_mass(a, mask)
        if off <= tol:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                gap = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(gap):
                    # tiny rotation: tan(angle) ~ apq / gap, and theta^2 would overflow
                    t = apq / gap
                else:
                    theta = gap / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation.
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        off = _off_mass(a, mask)
        raise NonConvergence("Jacobi sweeps did not converge", MAX_SWEEPS, off)
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@dataclass(frozen=True, eq=False)
class SpdFactorization:
    source: SymMatrix
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sqrt: SymMatrix
    inv_sqrt: SymMatrix

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def dim(self) -> int:
        return self.source.dim


def spd_sqrt(m) -> SpdFactorization:
    """Symmetric square root and inverse square root of an SPD matrix.

    Raises ``NotPositiveDefinite`` when the smallest eigenvalue is not above
    ``1e-12 * ||M||_inf``; the exception carries that eigenvalue.
    """
    src = as_sym(m)
    w, v = eigen_sym(src)
    scale = inf_norm(src)
    if not w[0] > SPD_TOL * scale:
        raise NotPositiveDefinite("matrix is not positive definite", float(w[0]))
    root = (v * np.sqrt(w)) @ v.T
    inv_root = (v / np.sqrt(w)) @ v.T
    return SpdFactorization(
        source=src,
        eigenvalues=_frozen(w),
        eigenvectors=_frozen(v),
        sqrt=SymMatrix(root),
        inv_sqrt=SymMatrix(inv_root),
    )


@dataclass(frozen=True, eq=False)
class RowSumScalars:
    R: np.ndarray
    R_tilde: np.ndarray


def row_sum_scalars(inv_sqrt) -> RowSumScalars:
    """``R_u = |sum_v m_uv|`` and ``R~_u = sum_v |m_uv|``."""
    a = np.asarray(inv_sqrt, dtype=float)
    return RowSumScalars(R=_frozen(np.abs(a.sum(axis=1))), R_tilde=_frozen(np.abs(a).sum(axis=1)))


def matrix_norms(m) -> tuple[float, float]:
    """(infinity norm, spectral norm) of a symmetric matrix."""
    s = as_sym(m)
    w, _ = eigen_sym(s)
    return inf_norm(s), float(np.max(np.abs(w)))
