"""Small dense-matrix helpers: spectral quantities, PSD order, weighted norms.

Everything here works on plain ``numpy`` arrays. Inputs that are meant to be
symmetric are symmetrized as ``(m + m.T) / 2`` before any eigen-routine.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, DomainError

SPECTRAL_RTOL = 1e-10


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    arr = np.atleast_2d(np.asarray(m, dtype=float))
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def as_vector(x, name: str = "vector") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def _square(m: np.ndarray, name: str) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")


def sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def is_symmetric(m, tol: float = SPECTRAL_RTOL) -> bool:
    m = as_matrix(m)
    _square(m, "matrix")
    scale = max(1.0, float(np.max(np.abs(m))))
    return bool(np.max(np.abs(m - m.T)) <= tol * scale)


def largest_singular_value(m) -> float:
    """Largest singular value, via a deterministic LAPACK SVD."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def spectral_radius(m) -> float:
    m = as_matrix(m)
    _square(m, "matrix")
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def is_positive_definite(m, tol: float = 1e-12) -> bool:
    """True iff ``m`` is symmetric within ``tol`` and its smallest eigenvalue exceeds ``tol``."""
    m = as_matrix(m)
    _square(m, "matrix")
    if np.max(np.abs(m - m.T)) > tol * max(1.0, float(np.max(np.abs(m)))):
        return False
    return bool(np.linalg.eigvalsh(sym(m))[0] > tol)


def weighted_norm_sq(x, m) -> float:
    """Quadratic form ``x' m x``."""
    x = as_vector(x, "x")
    m = as_matrix(m, "weight")
    _square(m, "weight")
    if m.shape[0] != x.shape[0]:
        raise DimensionError(f"weight is {m.shape}, vector has length {x.shape[0]}")
    return float(x @ sym(m) @ x)


def psd_leq(m1, m2, tol: float = 1e-12) -> bool:
    """Loewner order test ``m1 <= m2``: smallest eigenvalue of ``m2 - m1`` is at least ``-tol``."""
    m1 = as_matrix(m1, "m1")
    m2 = as_matrix(m2, "m2")
    _square(m1, "m1")
    if m1.shape != m2.shape:
        raise DimensionError(f"shape mismatch {m1.shape} vs {m2.shape}")
    for name, m in (("m1", m1), ("m2", m2)):
        if np.max(np.abs(m - m.T)) > max(tol, SPECTRAL_RTOL) * max(1.0, float(np.max(np.abs(m)))):
            raise DomainError(f"{name} is not symmetric")
    return bool(np.linalg.eigvalsh(sym(m2 - m1))[0] >= -tol)


def sqrtm_psd(m) -> np.ndarray:
    """Symmetric principal square root of a PSD matrix (negative roundoff eigenvalues clipped)."""
    m = as_matrix(m)
    _square(m, "matrix")
    w, u = np.linalg.eigh(sym(m))
    w = np.clip(w, 0.0, None)
    return sym((u * np.sqrt(w)) @ u.T)


def inv_sqrtm_pd(m) -> np.ndarray:
    """Symmetric principal inverse square root of a positive definite matrix."""
    m = as_matrix(m)
    _square(m, "matrix")
    w, u = np.linalg.eigh(sym(m))
    if w[0] <= 0.0:
        raise DomainError("matrix is not positive definite")
    return sym((u / np.sqrt(w)) @ u.T)


def numerical_rank(m, rtol: float = 1e-8) -> int:
    """Rank with singular values below ``rtol * sigma_max`` counted as zero."""
    s = np.linalg.svd(np.atleast_2d(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))
