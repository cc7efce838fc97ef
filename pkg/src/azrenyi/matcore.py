"""Hermitian functional calculus, Schatten (quasi-)norms and singular-value products.

Operators are plain ``numpy`` arrays. ``hermitian`` and ``positive`` validate an
input and return the symmetrized complex array that every other routine works
with; nothing here keeps state between calls.

Powers and logarithms are taken *on the support*: eigenvalues at or below the
relative cutoff ``dim * lambda_max * 1e-12`` are treated as exact zeros.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-10
REL_CUTOFF = 1e-12


class SpectralDecomposition(NamedTuple):
    """Eigenvalues sorted descending with the matching unitary of eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``a`` as a square hermitian matrix and return ``(a + a*)/2``.

    The asymmetry is measured relative to the largest absolute entry.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    asym = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if asym > tol * max(scale, np.finfo(float).tiny):
        raise ValueError(f"matrix is not hermitian (asymmetry {asym:.3e})")
    return (a + a.conj().T) / 2


def psd_tolerance(eigenvalues: np.ndarray) -> float:
    """Cutoff ``dim * lambda_max * 1e-12`` shared by the PSD check and the support."""
    lam_max = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    return eigenvalues.size * lam_max * REL_CUTOFF


def positive(h) -> np.ndarray:
    """Validate ``h`` as positive semidefinite and return it symmetrized.

    Negative eigenvalues within ``dim * lambda_max * 1e-12`` are tolerated; the
    functional calculus below clamps them to zero.
    """
    h = hermitian(h)
    w = np.linalg.eigvalsh(h)
    if w.size and w[0] < -psd_tolerance(w):
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    return h


def spectral_decompose(a) -> SpectralDecomposition:
    """Eigendecomposition of a hermitian matrix with eigenvalues in descending order."""
    a = hermitian(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed: {exc}") from exc
    return SpectralDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def _eigh_psd(h: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # eigenpairs with clamped eigenvalues and a support mask
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    return w, v, w > psd_tolerance(w)


def _from_spectrum(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = (v * w) @ v.conj().T
    return (out + out.conj().T) / 2


def support_projection(h) -> np.ndarray:
    """Orthogonal projector onto the span of eigenvectors with eigenvalue above the cutoff."""
    h = positive(h)
    _, v, on = _eigh_psd(h)
    vs = v[:, on]
    return vs @ vs.conj().T


def support_basis(h) -> np.ndarray:
    """Orthonormal columns spanning the support of a PSD matrix."""
    h = positive(h)
    _, v, on = _eigh_psd(h)
    return v[:, on]


def matrix_power(h, p: float) -> np.ndarray:
    """``h**p`` through the spectrum, with ``0**p = 0`` for either sign of ``p``.

    For negative ``p`` this is the power of the Moore-Penrose pseudo-inverse.
    """
    if p == 0:
        raise ValueError("p = 0 is ambiguous; use support_projection instead")
    h = positive(h)
    return _power(h, p)


def _power(h: np.ndarray, p: float) -> np.ndarray:
    w, v, on = _eigh_psd(h)
    wp = np.zeros_like(w)
    wp[on] = w[on] ** p
    return _from_spectrum(wp, v)


def matrix_log(h) -> np.ndarray:
    """Logarithm on the support; directions outside the support map to 0."""
    h = positive(h)
    w, v, on = _eigh_psd(h)
    if not on.any():
        raise ValueError("logarithm of the zero operator is undefined")
    wl = np.zeros_like(w)
    wl[on] = np.log(w[on])
    return _from_spectrum(wl, v)


def matrix_exp(a) -> np.ndarray:
    a = hermitian(a)
    w, v = np.linalg.eigh(a)
    return _from_spectrum(np.exp(w), v)


def singular_values(a) -> np.ndarray:
    """Singular values in descending order."""
    return np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)


def graded_singular_values(a) -> np.ndarray:
    """Singular values of a row- and column-graded matrix, descending.

    Rows are sorted by decreasing norm, then two rounds of QR with column
    pivoting precede the SVD. For matrices of the
    form ``D1 W D2`` with well-conditioned W this keeps the small singular
    values accurate relative to their own size, which a plain SVD does not.
    """
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.zeros(0)
    if a.shape[0] < a.shape[1]:
        a = a.conj().T
    a = a[np.argsort(-np.linalg.norm(a, axis=1), kind="stable")]
    _, r, _ = scipy.linalg.qr(a, mode="economic", pivoting=True)
    _, r2, _ = scipy.linalg.qr(r.conj().T, mode="economic", pivoting=True)
    return np.sort(np.linalg.svd(r2, compute_uv=False))[::-1]


def schatten_norm(a, p: float) -> float:
    """Schatten p-(quasi-)norm; ``p = np.inf`` gives the operator norm."""
    if not p > 0:
        raise ValueError(f"Schatten index must be positive, got {p}")
    s = singular_values(a)
    if np.isinf(p):
        return float(s[0]) if s.size else 0.0
    return float(np.sum(s**p) ** (1.0 / p))


def trace_power(h, p: float) -> float:
    """``Tr h**p`` for PSD ``h`` and ``p > 0``, ignoring eigenvalues below the cutoff."""
    w = np.clip(np.linalg.eigvalsh(h), 0.0, None)
    w = w[w > psd_tolerance(w)]
    return float(np.sum(w**p))


def lambda_k(a, k: int) -> float:
    """Product of the ``k`` largest singular values of ``a``."""
    s = singular_values(a)
    if not 1 <= k <= s.size:
        raise ValueError(f"k must lie in [1, {s.size}], got {k}")
    return float(np.prod(s[:k]))


def is_commuting(a, b, tol: float = 1e-10) -> bool:
    """Frobenius norm of ``[a, b]`` relative to ``|a| |b|``."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    return bool(np.linalg.norm(a @ b - b @ a) <= tol * max(scale, np.finfo(float).tiny))


def support_leq(p_small: np.ndarray, p_big: np.ndarray, tol: float = 1e-9) -> bool:
    """Projector ordering ``P_small <= P_big`` via ``|(1 - P_big) P_small|_inf``."""
    d = p_big.shape[0]
    return schatten_norm((np.eye(d) - p_big) @ p_small, np.inf) <= tol


def psd_leq(h, k, tol: float | None = None) -> bool:
    """Loewner order ``h <= k`` up to the PSD tolerance of ``k - h``."""
    w = np.linalg.eigvalsh(hermitian(np.asarray(k) - np.asarray(h)))
    if tol is None:
        tol = psd_tolerance(w)
    return bool(w[0] >= -tol)
