"""alpha-z Renyi quantities for positive matrices.

Values are floats; ``math.inf`` stands for an infinite divergence. The input
densities need not be normalized: ``D`` divides ``Q`` by ``Tr psi``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .matcore import (
    _eigh_psd,
    _from_spectrum,
    _power,
    graded_singular_values,
    is_commuting,
    positive,
    psd_tolerance,
    singular_values,
    support_leq,
    support_projection,
)

SUPPORT_TOL = 1e-9
COMMUTE_TOL = 1e-12
# weight for the generic combination psi + t phi used to find a joint eigenbasis
_GENERIC = 0.6180339887498949
UNDERFLOW = 1e-300
RANK_TOL = 1e-10


class DomainError(ValueError):
    """Raised when a closed-form expression is evaluated outside its domain."""


class Region(enum.Enum):
    DPI_I = "dpi-i"
    DPI_II = "dpi-ii"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class SufficiencyRange:
    """Whether equality in the DPI is known to characterize sufficiency at (alpha, z).

    ``side`` is ``"lower"`` for 0 < alpha < 1 and ``"upper"`` for alpha > 1.
    For the lower side, ``alpha_lt_z`` enables the case s(phi) <= s(psi) and
    ``one_minus_alpha_lt_z`` the case s(psi) <= s(phi). The upper side also
    needs a finite divergence, which only the caller can check.
    """

    applies: bool
    side: str | None = None
    alpha_lt_z: bool = False
    one_minus_alpha_lt_z: bool = False


@dataclass(frozen=True)
class AlphaZ:
    alpha: float
    z: float

    def __post_init__(self):
        if not self.alpha > 0 or self.alpha == 1 or not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be positive, finite and != 1, got {self.alpha}")
        if not self.z > 0:
            raise ValueError(f"z must be positive, got {self.z}")

    @property
    def below_one(self) -> bool:
        return self.alpha < 1

    def classify(self) -> Region:
        a, z = self.alpha, self.z
        if a < 1 and z >= max(a, 1 - a):
            return Region.DPI_I
        if a > 1 and max(a / 2, a - 1) <= z <= a:
            return Region.DPI_II
        return Region.OUTSIDE

    def sufficiency_range(self) -> SufficiencyRange:
        a, z = self.alpha, self.z
        region = self.classify()
        if region is Region.DPI_I:
            return SufficiencyRange(
                applies=a < z or 1 - a < z,
                side="lower",
                alpha_lt_z=a < z,
                one_minus_alpha_lt_z=1 - a < z,
            )
        if region is Region.DPI_II and a < z + 1:
            return SufficiencyRange(applies=True, side="upper")
        return SufficiencyRange(applies=False)


def _check_pair(psi, phi) -> tuple[np.ndarray, np.ndarray]:
    psi = positive(psi)
    phi = positive(phi)
    if psi.shape != phi.shape:
        raise ValueError(f"dimension mismatch: {psi.shape} vs {phi.shape}")
    if np.real(np.trace(psi)) <= 0 or not np.any(np.abs(psi) > 0):
        raise ValueError("psi must be nonzero")
    return psi, phi


def _check_finite_z(par: AlphaZ):
    if math.isinf(par.z):
        raise ValueError("z = inf is not accepted here; use q_alpha_inf")


def supports_dominated(psi, phi) -> bool:
    """True when s(psi) <= s(phi)."""
    return support_leq(support_projection(psi), support_projection(phi), SUPPORT_TOL)


def sandwich_factor(psi, phi, par: AlphaZ) -> np.ndarray | None:
    """The factor ``y`` with ``psi^(alpha/2z) = y phi^((alpha-1)/2z)`` for alpha > 1.

    Returns ``None`` when the support of psi is not contained in that of phi
    (then no such ``y`` exists and Q is infinite).
    """
    psi, phi = _check_pair(psi, phi)
    _check_finite_z(par)
    if par.alpha < 1:
        raise ValueError("the factorization is only used for alpha > 1")
    if not supports_dominated(psi, phi):
        return None
    a, z = par.alpha, par.z
    return _power(psi, a / (2 * z)) @ _power(phi, -(a - 1) / (2 * z))


def _graded(psi: np.ndarray, phi: np.ndarray, p1: float, p2: float) -> tuple[np.ndarray, int]:
    """``psi^p1 phi^p2`` in the eigenbases of the two supports, with its rank.

    The product is written as ``diag(a^p1) W diag(b^p2)`` where W is the
    overlap of the support eigenvectors. Forming it this way keeps the tiny
    entries that an explicit matrix product would lose to cancellation, and
    the rank is read off the well-conditioned W instead of from a cutoff on
    the graded singular values.
    """
    wa, va, on_a = _eigh_psd(psi)
    wb, vb, on_b = _eigh_psd(phi)
    w = va[:, on_a].conj().T @ vb[:, on_b]
    g = (wa[on_a] ** p1)[:, None] * w * (wb[on_b] ** p2)[None, :]
    rank = int(np.sum(singular_values(w) > RANK_TOL)) if w.size else 0
    return g, rank


def _joint_spectrum(psi: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Eigenvalues of psi and phi in a common eigenbasis, or None if they do not commute.

    Pairs that commute only to working precision have slightly different
    eigenbases when diagonalized one at a time, and large exponents amplify
    that mismatch. Diagonalizing a generic combination gives one basis.
    """
    if not is_commuting(psi, phi, COMMUTE_TOL):
        return None
    scale = max(np.linalg.norm(psi, 2), np.finfo(float).tiny)
    mix = psi / scale + _GENERIC * phi / max(np.linalg.norm(phi, 2), np.finfo(float).tiny)
    _, v = np.linalg.eigh(mix)
    p = np.real(np.einsum("ji,jk,ki->i", v.conj(), psi, v))
    q = np.real(np.einsum("ji,jk,ki->i", v.conj(), phi, v))
    # a coincidence in the mixed spectrum can leave the basis non-joint
    for h, d in ((psi, p), (phi, q)):
        if np.linalg.norm(v.conj().T @ h @ v - np.diag(d)) > 1e3 * COMMUTE_TOL * np.linalg.norm(h):
            return None
    p[p <= psd_tolerance(np.linalg.eigvalsh(psi))] = 0.0
    q[q <= psd_tolerance(np.linalg.eigvalsh(phi))] = 0.0
    return p, q


def _sum_power(s: np.ndarray, rank: int, p: float) -> float:
    return float(np.sum(s[:rank] ** p))


def q_alpha_z(psi, phi, par: AlphaZ) -> float:
    """Q_{alpha,z}(psi || phi); ``math.inf`` when alpha > 1 and s(psi) is not below s(phi)."""
    psi, phi = _check_pair(psi, phi)
    _check_finite_z(par)
    a, z = par.alpha, par.z
    if a > 1 and not supports_dominated(psi, phi):
        return math.inf
    joint = _joint_spectrum(psi, phi)
    if joint is not None:
        return classical_renyi(*joint, a)
    g, rank = _graded(psi, phi, a / (2 * z), (1 - a) / (2 * z))
    return _sum_power(graded_singular_values(g), rank, 2 * z)


def q_alpha_z_forms(psi, phi, par: AlphaZ) -> tuple[float, float]:
    """Q from the two sandwiches, for cross-checking ``q_alpha_z``.

    With c = (1-a)/2z the forms are ``Tr(phi^c psi^(a/z) phi^c)^z`` and
    ``Tr(psi^(a/2z) phi^2c psi^(a/2z))^z``. Each is the sum of ``s^2z`` over
    the singular values of its own square-root factor, ``psi^(a/2z) phi^c``
    and ``phi^c psi^(a/2z)`` respectively, built in separate eigenbases. For
    alpha > 1, c < 0 (pseudo-inverse powers) and both forms are inf unless
    s(psi) <= s(phi).
    """
    psi, phi = _check_pair(psi, phi)
    _check_finite_z(par)
    a, z = par.alpha, par.z
    if a > 1 and not supports_dominated(psi, phi):
        return math.inf, math.inf
    joint = _joint_spectrum(psi, phi)
    if joint is not None:
        q = classical_renyi(*joint, a)
        return q, q
    p1, p2 = a / (2 * z), (1 - a) / (2 * z)
    g1, r1 = _graded(psi, phi, p1, p2)
    g2, r2 = _graded(phi, psi, p2, p1)
    return (_sum_power(graded_singular_values(g1), r1, 2 * z),
            _sum_power(graded_singular_values(g2), r2, 2 * z))


def d_from_q(q: float, psi_trace: float, alpha: float) -> float:
    if math.isinf(q):
        return math.inf
    if q < UNDERFLOW:
        if alpha < 1:
            return math.inf
        raise ValueError("Q vanished for alpha > 1, which requires psi = 0")
    return math.log(q / psi_trace) / (alpha - 1)


def d_alpha_z(psi, phi, par: AlphaZ) -> float:
    """D_{alpha,z}(psi || phi) = log(Q / Tr psi) / (alpha - 1)."""
    psi, phi = _check_pair(psi, phi)
    q = q_alpha_z(psi, phi, par)
    return d_from_q(q, float(np.real(np.trace(psi))), par.alpha)


def relative_entropy_d1(psi, phi) -> float:
    """Normalized relative entropy ``Tr psi (log psi - log phi) / Tr psi``."""
    psi, phi = _check_pair(psi, phi)
    if not supports_dominated(psi, phi):
        return math.inf
    w, _, on = _eigh_psd(psi)
    t = float(np.sum(w))
    ent = float(np.sum(w[on] * np.log(w[on])))
    u, v, on_phi = _eigh_psd(phi)
    # diagonal of psi in phi's eigenbasis, restricted to the support of phi
    weights = np.real(np.einsum("ij,jk,ki->i", v.conj().T, psi, v))
    cross = float(np.sum(weights[on_phi] * np.log(u[on_phi])))
    return (ent - cross) / t


def q_alpha_inf(psi, phi, alpha: float) -> float:
    """``Tr exp(alpha log psi + (1 - alpha) log phi)`` on the common support.

    Only defined here when the supports coincide; otherwise ``DomainError``.
    """
    psi, phi = _check_pair(psi, phi)
    if alpha <= 0 or alpha == 1:
        raise ValueError(f"alpha must be positive and != 1, got {alpha}")
    p_psi = support_projection(psi)
    p_phi = support_projection(phi)
    if not (support_leq(p_psi, p_phi, SUPPORT_TOL) and support_leq(p_phi, p_psi, SUPPORT_TOL)):
        raise DomainError("the closed form at z = inf requires equal supports")
    _, v, on = _eigh_psd(psi)
    basis = v[:, on]
    a = basis.conj().T @ psi @ basis
    b = basis.conj().T @ phi @ basis
    la = _log_full_rank(a)
    lb = _log_full_rank(b)
    w = np.linalg.eigvalsh(alpha * la + (1 - alpha) * lb)
    return float(np.sum(np.exp(w)))


def _log_full_rank(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return _from_spectrum(np.log(w), v)


def d_alpha_inf(psi, phi, alpha: float) -> float:
    psi, phi = _check_pair(psi, phi)
    return d_from_q(q_alpha_inf(psi, phi, alpha), float(np.real(np.trace(psi))), alpha)


def classical_renyi(p, q, alpha: float) -> float:
    """``sum p_i^alpha q_i^(1 - alpha)`` with the conventions 0^(1-a) = 0 (a < 1), inf (a > 1)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("p and q must have the same length")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("entries must be nonnegative")
    if not np.any(p > 0):
        raise ValueError("p must be nonzero")
    live = p > 0
    if alpha > 1 and np.any(live & (q == 0)):
        return math.inf
    both = live & (q > 0)
    return float(np.sum(p[both] ** alpha * q[both] ** (1 - alpha)))
