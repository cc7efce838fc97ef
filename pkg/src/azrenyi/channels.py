"""Unital maps between matrix algebras in the Heisenberg picture.

A ``QuantumMap`` with ``dim_in = n`` and ``dim_out = m`` sends n x n matrices
(the smaller algebra N) to m x m matrices (the algebra M). States live on M;
the predual pushes densities from M down to N. Maps are stored as transfer
matrices acting on column-major vectorizations, so ``vec(K b K*) =
(conj(K) kron K) vec(b)``. Kraus operators, when known, have shape m x n and
act as ``b -> sum K b K*``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .divergence import AlphaZ, _check_pair, d_alpha_z, supports_dominated
from .matcore import (
    _power,
    hermitian,
    positive,
    psd_tolerance,
    schatten_norm,
    support_basis,
    support_projection,
)

EQUALITY_TOL = 1e-7
RECOVERY_TOL = 1e-7
MAP_TOL = 1e-10


class RangeError(ValueError):
    """Raised when (alpha, z) lies outside the range where a test is meaningful."""


def vec(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


def swap(d: int) -> np.ndarray:
    """Permutation with ``swap(d) @ vec(x) = vec(x.T)``."""
    idx = np.arange(d * d).reshape((d, d), order="F").T.reshape(-1, order="F")
    return np.eye(d * d)[idx]


def _kraus_transfer(kraus: Sequence[np.ndarray]) -> np.ndarray:
    return sum(np.kron(k.conj(), k) for k in kraus)


def choi_from_transfer(transfer: np.ndarray, dim_in: int, dim_out: int) -> np.ndarray:
    """``sum_ij E_ij kron gamma(E_ij)``, of size (dim_in dim_out)^2."""
    c = np.zeros((dim_in * dim_out, dim_in * dim_out), dtype=complex)
    for j in range(dim_in):
        for i in range(dim_in):
            img = unvec(transfer[:, i + j * dim_in], dim_out)
            c[i * dim_out:(i + 1) * dim_out, j * dim_out:(j + 1) * dim_out] = img
    return c


def _is_psd(c: np.ndarray, tol: float = MAP_TOL) -> bool:
    c = (c + c.conj().T) / 2
    w = np.linalg.eigvalsh(c)
    return bool(w[0] >= -max(tol * max(abs(w[-1]), 1.0), psd_tolerance(w)))


@dataclass(frozen=True, eq=False)
class QuantumMap:
    """Linear map ``M_dim_in -> M_dim_out`` with truthful structural flags.

    ``completely_positive`` and ``unital`` are always computed. ``positive``
    and ``two_positive`` follow from complete positivity when it holds; a
    caller that knows a non-CP map is positive (a transpose composition, say)
    declares it. ``two_positive`` is certified through the Choi matrix, which
    is sufficient but not necessary.
    """

    dim_in: int
    dim_out: int
    transfer: np.ndarray
    kraus: tuple[np.ndarray, ...] | None = None
    declared_positive: bool = field(default=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.transfer, dtype=complex)
        if t.shape != (self.dim_out**2, self.dim_in**2):
            raise ValueError(f"transfer shape {t.shape} does not match dims ({self.dim_in}, {self.dim_out})")
        object.__setattr__(self, "transfer", t)
        if self.kraus is not None:
            ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
            for k in ks:
                if k.shape != (self.dim_out, self.dim_in):
                    raise ValueError(f"Kraus operator shape {k.shape} should be {(self.dim_out, self.dim_in)}")
            if np.max(np.abs(_kraus_transfer(ks) - t)) > MAP_TOL * max(1.0, np.max(np.abs(t))):
                raise ValueError("Kraus operators disagree with the transfer matrix")
            object.__setattr__(self, "kraus", ks)
        if not self.preserves_hermiticity():
            raise ValueError("map does not preserve hermiticity")

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "QuantumMap":
        ks = [np.atleast_2d(np.asarray(k, dtype=complex)) for k in kraus]
        if not ks:
            raise ValueError("need at least one Kraus operator")
        m, n = ks[0].shape
        return cls(n, m, _kraus_transfer(ks), tuple(ks))

    @classmethod
    def from_transfer(cls, transfer, dim_in: int, dim_out: int, positive: bool = False) -> "QuantumMap":
        return cls(dim_in, dim_out, transfer, None, positive)

    def __call__(self, b) -> np.ndarray:
        return apply(self, b)

    def preserves_hermiticity(self) -> bool:
        # gamma(a*) = gamma(a)* on matrix units suffices by linearity
        n, m = self.dim_in, self.dim_out
        sw_in, sw_out = swap(n), swap(m)
        lhs = self.transfer @ sw_in
        rhs = sw_out @ self.transfer.conj()
        return bool(np.max(np.abs(lhs - rhs)) <= MAP_TOL * max(1.0, np.max(np.abs(self.transfer))))

    @cached_property
    def choi(self) -> np.ndarray:
        return choi_from_transfer(self.transfer, self.dim_in, self.dim_out)

    @cached_property
    def completely_positive(self) -> bool:
        return _is_psd(self.choi)

    @property
    def two_positive(self) -> bool:
        return self.completely_positive

    @property
    def positive(self) -> bool:
        return self.declared_positive or self.completely_positive

    @cached_property
    def unital(self) -> bool:
        img = unvec(self.transfer @ vec(np.eye(self.dim_in)), self.dim_out)
        return bool(np.max(np.abs(img - np.eye(self.dim_out))) <= MAP_TOL)

    @cached_property
    def trace_preserving(self) -> bool:
        # Tr gamma(b) = Tr b for all b
        row = vec(np.eye(self.dim_out)) @ self.transfer
        return bool(np.max(np.abs(row - vec(np.eye(self.dim_in)))) <= MAP_TOL)

    @cached_property
    def dual(self) -> "QuantumMap":
        t = swap(self.dim_in) @ self.transfer.T @ swap(self.dim_out)
        kraus = None if self.kraus is None else tuple(k.conj().T for k in self.kraus)
        return QuantumMap(self.dim_out, self.dim_in, t, kraus, self.declared_positive)


def apply(gamma: QuantumMap, b) -> np.ndarray:
    b = np.asarray(b, dtype=complex)
    if b.shape != (gamma.dim_in, gamma.dim_in):
        raise ValueError(f"input shape {b.shape} does not match dim_in = {gamma.dim_in}")
    return unvec(gamma.transfer @ vec(b), gamma.dim_out)


def predual(gamma: QuantumMap) -> QuantumMap:
    """The trace-adjoint map, ``Tr(gamma(b) h) = Tr(b gamma_*(h))``."""
    return gamma.dual


def compose(outer: QuantumMap, inner: QuantumMap) -> QuantumMap:
    """``b -> outer(inner(b))``."""
    if outer.dim_in != inner.dim_out:
        raise ValueError("dimension mismatch in composition")
    kraus = None
    if outer.kraus is not None and inner.kraus is not None:
        kraus = tuple(k1 @ k2 for k1 in outer.kraus for k2 in inner.kraus)
    return QuantumMap(inner.dim_in, outer.dim_out, outer.transfer @ inner.transfer, kraus,
                      outer.positive and inner.positive)


# constructors


def identity_channel(d: int) -> QuantumMap:
    return QuantumMap.from_kraus([np.eye(d)])


def unitary_channel(u) -> QuantumMap:
    """``b -> U* b U``; its predual is ``h -> U h U*``."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("unitary must be square")
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
        raise ValueError("matrix is not unitary")
    return QuantumMap.from_kraus([u.conj().T])


def depolarizing(d: int, t: float) -> QuantumMap:
    """``b -> (1 - t) b + t Tr(b) I/d`` for 0 <= t <= 1; self-dual."""
    if not 0 <= t <= 1:
        raise ValueError(f"depolarizing parameter must lie in [0, 1], got {t}")
    e = vec(np.eye(d))
    transfer = (1 - t) * np.eye(d * d) + t * np.outer(e, e) / d
    return QuantumMap(d, d, transfer)


def _check_partition(blocks: Sequence[Sequence[int]], d: int | None = None) -> tuple[tuple[int, ...], ...]:
    blocks = tuple(tuple(int(i) for i in b) for b in blocks)
    flat = sorted(i for b in blocks for i in b)
    if any(len(b) == 0 for b in blocks):
        raise ValueError("blocks must be nonempty")
    n = len(flat) if d is None else d
    if flat != list(range(n)):
        raise ValueError("blocks must partition 0..d-1 without overlap")
    return blocks


def _block_projector(block: Sequence[int], d: int) -> np.ndarray:
    p = np.zeros((d, d))
    p[list(block), list(block)] = 1
    return p


def pinching(blocks: Sequence[Sequence[int]]) -> QuantumMap:
    """``x -> sum_i P_i x P_i`` for coordinate blocks; self-dual and CP."""
    blocks = _check_partition(blocks)
    d = sum(len(b) for b in blocks)
    return QuantumMap.from_kraus([_block_projector(b, d) for b in blocks])


def embedding(d: int, multiplicity: int) -> QuantumMap:
    """Amplification ``a -> a kron I_m`` of M_d into M_(d m); the predual is the partial trace."""
    if multiplicity < 1:
        raise ValueError("multiplicity must be positive")
    kraus = []
    for j in range(multiplicity):
        e = np.zeros((multiplicity, 1))
        e[j, 0] = 1
        kraus.append(np.kron(np.eye(d), e))
    return QuantumMap.from_kraus(kraus)


def random_cptp(dim_in: int, dim_out: int, seed=None, rank: int | None = None) -> QuantumMap:
    """Random unital CP map whose predual is a Stinespring-dilated CPTP map.

    The stacked adjoint Kraus operators form a Haar-random isometry
    C^dim_out -> C^(rank * dim_in).
    """
    rng = np.random.default_rng(seed)
    if rank is None:
        rank = max(2, math.ceil(dim_out / dim_in))
    if rank * dim_in < dim_out:
        raise ValueError("rank * dim_in must be at least dim_out")
    big = rank * dim_in
    u = unitary_group.rvs(big, random_state=rng) if big > 1 else np.ones((1, 1), dtype=complex)
    iso = u[:, :dim_out]
    kraus = [iso[i * dim_in:(i + 1) * dim_in, :].conj().T for i in range(rank)]
    return QuantumMap.from_kraus(kraus)


def transpose_map(d: int) -> QuantumMap:
    """``b -> b.T``: positive and unital, not 2-positive."""
    return QuantumMap(d, d, swap(d), None, True)


def transpose_composed(gamma: QuantumMap) -> QuantumMap:
    """``b -> gamma(b).T``, a positive unital map that is generally not CP."""
    return compose(transpose_map(gamma.dim_out), gamma)


def make_channel(spec: dict) -> QuantumMap:
    """Build a map from a plain dictionary with a ``kind`` key.

    Kinds: identity(dim), unitary(u), depolarizing(dim, t), pinching(blocks),
    embedding(dim, multiplicity), random_cptp(dim_in, dim_out, seed, rank),
    kraus(ops), transfer(dim_in, dim_out, matrix, positive). Matrix-valued
    entries are numpy arrays; file decoding lives in ``fileio``.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("channel spec must be a dict with a 'kind' entry")
    kind = spec["kind"]
    try:
        if kind == "identity":
            return identity_channel(int(spec["dim"]))
        if kind == "unitary":
            return unitary_channel(spec["u"])
        if kind == "depolarizing":
            return depolarizing(int(spec["dim"]), float(spec["t"]))
        if kind == "pinching":
            return pinching(spec["blocks"])
        if kind == "embedding":
            return embedding(int(spec["dim"]), int(spec["multiplicity"]))
        if kind == "random_cptp":
            rank = spec.get("rank")
            return random_cptp(int(spec["dim_in"]), int(spec["dim_out"]), int(spec["seed"]),
                               None if rank is None else int(rank))
        if kind == "kraus":
            return QuantumMap.from_kraus(spec["ops"])
        if kind == "transfer":
            return QuantumMap.from_transfer(spec["matrix"], int(spec["dim_in"]), int(spec["dim_out"]),
                                            bool(spec.get("positive", False)))
    except KeyError as exc:
        raise ValueError(f"channel spec of kind {kind!r} is missing {exc}") from exc
    raise ValueError(f"unknown channel kind {kind!r}")


# Petz duals


def _check_state_for(gamma: QuantumMap, rho) -> np.ndarray:
    rho = positive(rho)
    if rho.shape != (gamma.dim_out, gamma.dim_out):
        raise ValueError("state dimension does not match the map's output algebra")
    if not np.any(np.abs(rho) > 0):
        raise ValueError("rho must be nonzero")
    return rho


def petz_dual(gamma: QuantumMap, rho) -> QuantumMap:
    """The Petz dual ``a -> sigma^-1/2 gamma_*(rho^1/2 a rho^1/2) sigma^-1/2``, sigma = gamma_*(rho).

    Inverse powers are taken on supports, so the result is unital on the
    corner s(sigma) N s(sigma). Maps M back into N.
    """
    rho = _check_state_for(gamma, rho)
    pre = gamma.dual
    sigma = apply(pre, rho)
    r_half = _power(rho, 0.5)
    s_mhalf = _power(positive(sigma), -0.5)
    transfer = np.kron(s_mhalf.conj(), s_mhalf) @ pre.transfer @ np.kron(r_half.conj(), r_half)
    kraus = None
    if gamma.kraus is not None:
        kraus = tuple(s_mhalf @ k.conj().T @ r_half for k in gamma.kraus)
    return QuantumMap(gamma.dim_out, gamma.dim_in, transfer, kraus, gamma.positive)


def recover(gamma: QuantumMap, rho, h) -> np.ndarray:
    """Apply the predual of the Petz dual to a density ``h`` on N."""
    return apply(petz_dual(gamma, rho).dual, h)


def petz_dual_p(gamma: QuantumMap, rho, p: float, k) -> np.ndarray:
    """``rho^(1/2p) gamma(sigma^(-1/2p) k sigma^(-1/2p)) rho^(1/2p)`` for k supported on s(sigma)."""
    if not p >= 1:
        raise ValueError(f"p must be at least 1, got {p}")
    rho = _check_state_for(gamma, rho)
    sigma = positive(apply(gamma.dual, rho))
    k = np.asarray(k, dtype=complex)
    if k.shape != (gamma.dim_in, gamma.dim_in):
        raise ValueError("k must live on the map's input algebra")
    s = support_projection(sigma)
    off = np.eye(gamma.dim_in) - s
    scale = max(np.max(np.abs(k)), np.finfo(float).tiny)
    if max(np.max(np.abs(off @ k)), np.max(np.abs(k @ off))) > 1e-9 * scale:
        raise ValueError("k is not supported in the support of gamma_*(rho)")
    c = 1 / (2 * p)
    s_inv = _power(sigma, -c)
    r = _power(rho, c)
    return r @ apply(gamma, s_inv @ k @ s_inv) @ r


# data processing and sufficiency


@dataclass(frozen=True)
class DPIResult:
    before: float
    after: float
    gap: float
    exploratory: bool


def dpi_gap(psi, phi, gamma: QuantumMap, par: AlphaZ) -> DPIResult:
    """D before and after pushing both densities through the predual."""
    psi, phi = _check_pair(psi, phi)
    if psi.shape[0] != gamma.dim_out:
        raise ValueError("state dimension does not match the map's output algebra")
    before = d_alpha_z(psi, phi, par)
    pre = gamma.dual
    after = d_alpha_z(apply(pre, psi), apply(pre, phi), par)
    if math.isinf(before):
        gap = math.inf if not math.isinf(after) else math.nan
    elif math.isinf(after):
        gap = -math.inf
    else:
        gap = before - after
    exploratory = par.classify().value == "outside"
    return DPIResult(before, after, gap, exploratory)


@dataclass(frozen=True)
class SufficiencyResult:
    equality: bool
    recovered: bool
    residual: float
    gap: float


def sufficiency_test(psi, phi, gamma: QuantumMap, par: AlphaZ) -> SufficiencyResult:
    """Compare DPI equality with Petz recovery at (alpha, z) inside the sufficiency range.

    When s(psi) <= s(phi) the Petz dual is taken with respect to phi and
    applied to gamma_*(psi); otherwise (the alpha < z case with
    s(phi) <= s(psi)) the roles are swapped. ``residual`` is the trace-norm
    recovery defect divided by the trace of the recovered density.
    """
    psi, phi = _check_pair(psi, phi)
    if not (gamma.two_positive and gamma.unital):
        raise ValueError("sufficiency testing needs a 2-positive unital map")
    rng_ = par.sufficiency_range()
    if not rng_.applies:
        raise RangeError(f"(alpha, z) = ({par.alpha}, {par.z}) is outside the sufficiency range")
    psi_in_phi = supports_dominated(psi, phi)
    phi_in_psi = supports_dominated(phi, psi)
    if rng_.side == "lower":
        if not ((rng_.alpha_lt_z and phi_in_psi) or (rng_.one_minus_alpha_lt_z and psi_in_phi)):
            raise RangeError("the support relation between psi and phi does not match the (alpha, z) sub-case")
    res = dpi_gap(psi, phi, gamma, par)
    if rng_.side == "upper" and math.isinf(res.before):
        raise RangeError("the divergence is infinite")
    finite = math.isfinite(res.before) and math.isfinite(res.after)
    equality = finite and abs(res.before - res.after) <= EQUALITY_TOL * max(1.0, abs(res.before))
    if psi_in_phi:
        target, ref = psi, phi
    else:
        target, ref = phi, psi
    back = recover(gamma, ref, apply(gamma.dual, target))
    tr = float(np.real(np.trace(target)))
    residual = schatten_norm(back - target, 1) / tr
    return SufficiencyResult(equality, residual <= RECOVERY_TOL, residual, res.gap)


# subalgebras


@dataclass(frozen=True, eq=False)
class Subalgebra:
    """A block-diagonal subalgebra (coordinate blocks) or a corner ``P M P``."""

    blocks: tuple[tuple[int, ...], ...] | None = None
    projector: np.ndarray | None = None

    def __post_init__(self):
        if (self.blocks is None) == (self.projector is None):
            raise ValueError("give exactly one of blocks or projector")
        if self.blocks is not None:
            object.__setattr__(self, "blocks", _check_partition(self.blocks))
        else:
            p = hermitian(self.projector)
            if np.max(np.abs(p @ p - p)) > 1e-12 * max(1.0, np.max(np.abs(p))) * 10:
                raise ValueError("corner requires an orthogonal projector")
            object.__setattr__(self, "projector", p)

    @classmethod
    def block_diagonal(cls, blocks) -> "Subalgebra":
        return cls(blocks=blocks)

    @classmethod
    def corner(cls, projector) -> "Subalgebra":
        return cls(projector=projector)

    @property
    def kind(self) -> str:
        return "blocks" if self.blocks is not None else "corner"

    def expectation(self, h) -> np.ndarray:
        """Trace-preserving conditional expectation of a density, as a full-size matrix.

        For blocks this is the pinching. For a corner e it is the expectation
        onto ``e M e + C (1 - e)``: ``e h e + Tr((1 - e) h) (1 - e) / rank(1 - e)``.
        """
        h = hermitian(h)
        if self.blocks is not None:
            d = h.shape[0]
            return sum(p @ h @ p for p in (_block_projector(b, d) for b in self.blocks))
        e = self.projector
        f = np.eye(e.shape[0]) - e
        rank_f = int(round(float(np.real(np.trace(f)))))
        out = e @ h @ e
        if rank_f > 0:
            out = out + float(np.real(np.trace(f @ h))) / rank_f * f
        return out


def restrict(psi, sub: Subalgebra) -> np.ndarray:
    """Density of psi restricted to ``sub``.

    Corners give the compression ``P h P`` written in an orthonormal basis of
    the range of P; block subalgebras give the pinching (full size).
    """
    psi = positive(psi)
    if sub.kind == "blocks":
        return sub.expectation(psi)
    basis = support_basis(sub.projector)
    return basis.conj().T @ psi @ basis


def refine_chain(blocks: Sequence[Sequence[int]]) -> list[tuple[tuple[int, ...], ...]]:
    """Partitions from ``blocks`` up to a single block, merging neighbours pairwise.

    Each partition is coarser than the last, so the block algebras increase.
    """
    chain = [_check_partition(blocks)]
    while len(chain[-1]) > 1:
        cur = list(chain[-1])
        merged = [tuple(cur[i]) + tuple(cur[i + 1]) for i in range(0, len(cur) - 1, 2)]
        if len(cur) % 2:
            merged.append(cur[-1])
        chain.append(tuple(merged))
    return chain

