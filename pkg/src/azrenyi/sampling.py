"""Seeded random matrices for tests, suites and the CLI."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .channels import QuantumMap, random_cptp


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(rows: int, cols: int, rng) -> np.ndarray:
    rng = rng_from(rng)
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_state(d: int, rng=None, rank: int | None = None, normalize: bool = True) -> np.ndarray:
    """``G G*`` for a d x rank complex Gaussian G, divided by its trace when ``normalize``."""
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}], got {rank}")
    g = ginibre(d, rank, rng)
    h = g @ g.conj().T
    h = (h + h.conj().T) / 2
    return h / np.real(np.trace(h)) if normalize else h


def random_unitary(d: int, rng=None) -> np.ndarray:
    if d == 1:
        return np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(d, random_state=rng_from(rng))


def random_hermitian(d: int, rng=None, scale: float = 1.0) -> np.ndarray:
    g = ginibre(d, d, rng)
    return scale * (g + g.conj().T) / 2


def diagonal_in(basis: np.ndarray, eigs) -> np.ndarray:
    out = (basis * np.asarray(eigs)) @ basis.conj().T
    return (out + out.conj().T) / 2


def commuting_pair(d: int, rng=None) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Two full-rank states sharing a random eigenbasis, with their eigenvalue vectors."""
    rng = rng_from(rng)
    u = random_unitary(d, rng)
    p = rng.dirichlet(np.ones(d))
    q = rng.dirichlet(np.ones(d))
    return diagonal_in(u, p), diagonal_in(u, q), p, q


def random_channel(d_in: int, d_out: int | None = None, rng=None) -> QuantumMap:
    rng = rng_from(rng)
    return random_cptp(d_in, d_in if d_out is None else d_out, seed=int(rng.integers(2**63)))
