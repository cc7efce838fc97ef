"""Seeded randomized property suites, shared by the CLI and the acceptance tests.

Every trial draws from its own child of ``SeedSequence(seed)``, so results do
not depend on evaluation order or on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analysis as an
from .channels import (
    QuantumMap,
    Subalgebra,
    apply,
    depolarizing,
    dpi_gap,
    embedding,
    pinching,
    random_cptp,
    recover,
    refine_chain,
    sufficiency_test,
    transpose_composed,
    unitary_channel,
)
from .divergence import AlphaZ, q_alpha_z
from .matcore import schatten_norm
from .sampling import commuting_pair, random_state, random_unitary

SUITES = ("dpi", "sufficiency", "monotone-z", "monotone-alpha", "limits", "majorization")


@dataclass
class Tally:
    passed: int = 0
    failed: int = 0
    worst_margin: float = math.inf

    def add(self, margin: float):
        """Record one comparison; a margin >= 0 passes."""
        if margin >= 0:
            self.passed += 1
        else:
            self.failed += 1
        self.worst_margin = min(self.worst_margin, margin)

    def merge(self, other: "Tally"):
        self.passed += other.passed
        self.failed += other.failed
        self.worst_margin = min(self.worst_margin, other.worst_margin)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "failed": self.failed,
                "worst_margin": an.format_number(self.worst_margin) if not math.isfinite(self.worst_margin)
                else self.worst_margin}


@dataclass
class SuiteReport:
    suite: str
    properties: dict[str, Tally] = field(default_factory=dict)
    exploratory: dict[str, Tally] = field(default_factory=dict)

    def record(self, name: str, margin: float, exploratory: bool = False):
        book = self.exploratory if exploratory else self.properties
        book.setdefault(name, Tally()).add(margin)

    def merge(self, other: "SuiteReport"):
        for src, dst in ((other.properties, self.properties), (other.exploratory, self.exploratory)):
            for k, t in src.items():
                dst.setdefault(k, Tally()).merge(t)

    @property
    def ok(self) -> bool:
        return all(t.failed == 0 for t in self.properties.values())

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "ok": self.ok,
            "properties": {k: v.to_dict() for k, v in sorted(self.properties.items())},
            "exploratory": {k: v.to_dict() for k, v in sorted(self.exploratory.items())},
        }


def _dpi_params(rng, i: int) -> AlphaZ:
    if i % 2 == 0:
        a = float(rng.uniform(0.05, 0.95))
        return AlphaZ(a, float(rng.uniform(max(a, 1 - a), 4.0)))
    a = float(rng.uniform(1.05, 4.0))
    return AlphaZ(a, float(rng.uniform(max(a / 2, a - 1), a)))


def _dpi_channel(rng, dim: int, i: int) -> QuantumMap:
    kind = i % 4
    if kind == 0:
        return random_cptp(int(rng.integers(2, dim + 1)), dim, seed=int(rng.integers(2**32)))
    if kind == 1:
        return transpose_composed(random_cptp(dim, dim, seed=int(rng.integers(2**32))))
    if kind == 2:
        return depolarizing(dim, float(rng.uniform(0, 1)))
    cut = int(rng.integers(1, dim)) if dim > 1 else 1
    perm = [int(x) for x in rng.permutation(dim)]
    return pinching([perm[:cut], perm[cut:]] if cut < dim else [perm])


def dpi_trial(rng, dim: int, i: int) -> SuiteReport:
    rep = SuiteReport("dpi")
    psi, phi = random_state(dim, rng), random_state(dim, rng)
    par = _dpi_params(rng, i)
    gamma = _dpi_channel(rng, dim, i)
    res = dpi_gap(psi, phi, gamma, par)
    rep.record("dpi", res.gap + 1e-8 if not math.isnan(res.gap) else 0.0)
    # joint concavity (region i) / convexity (region ii) of Q
    psi2, phi2 = random_state(dim, rng), random_state(dim, rng)
    mid = q_alpha_z((psi + psi2) / 2, (phi + phi2) / 2, par)
    avg = (q_alpha_z(psi, phi, par) + q_alpha_z(psi2, phi2, par)) / 2
    diff = mid - avg if par.alpha < 1 else avg - mid
    rep.record("joint-concavity" if par.alpha < 1 else "joint-convexity", diff + 1e-8)
    rep.merge(chain_trial(rng, dim, i))
    return rep


def chain_trial(rng, dim: int, i: int) -> SuiteReport:
    """Block refinement chain for even i, corner chain e_1 < ... < I for odd i."""
    rep = SuiteReport("chains")
    psi, phi = random_state(dim, rng), random_state(dim, rng)
    par = _dpi_params(rng, i // 2)
    if i % 2 == 0:
        perm = [int(x) for x in rng.permutation(dim)]
        chain = [Subalgebra.block_diagonal(b) for b in refine_chain([[j] for j in perm])]
    else:
        u = random_unitary(dim, rng)
        chain = [Subalgebra.corner(u[:, :r] @ u[:, :r].conj().T) for r in range(1, dim + 1)]
    vals = an.chain_divergences(psi, phi, chain, par)
    full = an.d_alpha_z(psi, phi, par)
    for v0, v1 in zip(vals, vals[1:]):
        rep.record("chain-increasing", v1 - v0 + 1e-9 * max(1.0, abs(v0)))
    rep.record("chain-limit", 1e-9 * max(1.0, abs(full)) - abs(vals[-1] - full))
    return rep


def _sufficiency_params(rng, lower: bool) -> AlphaZ:
    if lower:
        a = float(rng.uniform(0.05, 0.95))
        return AlphaZ(a, float(rng.uniform(max(a, 1 - a) + 1e-3, 4.0)))
    a = float(rng.uniform(1.05, 4.0))
    lo = max(a / 2, a - 1) + 1e-3
    return AlphaZ(a, float(rng.uniform(lo, a)))


def _block_state(rng, blocks, dim: int) -> np.ndarray:
    h = np.zeros((dim, dim), dtype=complex)
    for b in blocks:
        sub = random_state(len(b), rng) * rng.uniform(0.2, 1.0)
        h[np.ix_(b, b)] = sub
    return h / np.real(np.trace(h))


def reversible_cases(rng, dim: int):
    """(name, psi, phi, gamma) with gamma sufficient for {psi, phi} by construction."""
    u = random_unitary(dim, rng)
    yield "unitary", random_state(dim, rng), random_state(dim, rng), unitary_channel(u)
    cut = max(1, dim // 2)
    perm = [int(x) for x in rng.permutation(dim)]
    blocks = [perm[:cut], perm[cut:]] if cut < dim else [perm]
    yield "pinching", _block_state(rng, blocks, dim), _block_state(rng, blocks, dim), pinching(blocks)
    small = max(2, dim // 2)
    tau = random_state(2, rng)
    yield ("embedding", np.kron(random_state(small, rng), tau), np.kron(random_state(small, rng), tau),
           embedding(small, 2))


def sufficiency_trial(rng, dim: int, i: int) -> SuiteReport:
    rep = SuiteReport("sufficiency")
    rho = random_state(dim, rng, rank=int(rng.integers(1, dim + 1)))
    gamma = random_cptp(int(rng.integers(2, dim + 1)), dim, seed=int(rng.integers(2**32)))
    back = recover(gamma, rho, apply(gamma.dual, rho))
    rep.record("recovery-identity", 1e-10 - schatten_norm(back - rho, 1) / np.real(np.trace(rho)))

    lower = i % 2 == 0
    for name, psi, phi, g in reversible_cases(rng, dim):
        par = _sufficiency_params(rng, lower)
        res = sufficiency_test(psi, phi, g, par)
        rep.record("reversible-equality", 0.0 if res.equality else -1.0)
        rep.record("reversible-recovery", 1e-8 - res.residual)
        rep.record("equality-iff-recovery", 0.0 if res.equality == res.recovered else -1.0)

    psi, phi = random_state(dim, rng), random_state(dim, rng)
    g = random_cptp(dim, dim, seed=int(rng.integers(2**32)))
    par = _sufficiency_params(rng, lower)
    res = sufficiency_test(psi, phi, g, par)
    rep.record("generic-gap", res.gap - 1e-4)
    rep.record("generic-residual", res.residual - 1e-3)
    rep.record("equality-iff-recovery", 0.0 if res.equality == res.recovered else -1.0)

    # alpha = 2, z = 1 sits outside the proven range; look for equality without recovery
    res2 = dpi_gap(psi, phi, g, AlphaZ(2.0, 1.0))
    eq = math.isfinite(res2.gap) and abs(res2.gap) <= 1e-7 * max(1.0, abs(res2.before))
    if eq:
        back = recover(g, phi, apply(g.dual, psi))
        rec = schatten_norm(back - psi, 1) <= 1e-7
        rep.record("alpha2-z1-equality-implies-recovery", 0.0 if rec else -1.0, exploratory=True)
    return rep


def z_grid(rng, alpha: float, size: int = 8) -> tuple[float, ...]:
    base = {alpha / 2, alpha, 4 * alpha, 0.3}
    extra = rng.uniform(0.05, 6.0, size)
    pts = sorted(base | set(float(x) for x in extra))
    idx = np.linspace(0, len(pts) - 1, size).round().astype(int)
    return tuple(sorted(set(pts[j] for j in idx)))


def monotone_z_trial(rng, dim: int, i: int) -> SuiteReport:
    rep = SuiteReport("monotone-z")
    psi, phi = random_state(dim, rng), random_state(dim, rng)
    for alpha in (float(rng.uniform(0.05, 0.95)), float(rng.uniform(1.05, 4.0))):
        rows = an.sweep(psi, phi, an.SweepGrid((alpha,), z_grid(rng, alpha))).rows
        for r0, r1 in zip(rows, rows[1:]):
            step = r1.d - r0.d if alpha < 1 else r0.d - r1.d
            rep.record("z-monotone", step + an.MONO_TOL * max(1.0, abs(r0.d)))
    return rep


def alpha_grids(z: float, size: int = 9) -> tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]:
    """Alpha grids on (0, 1), on (1, 2z] and a few exploratory points beyond 2z."""
    below = tuple(np.linspace(0.05, 0.95, size))
    top = max(2 * z, 1.1)
    above = tuple(1 + (top - 1) * np.linspace(0.02, 1.0, size))
    beyond = tuple(top * np.array([1.25, 1.5, 2.0]))
    return below, above, beyond


def monotone_alpha_trial(rng, dim: int, i: int) -> SuiteReport:
    rep = SuiteReport("monotone-alpha")
    psi, phi = random_state(dim, rng), random_state(dim, rng)
    z = float(rng.uniform(0.3, 3.0))
    below, above, beyond = alpha_grids(z)
    report = an.sweep(psi, phi, an.SweepGrid(below + above + beyond, (z,)))
    for side in (below, above):
        rows = [r for r in report.rows if r.alpha in side]
        for r0, r1 in zip(rows, rows[1:]):
            rep.record("alpha-monotone", r1.d - r0.d + an.MONO_TOL * max(1.0, abs(r0.d)))
        for r0, r1, r2 in zip(rows, rows[1:], rows[2:]):
            lq = [math.log(r.q) for r in (r0, r1, r2)]
            lam = (r2.alpha - r1.alpha) / (r2.alpha - r0.alpha)
            defect = lq[1] - (lam * lq[0] + (1 - lam) * lq[2])
            rep.record("log-q-convex", an.CONVEX_TOL * max(1.0, abs(lq[1])) - defect)
    rows = [r for r in report.rows if r.alpha > 1]
    for r0, r1 in zip(rows, rows[1:]):
        if r1.alpha in beyond:
            rep.record("alpha-monotone-beyond-2z", r1.d - r0.d + an.MONO_TOL * max(1.0, abs(r0.d)),
                       exploratory=True)
    return rep


def ordering_params(rng, count: int = 4) -> list[AlphaZ]:
    pars = []
    for _ in range(count):
        a = float(rng.uniform(0.05, 0.99))
        pars.append(AlphaZ(a, float(rng.uniform(0.05, 4.0))))
        # inside the beta sandwich range: z <= 1 and 1 - z < alpha < 1
        z = float(rng.uniform(0.05, 1.0))
        pars.append(AlphaZ(float(rng.uniform(1 - z, 1.0)), z))
        b = float(rng.uniform(1.01, 4.0))
        pars.append(AlphaZ(b, float(rng.uniform(max(b / 2, b - 1), b))))
    return pars


def limits_trial(rng, dim: int, i: int) -> SuiteReport:
    rep = SuiteReport("limits")
    psi, phi = random_state(dim, rng), random_state(dim, rng)
    for p in ordering_params(rng):
        viol = an.check_d1_ordering(psi, phi, [p])
        rep.record("d1-ordering", -max((v.magnitude for v in viol), default=-0.0))
    for z in (0.6, 1.0, 2.0):
        for side in ("above", "below"):
            res = an.check_limit_alpha1(psi, phi, z, side)
            rep.record("alpha-limit", 1e-3 - res.errors[-1])
            mono = min(res.errors[k] - res.errors[k + 1] + 1e-9 for k in range(len(res.errors) - 1))
            rep.record("alpha-limit-monotone", mono)
    return rep


def majorization_trial(rng, dim: int, i: int) -> SuiteReport:
    rep = SuiteReport("majorization")
    d = int(rng.integers(2, min(dim, 6) + 1)) if dim >= 2 else 2
    a1, a2, _, _ = commuting_pair(d, rng)
    b1, b2, _, _ = commuting_pair(d, rng)
    theta = float(rng.uniform(0.05, 0.95))
    for k in range(1, d + 1):
        r = an.logmaj_check(a1, a2, b1, b2, theta, k)
        rep.record("log-majorization", r.rhs * (1 + 1e-9) + 1e-12 - r.lhs)
        s = an.strong_logmaj_check(a1, a2, b1, b2, theta, k)
        rep.record("strong-log-majorization", s.rhs * (1 + 1e-9) + 1e-12 - s.lhs, exploratory=True)
    a, b = random_state(d, rng, normalize=False), random_state(d, rng, normalize=False)
    r = an.alt_check(a, b, float(rng.uniform(1.0, 4.0)), float(rng.uniform(0.1, 3.0)))
    rep.record("alt", r.lhs - r.rhs + 1e-9 * max(1.0, r.rhs))
    return rep


TRIALS: dict[str, Callable] = {
    "dpi": dpi_trial,
    "sufficiency": sufficiency_trial,
    "monotone-z": monotone_z_trial,
    "monotone-alpha": monotone_alpha_trial,
    "limits": limits_trial,
    "majorization": majorization_trial,
}


def run_suite(name: str, seed: int = 0, trials: int = 20, dim: int = 3, threads: int = 1,
              trial_fn: Callable | None = None) -> SuiteReport:
    """Run ``trials`` seeded trials of one suite and merge their tallies."""
    fn = trial_fn or TRIALS.get(name)
    if fn is None:
        raise ValueError(f"unknown suite {name!r}")
    children = np.random.SeedSequence([seed, SUITES.index(name) if name in SUITES else 99]).spawn(trials)

    def one(i):
        return fn(np.random.default_rng(children[i]), dim, i)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(one, range(trials)))
    else:
        parts = [one(i) for i in range(trials)]
    out = SuiteReport(name)
    for p in parts:
        out.merge(p)
    return out
