"""Parameter sweeps and checkers for monotonicity, convexity, orderings and limits.

Checkers return lists of ``Violation``. A violation with ``exploratory=True``
records behaviour in a parameter range where no inequality is claimed; such
entries are reported but never count as failures.
"""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channels import Subalgebra
from .divergence import (
    AlphaZ,
    DomainError,
    _check_pair,
    d_alpha_z,
    d_from_q,
    q_alpha_inf,
    q_alpha_z,
    relative_entropy_d1,
    supports_dominated,
)
from .matcore import _power, is_commuting, lambda_k, positive, singular_values

MONO_TOL = 1e-9
CONVEX_TOL = 1e-8
ORDER_TOL = 1e-8


class HypothesisError(ValueError):
    """Raised when the inputs do not meet the hypotheses a check relies on."""


@dataclass(frozen=True)
class SweepGrid:
    alphas: tuple[float, ...]
    zs: tuple[float, ...]
    include_inf_z: bool = False

    def __post_init__(self):
        a = tuple(float(x) for x in self.alphas)
        z = tuple(float(x) for x in self.zs)
        for name, v in (("alphas", a), ("zs", z)):
            if not v:
                raise ValueError(f"{name} must be nonempty")
            if any(not (x > 0 and math.isfinite(x)) for x in v):
                raise ValueError(f"{name} must be positive and finite")
            if any(v[i + 1] <= v[i] for i in range(len(v) - 1)):
                raise ValueError(f"{name} must be strictly increasing")
        if 1.0 in a:
            raise ValueError("alpha = 1 is not a grid point; use the limit checks")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "zs", z)

    def points(self) -> list[tuple[float, float]]:
        zs = list(self.zs) + ([math.inf] if self.include_inf_z else [])
        return [(a, z) for a in self.alphas for z in zs]


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    z: float
    q: float
    d: float
    region: str


@dataclass(frozen=True)
class Violation:
    property: str
    location: dict
    magnitude: float
    exploratory: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        out["location"] = {k: _json_num(v) for k, v in self.location.items()}
        out["magnitude"] = _json_num(self.magnitude)
        return out


@dataclass
class SweepReport:
    rows: list[SweepRow]
    violations: list[Violation] = field(default_factory=list)

    def by_alpha(self) -> dict[float, list[SweepRow]]:
        out = defaultdict(list)
        for r in self.rows:
            out[r.alpha].append(r)
        return {a: sorted(rs, key=lambda r: r.z) for a, rs in sorted(out.items())}

    def by_z(self) -> dict[float, list[SweepRow]]:
        out = defaultdict(list)
        for r in self.rows:
            out[r.z].append(r)
        return {z: sorted(rs, key=lambda r: r.alpha) for z, rs in sorted(out.items())}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "z", "Q", "D", "region"])
        for r in self.rows:
            w.writerow([format_number(r.alpha), format_number(r.z), format_number(r.q),
                        format_number(r.d), r.region])
        return buf.getvalue()

    def failures(self) -> list[Violation]:
        return [v for v in self.violations if not v.exploratory]


def format_number(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(float(x))


def _json_num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return format_number(x)
    return x


def _row(psi, phi, alpha: float, z: float) -> SweepRow:
    par = AlphaZ(alpha, z)
    tr = float(np.real(np.trace(psi)))
    if math.isinf(z):
        try:
            q = q_alpha_inf(psi, phi, alpha)
        except DomainError:
            return SweepRow(alpha, z, math.nan, math.nan, par.classify().value)
    else:
        q = q_alpha_z(psi, phi, par)
    return SweepRow(alpha, z, q, d_from_q(q, tr, alpha), par.classify().value)


def sweep(psi, phi, grid: SweepGrid, threads: int | None = None) -> SweepReport:
    """Evaluate Q and D at every grid point.

    z = inf rows use the exponential-log closed form and hold ``nan`` when
    the supports differ. Rows are computed independently and sorted by
    (alpha, z), so the result does not depend on ``threads``.
    """
    psi, phi = _check_pair(psi, phi)
    pts = grid.points()
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(lambda p: _row(psi, phi, *p), pts))
    else:
        rows = [_row(psi, phi, a, z) for a, z in pts]
    rows.sort(key=lambda r: (r.alpha, r.z))
    return SweepReport(rows)


def _slack(x: float, tol: float) -> float:
    return tol * max(1.0, abs(x)) if math.isfinite(x) else 0.0


def _drop(prev: float, nxt: float) -> float:
    """Amount by which ``nxt`` falls below ``prev`` in the extended reals (<= 0 if not)."""
    if math.isinf(prev) and math.isinf(nxt) and prev == nxt:
        return 0.0
    return prev - nxt


def check_z_monotone(report: SweepReport, tol: float = MONO_TOL) -> list[Violation]:
    """D nondecreasing in z for alpha < 1 and nonincreasing for alpha > 1."""
    out = []
    for alpha, rows in report.by_alpha().items():
        rows = [r for r in rows if not math.isnan(r.d)]
        for r0, r1 in zip(rows, rows[1:]):
            if alpha < 1:
                bad = _drop(r0.d, r1.d)
                prop = "z-increasing"
            else:
                bad = _drop(r1.d, r0.d)
                prop = "z-decreasing"
            if bad > _slack(r0.d, tol):
                loc = {"alpha": alpha, "z0": r0.z, "z1": r1.z}
                if alpha > 1:
                    loc["z_at_least_half_alpha"] = r0.z >= alpha / 2
                out.append(Violation(prop, loc, bad))
    return out


def _convexity_defect(x0, x1, x2, f0, f1, f2) -> float:
    lam = (x2 - x1) / (x2 - x0)
    return f1 - (lam * f0 + (1 - lam) * f2)


def check_alpha_monotone(report: SweepReport, tol: float = MONO_TOL,
                         convex_tol: float = CONVEX_TOL) -> list[Violation]:
    """Per z: D nondecreasing in alpha and log Q convex, on (0, 1) and on (1, 2z].

    Points with alpha > 2z are checked too but tagged exploratory.
    """
    out = []
    for z, rows in report.by_z().items():
        rows = [r for r in rows if not math.isnan(r.d)]
        for side in (0, 1):
            pts = [r for r in rows if (r.alpha < 1) == (side == 0)]
            for r0, r1 in zip(pts, pts[1:]):
                bad = _drop(r0.d, r1.d)
                if bad > _slack(r0.d, tol):
                    out.append(Violation("alpha-increasing", {"z": z, "alpha0": r0.alpha, "alpha1": r1.alpha},
                                         bad, exploratory=side == 1 and r1.alpha > 2 * z))
            finite = [r for r in pts if 0 < r.q < math.inf]
            for r0, r1, r2 in zip(finite, finite[1:], finite[2:]):
                defect = _convexity_defect(r0.alpha, r1.alpha, r2.alpha,
                                           math.log(r0.q), math.log(r1.q), math.log(r2.q))
                scale = max(1.0, abs(math.log(r1.q)))
                if defect > convex_tol * scale:
                    out.append(Violation("log-q-convex", {"z": z, "alpha": r1.alpha}, defect,
                                         exploratory=side == 1 and r2.alpha > 2 * z))
    return out


def check_d1_ordering(psi, phi, par_list: Iterable[AlphaZ], tol: float = ORDER_TOL) -> list[Violation]:
    """D_{alpha,z} <= D_1 for alpha < 1 and >= D_1 for alpha > 1, plus the beta sandwich.

    For z in (0, 1] and 1 - z < alpha < 1, with beta = (alpha - 1 + z)/z,
    D_{beta,1} <= D_{alpha,z} <= D_{alpha,1}.
    """
    psi, phi = _check_pair(psi, phi)
    d1 = relative_entropy_d1(psi, phi)
    out = []
    for par in par_list:
        d = d_alpha_z(psi, phi, par)
        loc = {"alpha": par.alpha, "z": par.z}
        if par.alpha < 1:
            if math.isfinite(d) and d - d1 > _slack(d1, tol):
                out.append(Violation("below-d1", loc, d - d1))
        elif math.isfinite(d1) and d1 - d > _slack(d1, tol):
            out.append(Violation("above-d1", loc, d1 - d))
        if par.alpha < 1 and 0 < par.z <= 1 and 1 - par.z < par.alpha:
            beta = (par.alpha - 1 + par.z) / par.z
            lo = d_alpha_z(psi, phi, AlphaZ(beta, 1.0))
            hi = d_alpha_z(psi, phi, AlphaZ(par.alpha, 1.0))
            if _drop(lo, d) > _slack(d, tol):
                out.append(Violation("sandwich-lower", {**loc, "beta": beta}, _drop(lo, d)))
            if _drop(d, hi) > _slack(hi, tol):
                out.append(Violation("sandwich-upper", loc, _drop(d, hi)))
    return out


@dataclass(frozen=True)
class LimitResult:
    alphas: tuple[float, ...]
    estimates: tuple[float, ...]
    d1: float
    errors: tuple[float, ...]
    passed: bool


def check_limit_alpha1(psi, phi, z: float, side: str, kmax: int = 5, tol: float = 1e-3) -> LimitResult:
    """Approach alpha = 1 from ``side`` ("above" or "below") at alpha = 1 -/+ 10^-k.

    Passes when the error against D_1 does not grow with k and is at most
    ``tol`` at k = kmax.
    """
    psi, phi = _check_pair(psi, phi)
    if side == "above":
        if not z > 0.5:
            raise HypothesisError("the limit from above needs z > 1/2")
        if not supports_dominated(psi, phi):
            raise HypothesisError("D is infinite for every alpha in (1, 2z]")
        sign = 1.0
    elif side == "below":
        if not z > 0:
            raise HypothesisError("z must be positive")
        sign = -1.0
    else:
        raise ValueError(f"side must be 'above' or 'below', got {side!r}")
    d1 = relative_entropy_d1(psi, phi)
    alphas = tuple(1 + sign * 10.0**-k for k in range(1, kmax + 1))
    est = tuple(d_alpha_z(psi, phi, AlphaZ(a, z)) for a in alphas)
    errs = tuple(abs(e - d1) if math.isfinite(d1) else math.inf for e in est)
    monotone = all(errs[i + 1] <= errs[i] + 1e-9 for i in range(len(errs) - 1))
    return LimitResult(alphas, est, d1, errs, bool(monotone and errs[-1] <= tol))


@dataclass(frozen=True)
class InequalityResult:
    lhs: float
    rhs: float
    passed: bool


def _commuting_pair_check(x, y, name: str):
    if not is_commuting(x, y, 1e-10):
        raise ValueError(f"{name} must commute")


def logmaj_check(a1, a2, b1, b2, theta: float, k: int) -> InequalityResult:
    """Lambda_k of the interpolated sandwich against the product of the endpoint Lambda_k."""
    a1, a2, b1, b2 = (positive(x) for x in (a1, a2, b1, b2))
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    _commuting_pair_check(a1, a2, "a1 and a2")
    _commuting_pair_check(b1, b2, "b1 and b2")
    a = _power(a1, theta) @ _power(a2, 1 - theta)
    b = _power(b1, theta) @ _power(b2, 1 - theta)
    a_half = _power((a + a.conj().T) / 2, 0.5)
    lhs = lambda_k(a_half @ b @ a_half, k)
    rhs = lambda_k(_power(a1, theta) @ _power(b1, theta), k) * lambda_k(_power(a2, 1 - theta) @ _power(b2, 1 - theta), k)
    return InequalityResult(lhs, rhs, lhs <= rhs * (1 + 1e-9) + 1e-12)


def strong_logmaj_check(a1, a2, b1, b2, theta: float, k: int) -> InequalityResult:
    """Exploratory: the same left side against Lambda_k(a1^1/2 b1 a1^1/2)^theta Lambda_k(a2^1/2 b2 a2^1/2)^(1-theta)."""
    a1, a2, b1, b2 = (positive(x) for x in (a1, a2, b1, b2))
    _commuting_pair_check(a1, a2, "a1 and a2")
    _commuting_pair_check(b1, b2, "b1 and b2")
    a = _power(a1, theta) @ _power(a2, 1 - theta)
    b = _power(b1, theta) @ _power(b2, 1 - theta)
    a_half = _power((a + a.conj().T) / 2, 0.5)
    lhs = lambda_k(a_half @ b @ a_half, k)
    r1 = _power(a1, 0.5)
    r2 = _power(a2, 0.5)
    rhs = lambda_k(r1 @ b1 @ r1, k) ** theta * lambda_k(r2 @ b2 @ r2, k) ** (1 - theta)
    return InequalityResult(lhs, rhs, lhs <= rhs * (1 + 1e-9) + 1e-12)


def alt_check(a, b, r: float, s: float) -> InequalityResult:
    """``Tr |a^r b^r|^s >= Tr |a b|^(r s)`` for r >= 1."""
    if not r >= 1:
        raise ValueError(f"r must be at least 1, got {r}")
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    a, b = positive(a), positive(b)
    lhs = float(np.sum(singular_values(_power(a, r) @ _power(b, r)) ** s))
    rhs = float(np.sum(singular_values(a @ b) ** (r * s)))
    return InequalityResult(lhs, rhs, lhs >= rhs - 1e-9 * max(1.0, rhs))


def chain_divergences(psi, phi, chain: Sequence[Subalgebra], par: AlphaZ) -> list[float]:
    """D of the conditional expectations of psi and phi along a chain of subalgebras."""
    psi, phi = _check_pair(psi, phi)
    return [d_alpha_z(sub.expectation(psi), sub.expectation(phi), par) for sub in chain]


def check_martingale(psi, phi, chain: Sequence[Subalgebra], par: AlphaZ,
                     tol: float = MONO_TOL) -> list[Violation]:
    """Nondecreasing D along an increasing chain ending at the full algebra, with matching top value."""
    vals = chain_divergences(psi, phi, chain, par)
    full = d_alpha_z(psi, phi, par)
    out = []
    for i, (v0, v1) in enumerate(zip(vals, vals[1:])):
        bad = _drop(v0, v1)
        if bad > _slack(v0, tol):
            out.append(Violation("chain-increasing", {"step": i, "alpha": par.alpha, "z": par.z}, bad))
    top = vals[-1]
    miss = 0.0 if top == full else abs(top - full)
    if miss > _slack(full, tol):
        out.append(Violation("chain-limit", {"alpha": par.alpha, "z": par.z}, miss))
    return out
