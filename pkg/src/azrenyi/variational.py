"""Variational expressions for Q_{alpha,z} and their optimizers.

For alpha < 1, Q is the infimum over positive definite ``a`` of

    alpha Tr(a^1/2 psi^(alpha/z) a^1/2)^(z/alpha)
        + (1 - alpha) Tr(a^-1/2 phi^((1-alpha)/z) a^-1/2)^(z/(1-alpha)),

and for alpha > 1 (with Q finite) it is the supremum over PSD ``w`` of

    alpha Tr(y w y*)^(z/alpha) - (alpha - 1) Tr w^(z/(alpha-1)),

where ``y`` is the factor from :func:`azrenyi.divergence.sandwich_factor`.
Both extrema have closed forms; ``numeric_optimize`` confirms them
independently by searching over ``exp(H)`` for hermitian ``H``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergence import AlphaZ, _check_pair, q_alpha_z, sandwich_factor
from .matcore import _eigh_psd, _from_spectrum, _power, positive, psd_tolerance, singular_values, trace_power


@dataclass(frozen=True, eq=False)
class VariationalProblem:
    psi: np.ndarray
    phi: np.ndarray
    par: AlphaZ

    def __post_init__(self):
        psi, phi = _check_pair(self.psi, self.phi)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "phi", phi)
        if math.isinf(self.par.z):
            raise ValueError("variational expressions need finite z")

    @property
    def dim(self) -> int:
        return self.psi.shape[0]

    @property
    def direction(self) -> str:
        return "minimize" if self.par.alpha < 1 else "maximize"

    @property
    def p(self) -> float:
        return self.par.z / self.par.alpha

    @property
    def r(self) -> float:
        if self.par.alpha > 1:
            raise AttributeError("r is only defined for alpha < 1")
        return self.par.z / (1 - self.par.alpha)

    @property
    def q(self) -> float:
        if self.par.alpha < 1:
            raise AttributeError("q is only defined for alpha > 1")
        return self.par.z / (self.par.alpha - 1)

    def q_value(self) -> float:
        return q_alpha_z(self.psi, self.phi, self.par)


def _require(prob: VariationalProblem, direction: str):
    if prob.direction != direction:
        raise ValueError(f"this operation needs a {direction} problem (alpha = {prob.par.alpha})")


def _lower_from_spectrum(prob: VariationalProblem, w: np.ndarray, v: np.ndarray,
                         psi_pow: np.ndarray, phi_pow: np.ndarray) -> float:
    # a = v diag(w) v*, w > 0
    a_half = _from_spectrum(np.sqrt(w), v)
    a_mhalf = _from_spectrum(1 / np.sqrt(w), v)
    alpha = prob.par.alpha
    t1 = trace_power(a_half @ psi_pow @ a_half, prob.p)
    t2 = trace_power(a_mhalf @ phi_pow @ a_mhalf, prob.r)
    return alpha * t1 + (1 - alpha) * t2


def objective_lower(prob: VariationalProblem, a) -> float:
    """The function minimized for alpha < 1, at a positive definite ``a``."""
    _require(prob, "minimize")
    a = positive(a)
    w, v = np.linalg.eigh(a)
    if w[0] <= a.shape[0] * max(w[-1], 0) * 1e-12:
        raise ValueError("a must be positive definite")
    alpha, z = prob.par.alpha, prob.par.z
    return _lower_from_spectrum(prob, w, v, _power(prob.psi, alpha / z),
                                _power(prob.phi, (1 - alpha) / z))


def _factor(prob: VariationalProblem) -> np.ndarray:
    y = sandwich_factor(prob.psi, prob.phi, prob.par)
    if y is None:
        raise ValueError("Q is infinite (support of psi not contained in support of phi)")
    return y


def objective_upper(prob: VariationalProblem, w, y: np.ndarray | None = None) -> float:
    """The function maximized for alpha > 1, at a PSD ``w``."""
    _require(prob, "maximize")
    w = positive(w)
    if y is None:
        y = _factor(prob)
    alpha = prob.par.alpha
    return alpha * _sandwich_trace(y, w, prob.p) - (alpha - 1) * trace_power(w, prob.q)


def _sandwich_trace(y: np.ndarray, w: np.ndarray, p: float) -> float:
    # Tr(y w y*)^p from the singular values of y w^1/2, which keeps half the
    # dynamic range that eigenvalues of y w y* would need
    s = singular_values(y @ _power(w, 0.5))
    s = s[s > psd_tolerance(s)]
    return float(np.sum(s ** (2 * p)))


def closed_minimizer(prob: VariationalProblem) -> np.ndarray:
    """The unique minimizer for alpha < 1, z >= max(alpha, 1 - alpha), full-rank inputs."""
    _require(prob, "minimize")
    alpha, z = prob.par.alpha, prob.par.z
    if z < max(alpha, 1 - alpha):
        raise ValueError("the closed-form minimizer needs z >= max(alpha, 1 - alpha)")
    for name, h in (("psi", prob.psi), ("phi", prob.phi)):
        if not _eigh_psd(h)[2].all():
            raise ValueError(f"{name} must be full rank")
    b = _power(prob.psi, alpha / (2 * z))
    b_inv = _power(prob.psi, -alpha / (2 * z))
    middle = _power(b @ _power(prob.phi, (1 - alpha) / z) @ b, alpha)
    a = b_inv @ middle @ b_inv
    return (a + a.conj().T) / 2


def minimizer_residuals(prob: VariationalProblem, a: np.ndarray) -> tuple[float, float]:
    """Spectral-norm residuals of the two optimality equations for ``a``.

    First: psi^c a psi^c = (psi^c phi^(2d) psi^c)^alpha with c = alpha/2z, d = (1-alpha)/2z.
    Second: phi^d a^-1 phi^d = (phi^d psi^(2c) phi^d)^(1 - alpha).
    """
    alpha, z = prob.par.alpha, prob.par.z
    c = _power(prob.psi, alpha / (2 * z))
    d = _power(prob.phi, (1 - alpha) / (2 * z))
    lhs1 = c @ a @ c
    rhs1 = _power(c @ _power(prob.phi, (1 - alpha) / z) @ c, alpha)
    lhs2 = d @ np.linalg.inv(a) @ d
    rhs2 = _power(d @ _power(prob.psi, alpha / z) @ d, 1 - alpha)
    return (float(np.linalg.norm(lhs1 - rhs1, 2)), float(np.linalg.norm(lhs2 - rhs2, 2)))


def closed_maximizer(prob: VariationalProblem) -> np.ndarray:
    """The maximizer ``(y* y)^(alpha - 1)`` for alpha > 1 and finite Q."""
    _require(prob, "maximize")
    y = _factor(prob)
    # from the SVD of y so the spectrum of y* y is never squared
    _, s, vh = np.linalg.svd(y)
    on = s > psd_tolerance(s)
    return _from_spectrum(s[on] ** (2 * (prob.par.alpha - 1)), vh[on].conj().T)


@dataclass(frozen=True)
class OptimizerConfig:
    tol: float = 1e-6
    max_iter: int = 200
    seed: int = 0
    start: str = "identity"
    fd_step: float = 1e-5
    gtol: float = 1e-9
    armijo: float = 1e-4
    shrink: float = 0.5


@dataclass(frozen=True, eq=False)
class OptimizeResult:
    optimizer: np.ndarray
    value: float
    iterations: int
    converged: bool


def _hermitian_basis(d: int) -> list[np.ndarray]:
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        basis.append(e)
    s = 1 / math.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = s
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = -1j * s
            e[j, i] = 1j * s
            basis.append(e)
    return basis


def numeric_optimize(prob: VariationalProblem, cfg: OptimizerConfig = OptimizerConfig()) -> OptimizeResult:
    """Optimize the variational objective over ``exp(H)`` by quasi-Newton descent.

    Gradients are central finite differences on the coordinates of ``H`` in an
    orthonormal hermitian basis; steps are BFGS directions with Armijo
    backtracking. ``cfg.start`` is ``"identity"`` (H = 0) or ``"random"``
    (seeded by ``cfg.seed``). Hitting ``cfg.max_iter`` returns the best point
    with ``converged=False``.
    """
    d = prob.dim
    basis = _hermitian_basis(d)
    stack = np.array(basis)
    alpha, z = prob.par.alpha, prob.par.z
    sign = 1.0 if prob.direction == "minimize" else -1.0

    if prob.direction == "minimize":
        psi_pow = _power(prob.psi, alpha / z)
        phi_pow = _power(prob.phi, (1 - alpha) / z)

        def value(x):
            w, v = np.linalg.eigh(np.tensordot(x, stack, axes=1))
            return _lower_from_spectrum(prob, np.exp(w), v, psi_pow, phi_pow)
    else:
        y = _factor(prob)
        p, q = prob.p, prob.q

        def value(x):
            hw, v = np.linalg.eigh(np.tensordot(x, stack, axes=1))
            s = singular_values(y @ _from_spectrum(np.exp(hw / 2), v))
            return alpha * float(np.sum(s ** (2 * p))) - (alpha - 1) * float(np.sum(np.exp(q * hw)))

    def f(x):
        return sign * value(x)

    def grad(x):
        g = np.empty_like(x)
        h = cfg.fd_step
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            g[i] = (f(x + e) - f(x - e)) / (2 * h)
        return g

    if cfg.start == "identity":
        x = np.zeros(d * d)
    elif cfg.start == "random":
        x = np.random.default_rng(cfg.seed).normal(scale=0.5, size=d * d)
    else:
        raise ValueError(f"unknown start {cfg.start!r}")

    fx = f(x)
    g = grad(x)
    inv_h = np.eye(x.size)
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        if np.max(np.abs(g)) <= cfg.gtol * max(1.0, abs(fx)):
            converged = True
            break
        step = -inv_h @ g
        slope = float(g @ step)
        if slope >= 0:
            inv_h = np.eye(x.size)
            step = -g
            slope = float(g @ step)
        t = 1.0
        while True:
            x_new = x + t * step
            f_new = f(x_new)
            if f_new <= fx + cfg.armijo * t * slope:
                break
            t *= cfg.shrink
            if t < 1e-12:
                break
        if t < 1e-12:
            # no descent left at finite-difference resolution
            converged = True
            break
        g_new = grad(x_new)
        s = x_new - x
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-16:
            rho = 1.0 / sy
            eye = np.eye(x.size)
            inv_h = (eye - rho * np.outer(s, yv)) @ inv_h @ (eye - rho * np.outer(yv, s)) + rho * np.outer(s, s)
        decrease = fx - f_new
        x, fx, g = x_new, f_new, g_new
        if decrease <= cfg.tol * 1e-6 * max(1.0, abs(fx)) and np.max(np.abs(g)) <= 1e-6 * max(1.0, abs(fx)):
            converged = True
            break
    else:
        converged = False

    hw, v = np.linalg.eigh(np.tensordot(x, stack, axes=1))
    opt = _from_spectrum(np.exp(hw), v)
    return OptimizeResult(optimizer=opt, value=sign * fx, iterations=it, converged=converged)
