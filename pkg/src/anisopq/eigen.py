"""Principal eigenpair of -Delta_p and its weighted variant.

The eigenvalue is computed as

    lambda = min { rho_p(Du) : u zero-trace, integral(w |u|^p) = 1 }

(w = 1 for the plain problem).  The minimiser is found by projected
gradient descent on that constraint set: gradients are taken in the
discrete H^1_0 metric (preconditioned by the P1 Laplacian), step sizes
follow Barzilai-Borwein with Armijo backtracking, iterates are clipped to
u >= 0 and renormalised after every step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse.linalg as spla
from scipy.optimize import brentq

from . import kernels
from .errors import InvalidEigenvalue, InvalidWeight, NoConvergence
from .fields import ExponentField, GridFunction
from .mesh import Mesh
from .modular import rho, rho_grad
from .operators import DEFAULT_EPS, load_vector, stiffness_free

THETA_GAP = 1e-6


@dataclass(frozen=True)
class EigenOptions:
    tol: float = 1e-10
    max_iters: int = 50_000
    eps_reg: float = DEFAULT_EPS
    stall_count: int = 3


@dataclass(frozen=True, eq=False)
class EigenResult:
    lambda1: float
    u1: GridFunction
    weighted_lambda1: Optional[float] = None
    C1: Optional[float] = None
    iterations: int = 0
    history: list = field(default_factory=list)


def quotient(u: GridFunction, p: ExponentField) -> float:
    return rho_grad(u, p) / rho(u, p)


def bubble(mesh: Mesh) -> GridFunction:
    """prod_i sin(pi x_i / L_i): positive in the interior, zero on the boundary."""
    vals = np.ones(mesh.n_nodes)
    for d, L in enumerate(mesh.lengths):
        vals *= np.sin(np.pi * mesh.nodes[:, d] / L)
    return GridFunction(mesh, vals).zero_trace()


class _Problem:
    """psi(u) = rho_p(Du) and phi(u) = integral(w |u|^p) on free-node vectors."""

    def __init__(self, mesh, p, weight, eps):
        self.mesh, self.eps = mesh, eps
        self.pe = np.ascontiguousarray(p.bary)
        self.w = mesh.measures * weight
        self.wmeas_grad = np.ascontiguousarray(mesh.measures * self.pe)
        self.free = mesh.free_nodes
        self.const_p = p.is_constant

    def full(self, x):
        v = np.zeros(self.mesh.n_nodes)
        v[self.free] = x
        return v

    def psi(self, x, grad=False):
        e, g = kernels.power_energy_grad(self.full(x), self.mesh.elements, self.mesh.dphi,
                                         self.wmeas_grad, self.pe, self.eps)
        return (e, g[self.free]) if grad else e

    def phi(self, x, grad=False):
        ub = self.full(x)[self.mesh.elements].mean(axis=1)
        a = np.abs(ub)
        val = float(np.sum(self.w * a ** self.pe))
        if not grad:
            return val
        per = self.w * self.pe * a ** (self.pe - 1.0) * np.sign(ub) / self.mesh.measures
        return val, load_vector(per, self.mesh)[self.free]

    def normalize(self, x):
        val = self.phi(x)
        if val <= 0:
            raise NoConvergence("iterate collapsed to zero")
        if self.const_p:
            return x * val ** (-1.0 / self.pe[0])
        h = lambda t: np.log(self.phi(np.exp(t) * x))  # noqa: E731, strictly increasing in t
        t0 = -np.log(val) / self.pe.mean()
        lo, hi = t0 - 1.0, t0 + 1.0
        while h(lo) > 0:
            lo -= 2.0
        while h(hi) < 0:
            hi += 2.0
        return np.exp(brentq(h, lo, hi, xtol=1e-15, rtol=1e-15)) * x


def _minimize_on_sphere(mesh, p, weight, opts, callback, stage):
    prob = _Problem(mesh, p, weight, opts.eps_reg)
    lu = spla.splu(stiffness_free(mesh).tocsc())
    K = stiffness_free(mesh)

    x = prob.normalize(bubble(mesh).values[prob.free])

    def state(x):
        J, gpsi = prob.psi(x, grad=True)
        _, gphi = prob.phi(x, grad=True)
        G = gpsi - (gpsi @ x) / (gphi @ x) * gphi
        return J, G

    J, G = state(x)
    alpha0 = 1.0 / float(prob.pe.mean())
    alpha = alpha0
    history = [J]
    stall = 0
    x_prev = G_prev = None
    for it in range(1, opts.max_iters + 1):
        d = -lu.solve(G)
        if x_prev is not None:
            s, y = x - x_prev, G - G_prev
            sy = float(s @ y)
            if sy > 0:
                alpha = float(np.clip(s @ (K @ s) / sy, 1e-6 * alpha0, 1e3 * alpha0))
        slope = float(G @ d)
        step = alpha
        for _ in range(60):
            xt = prob.normalize(np.maximum(x + step * d, 0.0))
            Jt = prob.psi(xt)
            if Jt <= J + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            xt, Jt = x, J  # no admissible step: the iterate is stationary to roundoff
        rel = abs(J - Jt) / abs(J)
        x_prev, G_prev = x, G
        x = xt
        J, G = state(x)
        history.append(J)
        if callback is not None:
            callback({"stage": stage, "iter": it, "energy": J, "residual": rel, "step": step})
        stall = stall + 1 if rel <= opts.tol else 0
        if stall >= opts.stall_count:
            return prob.full(x), it, history
    raise NoConvergence(f"{stage}: relative quotient change stayed above {opts.tol}", history)


def principal_eigenpair(
    mesh: Mesh, p: ExponentField, opts: Optional[EigenOptions] = None, callback: Optional[Callable] = None
) -> EigenResult:
    """Principal eigenpair, u1 >= 0 normalised to rho_p(u1) = 1."""
    opts = opts or EigenOptions()
    vals, its, hist = _minimize_on_sphere(mesh, p, np.ones(mesh.n_elements), opts, callback, "eigen")
    u1 = GridFunction(mesh, vals)
    return EigenResult(quotient(u1, p), u1, iterations=its, history=hist)


def check_weight(theta: GridFunction, lambda1: float) -> None:
    """Admissibility of a weight: 0 <= theta <= lambda1, theta not 0, theta not lambda1."""
    t = theta.values
    if np.any(t < 0):
        raise InvalidWeight("theta must be nonnegative")
    if not np.any(theta.bary > 0):
        raise InvalidWeight("theta vanishes identically")
    if np.any(t > lambda1):
        raise InvalidWeight(f"theta exceeds lambda1 = {lambda1:.6g} (max theta {t.max():.6g})")
    if np.mean(lambda1 - t) < THETA_GAP * lambda1:
        raise InvalidWeight("theta is indistinguishable from lambda1 (mean gap below 1e-6 lambda1)")


def weighted_principal_eigenvalue(
    mesh: Mesh,
    p: ExponentField,
    theta: GridFunction,
    opts: Optional[EigenOptions] = None,
    lambda1: Optional[float] = None,
    callback: Optional[Callable] = None,
) -> float:
    """min rho_p(Du) over integral(theta |u|^p) = 1; exceeds 1 for admissible theta."""
    opts = opts or EigenOptions()
    if lambda1 is None:
        lambda1 = principal_eigenpair(mesh, p, opts).lambda1
    check_weight(theta, lambda1)
    vals, _, _ = _minimize_on_sphere(mesh, p, theta.bary, opts, callback, "eigen_weighted")
    u = GridFunction(mesh, vals)
    wq = float(np.sum(mesh.measures * theta.bary * np.abs(u.bary) ** p.bary))
    lam = rho_grad(u, p) / wq
    if lam <= 1.0:
        raise InvalidWeight(f"weighted eigenvalue {lam:.6g} is not above 1")
    return lam


def lemma4_constant(lambda_tilde: float) -> float:
    """(lambda - 1) / lambda, the coercivity constant of rho_p(Du) - integral(theta |u|^p)."""
    if not lambda_tilde > 1.0:
        raise InvalidEigenvalue(f"weighted eigenvalue must exceed 1, got {lambda_tilde}")
    return (lambda_tilde - 1.0) / lambda_tilde


def with_weight(result: EigenResult, mesh: Mesh, p: ExponentField, theta: GridFunction,
                opts: Optional[EigenOptions] = None) -> EigenResult:
    lam = weighted_principal_eigenvalue(mesh, p, theta, opts, lambda1=result.lambda1)
    return EigenResult(result.lambda1, result.u1, lam, lemma4_constant(lam), result.iterations, result.history)
