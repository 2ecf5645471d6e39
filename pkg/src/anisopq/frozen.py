"""Frozen-gradient problem, auxiliary lower bound and the minimal solution map.

All three problems are minimisations of E(u) - sum_e |T_e| R_e(u_e) with
E the (p,q) energy, u_e the barycenter value and R_e a per-element
primitive.  ``_Functional`` packages value, gradient and Hessian for the
descent driver; the Hessian of the reaction part is a barycenter mass
matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .descent import minimize
from .eigen import EigenResult, principal_eigenpair
from .errors import InvalidField, NoConvergence, OrderingViolation, TrivialSolution
from .fields import (ExponentField, GridFunction, PositivityReport, discrete_c1_norm,
                     positivity_report)
from .operators import (EnergySpec, apply_V, assemble_free, bary_mass_blocks, dual_norm,
                        energy_grad_values, energy_values, hessian_blocks, load_vector)
from .reaction import FrozenReaction

SEED_SCALES = tuple(2.0 ** -k for k in range(1, 21))
ORDER_TOL = 1e-10
POLISH = 5


class _Functional:
    """u -> E(u) - sum |T_e| R(u_e), restricted to the free nodes.

    ``react(ub)`` returns (R, R', R'') per element at barycenter values ``ub``.
    """

    def __init__(self, spec: EnergySpec, react: Callable):
        self.spec, self.react = spec, react
        self.mesh = spec.mesh
        self.free = self.mesh.free_nodes

    def full(self, x):
        v = np.zeros(self.mesh.n_nodes)
        v[self.free] = x
        return v

    def value(self, x):
        v = self.full(x)
        R, _, _ = self.react(v[self.mesh.elements].mean(axis=1))
        return energy_values(v, self.spec) - float(np.sum(self.mesh.measures * R))

    def __call__(self, x):
        v = self.full(x)
        E, g = energy_grad_values(v, self.spec)
        R, dR, _ = self.react(v[self.mesh.elements].mean(axis=1))
        g = g - load_vector(dR, self.mesh)
        return E - float(np.sum(self.mesh.measures * R)), g[self.free]

    def hess(self, x):
        v = self.full(x)
        HE = hessian_blocks(v, self.spec)
        _, _, ddR = self.react(v[self.mesh.elements].mean(axis=1))
        H = assemble_free(HE - bary_mass_blocks(ddR, self.mesh), self.mesh)
        # keep only the convex part of the reaction curvature for the fallback
        safe = assemble_free(HE - bary_mass_blocks(np.minimum(ddR, 0.0), self.mesh), self.mesh)
        return H, safe

    def minimize(self, x0, tol, max_iter, nonneg, callback, stage):
        return minimize(self, x0, hess=self.hess, tol=tol, max_iter=max_iter, nonneg=nonneg,
                        callback=callback, stage=stage, polish=POLISH)


def _frozen_react(fr: FrozenReaction):
    mu = fr.model.mu.bary

    def react(ub):
        pos = ub > 0
        return fr.G(ub), np.where(pos, fr.g(ub), 0.0), np.where(pos, fr.model.df(ub, mu), 0.0)

    return react


def _residual(u: GridFunction, espec: EnergySpec, per_element) -> float:
    """dual_norm(V(u) - N_g(u)) with g sampled per element."""
    return dual_norm(apply_V(u, espec) - load_vector(per_element, u.mesh)[u.mesh.free_nodes])


def _eigen(spec, eig):
    return eig if eig is not None else principal_eigenpair(spec.mesh, spec.p, spec.eigen_options())


# -- frozen problem --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrozenSolveResult:
    u0: GridFunction
    energy_history: list
    residual: float
    positivity: PositivityReport
    seed_scale: float = 0.0
    iterations: int = 0


def psi_v(u: GridFunction, fr: FrozenReaction, spec: EnergySpec) -> float:
    """Psi_v(u) = E(u) - sum_e |T_e| G_v(u_e^+)."""
    return _Functional(spec, _frozen_react(fr)).value(u.values[u.mesh.free_nodes])


def freeze(v: GridFunction, spec, lambda1: float) -> FrozenReaction:
    return FrozenReaction.freeze(v, spec.r_hat, spec.tau, spec.reaction_model(lambda1))


def solve_frozen(
    v: GridFunction,
    spec,
    eig: Optional[EigenResult] = None,
    callback: Optional[Callable] = None,
    seed: Optional[GridFunction] = None,
) -> FrozenSolveResult:
    """Minimise Psi_v over u >= 0, starting from the first t u1 with Psi_v < 0.

    ``seed`` replaces the eigenfunction as the direction that is scaled.
    """
    eig = _eigen(spec, eig)
    espec = spec.energy_spec()
    fr = freeze(v, spec, eig.lambda1)
    fun = _Functional(espec, _frozen_react(fr))
    base = (seed if seed is not None else eig.u1).values[fun.free]

    for t in SEED_SCALES:
        if fun.value(t * base) < 0.0:
            break
    else:
        raise TrivialSolution("Psi_v(t u1) >= 0 for every t in 2^-1..2^-20")

    res = fun.minimize(t * base, spec.solver.tol_inner, spec.solver.max_inner, True, callback, "frozen")
    u0 = GridFunction(spec.mesh, fun.full(res.x))
    if not np.any(u0.values > 0):
        raise TrivialSolution("frozen minimiser vanishes identically")
    residual = _residual(u0, espec, fr.g(u0.bary))
    return FrozenSolveResult(u0, res.energy_history, residual, positivity_report(u0), t, res.iterations)


# -- auxiliary problem -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AuxiliarySpec:
    """Data of the unilateral bound f >= c0 x^(mu-1) - C8 x^(r-1) and its problem."""

    c0: float
    C8: float
    r_aux: float
    mu: ExponentField
    p: ExponentField

    def __post_init__(self):
        if not self.C8 > 0:
            raise InvalidField(f"C8 must be positive, got {self.C8}")
        if not self.p.r_plus < self.r_aux < self.p.critical_minus():
            raise InvalidField(
                f"r_aux = {self.r_aux} must lie in (p_+, p_-^*) = ({self.p.r_plus}, {self.p.critical_minus()})"
            )

    @classmethod
    def from_problem(cls, spec) -> "AuxiliarySpec":
        return cls(spec.c0, aux_C8(spec), aux_r(spec), spec.mu, spec.p)

    def cap(self) -> np.ndarray:
        """Nodal level (c0/C8)^(1/(r-mu)) above which the right-hand side is negative."""
        return (self.c0 / self.C8) ** (1.0 / (self.r_aux - self.mu.values))

    def check_bound(self, model, n_x: int = 200) -> float:
        """Smallest value of f - (c0 x^(mu-1) - C8 x^(r-1)) over x in [0, 10 delta], all nodes."""
        xs = np.linspace(0.0, 10.0 * model.delta, n_x)[None, :]
        mu = self.mu.values[:, None]
        low = self.c0 * xs ** (mu - 1.0) - self.C8 * xs ** (self.r_aux - 1.0)
        return float((model.f(xs, mu) - np.where(xs > 0, low, 0.0)).min())


def aux_r(spec) -> float:
    if spec.r_aux is not None:
        return float(spec.r_aux)
    p_plus, crit = spec.p.r_plus, spec.p.critical_minus()
    r = min(p_plus + 0.5, crit - 0.1)
    return r if r > p_plus else 0.5 * (p_plus + crit)


def aux_C8(spec) -> float:
    if spec.C8 is not None:
        return float(spec.C8)
    return spec.c0 * max(1.0, spec.delta ** (spec.mu.r_plus - aux_r(spec)))


def _aux_react(aux: AuxiliarySpec):
    mu = aux.mu.bary
    c0, C8, r = aux.c0, aux.C8, aux.r_aux

    def react(ub):
        xp = np.maximum(ub, 0.0)
        pos = ub > 0
        xs = np.where(pos, xp, 1.0)
        R = c0 / mu * xp ** mu - C8 / r * xp ** r
        dR = np.where(pos, c0 * xs ** (mu - 1.0) - C8 * xs ** (r - 1.0), 0.0)
        ddR = np.where(pos, c0 * (mu - 1.0) * xs ** (mu - 2.0) - C8 * (r - 1.0) * xs ** (r - 2.0), 0.0)
        return R, dR, ddR

    return react


@dataclass(frozen=True, eq=False)
class AuxiliaryResult:
    u: GridFunction
    energy_history: list
    residual: float
    positivity: PositivityReport
    aux: AuxiliarySpec
    iterations: int = 0


def solve_auxiliary_report(
    spec, eig: Optional[EigenResult] = None, seed="eigen", callback: Optional[Callable] = None
) -> AuxiliaryResult:
    """Minimise the auxiliary functional from a scaled eigenfunction or the cap level.

    ``seed`` is "eigen" (first t u1 with negative energy) or "cap" (the
    interior set to the constant super-solution level).
    """
    aux = AuxiliarySpec.from_problem(spec)
    espec = spec.energy_spec()
    fun = _Functional(espec, _aux_react(aux))
    if isinstance(seed, str) and seed == "cap":
        x0 = aux.cap()[fun.free]
    elif isinstance(seed, str) and seed == "eigen":
        base = _eigen(spec, eig).u1.values[fun.free]
        for t in SEED_SCALES:
            if fun.value(t * base) < 0.0:
                break
        else:
            raise TrivialSolution("auxiliary energy is nonnegative along t u1 for t in 2^-1..2^-20")
        x0 = t * base
    else:
        x0 = np.asarray(seed.values if isinstance(seed, GridFunction) else seed, float)[fun.free]

    res = fun.minimize(x0, spec.solver.tol_inner, spec.solver.max_inner, True, callback, "aux")
    u = GridFunction(spec.mesh, fun.full(res.x))
    if not np.any(u.values > 0):
        raise TrivialSolution("auxiliary minimiser vanishes identically")
    _, dR, _ = _aux_react(aux)(u.bary)
    return AuxiliaryResult(u, res.energy_history, _residual(u, espec, dR), positivity_report(u), aux, res.iterations)


def solve_auxiliary(spec, eig: Optional[EigenResult] = None, seed="eigen",
                    callback: Optional[Callable] = None) -> GridFunction:
    """The positive solution u_bar of the auxiliary problem."""
    return solve_auxiliary_report(spec, eig, seed, callback).u


def truncation_k(u_cap: GridFunction, aux: AuxiliarySpec, z, x):
    """c0 (x+)^(mu-1) - C8 (x+)^(r-1) for x <= u_cap(z), frozen at x = u_cap(z) above."""
    mu = aux.mu.values[z]
    cap = u_cap.values[z]
    xc = np.maximum(np.minimum(np.asarray(x, float), cap), 0.0)
    xs = np.where(xc > 0, xc, 1.0)
    val = aux.c0 * xs ** (mu - 1.0) - aux.C8 * xs ** (aux.r_aux - 1.0)
    return np.where(xc > 0, val, 0.0)


# -- minimal solution ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MinimalSolutionResult:
    u: GridFunction
    iterations: int
    increments: list
    residual: float
    inner_residual: float
    monotone_gap: float
    positivity: PositivityReport
    history: list = field(default_factory=list)


def minimal_solution_report(
    v: GridFunction,
    spec,
    ubar: GridFunction,
    lambda1: float,
    callback: Optional[Callable] = None,
) -> MinimalSolutionResult:
    """Monotone iteration V(w^k) = N_{g_v}(w^{k-1}) from w^0 = u_bar.

    Each step minimises the convex functional E(w) - sum |T_e| b_e w_e with
    b = g_v(w^{k-1}) frozen.  ``monotone_gap`` is the most negative
    w^k - w^{k-1} seen (zero or above for a monotone sequence).
    """
    espec = spec.energy_spec()
    fr = freeze(v, spec, lambda1)
    opts = spec.solver
    w = ubar
    increments, hist = [], []
    gap = np.inf
    inner_res = 0.0
    for k in range(1, opts.max_middle + 1):
        b = fr.g(w.bary)
        fun = _Functional(espec, lambda ub, b=b: (b * ub, b, np.zeros_like(ub)))
        res = fun.minimize(w.values[fun.free], opts.tol_inner, opts.max_inner, False, None, "inner")
        inner_res = res.residual
        w_new = GridFunction(spec.mesh, fun.full(res.x))
        low = float((w_new.values - ubar.values).min())
        if low < -ORDER_TOL:
            raise OrderingViolation(f"u_bar <= w^{k} fails by {-low:.3e}")
        gap = min(gap, float((w_new.values - w.values).min()))
        inc = discrete_c1_norm(w_new - w)
        increments.append(inc)
        rec = {"stage": "middle", "iter": k, "residual": inc, "step": 1.0, "energy": res.value}
        hist.append(rec)
        if callback is not None:
            callback(rec)
        w = w_new
        if inc <= opts.tol_middle:
            break
    else:
        raise NoConvergence(f"middle: increment {increments[-1]:.3e} > {opts.tol_middle:.1e}", increments)

    residual = _residual(w, espec, fr.g(w.bary))
    return MinimalSolutionResult(w, k, increments, residual, inner_res, gap, positivity_report(w), hist)


def minimal_solution(v: GridFunction, spec, ubar: GridFunction, lambda1: float,
                     callback: Optional[Callable] = None) -> GridFunction:
    """beta(v): the least solution of the frozen problem above u_bar."""
    return minimal_solution_report(v, spec, ubar, lambda1, callback).u
