"""Descent on free-node vectors with Armijo backtracking.

The search direction is the gradient preconditioned by a sparse SPD model
of the Hessian (the exact Hessian when it yields a descent direction, a
caller-supplied safe matrix otherwise, the raw gradient as last resort).
With ``nonneg=True`` iterates are projected onto x >= 0 and the Armijo
test runs along the projection arc.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import LineSearchFailure, NoConvergence

ARMIJO = 1e-4
MAX_BACKTRACKS = 60
_ROUNDOFF = 64 * np.finfo(float).eps


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    residual: float
    iterations: int
    energy_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    step_history: list = field(default_factory=list)


def projected_residual(x, g, nonneg):
    if nonneg:
        g = np.where((x <= 0.0) & (g > 0.0), 0.0, g)
    return float(np.abs(g).max()) if g.size else 0.0


def _solve(H, rhs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            d = spla.spsolve(sp.csc_matrix(H), rhs)
        except Exception:  # singular factorisation
            return None
    d = np.atleast_1d(d)
    return d if np.all(np.isfinite(d)) else None


def _direction(g, free, hess_pair):
    H, H_safe = hess_pair
    gF = g[free]
    for M in (H, H_safe):
        if M is None:
            continue
        MF = M if free.all() else M[free][:, free]
        dF = _solve(MF, -gF)
        if dF is not None and np.dot(gF, dF) < 0:
            d = np.zeros_like(g)
            d[free] = dF
            return d
    d = np.zeros_like(g)
    d[free] = -gF
    return d


def minimize(
    fun: Callable,
    x0: np.ndarray,
    *,
    hess: Callable,
    tol: float,
    max_iter: int,
    nonneg: bool = False,
    callback: Optional[Callable] = None,
    stage: str = "descent",
    polish: int = 0,
) -> DescentResult:
    """Minimise ``fun`` (returning value and gradient) from ``x0``.

    Stops when the (projected) gradient max-norm drops to ``tol``.  The
    energy history records Armijo-accepted steps only, so it is strictly
    decreasing; full Newton steps whose decrease is below roundoff are
    accepted when they reduce the residual and appear in the residual
    history alone.  ``polish`` extra iterations are spent past ``tol`` while
    each one still cuts the residual at least in half.
    """
    x = np.array(x0, dtype=float)
    if nonneg:
        x = np.maximum(x, 0.0)
    f, g = fun(x)
    res = projected_residual(x, g, nonneg)
    out = DescentResult(x, f, res, 0, [f], [res], [])

    extra = 0
    for it in range(1, max_iter + 1):
        if res <= tol:
            if extra >= polish or (extra and out.residual_history[-1] > 0.5 * out.residual_history[-2]):
                break
            extra += 1
        free = ~((x <= 0.0) & (g > 0.0)) if nonneg else np.ones_like(x, dtype=bool)
        d = _direction(g, free, hess(x))
        accepted = False
        for attempt in range(2):
            alpha = 1.0
            for _ in range(MAX_BACKTRACKS):
                xt = x + alpha * d
                if nonneg:
                    xt = np.maximum(xt, 0.0)
                ft, gt = fun(xt)
                slope = float(np.dot(g, xt - x))
                if np.isfinite(ft) and ft <= f + ARMIJO * slope and ft < f:
                    accepted = True
                    out.energy_history.append(ft)
                    break
                if alpha == 1.0 and np.isfinite(ft) and abs(ft - f) <= _ROUNDOFF * (1.0 + abs(f)):
                    rt = projected_residual(xt, gt, nonneg)
                    if rt < res:
                        accepted = True
                        break
                alpha *= 0.5
            if accepted:
                break
            # preconditioned direction stalled: retry along the raw gradient once
            d = np.where(free, -g, 0.0)
        if not accepted:
            if res <= tol:
                break
            raise LineSearchFailure(
                f"{stage}: no decrease after {MAX_BACKTRACKS} backtracks (residual {res:.3e})"
            )
        x, f, g = xt, ft, gt
        res = projected_residual(x, g, nonneg)
        out.residual_history.append(res)
        out.step_history.append(alpha)
        out.iterations = it
        if callback is not None:
            callback({"stage": stage, "iter": it, "energy": f, "residual": res, "step": alpha})
    else:
        if res > tol:
            raise NoConvergence(
                f"{stage}: residual {res:.3e} > {tol:.1e} after {max_iter} iterations",
                out.residual_history,
            )

    out.x, out.value, out.residual = x, f, res
    return out
