"""Outer fixed-point loop on the minimal solution map and the homotopy scan."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .eigen import EigenResult, principal_eigenpair
from .errors import AnisoPQError, NoConvergence
from .fields import GridFunction, PositivityReport, discrete_c1_norm, positivity_report
from .frozen import minimal_solution_report, solve_auxiliary_report
from .operators import apply_V, dual_norm, load_vector

OMEGA_FLOOR = 1.0 / 16.0
ORDER_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class OuterReport:
    iterates: list
    final_u: GridFunction
    full_residual: float
    positivity: PositivityReport
    ubar: GridFunction
    residuals: dict
    ordering_ok: bool
    omega: float
    homotopy_table: list = field(default_factory=list)

    @property
    def outer_iterations(self) -> int:
        return len(self.iterates)


def full_residual(u: GridFunction, spec, lambda1: float) -> float:
    """dual_norm(V(u) - N(u)) with the convection term evaluated at u's own gradient."""
    model = spec.reaction_model(lambda1)
    drive = spec.r_hat.bary * u.grad_norms ** (spec.tau.bary - 1.0)
    rhs = drive + model.f(u.bary, model.mu.bary)
    return dual_norm(apply_V(u, spec.energy_spec()) - load_vector(rhs, u.mesh)[u.mesh.free_nodes])


def _picard(spec, lambda1, ubar, t, callback, stage):
    """Damped Picard on u -> t beta(u) from u_bar; returns (u, increments, omega, last middle report)."""
    opts = spec.solver
    omega = opts.damping
    v = ubar
    increments, ordering_ok, ups = [], True, 0
    for n in range(1, opts.max_outer + 1):
        mid = minimal_solution_report(v, spec, ubar, lambda1)
        b = mid.u * t
        v_new = v * (1.0 - omega) + b * omega
        ordering_ok &= bool(np.all(ubar.values <= mid.u.values + ORDER_SLACK))
        inc = discrete_c1_norm(v_new - v)
        if increments and inc > increments[-1]:
            ups += 1
            if ups >= 2:
                omega, ups = max(0.5 * omega, OMEGA_FLOOR), 0
        else:
            ups = 0
        increments.append(inc)
        if callback is not None:
            callback({"stage": stage, "iter": n, "residual": inc, "step": omega, "energy": None})
        v = v_new
        if inc <= opts.tol_outer:
            # return beta(v_n) itself when undamped so the frozen identity is exact
            return (b if omega == 1.0 else v), increments, omega, mid, ordering_ok
    raise NoConvergence(f"{stage}: increment {increments[-1]:.3e} > {opts.tol_outer:.1e}", increments)


def run_fixed_point(
    spec,
    eig: Optional[EigenResult] = None,
    ubar: Optional[GridFunction] = None,
    callback: Optional[Callable] = None,
) -> OuterReport:
    """v_{n+1} = (1 - omega) v_n + omega beta(v_n) from v_0 = u_bar until the C^1 increment is small."""
    if eig is None:
        eig = principal_eigenpair(spec.mesh, spec.p, spec.eigen_options(), callback)
    aux_res = None
    if ubar is None:
        aux_res = solve_auxiliary_report(spec, eig, callback=callback)
        ubar = aux_res.u
    u, increments, omega, mid, ordering_ok = _picard(spec, eig.lambda1, ubar, 1.0, callback, "outer")
    ordering_ok &= bool(np.all(ubar.values <= u.values + ORDER_SLACK))
    full = full_residual(u, spec, eig.lambda1)
    residuals = {
        "inner": mid.inner_residual,
        "middle": mid.residual,
        "outer": increments[-1],
        "full": full,
    }
    if aux_res is not None:
        residuals["aux"] = aux_res.residual
    return OuterReport(increments, u, full, positivity_report(u), ubar, residuals, ordering_ok, omega)


def _scan_one(spec, lambda1, ubar, t):
    try:
        u, increments, _, _, _ = _picard(spec, lambda1, ubar, t, None, "homotopy")
        return {"t": t, "converged": True, "c1_norm": discrete_c1_norm(u), "iterations": len(increments)}
    except NoConvergence as exc:
        return {"t": t, "converged": False, "c1_norm": None, "iterations": len(exc.history), "error": str(exc)}
    except AnisoPQError as exc:
        return {"t": t, "converged": False, "c1_norm": None, "iterations": 0, "error": str(exc)}


def homotopy_scan(
    spec,
    t_grid: Optional[Sequence[float]] = None,
    eig: Optional[EigenResult] = None,
    ubar: Optional[GridFunction] = None,
    threads: int = 1,
) -> list:
    """Solve u = t beta(u) for each t; failures are recorded in the table, not raised."""
    t_grid = spec.solver.homotopy_grid if t_grid is None else t_grid
    if eig is None:
        eig = principal_eigenpair(spec.mesh, spec.p, spec.eigen_options())
    if ubar is None:
        ubar = solve_auxiliary_report(spec, eig).u
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda t: _scan_one(spec, eig.lambda1, ubar, float(t)), t_grid))
    else:
        rows = [_scan_one(spec, eig.lambda1, ubar, float(t)) for t in t_grid]
    bound = spec.solver.c1_bound
    for row in rows:
        row["bounded"] = row["converged"] and row["c1_norm"] <= bound
    return rows
