"""Problem data and solver settings for the full convection problem."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .eigen import EigenOptions
from .fields import ExponentField, GridFunction
from .mesh import Mesh
from .operators import EnergySpec
from .reaction import ReactionModel

HOMOTOPY_GRID = tuple(round(0.1 * k, 10) for k in range(1, 10))


@dataclass(frozen=True)
class SolverOptions:
    eps_reg: float = 1e-10
    tol_eigen: float = 1e-10
    tol_inner: float = 1e-9
    tol_middle: float = 1e-8
    tol_outer: float = 1e-6
    max_eigen: int = 50_000
    max_inner: int = 10_000
    max_middle: int = 500
    max_outer: int = 100
    damping: float = 1.0
    homotopy_grid: tuple = HOMOTOPY_GRID
    c1_bound: float = 1e3


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "out"
    formats: tuple = ("csv",)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Everything needed to pose -Delta_p u - Delta_q u = r_hat |Du|^(tau-1) + f(z, u)."""

    mesh: Mesh
    p: ExponentField
    q: ExponentField
    tau: ExponentField
    mu: ExponentField
    r_hat: GridFunction
    c0: float = 1.0
    delta: float = 1.0
    theta: Optional[GridFunction] = None
    theta_fraction: Optional[float] = 0.5
    C8: Optional[float] = None
    r_aux: Optional[float] = None
    eta_hat: Optional[tuple] = None
    reaction_kind: str = "capped-concave"
    table_x: Optional[tuple] = None
    table_f: Optional[tuple] = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    output: OutputOptions = field(default_factory=OutputOptions)
    config: Optional[dict] = None

    def replace(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)

    def energy_spec(self) -> EnergySpec:
        return EnergySpec(self.p, self.q, self.solver.eps_reg)

    def eigen_options(self) -> EigenOptions:
        return EigenOptions(tol=self.solver.tol_eigen, max_iters=self.solver.max_eigen, eps_reg=self.solver.eps_reg)

    def theta_field(self, lambda1: float) -> GridFunction:
        if self.theta is not None:
            return self.theta
        return GridFunction(self.mesh, np.full(self.mesh.n_nodes, self.theta_fraction * lambda1))

    def reaction_model(self, lambda1: Optional[float] = None) -> ReactionModel:
        theta = self.theta_field(lambda1) if lambda1 is not None else self.theta
        return ReactionModel(
            mu=self.mu,
            c0=self.c0,
            delta=self.delta,
            theta=theta,
            kind=self.reaction_kind,
            table_x=None if self.table_x is None else np.asarray(self.table_x, float),
            table_f=None if self.table_f is None else np.asarray(self.table_f, float),
        )

    @property
    def convection_free(self) -> bool:
        return not np.any(self.r_hat.values != 0.0)
