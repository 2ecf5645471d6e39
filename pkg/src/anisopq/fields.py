"""Nodal scalar fields: exponents, grid functions, discrete norms."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import InvalidField
from .mesh import Mesh, _frozen


def _nodal_from_kind(mesh: Mesh, kind: str, params: dict) -> np.ndarray:
    if kind == "constant":
        return np.full(mesh.n_nodes, float(params["value"]))
    if kind == "affine":
        a = float(params.get("a", 0.0))
        coeffs = [float(params.get(k, 0.0)) for k in ("b", "c")[: mesh.dim]]
        return a + mesh.nodes @ np.asarray(coeffs)
    if kind == "table":
        vals = np.asarray(params["values"], dtype=float)
        if vals.shape != (mesh.n_nodes,):
            raise InvalidField(f"table has {vals.size} values, mesh has {mesh.n_nodes} nodes")
        return vals.copy()
    raise InvalidField(f"unknown field kind {kind!r}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_nodes,):
            raise InvalidField(f"expected {self.mesh.n_nodes} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidField("grid function has non-finite values")
        object.__setattr__(self, "values", _frozen(v.copy()))

    @classmethod
    def zeros(cls, mesh: Mesh) -> "GridFunction":
        return cls(mesh, np.zeros(mesh.n_nodes))

    @classmethod
    def from_function(cls, mesh: Mesh, fn) -> "GridFunction":
        return cls(mesh, np.asarray(fn(*mesh.nodes.T), dtype=float))

    @classmethod
    def from_spec(cls, mesh: Mesh, kind: str, params: dict) -> "GridFunction":
        return cls(mesh, _nodal_from_kind(mesh, kind, params))

    def zero_trace(self) -> "GridFunction":
        v = self.values.copy()
        v[self.mesh.boundary_nodes] = 0.0
        return GridFunction(self.mesh, v)

    @property
    def is_zero_trace(self) -> bool:
        return bool(np.all(self.values[self.mesh.boundary_nodes] == 0.0))

    @cached_property
    def bary(self) -> np.ndarray:
        """Value of the P1 interpolant at each element barycenter."""
        return _frozen(self.values[self.mesh.elements].mean(axis=1))

    @cached_property
    def gradients(self) -> np.ndarray:
        """Constant P1 gradient per element, shape (n_elements, dim)."""
        g = np.einsum("ek,ekd->ed", self.values[self.mesh.elements], self.mesh.dphi)
        return _frozen(g)

    def gradient_on(self, element: int) -> np.ndarray:
        return self.gradients[element]

    @cached_property
    def grad_norms(self) -> np.ndarray:
        return _frozen(np.sqrt((self.gradients ** 2).sum(axis=1)))

    def __add__(self, other):
        return GridFunction(self.mesh, self.values + _vals(other))

    def __sub__(self, other):
        return GridFunction(self.mesh, self.values - _vals(other))

    def __mul__(self, c):
        return GridFunction(self.mesh, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.mesh, -self.values)


def _vals(x):
    return x.values if isinstance(x, GridFunction) else x


@dataclass(frozen=True, eq=False)
class ExponentField:
    """Variable exponent r(z) on the nodes, with 1 < r_minus <= r_plus < inf."""

    mesh: Mesh
    values: np.ndarray
    kind: str = "table"
    params: Optional[dict] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_nodes,):
            raise InvalidField(f"expected {self.mesh.n_nodes} exponent values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidField("exponent must be finite")
        if v.min() <= 1.0:
            raise InvalidField(f"exponent must exceed 1 everywhere (min is {v.min():.6g})")
        object.__setattr__(self, "values", _frozen(v.copy()))

    @classmethod
    def constant(cls, mesh: Mesh, value: float) -> "ExponentField":
        return cls(mesh, _nodal_from_kind(mesh, "constant", {"value": value}), "constant", {"value": float(value)})

    @classmethod
    def affine(cls, mesh: Mesh, a: float, b: float = 0.0, c: float = 0.0) -> "ExponentField":
        params = {"a": float(a), "b": float(b), "c": float(c)}
        return cls(mesh, _nodal_from_kind(mesh, "affine", params), "affine", params)

    @classmethod
    def table(cls, mesh: Mesh, values) -> "ExponentField":
        return cls(mesh, np.asarray(values, dtype=float), "table", None)

    @classmethod
    def from_spec(cls, mesh: Mesh, kind: str, params: dict) -> "ExponentField":
        if kind == "constant":
            return cls.constant(mesh, params["value"])
        if kind == "affine":
            return cls.affine(mesh, params.get("a", 0.0), params.get("b", 0.0), params.get("c", 0.0))
        if kind == "table":
            return cls.table(mesh, params["values"])
        raise InvalidField(f"unknown exponent kind {kind!r}")

    @cached_property
    def r_minus(self) -> float:
        return float(self.values.min())

    @cached_property
    def r_plus(self) -> float:
        return float(self.values.max())

    @property
    def is_constant(self) -> bool:
        return self.r_minus == self.r_plus

    @cached_property
    def bary(self) -> np.ndarray:
        """Exponent at element barycenters (mean of the vertex values)."""
        return _frozen(self.values[self.mesh.elements].mean(axis=1))

    def conjugate(self) -> "ExponentField":
        r = self.values
        return ExponentField(self.mesh, r / (r - 1.0), "table")

    def critical(self) -> np.ndarray:
        """Sobolev critical exponent N r / (N - r), +inf where r >= N."""
        N = self.mesh.dim
        r = self.values
        out = np.full_like(r, np.inf)
        sub = r < N
        out[sub] = N * r[sub] / (N - r[sub])
        return out

    def critical_minus(self) -> float:
        """p_-^* : critical exponent evaluated at r_minus."""
        N = self.mesh.dim
        return N * self.r_minus / (N - self.r_minus) if self.r_minus < N else np.inf


def discrete_c1_norm(u: GridFunction) -> float:
    """max |u| over nodes + max |grad u| over elements."""
    if u.mesh.n_elements == 0:
        return float(np.abs(u.values).max())
    return float(np.abs(u.values).max() + u.grad_norms.max())


@dataclass(frozen=True)
class PositivityReport:
    interior_min: float
    boundary_quotient_min: float

    @property
    def ok(self) -> bool:
        return self.interior_min > 0.0 and self.boundary_quotient_min > 0.0

    def as_dict(self) -> dict:
        return {
            "interior_min": self.interior_min,
            "boundary_quotient_min": self.boundary_quotient_min,
            "ok": self.ok,
        }


def positivity_report(u: GridFunction) -> PositivityReport:
    """Discrete stand-in for u in int C_+.

    Interior nodes must be positive and the inward difference quotient
    (u(inner neighbour) - 0) / h must be positive at every non-corner
    boundary node, i.e. the one-sided outward normal derivative is negative.
    """
    mesh = u.mesh
    interior = u.values[mesh.free_nodes]
    nb = mesh.inward_neighbors
    quot = u.values[nb[:, 1].astype(int)] / nb[:, 2] - u.values[nb[:, 0].astype(int)] / nb[:, 2]
    return PositivityReport(float(interior.min()), float(quot.min()))
