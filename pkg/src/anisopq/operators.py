"""Discrete A_r, V = A_p + A_q and the (p,q) Dirichlet energy.

Operators are applied matrix-free through the element kernels.  Dual
vectors are returned on the free (interior) nodes only, in the order of
``mesh.free_nodes``.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import kernels
from .fields import ExponentField, GridFunction
from .mesh import Mesh

DEFAULT_EPS = 1e-10


@dataclass(frozen=True, eq=False)
class EnergySpec:
    p: ExponentField
    q: Optional[ExponentField] = None
    eps_reg: float = DEFAULT_EPS

    def __post_init__(self):
        if not (0.0 <= self.eps_reg < 1e-6):
            raise ValueError(f"eps_reg must lie in [0, 1e-6), got {self.eps_reg}")
        if self.q is not None and not self.q.r_plus < self.p.r_minus:
            raise ValueError(f"need q_+ < p_- (q_+={self.q.r_plus}, p_-={self.p.r_minus})")

    @property
    def mesh(self) -> Mesh:
        return self.p.mesh

    @property
    def exponents(self):
        return (self.p,) if self.q is None else (self.p, self.q)


def _kargs(mesh: Mesh):
    return mesh.elements, mesh.dphi


def energy_values(values: np.ndarray, spec: EnergySpec) -> float:
    mesh = spec.mesh
    return sum(
        kernels.power_energy(values, *_kargs(mesh), mesh.measures, r.bary, spec.eps_reg)
        for r in spec.exponents
    )


def energy_grad_values(values: np.ndarray, spec: EnergySpec):
    """Energy and its full nodal gradient (boundary entries included)."""
    mesh = spec.mesh
    total = 0.0
    grad = np.zeros(mesh.n_nodes)
    for r in spec.exponents:
        e, g = kernels.power_energy_grad(values, *_kargs(mesh), mesh.measures, r.bary, spec.eps_reg)
        total += e
        grad += g
    return total, grad


def energy_pq(u: GridFunction, spec: EnergySpec) -> float:
    """Regularised double-phase energy, offset so that energy_pq(0) == 0."""
    return energy_values(u.values, spec)


def apply_A(u: GridFunction, r: ExponentField, eps_reg: float = DEFAULT_EPS) -> np.ndarray:
    """<A_r(u), h> for every free-node hat function h."""
    mesh = u.mesh
    _, g = kernels.power_energy_grad(u.values, *_kargs(mesh), mesh.measures, r.bary, eps_reg)
    return g[mesh.free_nodes]


def apply_V(u: GridFunction, spec: EnergySpec) -> np.ndarray:
    return energy_grad_values(u.values, spec)[1][u.mesh.free_nodes]


def pairing(dual: np.ndarray, h: GridFunction) -> float:
    """Evaluate a free-node dual vector on a zero-trace grid function."""
    return float(np.dot(dual, h.values[h.mesh.free_nodes]))


def dual_norm(residual) -> float:
    """Max-abs entry over the free nodes."""
    r = np.asarray(residual, dtype=float)
    return float(np.abs(r).max()) if r.size else 0.0


# -- assembly helpers ---------------------------------------------------------

_patterns: "weakref.WeakKeyDictionary[Mesh, tuple]" = weakref.WeakKeyDictionary()


def _free_pattern(mesh: Mesh):
    pat = _patterns.get(mesh)
    if pat is None:
        fmap = np.full(mesh.n_nodes, -1, dtype=np.int64)
        fmap[mesh.free_nodes] = np.arange(mesh.free_nodes.size)
        nv = mesh.verts_per_element
        rows = np.repeat(mesh.elements, nv, axis=1).ravel()
        cols = np.tile(mesh.elements, (1, nv)).ravel()
        fr, fc = fmap[rows], fmap[cols]
        mask = (fr >= 0) & (fc >= 0)
        pat = (mask, fr[mask], fc[mask], mesh.free_nodes.size)
        _patterns[mesh] = pat
    return pat


def assemble_free(blocks: np.ndarray, mesh: Mesh) -> sp.csr_matrix:
    """Sum (ne, nv, nv) element blocks into a sparse matrix on the free nodes."""
    mask, r, c, nf = _free_pattern(mesh)
    return sp.csr_matrix((blocks.ravel()[mask], (r, c)), shape=(nf, nf))


def hessian_blocks(values: np.ndarray, spec: EnergySpec) -> np.ndarray:
    mesh = spec.mesh
    out = None
    for r in spec.exponents:
        b = kernels.power_hessian(values, *_kargs(mesh), mesh.measures, r.bary, spec.eps_reg)
        out = b if out is None else out + b
    return out


def hessian_pq(values: np.ndarray, spec: EnergySpec) -> sp.csr_matrix:
    """Sparse Hessian of energy_pq on the free nodes (symmetric positive definite)."""
    return assemble_free(hessian_blocks(values, spec), spec.mesh)


def stiffness_free(mesh: Mesh) -> sp.csr_matrix:
    """P1 Laplacian on the free nodes (Hessian of 1/2 |Du|^2)."""
    nv = mesh.verts_per_element
    blocks = mesh.measures[:, None, None] * np.einsum("ekd,eld->ekl", mesh.dphi, mesh.dphi)
    assert blocks.shape[1] == nv
    return assemble_free(blocks, mesh)


def load_vector(per_element: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Full nodal vector of integral(g h_i) with g sampled at barycenters."""
    return kernels.bary_scatter(np.ascontiguousarray(mesh.measures * per_element), mesh.elements, mesh.n_nodes)


def bary_mass_blocks(per_element: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Element blocks of integral(c h_i h_j) under barycenter quadrature."""
    nv = mesh.verts_per_element
    w = mesh.measures * per_element / nv ** 2
    return np.broadcast_to(w[:, None, None], (mesh.n_elements, nv, nv))
