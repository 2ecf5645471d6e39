"""Structured P1 meshes on intervals and axis-aligned rectangles."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvalidMesh


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Simplicial mesh with cached P1 geometry.

    ``dphi[e, k]`` is the (constant) gradient of the k-th barycentric
    coordinate on element ``e``; ``measures[e]`` its length/area.
    """

    dim: int
    lengths: tuple
    resolution: tuple
    nodes: np.ndarray
    elements: np.ndarray
    boundary_nodes: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def verts_per_element(self) -> int:
        return self.dim + 1

    @cached_property
    def spacing(self) -> tuple:
        return tuple(L / n for L, n in zip(self.lengths, self.resolution))

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        m = np.zeros(self.n_nodes, dtype=bool)
        m[self.boundary_nodes] = True
        return _frozen(m)

    @cached_property
    def free_nodes(self) -> np.ndarray:
        return _frozen(np.flatnonzero(~self.boundary_mask))

    @cached_property
    def _geometry(self):
        x = self.nodes[self.elements]  # (ne, nv, dim)
        jac = np.transpose(x[:, 1:, :] - x[:, :1, :], (0, 2, 1))  # columns = edge vectors
        det = np.linalg.det(jac)
        inv = np.linalg.inv(jac)  # row k = grad of barycentric coord k+1
        dphi = np.empty((self.n_elements, self.dim + 1, self.dim))
        dphi[:, 1:, :] = inv
        dphi[:, 0, :] = -inv.sum(axis=1)
        fact = 1.0 if self.dim == 1 else 2.0
        return det / fact, dphi

    @cached_property
    def measures(self) -> np.ndarray:
        return _frozen(np.abs(self._geometry[0]))

    @cached_property
    def signed_measures(self) -> np.ndarray:
        return _frozen(self._geometry[0])

    @cached_property
    def dphi(self) -> np.ndarray:
        return _frozen(self._geometry[1])

    @cached_property
    def barycenters(self) -> np.ndarray:
        return _frozen(self.nodes[self.elements].mean(axis=1))

    @cached_property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @cached_property
    def inward_neighbors(self) -> np.ndarray:
        """(boundary node, inward neighbour, spacing) rows for non-corner boundary nodes."""
        rows = []
        if self.dim == 1:
            n = self.resolution[0]
            h = self.spacing[0]
            rows = [(0, 1, h), (n, n - 1, h)]
        else:
            nx, ny = self.resolution
            hx, hy = self.spacing
            idx = lambda i, j: i + j * (nx + 1)  # noqa: E731
            for i in range(1, nx):
                rows.append((idx(i, 0), idx(i, 1), hy))
                rows.append((idx(i, ny), idx(i, ny - 1), hy))
            for j in range(1, ny):
                rows.append((idx(0, j), idx(1, j), hx))
                rows.append((idx(nx, j), idx(nx - 1, j), hx))
        return _frozen(np.array(rows, dtype=float).reshape(-1, 3))

    def check(self) -> None:
        """Assert the structural invariants; raises InvalidMesh."""
        if np.any(self.measures <= 0):
            raise InvalidMesh("element with nonpositive measure")
        if self.elements.min() < 0 or self.elements.max() >= self.n_nodes:
            raise InvalidMesh("element index out of range")
        used = np.zeros(self.n_nodes, dtype=bool)
        used[self.elements.ravel()] = True
        if not used.all():
            raise InvalidMesh("node not attached to any element")
        tol = 1e-12 * max(self.lengths)
        on_bdry = np.zeros(self.n_nodes, dtype=bool)
        for d, L in enumerate(self.lengths):
            on_bdry |= np.abs(self.nodes[:, d]) < tol
            on_bdry |= np.abs(self.nodes[:, d] - L) < tol
        if not np.array_equal(on_bdry, self.boundary_mask):
            raise InvalidMesh("boundary_nodes does not match the geometric boundary")


def build_mesh(dim: int, lengths: Sequence[float], resolution: Sequence[int]) -> Mesh:
    """Uniform mesh of (0, L) or (0, Lx) x (0, Ly).

    In 2D every cell is cut along the same diagonal into two counterclockwise
    triangles, so the P1 stiffness matrix coincides with the 5-point stencil.
    """
    if dim not in (1, 2):
        raise InvalidMesh(f"dim must be 1 or 2, got {dim}")
    lengths = tuple(float(L) for L in lengths)
    resolution = tuple(int(n) for n in resolution)
    if len(lengths) != dim or len(resolution) != dim:
        raise InvalidMesh("lengths and resolution need one entry per axis")
    if any(not np.isfinite(L) or L <= 0 for L in lengths):
        raise InvalidMesh(f"extents must be positive, got {lengths}")
    if any(n < 2 for n in resolution):
        raise InvalidMesh(f"resolution must be >= 2 per axis, got {resolution}")

    if dim == 1:
        (L,), (n,) = lengths, resolution
        nodes = np.linspace(0.0, L, n + 1)[:, None]
        elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
        boundary = np.array([0, n])
    else:
        (Lx, Ly), (nx, ny) = lengths, resolution
        xs = np.linspace(0.0, Lx, nx + 1)
        ys = np.linspace(0.0, Ly, ny + 1)
        X, Y = np.meshgrid(xs, ys)  # node (i, j) -> i + j*(nx+1)
        nodes = np.column_stack([X.ravel(), Y.ravel()])
        i, j = np.meshgrid(np.arange(nx), np.arange(ny))
        a = (i + j * (nx + 1)).ravel()
        b, c, d = a + 1, a + nx + 1, a + nx + 2
        elements = np.concatenate([np.column_stack([a, b, d]), np.column_stack([a, d, c])])
        jj, ii = np.divmod(np.arange(nodes.shape[0]), nx + 1)
        boundary = np.flatnonzero((ii == 0) | (ii == nx) | (jj == 0) | (jj == ny))

    mesh = Mesh(
        dim=dim,
        lengths=lengths,
        resolution=resolution,
        nodes=_frozen(nodes.astype(float)),
        elements=_frozen(elements.astype(np.int64)),
        boundary_nodes=_frozen(boundary.astype(np.int64)),
    )
    mesh.check()
    return mesh
