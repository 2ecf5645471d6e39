import numpy as np
import pytest
import scipy.sparse.linalg as spla

from anisopq.fields import ExponentField, GridFunction
from anisopq.mesh import build_mesh
from anisopq.modular import rho_grad
from anisopq.operators import (EnergySpec, apply_A, apply_V, dual_norm, energy_pq, hessian_pq,
                               load_vector, pairing, stiffness_free)

M1 = build_mesh(1, [1.0], [16])
M2 = build_mesh(2, [1.0, 1.0], [6, 5])


def _rand(m, rng):
    return GridFunction(m, rng.standard_normal(m.n_nodes)).zero_trace()


def test_energy_examples():
    lin = GridFunction.from_function(M1, lambda x: x)
    assert energy_pq(GridFunction.zeros(M1), EnergySpec(ExponentField.constant(M1, 2.5), ExponentField.constant(M1, 1.5))) == 0.0
    assert energy_pq(lin, EnergySpec(ExponentField.constant(M1, 2.0), eps_reg=0.0)) == pytest.approx(0.5)
    spec = EnergySpec(ExponentField.constant(M1, 3.0), ExponentField.constant(M1, 1.5), eps_reg=0.0)
    assert energy_pq(lin, spec) == pytest.approx(1.0)


def test_energy_spec_validation():
    with pytest.raises(ValueError):
        EnergySpec(ExponentField.constant(M1, 2.0), ExponentField.constant(M1, 2.1))
    with pytest.raises(ValueError):
        EnergySpec(ExponentField.constant(M1, 2.0), eps_reg=1e-6)


def test_linear_case_matches_stiffness(rng):
    """r = 2, eps = 0: A is the P1 Laplacian; 5-point stencil in 2D."""
    for m in (M1, M2):
        u = _rand(m, rng)
        Au = apply_A(u, ExponentField.constant(m, 2.0), 0.0)
        assert np.allclose(Au, stiffness_free(m) @ u.values[m.free_nodes], atol=1e-12)
        assert pairing(Au, u) == pytest.approx(rho_grad(u, ExponentField.constant(m, 2.0)), rel=1e-12)
    # independent 5-point stencil on a square mesh
    m = build_mesh(2, [1.0, 1.0], [5, 5])
    u = _rand(m, rng)
    U = u.values.reshape(6, 6)  # row j, column i
    lap = 4 * U[1:-1, 1:-1] - U[:-2, 1:-1] - U[2:, 1:-1] - U[1:-1, :-2] - U[1:-1, 2:]
    assert np.allclose(apply_A(u, ExponentField.constant(m, 2.0), 0.0), lap.ravel(), atol=1e-12)


def test_pairing_identity(rng):
    p, q = ExponentField.affine(M2, 2.2, 0.3), ExponentField.affine(M2, 1.4, 0.0, 0.3)
    u = _rand(M2, rng)
    val = pairing(apply_V(u, EnergySpec(p, q, 0.0)), u)
    assert val == pytest.approx(rho_grad(u, p) + rho_grad(u, q), rel=1e-12)
    assert np.all(apply_V(GridFunction.zeros(M2), EnergySpec(p, q, 0.0)) == 0)
    assert np.array_equal(apply_V(u, EnergySpec(p, None, 1e-10)), apply_A(u, p, 1e-10))


def test_monotone_and_convex(rng):
    spec = EnergySpec(ExponentField.affine(M2, 2.5, 0.5), ExponentField.constant(M2, 1.3))
    for _ in range(20):
        u, w = _rand(M2, rng), _rand(M2, rng)
        assert pairing(apply_V(u, spec) - apply_V(w, spec), u - w) > 0
        ts = np.linspace(-1, 2, 5)
        vals = [energy_pq(u + (w - u) * t, spec) for t in ts]
        assert np.all(np.diff(vals, 2) >= -1e-12)


def test_hessian_matches_fd(rng):
    spec = EnergySpec(ExponentField.affine(M1, 2.5, 0.5), ExponentField.constant(M1, 1.7))
    u, h = _rand(M1, rng), _rand(M1, rng)
    d = 1e-6
    fd = (apply_V(u + h * d, spec) - apply_V(u - h * d, spec)) / (2 * d)
    Hh = hessian_pq(u.values, spec) @ h.values[M1.free_nodes]
    assert np.allclose(Hh, fd, rtol=1e-5, atol=1e-7)


def test_dual_norm_examples(rng):
    assert dual_norm(np.zeros(5)) == 0.0
    assert dual_norm(np.eye(5)[2]) == 1.0
    # exact linear solve of A_2 u = b
    b = load_vector(np.ones(M2.n_elements), M2)[M2.free_nodes]
    x = spla.spsolve(stiffness_free(M2).tocsc(), b)
    u = np.zeros(M2.n_nodes)
    u[M2.free_nodes] = x
    assert dual_norm(apply_A(GridFunction(M2, u), ExponentField.constant(M2, 2.0), 0.0) - b) < 1e-10
