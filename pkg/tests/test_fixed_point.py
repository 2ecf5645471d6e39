import numpy as np
import pytest

from anisopq.eigen import principal_eigenpair
from anisopq.errors import NoConvergence
from anisopq.fields import GridFunction, discrete_c1_norm
from anisopq.fixed_point import full_residual, homotopy_scan, run_fixed_point
from anisopq.frozen import minimal_solution, solve_auxiliary
from anisopq.problem import SolverOptions
from conftest import standard_spec


@pytest.fixture(scope="module")
def std():
    spec = standard_spec(n=64)
    eig = principal_eigenpair(spec.mesh, spec.p, spec.eigen_options())
    return spec, eig, solve_auxiliary(spec, eig)


def test_standard_run(std):
    spec, eig, ubar = std
    rep = run_fixed_point(spec, eig, ubar)
    assert rep.full_residual <= 1e-7
    assert np.all(ubar.values <= rep.final_u.values + 1e-12) and rep.ordering_ok
    assert rep.positivity.ok
    assert rep.outer_iterations <= 50
    assert all(np.isfinite(rep.iterates))
    # convection mismatch vanishes with the outer increment
    assert rep.full_residual <= rep.residuals["middle"] + 10 * spec.solver.tol_outer
    assert full_residual(rep.final_u, spec, eig.lambda1) == rep.full_residual


def test_convection_free(std):
    spec, eig, ubar = std
    free = spec.replace(r_hat=GridFunction.zeros(spec.mesh))
    rep = run_fixed_point(free, eig, ubar)
    assert rep.outer_iterations <= 2
    b = minimal_solution(GridFunction.zeros(spec.mesh), free, ubar, eig.lambda1)
    bb = minimal_solution(b, free, ubar, eig.lambda1)
    assert np.max(np.abs(bb.values - b.values)) <= 1e-10


def test_beta_stable_under_perturbation(std, rng):
    spec, eig, ubar = std
    v = GridFunction.from_function(spec.mesh, lambda x: x * (1 - x))
    b0 = minimal_solution(v, spec, ubar, eig.lambda1)
    for scale in (1e-3, 1e-5):
        w = GridFunction(spec.mesh, v.values + scale * rng.standard_normal(spec.mesh.n_nodes)).zero_trace()
        assert discrete_c1_norm(minimal_solution(w, spec, ubar, eig.lambda1) - b0) < 1e3 * scale


def test_nonconvergence_reports_history(std):
    spec, eig, ubar = std
    tight = spec.replace(solver=SolverOptions(max_outer=1))
    with pytest.raises(NoConvergence) as info:
        run_fixed_point(tight, eig, ubar)
    assert len(info.value.history) == 1


def test_homotopy(std):
    spec, eig, ubar = std
    rows = homotopy_scan(spec, [0.01, 0.5], eig=eig, ubar=ubar)
    assert all(r["converged"] and r["bounded"] for r in rows)
    assert rows[0]["c1_norm"] < 0.05 * rows[1]["c1_norm"]
    par = homotopy_scan(spec, [0.01, 0.5], eig=eig, ubar=ubar, threads=2)
    assert [r["c1_norm"] for r in par] == [r["c1_norm"] for r in rows]


def test_homotopy_records_failures(std):
    spec, eig, ubar = std
    rows = homotopy_scan(spec.replace(solver=SolverOptions(max_outer=1)), [0.5], eig=eig, ubar=ubar)
    assert rows[0]["converged"] is False and rows[0]["c1_norm"] is None and "error" in rows[0]
