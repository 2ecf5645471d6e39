import numpy as np
import pytest

from anisopq.eigen import (check_weight, lemma4_constant, principal_eigenpair, quotient,
                           weighted_principal_eigenvalue)
from anisopq.errors import InvalidEigenvalue, InvalidWeight
from anisopq.fields import ExponentField, GridFunction, positivity_report
from anisopq.mesh import build_mesh
from anisopq.modular import rho, rho_grad
from oracles import p1_1d_generalized


@pytest.fixture(scope="module")
def pair_1d():
    m = build_mesh(1, [1.0], [64])
    p = ExponentField.constant(m, 2.0)
    return m, p, principal_eigenpair(m, p)


def test_matches_generalized_oracle(pair_1d):
    m, p, res = pair_1d
    assert res.lambda1 == pytest.approx(p1_1d_generalized(64), rel=1e-8)


def test_eigenfunction_properties(pair_1d):
    m, p, res = pair_1d
    assert rho(res.u1, p) == pytest.approx(1.0, rel=1e-12)
    assert quotient(res.u1, p) == pytest.approx(res.lambda1, rel=1e-8)
    assert np.all(res.u1.values >= 0) and positivity_report(res.u1).interior_min > 0


def test_scale_invariance_constant_p(pair_1d, rng):
    m, p, _ = pair_1d
    u = GridFunction(m, rng.standard_normal(m.n_nodes)).zero_trace()
    assert quotient(u * 2, p) == pytest.approx(quotient(u, p), rel=1e-12)


def test_variable_p_is_minimum(rng):
    m = build_mesh(1, [1.0], [48])
    p = ExponentField.affine(m, 2.0, 0.5)
    res = principal_eigenpair(m, p)
    assert np.all(res.u1.values >= 0)
    for _ in range(20):
        pert = GridFunction(m, res.u1.values + 1e-3 * rng.standard_normal(m.n_nodes)).zero_trace()
        # normalise the perturbation onto rho_p = 1 by bisection
        lo, hi = 0.1, 10.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if rho(pert * mid, p) < 1 else (lo, mid)
        assert rho_grad(pert * lo, p) >= res.lambda1 * (1 - 1e-8)


def test_weighted_examples(pair_1d):
    m, p, res = pair_1d
    half = GridFunction(m, np.full(m.n_nodes, res.lambda1 / 2))
    assert weighted_principal_eigenvalue(m, p, half, lambda1=res.lambda1) == pytest.approx(2.0, abs=1e-6)
    with pytest.raises(InvalidWeight):
        check_weight(GridFunction(m, np.full(m.n_nodes, res.lambda1 * (1 - 1e-12))), res.lambda1)
    lin = GridFunction.from_function(m, lambda x: res.lambda1 * x)
    lam = weighted_principal_eigenvalue(m, p, lin, lambda1=res.lambda1)
    oracle = p1_1d_generalized(64, weight=lambda x: res.lambda1 * x)
    assert lam > 1 and lam == pytest.approx(oracle, rel=1e-2)


def test_weight_sandwich(pair_1d, rng):
    m, p, res = pair_1d
    theta = GridFunction(m, res.lambda1 * (0.2 + 0.6 * rng.random(m.n_nodes)))
    lam = weighted_principal_eigenvalue(m, p, theta, lambda1=res.lambda1)
    assert res.lambda1 / theta.bary.max() * (1 - 1e-8) <= lam <= res.lambda1 / theta.bary.min() * (1 + 1e-8)


def test_invalid_weights(pair_1d):
    m, p, res = pair_1d
    for vals in (np.full(m.n_nodes, -1.0), np.zeros(m.n_nodes), np.full(m.n_nodes, 2 * res.lambda1)):
        with pytest.raises(InvalidWeight):
            check_weight(GridFunction(m, vals), res.lambda1)


def test_lemma4_constant():
    assert lemma4_constant(2.0) == 0.5
    with pytest.raises(InvalidEigenvalue):
        lemma4_constant(1.0)
