import numpy as np
import pytest

from anisopq.errors import InvalidField
from anisopq.fields import ExponentField, GridFunction
from anisopq.mesh import build_mesh
from anisopq.reaction import FrozenReaction, ReactionModel, check_H1_v, eval_f, eval_F, eval_g_v

M = build_mesh(1, [1.0], [16])


def model(mu=1.5, **kw):
    return ReactionModel(ExponentField.constant(M, mu), kw.pop("c0", 1.0), kw.pop("delta", 1.0), **kw)


def test_f_examples():
    m = model()
    assert eval_f(m, 0, 0.0) == 0.0
    assert eval_f(m, 0, 0.25) == pytest.approx(0.5)
    assert eval_f(m, 0, 100.0) == pytest.approx(1.0)
    assert eval_f(m, 0, -3.0) == 0.0


def test_F_examples_and_fd(rng):
    m = model(mu=1.3, c0=2.0, delta=0.5)
    assert eval_F(m, 0, 0.0) == 0.0
    assert eval_F(model(), 0, 1.0) == pytest.approx(1 / 1.5)
    h = 1e-6
    for x in rng.uniform(0.01, 3.0, 50):
        fd = (eval_F(m, 3, x + h) - eval_F(m, 3, x - h)) / (2 * h)
        assert fd == pytest.approx(eval_f(m, 3, x), abs=1e-6)


def test_table_primitive_fd(rng):
    m = ReactionModel(ExponentField.constant(M, 1.5), 1.0, 1.0, kind="custom-table",
                      table_x=np.array([0.0, 0.5, 1.0, 2.0]), table_f=np.array([0.0, 0.8, 1.0, 1.1]))
    h = 1e-7
    for x in rng.uniform(0.01, 4.0, 50):
        if np.min(np.abs(x - m.table_x)) < 1e-5:
            continue
        assert (m.F(x + h, 1.5) - m.F(x - h, 1.5)) / (2 * h) == pytest.approx(m.f(x, 1.5), abs=1e-6)


def test_bounds_and_monotone():
    m = model(mu=1.4, delta=0.7)
    for rho_ in (1.0, 10.0):
        xs = np.linspace(0, rho_, 200)
        f = m.f(xs, 1.4)
        assert np.all(f >= 0) and np.all(f <= m.c0 * max(m.delta, rho_) ** 0.4 + m.c0)
        assert np.all(np.diff(f) >= 0)


def test_H1_v_capped_passes_at_two_resolutions():
    for n in (16, 32):
        mesh = build_mesh(1, [1.0], [n])
        m = ReactionModel(ExponentField.constant(mesh, 1.4), 1.0, 1.0)
        rep = check_H1_v(m, ExponentField.constant(mesh, 2.2))
        assert rep["ok"]


def test_H1_v_superlinear_table_fails():
    xs = np.linspace(0, 10, 41)
    m = ReactionModel(ExponentField.constant(M, 1.5), 1.0, 1.0, kind="custom-table", table_x=xs, table_f=xs ** 2)
    reps = [check_H1_v(m, ExponentField.constant(mesh_p, 2.0)) for mesh_p in (M,)]
    assert not reps[0]["ok"] and reps[0]["worst_margin"] < 0


def test_invalid_model():
    with pytest.raises(InvalidField):
        model(c0=0.0)
    with pytest.raises(InvalidField):
        ReactionModel(ExponentField.constant(M, 1.5), 1.0, 1.0, kind="custom-table", table_x=[0, 1], table_f=[1, 2])


def test_frozen_reaction_examples():
    m = model()
    tau = ExponentField.constant(M, 2.0)
    r1 = GridFunction(M, np.ones(M.n_nodes))
    zero = FrozenReaction.freeze(GridFunction.zeros(M), r1, tau, m)
    assert np.all(zero.forcing == 0)
    assert eval_g_v(zero, 3, 0.25) == pytest.approx(eval_f(m, 3, 0.25))
    no_conv = FrozenReaction.freeze(GridFunction.from_function(M, lambda x: x), GridFunction.zeros(M), tau, m)
    assert eval_g_v(no_conv, 3, 0.25) == pytest.approx(eval_f(m, 3, 0.25))
    lin = FrozenReaction.freeze(GridFunction.from_function(M, lambda x: x), r1, tau, m)
    for e in range(M.n_elements):
        assert eval_g_v(lin, e, 0.3) - eval_f(m, e, 0.3) == pytest.approx(1.0)
