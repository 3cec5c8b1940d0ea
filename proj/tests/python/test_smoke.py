import math

import numpy as np
import pytest

import wcxopt as w


def test_projection_examples():
    ball = w.ConvexSet.ball(np.zeros(2), 1.0)
    np.testing.assert_allclose(w.project(ball, np.array([3.0, 4.0])), [0.6, 0.8], atol=1e-15)
    box = w.ConvexSet.box(np.zeros(2), np.ones(2))
    np.testing.assert_array_equal(w.project_weighted(box, np.array([4.0, 1.0]), np.array([2.0, -0.5])), [1.0, 0.0])
    assert w.weighted_norm_sq(np.array([1.0, 2.0]), np.array([3.0, 1.0])) == 7.0


def test_argument_errors_map_to_value_error():
    with pytest.raises(ValueError):
        w.weighted_norm_sq(np.ones(2), np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        w.OptimizerConfig(beta2=0.5, delta=1.0).validate()


def test_scalar_adagrad_step():
    cfg = w.OptimizerConfig(w.Variant.ScalarAdaGrad, alpha=1.0, beta1=0.0, delta=1.0)
    free = w.ConvexSet.free_space()
    s = w.step(w.initial_state(cfg, free, np.zeros(1)), np.array([2.0]), cfg, free)
    assert s.x[0] == pytest.approx(-2.0 / math.sqrt(5.0))


def test_soft_threshold():
    p = w.make_problem_from_data(w.ProblemKind.RobustRegression, np.ones((1, 1)), np.zeros(1))
    x_hat, residual = w.prox_point(p, np.array([2.0]), np.ones(1), w.MoreauConfig(rho_bar=1.0, inner_max_iters=20000))
    assert abs(x_hat[0] - 1.0) <= 1e-6
    assert residual <= 1e-6


def test_rate_fit_power_law():
    t = np.logspace(2, 5, 7)
    fit = w.rate_fit(list(zip(t, 7.0 / np.sqrt(t))))
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)


def test_run_preset_is_deterministic():
    a = w.run_preset("robust-reg-small", 0, 300)
    b = w.run_preset("robust-reg-small", 0, 300)
    assert a.t_star == b.t_star
    assert [r.moreau_grad_sq for r in a.records] == [r.moreau_grad_sq for r in b.records]
    assert a.records[0].t == 1 and a.records[-1].t == 300


def test_presets_round_trip():
    assert "robust-reg" in w.preset_names()
    assert w.preset("robust-reg-small")["T"] == 1000
