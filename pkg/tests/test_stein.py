"""Smoothed-model derivative estimators against analytic and FD oracles."""

import numpy as np
import pytest

from photopinn.models import build_model
from photopinn.nets import DenseLayer, TensorizedMlp
from photopinn.quadrature import (
    SteinConfig,
    SteinPlan,
    smoothed_forward,
    stein_first,
    stein_laplacian,
    stein_second_diag,
)

from conftest import central_diff_grad, central_diff_hess_diag, scalar_net


def make_tanh_mlp(dim, width, seed):
    rng = np.random.default_rng(seed)
    return TensorizedMlp(
        [DenseLayer.init(dim, width, rng), DenseLayer.init(width, width, rng), DenseLayer.init(width, 1, rng)],
        activation="tanh",
    )


def test_smoothed_forward_linear_exact():
    a = np.array([2.0, -1.5, 0.25])
    net = lambda X: X @ a + 0.7
    x = np.array([0.3, -0.2, 1.1])
    for level in (1, 2, 3):
        cfg = SteinConfig(sigma=0.5, level=level)
        assert smoothed_forward(net, x, cfg) == pytest.approx(net(x[None])[0], abs=1e-12)


def test_smoothed_forward_quadratic_bias():
    net = lambda X: np.sum(X**2, axis=1)
    x = np.array([0.4, -1.0])
    got = smoothed_forward(net, x, SteinConfig(sigma=0.1, level=3))
    assert got == pytest.approx(float(net(x[None])[0]) + 2 * 0.1**2, abs=1e-12)


def test_smoothed_forward_sigma_to_zero():
    net = make_tanh_mlp(3, 16, 0)
    x = np.array([0.2, -0.4, 0.9])
    got = smoothed_forward(net, x, SteinConfig(sigma=1e-8, level=3))
    assert got == pytest.approx(float(net(x[None])[0]), abs=1e-6)


def test_stein_first_linear_exact():
    a = np.array([1.0, -2.0, 3.0, 0.5])
    net = lambda X: X @ a
    x = np.zeros(4)
    for sigma in (1e-3, 0.1, 1.0):
        got = stein_first(net, x, SteinConfig(sigma=sigma, level=2))
        assert np.allclose(got, a, atol=1e-12)


def test_stein_first_quadratic():
    net = lambda X: np.sum(X**2, axis=1)
    got = stein_first(net, np.array([1.0, 2.0]), SteinConfig(sigma=1e-2, level=3))
    assert np.allclose(got, [2.0, 4.0], atol=1e-10)


def test_stein_second_diag_linear_is_zero():
    net = lambda X: X @ np.array([3.0, -1.0])
    got = stein_second_diag(net, np.array([0.5, 0.5]), SteinConfig(sigma=0.05, level=3))
    assert np.allclose(got, 0.0, atol=1e-9)


def test_stein_second_diag_quadratic():
    net = lambda X: X[:, 0] ** 2 + 3.0 * X[:, 1] ** 2
    got = stein_second_diag(net, np.array([0.3, -0.7]), SteinConfig(sigma=0.1, level=3))
    assert np.allclose(got, [2.0, 6.0], atol=1e-8)


def test_stein_laplacian_quadratic_20d():
    net = lambda X: np.sum(X**2, axis=1)
    got = stein_laplacian(net, np.full(20, 0.25), SteinConfig(sigma=0.1, level=3))
    assert got == pytest.approx(40.0, abs=1e-8)


def test_stein_laplacian_harmonic_l1_away_from_kinks():
    # |x|_1 is linear (hence harmonic) wherever no coordinate changes sign
    net = lambda X: np.sum(np.abs(X), axis=1)
    x = np.full(20, 0.5)
    got = stein_laplacian(net, x, SteinConfig(sigma=1e-3, level=3))
    assert abs(got) < 1e-6


def test_laplacian_equals_sum_of_diag():
    net = make_tanh_mlp(4, 12, 3)
    x = np.array([0.1, -0.3, 0.8, 0.0])
    cfg = SteinConfig(sigma=0.05, level=3)
    lap = stein_laplacian(net, x, cfg)
    diag = stein_second_diag(net, x, cfg)
    assert lap == pytest.approx(float(np.sum(diag)), abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_stein_first_vs_fd_on_mlps(seed):
    dim = 2 + seed % 3
    net = make_tanh_mlp(dim, 24, seed)
    rng = np.random.default_rng(seed + 100)
    x = rng.uniform(-0.5, 0.5, size=dim)
    est = stein_first(net, x, SteinConfig(sigma=1e-3, level=3))
    ref = central_diff_grad(scalar_net(net), x, h=1e-4)
    assert np.linalg.norm(est - ref) / np.linalg.norm(ref) < 1e-2


@pytest.mark.parametrize("seed", range(4))
def test_stein_second_diag_vs_fd_on_mlps(seed):
    dim = 2 + seed % 3
    net = make_tanh_mlp(dim, 24, seed + 10)
    rng = np.random.default_rng(seed + 200)
    x = rng.uniform(-0.5, 0.5, size=dim)
    est = stein_second_diag(net, x, SteinConfig(sigma=1e-2, level=3))
    ref = central_diff_hess_diag(scalar_net(net), x, h=1e-3)
    assert np.linalg.norm(est - ref) / np.linalg.norm(ref) < 5e-2


def test_error_shrinks_with_sigma():
    net = make_tanh_mlp(3, 24, 7)
    x = np.array([0.15, -0.35, 0.55])
    ref = central_diff_grad(scalar_net(net), x, h=1e-4)
    errs = []
    sigmas = (0.3, 0.1, 0.03, 0.01)
    for s in sigmas:
        est = stein_first(net, x, SteinConfig(sigma=s, level=3))
        errs.append(np.linalg.norm(est - ref))
    slope = np.polyfit(np.log(sigmas), np.log(errs), 1)[0]
    assert slope >= 1.0


def test_monte_carlo_mode_deterministic_and_consistent():
    net = lambda X: np.sum(X**2, axis=1)
    x = np.array([1.0, -0.5])
    cfg = SteinConfig(sigma=0.05, mode="monte-carlo", samples=4000, seed=42)
    a = stein_first(net, x, cfg, call_index=7)
    b = stein_first(net, x, cfg, call_index=7)
    assert np.array_equal(a, b)
    c = stein_first(net, x, cfg, call_index=8)
    assert not np.array_equal(a, c)
    # antithetic pairs make the quadratic case exact up to second-diff structure
    assert np.allclose(a, [2.0, -1.0], rtol=0.05)


def test_monte_carlo_query_count_is_pairs_plus_center():
    plan = SteinPlan(SteinConfig(sigma=0.1, mode="monte-carlo", samples=25, seed=0), dim=3)
    assert plan.n_queries == 2 * 25 + 1


def test_plan_one_query_per_grid_node():
    plan = SteinPlan(SteinConfig(sigma=0.1, level=3), dim=2)
    assert plan.n_queries == 13  # matches the published per-point inference count


def test_plan_combine_batches_match_single_calls():
    net = make_tanh_mlp(2, 16, 5)
    cfg = SteinConfig(sigma=0.05, level=3)
    pts = np.random.default_rng(0).uniform(-0.5, 0.5, size=(6, 2))
    plan = SteinPlan(cfg, 2)
    vals = net(plan.eval_points(pts))
    out = plan.combine(vals, ("value", "first", "second", "laplacian"))
    for i, x in enumerate(pts):
        assert out["value"][i] == pytest.approx(smoothed_forward(net, x, cfg), abs=1e-13)
        assert np.allclose(out["first"][i], stein_first(net, x, cfg), atol=1e-13)
        assert np.allclose(out["second"][i], stein_second_diag(net, x, cfg), atol=1e-13)
        assert out["laplacian"][i] == pytest.approx(stein_laplacian(net, x, cfg), abs=1e-13)


def test_model_failure_propagates():
    def broken(X):
        raise FloatingPointError("synthetic evaluation failure")

    with pytest.raises(FloatingPointError):
        smoothed_forward(broken, np.zeros(2), SteinConfig(sigma=0.1))
