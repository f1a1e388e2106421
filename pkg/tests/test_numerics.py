import numpy as np
import pytest

import oracles
from ipns_ac.errors import DomainError, ShapeError
from ipns_ac.numerics import (
    AdamState, MlpParams, RngStream, adam_step, backward, forward_cached, grad_check, init_mlp, mlp_backward,
    mlp_forward, soft_update,
)


def mse_loss(target):
    def fn(out):
        diff = out - target
        return float(np.mean(diff ** 2)), 2.0 * diff / diff.size
    return fn


class TestMlpParams:
    def test_layout_is_a_view_of_flat(self):
        p = MlpParams((3, 4, 2), ("relu", "linear"))
        assert p.flat.shape == (3 * 4 + 4 + 4 * 2 + 2,)
        p.weights[1][0, 0] = 7.0
        assert 7.0 in p.flat

    def test_chaining_enforced(self):
        with pytest.raises(ShapeError):
            MlpParams.from_layers([(np.ones((2, 2)), np.ones(2), "relu"), (np.ones((1, 3)), np.ones(1), "linear")])

    def test_unknown_activation(self):
        with pytest.raises(ValueError):
            MlpParams((2, 2), ("swish",))

    def test_copy_is_deep(self):
        p = init_mlp((2, 3, 1), ("tanh", "linear"), RngStream("t", 0))
        q = p.copy()
        q.flat[:] = 0
        assert np.any(p.flat != 0)


class TestForward:
    def test_hand_multiply(self):
        p = MlpParams.from_layers([(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([1.0, 1.0]), "linear")])
        np.testing.assert_array_equal(mlp_forward(p, np.array([1.0, 1.0])), [4.0, 8.0])

    def test_zero_input_gives_bias_path(self):
        p = MlpParams.from_layers([(np.zeros((2, 3)), np.array([0.5, -0.5]), "relu")])
        np.testing.assert_array_equal(mlp_forward(p, np.zeros(3)), [0.5, 0.0])

    @pytest.mark.parametrize("act", ["relu", "elu", "tanh", "sigmoid", "linear"])
    def test_matches_loop_oracle(self, act):
        rng = RngStream("fwd", 3)
        p = init_mlp((4, 5, 3), (act, act), rng)
        p.biases[0][:] = rng.normal(size=5)
        x = rng.normal(size=4)
        expected = oracles.mlp_forward([w.tolist() for w in p.weights], [b.tolist() for b in p.biases],
                                       p.activations, x.tolist())
        np.testing.assert_allclose(mlp_forward(p, x), expected, rtol=1e-12, atol=1e-15)

    def test_batch_equals_rowwise(self):
        rng = RngStream("fwd", 1)
        p = init_mlp((3, 8, 2), ("elu", "tanh"), rng)
        xs = rng.normal(size=(6, 3))
        batch = mlp_forward(p, xs)
        for i in range(6):
            np.testing.assert_allclose(batch[i], mlp_forward(p, xs[i]), rtol=1e-14)

    def test_dimension_mismatch(self):
        p = MlpParams((3, 2), ("linear",))
        with pytest.raises(ShapeError):
            mlp_forward(p, np.ones(4))

    def test_non_finite_input(self):
        p = MlpParams((2, 2), ("linear",))
        with pytest.raises(DomainError):
            mlp_forward(p, np.array([np.nan, 0.0]))

    def test_sigmoid_stays_open_interval(self):
        p = MlpParams.from_layers([(np.array([[1.0]]), np.array([0.0]), "sigmoid")])
        out = mlp_forward(p, np.array([[-1e4], [1e4]]))
        assert np.all(out > 0) and np.all(out < 1)


class TestBackward:
    def test_linear_gradient_by_hand(self):
        w = np.array([[1.0, 2.0]])
        p = MlpParams.from_layers([(w, np.array([0.0]), "linear")])
        g = mlp_backward(p, np.array([3.0, 4.0]), np.array([1.0]))
        np.testing.assert_array_equal(g.weights[0], [[3.0, 4.0]])
        np.testing.assert_array_equal(g.biases[0], [1.0])

    @pytest.mark.parametrize("acts", [("relu", "linear"), ("elu", "elu", "linear"), ("tanh", "sigmoid")])
    def test_finite_difference(self, acts):
        rng = RngStream("grad", len(acts))
        sizes = (3,) + (6,) * (len(acts) - 1) + (2,)
        p = init_mlp(sizes, acts, rng)
        x = rng.normal(size=(5, 3))
        assert grad_check(p, x, mse_loss(rng.normal(size=(5, 2)))) < 1e-4

    def test_input_gradient(self):
        rng = RngStream("din", 0)
        p = init_mlp((3, 5, 1), ("tanh", "linear"), rng)
        x = rng.normal(size=(1, 3))
        _, cache = forward_cached(p, x)
        _, dx = backward(p, cache, np.ones((1, 1)), param_grads=False, input_grad=True)
        h = 1e-6
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            num = (mlp_forward(p, x[0] + e)[0] - mlp_forward(p, x[0] - e)[0]) / (2 * h)
            assert dx[0, i] == pytest.approx(num, rel=1e-6)

    def test_upstream_shape_checked(self):
        p = MlpParams((2, 3), ("linear",))
        with pytest.raises(ShapeError):
            mlp_backward(p, np.ones(2), np.ones(2))


class TestAdam:
    def test_first_step_hand_value(self):
        p = MlpParams.from_layers([(np.zeros((1, 1)), np.zeros(1), "linear")])
        state = AdamState.for_params(p, lr=0.1)
        adam_step(p, np.array([1.0, 1.0]), state)
        assert p.flat[0] == pytest.approx(oracles.adam_first_step(0.0, 1.0, 0.1), rel=1e-12)
        assert p.flat[0] == pytest.approx(-0.1, abs=1e-6)
        assert state.step == 1

    def test_zero_gradient_keeps_params(self):
        rng = RngStream("adam", 0)
        p = init_mlp((2, 3, 1), ("relu", "linear"), rng)
        before = p.flat.copy()
        adam_step(p, np.zeros_like(p.flat), AdamState.for_params(p))
        np.testing.assert_array_equal(p.flat, before)

    def test_shape_mismatch(self):
        p = MlpParams((2, 1), ("linear",))
        with pytest.raises(ShapeError):
            adam_step(p, np.zeros(5), AdamState.for_params(p))

    def test_negative_step_rejected(self):
        p = MlpParams((2, 1), ("linear",))
        state = AdamState.for_params(p)
        state.step = -1
        with pytest.raises(ValueError):
            adam_step(p, np.zeros_like(p.flat), state)

    def test_minimizes_quadratic(self):
        p = MlpParams((1, 1), ("linear",))
        p.flat[:] = [5.0, -3.0]
        state = AdamState.for_params(p, lr=0.05)
        for _ in range(2000):
            adam_step(p, 2.0 * p.flat, state)
        assert np.all(np.abs(p.flat) < 1e-2)


class TestSoftUpdate:
    def test_tau_one_copies(self):
        a, b = MlpParams((2, 1), ("linear",)), MlpParams((2, 1), ("linear",))
        b.flat[:] = [1.0, 2.0, 3.0]
        soft_update(a, b, 1.0)
        np.testing.assert_array_equal(a.flat, b.flat)

    def test_tau_zero_keeps(self):
        a, b = MlpParams((2, 1), ("linear",)), MlpParams((2, 1), ("linear",))
        a.flat[:] = 4.0
        soft_update(a, b, 0.0)
        np.testing.assert_array_equal(a.flat, 4.0)

    def test_convex_combination(self):
        a, b = MlpParams((1, 1), ("linear",)), MlpParams((1, 1), ("linear",))
        a.flat[:] = [0.0, 10.0]
        b.flat[:] = [1.0, 0.0]
        soft_update(a, b, 0.01)
        np.testing.assert_allclose(a.flat, [0.01, 9.9])


class TestRngStream:
    def test_same_id_and_seed_reproduce(self):
        assert np.array_equal(RngStream("a", 1).normal(size=5), RngStream("a", 1).normal(size=5))

    def test_ids_are_independent(self):
        assert not np.array_equal(RngStream("a", 1).normal(size=5), RngStream("b", 1).normal(size=5))

    def test_streams_do_not_advance_each_other(self):
        a1, b1 = RngStream("a", 2), RngStream("b", 2)
        b1.normal(size=100)
        assert np.array_equal(a1.normal(size=3), RngStream("a", 2).normal(size=3))

    def test_state_round_trip(self):
        s = RngStream("x", 9)
        s.normal(size=7)
        saved = s.get_state()
        first = s.uniform(size=4)
        s.set_state(saved)
        np.testing.assert_array_equal(s.uniform(size=4), first)
