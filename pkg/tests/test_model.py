"""Classifier contracts: stochastic outputs, unreduced loss, weighted
backward checked against finite differences, the optimizer update rule, and
checkpoint round-trips."""

import numpy as np
import pytest

from adaptaug.errors import DomainError, NumericError, ShapeError
from adaptaug.model import (
    ClassifierParams,
    RmsState,
    backward,
    forward,
    load_params,
    per_sample_loss,
    rmsprop_step,
    rmsprop_update,
    save_params,
)
from adaptaug.rng import RngStream


def random_instance(gen, b=4, l=8, h=5, c=3):
    params = ClassifierParams.init(l, h, c, RngStream(int(gen.integers(1 << 30))))
    x = gen.normal(0, 1, (b, l))
    labels = gen.integers(0, c, b)
    weights = gen.uniform(0, 1, b)
    return params, x, labels, weights


def weighted_total_loss(params, x, labels, weights):
    probs, _ = forward(params, x)
    return float(np.sum(weights * per_sample_loss(probs, labels)))


def fd_param_grads(params, x, labels, weights, h=1e-5):
    """Central finite differences over every parameter entry."""
    grads = {}
    for name, arr in params.arrays().items():
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        while not it.finished:
            ix = it.multi_index
            old = arr[ix]
            arr[ix] = old + h
            up = weighted_total_loss(params, x, labels, weights)
            arr[ix] = old - h
            down = weighted_total_loss(params, x, labels, weights)
            arr[ix] = old
            g[ix] = (up - down) / (2 * h)
            it.iternext()
        grads[name] = g
    return grads


class TestForward:
    def test_zero_params_two_classes(self):
        params = ClassifierParams(
            w1=np.zeros((4, 3)), b1=np.zeros(3), w2=np.zeros((3, 2)), b2=np.zeros(2)
        )
        probs, _ = forward(params, np.random.default_rng(0).normal(0, 1, (5, 4)))
        np.testing.assert_allclose(probs, 0.5, atol=0)

    def test_empty_batch(self, gen):
        params = ClassifierParams.init(6, 4, 3, RngStream(0))
        probs, cache = forward(params, np.zeros((0, 6)))
        assert probs.shape == (0, 3)
        assert cache.a1.shape == (0, 4)

    def test_rows_sum_to_one(self, gen):
        params, x, _, _ = random_instance(gen, b=32, l=10, h=7, c=4)
        probs, _ = forward(params, x)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
        assert (probs > 0).all()

    def test_shape_mismatch(self):
        params = ClassifierParams.init(6, 4, 3, RngStream(0))
        with pytest.raises(ShapeError):
            forward(params, np.zeros((2, 7)))


class TestPerSampleLoss:
    def test_certain_prediction_zero_loss(self):
        probs = np.array([[1.0, 0.0]])
        assert per_sample_loss(probs, np.array([0])) == pytest.approx(0.0)

    def test_half_prob_ln2(self):
        probs = np.array([[0.5, 0.5]])
        assert per_sample_loss(probs, np.array([1]))[0] == pytest.approx(np.log(2.0))

    def test_floor_bounds_loss(self):
        probs = np.array([[1.0, 0.0]])
        loss = per_sample_loss(probs, np.array([1]))[0]
        assert loss == pytest.approx(-np.log(1e-12))
        assert np.isfinite(loss)

    def test_label_out_of_range(self):
        with pytest.raises(DomainError):
            per_sample_loss(np.array([[0.5, 0.5]]), np.array([2]))

    def test_no_reduction(self, gen):
        params, x, labels, _ = random_instance(gen, b=6)
        probs, _ = forward(params, x)
        assert per_sample_loss(probs, labels).shape == (6,)


class TestBackward:
    def test_zero_weights_zero_grads(self, gen):
        params, x, labels, _ = random_instance(gen)
        probs, cache = forward(params, x)
        grads = backward(params, cache, labels, np.zeros(4))
        for arr in grads.arrays().values():
            np.testing.assert_array_equal(arr, 0.0)

    def test_matches_finite_differences(self, gen):
        for _ in range(5):
            params, x, labels, weights = random_instance(gen)
            probs, cache = forward(params, x)
            grads = backward(params, cache, labels, weights)
            numeric = fd_param_grads(params, x, labels, weights)
            for name, analytic in grads.arrays().items():
                scale = np.maximum(np.abs(numeric[name]), 1e-4)
                np.testing.assert_allclose(
                    analytic, numeric[name], rtol=1e-5, atol=1e-5 * scale.max()
                )

    def test_weight_linearity(self, gen):
        params, x, labels, _ = random_instance(gen, b=6)
        probs, cache = forward(params, x)
        a = gen.uniform(0, 1, 6)
        b = gen.uniform(0, 1, 6)
        g_sum = backward(params, cache, labels, a + b)
        g_a = backward(params, cache, labels, a)
        g_b = backward(params, cache, labels, b)
        for name in g_sum.arrays():
            np.testing.assert_allclose(
                g_sum.arrays()[name],
                g_a.arrays()[name] + g_b.arrays()[name],
                atol=1e-10,
            )

    def test_batch_permutation_equivariance(self, gen):
        params, x, labels, weights = random_instance(gen, b=8)
        perm = gen.permutation(8)
        probs, cache = forward(params, x)
        g1 = backward(params, cache, labels, weights)
        probs2, cache2 = forward(params, x[perm])
        g2 = backward(params, cache2, labels[perm], weights[perm])
        for name in g1.arrays():
            np.testing.assert_allclose(g1.arrays()[name], g2.arrays()[name], atol=1e-12)

    def test_shape_mismatch(self, gen):
        params, x, labels, weights = random_instance(gen)
        _, cache = forward(params, x)
        with pytest.raises(ShapeError):
            backward(params, cache, labels, weights[:-1])


class TestRmsprop:
    def test_zero_gradient_keeps_params(self):
        theta = np.array([1.0, -2.0])
        v = np.array([0.5, 0.5])
        rmsprop_update(theta, np.zeros(2), v, lr=0.1)
        np.testing.assert_array_equal(theta, [1.0, -2.0])

    def test_hand_worked_scalar_step(self):
        theta = np.array([0.0])
        v = np.array([0.0])
        rmsprop_update(theta, np.array([1.0]), v, lr=0.001, rho=0.9, eps=1e-8)
        assert v[0] == pytest.approx(0.1)
        assert theta[0] == pytest.approx(-0.001 / (np.sqrt(0.1) + 1e-8), rel=1e-12)

    def test_deterministic(self, gen):
        params1, x, labels, weights = random_instance(gen)
        params2 = params1.copy()
        s1 = RmsState.zeros_like(params1)
        s2 = RmsState.zeros_like(params2)
        _, cache1 = forward(params1, x)
        g1 = backward(params1, cache1, labels, weights)
        _, cache2 = forward(params2, x)
        g2 = backward(params2, cache2, labels, weights)
        rmsprop_step(params1, g1, s1, 0.01)
        rmsprop_step(params2, g2, s2, 0.01)
        for name in params1.arrays():
            np.testing.assert_array_equal(
                params1.arrays()[name], params2.arrays()[name]
            )

    def test_nonfinite_gradient_aborts_without_mutation(self, gen):
        params, x, labels, weights = random_instance(gen)
        before = params.copy()
        state = RmsState.zeros_like(params)
        _, cache = forward(params, x)
        grads = backward(params, cache, labels, weights)
        grads.w2[0, 0] = np.nan
        with pytest.raises(NumericError):
            rmsprop_step(params, grads, state, 0.01)
        for name in params.arrays():
            np.testing.assert_array_equal(params.arrays()[name], before.arrays()[name])
            np.testing.assert_array_equal(state.arrays()[name], 0.0)


class TestCheckpoint:
    def test_roundtrip_bit_exact(self, gen, tmp_path):
        params = ClassifierParams.init(12, 6, 3, RngStream(99))
        path = tmp_path / "model.ckpt"
        save_params(path, params)
        loaded = load_params(path)
        for name in params.arrays():
            np.testing.assert_array_equal(loaded.arrays()[name], params.arrays()[name])

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b'{"format": "something-else"}\n')
        with pytest.raises(DomainError):
            load_params(path)
