import math

import numpy as np
import pytest

from krdistill.nets import (
    FeedForwardNet,
    OptimizerState,
    backward,
    cosine_lr,
    forward,
    init_net,
    load_net,
    make_projector,
    save_net,
    sgd_step,
)
from krdistill.numerics import Rng
from krdistill.validation import ParseError


def synthetic_scalar_loss(net, batch, g_logits, g_features):
    out = forward(net, batch)
    value = 0.0
    if g_logits is not None:
        value += float(np.sum(out.logits * g_logits))
    if g_features is not None:
        value += float(np.sum(out.features * g_features))
    return value


def fd_param_grads(net, batch, g_logits, g_features, h=1e-5):
    """Central finite differences of the synthetic loss over every parameter."""
    grads = []
    for p in net.parameters():
        g = np.zeros_like(p)
        pf, gf = p.ravel(), g.ravel()
        for i in range(pf.size):
            orig = pf[i]
            pf[i] = orig + h
            up = synthetic_scalar_loss(net, batch, g_logits, g_features)
            pf[i] = orig - h
            dn = synthetic_scalar_loss(net, batch, g_logits, g_features)
            pf[i] = orig
            gf[i] = (up - dn) / (2.0 * h)
        grads.append(g)
    return grads


def max_rel_err(analytic, numeric):
    worst = 0.0
    for a, b in zip(analytic, numeric):
        scale = max(float(np.max(np.abs(b))), 1e-12)
        worst = max(worst, float(np.max(np.abs(a - b))) / scale)
    return worst


def well_conditioned_instance(seed, dims, batch_size):
    """Net + batch whose pre-activations sit clear of the ReLU kink, so the
    finite-difference oracle is trustworthy at step 1e-5."""
    for attempt in range(50):
        rng = Rng(seed + 1000 * attempt)
        net = init_net(rng.substream(1), dims)
        batch = rng.substream(2).standard_normal((batch_size, dims[0]))
        out = forward(net, batch)
        preacts = out.cache[1]
        if not preacts or min(float(np.min(np.abs(a))) for a in preacts) > 1e-3:
            return net, batch
    raise AssertionError("could not build a well-conditioned instance")


class TestForward:
    def test_all_zero_parameters(self):
        net = FeedForwardNet((2, 3, 2), [np.zeros((2, 3)), np.zeros((3, 2))],
                             [np.zeros(3), np.zeros(2)])
        out = forward(net, np.array([[1.0, -2.0]]))
        assert np.array_equal(out.features, np.zeros((1, 3)))
        assert np.array_equal(out.logits, np.zeros((1, 2)))

    def test_single_identity_layer(self):
        net = FeedForwardNet((2, 2), [np.eye(2)], [np.zeros(2)])
        out = forward(net, np.array([[1.0, 2.0]]))
        assert np.array_equal(out.logits, [[1.0, 2.0]])
        # with no hidden layer the input itself is the feature representation
        assert np.array_equal(out.features, [[1.0, 2.0]])

    def test_hand_computed_two_layer_pass(self):
        w0 = np.array([[1.0, 2.0], [0.0, 1.0]])
        b0 = np.array([0.5, -3.0])
        w1 = np.array([[1.0, -1.0], [2.0, 0.0]])
        b1 = np.array([0.0, 1.0])
        net = FeedForwardNet((2, 2, 2), [w0, w1], [b0, b1])
        out = forward(net, np.array([[1.0, 2.0]]))
        # a0 = (1*1+2*0+0.5, 1*2+2*1-3) = (1.5, 1.0), both positive -> features
        np.testing.assert_allclose(out.features, [[1.5, 1.0]], atol=1e-15)
        # logits = (1.5*1 + 1*2 + 0, 1.5*(-1) + 1*0 + 1) = (3.5, -0.5)
        np.testing.assert_allclose(out.logits, [[3.5, -0.5]], atol=1e-15)

    def test_dimension_mismatch_rejected(self):
        net = init_net(Rng(0), (3, 4, 2))
        with pytest.raises(ValueError):
            forward(net, np.zeros((2, 5)))

    def test_determinism(self):
        net = init_net(Rng(1), (4, 8, 3))
        batch = Rng(2).standard_normal((6, 4))
        a = forward(net, batch)
        b = forward(net, batch)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.logits, b.logits)


class TestBackward:
    def test_zero_upstream_gives_zero_grads(self):
        net, batch = well_conditioned_instance(0, (4, 6, 5, 3), 5)
        out = forward(net, batch)
        grads = backward(net, out, np.zeros_like(out.logits), np.zeros_like(out.features))
        for g in grads.params:
            assert np.array_equal(g, np.zeros_like(g))

    def test_matches_finite_differences(self):
        net, batch = well_conditioned_instance(3, (5, 7, 6, 4), 8)
        rng = np.random.default_rng(0)
        out = forward(net, batch)
        gl = rng.standard_normal(out.logits.shape)
        gf = rng.standard_normal(out.features.shape)
        analytic = backward(net, out, gl, gf).params
        numeric = fd_param_grads(net, batch, gl, gf)
        assert max_rel_err(analytic, numeric) < 1e-4

    @pytest.mark.parametrize("seed", range(20))
    def test_gradient_correctness_sweep(self, seed):
        rng = np.random.default_rng(seed)
        n_hidden = int(rng.integers(1, 4))
        dims = [int(rng.integers(2, 7)) for _ in range(n_hidden + 2)]
        net, batch = well_conditioned_instance(seed, tuple(dims), int(rng.integers(2, 8)))
        out = forward(net, batch)
        gl = rng.standard_normal(out.logits.shape) if seed % 3 else None
        gf = rng.standard_normal(out.features.shape) if seed % 4 else None
        analytic = backward(net, out, gl, gf).params
        numeric = fd_param_grads(net, batch, gl, gf)
        assert max_rel_err(analytic, numeric) < 1e-4

    def test_feature_only_path_leaves_classifier_untouched(self):
        net, batch = well_conditioned_instance(5, (4, 6, 5, 3), 6)
        out = forward(net, batch)
        grads = backward(net, out, grad_features=np.ones_like(out.features))
        assert np.array_equal(grads.params[-2], np.zeros_like(net.weights[-1]))
        assert np.array_equal(grads.params[-1], np.zeros_like(net.biases[-1]))
        assert any(np.any(g != 0.0) for g in grads.params[:-2])

    def test_input_gradient_matches_fd(self):
        net, batch = well_conditioned_instance(6, (4, 5, 3), 4)
        rng = np.random.default_rng(1)
        out = forward(net, batch)
        gl = rng.standard_normal(out.logits.shape)
        grad_in = backward(net, out, gl).inputs
        h = 1e-5
        numeric = np.zeros_like(batch)
        for i in range(batch.shape[0]):
            for j in range(batch.shape[1]):
                orig = batch[i, j]
                batch[i, j] = orig + h
                up = synthetic_scalar_loss(net, batch, gl, None)
                batch[i, j] = orig - h
                dn = synthetic_scalar_loss(net, batch, gl, None)
                batch[i, j] = orig
                numeric[i, j] = (up - dn) / (2.0 * h)
        assert max_rel_err([grad_in], [numeric]) < 1e-4

    def test_missing_cache_rejected(self):
        net = init_net(Rng(0), (2, 3, 2))
        out = forward(net, np.zeros((1, 2)))
        out.cache = None
        with pytest.raises(RuntimeError, match="cache"):
            backward(net, out, np.zeros((1, 2)))


class TestSgdStep:
    def test_plain_gradient_descent(self):
        p = [np.array([1.0, 2.0])]
        state = OptimizerState.for_params(p, momentum=0.0, weight_decay=0.0)
        sgd_step(state, p, [np.array([0.5, -1.0])], lr=0.1)
        np.testing.assert_allclose(p[0], [0.95, 2.1], atol=1e-15)

    def test_momentum_hand_iteration(self):
        p = [np.array([0.0])]
        state = OptimizerState.for_params(p, momentum=0.9, weight_decay=0.0)
        g = [np.array([1.0])]
        sgd_step(state, p, g, lr=1.0)
        assert p[0][0] == pytest.approx(-1.0, abs=1e-15)
        sgd_step(state, p, g, lr=1.0)
        assert p[0][0] == pytest.approx(-2.9, abs=1e-15)

    def test_zero_gradient_fixed_point(self):
        p = [np.array([3.0, -4.0])]
        state = OptimizerState.for_params(p, momentum=0.9, weight_decay=0.0)
        sgd_step(state, p, [np.zeros(2)], lr=0.5)
        assert np.array_equal(p[0], [3.0, -4.0])

    def test_weight_decay_pulls_toward_zero(self):
        p = [np.array([2.0])]
        state = OptimizerState.for_params(p, momentum=0.0, weight_decay=0.1)
        sgd_step(state, p, [np.zeros(1)], lr=1.0)
        assert p[0][0] == pytest.approx(1.8, abs=1e-15)

    def test_nonpositive_lr_rejected(self):
        p = [np.zeros(1)]
        state = OptimizerState.for_params(p)
        with pytest.raises(ValueError):
            sgd_step(state, p, [np.zeros(1)], lr=0.0)


class TestCosineLr:
    def test_schedule_start(self):
        assert cosine_lr(0, 10, 0.1) == pytest.approx(0.1, abs=1e-15)

    def test_midpoint_is_half(self):
        assert cosine_lr(5, 10, 0.1) == pytest.approx(0.05, abs=1e-15)

    def test_last_epoch_of_two(self):
        assert cosine_lr(1, 2, 0.1) == pytest.approx(0.05, abs=1e-15)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            cosine_lr(10, 10, 0.1)


class TestInitNet:
    def test_determinism(self):
        a = init_net(Rng(11), (5, 8, 3))
        b = init_net(Rng(11), (5, 8, 3))
        for wa, wb in zip(a.weights, b.weights):
            assert np.array_equal(wa, wb)

    def test_he_variance(self):
        net = init_net(Rng(12), (100, 128, 2))
        observed = float(net.weights[0].var())
        assert abs(observed - 2.0 / 100.0) < 0.2 * (2.0 / 100.0)

    def test_biases_zero(self):
        net = init_net(Rng(13), (4, 6, 2))
        for b in net.biases:
            assert np.array_equal(b, np.zeros_like(b))

    def test_too_few_dims_rejected(self):
        with pytest.raises(ValueError):
            init_net(Rng(0), (4,))


class TestProjector:
    def test_default_shape(self):
        proj = make_projector(Rng(0), 16, 64)
        assert proj.layer_dims == (16, 64, 64, 64, 64)

    def test_configurable_hidden_count(self):
        proj = make_projector(Rng(0), 8, 4, hidden_layers=1, hidden_width=6)
        assert proj.layer_dims == (8, 6, 4)


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path):
        net = init_net(Rng(21), (5, 9, 4, 3))
        path = tmp_path / "net.krdnet"
        save_net(net, path)
        loaded = load_net(path)
        assert loaded.layer_dims == net.layer_dims
        for a, b in zip(net.parameters(), loaded.parameters()):
            assert np.array_equal(a, b)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.krdnet"
        path.write_text("NOPE 1\n2 2\n")
        with pytest.raises(ParseError, match="magic"):
            load_net(path)

    def test_wrong_value_count_names_line(self, tmp_path):
        path = tmp_path / "short.krdnet"
        path.write_text("KRDNET 1\n2 2\n1.0 2.0 3.0\n0.0 0.0\n")
        with pytest.raises(ParseError, match="line 3"):
            load_net(path)


def test_separable_problem_reaches_full_accuracy():
    rng = Rng(30)
    x0 = rng.substream(1).standard_normal((100, 2)) * 0.5 + np.array([-2.0, 0.0])
    x1 = rng.substream(2).standard_normal((100, 2)) * 0.5 + np.array([2.0, 0.0])
    x = np.vstack([x0, x1])
    y = np.array([0] * 100 + [1] * 100)

    from krdistill.losses import ce_loss

    net = init_net(rng.substream(3), (2, 8, 2))
    state = OptimizerState.for_params(net.parameters(), momentum=0.9, weight_decay=0.0)
    for _ in range(200):
        out = forward(net, x)
        loss = ce_loss(out.logits, y)
        grads = backward(net, out, grad_logits=loss.grad_logits)
        sgd_step(state, net.parameters(), grads.params, lr=0.1)
    pred = np.argmax(forward(net, x).logits, axis=1)
    assert np.all(pred == y)
