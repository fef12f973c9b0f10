import math

import numpy as np
import pytest

from krdistill.numerics import (
    Rng,
    gaussian_sample,
    kl_divergence,
    l2_normalize_rows,
    log_sum_exp,
    softmax_rows,
)


class TestSoftmaxRows:
    def test_symmetric_row_with_temperature(self):
        out = softmax_rows(np.array([[0.0, 0.0]]), temperature=2.0)
        np.testing.assert_allclose(out, [[0.5, 0.5]], atol=1e-15)

    def test_hand_evaluated_row(self):
        # exp(ln 2) = 2, exp(0) = 1  ->  (2/3, 1/3)
        out = softmax_rows(np.array([[math.log(2.0), 0.0]]), 1.0)
        np.testing.assert_allclose(out, [[2.0 / 3.0, 1.0 / 3.0]], atol=1e-15)

    def test_saturation_without_overflow(self):
        out = softmax_rows(np.array([[1000.0, 0.0]]), 1.0)
        assert np.all(np.isfinite(out))
        np.testing.assert_allclose(out, [[1.0, 0.0]], atol=1e-12)

    def test_rows_sum_to_one_bulk(self):
        rng = np.random.default_rng(0)
        z = rng.uniform(-50.0, 50.0, size=(10_000, 7))
        sums = softmax_rows(z, 3.7).sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) < 1e-12

    def test_shift_invariance(self):
        rng = np.random.default_rng(1)
        z = rng.uniform(-50.0, 50.0, size=(200, 5))
        base = softmax_rows(z, 2.0)
        for c in (-100.0, -1.0, 0.5, 37.0):
            shifted = softmax_rows(z + c, 2.0)
            assert np.max(np.abs(shifted - base)) < 1e-12
            assert np.array_equal(np.argmax(shifted, 1), np.argmax(base, 1))

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            softmax_rows(np.zeros((2, 2)), temperature=0.0)
        with pytest.raises(ValueError):
            softmax_rows(np.zeros((2, 2)), temperature=-1.0)
        with pytest.raises(ValueError):
            softmax_rows(np.array([[np.inf, 0.0]]), 1.0)


class TestLogSumExp:
    def test_two_zeros_is_ln2(self):
        assert log_sum_exp([0.0, 0.0]) == pytest.approx(math.log(2.0), abs=1e-15)

    def test_single_element_exact(self):
        assert log_sum_exp([5.0]) == 5.0

    def test_large_values_no_overflow(self):
        assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2.0), abs=1e-12)

    def test_shift_property(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            z = rng.uniform(-20.0, 20.0, size=rng.integers(1, 9))
            c = float(rng.uniform(-30.0, 30.0))
            assert log_sum_exp(z + c) == pytest.approx(log_sum_exp(z) + c, abs=1e-10)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            log_sum_exp([])


class TestKlDivergence:
    def test_identical_is_zero(self):
        assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == pytest.approx(0.0, abs=1e-15)

    def test_hand_evaluated_onehot(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_hand_evaluated_two_point(self):
        expected = 0.5 * math.log(0.5 / 0.9) + 0.5 * math.log(0.5 / 0.1)
        assert expected == pytest.approx(0.510826, abs=1e-6)
        assert kl_divergence([0.5, 0.5], [0.9, 0.1]) == pytest.approx(expected, abs=1e-12)

    def test_support_violation_raises(self):
        with pytest.raises(ValueError, match="support"):
            kl_divergence([0.5, 0.5], [1.0, 0.0])

    def test_nonnegative_and_zero_iff_equal_bulk(self):
        rng = np.random.default_rng(3)
        for _ in range(10_000):
            k = int(rng.integers(2, 8))
            p = rng.uniform(0.01, 1.0, k)
            p /= p.sum()
            q = rng.uniform(0.01, 1.0, k)
            q /= q.sum()
            assert kl_divergence(p, q) >= -1e-12
            assert kl_divergence(p, p) <= 1e-9


class TestGaussianSample:
    def test_determinism(self):
        a = gaussian_sample(Rng(42), [1.0, -2.0], 0.5, 8)
        b = gaussian_sample(Rng(42), [1.0, -2.0], 0.5, 8)
        assert np.array_equal(a, b)

    def test_sigma_to_zero_limit(self):
        mean = np.array([3.0, -1.0, 0.25])
        out = gaussian_sample(Rng(0), mean, 1e-300, 5)
        np.testing.assert_allclose(out, np.tile(mean, (5, 1)), atol=1e-290)

    def test_empty_sample(self):
        out = gaussian_sample(Rng(0), [0.0, 0.0], 1.0, 0)
        assert out.shape == (0, 2)

    def test_sample_mean_within_clt_bound(self):
        n, sigma = 100_000, 2.0
        mean = np.array([1.0, -4.0, 0.0])
        draws = gaussian_sample(Rng(7), mean, sigma, n)
        bound = 5.0 * sigma / math.sqrt(n)
        assert np.max(np.abs(draws.mean(axis=0) - mean)) < bound

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            gaussian_sample(Rng(0), [0.0], 0.0, 3)


class TestRng:
    def test_same_seed_same_stream(self):
        assert np.array_equal(Rng(9).standard_normal(16), Rng(9).standard_normal(16))

    def test_substreams_are_disjoint(self):
        base = Rng(9)
        a = base.substream(1).standard_normal(16)
        b = base.substream(2).standard_normal(16)
        assert not np.array_equal(a, b)

    def test_substream_position_independent(self):
        base = Rng(9)
        base.standard_normal(100)  # advancing the parent must not move children
        assert np.array_equal(base.substream(3).standard_normal(4),
                              Rng(9).substream(3).standard_normal(4))


class TestL2NormalizeRows:
    def test_unit_norms(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((50, 6))
        norms = np.linalg.norm(l2_normalize_rows(x), axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)

    def test_zero_row_left_alone(self):
        x = np.array([[0.0, 0.0], [3.0, 4.0]])
        out = l2_normalize_rows(x)
        assert np.array_equal(out[0], [0.0, 0.0])
        np.testing.assert_allclose(out[1], [0.6, 0.8], atol=1e-15)
