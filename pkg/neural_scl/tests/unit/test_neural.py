import math
import unittest

import numpy as np
import scipy.sparse as sp

from neural_scl.core.featurize import SparseVector
from neural_scl.core.neural import (
    UNLABELED,
    AdamState,
    JointModelParams,
    LinearParams,
    adam_step,
    bce,
    derive_seeds,
    forward,
    forward_batch,
    glorot_limit,
    init_weights,
    joint_gradients,
    joint_loss,
    loss_and_gradients,
    loss_terms,
    make_batch,
    pivot_targets,
)
from neural_scl.core.selfcheck import central_differences, gradient_check_suite
from neural_scl.utils.errors import (
    DimensionMismatchError,
    NonFiniteGradientError,
    TargetRangeError,
)


def random_params(n=6, d=3, p=2, use_bias=False, seed=0):
    params = JointModelParams(n, d, p, use_bias=use_bias)
    params.theta[...] = np.random.default_rng(seed).normal(scale=0.5, size=params.size)
    return params


class TestFlatParams(unittest.TestCase):
    """测试扁平参数布局"""

    def test_views_share_buffer(self):
        params = JointModelParams(4, 3, 2)
        self.assertEqual(params.size, 3 * 4 + 3 + 2 * 3)
        params.W_t[0, 1] = 5.0
        self.assertEqual(params.theta[12 + 1], 5.0)

    def test_bias_not_regularized(self):
        params = JointModelParams(2, 2, 1, use_bias=True)
        params.b_h[...] = 10.0
        self.assertEqual(params.regularizer(), 0.0)
        params.W_h[...] = 1.0
        self.assertEqual(params.regularizer(), 2.0)

    def test_theta_length_checked(self):
        with self.assertRaises(DimensionMismatchError):
            LinearParams(3, 1, theta=np.zeros(3))


class TestForward(unittest.TestCase):
    """测试前向计算"""

    def test_single_matches_batch(self):
        params = random_params(use_bias=True)
        X = sp.csr_matrix(np.array([[1, 0, 1, 0, 0, 1], [0, 0, 0, 0, 0, 0], [0, 1, 0, 0, 1, 0]], dtype=float))
        batch = forward_batch(params, X)
        for i in range(X.shape[0]):
            row = X[i]
            x = SparseVector(row.indices.astype(np.int64), row.data.copy(), 6)
            single = forward(params, x)
            np.testing.assert_allclose(single.h, batch.H[i], rtol=1e-14, atol=1e-15)
            self.assertAlmostEqual(single.y_task, batch.y_task[i], places=14)
            np.testing.assert_allclose(single.y_pivot, batch.y_pivot[i], rtol=1e-14)

    def test_empty_row_gives_half_without_bias(self):
        params = random_params()
        result = forward(params, SparseVector(np.zeros(0, dtype=np.int64), np.zeros(0), 6))
        self.assertEqual(result.y_task, 0.5)
        np.testing.assert_array_equal(result.y_pivot, [0.5, 0.5])

    def test_dimension_checked(self):
        with self.assertRaises(DimensionMismatchError):
            forward(random_params(), SparseVector(np.array([0]), np.ones(1), 5))


class TestLoss(unittest.TestCase):
    """测试交叉熵与联合损失"""

    def test_bce_values(self):
        self.assertAlmostEqual(bce(0.5, 1.0), math.log(2), places=14)
        self.assertAlmostEqual(bce(0.9, 0.0), -math.log(0.1), places=12)

    def test_bce_clamps_prediction(self):
        self.assertAlmostEqual(bce(0.0, 1.0), -math.log(1e-12), places=6)
        self.assertTrue(np.isfinite(bce(1.0, 0.0)))

    def test_bce_rejects_targets_out_of_range(self):
        with self.assertRaises(TargetRangeError):
            bce(0.5, 1.5)

    def test_pivot_targets_ignore_masking(self):
        X = sp.csr_matrix(np.array([[1, 0, 1], [0, 1, 0]], dtype=float))
        batch = make_batch(X, None, [0, 2], mask_pivots_in_input=True)
        np.testing.assert_array_equal(batch.targets, pivot_targets(X, [0, 2]))
        np.testing.assert_array_equal(batch.targets, [[1, 1], [0, 0]])
        self.assertEqual(batch.X[:, [0, 2]].nnz, 0)

    def test_unlabeled_rows_have_no_task_term(self):
        params = random_params()
        X = sp.csr_matrix(np.eye(6)[:3])
        unlabeled = make_batch(X, None, [1, 4])
        marked = make_batch(X, np.array([UNLABELED] * 3), [1, 4])
        self.assertEqual(loss_terms(params, unlabeled).task, 0.0)
        self.assertEqual(joint_loss(params, unlabeled, 2.0, 0.1), joint_loss(params, marked, 2.0, 0.1))

    def test_total_combines_terms(self):
        params = random_params()
        X = sp.csr_matrix(np.array([[1, 1, 0, 0, 0, 0], [0, 0, 1, 0, 1, 1]], dtype=float))
        batch = make_batch(X, np.array([1, 0]), [0, 5])
        terms = loss_terms(params, batch)
        self.assertAlmostEqual(joint_loss(params, batch, 3.0, 0.5),
                               terms.task + 3.0 * terms.pivot + 0.5 * terms.regularizer, places=12)

    def test_lambda_zero_ignores_pivot_head(self):
        params = random_params()
        X = sp.csr_matrix(np.array([[1, 0, 1, 0, 0, 0]], dtype=float))
        batch = make_batch(X, np.array([1]), [0, 3])
        _, grad = loss_and_gradients(params, batch, 0.0, 0.0)
        np.testing.assert_array_equal(params.like(grad).W_p, np.zeros((2, 3)))


class TestGradients(unittest.TestCase):
    """测试解析梯度（对比中心差分）"""

    def test_gradient_check_suite(self):
        result = gradient_check_suite(trials=25, seed=11)
        self.assertTrue(result.passed, result.failures[:3])

    def test_untouched_columns_only_regularized(self):
        params = random_params(n=8, seed=2)
        X = sp.csr_matrix(np.array([[1, 0, 1, 0, 0, 0, 0, 0]], dtype=float))
        batch = make_batch(X, np.array([1]), [0, 2])
        _, grad = loss_and_gradients(params, batch, 1.0, 0.1)
        W_h_grad = params.like(grad).W_h
        np.testing.assert_allclose(W_h_grad[:, 3:], 0.1 * params.W_h[:, 3:], rtol=1e-14)

    def test_bias_gradients(self):
        params = random_params(n=5, d=2, p=2, use_bias=True, seed=4)
        X = sp.csr_matrix(np.array([[1, 0, 1, 0, 1], [0, 1, 0, 1, 0]], dtype=float))
        batch = make_batch(X, np.array([0, UNLABELED]), [0, 3])
        Z = forward_batch(params, batch.X).Z
        self.assertGreater(np.min(np.abs(Z)), 1e-4)
        _, analytic = loss_and_gradients(params, batch, 1.0, 0.1)
        numeric = central_differences(params.theta, lambda: joint_loss(params, batch, 1.0, 0.1))
        np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-7)

    def test_joint_gradients_sigmoid_core(self):
        params = random_params(n=5, d=3, p=2, seed=6)
        X = sp.csr_matrix(np.array([[1, 1, 0, 0, 1], [0, 1, 1, 1, 0], [1, 0, 0, 1, 0]], dtype=float))
        batch = make_batch(X, np.array([1, 0, UNLABELED]), [1, 3])
        grads = joint_gradients(params, batch, 2.0, 0.1, activation='sigmoid')
        self.assertEqual(grads.dims, params.dims)
        numeric = central_differences(params.theta, lambda: joint_loss(params, batch, 2.0, 0.1, 'sigmoid'))
        np.testing.assert_allclose(grads.theta, numeric, rtol=1e-4, atol=1e-7)


class TestAdam(unittest.TestCase):
    """测试 Adam 更新"""

    def test_first_step_moves_by_learning_rate(self):
        theta = np.array([1.0, -2.0, 0.5])
        state = AdamState(3, lr=0.01)
        adam_step(theta, np.array([0.3, -4.0, 0.0]), state)
        np.testing.assert_allclose(theta, [0.99, -1.99, 0.5], rtol=1e-6)
        self.assertEqual(state.t, 1)

    def test_two_steps_match_reference(self):
        theta = np.array([0.2])
        state = AdamState(1, lr=0.1, beta1=0.9, beta2=0.999, epsilon=1e-8)
        m = v = 0.0
        expected = 0.2
        for t, g in enumerate([1.0, -0.5], start=1):
            adam_step(theta, np.array([g]), state)
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            expected -= 0.1 * (m / (1 - 0.9 ** t)) / (math.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
        self.assertAlmostEqual(theta[0], expected, places=12)

    def test_small_steps_decrease_convex_loss(self):
        target = np.array([1.5, -0.5, 3.0, 0.25])
        theta = np.zeros(4)
        state = AdamState(4, lr=1e-4)
        losses = [0.5 * np.sum((theta - target) ** 2)]
        for _ in range(200):
            adam_step(theta, theta - target, state)
            losses.append(0.5 * np.sum((theta - target) ** 2))
        self.assertTrue(np.all(np.diff(losses) < 0.0))
        self.assertEqual(state.t, 200)

    def test_non_finite_gradient(self):
        with self.assertRaises(NonFiniteGradientError):
            adam_step(np.zeros(2), np.array([np.nan, 0.0]), AdamState(2))

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            adam_step(np.zeros(2), np.zeros(3), AdamState(2))


class TestInitialization(unittest.TestCase):
    """测试初始化与种子派生"""

    def test_glorot_bounds(self):
        params = init_weights((50, 10, 4), seed=3)
        self.assertLessEqual(np.max(np.abs(params.W_h)), glorot_limit(50, 10))
        self.assertLessEqual(np.max(np.abs(params.W_p)), glorot_limit(10, 4))
        self.assertGreater(np.std(params.W_h), 0.0)

    def test_same_seed_same_weights(self):
        a = init_weights((20, 5, 3), seed=9, use_bias=True)
        b = init_weights((20, 5, 3), seed=9, use_bias=True)
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.b_h, np.zeros(5))

    def test_derived_seeds(self):
        seeds = derive_seeds(5)
        self.assertEqual(set(seeds), {'init', 'shuffle', 'split'})
        self.assertEqual(seeds, derive_seeds(5))
        self.assertEqual(len(set(seeds.values())), 3)
        self.assertNotEqual(seeds, derive_seeds(6))


if __name__ == '__main__':
    unittest.main()
