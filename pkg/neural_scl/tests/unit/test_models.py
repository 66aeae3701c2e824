import unittest
from dataclasses import replace

import numpy as np
from scipy.special import expit

from neural_scl.config import AESCLConfig, ClassicSCLConfig, LogRegConfig
from neural_scl.core.evaluation import accuracy, evaluate
from neural_scl.core.models import predict_joint, train_aescl, train_classic_scl, train_joint, train_logreg
from neural_scl.core.models.aescl import train_representation
from neural_scl.core.models.classic_scl import scl_projection
from neural_scl.core.models.network import interleave
from neural_scl.core.neural import derive_seeds, init_weights
from neural_scl.core.pivot import PivotSet
from neural_scl.tests.helpers import SMALL_TRAIN, separable_matrix, small_pair
from neural_scl.utils.errors import (
    ConfigError,
    DegenerateProjectionError,
    DimensionMismatchError,
    MissingLabelsError,
)


class TestInterleave(unittest.TestCase):
    """测试批次交替顺序"""

    def test_strict_alternation_then_tail(self):
        order = [(flag, int(rows[0])) for flag, rows in interleave(
            [np.array([0]), np.array([1])], [np.array([10]), np.array([11]), np.array([12])])]
        self.assertEqual(order, [(True, 0), (False, 10), (True, 1), (False, 11), (False, 12)])


class TestEvaluation(unittest.TestCase):
    """测试准确率"""

    def test_accuracy(self):
        self.assertEqual(accuracy([1, 0, 1, 1], [1, 0, 0, 1]), 0.75)
        with self.assertRaises(DimensionMismatchError):
            accuracy([], [])

    def test_evaluate_needs_labels(self):
        model = train_logreg(separable_matrix(), None, LogRegConfig(epochs=1))
        with self.assertRaises(MissingLabelsError):
            evaluate(model, separable_matrix().without_labels())


class TestLogReg(unittest.TestCase):
    """测试逻辑回归"""

    def test_learns_separable_data(self):
        train = separable_matrix()
        model = train_logreg(train, separable_matrix(seed=1), LogRegConfig(lr=0.1, epochs=30, rho=0.0))
        self.assertEqual(evaluate(model, train), 1.0)
        self.assertEqual(len(model.validation_curve), 30)
        self.assertEqual(model.best_epoch, int(np.argmin(model.validation_curve)))

    def test_deterministic(self):
        cfg = LogRegConfig(epochs=3, seed=4)
        a = train_logreg(separable_matrix(), None, cfg)
        b = train_logreg(separable_matrix(), None, cfg)
        np.testing.assert_array_equal(a.params.theta, b.params.theta)

    def test_requires_labels(self):
        with self.assertRaises(MissingLabelsError):
            train_logreg(separable_matrix().without_labels(), None, LogRegConfig())


def task_only_training(train, val, cfg):
    """只有任务头的单隐藏层 ReLU 网络：稠密计算、逐批 Adam，按验证集平均 BCE 选 epoch"""
    seeds = derive_seeds(cfg.seed)
    init = init_weights((train.dim, cfg.d, 1), seeds['init'])
    W_h, w_t = init.W_h.copy(), init.W_t[0].copy()
    m = [np.zeros_like(W_h), np.zeros_like(w_t)]
    v = [np.zeros_like(W_h), np.zeros_like(w_t)]
    X, y = train.X.toarray(), train.labels
    X_val, y_val = val.X.toarray(), val.labels
    rng = np.random.default_rng(seeds['shuffle'])
    t = 0
    curve, snapshots = [], []
    for _ in range(cfg.epochs):
        order = rng.permutation(train.n_rows)
        rng.permutation(0)
        for start in range(0, len(order), cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            Z = X[rows] @ W_h.T
            H = np.maximum(Z, 0.0)
            dA = expit(H @ w_t) - y[rows]
            grads = [((np.outer(dA, w_t) * (Z > 0)).T @ X[rows]), dA @ H]
            t += 1
            for param, g, m_i, v_i in zip((W_h, w_t), grads, m, v):
                m_i[...] = cfg.beta1 * m_i + (1 - cfg.beta1) * g
                v_i[...] = cfg.beta2 * v_i + (1 - cfg.beta2) * g * g
                m_hat = m_i / (1 - cfg.beta1 ** t)
                v_hat = v_i / (1 - cfg.beta2 ** t)
                param -= cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        probs = np.clip(expit(np.maximum(X_val @ W_h.T, 0.0) @ w_t), 1e-12, 1 - 1e-12)
        curve.append(float(-np.mean(y_val * np.log(probs) + (1 - y_val) * np.log(1 - probs))))
        snapshots.append((W_h.copy(), w_t.copy()))
    best = int(np.argmin(curve))
    return curve, best, snapshots[best]


class TestJointModel(unittest.TestCase):
    """测试联合SCL模型"""

    @classmethod
    def setUpClass(cls):
        cls.prepared, cls.vocab, cls.pivots = small_pair()

    def train(self, cfg=SMALL_TRAIN, unlabeled='default'):
        p = self.prepared
        return train_joint(p.train, p.validation, p.unlabeled if unlabeled == 'default' else unlabeled,
                           self.pivots, cfg)

    def test_single_epoch(self):
        model = self.train(replace(SMALL_TRAIN, epochs=1))
        self.assertEqual(len(model.validation_curve), 1)
        self.assertEqual(model.best_epoch, 0)

    def test_best_epoch_is_first_minimum(self):
        model = self.train()
        self.assertEqual(len(model.validation_curve), SMALL_TRAIN.epochs)
        self.assertEqual(model.best_epoch, int(np.argmin(model.validation_curve)))

    def test_same_seed_same_model(self):
        a, b = self.train(), self.train()
        np.testing.assert_array_equal(a.params.theta, b.params.theta)
        self.assertEqual(a.validation_curve, b.validation_curve)

    def test_different_seed_different_model(self):
        a = self.train()
        b = self.train(SMALL_TRAIN.with_seed(1))
        self.assertFalse(np.array_equal(a.params.theta, b.params.theta))

    def test_without_unlabeled_data(self):
        model = self.train(unlabeled=None)
        self.assertEqual(model.params.dims, (self.vocab.n, SMALL_TRAIN.d, len(self.pivots)))

    def test_without_pivot_and_l2_terms_matches_task_only_training(self):
        cfg = replace(SMALL_TRAIN, lam=0.0, rho=0.0, epochs=4)
        model = self.train(cfg, unlabeled=None)
        curve, best, (W_h, w_t) = task_only_training(self.prepared.train, self.prepared.validation, cfg)
        np.testing.assert_allclose(model.validation_curve, curve, rtol=1e-10)
        self.assertEqual(model.best_epoch, best)
        np.testing.assert_allclose(model.params.W_h, W_h, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(model.params.W_t[0], w_t, rtol=1e-9, atol=1e-12)
        init = init_weights(model.params.dims, derive_seeds(cfg.seed)['init'])
        np.testing.assert_array_equal(model.params.W_p, init.W_p)

    def test_predictions_are_binary(self):
        model = self.train()
        predictions = model.predict(self.prepared.target_test.X)
        self.assertTrue(set(np.unique(predictions)) <= {0, 1})
        acc = evaluate(model, self.prepared.target_test)
        self.assertGreaterEqual(acc, 0.0)
        self.assertLessEqual(acc, 1.0)

    def test_single_prediction_matches_batch(self):
        model = self.train(replace(SMALL_TRAIN, mask_pivots_in_input=True))
        X = self.prepared.validation.X
        probs = model.predict_proba(X)
        for i in range(5):
            probability, label = predict_joint(model, self.prepared.validation.row(i))
            self.assertAlmostEqual(probability, probs[i], places=12)
            self.assertEqual(label, int(probs[i] >= 0.5))

    def test_masked_model_ignores_pivot_columns(self):
        model = self.train(replace(SMALL_TRAIN, mask_pivots_in_input=True))
        X = self.prepared.validation.X.tolil()
        X[:, list(self.pivots.indices)] = 1.0
        np.testing.assert_allclose(model.predict_proba(X.tocsr()),
                                       model.predict_proba(self.prepared.validation.X), rtol=1e-14)

    def test_pivot_out_of_range(self):
        bad = PivotSet((self.vocab.n,), None, 'random', p=1)
        with self.assertRaises(DimensionMismatchError):
            train_joint(self.prepared.train, None, None, bad, SMALL_TRAIN)

    def test_requires_labeled_rows(self):
        with self.assertRaises(MissingLabelsError):
            train_joint(self.prepared.train.without_labels(), None, None, self.pivots, SMALL_TRAIN)


class TestAESCL(unittest.TestCase):
    """测试 AE-SCL 基线"""

    @classmethod
    def setUpClass(cls):
        cls.prepared, cls.vocab, cls.pivots = small_pair()
        cls.cfg = AESCLConfig(hidden=5, epochs=2, batch_size=25)
        cls.model = train_aescl(cls.prepared.train, cls.prepared.validation, cls.prepared.unlabeled,
                                cls.pivots, cls.cfg, LogRegConfig(epochs=3))

    def test_feature_dimension(self):
        features = self.model.features(self.prepared.validation.X)
        self.assertEqual(features.shape, (self.prepared.validation.n_rows, self.vocab.n + 5))

    def test_representation_ignores_pivots(self):
        X = self.prepared.validation.X.tolil()
        X[:, list(self.pivots.indices)] = 0.0
        a = self.model.features(X.tocsr()).toarray()[:, self.vocab.n:]
        b = self.model.features(self.prepared.validation.X).toarray()[:, self.vocab.n:]
        np.testing.assert_allclose(a, b, rtol=1e-14)

    def test_phase_one_never_updates_pivot_columns(self):
        rows = self.prepared.unlabeled
        result = train_representation(rows, self.pivots, self.cfg, seed=2)
        init = init_weights(result.params.dims, derive_seeds(2)['init'], use_bias=True)
        pivot_columns = list(self.pivots.indices)
        np.testing.assert_array_equal(result.params.W_h[:, pivot_columns], init.W_h[:, pivot_columns])
        self.assertFalse(np.array_equal(result.params.W_h, init.W_h))

    def test_sigmoid_hidden_units(self):
        hidden = self.model.features(self.prepared.validation.X).toarray()[:, self.vocab.n:]
        self.assertTrue(np.all((hidden > 0.0) & (hidden < 1.0)))

    def test_predict(self):
        acc = evaluate(self.model, self.prepared.target_test)
        self.assertGreaterEqual(acc, 0.0)
        self.assertEqual(self.model.classifier.dim, self.vocab.n + 5)


class TestClassicSCL(unittest.TestCase):
    """测试经典SCL基线"""

    @classmethod
    def setUpClass(cls):
        cls.prepared, cls.vocab, cls.pivots = small_pair()

    def test_projection_dimension(self):
        model = train_classic_scl(self.prepared.train, self.prepared.unlabeled, self.pivots, k=3,
                                  cfg=ClassicSCLConfig(k=3, epochs=2), logreg_cfg=LogRegConfig(epochs=3),
                                  source_val=self.prepared.validation)
        self.assertEqual(model.theta.shape, (self.vocab.n - len(self.pivots), 3))
        np.testing.assert_allclose(model.theta.T @ model.theta, np.eye(3), atol=1e-8)
        features = model.features(self.prepared.target_test.X)
        self.assertEqual(features.shape[1], self.vocab.n + 3)

    def test_k_cannot_exceed_p(self):
        with self.assertRaises(ConfigError):
            train_classic_scl(self.prepared.train, self.prepared.unlabeled, self.pivots, k=len(self.pivots) + 1)

    def test_zero_predictor_column(self):
        W = np.array([[1.0, 0.0, 2.0], [0.5, 0.0, 1.0]])
        with self.assertRaises(DegenerateProjectionError) as ctx:
            scl_projection(W, 1, pivot_ids=[7, 9, 11])
        self.assertEqual(ctx.exception.failing_pivots, [9])

    def test_projection_of_rank_one_weights(self):
        W = np.outer([1.0, 2.0, 2.0], [1.0, -1.0])
        result = scl_projection(W, 1)
        np.testing.assert_allclose(result.theta[:, 0], [1 / 3, 2 / 3, 2 / 3], rtol=1e-12)


if __name__ == '__main__':
    unittest.main()
