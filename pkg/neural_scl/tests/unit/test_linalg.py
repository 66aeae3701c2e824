import unittest

import numpy as np

from neural_scl.core.linalg import (
    fix_signs,
    jacobi_eigh,
    principal_angles,
    round_robin_pairs,
    truncated_svd,
)
from neural_scl.core.selfcheck import svd_suite
from neural_scl.utils.errors import ConfigError, DimensionMismatchError


class TestRoundRobin(unittest.TestCase):
    """测试轮转配对"""

    def test_every_pair_once(self):
        for m in (2, 5, 8):
            seen = []
            for P, Q in round_robin_pairs(m):
                # 同一轮中的下标互不相交
                members = list(P) + list(Q)
                self.assertEqual(len(members), len(set(members)))
                seen.extend(zip(P.tolist(), Q.tolist()))
            expected = {(p, q) for p in range(m) for q in range(p + 1, m)}
            self.assertEqual(len(seen), len(expected))
            self.assertEqual(set(seen), expected)

    def test_single_index(self):
        self.assertTrue(all(len(P) == 0 for P, _ in round_robin_pairs(1)))


class TestJacobi(unittest.TestCase):
    """测试 Jacobi 特征分解"""

    def test_matches_numpy(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(7, 7))
        G = A @ A.T
        values, vectors = jacobi_eigh(G)
        np.testing.assert_allclose(values, np.sort(np.linalg.eigvalsh(G))[::-1], rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(vectors.T @ vectors, np.eye(7), atol=1e-10)
        np.testing.assert_allclose(G @ vectors, vectors * values, atol=1e-8)

    def test_diagonal_input(self):
        values, vectors = jacobi_eigh(np.diag([1.0, 3.0, 2.0]))
        np.testing.assert_array_equal(values, [3.0, 2.0, 1.0])
        np.testing.assert_array_equal(np.abs(vectors), np.eye(3)[:, [1, 2, 0]])

    def test_requires_square(self):
        with self.assertRaises(DimensionMismatchError):
            jacobi_eigh(np.zeros((2, 3)))


class TestTruncatedSVD(unittest.TestCase):
    """测试截断SVD"""

    def test_reference_suite(self):
        result = svd_suite(trials=15, seed=5, max_rows=60, max_cols=30)
        self.assertTrue(result.passed, result.failures[:3])

    def test_singular_values_and_subspace(self):
        rng = np.random.default_rng(3)
        W = rng.normal(size=(40, 12))
        result = truncated_svd(W, 4)
        U_ref, s_ref, _ = np.linalg.svd(W, full_matrices=False)
        np.testing.assert_allclose(result.singular_values, s_ref[:4], rtol=1e-9)
        self.assertLess(np.max(principal_angles(result.theta, U_ref[:, :4])), 1e-6)
        np.testing.assert_allclose(W @ result.right_vectors, result.theta * result.singular_values, atol=1e-9)

    def test_sign_convention(self):
        result = truncated_svd(np.random.default_rng(8).normal(size=(10, 5)), 3)
        rows = np.argmax(np.abs(result.theta), axis=0)
        self.assertTrue(np.all(result.theta[rows, np.arange(3)] > 0))

    def test_zero_singular_value_dropped(self):
        u = np.arange(1.0, 7.0)[:, None]
        W = np.hstack([u, np.zeros_like(u)])
        result = truncated_svd(W, 2)
        self.assertEqual(result.k, 1)
        self.assertEqual(result.dropped, 1)
        np.testing.assert_allclose(result.theta[:, 0], u[:, 0] / np.linalg.norm(u), rtol=1e-12)

    def test_zero_matrix(self):
        result = truncated_svd(np.zeros((4, 3)), 2)
        self.assertEqual(result.k, 0)
        self.assertEqual(result.theta.shape, (4, 0))

    def test_k_validated(self):
        with self.assertRaises(DimensionMismatchError):
            truncated_svd(np.ones((3, 2)), 3)
        with self.assertRaises(ConfigError):
            truncated_svd(np.ones((3, 2)), 0)

    def test_fix_signs_flips_both(self):
        U = np.array([[-3.0], [1.0]])
        V = np.array([[2.0]])
        U2, V2 = fix_signs(U, V)
        np.testing.assert_array_equal(U2, [[3.0], [-1.0]])
        np.testing.assert_array_equal(V2, [[-2.0]])


if __name__ == '__main__':
    unittest.main()
