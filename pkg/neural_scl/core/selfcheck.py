"""
性质自检套件

- gradient_check_suite：联合模型与线性模型的解析梯度对比中心差分
- mi_oracle_suite：互信息与逐项求和的 2×2 列联表公式穷举对比
- svd_suite：截断SVD与稠密特征分解的子空间对比
- welch_suite：Welch 检验与 scipy.stats 参考实现对比

每个套件返回 SuiteResult，由 `neural-scl selfcheck` 汇总输出，测试中也直接调用。
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np
import scipy.sparse as sp
from scipy import stats as scipy_stats

from neural_scl.core.linalg import principal_angles, truncated_svd
from neural_scl.core.neural import (
    UNLABELED,
    JointModelParams,
    LinearParams,
    forward_batch,
    joint_loss,
    linear_loss_and_gradients,
    loss_and_gradients,
    make_batch,
)
from neural_scl.core.pivot import mutual_information, mutual_information_from_counts
from neural_scl.core.stats import welch_one_tailed

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
GRADIENT_RTOL = 1e-4
GRADIENT_ATOL = 1e-7
# 预激活离 ReLU 拐点太近时差分会跨过拐点，重新抽取实例
KINK_MARGIN = 1e-3


@dataclass
class SuiteResult:
    name: str
    passed: bool
    trials: int
    max_error: float
    failures: List[str] = field(default_factory=list)

    def summary_row(self) -> List[str]:
        return [self.name, 'PASS' if self.passed else 'FAIL', str(self.trials), f"{self.max_error:.3e}"]


def _gradient_error(analytic: float, numeric: float) -> float:
    """超出容差的部分按相对误差报告；未超出时返回实际相对误差"""
    scale = max(abs(analytic), abs(numeric))
    return abs(analytic - numeric) / max(scale, GRADIENT_ATOL / GRADIENT_RTOL)


def _within_tolerance(analytic: float, numeric: float) -> bool:
    return abs(analytic - numeric) <= GRADIENT_RTOL * max(abs(analytic), abs(numeric)) + GRADIENT_ATOL


def central_differences(theta: np.ndarray, loss: Callable[[], float], step: float = FD_STEP) -> np.ndarray:
    """对 theta 的每个元素做中心差分（原地扰动后恢复）"""
    numeric = np.empty_like(theta)
    for i in range(len(theta)):
        original = theta[i]
        theta[i] = original + step
        upper = loss()
        theta[i] = original - step
        lower = loss()
        theta[i] = original
        numeric[i] = (upper - lower) / (2.0 * step)
    return numeric


def _random_sparse(rng: np.random.Generator, rows: int, n: int) -> sp.csr_matrix:
    dense = (rng.random((rows, n)) < 0.4).astype(np.float64)
    return sp.csr_matrix(dense)


def _random_joint_instance(rng: np.random.Generator):
    n = int(rng.integers(2, 11))
    d = int(rng.integers(1, 7))
    p = int(rng.integers(1, min(3, n) + 1))
    rows = int(rng.integers(1, 7))
    use_bias = bool(rng.random() < 0.3)
    activation = 'sigmoid' if rng.random() < 0.2 else 'relu'
    X = _random_sparse(rng, rows, n)
    labels = rng.integers(0, 2, size=rows)
    labels = np.where(rng.random(rows) < 0.5, labels, UNLABELED)
    pivots = np.sort(rng.choice(n, size=p, replace=False))
    batch = make_batch(X, labels, pivots, mask_pivots_in_input=bool(rng.random() < 0.3))
    params = JointModelParams(n, d, p, use_bias=use_bias)
    params.theta[...] = rng.normal(scale=0.3, size=params.size)
    return params, batch, activation


def gradient_check_suite(trials: int = 100, seed: int = 0) -> SuiteResult:
    """
    解析梯度对比中心差分（步长 1e-5）

    联合模型实例满足 n ≤ 10、d ≤ 6、p ≤ 3，批次混合有标签与无标签行，
    λ ∈ {0, 1, 100}，ρ ∈ {0, 0.1}；另外对每个实例检查一次线性模型梯度。
    """
    rng = np.random.default_rng(seed)
    failures: List[str] = []
    max_error = 0.0
    done = 0
    while done < trials:
        params, batch, activation = _random_joint_instance(rng)
        if activation == 'relu':
            Z = forward_batch(params, batch.X, activation).Z
            if not params.use_bias:
                # 空行的预激活恒为0，扰动不会让它越过拐点
                Z = Z[np.diff(batch.X.indptr) > 0]
            if Z.size and np.min(np.abs(Z)) < KINK_MARGIN:
                continue
        lam = float(rng.choice([0.0, 1.0, 100.0]))
        rho = float(rng.choice([0.0, 0.1]))

        _, analytic = loss_and_gradients(params, batch, lam, rho, activation)
        numeric = central_differences(params.theta, lambda: joint_loss(params, batch, lam, rho, activation))
        for i, (a, f) in enumerate(zip(analytic, numeric)):
            max_error = max(max_error, _gradient_error(a, f))
            if not _within_tolerance(a, f):
                failures.append(f"joint trial {done} param {i}: analytic={a:.10g} numeric={f:.10g} "
                                f"(λ={lam}, ρ={rho}, {activation})")

        linear = LinearParams(params.n, int(rng.integers(1, 4)))
        linear.theta[...] = rng.normal(scale=0.3, size=linear.size)
        targets = (rng.random((batch.n_rows, linear.k)) < 0.5).astype(np.float64)
        _, analytic = linear_loss_and_gradients(linear, batch.X, targets, rho)
        numeric = central_differences(
            linear.theta, lambda: linear_loss_and_gradients(linear, batch.X, targets, rho)[0])
        for i, (a, f) in enumerate(zip(analytic, numeric)):
            max_error = max(max_error, _gradient_error(a, f))
            if not _within_tolerance(a, f):
                failures.append(f"linear trial {done} param {i}: analytic={a:.10g} numeric={f:.10g}")
        done += 1
    return SuiteResult('gradient_check', not failures, trials, max_error, failures)


def plugin_mi_oracle(n11: int, n10: int, n01: int, n00: int) -> float:
    """逐项求和的互信息参考实现（自然对数）"""
    n = n11 + n10 + n01 + n00
    cells = {(1, 1): n11, (1, 0): n10, (0, 1): n01, (0, 0): n00}
    p_f = {1: (n11 + n10) / n, 0: (n01 + n00) / n}
    p_y = {1: (n11 + n01) / n, 0: (n10 + n00) / n}
    total = 0.0
    for (f, y), count in cells.items():
        if count == 0 or p_f[f] == 0 or p_y[y] == 0:
            continue
        joint = count / n
        total += joint * math.log(joint / (p_f[f] * p_y[y]))
    return total


def _vectors_from_counts(n11: int, n10: int, n01: int, n00: int):
    f = [1] * (n11 + n10) + [0] * (n01 + n00)
    y = [1] * n11 + [0] * n10 + [1] * n01 + [0] * n00
    return f, y


def mi_oracle_suite(max_count: int = 6, tolerance: float = 1e-12) -> SuiteResult:
    """穷举所有单元格计数不超过 max_count 的 2×2 列联表"""
    failures: List[str] = []
    max_error = 0.0
    trials = 0
    for n11, n10, n01, n00 in itertools.product(range(max_count + 1), repeat=4):
        if n11 + n10 + n01 + n00 == 0:
            continue
        trials += 1
        f, y = _vectors_from_counts(n11, n10, n01, n00)
        expected = plugin_mi_oracle(n11, n10, n01, n00)
        value = mutual_information(f, y)
        swapped = mutual_information(y, f)
        counted = float(mutual_information_from_counts(n11, n10, n01, n00))
        error = max(abs(value - expected), abs(swapped - value), abs(counted - expected))
        max_error = max(max_error, error)
        if error > tolerance or value < 0.0:
            failures.append(f"table ({n11},{n10},{n01},{n00}): mi={value!r} oracle={expected!r} "
                            f"swapped={swapped!r}")
    return SuiteResult('mi_oracle', not failures, trials, max_error, failures)


def svd_suite(trials: int = 50, seed: int = 0, max_rows: int = 200, max_cols: int = 100,
              max_k: int = 10, angle_tol: float = 1e-6, ortho_tol: float = 1e-8) -> SuiteResult:
    """
    截断SVD对比 numpy 的稠密分解

    第 k 与第 k+1 个奇异值过于接近时子空间不唯一，这样的实例会被重新抽取。
    """
    rng = np.random.default_rng(seed)
    failures: List[str] = []
    max_error = 0.0
    done = 0
    while done < trials:
        n = int(rng.integers(2, max_rows + 1))
        p = int(rng.integers(1, max_cols + 1))
        k = int(rng.integers(1, min(max_k, n, p) + 1))
        W = rng.normal(size=(n, p))
        reference = np.linalg.svd(W, full_matrices=False)
        sigma_ref = reference[1]
        if k < len(sigma_ref) and (sigma_ref[k - 1] - sigma_ref[k]) < 1e-3 * sigma_ref[0]:
            continue

        result = truncated_svd(W, k)
        angles = principal_angles(result.theta, reference[0][:, :k]) if result.k == k else np.array([np.inf])
        ortho = float(np.max(np.abs(result.theta.T @ result.theta - np.eye(result.k)))) if result.k else 0.0
        monotone = bool(np.all(np.diff(result.singular_values) <= 1e-12 * sigma_ref[0]))
        error = max(float(np.max(angles)), ortho)
        max_error = max(max_error, error)
        if result.k != k or np.max(angles) >= angle_tol or ortho >= ortho_tol or not monotone:
            failures.append(f"trial {done} ({n}x{p}, k={k}): max angle={np.max(angles):.3e}, "
                            f"orthonormality={ortho:.3e}, monotone={monotone}")
        done += 1
    return SuiteResult('svd', not failures, trials, max_error, failures)


def welch_suite(trials: int = 50, seed: int = 0, tolerance: float = 1e-8) -> SuiteResult:
    """Welch t、自由度与单尾 p 值对比 scipy.stats.ttest_ind(equal_var=False)"""
    rng = np.random.default_rng(seed)
    failures: List[str] = []
    max_error = 0.0
    for trial in range(trials):
        a = rng.normal(0.8, 0.02, size=int(rng.integers(2, 11)))
        b = rng.normal(0.78, 0.03, size=int(rng.integers(2, 11)))
        ours = welch_one_tailed(a, b)
        reference = scipy_stats.ttest_ind(a, b, equal_var=False, alternative='greater')
        va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
        df_ref = (va + vb) ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1))
        errors = [abs(ours.t_statistic - reference.statistic),
                  abs(ours.degrees_of_freedom - df_ref),
                  abs(ours.p_value_one_tailed - reference.pvalue)]
        max_error = max(max_error, *errors)
        if max(errors) > tolerance:
            failures.append(f"trial {trial}: t={ours.t_statistic!r}/{reference.statistic!r}, "
                            f"df={ours.degrees_of_freedom!r}/{df_ref!r}, "
                            f"p={ours.p_value_one_tailed!r}/{reference.pvalue!r}")

    zero = welch_one_tailed([0.7, 0.8, 0.9], [0.7, 0.8, 0.9])
    if zero.t_statistic != 0.0 or zero.p_value_one_tailed != 0.5:
        failures.append(f"identical samples: t={zero.t_statistic!r}, p={zero.p_value_one_tailed!r}")
    return SuiteResult('welch', not failures, trials + 1, max_error, failures)


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    'gradient': gradient_check_suite,
    'mi': mi_oracle_suite,
    'svd': svd_suite,
    'welch': welch_suite,
}


def run_suites(names=None, seed: int = 0) -> List[SuiteResult]:
    """按名称运行自检套件（默认全部）"""
    results = []
    for name in names or list(SUITES):
        suite = SUITES[name]
        result = suite(seed=seed) if name != 'mi' else suite()
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"自检 {result.name}: {'通过' if result.passed else '失败'}，"
                          f"{result.trials} 项，最大误差 {result.max_error:.3e}")
        for failure in result.failures[:10]:
            logger.error(f"  {failure}")
        results.append(result)
    return results
