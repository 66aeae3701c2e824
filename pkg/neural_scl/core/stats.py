"""
Welch 单尾 t 检验

t 分布的尾概率由正则化不完全 beta 函数给出：
    P(T > t) = ½·I_x(df/2, ½)，x = df / (df + t²)，t > 0
不完全 beta 函数用 Lentz 方法求连分式，并利用对称关系 I_x(a, b) = 1 − I_{1−x}(b, a) 保证收敛。
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from neural_scl.utils.errors import DegenerateInputError, NeuralSCLError

logger = logging.getLogger(__name__)

_FPMIN = 1e-300
_EPS = 1e-16
_MAX_ITER = 10000


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """修正 Lentz 方法计算不完全 beta 函数的连分式"""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        # 偶数项
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        # 奇数项
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise NeuralSCLError(f"不完全 beta 连分式未收敛: a={a}, b={b}, x={x}")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """
    正则化不完全 beta 函数 I_x(a, b)

    Args:
        x: [0, 1] 内的自变量
        a, b: 正参数

    Returns:
        I_x(a, b)
    """
    if a <= 0 or b <= 0:
        raise DegenerateInputError(f"beta 函数参数必须为正: a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_sf(t: float, df: float) -> float:
    """Student t 分布的上尾概率 P(T > t)"""
    if df <= 0:
        raise DegenerateInputError(f"自由度必须为正: {df}")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(x, 0.5 * df, 0.5)
    return tail if t > 0 else 1.0 - tail


def t_cdf(t: float, df: float) -> float:
    """Student t 分布的累积分布函数 P(T ≤ t)"""
    if df <= 0:
        raise DegenerateInputError(f"自由度必须为正: {df}")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(x, 0.5 * df, 0.5)
    return tail if t < 0 else 1.0 - tail


@dataclass(frozen=True)
class WelchResult:
    """Welch 检验结果：检验 mean_a > mean_b"""

    t_statistic: float
    degrees_of_freedom: float
    p_value_one_tailed: float
    mean_a: float
    mean_b: float

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value_one_tailed < alpha


def welch_one_tailed(sample_a: Sequence[float], sample_b: Sequence[float]) -> WelchResult:
    """
    Welch 单尾 t 检验，备择假设为 mean_a > mean_b

    Args:
        sample_a: 候选系统的准确率样本
        sample_b: 基线系统的准确率样本

    Returns:
        WelchResult，自由度按 Welch–Satterthwaite 公式计算

    Raises:
        DegenerateInputError: 样本数小于2，或两组方差都为0且均值不同
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    n_a, n_b = len(a), len(b)
    if n_a < 2 or n_b < 2:
        raise DegenerateInputError(f"每组至少需要2个样本: n_a={n_a}, n_b={n_b}")

    mean_a, mean_b = float(a.mean()), float(b.mean())
    se_a = float(a.var(ddof=1)) / n_a
    se_b = float(b.var(ddof=1)) / n_b
    se2 = se_a + se_b
    if se2 == 0.0:
        if mean_a == mean_b:
            logger.warning("两组样本方差都为0且均值相同，按约定取 t=0, p=0.5")
            return WelchResult(0.0, float(n_a + n_b - 2), 0.5, mean_a, mean_b)
        raise DegenerateInputError(f"两组样本方差都为0且均值不同: {mean_a} vs {mean_b}")

    t = (mean_a - mean_b) / math.sqrt(se2)
    df = se2 ** 2 / (se_a ** 2 / (n_a - 1) + se_b ** 2 / (n_b - 1))
    return WelchResult(
        t_statistic=float(t),
        degrees_of_freedom=float(df),
        p_value_one_tailed=t_sf(t, df),
        mean_a=mean_a,
        mean_b=mean_b,
    )
