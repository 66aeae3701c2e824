"""
小规模稠密线性代数

truncated_svd 通过 Gram 矩阵 WᵀW 的特征分解求左奇异向量：U = W·V·Σ⁻¹。
特征分解使用并行（轮转配对）循环 Jacobi 迭代，每一轮中互不相交的 (p, q) 对一起旋转。
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from neural_scl.utils.errors import ConfigError, DimensionMismatchError

logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-10
MAX_SWEEPS = 100


@dataclass
class SVDResult:
    """
    截断SVD结果

    theta 为 n×k' 的左奇异向量矩阵（k' ≤ k，零奇异值对应的列被去掉），
    dropped 记录被去掉的列数。
    """

    theta: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray
    dropped: int = 0

    @property
    def k(self) -> int:
        return self.theta.shape[1]


def round_robin_pairs(m: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    生成 m 个下标的轮转配对，每一轮的配对互不相交，所有轮合起来覆盖每个 (p, q) 恰好一次

    m 为奇数时加入一个哑元，与哑元配对的下标本轮轮空。
    """
    players = list(range(m + (m % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < m and b < m:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.int64), np.array(qs, dtype=np.int64)))
        # 第一个位置固定，其余顺时针轮转
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_diagonal_norm(A: np.ndarray) -> float:
    return float(np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0)))


def jacobi_eigh(G: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS) -> Tuple[np.ndarray, np.ndarray]:
    """
    对称矩阵的循环 Jacobi 特征分解

    Args:
        G: 对称矩阵 (m × m)
        tol: 相对收敛阈值，非对角元 Frobenius 范数 ≤ tol·max(1, ‖G‖_F) 时停止
        max_sweeps: 最大扫描次数

    Returns:
        (eigenvalues, eigenvectors)，特征值降序排列，特征向量为对应的列
    """
    A = np.array(G, dtype=np.float64, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"Jacobi 迭代需要方阵: {A.shape}")
    m = A.shape[0]
    A = 0.5 * (A + A.T)
    V = np.eye(m)
    threshold = tol * max(1.0, float(np.linalg.norm(A)))
    rounds = round_robin_pairs(m)

    sweeps = 0
    while _off_diagonal_norm(A) > threshold:
        if sweeps >= max_sweeps:
            logger.warning(f"Jacobi 迭代在 {max_sweeps} 次扫描后仍未收敛，"
                           f"非对角范数 {_off_diagonal_norm(A):.3e}")
            break
        for P, Q in rounds:
            if len(P) == 0:
                continue
            a_pp, a_qq, a_pq = A[P, P], A[Q, Q], A[P, Q]
            active = np.abs(a_pq) > np.finfo(float).tiny
            safe_pq = np.where(active, a_pq, 1.0)
            theta = (a_qq - a_pp) / (2.0 * safe_pq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            col_p, col_q = A[:, P].copy(), A[:, Q].copy()
            A[:, P] = col_p * c - col_q * s
            A[:, Q] = col_p * s + col_q * c
            row_p, row_q = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = c[:, None] * row_p - s[:, None] * row_q
            A[Q, :] = s[:, None] * row_p + c[:, None] * row_q
            # 被旋转消去的元素直接置0
            A[P, Q] = np.where(active, 0.0, A[P, Q])
            A[Q, P] = A[P, Q]

            v_p, v_q = V[:, P].copy(), V[:, Q].copy()
            V[:, P] = v_p * c - v_q * s
            V[:, Q] = v_p * s + v_q * c
        sweeps += 1

    logger.debug(f"Jacobi 迭代完成: m={m}, sweeps={sweeps}")
    eigenvalues = np.diag(A).copy()
    order = np.argsort(-eigenvalues, kind='stable')
    return eigenvalues[order], V[:, order]


def fix_signs(U: np.ndarray, V: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """符号约定：每列绝对值最大的元素为正，V 的对应列同步翻转"""
    if U.shape[1] == 0:
        return U, V
    rows = np.argmax(np.abs(U), axis=0)
    signs = np.where(U[rows, np.arange(U.shape[1])] < 0, -1.0, 1.0)
    return U * signs, V * signs


def truncated_svd(W: np.ndarray, k: int) -> SVDResult:
    """
    W 的前 k 个左奇异向量

    Args:
        W: n×p 稠密矩阵
        k: 保留的奇异向量个数，k ≤ min(n, p)

    Returns:
        SVDResult；奇异值降序，零奇异值（σ² ≤ max(n,p)·eps·σ_max²）对应的列被去掉
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise DimensionMismatchError(f"truncated_svd 需要二维矩阵: {W.shape}")
    n, p = W.shape
    if k < 1:
        raise ConfigError(f"k 必须不小于1: {k}")
    if k > min(n, p):
        raise DimensionMismatchError(f"k={k} 超过 min(n, p)={min(n, p)}")

    eigenvalues, V = jacobi_eigh(W.T @ W)
    sigma = np.sqrt(np.maximum(eigenvalues[:k], 0.0))
    V_k = V[:, :k]
    sigma_max = float(sigma[0]) if len(sigma) else 0.0
    # 在 Gram 矩阵的特征值上判零
    keep = sigma ** 2 > max(n, p) * np.finfo(float).eps * sigma_max ** 2
    if sigma_max == 0.0:
        keep[:] = False
    dropped = int(k - keep.sum())
    if dropped:
        logger.warning(f"截断SVD: 前 {k} 个奇异值中有 {dropped} 个为0，对应列被去掉")

    sigma, V_k = sigma[keep], V_k[:, keep]
    U = (W @ V_k) / sigma if len(sigma) else np.zeros((n, 0))
    U, V_k = fix_signs(U, V_k)
    return SVDResult(theta=U, singular_values=sigma, right_vectors=V_k, dropped=dropped)


def principal_angles(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """两个列正交子空间之间的主角（弧度）"""
    QA, _ = np.linalg.qr(A)
    QB, _ = np.linalg.qr(B)
    # 用正弦计算，小角度时比 arccos 精确
    sines = np.linalg.svd(QB - QA @ (QA.T @ QB), compute_uv=False)
    return np.sort(np.arcsin(np.clip(sines, 0.0, 1.0)))
