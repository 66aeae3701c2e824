"""
共享网络训练循环

联合SCL模型与 AE-SCL 第一阶段共用同一个网络核心：一层隐藏层 + 任务头 + 枢纽预测头。
每个 epoch 对有标签行和无标签行分别独立打乱，然后严格交替地送入批次
（有标签、无标签、有标签……），较长的流在另一条流耗尽后单独跑完。
每个 epoch 结束后计算一次验证损失，保留验证损失最低的参数快照（并列时取最早的 epoch）。
"""

import logging
from dataclasses import dataclass, field
from itertools import zip_longest
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from tqdm import tqdm

from neural_scl.core.featurize import DesignMatrix, drop_columns
from neural_scl.core.neural import (
    AdamState,
    JointModelParams,
    adam_step,
    derive_seeds,
    forward_batch,
    init_weights,
    iter_minibatches,
    joint_loss,
    loss_and_gradients,
    make_batch,
)
from neural_scl.utils.errors import DimensionMismatchError, MissingLabelsError

logger = logging.getLogger(__name__)

# 验证函数：给定参数，返回标量验证损失
Validator = Callable[[JointModelParams], float]


@dataclass(frozen=True)
class NetworkSettings:
    """网络训练循环的全部设置"""

    hidden: int
    lam: float
    rho: float
    lr: float
    epochs: int
    batch_size: int
    seed: int
    activation: str = 'relu'
    use_bias: bool = False
    mask_pivots_in_input: bool = False
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    debug_checks: bool = False
    progress: bool = False
    description: str = 'train'


@dataclass
class NetworkResult:
    """训练结果：最佳 epoch 的参数快照与逐 epoch 验证曲线"""

    params: JointModelParams
    best_epoch: int
    validation_curve: List[float] = field(default_factory=list)
    train_curve: List[float] = field(default_factory=list)


def interleave(labeled: Sequence[np.ndarray], unlabeled: Sequence[np.ndarray]):
    """严格交替产生 (is_labeled, rows)，较长的流最后单独跑完"""
    for lab, unl in zip_longest(labeled, unlabeled):
        if lab is not None:
            yield True, lab
        if unl is not None:
            yield False, unl


def train_network(labeled: Optional[DesignMatrix], unlabeled: Optional[DesignMatrix],
                  pivot_indices: Sequence[int], settings: NetworkSettings,
                  validate: Optional[Validator] = None) -> NetworkResult:
    """
    训练共享网络

    Args:
        labeled: 有标签行（源领域训练集）；可以为 None（AE-SCL 第一阶段）
        unlabeled: 无标签行；可以为 None 或空
        pivot_indices: 枢纽特征下标，枢纽目标总是由未屏蔽的原始行计算
        settings: 训练设置
        validate: 验证函数；为 None 时以 epoch 平均训练损失做选择

    Returns:
        NetworkResult

    Raises:
        MissingLabelsError: 有标签流要求存在但为空
        DimensionMismatchError: 两个矩阵维度不一致
    """
    streams = [m for m in (labeled, unlabeled) if m is not None and m.n_rows]
    if not streams:
        raise MissingLabelsError("没有任何训练数据")
    n = streams[0].dim
    if any(m.dim != n for m in streams):
        raise DimensionMismatchError("有标签与无标签矩阵维度不一致")
    if labeled is not None and labeled.n_rows and labeled.labels is None:
        raise MissingLabelsError("有标签流缺少标签")

    pivot_indices = np.asarray(pivot_indices, dtype=np.int64)
    seeds = derive_seeds(settings.seed)
    params = init_weights((n, settings.hidden, len(pivot_indices)), seeds['init'], settings.use_bias)
    state = AdamState(params.size, lr=settings.lr, beta1=settings.beta1,
                      beta2=settings.beta2, epsilon=settings.epsilon)
    shuffle_rng = np.random.default_rng(seeds['shuffle'])
    grad_buffer = np.empty_like(params.theta)

    n_lab = labeled.n_rows if labeled is not None else 0
    n_unl = unlabeled.n_rows if unlabeled is not None else 0

    best_params: Optional[JointModelParams] = None
    best_epoch = -1
    best_value = np.inf
    validation_curve: List[float] = []
    train_curve: List[float] = []

    epochs = tqdm(range(settings.epochs), desc=settings.description, disable=not settings.progress)
    for epoch in epochs:
        lab_order = shuffle_rng.permutation(n_lab)
        unl_order = shuffle_rng.permutation(n_unl)
        lab_batches = list(iter_minibatches(lab_order, settings.batch_size))
        unl_batches = list(iter_minibatches(unl_order, settings.batch_size))

        epoch_loss = 0.0
        n_batches = 0
        for is_labeled, rows in interleave(lab_batches, unl_batches):
            source = labeled if is_labeled else unlabeled
            X = source.X[rows]
            labels = source.labels[rows] if is_labeled else None
            batch = make_batch(X, labels, pivot_indices, settings.mask_pivots_in_input)
            loss, grad = loss_and_gradients(params, batch, settings.lam, settings.rho,
                                            settings.activation, out=grad_buffer)
            if settings.debug_checks:
                expected = joint_loss(params, batch, settings.lam, settings.rho, settings.activation)
                assert np.isclose(loss, expected, rtol=1e-12, atol=1e-12), \
                    f"优化的损失 {loss} 与 joint_loss {expected} 不一致"
                logger.debug(f"epoch {epoch} batch {n_batches}: loss={loss:.6f} labeled={is_labeled}")
            adam_step(params.theta, grad, state)
            epoch_loss += loss
            n_batches += 1

        train_value = epoch_loss / max(n_batches, 1)
        train_curve.append(train_value)
        value = validate(params) if validate is not None else train_value
        validation_curve.append(float(value))
        if value < best_value:
            best_value = value
            best_epoch = epoch
            best_params = params.copy()
        logger.info(f"[{settings.description}] epoch {epoch}: 训练损失 {train_value:.6f}，验证损失 {value:.6f}")

    if best_params is None:
        # 所有 epoch 的验证值都是 NaN
        best_params, best_epoch = params.copy(), len(validation_curve) - 1
    return NetworkResult(params=best_params, best_epoch=best_epoch,
                         validation_curve=validation_curve, train_curve=train_curve)


def hidden_representation(params: JointModelParams, X: sp.csr_matrix, activation: str,
                          masked_columns: Optional[Sequence[int]] = None) -> np.ndarray:
    """隐藏层输出 h(x)；masked_columns 不为空时先屏蔽这些输入列"""
    if masked_columns is not None and len(masked_columns):
        X = drop_columns(X, masked_columns)
    return forward_batch(params, X, activation).H
