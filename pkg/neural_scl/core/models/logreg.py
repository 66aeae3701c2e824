"""
逻辑回归分类器

既是不做领域适应的基线系统，也是 AE-SCL 与经典SCL 的最终分类器。
训练目标为 BCE + ρ·½‖w‖²（偏置不正则），Adam 优化，按验证损失选择 epoch。
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import scipy.sparse as sp
from tqdm import tqdm

from neural_scl.config import LogRegConfig
from neural_scl.core.featurize import DesignMatrix
from neural_scl.core.neural import (
    AdamState,
    LinearParams,
    adam_step,
    bce,
    derive_seeds,
    iter_minibatches,
    linear_forward,
    linear_loss_and_gradients,
)
from neural_scl.utils.errors import MissingLabelsError

logger = logging.getLogger(__name__)


@dataclass
class LinearTrainResult:
    params: LinearParams
    best_epoch: int
    validation_curve: List[float] = field(default_factory=list)


def train_linear(X: sp.csr_matrix, targets: np.ndarray, rho: float, lr: float, epochs: int,
                 batch_size: int, seed: int,
                 validate: Optional[Callable[[LinearParams], float]] = None,
                 progress: bool = False, description: str = 'linear') -> LinearTrainResult:
    """
    训练 k 输出线性模型（权重初始化为0）

    Args:
        X: 稀疏输入 (m × n)
        targets: 目标 (m × k)
        validate: 验证函数；为 None 时按 epoch 平均训练损失选择

    Returns:
        LinearTrainResult，参数为最佳 epoch 的快照
    """
    X = sp.csr_matrix(X)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    m, n = X.shape
    params = LinearParams(n, targets.shape[1])
    state = AdamState(params.size, lr=lr)
    rng = np.random.default_rng(derive_seeds(seed)['shuffle'])
    grad_buffer = np.empty_like(params.theta)

    best: Optional[LinearParams] = None
    best_epoch, best_value = -1, np.inf
    curve: List[float] = []
    for epoch in tqdm(range(epochs), desc=description, disable=not progress):
        total = 0.0
        n_batches = 0
        for rows in iter_minibatches(rng.permutation(m), batch_size):
            loss, grad = linear_loss_and_gradients(params, X[rows], targets[rows], rho, out=grad_buffer)
            adam_step(params.theta, grad, state)
            total += loss
            n_batches += 1
        value = validate(params) if validate is not None else total / max(n_batches, 1)
        curve.append(float(value))
        if value < best_value:
            best, best_epoch, best_value = params.copy(), epoch, value
        logger.debug(f"[{description}] epoch {epoch}: 验证损失 {value:.6f}")
    if best is None:
        best, best_epoch = params.copy(), len(curve) - 1
    return LinearTrainResult(params=best, best_epoch=best_epoch, validation_curve=curve)


@dataclass
class LogRegModel:
    """逻辑回归模型：p(y=1|x) = σ(w·x + b)"""

    params: LinearParams
    best_epoch: int = 0
    validation_curve: List[float] = field(default_factory=list)

    @property
    def w(self) -> np.ndarray:
        return self.params.W[0]

    @property
    def b(self) -> float:
        return float(self.params.b[0])

    @property
    def dim(self) -> int:
        return self.params.n

    def predict_proba(self, X: sp.csr_matrix) -> np.ndarray:
        probs, _, _ = linear_forward(self.params, X)
        return probs[:, 0]

    def predict(self, X: sp.csr_matrix) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def arrays(self, prefix: str = '') -> Dict[str, np.ndarray]:
        return {f'{prefix}w': self.params.W, f'{prefix}b': self.params.b}

    def meta(self) -> Dict[str, Any]:
        return {'best_epoch': self.best_epoch, 'validation_curve': self.validation_curve}

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray], meta: Dict[str, Any],
                    prefix: str = '') -> 'LogRegModel':
        W = arrays[f'{prefix}w']
        params = LinearParams(W.shape[1], 1)
        params.W[...] = W
        params.b[...] = arrays[f'{prefix}b']
        return cls(params, int(meta.get('best_epoch', 0)), list(meta.get('validation_curve', [])))


def mean_bce(probs: np.ndarray, labels: np.ndarray) -> float:
    if len(labels) == 0:
        return float('nan')
    return float(np.mean(bce(probs, labels)))


def train_logreg(train: DesignMatrix, val: Optional[DesignMatrix], cfg: LogRegConfig,
                 description: str = 'logreg') -> LogRegModel:
    """
    训练逻辑回归

    Args:
        train: 有标签训练矩阵
        val: 有标签验证矩阵；为 None 或为空时按训练损失选择 epoch
        cfg: 逻辑回归配置

    Returns:
        LogRegModel

    Raises:
        MissingLabelsError: 训练数据为空或无标签
    """
    if train.n_rows == 0 or train.labels is None:
        raise MissingLabelsError("逻辑回归需要非空的有标签训练数据")

    validate = None
    if val is not None and val.n_rows and val.labels is not None:
        def validate(params: LinearParams) -> float:
            probs, _, _ = linear_forward(params, val.X)
            return mean_bce(probs[:, 0], val.labels)

    result = train_linear(train.X, train.labels.astype(np.float64), cfg.rho, cfg.lr, cfg.epochs,
                          cfg.batch_size, cfg.seed, validate, description=description)
    logger.info(f"[{description}] 训练完成: 维度 {train.dim}，最佳 epoch {result.best_epoch}")
    return LogRegModel(result.params, result.best_epoch, result.validation_curve)


def augment(X: sp.csr_matrix, extra: np.ndarray) -> sp.csr_matrix:
    """把原始特征与额外的稠密特征横向拼接"""
    return sp.hstack([sp.csr_matrix(X), sp.csr_matrix(np.asarray(extra, dtype=np.float64))], format='csr')

