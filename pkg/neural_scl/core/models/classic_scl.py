"""
经典SCL基线

1. 对每个枢纽特征 j，用非枢纽特征训练一个线性预测器（BCE + L2，Adam）预测 j 是否出现
2. 把 p 个预测器的权重作为列组成 W（n_nonpivot × p）
3. Θ = W 的前 k 个左奇异向量
4. 分类器输入为原始特征与 Θᵀx_nonpivot 的拼接，训练逻辑回归

p 个预测器共享同一批次顺序，合并成一个 p 输出线性模型一次训练。
Adam 逐坐标更新，每一列的轨迹与单独训练该预测器完全相同。
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from neural_scl.config import ClassicSCLConfig, LogRegConfig
from neural_scl.core.featurize import DesignMatrix
from neural_scl.core.linalg import SVDResult, truncated_svd
from neural_scl.core.models.logreg import LogRegModel, augment, train_linear, train_logreg
from neural_scl.core.neural import pivot_targets
from neural_scl.core.pivot import PivotSet
from neural_scl.utils.checkpoint import write_checkpoint
from neural_scl.utils.errors import (
    ConfigError,
    DegenerateProjectionError,
    DimensionMismatchError,
    MissingLabelsError,
)

logger = logging.getLogger(__name__)

KIND = 'classic_scl'
CLASSIFIER_PREFIX = 'clf_'


def nonpivot_columns(n: int, pivots: PivotSet) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[pivots.index_array] = False
    return np.flatnonzero(mask)


def scl_projection(W: np.ndarray, k: int, pivot_ids: Optional[Sequence[int]] = None) -> SVDResult:
    """
    由枢纽预测器权重矩阵计算投影 Θ

    Args:
        W: n_nonpivot × p，每列是一个枢纽预测器的权重
        k: 投影维度
        pivot_ids: 每列对应的枢纽特征下标（用于错误信息），默认为列号

    Raises:
        DegenerateProjectionError: 存在全零列
    """
    W = np.asarray(W, dtype=np.float64)
    zero = np.flatnonzero(np.all(W == 0.0, axis=0))
    if len(zero):
        ids = list(pivot_ids) if pivot_ids is not None else list(range(W.shape[1]))
        raise DegenerateProjectionError([int(ids[j]) for j in zero])
    return truncated_svd(W, k)


@dataclass
class ClassicSCLModel:
    """经典SCL模型：投影 Θ + 逻辑回归分类器"""

    theta: np.ndarray
    nonpivot: np.ndarray
    pivots: PivotSet
    classifier: LogRegModel
    n: int
    config: Optional[ClassicSCLConfig] = None
    dropped: int = 0

    @property
    def k(self) -> int:
        return self.theta.shape[1]

    def features(self, X: sp.csr_matrix) -> sp.csr_matrix:
        """原始特征与投影特征的拼接（维度 n + k）"""
        X = sp.csr_matrix(X)
        if X.shape[1] != self.n:
            raise DimensionMismatchError(f"输入维度 {X.shape[1]} 与模型维度 {self.n} 不一致")
        projected = np.asarray(X[:, self.nonpivot] @ self.theta)
        return augment(X, projected)

    def predict_proba(self, X: sp.csr_matrix) -> np.ndarray:
        return self.classifier.predict_proba(self.features(X))

    def predict(self, X: sp.csr_matrix) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def save(self, path: Union[str, Path], extra_meta: Optional[Dict[str, Any]] = None) -> None:
        meta = {
            'n': self.n,
            'k': self.k,
            'dropped': self.dropped,
            'pivots': list(self.pivots.indices),
            'pivot_strategy': self.pivots.strategy,
            'config': asdict(self.config) if self.config else None,
            'classifier': self.classifier.meta(),
        }
        meta.update(extra_meta or {})
        arrays = {'theta': self.theta}
        arrays.update(self.classifier.arrays(CLASSIFIER_PREFIX))
        write_checkpoint(path, KIND, meta, arrays)

    @classmethod
    def from_checkpoint(cls, meta: Dict[str, Any], arrays: Dict[str, np.ndarray]) -> 'ClassicSCLModel':
        pivots = PivotSet(tuple(meta['pivots']), None, meta.get('pivot_strategy', 'mi_source'),
                          p=len(meta['pivots']))
        n = int(meta['n'])
        classifier = LogRegModel.from_arrays(arrays, meta.get('classifier', {}), CLASSIFIER_PREFIX)
        config = ClassicSCLConfig(**meta['config']) if meta.get('config') else None
        return cls(arrays['theta'], nonpivot_columns(n, pivots), pivots, classifier, n, config,
                   int(meta.get('dropped', 0)))


def train_pivot_predictors(rows: sp.csr_matrix, pivots: PivotSet, cfg: ClassicSCLConfig,
                           seed: int) -> np.ndarray:
    """训练 p 个枢纽预测器，返回 n_nonpivot × p 的权重矩阵"""
    rows = sp.csr_matrix(rows)
    nonpivot = nonpivot_columns(rows.shape[1], pivots)
    targets = pivot_targets(rows, pivots.indices)
    result = train_linear(rows[:, nonpivot], targets, cfg.rho, cfg.lr, cfg.epochs, cfg.batch_size,
                          seed, description='scl-pivots')
    return result.params.W.T.copy()


def train_classic_scl(source_train: DesignMatrix, unlabeled: Optional[DesignMatrix], pivots: PivotSet,
                      k: Optional[int] = None, cfg: Optional[ClassicSCLConfig] = None,
                      logreg_cfg: Optional[LogRegConfig] = None,
                      source_val: Optional[DesignMatrix] = None) -> ClassicSCLModel:
    """
    训练经典SCL

    Args:
        source_train: 源领域有标签训练矩阵
        unlabeled: 无标签行（源 + 目标）
        pivots: 枢纽集合
        k: 投影维度（默认取 cfg.k），要求 k ≤ p
        cfg: 枢纽预测器配置
        logreg_cfg: 最终分类器配置
        source_val: 可选的验证矩阵，用于分类器的 epoch 选择

    Returns:
        ClassicSCLModel

    Raises:
        DegenerateProjectionError: 某些枢纽预测器权重全为0
    """
    cfg = cfg or ClassicSCLConfig()
    logreg_cfg = logreg_cfg or LogRegConfig()
    k = cfg.k if k is None else k
    if source_train is None or source_train.n_rows == 0 or source_train.labels is None:
        raise MissingLabelsError("经典SCL需要非空的有标签源领域训练数据")
    if k > len(pivots):
        raise ConfigError(f"k={k} 不能超过枢纽数 p={len(pivots)}")
    n = source_train.dim
    if unlabeled is not None and unlabeled.dim != n:
        raise DimensionMismatchError(f"无标签矩阵维度 {unlabeled.dim} 与训练矩阵维度 {n} 不一致")

    parts = [source_train.X] + ([unlabeled.X] if unlabeled is not None and unlabeled.n_rows else [])
    rows = sp.vstack(parts, format='csr')
    logger.info(f"经典SCL: 在 {rows.shape[0]} 行上训练 {len(pivots)} 个枢纽预测器")
    W = train_pivot_predictors(rows, pivots, cfg, logreg_cfg.seed)
    svd = scl_projection(W, k, pivots.indices)

    model = ClassicSCLModel(svd.theta, nonpivot_columns(n, pivots), pivots, classifier=None, n=n,
                            config=cfg, dropped=svd.dropped)
    train_aug = DesignMatrix(model.features(source_train.X), source_train.labels)
    val_aug = None
    if source_val is not None and source_val.n_rows:
        val_aug = DesignMatrix(model.features(source_val.X), source_val.labels)
    model.classifier = train_logreg(train_aug, val_aug, logreg_cfg, description='classic-scl')
    logger.info(f"经典SCL训练完成: k={model.k}，去掉 {svd.dropped} 个零奇异值方向")
    return model
