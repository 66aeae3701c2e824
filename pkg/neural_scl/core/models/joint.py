"""
联合SCL模型

一个共享隐藏层同时服务任务头和枢纽预测头：
    h(x) = ReLU(W_h x)，f_task(x) = σ(W_t h(x))，f_pivot(x) = σ(W_p h(x))
有标签批次优化任务损失 + λ·枢纽损失 + ρ·R，无标签批次只优化 λ·枢纽损失 + ρ·R。
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from neural_scl.config import TrainConfig
from neural_scl.core.featurize import DesignMatrix, SparseVector, drop_columns
from neural_scl.core.models.logreg import mean_bce
from neural_scl.core.models.network import NetworkSettings, train_network
from neural_scl.core.neural import JointModelParams, forward, forward_batch, loss_terms, make_batch
from neural_scl.core.pivot import PivotSet
from neural_scl.utils.checkpoint import write_checkpoint
from neural_scl.utils.errors import DimensionMismatchError, MissingLabelsError, NeuralSCLError

logger = logging.getLogger(__name__)

KIND = 'joint'
ACTIVATION = 'relu'


@dataclass
class TrainedJointModel:
    """
    训练好的联合模型

    best_epoch 是 validation_curve 的 argmin（并列时取第一个）。
    """

    params: JointModelParams
    pivots: PivotSet
    best_epoch: int
    validation_curve: List[float] = field(default_factory=list)
    config: Optional[TrainConfig] = None
    vocab_path: Optional[str] = None

    @property
    def mask_pivots_in_input(self) -> bool:
        return bool(self.config is not None and self.config.mask_pivots_in_input)

    def _input(self, X: sp.csr_matrix) -> sp.csr_matrix:
        if self.mask_pivots_in_input:
            return drop_columns(X, self.pivots.indices)
        return X

    def predict_proba(self, X: sp.csr_matrix) -> np.ndarray:
        return forward_batch(self.params, self._input(sp.csr_matrix(X)), ACTIVATION).y_task

    def predict(self, X: sp.csr_matrix) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def save(self, path: Union[str, Path], extra_meta: Optional[Dict[str, Any]] = None) -> None:
        n, d, p = self.params.dims
        meta = {
            'dims': {'n': n, 'd': d, 'p': p},
            'use_bias': self.params.use_bias,
            'seed': self.config.seed if self.config else None,
            'best_epoch': self.best_epoch,
            'validation_curve': self.validation_curve,
            'pivots': list(self.pivots.indices),
            'pivot_strategy': self.pivots.strategy,
            'config': _config_dict(self.config),
            'vocab_path': self.vocab_path,
        }
        meta.update(extra_meta or {})
        write_checkpoint(path, KIND, meta, self.params.arrays())

    @classmethod
    def from_checkpoint(cls, meta: Dict[str, Any], arrays: Dict[str, np.ndarray]) -> 'TrainedJointModel':
        dims = meta['dims']
        params = JointModelParams(dims['n'], dims['d'], dims['p'], use_bias=bool(meta.get('use_bias')))
        for name, target in params.arrays().items():
            target[...] = arrays[name]
        config = TrainConfig(**meta['config']) if meta.get('config') else None
        pivots = PivotSet(tuple(meta['pivots']), None, meta.get('pivot_strategy', 'mi_source'),
                          p=len(meta['pivots']))
        return cls(params, pivots, int(meta.get('best_epoch', 0)),
                   list(meta.get('validation_curve', [])), config, meta.get('vocab_path'))


def _config_dict(config: Optional[TrainConfig]) -> Optional[Dict[str, Any]]:
    return None if config is None else asdict(config)


def network_settings(cfg: TrainConfig) -> NetworkSettings:
    return NetworkSettings(
        hidden=cfg.d, lam=cfg.lam, rho=cfg.rho, lr=cfg.lr, epochs=cfg.epochs,
        batch_size=cfg.batch_size, seed=cfg.seed, activation=ACTIVATION, use_bias=cfg.use_bias,
        mask_pivots_in_input=cfg.mask_pivots_in_input, beta1=cfg.beta1, beta2=cfg.beta2,
        epsilon=cfg.epsilon, debug_checks=cfg.debug_checks, progress=cfg.progress,
        description='joint',
    )


def _validator(source_val: DesignMatrix, pivots: PivotSet, cfg: TrainConfig):
    if source_val is None or source_val.n_rows == 0:
        logger.warning("没有验证数据，按训练损失选择 epoch")
        return None
    if source_val.labels is None:
        raise MissingLabelsError("验证集需要标签")
    batch = make_batch(source_val.X, source_val.labels, pivots.indices, cfg.mask_pivots_in_input)

    def task_bce(params: JointModelParams) -> float:
        probs = forward_batch(params, batch.X, ACTIVATION).y_task
        return mean_bce(probs, source_val.labels)

    def joint(params: JointModelParams) -> float:
        terms = loss_terms(params, batch, ACTIVATION)
        return (terms.task + cfg.lam * terms.pivot) / batch.n_rows

    return task_bce if cfg.validation_metric == 'task_bce' else joint


def train_joint(source_train: DesignMatrix, source_val: Optional[DesignMatrix],
                unlabeled: Optional[DesignMatrix], pivots: PivotSet, cfg: TrainConfig,
                vocab_path: Optional[str] = None) -> TrainedJointModel:
    """
    训练联合SCL模型

    Args:
        source_train: 源领域有标签训练矩阵
        source_val: 源领域有标签验证矩阵（按平均任务 BCE 选择 epoch）
        unlabeled: 源领域与目标领域无标签行的拼接；为空时退化为监督训练
        pivots: 枢纽集合
        cfg: 训练配置

    Returns:
        TrainedJointModel

    Raises:
        MissingLabelsError: 有标签训练流为空
        DimensionMismatchError: 矩阵维度不一致或枢纽下标越界
    """
    if source_train is None or source_train.n_rows == 0 or source_train.labels is None:
        raise MissingLabelsError("联合模型需要非空的有标签源领域训练数据")
    n = source_train.dim
    for name, matrix in (('source_val', source_val), ('unlabeled', unlabeled)):
        if matrix is not None and matrix.dim != n:
            raise DimensionMismatchError(f"{name} 维度 {matrix.dim} 与训练矩阵维度 {n} 不一致")
    if len(pivots) == 0:
        raise NeuralSCLError("枢纽集合为空")
    if max(pivots.indices) >= n:
        raise DimensionMismatchError(f"枢纽下标超出特征维度 {n}")
    if unlabeled is None or unlabeled.n_rows == 0:
        logger.warning("无标签数据为空，联合模型退化为监督训练")
        unlabeled = None
    else:
        unlabeled = unlabeled.without_labels()

    logger.info(f"开始训练联合模型: n={n}, d={cfg.d}, p={len(pivots)}, λ={cfg.lam}, ρ={cfg.rho}, "
                f"有标签 {source_train.n_rows} 行，无标签 {unlabeled.n_rows if unlabeled else 0} 行")
    result = train_network(source_train, unlabeled, pivots.indices, network_settings(cfg),
                           _validator(source_val, pivots, cfg))
    logger.info(f"联合模型训练完成: 最佳 epoch {result.best_epoch}")
    return TrainedJointModel(result.params, pivots, result.best_epoch, result.validation_curve,
                             cfg, vocab_path)


def predict_joint(model: TrainedJointModel, x: SparseVector) -> Tuple[float, int]:
    """
    单样本预测

    Returns:
        (概率, 硬标签)，概率 ≥ 0.5 时标签为1

    Raises:
        DimensionMismatchError: 维度不一致
    """
    if x.dim != model.params.n:
        raise DimensionMismatchError(f"输入维度 {x.dim} 与模型维度 {model.params.n} 不一致")
    if model.mask_pivots_in_input:
        keep = ~np.isin(x.indices, model.pivots.index_array)
        x = SparseVector(x.indices[keep], x.values[keep], x.dim)
    probability = forward(model.params, x, ACTIVATION).y_task
    return probability, int(probability >= 0.5)
