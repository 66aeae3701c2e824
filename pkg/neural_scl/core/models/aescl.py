"""
AE-SCL 基线

第一阶段：单隐藏层网络以非枢纽特征为输入、预测枢纽特征是否出现，
在所有有标签与无标签行上训练，按留出集上的枢纽预测损失选择 epoch。
第二阶段：冻结第一阶段权重，把隐藏层输出拼接到原始特征之后，训练逻辑回归。
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import scipy.sparse as sp

from neural_scl.config import AESCLConfig, LogRegConfig
from neural_scl.core.featurize import DesignMatrix
from neural_scl.core.models.logreg import LogRegModel, augment, train_logreg
from neural_scl.core.models.network import NetworkResult, NetworkSettings, hidden_representation, train_network
from neural_scl.core.neural import JointModelParams, derive_seeds, loss_terms, make_batch
from neural_scl.core.pivot import PivotSet
from neural_scl.utils.checkpoint import write_checkpoint
from neural_scl.utils.errors import DimensionMismatchError, MissingLabelsError

logger = logging.getLogger(__name__)

KIND = 'aescl'
CLASSIFIER_PREFIX = 'clf_'


@dataclass
class AESCLModel:
    """AE-SCL 模型：冻结的表示网络 + 逻辑回归分类器"""

    representation: JointModelParams
    pivots: PivotSet
    activation: str
    classifier: LogRegModel
    best_epoch: int = 0
    config: Optional[AESCLConfig] = None

    @property
    def hidden(self) -> int:
        return self.representation.d

    def features(self, X: sp.csr_matrix) -> sp.csr_matrix:
        """原始特征与隐藏层输出的拼接（维度 n + hidden）"""
        H = hidden_representation(self.representation, X, self.activation, self.pivots.indices)
        return augment(X, H)

    def predict_proba(self, X: sp.csr_matrix) -> np.ndarray:
        return self.classifier.predict_proba(self.features(sp.csr_matrix(X)))

    def predict(self, X: sp.csr_matrix) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def save(self, path: Union[str, Path], extra_meta: Optional[Dict[str, Any]] = None) -> None:
        n, d, p = self.representation.dims
        meta = {
            'dims': {'n': n, 'd': d, 'p': p},
            'use_bias': self.representation.use_bias,
            'activation': self.activation,
            'best_epoch': self.best_epoch,
            'pivots': list(self.pivots.indices),
            'pivot_strategy': self.pivots.strategy,
            'config': asdict(self.config) if self.config else None,
            'classifier': self.classifier.meta(),
        }
        meta.update(extra_meta or {})
        arrays = dict(self.representation.arrays())
        arrays.update(self.classifier.arrays(CLASSIFIER_PREFIX))
        write_checkpoint(path, KIND, meta, arrays)

    @classmethod
    def from_checkpoint(cls, meta: Dict[str, Any], arrays: Dict[str, np.ndarray]) -> 'AESCLModel':
        dims = meta['dims']
        params = JointModelParams(dims['n'], dims['d'], dims['p'], use_bias=bool(meta.get('use_bias')))
        for name, target in params.arrays().items():
            target[...] = arrays[name]
        pivots = PivotSet(tuple(meta['pivots']), None, meta.get('pivot_strategy', 'mi_source'),
                          p=len(meta['pivots']))
        classifier = LogRegModel.from_arrays(arrays, meta.get('classifier', {}), CLASSIFIER_PREFIX)
        config = AESCLConfig(**meta['config']) if meta.get('config') else None
        return cls(params, pivots, meta.get('activation', 'sigmoid'), classifier,
                   int(meta.get('best_epoch', 0)), config)


def _holdout_split(n_rows: int, fraction: float, seed: int):
    order = np.random.default_rng(derive_seeds(seed)['split']).permutation(n_rows)
    n_holdout = max(1, int(round(n_rows * fraction))) if n_rows > 1 else 0
    return np.sort(order[n_holdout:]), np.sort(order[:n_holdout])


def train_representation(rows: DesignMatrix, pivots: PivotSet, cfg: AESCLConfig, seed: int) -> NetworkResult:
    """
    第一阶段：非枢纽特征 → 枢纽出现与否

    枢纽列在输入中被屏蔽，目标仍由原始行计算；按留出集上的平均枢纽 BCE 选择 epoch。
    """
    pivot_indices = pivots.index_array

    train_rows, holdout_rows = _holdout_split(rows.n_rows, cfg.holdout_fraction, seed)
    train_part = rows.subset(train_rows).without_labels()
    holdout_batch = make_batch(rows.X[holdout_rows], None, pivot_indices, mask_pivots_in_input=True)

    def holdout_loss(params: JointModelParams) -> float:
        return loss_terms(params, holdout_batch, cfg.activation).pivot / holdout_batch.n_rows

    settings = NetworkSettings(
        hidden=cfg.hidden, lam=1.0, rho=cfg.rho, lr=cfg.lr, epochs=cfg.epochs,
        batch_size=cfg.batch_size, seed=seed, activation=cfg.activation, use_bias=cfg.use_bias,
        mask_pivots_in_input=True, description='aescl-phase1',
    )
    return train_network(None, train_part, pivot_indices, settings,
                         holdout_loss if holdout_batch.n_rows else None)


def train_aescl(source_train: DesignMatrix, source_val: Optional[DesignMatrix],
                unlabeled: Optional[DesignMatrix], pivots: PivotSet, cfg: AESCLConfig,
                logreg_cfg: LogRegConfig) -> AESCLModel:
    """
    训练 AE-SCL

    Args:
        source_train: 源领域有标签训练矩阵
        source_val: 源领域有标签验证矩阵（第二阶段的 epoch 选择）
        unlabeled: 无标签行（源 + 目标）
        pivots: 枢纽集合
        cfg: AE-SCL 第一阶段配置
        logreg_cfg: 第二阶段逻辑回归配置，其 seed 同时作为第一阶段种子

    Returns:
        AESCLModel
    """
    if source_train is None or source_train.n_rows == 0 or source_train.labels is None:
        raise MissingLabelsError("AE-SCL 需要非空的有标签源领域训练数据")
    n = source_train.dim
    if unlabeled is not None and unlabeled.dim != n:
        raise DimensionMismatchError(f"无标签矩阵维度 {unlabeled.dim} 与训练矩阵维度 {n} 不一致")
    if unlabeled is None or unlabeled.n_rows == 0:
        logger.warning("无标签数据为空，AE-SCL 第一阶段只使用有标签行")
        pooled = source_train.without_labels()
    else:
        pooled = DesignMatrix.vstack([source_train, unlabeled], keep_labels=False)

    logger.info(f"AE-SCL 第一阶段: {pooled.n_rows} 行，隐藏层 {cfg.hidden}，激活 {cfg.activation}")
    representation = train_representation(pooled, pivots, cfg, logreg_cfg.seed)

    model = AESCLModel(representation.params, pivots, cfg.activation,
                       classifier=None, best_epoch=representation.best_epoch, config=cfg)
    train_aug = DesignMatrix(model.features(source_train.X), source_train.labels)
    val_aug = None
    if source_val is not None and source_val.n_rows:
        val_aug = DesignMatrix(model.features(source_val.X), source_val.labels)
    logger.info(f"AE-SCL 第二阶段: 分类器输入维度 {train_aug.dim}")
    model.classifier = train_logreg(train_aug, val_aug, logreg_cfg, description='aescl-phase2')
    return model
