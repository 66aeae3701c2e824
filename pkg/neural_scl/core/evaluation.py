"""
准确率评估
"""

import logging
from typing import Sequence

import numpy as np

from neural_scl.core.featurize import DesignMatrix
from neural_scl.utils.errors import DimensionMismatchError, MissingLabelsError

logger = logging.getLogger(__name__)


def accuracy(predictions: Sequence[int], gold: Sequence[int]) -> float:
    """
    预测正确的比例

    Raises:
        DimensionMismatchError: 长度不一致或为空
    """
    predictions = np.asarray(predictions)
    gold = np.asarray(gold)
    if predictions.shape != gold.shape or predictions.ndim != 1 or len(gold) == 0:
        raise DimensionMismatchError(f"预测与标签长度必须相同且不为0: {predictions.shape} vs {gold.shape}")
    return float(np.count_nonzero(predictions == gold)) / len(gold)


def evaluate(model, matrix: DesignMatrix) -> float:
    """在有标签矩阵上计算模型准确率；model 需提供 predict(X)"""
    if matrix.labels is None:
        raise MissingLabelsError("评估需要有标签数据")
    return accuracy(model.predict(matrix.X), matrix.labels)
