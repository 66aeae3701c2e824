"""
四个可训练系统：联合SCL模型、AE-SCL、经典SCL、逻辑回归
"""

from pathlib import Path
from typing import Union

from neural_scl.core.models.aescl import AESCLModel, train_aescl
from neural_scl.core.models.classic_scl import ClassicSCLModel, train_classic_scl
from neural_scl.core.models.joint import TrainedJointModel, predict_joint, train_joint
from neural_scl.core.models.logreg import LogRegModel, train_logreg
from neural_scl.utils.checkpoint import read_checkpoint, write_checkpoint
from neural_scl.utils.errors import CheckpointFormatError

LOGREG_KIND = 'logreg'

Model = Union[TrainedJointModel, AESCLModel, ClassicSCLModel, LogRegModel]


def save_model(model: Model, path: Union[str, Path], extra_meta=None) -> None:
    """把任意一种训练好的模型写成检查点"""
    if isinstance(model, LogRegModel):
        meta = dict(model.meta())
        meta.update(extra_meta or {})
        write_checkpoint(path, LOGREG_KIND, meta, model.arrays())
    else:
        model.save(path, extra_meta)


def load_model(path: Union[str, Path]) -> Model:
    """
    从检查点恢复模型

    Raises:
        CheckpointFormatError: 文件损坏或模型类型未知
    """
    kind, meta, arrays = read_checkpoint(path)
    if kind == 'joint':
        return TrainedJointModel.from_checkpoint(meta, arrays)
    if kind == 'aescl':
        return AESCLModel.from_checkpoint(meta, arrays)
    if kind == 'classic_scl':
        return ClassicSCLModel.from_checkpoint(meta, arrays)
    if kind == LOGREG_KIND:
        return LogRegModel.from_arrays(arrays, meta)
    raise CheckpointFormatError(f"{path}: 未知的模型类型 {kind}")


__all__ = [
    'AESCLModel', 'ClassicSCLModel', 'LogRegModel', 'Model', 'TrainedJointModel',
    'load_model', 'predict_joint', 'save_model', 'train_aescl', 'train_classic_scl',
    'train_joint', 'train_logreg',
]
