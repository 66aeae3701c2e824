"""
模型检查点读写

文件布局（所有整数均为小端序）:
    4 字节    魔数 b"NSCL"
    uint32    格式版本
    uint32    头部长度 L（字节）
    L 字节    UTF-8 JSON 头部，键排序、无空白：
              {"arrays": [{"name": ..., "shape": [...]}, ...], "kind": ..., "meta": {...}}
    其后      按头部顺序依次存放各数组，小端 float64，行优先

相同输入得到逐字节相同的文件（不包含时间戳）。
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from neural_scl.utils.errors import CheckpointFormatError

logger = logging.getLogger(__name__)

MAGIC = b"NSCL"
FORMAT_VERSION = 1
_DTYPE = np.dtype('<f8')


def write_checkpoint(path: Union[str, Path], kind: str, meta: Dict[str, Any],
                     arrays: Dict[str, np.ndarray]) -> None:
    """
    写出检查点

    Args:
        path: 输出路径
        kind: 模型类型，例如 "joint"
        meta: 可 JSON 序列化的元数据（维度、种子、配置等）
        arrays: 按写出顺序排列的数组
    """
    specs = []
    payloads = []
    for name, array in arrays.items():
        data = np.ascontiguousarray(np.asarray(array, dtype=_DTYPE))
        if not np.all(np.isfinite(data)):
            raise CheckpointFormatError(f"数组 {name} 中有非有限值，拒绝写出")
        specs.append({'name': name, 'shape': list(data.shape)})
        payloads.append(data.tobytes(order='C'))

    header = json.dumps({'kind': kind, 'meta': meta, 'arrays': specs},
                        sort_keys=True, separators=(',', ':'), ensure_ascii=False).encode('utf-8')
    with open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(struct.pack('<II', FORMAT_VERSION, len(header)))
        f.write(header)
        for payload in payloads:
            f.write(payload)
    logger.info(f"检查点已写出: {path} (kind={kind})")


def read_checkpoint(path: Union[str, Path]) -> Tuple[str, Dict[str, Any], Dict[str, np.ndarray]]:
    """
    读取检查点

    Returns:
        (kind, meta, arrays)

    Raises:
        CheckpointFormatError: 魔数、版本或长度不符
    """
    with open(path, 'rb') as f:
        blob = f.read()
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise CheckpointFormatError(f"{path}: 不是检查点文件")
    version, header_length = struct.unpack('<II', blob[4:12])
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(f"{path}: 不支持的格式版本 {version}")
    try:
        header = json.loads(blob[12:12 + header_length].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"{path}: 头部损坏: {e}") from None

    arrays: Dict[str, np.ndarray] = {}
    offset = 12 + header_length
    for spec in header.get('arrays', []):
        shape = tuple(spec['shape'])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * _DTYPE.itemsize
        if offset + nbytes > len(blob):
            raise CheckpointFormatError(f"{path}: 数组 {spec['name']} 数据不完整")
        arrays[spec['name']] = np.frombuffer(blob, dtype=_DTYPE, count=count, offset=offset) \
            .reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(blob):
        raise CheckpointFormatError(f"{path}: 文件末尾有 {len(blob) - offset} 字节多余数据")
    return header['kind'], header.get('meta', {}), arrays
