"""
运行清单

每个输出文件旁边写一个 `<输出>.manifest.json`，记录重现该输出所需的全部信息：
命令行参数、生效的配置、输入文件哈希、引用的词表/枢纽文件、输出文件哈希、版本与种子。
JSON 按键排序写出且不含时间戳，相同输入得到相同字节。
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from neural_scl import __version__
from neural_scl.utils.errors import CheckpointFormatError, MissingDataError

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = '.manifest.json'


def file_sha256(path: Union[str, Path], block_size: int = 65536) -> str:
    """计算文件的 SHA256 哈希值"""
    hasher = hashlib.sha256()
    with open(path, 'rb') as f:
        while chunk := f.read(block_size):
            hasher.update(chunk)
    return hasher.hexdigest()


def hash_files(paths: Iterable[Union[str, Path]]) -> Dict[str, str]:
    return {str(p): file_sha256(p) for p in paths}


def manifest_path(output: Union[str, Path]) -> Path:
    """输出文件对应的清单路径；输出是目录时为目录下的 manifest.json"""
    output = Path(output)
    if output.is_dir():
        return output / 'manifest.json'
    return output.with_name(output.name + MANIFEST_SUFFIX)


@dataclass
class RunManifest:
    """一次命令执行的清单"""

    command: str
    argv: List[str]
    seed: Optional[int]
    config: Dict[str, Any] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    references: Dict[str, Optional[str]] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    stats: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__

    def add_inputs(self, paths: Iterable[Union[str, Path]]) -> None:
        self.inputs.update(hash_files(paths))

    def add_outputs(self, paths: Iterable[Union[str, Path]]) -> None:
        self.outputs.update(hash_files(paths))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, ensure_ascii=False) + '\n'

    def write(self, output: Union[str, Path]) -> Path:
        path = manifest_path(output)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(self.to_json())
        logger.info(f"清单已写入 {path}")
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> 'RunManifest':
        path = Path(path)
        if not path.exists():
            raise MissingDataError(f"清单文件不存在: {path}")
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
            return cls(**data)
        except (json.JSONDecodeError, TypeError) as e:
            raise CheckpointFormatError(f"{path}: 清单格式错误: {e}") from e

    def verify_inputs(self) -> List[str]:
        """
        检查输入文件哈希

        Returns:
            哈希不一致或缺失的文件列表（同时记录警告）
        """
        mismatched = []
        for path, expected in sorted(self.inputs.items()):
            if not Path(path).exists():
                logger.warning(f"清单中的输入文件不存在: {path}")
                mismatched.append(path)
            elif file_sha256(path) != expected:
                logger.warning(f"输入文件哈希与清单不一致: {path}")
                mismatched.append(path)
        return mismatched

    def verify_outputs(self) -> List[str]:
        """返回内容与清单记录不一致的输出文件"""
        return [path for path, expected in sorted(self.outputs.items())
                if not Path(path).exists() or file_sha256(path) != expected]
