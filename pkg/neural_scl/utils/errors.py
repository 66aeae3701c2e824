"""
异常定义模块

库代码只负责抛出这里定义的异常，由命令行入口统一捕获并输出单行错误信息。
"""

from typing import Iterable, Optional


class NeuralSCLError(Exception):
    """所有 neural_scl 异常的基类"""

    # 命令行退出码，用法/配置类错误覆盖为2
    exit_code = 1


class ConfigError(NeuralSCLError, ValueError):
    """配置值非法或缺失"""

    exit_code = 2


class CorpusParseError(NeuralSCLError, ValueError):
    """语料文件格式错误，消息中包含文件路径和行号"""

    def __init__(self, message: str, path: Optional[str] = None, line_number: Optional[int] = None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        super().__init__(f"{location}{message}")


class SplitSizeError(NeuralSCLError, ValueError):
    """切分所需的样本数超过语料大小"""


class MissingLabelsError(NeuralSCLError, ValueError):
    """需要标签的操作收到了无标签数据"""


class UnknownDomainError(NeuralSCLError, KeyError):
    """词表中没有记录该领域的文档频率"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class DimensionMismatchError(NeuralSCLError, ValueError):
    """向量或矩阵维度不一致"""


class NonFiniteGradientError(NeuralSCLError, FloatingPointError):
    """梯度中出现 NaN 或 Inf"""


class DegenerateInputError(NeuralSCLError, ValueError):
    """统计检验输入退化（例如两组样本方差都为0且均值不同）"""


class DegenerateProjectionError(NeuralSCLError, ValueError):
    """经典SCL中枢纽预测器权重全为0，无法构造投影"""

    def __init__(self, failing_pivots: Iterable[int]):
        self.failing_pivots = list(failing_pivots)
        super().__init__(
            f"枢纽预测器权重全为0: {', '.join(str(i) for i in self.failing_pivots)}"
        )


class MissingDataError(NeuralSCLError, FileNotFoundError):
    """基准实验缺少某个领域的数据"""


class CheckpointFormatError(NeuralSCLError, ValueError):
    """检查点文件损坏或版本不兼容"""


class TargetRangeError(NeuralSCLError, ValueError):
    """交叉熵的目标值不在 [0, 1] 内"""


class UsageError(NeuralSCLError):
    """命令行参数错误"""

    exit_code = 2
