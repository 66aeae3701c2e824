"""
训练相关的类型化配置

每个配置都是不可变的 dataclass，由 ConfigManager 中对应的配置段构造；
默认值即标准实验设置中的超参数。
"""

import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Optional

from neural_scl.utils.config_manager import ConfigManager
from neural_scl.utils.errors import ConfigError

VALIDATION_METRICS = ('task_bce', 'joint')
ACTIVATIONS = ('relu', 'sigmoid')

# 只影响输出展示、不影响计算结果的字段，不参与配置哈希
_HASH_EXCLUDE = {'progress'}


def config_hash(*configs: Any) -> str:
    """
    计算一个或多个配置对象的稳定哈希

    Args:
        configs: dataclass 配置对象

    Returns:
        SHA-256 十六进制摘要的前12个字符
    """
    payload = []
    for cfg in configs:
        values = {k: v for k, v in asdict(cfg).items() if k not in _HASH_EXCLUDE}
        payload.append({'type': type(cfg).__name__, 'values': values})
    text = json.dumps(payload, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:12]


def _section(manager: Optional[ConfigManager], name: str) -> Dict[str, Any]:
    manager = manager or ConfigManager()
    section = manager.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"配置段 {name} 必须是映射")
    return section


def _positive(name: str, value: Any) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise ConfigError(f"{name} 必须是正整数，当前值: {value!r}")


def _non_negative(name: str, value: Any) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value < 0:
        raise ConfigError(f"{name} 必须是非负数，当前值: {value!r}")


@dataclass(frozen=True)
class TrainConfig:
    """联合模型训练配置"""

    d: int = 2000
    p: int = 100
    lam: float = 100.0
    rho: float = 0.1
    lr: float = 0.001
    epochs: int = 30
    batch_size: int = 50
    seed: int = 0
    mask_pivots_in_input: bool = False
    validation_metric: str = 'task_bce'
    use_bias: bool = False
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    debug_checks: bool = False
    progress: bool = False

    def __post_init__(self):
        for name in ('d', 'p', 'epochs', 'batch_size'):
            _positive(name, getattr(self, name))
        for name in ('lam', 'rho'):
            _non_negative(name, getattr(self, name))
        if self.lr <= 0:
            raise ConfigError(f"lr 必须为正数，当前值: {self.lr!r}")
        if self.validation_metric not in VALIDATION_METRICS:
            raise ConfigError(f"未知的 validation_metric: {self.validation_metric}")

    @classmethod
    def from_config(cls, manager: Optional[ConfigManager] = None, **overrides) -> 'TrainConfig':
        """从配置管理器的 train 段和 pivot 段构造"""
        train = _section(manager, 'train')
        pivot = _section(manager, 'pivot')
        adam = train.get('adam', {}) or {}
        values = dict(
            d=train.get('d', cls.d),
            p=pivot.get('p', cls.p),
            lam=float(train.get('lambda', cls.lam)),
            rho=float(train.get('rho', cls.rho)),
            lr=float(train.get('lr', cls.lr)),
            epochs=train.get('epochs', cls.epochs),
            batch_size=train.get('batch_size', cls.batch_size),
            seed=int(train.get('seed', cls.seed)),
            mask_pivots_in_input=bool(train.get('mask_pivots_in_input', cls.mask_pivots_in_input)),
            validation_metric=train.get('validation_metric', cls.validation_metric),
            use_bias=bool(train.get('use_bias', cls.use_bias)),
            beta1=float(adam.get('beta1', cls.beta1)),
            beta2=float(adam.get('beta2', cls.beta2)),
            epsilon=float(adam.get('epsilon', cls.epsilon)),
            debug_checks=bool(train.get('debug_checks', cls.debug_checks)),
            progress=bool(train.get('progress', cls.progress)),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_seed(self, seed: int) -> 'TrainConfig':
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class AESCLConfig:
    """AE-SCL 第一阶段（枢纽预测网络）配置"""

    hidden: int = 100
    activation: str = 'sigmoid'
    use_bias: bool = True
    rho: float = 0.0
    lr: float = 0.001
    epochs: int = 10
    batch_size: int = 50
    holdout_fraction: float = 0.2

    def __post_init__(self):
        for name in ('hidden', 'epochs', 'batch_size'):
            _positive(name, getattr(self, name))
        _non_negative('rho', self.rho)
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"未知的激活函数: {self.activation}")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ConfigError(f"holdout_fraction 必须在 (0, 1) 内: {self.holdout_fraction}")

    @classmethod
    def from_config(cls, manager: Optional[ConfigManager] = None, **overrides) -> 'AESCLConfig':
        section = _section(manager, 'aescl')
        values = {f.name: section.get(f.name, f.default) for f in fields(cls)}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class ClassicSCLConfig:
    """经典SCL（SVD投影）配置"""

    k: int = 50
    rho: float = 0.1
    lr: float = 0.01
    epochs: int = 5
    batch_size: int = 50

    def __post_init__(self):
        for name in ('k', 'epochs', 'batch_size'):
            _positive(name, getattr(self, name))
        _non_negative('rho', self.rho)

    @classmethod
    def from_config(cls, manager: Optional[ConfigManager] = None, **overrides) -> 'ClassicSCLConfig':
        section = _section(manager, 'classic_scl')
        values = {f.name: section.get(f.name, f.default) for f in fields(cls)}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class LogRegConfig:
    """逻辑回归分类器配置"""

    rho: float = 0.1
    lr: float = 0.01
    epochs: int = 30
    batch_size: int = 50
    seed: int = 0

    def __post_init__(self):
        for name in ('epochs', 'batch_size'):
            _positive(name, getattr(self, name))
        _non_negative('rho', self.rho)

    @classmethod
    def from_config(cls, manager: Optional[ConfigManager] = None, **overrides) -> 'LogRegConfig':
        section = _section(manager, 'logreg')
        values = {f.name: section.get(f.name, f.default) for f in fields(cls) if f.name != 'seed'}
        values['seed'] = int(_section(manager, 'train').get('seed', 0))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


SYSTEMS = ('logreg', 'aescl', 'classic_scl', 'joint_mi', 'joint_oracle', 'joint_random', 'joint_freq')


def _as_tuple(value: Any) -> tuple:
    if isinstance(value, str):
        return tuple(v.strip() for v in value.split(',') if v.strip())
    return tuple(value)


@dataclass(frozen=True)
class BenchmarkConfig:
    """多领域、多种子基准实验配置"""

    domains: tuple = ('books', 'dvd', 'electronics', 'kitchen')
    systems: tuple = ('logreg', 'aescl', 'joint_mi', 'joint_oracle')
    seeds: int = 10
    base_seed: int = 0
    train_size: int = 1600
    validation_size: int = 400
    freeze_split: bool = False
    comparisons: tuple = (('joint_mi', 'aescl'), ('joint_mi', 'logreg'),
                          ('joint_mi', 'joint_random'), ('joint_oracle', 'joint_mi'))
    significance: float = 0.05
    jobs: int = 1
    min_df: int = 5
    candidate_min_df: int = 10
    data_format: Optional[str] = None

    def __post_init__(self):
        _positive('seeds', self.seeds)
        _positive('jobs', self.jobs)
        if len(self.domains) < 2 or len(set(self.domains)) != len(self.domains):
            raise ConfigError(f"至少需要两个互不相同的领域: {self.domains}")
        unknown = [s for s in self.systems if s not in SYSTEMS]
        if unknown or not self.systems:
            raise ConfigError(f"未知的系统: {unknown}，可选: {', '.join(SYSTEMS)}")
        for pair in self.comparisons:
            if len(pair) != 2 or any(s not in SYSTEMS for s in pair):
                raise ConfigError(f"比较项必须是两个已知系统: {pair}")
        for name in ('train_size', 'validation_size'):
            _non_negative(name, getattr(self, name))
        if not 0.0 < self.significance < 1.0:
            raise ConfigError(f"significance 必须在 (0, 1) 内: {self.significance}")

    @property
    def pairs(self) -> list:
        """所有有序 (源, 目标) 领域对"""
        return [(s, t) for s in self.domains for t in self.domains if s != t]

    @classmethod
    def from_config(cls, manager: Optional[ConfigManager] = None, **overrides) -> 'BenchmarkConfig':
        section = _section(manager, 'benchmark')
        values = dict(
            domains=_as_tuple(section.get('domains', cls.domains)),
            systems=_as_tuple(section.get('systems', cls.systems)),
            seeds=section.get('seeds', cls.seeds),
            base_seed=int(_section(manager, 'train').get('seed', cls.base_seed)),
            train_size=section.get('train_size', cls.train_size),
            validation_size=section.get('validation_size', cls.validation_size),
            freeze_split=bool(section.get('freeze_split', cls.freeze_split)),
            comparisons=tuple(tuple(pair) for pair in section.get('comparisons', cls.comparisons)),
            significance=float(section.get('significance', cls.significance)),
            jobs=section.get('jobs', cls.jobs),
            min_df=_section(manager, 'featurize').get('min_df', cls.min_df),
            candidate_min_df=_section(manager, 'pivot').get('candidate_min_df', cls.candidate_min_df),
            data_format=_section(manager, 'data').get('format'),
        )
        for key in ('domains', 'systems'):
            if overrides.get(key) is not None:
                overrides[key] = _as_tuple(overrides[key])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class SyntheticConfig:
    """合成双领域语料的规模"""

    general_terms: int = 40
    specific_terms: int = 60
    noise_terms: int = 500
    labeled_per_domain: int = 1000
    unlabeled_per_domain: int = 2000
    words_per_doc: int = 30
    signal_strength: float = 0.8

    def __post_init__(self):
        for name in ('general_terms', 'specific_terms', 'noise_terms', 'labeled_per_domain',
                     'unlabeled_per_domain', 'words_per_doc'):
            _positive(name, getattr(self, name))
        if not 0.0 < self.signal_strength <= 1.0:
            raise ConfigError(f"signal_strength 必须在 (0, 1] 内: {self.signal_strength}")

    @classmethod
    def from_config(cls, manager: Optional[ConfigManager] = None, **overrides) -> 'SyntheticConfig':
        section = _section(manager, 'synthetic')
        values = {f.name: section.get(f.name, f.default) for f in fields(cls)}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
