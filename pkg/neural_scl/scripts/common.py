"""
子命令共用的参数与辅助函数
"""

import argparse
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from neural_scl.config import AESCLConfig, ClassicSCLConfig, LogRegConfig, TrainConfig
from neural_scl.core.benchmark import PreparedPair, prepare_pair
from neural_scl.core.corpus import DomainData, SplitSpec, domain_files, domain_from_file, load_domains
from neural_scl.core.featurize import Vocabulary
from neural_scl.core.neural import derive_seeds
from neural_scl.core.pivot import STRATEGIES
from neural_scl.utils.config_manager import ConfigManager, get_data_dir
from neural_scl.utils.errors import UsageError
from neural_scl.utils.manifest import RunManifest

logger = logging.getLogger(__name__)

# `mi` 是 `mi_source` 的简写
STRATEGY_CHOICES = ('mi',) + STRATEGIES


def normalize_strategy(strategy: str) -> str:
    return 'mi_source' if strategy == 'mi' else strategy


def comma_list(choices: Optional[Sequence[str]] = None):
    """argparse 的 type：把 `a,b` 拆成列表并逐项检查取值，可与 nargs='+' 同时使用"""
    def parse(text: str) -> List[str]:
        items = [item for item in text.split(',') if item]
        if not items:
            raise argparse.ArgumentTypeError(f"空列表: {text!r}")
        invalid = [item for item in items if choices is not None and item not in choices]
        if invalid:
            raise argparse.ArgumentTypeError(f"无效取值 {', '.join(invalid)}（可选: {', '.join(choices)}）")
        return items
    return parse


def flatten(groups: Optional[Iterable[List[str]]]) -> Optional[List[str]]:
    return None if groups is None else [item for group in groups for item in group]


def add_data_arguments(parser) -> None:
    parser.add_argument('--data-dir', type=str, help='数据目录（默认取配置 data.dir 或环境变量 NEURAL_SCL_DATA_DIR）')
    parser.add_argument('--format', choices=['processed', 'tsv'], help='数据文件格式（默认按文件自动判断）')


def add_pair_arguments(parser) -> None:
    add_data_arguments(parser)
    parser.add_argument('--source', required=True, help='源领域名称，或源领域有标签文件路径')
    parser.add_argument('--target', required=True, help='目标领域名称，或目标领域（无标签）文件路径')
    parser.add_argument('--min-df', type=int, help='词表最小文档频率')
    parser.add_argument('--candidate-min-df', type=int, help='枢纽候选在每个领域中的最小文档频率')
    parser.add_argument('--train-size', type=int, help='源领域训练集大小')
    parser.add_argument('--validation-size', type=int, help='源领域验证集大小')


def add_seed_argument(parser) -> None:
    parser.add_argument('--seed', type=int, help='随机种子（派生权重初始化、批次打乱与数据切分）')


def add_train_arguments(parser) -> None:
    """联合模型超参数，未给出时取配置文件中的值"""
    parser.add_argument('--d', type=int, help='隐藏层大小')
    parser.add_argument('--p', type=int, help='枢纽数量')
    parser.add_argument('--lambda', dest='lam', type=float, help='枢纽预测损失权重 λ')
    parser.add_argument('--rho', type=float, help='L2 正则权重 ρ')
    parser.add_argument('--lr', type=float, help='Adam 学习率')
    parser.add_argument('--epochs', type=int, help='训练轮数')
    parser.add_argument('--batch-size', type=int, help='批次大小')
    parser.add_argument('--mask-pivots', dest='mask_pivots_in_input', action='store_const', const=True,
                        help='在联合模型输入中屏蔽枢纽特征')


def resolve_data_dir(args) -> Path:
    return Path(args.data_dir or get_data_dir())


def seed_of(args, manager: ConfigManager) -> int:
    return int(args.seed if getattr(args, 'seed', None) is not None else manager.get('train.seed', 0))


def split_spec(args, manager: ConfigManager, seed: int) -> SplitSpec:
    return SplitSpec(
        train_size=args.train_size if args.train_size is not None else manager.get('benchmark.train_size', 1600),
        validation_size=(args.validation_size if args.validation_size is not None
                         else manager.get('benchmark.validation_size', 400)),
        seed=derive_seeds(seed)['split'],
    )


def load_pair(args, manager: ConfigManager) -> Tuple[DomainData, DomainData, List[Path]]:
    """
    读取源领域与目标领域数据，返回 (源, 目标, 输入文件列表)

    --source / --target 指向已存在的文件时直接读取该文件（源领域为有标签文件，目标领域通常为无标签文件），
    否则作为领域名在数据目录中查找 `<domain>.labeled` 与 `<domain>.unlabeled`。
    """
    fmt = args.format or manager.get('data.format')
    loaded, inputs = [], []
    for role, name in (('source', args.source), ('target', args.target)):
        if Path(name).is_file():
            loaded.append(domain_from_file(name, role, fmt))
            inputs.append(Path(name))
        else:
            data_dir = resolve_data_dir(args)
            loaded.append(load_domains(data_dir, [name], fmt)[name])
            inputs.extend(domain_files(data_dir, name, fmt))
    source, target = loaded
    if source.domain == target.domain:
        raise UsageError(f"源领域与目标领域同名: {source.domain}")
    return source, target, inputs


def prepare_from_args(args, manager: ConfigManager, seed: int) -> Tuple[PreparedPair, Vocabulary, List[Path]]:
    """读取数据、切分、构建词表并向量化"""
    source, target, inputs = load_pair(args, manager)
    min_df = args.min_df if args.min_df is not None else manager.get('featurize.min_df', 5)
    candidate_min_df = candidate_min_df_of(args, manager)
    prepared, vocab = prepare_pair(source, target, split_spec(args, manager, seed), min_df, candidate_min_df)
    return prepared, vocab, inputs


def candidate_min_df_of(args, manager: ConfigManager) -> int:
    value = getattr(args, 'candidate_min_df', None)
    return int(value if value is not None else manager.get('pivot.candidate_min_df', 10))


def train_config(args, manager: ConfigManager, seed: int) -> TrainConfig:
    overrides = {name: getattr(args, name, None)
                 for name in ('d', 'p', 'lam', 'rho', 'lr', 'epochs', 'batch_size', 'mask_pivots_in_input')}
    return TrainConfig.from_config(manager, seed=seed, **overrides)


def baseline_configs(manager: ConfigManager, seed: int) -> Tuple[AESCLConfig, ClassicSCLConfig, LogRegConfig]:
    return AESCLConfig.from_config(manager), ClassicSCLConfig.from_config(manager), \
        LogRegConfig.from_config(manager, seed=seed)


def config_dicts(*configs: Any) -> Dict[str, Any]:
    return {type(c).__name__: asdict(c) for c in configs}


def write_manifest(args, manager: ConfigManager, output: Union[str, Path], inputs: Iterable[Union[str, Path]],
                   outputs: Iterable[Union[str, Path]], seed: Optional[int] = None,
                   config: Optional[Dict[str, Any]] = None, references: Optional[Dict[str, Optional[str]]] = None,
                   stats: Optional[Dict[str, Any]] = None) -> Path:
    """为一个输出写清单，配置文件本身也作为输入记录哈希"""
    manifest = RunManifest(command=args.command, argv=list(getattr(args, 'argv', [])), seed=seed,
                           config=config or {}, references=references or {}, stats=stats or {})
    manifest.add_inputs(list(inputs) + [p for p in manager.loaded_files if Path(p).exists()])
    manifest.add_outputs(outputs)
    return manifest.write(output)
