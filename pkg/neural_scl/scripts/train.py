#!/usr/bin/env python3
"""
在一个领域对上训练一个系统并写出检查点

检查点旁边同时写出词表（`<输出>.vocab.tsv`）与所用枢纽（`<输出>.pivots.tsv`），
eval 子命令据此重新向量化目标数据。
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from neural_scl.core.benchmark import select_strategy_pivots
from neural_scl.core.evaluation import evaluate
from neural_scl.core.featurize import Vocabulary
from neural_scl.core.models import save_model, train_aescl, train_classic_scl, train_joint, train_logreg
from neural_scl.core.pivot import PivotSet
from neural_scl.scripts.common import (
    STRATEGY_CHOICES,
    add_pair_arguments,
    add_seed_argument,
    add_train_arguments,
    baseline_configs,
    candidate_min_df_of,
    config_dicts,
    normalize_strategy,
    prepare_from_args,
    seed_of,
    train_config,
    write_manifest,
)
from neural_scl.utils.config_manager import ConfigManager
from neural_scl.utils.errors import DimensionMismatchError

logger = logging.getLogger(__name__)

HELP = '训练模型并写出检查点'
TRAIN_SYSTEMS = ('joint', 'logreg', 'aescl', 'classic_scl')


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_pair_arguments(parser)
    add_seed_argument(parser)
    add_train_arguments(parser)
    parser.add_argument('--system', choices=TRAIN_SYSTEMS, default='joint', help='要训练的系统')
    parser.add_argument('--pivots', help='已有的枢纽文件（默认按 --strategy 重新选择）')
    parser.add_argument('--strategy', choices=STRATEGY_CHOICES, help='枢纽选择策略')
    parser.add_argument('--k', type=int, help='经典SCL投影维度')
    parser.add_argument('-o', '--output', required=True, help='检查点输出路径')


def check_pivots(pivots: PivotSet, vocab: Vocabulary) -> None:
    """枢纽文件中的词项必须与当前词表的同一下标一致"""
    for index, term in zip(pivots.indices, pivots.terms or ()):
        if index >= vocab.n or (term and vocab.terms[index] != term):
            raise DimensionMismatchError(f"枢纽 {index}:{term} 与当前词表不一致")


def run(args, manager: ConfigManager) -> int:
    seed = seed_of(args, manager)
    output = Path(args.output)
    vocab_path = output.with_name(output.name + '.vocab.tsv')
    pivots_path = output.with_name(output.name + '.pivots.tsv')
    cfg = train_config(args, manager, seed)
    aescl_cfg, classic_cfg, logreg_cfg = baseline_configs(manager, seed)
    if args.k is not None:
        classic_cfg = replace(classic_cfg, k=args.k)

    prepared, vocab, inputs = prepare_from_args(args, manager, seed)
    pivots = None
    if args.system != 'logreg':
        if args.pivots:
            pivots = PivotSet.load(args.pivots)
            check_pivots(pivots, vocab)
            inputs.append(Path(args.pivots))
        else:
            strategy = normalize_strategy(args.strategy or manager.get('pivot.strategy', 'mi_source'))
            pivots = select_strategy_pivots(prepared, strategy, cfg.p, seed, candidate_min_df_of(args, manager))

    if args.system == 'joint':
        model = train_joint(prepared.train, prepared.validation, prepared.unlabeled, pivots, cfg,
                            vocab_path=str(vocab_path))
        configs = (cfg,)
    elif args.system == 'aescl':
        model = train_aescl(prepared.train, prepared.validation, prepared.unlabeled, pivots, aescl_cfg, logreg_cfg)
        configs = (aescl_cfg, logreg_cfg)
    elif args.system == 'classic_scl':
        model = train_classic_scl(prepared.train, prepared.unlabeled, pivots, cfg=classic_cfg,
                                  logreg_cfg=logreg_cfg, source_val=prepared.validation)
        configs = (classic_cfg, logreg_cfg)
    else:
        model = train_logreg(prepared.train, prepared.validation, logreg_cfg)
        configs = (logreg_cfg,)

    vocab.save(vocab_path)
    outputs = [output, vocab_path]
    if pivots is not None:
        pivots.save(pivots_path, vocab)
        outputs.append(pivots_path)
    save_model(model, output, extra_meta={
        'system': args.system, 'source': args.source, 'target': args.target, 'seed': seed,
        'vocab_path': str(vocab_path), 'pivots_path': str(pivots_path) if pivots is not None else None,
    })

    stats = {'vocabulary_size': vocab.n, 'candidates': len(prepared.candidates)}
    if prepared.validation.n_rows:
        stats['validation_accuracy'] = evaluate(model, prepared.validation)
    write_manifest(args, manager, output, inputs, outputs, seed=seed, config=config_dicts(*configs),
                   references={'vocabulary': str(vocab_path),
                               'pivots': str(pivots_path) if pivots is not None else None},
                   stats=stats)
    message = f"{args.system} 模型已写入 {output}"
    if 'validation_accuracy' in stats:
        message += f"，源领域验证准确率 {stats['validation_accuracy']:.4f}"
    print(message)
    return 0


def main():
    """主函数"""
    from neural_scl.main import main as cli_main
    return cli_main(['train'] + sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
