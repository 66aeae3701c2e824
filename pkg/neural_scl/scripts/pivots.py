#!/usr/bin/env python3
"""
为一个领域对选择枢纽特征并写出枢纽文件
"""

import argparse
import logging
import sys

from neural_scl.core.benchmark import select_strategy_pivots
from neural_scl.scripts.common import (
    STRATEGY_CHOICES,
    add_pair_arguments,
    add_seed_argument,
    candidate_min_df_of,
    normalize_strategy,
    prepare_from_args,
    seed_of,
    write_manifest,
)
from neural_scl.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

HELP = '选择枢纽特征'


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_pair_arguments(parser)
    add_seed_argument(parser)
    parser.add_argument('--strategy', choices=STRATEGY_CHOICES, help='枢纽选择策略（mi 即 mi_source）')
    parser.add_argument('--p', type=int, help='枢纽数量')
    parser.add_argument('--vocab-output', help='同时写出词表文件')
    parser.add_argument('-o', '--output', required=True, help='枢纽文件输出路径')


def run(args, manager: ConfigManager) -> int:
    seed = seed_of(args, manager)
    strategy = normalize_strategy(args.strategy or manager.get('pivot.strategy', 'mi_source'))
    p = int(args.p if args.p is not None else manager.get('pivot.p', 100))
    candidate_min_df = candidate_min_df_of(args, manager)

    prepared, vocab, inputs = prepare_from_args(args, manager, seed)
    pivots = select_strategy_pivots(prepared, strategy, p, seed, candidate_min_df)
    pivots.save(args.output, vocab)
    outputs = [args.output]
    if args.vocab_output:
        vocab.save(args.vocab_output)
        outputs.append(args.vocab_output)

    write_manifest(args, manager, args.output, inputs, outputs, seed=seed,
                   config={'pivot': {'strategy': strategy, 'p': p, 'candidate_min_df': candidate_min_df}},
                   references={'vocabulary': args.vocab_output},
                   stats={'vocabulary_size': vocab.n, 'candidates': len(prepared.candidates),
                          'truncated': pivots.truncated})
    print(f"{strategy} 枢纽 {len(pivots)} 个已写入 {args.output}")
    return 0


def main():
    """主函数"""
    from neural_scl.main import main as cli_main
    return cli_main(['pivots'] + sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
