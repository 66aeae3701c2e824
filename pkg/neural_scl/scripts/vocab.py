#!/usr/bin/env python3
"""
构建领域对的词表

词表覆盖源领域有标签、源领域无标签和目标领域无标签文档，写出 `term<TAB>index<TAB>df_total`。
"""

import argparse
import logging
import sys

from neural_scl.core.featurize import build_vocabulary
from neural_scl.core.pivot import candidate_features
from neural_scl.scripts.common import add_pair_arguments, candidate_min_df_of, load_pair, write_manifest
from neural_scl.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

HELP = '构建词表文件'


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_pair_arguments(parser)
    parser.add_argument('-o', '--output', required=True, help='词表输出路径')


def run(args, manager: ConfigManager) -> int:
    source, target, inputs = load_pair(args, manager)
    min_df = args.min_df if args.min_df is not None else manager.get('featurize.min_df', 5)
    vocab = build_vocabulary([source.labeled, source.unlabeled, target.unlabeled], min_df=min_df)
    candidates = candidate_features(vocab, (source.domain, target.domain), candidate_min_df_of(args, manager))
    vocab.save(args.output)

    write_manifest(args, manager, args.output, inputs, [args.output],
                   config={'featurize': {'min_df': min_df}},
                   stats={'vocabulary_size': vocab.n, 'candidates': len(candidates)})
    print(f"词表 {vocab.n} 个词项（枢纽候选 {len(candidates)} 个）已写入 {args.output}")
    return 0


def main():
    """主函数"""
    from neural_scl.main import main as cli_main
    return cli_main(['vocab'] + sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
