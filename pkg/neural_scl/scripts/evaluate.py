#!/usr/bin/env python3
"""
在有标签数据上评估一个检查点
"""

import argparse
import logging
import sys
from pathlib import Path

from neural_scl.core.corpus import domain_files, read_corpus
from neural_scl.core.evaluation import evaluate
from neural_scl.core.featurize import Vocabulary, vectorize_corpus
from neural_scl.core.models import load_model
from neural_scl.scripts.common import add_data_arguments, resolve_data_dir, write_manifest
from neural_scl.utils.config_manager import ConfigManager
from neural_scl.utils.errors import MissingDataError, UsageError

logger = logging.getLogger(__name__)

HELP = '评估模型准确率'


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_data_arguments(parser)
    parser.add_argument('--model', required=True, help='检查点路径')
    parser.add_argument('--vocab', help='词表文件（默认 <检查点>.vocab.tsv）')
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('--target', help='目标领域名称（读取 <data-dir>/<target>.labeled）')
    group.add_argument('--input', help='有标签数据文件')
    parser.add_argument('-o', '--output', help='评估报告输出路径')


def run(args, manager: ConfigManager) -> int:
    model_path = Path(args.model)
    vocab_path = Path(args.vocab) if args.vocab else model_path.with_name(model_path.name + '.vocab.tsv')
    for path in (model_path, vocab_path):
        if not path.exists():
            raise MissingDataError(f"文件不存在: {path}")

    fmt = args.format or manager.get('data.format')
    if args.input:
        data_path, domain = Path(args.input), Path(args.input).name.split('.')[0]
    else:
        data_path, domain = domain_files(resolve_data_dir(args), args.target, fmt)[0], args.target
    if not data_path.exists():
        raise MissingDataError(f"数据文件不存在: {data_path}")

    model = load_model(model_path)
    vocab = Vocabulary.load(vocab_path)
    corpus = read_corpus(data_path, domain, labeled=True, fmt=fmt if args.target else None)
    matrix = vectorize_corpus(corpus, vocab)
    if matrix.n_rows == 0:
        raise UsageError(f"评估数据为空: {data_path}")
    acc = evaluate(model, matrix)
    logger.info(f"{model_path} 在 {data_path} 上的准确率: {acc:.4f} ({matrix.n_rows} 个文档)")

    if args.output:
        with open(args.output, 'w', encoding='utf-8', newline='\n') as f:
            f.write(f"model\t{model_path}\n")
            f.write(f"data\t{data_path}\n")
            f.write(f"documents\t{matrix.n_rows}\n")
            f.write(f"accuracy\t{acc!r}\n")
        write_manifest(args, manager, args.output, [model_path, vocab_path, data_path], [args.output],
                       references={'model': str(model_path), 'vocabulary': str(vocab_path)},
                       stats={'accuracy': acc, 'documents': matrix.n_rows})
    print(f"accuracy: {acc:.4f} ({matrix.n_rows} documents)")
    return 0


def main():
    """主函数"""
    from neural_scl.main import main as cli_main
    return cli_main(['eval'] + sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
