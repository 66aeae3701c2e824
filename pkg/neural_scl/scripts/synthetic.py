#!/usr/bin/env python3
"""
生成合成双领域语料并写成 processed 格式

输出目录可以直接作为 --data-dir 交给其他子命令。
"""

import argparse
import logging
import sys
from pathlib import Path

from neural_scl.config import SyntheticConfig
from neural_scl.core.synthetic import generate_synthetic_domains, write_synthetic
from neural_scl.scripts.common import config_dicts, seed_of, write_manifest
from neural_scl.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

HELP = '生成合成领域数据'


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--seed', type=int, help='生成器种子')
    parser.add_argument('--general-terms', type=int, help='两个领域共享的通用词数')
    parser.add_argument('--specific-terms', type=int, help='每个领域的专属词数')
    parser.add_argument('--noise-terms', type=int, help='噪声词数')
    parser.add_argument('--labeled', dest='labeled_per_domain', type=int, help='每个领域的有标签文档数')
    parser.add_argument('--unlabeled', dest='unlabeled_per_domain', type=int, help='每个领域的无标签文档数')
    parser.add_argument('--words-per-doc', type=int, help='每个文档的词数')
    parser.add_argument('--signal-strength', type=float, help='有极性词与标签一致的概率')
    parser.add_argument('-o', '--output-dir', required=True, help='输出目录')


def run(args, manager: ConfigManager) -> int:
    seed = seed_of(args, manager)
    cfg = SyntheticConfig.from_config(
        manager,
        general_terms=args.general_terms, specific_terms=args.specific_terms, noise_terms=args.noise_terms,
        labeled_per_domain=args.labeled_per_domain, unlabeled_per_domain=args.unlabeled_per_domain,
        words_per_doc=args.words_per_doc, signal_strength=args.signal_strength,
    )
    output_dir = Path(args.output_dir)
    paths = write_synthetic(output_dir, generate_synthetic_domains(cfg, seed))
    write_manifest(args, manager, output_dir, [], paths, seed=seed, config=config_dicts(cfg),
                   stats={'files': len(paths)})
    print(f"合成数据已写入 {output_dir}")
    return 0


def main():
    """主函数"""
    from neural_scl.main import main as cli_main
    return cli_main(['synthetic'] + sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
