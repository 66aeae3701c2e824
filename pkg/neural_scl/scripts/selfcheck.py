#!/usr/bin/env python3
"""
运行数值自检套件（梯度有限差分、互信息参考实现、SVD、Welch 检验）
"""

import argparse
import logging
import sys

from tabulate import tabulate

from neural_scl.core.selfcheck import SUITES, run_suites
from neural_scl.scripts.common import seed_of, write_manifest
from neural_scl.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

HELP = '运行数值自检'


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--suites', nargs='+', choices=list(SUITES), help='要运行的套件（默认全部）')
    parser.add_argument('--seed', type=int, help='随机实例的种子')
    parser.add_argument('-o', '--output', help='把汇总表写入文件')


def run(args, manager: ConfigManager) -> int:
    seed = seed_of(args, manager)
    results = run_suites(args.suites, seed=seed)
    table = tabulate([r.summary_row() for r in results],
                     headers=['suite', 'status', 'trials', 'max error'], tablefmt='pretty')
    print(table)

    if args.output:
        with open(args.output, 'w', encoding='utf-8', newline='\n') as f:
            f.write(table + '\n')
        write_manifest(args, manager, args.output, [], [args.output], seed=seed,
                       config={'suites': [r.name for r in results]},
                       stats={r.name: {'passed': r.passed, 'trials': r.trials} for r in results})

    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"自检失败: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def main():
    """主函数"""
    from neural_scl.main import main as cli_main
    return cli_main(['selfcheck'] + sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
