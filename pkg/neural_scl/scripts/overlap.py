#!/usr/bin/env python3
"""
比较两个枢纽文件的重叠
"""

import argparse
import logging
import sys
from pathlib import Path

from neural_scl.core.pivot import PivotSet, pivot_overlap
from neural_scl.scripts.common import write_manifest
from neural_scl.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

HELP = '枢纽重叠报告'


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--a', required=True, help='第一个枢纽文件')
    parser.add_argument('--b', required=True, help='第二个枢纽文件')
    parser.add_argument('-o', '--output', help='报告输出路径（默认只打印）')


def run(args, manager: ConfigManager) -> int:
    report = pivot_overlap(PivotSet.load(args.a), PivotSet.load(args.b))
    text = report.to_text(Path(args.a).name, Path(args.b).name)
    print(text, end='')
    if args.output:
        with open(args.output, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        write_manifest(args, manager, args.output, [args.a, args.b], [args.output],
                       stats={'overlap': report.overlap})
    return 0


def main():
    """主函数"""
    from neural_scl.main import main as cli_main
    return cli_main(['overlap'] + sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
