#!/usr/bin/env python3
"""
按清单重新执行一条命令并核对输出

先核对输入文件哈希，再以清单中记录的参数重新运行，最后比较输出文件哈希。
"""

import argparse
import logging
import sys

from neural_scl.utils.config_manager import ConfigManager
from neural_scl.utils.errors import UsageError
from neural_scl.utils.manifest import RunManifest

logger = logging.getLogger(__name__)

HELP = '按清单重放一次运行'


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--manifest', required=True, help='清单文件')
    parser.add_argument('--force', action='store_true', help='输入哈希不一致时仍然重放')


def run(args, manager: ConfigManager) -> int:
    manifest = RunManifest.read(args.manifest)
    if not manifest.argv or manifest.command == 'replay':
        raise UsageError(f"清单中没有可重放的命令: {args.manifest}")

    mismatched = manifest.verify_inputs()
    if mismatched and not args.force:
        raise UsageError(f"{len(mismatched)} 个输入文件与清单不一致（使用 --force 强制重放）: "
                         f"{', '.join(mismatched)}")

    from neural_scl.main import main as cli_main
    logger.info(f"重放: {' '.join(manifest.argv)}")
    code = cli_main(list(manifest.argv), configure_logging=False)
    if code != 0:
        return code

    changed = manifest.verify_outputs()
    if changed:
        for path in changed:
            print(f"changed: {path}")
        print(f"重放完成，{len(changed)} 个输出与清单不一致", file=sys.stderr)
        return 1
    print(f"重放完成，{len(manifest.outputs)} 个输出与清单一致")
    return 0


def main():
    """主函数"""
    from neural_scl.main import main as cli_main
    return cli_main(['replay'] + sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
