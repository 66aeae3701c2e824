#!/usr/bin/env python3
"""
neural-scl 主程序

解析子命令，加载配置与日志，调用相应的功能模块。
库代码只抛出 NeuralSCLError，这里统一转换为一行错误信息和退出码。
"""

import argparse
import logging
import sys
from typing import List, Optional

from neural_scl import __version__
from neural_scl.scripts import benchmark, evaluate, overlap, pivots, replay, selfcheck, synthetic, train, vocab
from neural_scl.utils.config_manager import ConfigManager
from neural_scl.utils.errors import NeuralSCLError, UsageError

logger = logging.getLogger(__name__)

COMMANDS = {
    'vocab': vocab,
    'pivots': pivots,
    'train': train,
    'eval': evaluate,
    'benchmark': benchmark,
    'selfcheck': selfcheck,
    'synthetic': synthetic,
    'overlap': overlap,
    'replay': replay,
}


class CLIArgumentParser(argparse.ArgumentParser):
    """参数错误时抛出 UsageError，而不是直接退出进程"""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> CLIArgumentParser:
    common = CLIArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='配置文件路径')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='日志级别')

    parser = CLIArgumentParser(prog='neural-scl', description="neural-scl - 神经结构对应学习领域自适应工具")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True
    for name, module in COMMANDS.items():
        sub = subparsers.add_parser(name, parents=[common], help=module.HELP, description=module.HELP)
        module.add_arguments(sub)
        sub.set_defaults(handler=module.run)
    return parser


def _configure(args, configure_logging: bool) -> ConfigManager:
    manager = ConfigManager()
    if args.config:
        if str(args.config) not in manager.loaded_files:
            manager.load_config(args.config)
            if str(args.config) not in manager.loaded_files:
                raise UsageError(f"无法加载配置文件: {args.config}")
    if args.log_level:
        manager.set('logging.level', args.log_level)
    if configure_logging:
        manager.setup_logging()
    return manager


def main(argv: Optional[List[str]] = None, configure_logging: bool = True) -> int:
    """
    主函数

    Args:
        argv: 命令行参数（不含程序名），默认取 sys.argv
        configure_logging: 是否初始化日志系统（重放时沿用已有配置）

    Returns:
        退出码：成功为0，用法或配置错误为2，其他错误为1
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        args.argv = argv
        manager = _configure(args, configure_logging)
        logger.debug(f"执行子命令 {args.command}: {argv}")
        return args.handler(args, manager)
    except NeuralSCLError as e:
        message = ' '.join(str(e).split())
        print(f"error: {type(e).__name__}: {message}", file=sys.stderr)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
