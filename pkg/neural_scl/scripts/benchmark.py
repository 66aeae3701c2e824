#!/usr/bin/env python3
"""
多领域、多种子基准实验

对所有有序领域对、所有系统、所有种子训练并评估，写出结果表、Welch 检验表和清单。
"""

import argparse
import logging
import sys
from pathlib import Path

from neural_scl.config import SYSTEMS, BenchmarkConfig
from neural_scl.core.benchmark import run_benchmark
from neural_scl.core.corpus import domain_files, load_domains
from neural_scl.core.report import emit_report, summary_table
from neural_scl.scripts.common import (
    add_data_arguments,
    add_train_arguments,
    baseline_configs,
    comma_list,
    config_dicts,
    flatten,
    resolve_data_dir,
    train_config,
    write_manifest,
)
from neural_scl.utils.config_manager import ConfigManager
from neural_scl.utils.manifest import file_sha256

logger = logging.getLogger(__name__)

HELP = '运行基准实验并生成结果表'


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_data_arguments(parser)
    add_train_arguments(parser)
    parser.add_argument('--domains', nargs='+', type=comma_list(), help='参与实验的领域（空格或逗号分隔）')
    parser.add_argument('--systems', nargs='+', type=comma_list(SYSTEMS), help='参与实验的系统（空格或逗号分隔）')
    parser.add_argument('--seeds', type=int, help='每个 (领域对, 系统) 的种子数')
    parser.add_argument('--seed', type=int, help='第一个种子，其余种子依次加一')
    parser.add_argument('--jobs', type=int, help='并行进程数（默认1，完全确定）')
    parser.add_argument('--freeze-split', action='store_const', const=True,
                        help='所有种子共用第一个种子的训练/验证切分')
    parser.add_argument('--train-size', type=int, help='源领域训练集大小')
    parser.add_argument('--validation-size', type=int, help='源领域验证集大小')
    parser.add_argument('--min-df', type=int, help='词表最小文档频率')
    parser.add_argument('--candidate-min-df', type=int, help='枢纽候选在每个领域中的最小文档频率')
    parser.add_argument('--overlap', action='store_true', help='同时输出 MI 枢纽重叠报告')
    parser.add_argument('-o', '--output-dir', required=True, help='结果输出目录')


def run(args, manager: ConfigManager) -> int:
    cfg = BenchmarkConfig.from_config(
        manager,
        domains=flatten(args.domains), systems=flatten(args.systems), seeds=args.seeds, base_seed=args.seed,
        jobs=args.jobs, freeze_split=args.freeze_split, train_size=args.train_size,
        validation_size=args.validation_size, min_df=args.min_df,
        candidate_min_df=args.candidate_min_df, data_format=args.format,
    )
    train_cfg = train_config(args, manager, cfg.base_seed)
    aescl_cfg, classic_cfg, logreg_cfg = baseline_configs(manager, cfg.base_seed)

    data_dir = resolve_data_dir(args)
    data = load_domains(data_dir, cfg.domains, cfg.data_format)
    inputs, data_hashes = [], {}
    for domain in cfg.domains:
        for kind, path in zip(('labeled', 'unlabeled'), domain_files(data_dir, domain, cfg.data_format)):
            inputs.append(path)
            data_hashes[f"{domain}.{kind}"] = file_sha256(path)

    result = run_benchmark(data, cfg, train_cfg, aescl_cfg, classic_cfg, logreg_cfg,
                           overlap=args.overlap, data_hashes=data_hashes)

    output_dir = Path(args.output_dir)
    written = emit_report(result, output_dir)
    write_manifest(args, manager, output_dir, inputs, written.values(), seed=cfg.base_seed,
                   config=config_dicts(cfg, train_cfg, aescl_cfg, classic_cfg, logreg_cfg),
                   stats={'runs': len(result.runs),
                          'system_average': {s: result.system_average(s) for s in cfg.systems}})

    print(summary_table(result, tablefmt='pretty'))
    print(f"结果已写入 {output_dir}")
    return 0


def main():
    """主函数"""
    from neural_scl.main import main as cli_main
    return cli_main(['benchmark'] + sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
