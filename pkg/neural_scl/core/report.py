"""
结果表输出

- results.csv：每次运行一行，`source,target,system,seed,accuracy,best_epoch,config_hash`
- summary.md / summary.txt：每个领域对一行、每个系统一列的平均准确率，末行为平均值；
  `*` 表示该系统在该领域对上显著优于某个比较对象（单尾 Welch 检验）
- welch.csv：所有比较项的检验结果
- overlap.txt：枢纽重叠报告（可选）
"""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Union

from tabulate import tabulate

from neural_scl.core.benchmark import BenchmarkResult

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ['source', 'target', 'system', 'seed', 'accuracy', 'best_epoch', 'config_hash']
WELCH_COLUMNS = ['source', 'target', 'system_a', 'system_b', 't_statistic', 'degrees_of_freedom',
                 'p_value_one_tailed', 'significant']
AVERAGE_ROW = 'Ave.'
SIGNIFICANCE_MARK = '*'


def write_results_csv(result: BenchmarkResult, path: Union[str, Path]) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(RESULT_COLUMNS)
        for run in result.runs:
            writer.writerow([run.source, run.target, run.system, run.seed, repr(float(run.accuracy)),
                             run.best_epoch, run.config_hash])


def read_results_csv(path: Union[str, Path]) -> List[Dict[str, object]]:
    """读回 results.csv，数值列转换为对应类型"""
    with open(path, 'r', encoding='utf-8', newline='') as f:
        rows = list(csv.DictReader(f))
    for row in rows:
        row['seed'] = int(row['seed'])
        row['accuracy'] = float(row['accuracy'])
        row['best_epoch'] = int(row['best_epoch'])
    return rows


def write_welch_csv(result: BenchmarkResult, path: Union[str, Path]) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(WELCH_COLUMNS)
        for c in result.comparisons:
            if c.welch is None:
                stats = ['', '', '']
            else:
                stats = [repr(c.welch.t_statistic), repr(c.welch.degrees_of_freedom),
                         repr(c.welch.p_value_one_tailed)]
            writer.writerow([c.source, c.target, c.system_a, c.system_b] + stats
                            + [str(c.significant).lower()])


def summary_rows(result: BenchmarkResult) -> List[List[str]]:
    """
    汇总表的数据行：每个有结果的领域对一行，最后一行是各系统的平均值

    没有任何运行结果时返回空列表。
    """
    systems = list(result.config.systems)
    pairs = [pair for pair in result.config.pairs
             if any(r.pair == pair for r in result.runs)]
    rows = []
    for pair in pairs:
        row = [f"{pair[0]} -> {pair[1]}"]
        for system in systems:
            mean = result.mean_accuracy(pair, system)
            if mean is None:
                row.append('-')
                continue
            mark = SIGNIFICANCE_MARK if result.significant_over(pair, system) else ''
            row.append(f"{mean:.4f}{mark}")
        rows.append(row)
    if rows:
        averages = [result.system_average(system) for system in systems]
        rows.append([AVERAGE_ROW] + ['-' if a is None else f"{a:.4f}" for a in averages])
    return rows


def summary_table(result: BenchmarkResult, tablefmt: str = 'github') -> str:
    headers = ['pair'] + list(result.config.systems)
    return tabulate(summary_rows(result), headers=headers, tablefmt=tablefmt, disable_numparse=True)


def emit_report(result: BenchmarkResult, output_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    把基准结果写成表格文件

    Args:
        result: 基准实验结果
        output_dir: 输出目录（不存在时创建）

    Returns:
        {名称: 文件路径}
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        'results': output_dir / 'results.csv',
        'summary_md': output_dir / 'summary.md',
        'summary_txt': output_dir / 'summary.txt',
        'welch': output_dir / 'welch.csv',
    }
    write_results_csv(result, paths['results'])
    write_welch_csv(result, paths['welch'])
    paths['summary_md'].write_text(summary_table(result, 'github') + '\n', encoding='utf-8')
    paths['summary_txt'].write_text(summary_table(result, 'pretty') + '\n', encoding='utf-8')

    if result.overlaps:
        paths['overlap'] = output_dir / 'overlap.txt'
        sections = [report.to_text(a, b) for (a, b), report in sorted(result.overlaps.items())]
        paths['overlap'].write_text('\n'.join(sections), encoding='utf-8')

    logger.info(f"结果已写入 {output_dir}: {len(result.runs)} 次运行，{len(result.comparisons)} 项比较")
    return paths
