"""
多领域、多种子基准实验

对每个有序领域对 (S, T) 和每个种子：
1. 切分源领域有标签数据（默认 1600/400）
2. 在 S 有标签、S 无标签、T 无标签文档上构建词表
3. 按各系统的策略选择枢纽（oracle 策略只在选择枢纽时读取目标领域标签）
4. 训练并在完整的目标领域有标签数据上评估

并行单元是 (领域对, 种子)：同一单元内的各系统共享切分、词表与枢纽。
结果按 (领域对, 系统, 种子) 的规范顺序归并，与完成顺序无关。
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from neural_scl import __version__
from neural_scl.config import (
    AESCLConfig,
    BenchmarkConfig,
    ClassicSCLConfig,
    LogRegConfig,
    TrainConfig,
    config_hash,
)
from neural_scl.core.corpus import DomainData, SplitSpec, split
from neural_scl.core.evaluation import evaluate
from neural_scl.core.featurize import DesignMatrix, Vocabulary, build_vocabulary, vectorize_corpus
from neural_scl.core.models import train_aescl, train_classic_scl, train_joint, train_logreg
from neural_scl.core.neural import derive_seeds
from neural_scl.core.pivot import OverlapReport, PivotSet, candidate_features, pivot_overlap, select_pivots
from neural_scl.core.stats import WelchResult, welch_one_tailed
from neural_scl.utils.errors import DegenerateInputError, MissingDataError

logger = logging.getLogger(__name__)

# 系统 -> 枢纽选择策略（logreg 不使用枢纽）
SYSTEM_STRATEGY = {
    'logreg': None,
    'aescl': 'mi_source',
    'classic_scl': 'mi_source',
    'joint_mi': 'mi_source',
    'joint_oracle': 'mi_oracle',
    'joint_random': 'random',
    'joint_freq': 'frequency',
}


@dataclass(frozen=True)
class RunResult:
    """单次 (领域对, 系统, 种子) 运行的结果"""

    source: str
    target: str
    system: str
    seed: int
    accuracy: float
    best_epoch: int
    config_hash: str
    manifest: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def pair(self) -> Tuple[str, str]:
        return self.source, self.target


@dataclass(frozen=True)
class ComparisonResult:
    """某个领域对上 system_a > system_b 的单尾 Welch 检验"""

    source: str
    target: str
    system_a: str
    system_b: str
    welch: Optional[WelchResult]
    significant: bool


@dataclass
class BenchmarkResult:
    config: BenchmarkConfig
    runs: List[RunResult] = field(default_factory=list)
    comparisons: List[ComparisonResult] = field(default_factory=list)
    overlaps: Dict[Tuple[str, str], OverlapReport] = field(default_factory=dict)

    def accuracies(self, pair: Tuple[str, str], system: str) -> List[float]:
        return [r.accuracy for r in self.runs if r.pair == pair and r.system == system]

    def mean_accuracy(self, pair: Tuple[str, str], system: str) -> Optional[float]:
        values = self.accuracies(pair, system)
        return float(np.mean(values)) if values else None

    def system_average(self, system: str) -> Optional[float]:
        """所有领域对上该系统平均准确率的平均"""
        means = [self.mean_accuracy(pair, system) for pair in self.config.pairs]
        means = [m for m in means if m is not None]
        return float(np.mean(means)) if means else None

    def significant_over(self, pair: Tuple[str, str], system: str) -> List[str]:
        """该领域对上 system 显著优于的系统"""
        return [c.system_b for c in self.comparisons
                if (c.source, c.target) == pair and c.system_a == system and c.significant]


@dataclass(frozen=True)
class BenchmarkTask:
    """一个并行单元：一个领域对上的一个种子"""

    source: DomainData
    target: DomainData
    seed: int
    split_seed: int
    config: BenchmarkConfig
    train_config: TrainConfig
    aescl_config: AESCLConfig
    classic_config: ClassicSCLConfig
    logreg_config: LogRegConfig
    data_hashes: Dict[str, str] = field(default_factory=dict)


@dataclass
class TaskOutput:
    runs: List[RunResult]
    pivots: Dict[str, PivotSet]
    vocabulary_size: int
    candidates: int


@dataclass
class PreparedPair:
    """一个 (领域对, 种子) 上所有系统共享的数据"""

    train: DesignMatrix
    validation: DesignMatrix
    unlabeled: DesignMatrix
    target_test: DesignMatrix
    vocabulary_size: int
    candidates: List[int]


def prepare_pair(source: DomainData, target: DomainData, split_spec: SplitSpec, min_df: int,
                 candidate_min_df: int) -> Tuple[PreparedPair, Vocabulary]:
    """
    切分、构建词表并向量化一个领域对

    目标领域有标签文档不参与词表构建，只被向量化为测试矩阵。

    Returns:
        (PreparedPair, 该领域对的词表)
    """
    train_corpus, val_corpus = split(source.labeled, split_spec)
    vocab = build_vocabulary([source.labeled, source.unlabeled, target.unlabeled], min_df=min_df)
    candidates = candidate_features(vocab, (source.domain, target.domain), candidate_min_df)
    logger.info(f"{source.domain} -> {target.domain}: 词表 {vocab.n}，枢纽候选 {len(candidates)}")
    unlabeled = DesignMatrix.vstack(
        [vectorize_corpus(source.unlabeled, vocab), vectorize_corpus(target.unlabeled, vocab)],
        keep_labels=False,
    )
    return PreparedPair(
        train=vectorize_corpus(train_corpus, vocab),
        validation=vectorize_corpus(val_corpus, vocab),
        unlabeled=unlabeled,
        target_test=vectorize_corpus(target.labeled, vocab),
        vocabulary_size=vocab.n,
        candidates=candidates,
    ), vocab


def select_strategy_pivots(prepared: PreparedPair, strategy: str, p: int, seed: int,
                           candidate_min_df: int) -> PivotSet:
    """按策略选择枢纽；mi_oracle 是唯一读取目标领域标签的路径"""
    if strategy == 'mi_source':
        matrix = prepared.train
    elif strategy == 'mi_oracle':
        matrix = prepared.target_test
    elif strategy == 'frequency':
        matrix = DesignMatrix.vstack([prepared.train, prepared.unlabeled], keep_labels=False)
    else:
        matrix = prepared.train.without_labels()
    return select_pivots(matrix, prepared.candidates, p, strategy, seed=seed,
                         candidate_min_df=candidate_min_df)


def _audit_training_inputs(target_test: DesignMatrix, *matrices: Optional[DesignMatrix]) -> None:
    """训练函数的输入不得携带目标领域标签"""
    for matrix in matrices:
        if matrix is None:
            continue
        assert matrix is not target_test, "目标领域测试矩阵被传入训练"
        assert matrix.labels is None or matrix.labels is not target_test.labels, \
            "目标领域标签被传入训练"


def _train_system(system: str, prepared: PreparedPair, pivots: Optional[PivotSet], task: BenchmarkTask):
    """训练一个系统，返回 (模型, best_epoch, 参与哈希的配置)"""
    train, val, unlabeled = prepared.train, prepared.validation, prepared.unlabeled
    assert unlabeled.labels is None, "无标签矩阵不应携带标签"
    _audit_training_inputs(prepared.target_test, train, val, unlabeled)
    logreg_cfg = replace(task.logreg_config, seed=task.seed)

    if system == 'logreg':
        model = train_logreg(train, val, logreg_cfg, description=f'logreg-{task.seed}')
        return model, model.best_epoch, (logreg_cfg,)
    if system == 'aescl':
        model = train_aescl(train, val, unlabeled, pivots, task.aescl_config, logreg_cfg)
        return model, model.classifier.best_epoch, (task.aescl_config, logreg_cfg)
    if system == 'classic_scl':
        model = train_classic_scl(train, unlabeled, pivots, cfg=task.classic_config,
                                  logreg_cfg=logreg_cfg, source_val=val)
        return model, model.classifier.best_epoch, (task.classic_config, logreg_cfg)
    train_cfg = task.train_config.with_seed(task.seed)
    model = train_joint(train, val, unlabeled, pivots, train_cfg)
    return model, model.best_epoch, (train_cfg,)


def run_task(task: BenchmarkTask) -> TaskOutput:
    """
    执行一个 (领域对, 种子) 单元内的所有系统

    Returns:
        TaskOutput，runs 按 config.systems 的顺序排列
    """
    cfg = task.config
    source, target = task.source.domain, task.target.domain
    split_spec = SplitSpec(cfg.train_size, cfg.validation_size, seed=task.split_seed)
    prepared, vocab = prepare_pair(task.source, task.target, split_spec, cfg.min_df, cfg.candidate_min_df)

    pivot_cache: Dict[str, PivotSet] = {}
    runs = []
    for system in cfg.systems:
        strategy = SYSTEM_STRATEGY[system]
        pivots = None
        if strategy is not None:
            if strategy not in pivot_cache:
                pivot_cache[strategy] = select_strategy_pivots(
                    prepared, strategy, task.train_config.p, task.seed, cfg.candidate_min_df
                ).with_terms(vocab)
            pivots = pivot_cache[strategy]

        model, best_epoch, configs = _train_system(system, prepared, pivots, task)
        acc = evaluate(model, prepared.target_test)
        manifest = {
            'version': __version__,
            'source': source,
            'target': target,
            'system': system,
            'seed': task.seed,
            'split_seed': task.split_seed,
            'split': {'train_size': cfg.train_size, 'validation_size': cfg.validation_size},
            'min_df': cfg.min_df,
            'candidate_min_df': cfg.candidate_min_df,
            'vocabulary_size': prepared.vocabulary_size,
            'candidates': len(prepared.candidates),
            'pivot_strategy': strategy,
            'pivots': list(pivots.indices) if pivots is not None else [],
            'configs': {type(c).__name__: asdict(c) for c in configs},
            'data_hashes': dict(task.data_hashes),
        }
        runs.append(RunResult(source, target, system, task.seed, float(acc), int(best_epoch),
                              config_hash(*configs), manifest))
        logger.info(f"{source} -> {target} [{system}] seed={task.seed}: 目标准确率 {acc:.4f}")
    return TaskOutput(runs, pivot_cache, prepared.vocabulary_size, len(prepared.candidates))


def run_seeds(cfg: BenchmarkConfig) -> List[int]:
    return [cfg.base_seed + i for i in range(cfg.seeds)]


def build_tasks(data: Dict[str, DomainData], cfg: BenchmarkConfig, train_cfg: TrainConfig,
                aescl_cfg: AESCLConfig, classic_cfg: ClassicSCLConfig, logreg_cfg: LogRegConfig,
                data_hashes: Optional[Dict[str, str]] = None) -> List[BenchmarkTask]:
    """
    展开所有 (领域对, 种子) 单元

    Raises:
        MissingDataError: 任一领域缺少数据（在任何训练开始之前）
    """
    missing = [d for d in cfg.domains if d not in data]
    if missing:
        raise MissingDataError(f"缺少领域数据: {', '.join(missing)}")
    frozen_split = derive_seeds(cfg.base_seed)['split']
    tasks = []
    for source, target in cfg.pairs:
        for seed in run_seeds(cfg):
            split_seed = frozen_split if cfg.freeze_split else derive_seeds(seed)['split']
            hashes = {k: v for k, v in (data_hashes or {}).items()
                      if k.startswith(f"{source}.") or k.startswith(f"{target}.")}
            tasks.append(BenchmarkTask(data[source], data[target], seed, split_seed, cfg,
                                       train_cfg, aescl_cfg, classic_cfg, logreg_cfg, hashes))
    return tasks


def compare_systems(runs: Sequence[RunResult], cfg: BenchmarkConfig) -> List[ComparisonResult]:
    """对每个领域对上声明的比较项做单尾 Welch 检验（检验 system_a > system_b）"""
    results = []
    comparisons = [(a, b) for a, b in cfg.comparisons if a in cfg.systems and b in cfg.systems]
    for source, target in cfg.pairs:
        for system_a, system_b in comparisons:
            sample_a = [r.accuracy for r in runs if r.pair == (source, target) and r.system == system_a]
            sample_b = [r.accuracy for r in runs if r.pair == (source, target) and r.system == system_b]
            try:
                welch = welch_one_tailed(sample_a, sample_b)
            except DegenerateInputError as e:
                logger.warning(f"{source} -> {target}: {system_a} vs {system_b} 无法检验: {e}")
                welch = None
            significant = welch is not None and welch.significant(cfg.significance)
            results.append(ComparisonResult(source, target, system_a, system_b, welch, significant))
    return results


def _overlaps(outputs: Sequence[Tuple[BenchmarkTask, TaskOutput]], cfg: BenchmarkConfig):
    """每个无序领域对上，两个方向在第一个种子下的 MI 枢纽重叠"""
    first_seed = cfg.base_seed
    mi_pivots = {}
    for task, output in outputs:
        if task.seed == first_seed and 'mi_source' in output.pivots:
            mi_pivots[(task.source.domain, task.target.domain)] = output.pivots['mi_source']
    reports = {}
    for i, a in enumerate(cfg.domains):
        for b in cfg.domains[i + 1:]:
            if (a, b) in mi_pivots and (b, a) in mi_pivots:
                reports[(a, b)] = pivot_overlap(mi_pivots[(a, b)], mi_pivots[(b, a)])
                logger.info(f"枢纽重叠 {a} / {b}: {reports[(a, b)].overlap} 个共同词项")
    return reports


def run_benchmark(data: Dict[str, DomainData], cfg: BenchmarkConfig,
                  train_cfg: Optional[TrainConfig] = None, aescl_cfg: Optional[AESCLConfig] = None,
                  classic_cfg: Optional[ClassicSCLConfig] = None, logreg_cfg: Optional[LogRegConfig] = None,
                  overlap: bool = False, data_hashes: Optional[Dict[str, str]] = None) -> BenchmarkResult:
    """
    运行完整的基准实验

    Args:
        data: {领域: DomainData}
        cfg: 基准配置（领域、系统、种子数、并行度等）
        train_cfg, aescl_cfg, classic_cfg, logreg_cfg: 各系统的配置
        overlap: 是否计算枢纽重叠报告
        data_hashes: 输入文件哈希，写入每次运行的清单

    Returns:
        BenchmarkResult，runs 按 (领域对, 系统, 种子) 排序

    Raises:
        MissingDataError: 缺少某个领域的数据
    """
    train_cfg = train_cfg or TrainConfig()
    tasks = build_tasks(data, cfg, train_cfg, aescl_cfg or AESCLConfig(),
                        classic_cfg or ClassicSCLConfig(), logreg_cfg or LogRegConfig(), data_hashes)
    logger.info(f"基准实验: {len(cfg.pairs)} 个领域对 × {cfg.seeds} 个种子，"
                f"系统 {', '.join(cfg.systems)}，并行度 {cfg.jobs}")

    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            outputs = list(zip(tasks, pool.map(run_task, tasks)))
    else:
        outputs = [(task, run_task(task)) for task in tasks]

    pair_rank = {pair: i for i, pair in enumerate(cfg.pairs)}
    system_rank = {system: i for i, system in enumerate(cfg.systems)}
    runs = sorted((run for _, output in outputs for run in output.runs),
                  key=lambda r: (pair_rank[r.pair], system_rank[r.system], r.seed))

    result = BenchmarkResult(config=cfg, runs=runs, comparisons=compare_systems(runs, cfg))
    if overlap:
        result.overlaps = _overlaps(outputs, cfg)
    return result
