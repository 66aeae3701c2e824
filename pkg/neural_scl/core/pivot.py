"""
枢纽特征选择模块

支持四种策略：
1. mi_source: 在源领域有标签数据上按互信息排序
2. mi_oracle: 在目标领域有标签数据上按互信息排序（仅用于上界分析）
3. frequency: 按文档频率排序
4. random: 在候选特征中均匀随机抽取

互信息使用自然对数（单位 nats）。
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from neural_scl.core.featurize import DesignMatrix, Vocabulary
from neural_scl.utils.errors import (
    ConfigError,
    DimensionMismatchError,
    MissingLabelsError,
    NeuralSCLError,
)

logger = logging.getLogger(__name__)

STRATEGIES = ('mi_source', 'mi_oracle', 'frequency', 'random')
MI_STRATEGIES = ('mi_source', 'mi_oracle')


@dataclass(frozen=True)
class PivotSet:
    """
    有序的枢纽特征集合

    indices 按分数降序排列，同分时下标小的在前；random 策略下按下标升序且 scores 为 None。
    truncated 为 True 表示候选数不足 p，结果被截断。
    """

    indices: Tuple[int, ...]
    scores: Optional[Tuple[float, ...]]
    strategy: str
    candidate_min_df: int = 10
    p: int = 100
    seed: int = 0
    truncated: bool = False
    terms: Optional[Tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise NeuralSCLError("枢纽特征下标必须互不相同")
        if self.scores is not None and len(self.scores) != len(self.indices):
            raise DimensionMismatchError("scores 与 indices 长度不一致")

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def index_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)

    def with_terms(self, vocab: Vocabulary) -> 'PivotSet':
        terms = tuple(vocab.terms[i] for i in self.indices)
        return PivotSet(self.indices, self.scores, self.strategy, self.candidate_min_df,
                        self.p, self.seed, self.truncated, terms)

    def term_list(self, vocab: Optional[Vocabulary] = None) -> List[str]:
        if vocab is not None:
            return [vocab.terms[i] for i in self.indices]
        if self.terms is None:
            raise NeuralSCLError("枢纽集合没有记录词项，需要提供词表")
        return list(self.terms)

    def save(self, path: Union[str, Path], vocab: Optional[Vocabulary] = None) -> None:
        """
        写出枢纽文件

        文件以 `# key: value` 形式的头部开始，随后每行 `rank<TAB>index<TAB>term<TAB>score`，
        random 策略的分数写作 `-`。
        """
        terms = self.term_list(vocab) if (vocab is not None or self.terms is not None) \
            else [''] * len(self.indices)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(f"# strategy: {self.strategy}\n")
            f.write(f"# seed: {self.seed}\n")
            f.write(f"# p: {self.p}\n")
            f.write(f"# candidate_min_df: {self.candidate_min_df}\n")
            f.write(f"# truncated: {str(self.truncated).lower()}\n")
            for rank, (index, term) in enumerate(zip(self.indices, terms)):
                score = '-' if self.scores is None else repr(float(self.scores[rank]))
                f.write(f"{rank}\t{index}\t{term}\t{score}\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'PivotSet':
        header: Dict[str, str] = {}
        indices: List[int] = []
        scores: List[Optional[float]] = []
        terms: List[str] = []
        with open(path, 'r', encoding='utf-8') as f:
            for line_number, line in enumerate(f, start=1):
                line = line.rstrip('\n')
                if not line:
                    continue
                if line.startswith('#'):
                    key, _, value = line[1:].partition(':')
                    header[key.strip()] = value.strip()
                    continue
                parts = line.split('\t')
                if len(parts) != 4 or int(parts[0]) != len(indices):
                    raise NeuralSCLError(f"{path}:{line_number}: 枢纽文件行格式错误")
                indices.append(int(parts[1]))
                terms.append(parts[2])
                scores.append(None if parts[3] == '-' else float(parts[3]))

        strategy = header.get('strategy', '')
        if strategy not in STRATEGIES:
            raise NeuralSCLError(f"{path}: 枢纽文件头部缺少合法的 strategy")
        return cls(
            indices=tuple(indices),
            scores=None if any(s is None for s in scores) else tuple(scores),
            strategy=strategy,
            candidate_min_df=int(header.get('candidate_min_df', 10)),
            p=int(header.get('p', len(indices))),
            seed=int(header.get('seed', 0)),
            truncated=header.get('truncated', 'false') == 'true',
            terms=tuple(terms),
        )


def candidate_features(vocab: Vocabulary, domains: Tuple[str, str], min_df_each: int = 10) -> List[int]:
    """
    两个领域中文档频率都不低于 min_df_each 的特征下标（升序）

    Args:
        vocab: 带领域文档频率的词表
        domains: (源领域, 目标领域)
        min_df_each: 每个领域的最小文档频率（含边界）

    Raises:
        UnknownDomainError: 词表中没有该领域
    """
    source, target = domains
    mask = (vocab.domain_df(source) >= min_df_each) & (vocab.domain_df(target) >= min_df_each)
    candidates = np.flatnonzero(mask).tolist()
    logger.info(f"候选枢纽特征: {len(candidates)} 个 ({source}/{target}, min_df={min_df_each})")
    return candidates


def _plugin_terms(n_fy: np.ndarray, n_f: np.ndarray, n_y: np.ndarray, n: float) -> np.ndarray:
    # 计数为0的单元贡献为0
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = (n_fy / n) * np.log(n_fy * n / (n_f * n_y))
    return np.where(n_fy > 0, terms, 0.0)


def mutual_information_from_counts(n11, n10, n01, n00) -> np.ndarray:
    """
    由2×2列联表计数计算互信息（可向量化）

    n11 表示特征出现且标签为1的样本数，n10 表示特征出现且标签为0，依此类推。
    """
    n11, n10, n01, n00 = (np.asarray(c, dtype=np.float64) for c in (n11, n10, n01, n00))
    n = n11 + n10 + n01 + n00
    f1, f0 = n11 + n10, n01 + n00
    y1, y0 = n11 + n01, n10 + n00
    total = (_plugin_terms(n11, f1, y1, n) + _plugin_terms(n10, f1, y0, n)
             + _plugin_terms(n01, f0, y1, n) + _plugin_terms(n00, f0, y0, n))
    # 浮点误差可能产生极小的负数
    return np.maximum(total, 0.0)


def mutual_information(feature_column: Sequence[int], labels: Sequence[int]) -> float:
    """
    二值特征与二值标签之间的互信息（插件估计，单位 nats）

    Args:
        feature_column: 特征存在向量
        labels: 标签向量

    Returns:
        互信息值 (>= 0)

    Raises:
        DimensionMismatchError: 长度不一致或为空
    """
    f = np.asarray(feature_column).astype(bool)
    y = np.asarray(labels).astype(bool)
    if f.shape != y.shape or f.ndim != 1 or len(f) == 0:
        raise DimensionMismatchError(f"特征与标签长度必须相同且不为0: {f.shape} vs {y.shape}")
    n11 = np.sum(f & y)
    n10 = np.sum(f & ~y)
    n01 = np.sum(~f & y)
    n00 = np.sum(~f & ~y)
    return float(mutual_information_from_counts(n11, n10, n01, n00))


def mutual_information_columns(X: sp.csr_matrix, labels: np.ndarray, columns: Sequence[int]) -> np.ndarray:
    """对稀疏设计矩阵的多列同时计算互信息"""
    labels = np.asarray(labels, dtype=np.float64)
    if X.shape[0] != len(labels) or len(labels) == 0:
        raise DimensionMismatchError(f"行数 {X.shape[0]} 与标签数 {len(labels)} 不一致")
    F = (X[:, np.asarray(columns, dtype=np.int64)] > 0).astype(np.float64).tocsc()
    n = float(len(labels))
    n_pos = float(labels.sum())
    n_f = np.asarray(F.sum(axis=0)).ravel()
    n11 = F.T @ labels
    n10 = n_f - n11
    n01 = n_pos - n11
    n00 = n - n_f - n_pos + n11
    return mutual_information_from_counts(n11, n10, n01, n00)


def _rank(candidates: np.ndarray, scores: np.ndarray, p: int) -> Tuple[np.ndarray, np.ndarray]:
    # 分数降序，同分按下标升序
    order = np.lexsort((candidates, -scores))[:p]
    return candidates[order], scores[order]


def select_pivots(matrix: DesignMatrix, candidates: Sequence[int], p: int, strategy: str,
                  seed: int = 0, candidate_min_df: int = 10) -> PivotSet:
    """
    按策略选择 p 个枢纽特征

    Args:
        matrix: 设计矩阵；mi_* 策略要求带标签（mi_oracle 时由调用方传入目标领域标签数据）
        candidates: 候选特征下标
        p: 枢纽数量
        strategy: mi_source / mi_oracle / frequency / random
        seed: random 策略的随机种子
        candidate_min_df: 记录在结果中的候选阈值

    Returns:
        PivotSet；候选不足 p 个时截断并设置 truncated 标记

    Raises:
        ConfigError: 未知策略或 p < 1
        MissingLabelsError: mi 策略缺少标签
    """
    if strategy not in STRATEGIES:
        raise ConfigError(f"未知的枢纽选择策略: {strategy}")
    if p < 1:
        raise ConfigError(f"p 必须不小于1: {p}")
    cand = np.unique(np.asarray(candidates, dtype=np.int64))
    if len(cand) and (cand[0] < 0 or cand[-1] >= matrix.dim):
        raise DimensionMismatchError(f"候选特征下标超出矩阵维度 {matrix.dim}")

    truncated = p > len(cand)
    if truncated:
        logger.warning(f"候选特征只有 {len(cand)} 个，少于 p={p}，枢纽集合被截断")

    if strategy in MI_STRATEGIES:
        if matrix.labels is None:
            raise MissingLabelsError(f"{strategy} 策略需要有标签数据")
        scores = mutual_information_columns(matrix.X, matrix.labels, cand)
        indices, kept = _rank(cand, scores, p)
        score_tuple: Optional[Tuple[float, ...]] = tuple(float(s) for s in kept)
    elif strategy == 'frequency':
        df = matrix.document_frequency()[cand].astype(np.float64)
        indices, kept = _rank(cand, df, p)
        score_tuple = tuple(float(s) for s in kept)
    else:
        rng = np.random.default_rng(seed)
        chosen = rng.choice(len(cand), size=min(p, len(cand)), replace=False)
        indices = np.sort(cand[chosen])
        score_tuple = None

    pivots = PivotSet(
        indices=tuple(int(i) for i in indices),
        scores=score_tuple,
        strategy=strategy,
        candidate_min_df=candidate_min_df,
        p=p,
        seed=seed,
        truncated=truncated,
    )
    logger.info(f"枢纽选择完成: strategy={strategy}, 数量={len(pivots)}")
    return pivots


@dataclass(frozen=True)
class OverlapReport:
    """两个枢纽集合在词项层面的重叠情况"""

    shared: Tuple[str, ...]
    a_only: Tuple[str, ...]
    b_only: Tuple[str, ...]

    @property
    def overlap(self) -> int:
        return len(self.shared)

    def to_text(self, name_a: str = 'a', name_b: str = 'b') -> str:
        lines = [f"shared: {len(self.shared)}"]
        lines.extend(f"  {term}" for term in self.shared)
        lines.append(f"{name_a}_only: {len(self.a_only)}")
        lines.extend(f"  {term}" for term in self.a_only)
        lines.append(f"{name_b}_only: {len(self.b_only)}")
        lines.extend(f"  {term}" for term in self.b_only)
        return '\n'.join(lines) + '\n'


def pivot_overlap(a: PivotSet, b: PivotSet, vocab_a: Optional[Vocabulary] = None,
                  vocab_b: Optional[Vocabulary] = None) -> OverlapReport:
    """
    在词项字符串上比较两个枢纽集合（两个集合可以来自不同词表）

    Args:
        a, b: 枢纽集合
        vocab_a, vocab_b: 对应词表；为空时使用枢纽集合自带的词项

    Returns:
        OverlapReport，各列表均已排序
    """
    terms_a = set(a.term_list(vocab_a))
    terms_b = set(b.term_list(vocab_b))
    return OverlapReport(
        shared=tuple(sorted(terms_a & terms_b)),
        a_only=tuple(sorted(terms_a - terms_b)),
        b_only=tuple(sorted(terms_b - terms_a)),
    )
