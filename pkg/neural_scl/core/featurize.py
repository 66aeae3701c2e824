"""
特征化模块

在所有可用语料上构建一元+二元词表，并把文档映射为稀疏二值向量。
设计矩阵内部使用 scipy.sparse.csr_matrix 存储，所有存储值均为 1.0。
"""

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Union

import numpy as np
import scipy.sparse as sp

from neural_scl.core.corpus import Corpus, Document
from neural_scl.utils.errors import DimensionMismatchError, NeuralSCLError, UnknownDomainError

logger = logging.getLogger(__name__)

BIGRAM_JOINER = '_'


def document_terms(doc: Document) -> Set[str]:
    """
    文档中出现的全部词项（去重）

    processed 格式的文档 token 本身就是特征；原始文本文档取一元词和相邻二元词。
    """
    if doc.ngram_features:
        return set(doc.tokens)
    terms = set(doc.tokens)
    for left, right in zip(doc.tokens, doc.tokens[1:]):
        terms.add(f"{left}{BIGRAM_JOINER}{right}")
    return terms


@dataclass(frozen=True)
class Vocabulary:
    """
    词项到下标的映射

    terms 按字典序排列；df_by_domain[domain] 是与 terms 对齐的文档频率数组。
    """

    terms: tuple
    index: Dict[str, int]
    df_total: np.ndarray
    df_by_domain: Dict[str, np.ndarray]

    @property
    def n(self) -> int:
        return len(self.terms)

    def df(self, term: str, domain: str) -> int:
        if domain not in self.df_by_domain:
            raise UnknownDomainError(f"未知领域: {domain}")
        position = self.index.get(term)
        return 0 if position is None else int(self.df_by_domain[domain][position])

    def domain_df(self, domain: str) -> np.ndarray:
        if domain not in self.df_by_domain:
            raise UnknownDomainError(f"词表中没有领域 {domain} 的文档频率")
        return self.df_by_domain[domain]

    def save(self, path: Union[str, Path]) -> None:
        """按下标顺序写出 `term<TAB>index<TAB>df_total`"""
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            for position, term in enumerate(self.terms):
                f.write(f"{term}\t{position}\t{int(self.df_total[position])}\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'Vocabulary':
        """读取词表文件（领域文档频率不在文件中，读回后为空）"""
        terms: List[str] = []
        df_total: List[int] = []
        with open(path, 'r', encoding='utf-8') as f:
            for line_number, line in enumerate(f, start=1):
                line = line.rstrip('\n')
                if not line:
                    continue
                parts = line.split('\t')
                if len(parts) != 3 or int(parts[1]) != len(terms):
                    raise NeuralSCLError(f"{path}:{line_number}: 词表行格式错误")
                terms.append(parts[0])
                df_total.append(int(parts[2]))
        return cls(
            terms=tuple(terms),
            index={term: i for i, term in enumerate(terms)},
            df_total=np.array(df_total, dtype=np.int64),
            df_by_domain={},
        )


def build_vocabulary(corpora: Sequence[Corpus], min_df: int = 5) -> Vocabulary:
    """
    构建词表：总文档频率不低于 min_df 的一元/二元词进入词表

    Args:
        corpora: 语料列表（源领域有标签、源/目标无标签等）
        min_df: 最小文档频率

    Returns:
        Vocabulary，词项按字典序排列，并记录各领域文档频率

    Raises:
        NeuralSCLError: 语料列表为空或 min_df 小于1
    """
    if not corpora:
        raise NeuralSCLError("构建词表至少需要一个语料")
    if min_df < 1:
        raise NeuralSCLError(f"min_df 必须不小于1: {min_df}")

    total: Counter = Counter()
    per_domain: Dict[str, Counter] = {}
    for corpus in corpora:
        domain_counter = per_domain.setdefault(corpus.domain, Counter())
        for doc in corpus:
            terms = document_terms(doc)
            total.update(terms)
            domain_counter.update(terms)

    kept = sorted(term for term, count in total.items() if count >= min_df)
    index = {term: i for i, term in enumerate(kept)}
    df_total = np.array([total[term] for term in kept], dtype=np.int64)
    df_by_domain = {
        domain: np.array([counter.get(term, 0) for term in kept], dtype=np.int64)
        for domain, counter in sorted(per_domain.items())
    }
    logger.info(f"词表构建完成: {len(kept)} 个词项 (候选 {len(total)}，min_df={min_df})")
    return Vocabulary(terms=tuple(kept), index=index, df_total=df_total, df_by_domain=df_by_domain)


@dataclass(frozen=True)
class SparseVector:
    """二值稀疏向量：indices 严格递增，values 全为 1.0"""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise DimensionMismatchError("indices 与 values 长度不一致")
        if len(self.indices) and (np.any(np.diff(self.indices) <= 0) or self.indices[-1] >= self.dim
                                  or self.indices[0] < 0):
            raise DimensionMismatchError("indices 必须严格递增且小于 dim")

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, self.indices, np.array([0, len(self.indices)])),
            shape=(1, self.dim),
        )


def vectorize(doc: Document, vocab: Vocabulary) -> SparseVector:
    """
    把文档映射为二值存在向量，词表外的词项直接丢弃

    Args:
        doc: 文档
        vocab: 词表

    Returns:
        SparseVector，dim 等于词表大小
    """
    positions = {vocab.index[term] for term in document_terms(doc) if term in vocab.index}
    indices = np.array(sorted(positions), dtype=np.int64)
    return SparseVector(indices=indices, values=np.ones(len(indices)), dim=vocab.n)


class DesignMatrix:
    """
    设计矩阵：若干二值稀疏行 + 可选的平行标签

    X 为 (行数 × dim) 的 csr_matrix，labels 为 int64 数组或 None。
    """

    def __init__(self, X: sp.csr_matrix, labels: Optional[np.ndarray] = None):
        X = sp.csr_matrix(X, dtype=np.float64)
        X.sort_indices()
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (X.shape[0],):
                raise DimensionMismatchError(f"标签数 {labels.shape} 与行数 {X.shape[0]} 不一致")
        self.X = X
        self.labels = labels

    @classmethod
    def from_rows(cls, rows: Sequence[SparseVector], dim: int,
                  labels: Optional[Iterable[int]] = None) -> 'DesignMatrix':
        indptr = [0]
        indices: List[np.ndarray] = []
        for row in rows:
            if row.dim != dim:
                raise DimensionMismatchError(f"行维度 {row.dim} 与矩阵维度 {dim} 不一致")
            indices.append(row.indices)
            indptr.append(indptr[-1] + len(row.indices))
        flat = np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64)
        X = sp.csr_matrix((np.ones(len(flat)), flat, np.array(indptr)), shape=(len(rows), dim))
        return cls(X, None if labels is None else np.fromiter(labels, dtype=np.int64))

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def labeled(self) -> bool:
        return self.labels is not None

    def __len__(self) -> int:
        return self.n_rows

    def row(self, i: int) -> SparseVector:
        start, end = self.X.indptr[i], self.X.indptr[i + 1]
        return SparseVector(
            indices=self.X.indices[start:end].astype(np.int64),
            values=self.X.data[start:end].copy(),
            dim=self.dim,
        )

    def subset(self, positions) -> 'DesignMatrix':
        positions = np.asarray(positions, dtype=np.int64)
        labels = None if self.labels is None else self.labels[positions]
        return DesignMatrix(self.X[positions], labels)

    def without_labels(self) -> 'DesignMatrix':
        return DesignMatrix(self.X, None)

    def document_frequency(self) -> np.ndarray:
        return np.asarray((self.X > 0).sum(axis=0)).ravel().astype(np.int64)

    @staticmethod
    def vstack(matrices: Sequence['DesignMatrix'], keep_labels: bool = True) -> 'DesignMatrix':
        """纵向拼接；只有全部有标签且 keep_labels 为 True 时保留标签"""
        if not matrices:
            raise NeuralSCLError("vstack 至少需要一个矩阵")
        dims = {m.dim for m in matrices}
        if len(dims) != 1:
            raise DimensionMismatchError(f"矩阵维度不一致: {sorted(dims)}")
        X = sp.vstack([m.X for m in matrices], format='csr')
        labels = None
        if keep_labels and all(m.labels is not None for m in matrices):
            labels = np.concatenate([m.labels for m in matrices])
        return DesignMatrix(X, labels)


def vectorize_corpus(corpus: Corpus, vocab: Vocabulary) -> DesignMatrix:
    """
    按顺序对语料中每个文档调用 vectorize

    Args:
        corpus: 语料
        vocab: 词表

    Returns:
        DesignMatrix；语料有标签时携带标签
    """
    rows = [vectorize(doc, vocab) for doc in corpus]
    labels = [doc.label for doc in corpus] if corpus.labeled else None
    return DesignMatrix.from_rows(rows, vocab.n, labels)


def drop_columns(X: sp.csr_matrix, columns) -> sp.csr_matrix:
    """
    把指定列的存储值置零并移除（维度不变）

    用于在联合模型输入中屏蔽枢纽特征。
    """
    X = sp.csr_matrix(X, copy=True)
    mask = np.zeros(X.shape[1], dtype=bool)
    mask[np.asarray(columns, dtype=np.int64)] = True
    X.data[mask[X.indices]] = 0.0
    X.eliminate_zeros()
    return X
