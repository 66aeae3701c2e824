"""
语料读取与切分模块

支持两种输入格式：
1. 多领域评论数据的 processed 格式：每行若干 `feature:count`，最后一个 token 为 `#label#:<tag>`
2. TSV 格式：`label<TAB>原始文本`（有标签）或 `原始文本`（无标签）

Corpus 构造后不可变，文档顺序与文件顺序严格一致。
"""

import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from neural_scl.utils.errors import CorpusParseError, MissingDataError, MissingLabelsError, SplitSizeError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

LABEL_MARKER = '#label#'
PROCESSED_LABELS = {'positive': 1, 'negative': 0, 'unlabeled': None}
TSV_LABELS = {'1': 1, '0': 0, 'positive': 1, 'negative': 0}

# 去掉 token 首尾的非字母数字字符（下划线也算非字母数字）
_EDGE_PUNCT = re.compile(r'^[\W_]+|[\W_]+$')


@dataclass(frozen=True)
class Document:
    """
    单个文本实例

    ngram_features 为 True 时 tokens 本身已经是 n-gram 特征（processed 格式），
    特征化时不再拼接相邻二元组。line_number 是文档在源文件中的行号（1 起），不参与相等比较。
    """

    id: int
    tokens: Tuple[str, ...]
    label: Optional[int]
    domain: str
    ngram_features: bool = False
    line_number: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class Corpus:
    """按文件顺序保存的文档集合"""

    documents: Tuple[Document, ...]
    domain: str
    labeled: bool

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @property
    def labels(self) -> Optional[np.ndarray]:
        if not self.labeled:
            return None
        return np.array([doc.label for doc in self.documents], dtype=np.int64)

    def subset(self, positions) -> 'Corpus':
        """按位置取子集，保持给定位置的顺序"""
        docs = tuple(self.documents[int(i)] for i in positions)
        return Corpus(documents=docs, domain=self.domain, labeled=self.labeled)

    def without_labels(self) -> 'Corpus':
        docs = tuple(replace(doc, label=None) for doc in self.documents)
        return Corpus(documents=docs, domain=self.domain, labeled=False)


@dataclass(frozen=True)
class SplitSpec:
    """训练/验证切分参数（默认 1600 训练 + 400 验证）"""

    train_size: int = 1600
    validation_size: int = 400
    seed: int = 0

    def __post_init__(self):
        if self.train_size < 0 or self.validation_size < 0:
            raise SplitSizeError(
                f"切分大小不能为负: train={self.train_size}, validation={self.validation_size}"
            )


def _read_lines(path: PathLike, encoding: str) -> List[str]:
    with open(path, 'r', encoding=encoding) as f:
        return f.read().splitlines()


def _build_corpus(documents: List[Document], domain: str, path: PathLike) -> Corpus:
    if not documents:
        raise CorpusParseError("文件中没有文档", path=str(path))
    has_label = [doc.label is not None for doc in documents]
    if any(has_label) and not all(has_label):
        first = documents[has_label.index(not has_label[0])]
        raise CorpusParseError("同一文件中混合了有标签和无标签文档", str(path), first.line_number)
    return Corpus(documents=tuple(documents), domain=domain, labeled=all(has_label))


def parse_processed(path: PathLike, domain: str, encoding: str = 'utf-8') -> Corpus:
    """
    读取 多领域评论数据的 processed 格式文件

    `feature:count` 会把 feature 重复 count 次放入 token 列表，
    二值化留到特征化阶段统一处理。

    Args:
        path: 文件路径
        domain: 领域标签，例如 "books"
        encoding: 文件编码

    Returns:
        Corpus，每个非空行对应一个 Document

    Raises:
        CorpusParseError: 行格式错误（带行号）或文件为空
    """
    documents: List[Document] = []
    for line_number, line in enumerate(_read_lines(path, encoding), start=1):
        if not line.strip():
            continue
        parts = line.split()
        label: Optional[int] = None
        tokens: List[str] = []
        for position, part in enumerate(parts):
            if part.startswith(LABEL_MARKER):
                if position != len(parts) - 1:
                    raise CorpusParseError("标签标记必须是最后一个token", str(path), line_number)
                tag = part[len(LABEL_MARKER):].lstrip(':')
                if tag not in PROCESSED_LABELS:
                    raise CorpusParseError(f"未知的标签: {tag!r}", str(path), line_number)
                label = PROCESSED_LABELS[tag]
                continue
            feature, sep, count_text = part.rpartition(':')
            if not sep or not feature:
                raise CorpusParseError(f"缺少 ':' 分隔符: {part!r}", str(path), line_number)
            try:
                count = int(count_text)
            except ValueError:
                raise CorpusParseError(f"计数不是整数: {part!r}", str(path), line_number) from None
            if count <= 0:
                raise CorpusParseError(f"计数必须为正: {part!r}", str(path), line_number)
            tokens.extend([feature] * count)
        if not tokens:
            raise CorpusParseError("空文档", str(path), line_number)
        documents.append(Document(
            id=len(documents),
            tokens=tuple(tokens),
            label=label,
            domain=domain,
            ngram_features=True,
            line_number=line_number,
        ))

    corpus = _build_corpus(documents, domain, path)
    logger.info(f"读取 processed 文件: {path}，文档数 {len(corpus)}，有标签: {corpus.labeled}")
    return corpus


def tokenize(text: str) -> List[str]:
    """
    原始文本分词：小写、按空白切分、去掉首尾非字母数字字符

    Args:
        text: 原始文本

    Returns:
        token 列表（空 token 被丢弃）
    """
    tokens = []
    for raw in text.lower().split():
        token = _EDGE_PUNCT.sub('', raw)
        if token:
            tokens.append(token)
    return tokens


def parse_tsv(path: PathLike, domain: str, labeled: bool, encoding: str = 'utf-8') -> Corpus:
    """
    读取 TSV 格式文件

    Args:
        path: 文件路径
        domain: 领域标签
        labeled: True 表示每行形如 `label<TAB>text`

    Returns:
        Corpus

    Raises:
        CorpusParseError: 标签非法、缺少制表符、空文档或文件为空
    """
    documents: List[Document] = []
    for line_number, line in enumerate(_read_lines(path, encoding), start=1):
        if not line.strip():
            continue
        label: Optional[int] = None
        text = line
        if labeled:
            label_text, sep, text = line.partition('\t')
            if not sep:
                raise CorpusParseError("有标签行缺少制表符", str(path), line_number)
            label_text = label_text.strip().lower()
            if label_text not in TSV_LABELS:
                raise CorpusParseError(f"非法标签: {label_text!r}", str(path), line_number)
            label = TSV_LABELS[label_text]
        tokens = tokenize(text)
        if not tokens:
            raise CorpusParseError("空文档", str(path), line_number)
        documents.append(Document(id=len(documents), tokens=tuple(tokens), label=label, domain=domain,
                                  line_number=line_number))

    corpus = _build_corpus(documents, domain, path)
    logger.info(f"读取 TSV 文件: {path}，文档数 {len(corpus)}，有标签: {corpus.labeled}")
    return corpus


def read_corpus(path: PathLike, domain: str, labeled: bool, fmt: Optional[str] = None) -> Corpus:
    """
    按格式读取语料，fmt 为空时根据扩展名判断（.tsv 为 TSV，其余为 processed）

    Raises:
        MissingLabelsError: 要求有标签但文件中没有标签
    """
    fmt = fmt or ('tsv' if str(path).endswith('.tsv') else 'processed')
    if fmt == 'tsv':
        corpus = parse_tsv(path, domain, labeled=labeled)
    else:
        corpus = parse_processed(path, domain)
    if labeled and not corpus.labeled:
        raise MissingLabelsError(f"文件没有标签: {path}")
    return corpus


def split(corpus: Corpus, spec: SplitSpec) -> Tuple[Corpus, Corpus]:
    """
    按种子随机置换后切分训练集和验证集（不分层）

    Args:
        corpus: 有标签语料
        spec: 切分参数

    Returns:
        (train, validation)，两者都保持置换后的顺序

    Raises:
        MissingLabelsError: 语料无标签
        SplitSizeError: 语料太小
    """
    if not corpus.labeled:
        raise MissingLabelsError(f"只能切分有标签语料: {corpus.domain}")
    needed = spec.train_size + spec.validation_size
    if needed > len(corpus):
        raise SplitSizeError(f"语料只有 {len(corpus)} 个文档，切分需要 {needed} 个")

    permutation = np.random.default_rng(spec.seed).permutation(len(corpus))
    train = corpus.subset(permutation[:spec.train_size])
    validation = corpus.subset(permutation[spec.train_size:needed])
    logger.debug(f"切分 {corpus.domain}: train={len(train)}, validation={len(validation)}, seed={spec.seed}")
    return train, validation


@dataclass(frozen=True)
class DomainData:
    """一个领域的有标签语料与无标签语料"""

    domain: str
    labeled: Corpus
    unlabeled: Corpus


def domain_files(data_dir: PathLike, domain: str, fmt: Optional[str] = None) -> Tuple[Path, Path]:
    """
    领域数据文件路径：`<domain>.labeled` / `<domain>.unlabeled`，TSV 格式再加 `.tsv` 后缀

    fmt 为空时优先使用 processed 文件，不存在时尝试 TSV 文件。
    """
    base = Path(data_dir)
    processed = (base / f"{domain}.labeled", base / f"{domain}.unlabeled")
    tsv = (base / f"{domain}.labeled.tsv", base / f"{domain}.unlabeled.tsv")
    if fmt == 'tsv':
        return tsv
    if fmt == 'processed':
        return processed
    if all(p.exists() for p in processed) or not all(p.exists() for p in tsv):
        return processed
    return tsv


def load_domains(data_dir: PathLike, domains, fmt: Optional[str] = None) -> Dict[str, DomainData]:
    """
    读取所有领域的数据；任何文件缺失时在读取前一次性报错

    Raises:
        MissingDataError: 缺少某个领域的数据文件
    """
    files = {domain: domain_files(data_dir, domain, fmt) for domain in domains}
    missing = [str(p) for pair in files.values() for p in pair if not p.exists()]
    if missing:
        raise MissingDataError(f"缺少数据文件: {', '.join(missing)}")
    data = {}
    for domain, (labeled_path, unlabeled_path) in files.items():
        data[domain] = DomainData(
            domain=domain,
            labeled=read_corpus(labeled_path, domain, labeled=True),
            unlabeled=read_corpus(unlabeled_path, domain, labeled=False),
        )
    return data


def domain_from_file(path: PathLike, role: str, fmt: Optional[str] = None) -> DomainData:
    """
    用单个文件构造一个领域，领域名取文件名中第一个 '.' 之前的部分（books.lab -> books）

    role 为 'source' 时文件必须有标签，作为源领域有标签语料，无标签语料为空。
    role 为 'target' 时文件文本作为目标领域无标签语料；文件有标签时同时保留为目标领域测试语料。

    Raises:
        MissingLabelsError: 源领域文件没有标签
    """
    path = Path(path)
    domain = path.name.split('.')[0]
    empty = Corpus(documents=(), domain=domain, labeled=False)
    if role == 'source':
        return DomainData(domain=domain, labeled=read_corpus(path, domain, labeled=True, fmt=fmt),
                          unlabeled=empty)
    corpus = read_corpus(path, domain, labeled=False, fmt=fmt)
    return DomainData(domain=domain, labeled=corpus if corpus.labeled else empty,
                      unlabeled=corpus.without_labels())
