"""
合成双领域语料

两个领域共享一组"通用"词和一组噪声词，各自拥有一组领域专属词。
- 通用词在每个领域都出现，且与标签的相关方向在所有领域一致：前一半偏负面，后一半偏正面
- 领域专属词与标签相关，只出现在本领域
- 噪声词均匀出现，与标签无关

无标签文档按同样的过程生成（隐含标签不写出）。文档直接以特征袋形式给出，不再组合二元词。
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from neural_scl.config import SyntheticConfig
from neural_scl.core.corpus import Corpus, Document, DomainData

logger = logging.getLogger(__name__)

DOMAINS = ('alpha', 'beta')
# 每个 token 来自通用词、专属词、噪声词的概率
CATEGORY_PROBS = (0.1, 0.3, 0.6)


def _polarity_groups(terms: List[str]) -> Tuple[List[str], List[str]]:
    half = len(terms) // 2
    return terms[:half], terms[half:]


def _domain_vocabulary(cfg: SyntheticConfig, domain_index: int) -> Dict[str, object]:
    general = [f"gen{i:03d}" for i in range(cfg.general_terms)]
    specific = [f"{DOMAINS[domain_index]}{i:03d}" for i in range(cfg.specific_terms)]
    noise = [f"noise{i:03d}" for i in range(cfg.noise_terms)]
    return {
        'general': _polarity_groups(general),
        'specific': _polarity_groups(specific),
        'noise': noise,
    }


def _pick_polar(rng: np.random.Generator, groups: Tuple[List[str], List[str]], label: int,
                strength: float) -> str:
    negative, positive = groups
    if not negative:
        return positive[rng.integers(len(positive))]
    matching = rng.random() < strength
    group = positive if (label == 1) == matching else negative
    return group[rng.integers(len(group))]


def _document(rng: np.random.Generator, vocab: Dict[str, object], label: int,
              cfg: SyntheticConfig) -> List[str]:
    tokens = []
    categories = rng.choice(3, size=cfg.words_per_doc, p=CATEGORY_PROBS)
    for category in categories:
        if category == 0:
            tokens.append(_pick_polar(rng, vocab['general'], label, cfg.signal_strength))
        elif category == 1:
            tokens.append(_pick_polar(rng, vocab['specific'], label, cfg.signal_strength))
        else:
            noise = vocab['noise']
            tokens.append(noise[rng.integers(len(noise))])
    return tokens


def _corpus(rng: np.random.Generator, vocab: Dict[str, object], domain: str, size: int,
            labeled: bool, cfg: SyntheticConfig) -> Corpus:
    documents = []
    for i in range(size):
        label = int(rng.integers(2))
        tokens = _document(rng, vocab, label, cfg)
        documents.append(Document(id=i, tokens=tuple(tokens), label=label if labeled else None,
                                  domain=domain, ngram_features=True))
    return Corpus(documents=tuple(documents), domain=domain, labeled=labeled)


def generate_synthetic_domains(cfg: SyntheticConfig, seed: int = 0) -> Dict[str, DomainData]:
    """
    生成两个合成领域

    Args:
        cfg: 规模配置
        seed: 随机种子

    Returns:
        {domain: DomainData}，领域名为 alpha / beta
    """
    rng = np.random.default_rng(seed)
    data = {}
    for index, domain in enumerate(DOMAINS):
        vocab = _domain_vocabulary(cfg, index)
        data[domain] = DomainData(
            domain=domain,
            labeled=_corpus(rng, vocab, domain, cfg.labeled_per_domain, True, cfg),
            unlabeled=_corpus(rng, vocab, domain, cfg.unlabeled_per_domain, False, cfg),
        )
    logger.info(f"合成语料生成完成: 每个领域 {cfg.labeled_per_domain} 有标签 + "
                f"{cfg.unlabeled_per_domain} 无标签文档，seed={seed}")
    return data


def _processed_line(doc: Document) -> str:
    counts: Dict[str, int] = {}
    for token in doc.tokens:
        counts[token] = counts.get(token, 0) + 1
    features = ' '.join(f"{term}:{counts[term]}" for term in sorted(counts))
    tag = 'unlabeled' if doc.label is None else ('positive' if doc.label == 1 else 'negative')
    return f"{features} #label#:{tag}"


def write_synthetic(directory: Union[str, Path], data: Dict[str, DomainData]) -> List[Path]:
    """以 processed 格式写出 `<domain>.labeled` 与 `<domain>.unlabeled`"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for domain, domain_data in data.items():
        for suffix, corpus in (('labeled', domain_data.labeled), ('unlabeled', domain_data.unlabeled)):
            path = directory / f"{domain}.{suffix}"
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                for doc in corpus:
                    f.write(_processed_line(doc) + '\n')
            written.append(path)
    logger.info(f"合成语料已写入 {directory}")
    return written
