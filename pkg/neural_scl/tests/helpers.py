"""
测试用的小规模合成数据
"""

import numpy as np
import scipy.sparse as sp

from neural_scl.config import SyntheticConfig, TrainConfig
from neural_scl.core.benchmark import prepare_pair, select_strategy_pivots
from neural_scl.core.corpus import SplitSpec
from neural_scl.core.featurize import DesignMatrix
from neural_scl.core.synthetic import generate_synthetic_domains

SMALL_SYNTHETIC = SyntheticConfig(general_terms=12, specific_terms=12, noise_terms=40,
                                  labeled_per_domain=120, unlabeled_per_domain=120, words_per_doc=20)
SMALL_TRAIN = TrainConfig(d=8, p=6, lam=1.0, epochs=3, batch_size=20, seed=0)


def small_domains(seed: int = 0):
    return generate_synthetic_domains(SMALL_SYNTHETIC, seed)


def small_pair(seed: int = 0, p: int = 6):
    """返回 (PreparedPair, Vocabulary, mi_source 枢纽)"""
    data = small_domains(seed)
    prepared, vocab = prepare_pair(data['alpha'], data['beta'], SplitSpec(80, 40, seed=1),
                                   min_df=2, candidate_min_df=3)
    pivots = select_strategy_pivots(prepared, 'mi_source', p, 0, 3).with_terms(vocab)
    return prepared, vocab, pivots


def separable_matrix(rows: int = 100, n: int = 6, seed: int = 0) -> DesignMatrix:
    """第0列出现当且仅当标签为1，其余列为随机噪声"""
    rng = np.random.default_rng(seed)
    labels = np.arange(rows) % 2
    dense = (rng.random((rows, n)) < 0.3).astype(np.float64)
    dense[:, 0] = labels
    return DesignMatrix(sp.csr_matrix(dense), labels)
