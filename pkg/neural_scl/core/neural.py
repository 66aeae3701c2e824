"""
数值核心模块

包含:
1. 扁平参数缓冲区（联合模型的 W_h / W_t / W_p，线性模型的 W / b）
2. 前向计算：稀疏输入只收集出现过的列参与乘法
3. 二元交叉熵、L2 正则与解析梯度
4. Adam 优化器

所有计算使用 float64。
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from neural_scl.core.featurize import SparseVector, drop_columns
from neural_scl.utils.errors import (
    ConfigError,
    DimensionMismatchError,
    NonFiniteGradientError,
    TargetRangeError,
)

logger = logging.getLogger(__name__)

PROB_CLAMP = 1e-12
# 混合批次中无标签行的标签值
UNLABELED = -1


class FlatParams:
    """
    扁平参数缓冲区

    所有参数按 layout 顺序存放在一个连续的 theta 数组中，各矩阵是 theta 的 reshape 视图，
    因此优化器可以直接原地更新 theta。layout 中前 n_weights 个元素是权重（参与 L2 正则），
    其后是偏置（不参与正则）。
    """

    def __init__(self, weights: Sequence[Tuple[str, Tuple[int, ...]]],
                 biases: Sequence[Tuple[str, Tuple[int, ...]]] = (),
                 theta: Optional[np.ndarray] = None):
        self.layout: List[Tuple[str, Tuple[int, ...]]] = list(weights) + list(biases)
        self.names = [name for name, _ in self.layout]
        sizes = [int(np.prod(shape)) for _, shape in self.layout]
        self.n_weights = int(sum(sizes[:len(weights)]))
        self.size = int(sum(sizes))
        if theta is None:
            theta = np.zeros(self.size, dtype=np.float64)
        elif theta.shape != (self.size,):
            raise DimensionMismatchError(f"参数长度 {theta.shape} 与布局大小 {self.size} 不一致")
        self.theta = theta
        offset = 0
        for (name, shape), size in zip(self.layout, sizes):
            setattr(self, name, self.theta[offset:offset + size].reshape(shape))
            offset += size

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.names}

    @property
    def weights_flat(self) -> np.ndarray:
        return self.theta[:self.n_weights]

    def regularizer(self) -> float:
        """R(θ) = ½ Σ w²，偏置不计入"""
        w = self.weights_flat
        return 0.5 * float(w @ w)


class JointModelParams(FlatParams):
    """
    联合模型参数

    W_h: d×n 共享隐藏层；W_t: 1×d 任务头；W_p: p×d 枢纽预测头。
    use_bias 为 True 时额外带 b_h / b_t / b_p（消融实验用）。
    """

    def __init__(self, n: int, d: int, p: int, use_bias: bool = False,
                 theta: Optional[np.ndarray] = None):
        if min(n, d, p) < 1:
            raise ConfigError(f"网络维度必须为正: n={n}, d={d}, p={p}")
        self.n, self.d, self.p, self.use_bias = n, d, p, use_bias
        biases = [('b_h', (d,)), ('b_t', (1,)), ('b_p', (p,))] if use_bias else []
        super().__init__([('W_h', (d, n)), ('W_t', (1, d)), ('W_p', (p, d))], biases, theta)

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.n, self.d, self.p

    def copy(self) -> 'JointModelParams':
        return JointModelParams(self.n, self.d, self.p, self.use_bias, self.theta.copy())

    def like(self, theta: np.ndarray) -> 'JointModelParams':
        """用同样的形状包装另一个扁平数组（例如梯度）"""
        return JointModelParams(self.n, self.d, self.p, self.use_bias, theta)

    def bias(self, name: str, width: int) -> np.ndarray:
        return getattr(self, name) if self.use_bias else np.zeros(width)


class LinearParams(FlatParams):
    """k 输出线性模型参数：W 为 k×n，b 为 k（偏置不正则）"""

    def __init__(self, n: int, k: int = 1, theta: Optional[np.ndarray] = None):
        self.n, self.k = n, k
        super().__init__([('W', (k, n))], [('b', (k,))], theta)

    def copy(self) -> 'LinearParams':
        return LinearParams(self.n, self.k, self.theta.copy())


def sigmoid(z):
    return expit(z)


def relu(z):
    return np.maximum(z, 0.0)


ACTIVATION_FUNCTIONS = {'relu': relu, 'sigmoid': sigmoid}


def _activation_derivative(activation: str, Z: np.ndarray, H: np.ndarray) -> np.ndarray:
    if activation == 'relu':
        # z == 0 处的次梯度取0
        return (Z > 0).astype(np.float64)
    return H * (1.0 - H)


def _check_activation(activation: str) -> None:
    if activation not in ACTIVATION_FUNCTIONS:
        raise ConfigError(f"未知的激活函数: {activation}")


def bce(prediction, target):
    """
    二元交叉熵 −[t·ln(ŷ) + (1−t)·ln(1−ŷ)]，ŷ 先截断到 [1e-12, 1−1e-12]

    Args:
        prediction: 预测概率（标量或数组）
        target: [0, 1] 内的目标值（标量或数组）

    Raises:
        TargetRangeError: 目标值超出 [0, 1]
    """
    t = np.asarray(target, dtype=np.float64)
    if np.any((t < 0.0) | (t > 1.0)) or np.any(np.isnan(t)):
        raise TargetRangeError("交叉熵目标值必须在 [0, 1] 内")
    y = np.clip(np.asarray(prediction, dtype=np.float64), PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = -(t * np.log(y) + (1.0 - t) * np.log1p(-y))
    return float(loss) if loss.ndim == 0 else loss


def gather_columns(X: sp.csr_matrix) -> Tuple[np.ndarray, sp.csr_matrix]:
    """
    收集批次中出现过的列

    Returns:
        (cols, Xs)：cols 为升序的列下标，Xs 是只含这些列的压缩矩阵（m × len(cols)）
    """
    cols, inverse = np.unique(X.indices, return_inverse=True)
    Xs = sp.csr_matrix((X.data, inverse.ravel(), X.indptr), shape=(X.shape[0], len(cols)))
    return cols, Xs


@dataclass
class ForwardResult:
    """单个样本的前向输出"""

    h: np.ndarray
    y_task: float
    y_pivot: np.ndarray


@dataclass
class BatchForward:
    """批量前向的中间量，反向传播复用"""

    cols: np.ndarray
    Xs: sp.csr_matrix
    Z: np.ndarray
    H: np.ndarray
    y_task: np.ndarray
    y_pivot: np.ndarray


def forward(params: JointModelParams, x: SparseVector, activation: str = 'relu') -> ForwardResult:
    """
    单样本前向：h = act(W_h x)，y_task = σ(W_t h)，y_pivot = σ(W_p h)

    只有 x.indices 对应的 W_h 列参与计算。

    Raises:
        DimensionMismatchError: x.dim 与 n 不一致
    """
    _check_activation(activation)
    if x.dim != params.n:
        raise DimensionMismatchError(f"输入维度 {x.dim} 与模型输入维度 {params.n} 不一致")
    z = params.W_h[:, x.indices] @ x.values + params.bias('b_h', params.d)
    h = ACTIVATION_FUNCTIONS[activation](z)
    y_task = float(sigmoid(params.W_t @ h + params.bias('b_t', 1))[0])
    y_pivot = sigmoid(params.W_p @ h + params.bias('b_p', params.p))
    return ForwardResult(h=h, y_task=y_task, y_pivot=y_pivot)


def forward_batch(params: JointModelParams, X: sp.csr_matrix, activation: str = 'relu') -> BatchForward:
    """批量前向，语义与 forward 相同"""
    _check_activation(activation)
    if X.shape[1] != params.n:
        raise DimensionMismatchError(f"输入维度 {X.shape[1]} 与模型输入维度 {params.n} 不一致")
    cols, Xs = gather_columns(sp.csr_matrix(X))
    if len(cols):
        Z = np.asarray(Xs @ params.W_h[:, cols].T) + params.bias('b_h', params.d)
    else:
        Z = np.zeros((X.shape[0], params.d)) + params.bias('b_h', params.d)
    H = ACTIVATION_FUNCTIONS[activation](Z)
    y_task = sigmoid(H @ params.W_t[0] + params.bias('b_t', 1)[0])
    y_pivot = sigmoid(H @ params.W_p.T + params.bias('b_p', params.p))
    return BatchForward(cols=cols, Xs=Xs, Z=Z, H=H, y_task=y_task, y_pivot=y_pivot)


def pivot_targets(X: sp.csr_matrix, pivot_indices: Sequence[int]) -> np.ndarray:
    """pivots(x)：每个枢纽特征在行中是否出现（m × p 的 0/1 矩阵）"""
    columns = sp.csr_matrix(X)[:, np.asarray(pivot_indices, dtype=np.int64)]
    return (columns.toarray() > 0).astype(np.float64)


@dataclass
class Batch:
    """
    一个训练批次

    X 是送入网络的输入（可能已屏蔽枢纽列）；targets 总是由未屏蔽的原始行计算；
    labels 为 None 表示整批无标签，否则取值 {0, 1, UNLABELED}。
    """

    X: sp.csr_matrix
    targets: np.ndarray
    labels: Optional[np.ndarray] = None
    labeled_mask: np.ndarray = field(init=False)

    def __post_init__(self):
        m = self.X.shape[0]
        if self.targets.shape[0] != m:
            raise DimensionMismatchError(f"枢纽目标行数 {self.targets.shape[0]} 与批次行数 {m} 不一致")
        if self.labels is None:
            self.labeled_mask = np.zeros(m, dtype=bool)
        else:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (m,):
                raise DimensionMismatchError(f"标签数 {self.labels.shape} 与批次行数 {m} 不一致")
            self.labeled_mask = self.labels != UNLABELED

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_labeled(self) -> int:
        return int(self.labeled_mask.sum())


def make_batch(X: sp.csr_matrix, labels: Optional[np.ndarray], pivot_indices: Sequence[int],
               mask_pivots_in_input: bool = False) -> Batch:
    """由原始行构造批次；屏蔽枢纽时只影响输入，不影响目标"""
    X = sp.csr_matrix(X)
    targets = pivot_targets(X, pivot_indices)
    X_input = drop_columns(X, pivot_indices) if mask_pivots_in_input else X
    return Batch(X=X_input, targets=targets, labels=labels)


@dataclass
class LossTerms:
    """联合损失的三部分：任务项、（未乘λ的）枢纽项、（未乘ρ的）正则项"""

    task: float
    pivot: float
    regularizer: float

    def total(self, lam: float, rho: float) -> float:
        return self.task + lam * self.pivot + rho * self.regularizer


def _task_targets(batch: Batch) -> np.ndarray:
    return np.where(batch.labeled_mask, np.clip(batch.labels if batch.labels is not None else 0, 0, 1), 0)


def loss_terms(params: JointModelParams, batch: Batch, activation: str = 'relu',
               fwd: Optional[BatchForward] = None) -> LossTerms:
    """分别计算联合损失的三部分"""
    fwd = fwd or forward_batch(params, batch.X, activation)
    task = 0.0
    if batch.n_labeled:
        task = float(np.sum(bce(fwd.y_task[batch.labeled_mask], _task_targets(batch)[batch.labeled_mask])))
    pivot = float(np.sum(bce(fwd.y_pivot, batch.targets))) if batch.n_rows else 0.0
    return LossTerms(task=task, pivot=pivot, regularizer=params.regularizer())


def joint_loss(params: JointModelParams, batch: Batch, lam: float, rho: float,
               activation: str = 'relu') -> float:
    """
    联合损失：Σ_有标签 BCE(y_task, y) + λ·Σ_所有行 Σ_j BCE(y_pivot_j, pivot_j) + ρ·R(θ)

    R(θ) 每个批次只加一次。

    Args:
        params: 模型参数
        batch: 批次（可混合有标签与无标签行）
        lam: 枢纽预测损失权重 λ
        rho: 正则权重 ρ

    Returns:
        标量损失
    """
    return loss_terms(params, batch, activation).total(lam, rho)


def loss_and_gradients(params: JointModelParams, batch: Batch, lam: float, rho: float,
                       activation: str = 'relu',
                       out: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """
    同时计算联合损失和对扁平参数的解析梯度

    W_h 的梯度中只有本批次出现过的列来自数据项，其余列只有正则项 ρ·W_h。

    Args:
        out: 可选的梯度缓冲区（长度等于参数个数），训练循环复用以避免重复分配

    Returns:
        (loss, grad)，grad 与 params.theta 同形
    """
    fwd = forward_batch(params, batch.X, activation)
    terms = loss_terms(params, batch, activation, fwd)
    loss = terms.total(lam, rho)

    if out is None:
        out = np.empty_like(params.theta)
    grad = params.like(out)
    out[:params.n_weights] = rho * params.weights_flat
    out[params.n_weights:] = 0.0

    # 对 logit 的梯度
    dA_t = np.where(batch.labeled_mask, fwd.y_task - _task_targets(batch), 0.0)
    dA_p = lam * (fwd.y_pivot - batch.targets)

    grad.W_t[0] += dA_t @ fwd.H
    grad.W_p += dA_p.T @ fwd.H
    dH = np.outer(dA_t, params.W_t[0]) + dA_p @ params.W_p
    dZ = dH * _activation_derivative(activation, fwd.Z, fwd.H)
    if len(fwd.cols):
        grad.W_h[:, fwd.cols] += np.asarray(fwd.Xs.T @ dZ).T
    if params.use_bias:
        grad.b_h += dZ.sum(axis=0)
        grad.b_t += dA_t.sum()
        grad.b_p += dA_p.sum(axis=0)
    return loss, out


def joint_gradients(params: JointModelParams, batch: Batch, lam: float, rho: float,
                    activation: str = 'relu') -> JointModelParams:
    """联合损失的梯度，以与 params 同形的 JointModelParams 返回"""
    _, grad = loss_and_gradients(params, batch, lam, rho, activation)
    return params.like(grad)


def linear_forward(params: LinearParams, X: sp.csr_matrix) -> Tuple[np.ndarray, sp.csr_matrix, np.ndarray]:
    """线性模型概率输出 σ(X Wᵀ + b)，返回 (probs m×k, Xs, cols)"""
    if X.shape[1] != params.n:
        raise DimensionMismatchError(f"输入维度 {X.shape[1]} 与模型输入维度 {params.n} 不一致")
    cols, Xs = gather_columns(sp.csr_matrix(X))
    if len(cols):
        logits = np.asarray(Xs @ params.W[:, cols].T) + params.b
    else:
        logits = np.zeros((X.shape[0], params.k)) + params.b
    probs = sigmoid(logits)
    return probs, Xs, cols


def linear_loss_and_gradients(params: LinearParams, X: sp.csr_matrix, targets: np.ndarray, rho: float,
                              out: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """
    多输出逻辑回归的 BCE + ρ·½‖W‖² 损失与梯度

    逻辑回归是 k=1 的特例；经典SCL的 p 个枢纽预测器共享同一批次顺序，作为 k=p 一次计算。

    Args:
        params: 线性模型参数
        X: 稀疏输入 (m × n)
        targets: 目标 (m × k)
        rho: 正则权重
    """
    targets = np.asarray(targets, dtype=np.float64).reshape(X.shape[0], params.k)
    probs, Xs, cols = linear_forward(params, X)
    loss = float(np.sum(bce(probs, targets))) + rho * params.regularizer()
    if out is None:
        out = np.empty_like(params.theta)
    grad = LinearParams(params.n, params.k, out)
    out[:params.n_weights] = rho * params.weights_flat
    out[params.n_weights:] = 0.0
    dA = probs - targets
    if len(cols):
        grad.W[:, cols] += np.asarray(Xs.T @ dA).T
    grad.b += dA.sum(axis=0)
    return loss, out


@dataclass
class AdamState:
    """Adam 优化器状态，m / v 与参数向量同形"""

    size: int
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.size, dtype=np.float64)
        if self.v is None:
            self.v = np.zeros(self.size, dtype=np.float64)


def adam_step(theta: np.ndarray, grads: np.ndarray, state: AdamState) -> np.ndarray:
    """
    一步标准 Adam 更新（原地修改 theta 与 state）

    Args:
        theta: 扁平参数
        grads: 同形梯度
        state: 优化器状态

    Returns:
        更新后的 theta（同一个数组）

    Raises:
        DimensionMismatchError: 长度不一致
        NonFiniteGradientError: 梯度中出现 NaN/Inf
    """
    if theta.shape != grads.shape or theta.shape != state.m.shape:
        raise DimensionMismatchError(f"参数、梯度与优化器状态长度不一致: {theta.shape}, {grads.shape}, {state.m.shape}")
    if not np.all(np.isfinite(grads)):
        raise NonFiniteGradientError(f"第 {state.t + 1} 步梯度中出现非有限值")
    state.t += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grads
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * np.square(grads)
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    theta -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return theta


def glorot_limit(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_weights(dims: Tuple[int, int, int], seed: int, use_bias: bool = False) -> JointModelParams:
    """
    按 ±√(6/(fan_in+fan_out)) 均匀分布初始化联合模型权重，偏置初始化为0

    Args:
        dims: (n, d, p)
        seed: 随机种子
        use_bias: 是否带偏置

    Returns:
        JointModelParams
    """
    n, d, p = dims
    params = JointModelParams(n, d, p, use_bias=use_bias)
    rng = np.random.default_rng(seed)
    for name, fan_in, fan_out in (('W_h', n, d), ('W_t', d, 1), ('W_p', d, p)):
        limit = glorot_limit(fan_in, fan_out)
        target = getattr(params, name)
        target[...] = rng.uniform(-limit, limit, size=target.shape)
    return params


def iter_minibatches(order: np.ndarray, batch_size: int) -> Iterator[np.ndarray]:
    for start in range(0, len(order), batch_size):
        yield order[start:start + batch_size]


SEED_STREAMS = ('init', 'shuffle', 'split')


def derive_seeds(seed: int) -> Dict[str, int]:
    """由一个种子派生权重初始化、批次打乱和数据切分三路独立种子"""
    children = np.random.SeedSequence(int(seed)).spawn(len(SEED_STREAMS))
    return {name: int(child.generate_state(1)[0]) for name, child in zip(SEED_STREAMS, children)}
