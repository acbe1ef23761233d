"""Dense-network primitives with hand-derived gradients.

All functions are pure given their inputs plus an explicit numpy
``Generator``; there is no hidden global state. Each ``*_forward``
returns the value together with a cache that the matching ``*_backward``
consumes. Arithmetic preserves the dtype of the inputs, so the same code
runs in float32 for training and float64 for gradient checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ShapeError

Array = np.ndarray


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; identical seeds give identical draws."""
    return np.random.Generator(np.random.PCG64(seed))


class Tensor:
    """A parameter array together with its accumulated gradient."""

    __slots__ = ("name", "data", "grad")

    def __init__(self, data: Array, name: str = ""):
        self.data = np.asarray(data)
        self.grad = np.zeros_like(self.data)
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0

    def __repr__(self) -> str:
        return f"Tensor({self.name or 'unnamed'}, shape={self.data.shape})"


def xavier_init(fan_in: int, fan_out: int, rng: np.random.Generator,
                dtype=np.float32) -> Array:
    """Uniform Xavier matrix of shape (fan_out, fan_in).

    Entries are drawn from [-a, a] with a = sqrt(6 / (fan_in + fan_out)),
    so the variance is 2 / (fan_in + fan_out).
    """
    if fan_in < 1 or fan_out < 1:
        raise ValueError(
            f"fan dimensions must be positive, got fan_in={fan_in}, fan_out={fan_out}")
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in)).astype(dtype, copy=False)


def affine_forward(x: Array, w: Array, b: Array):
    """y = W x + b for a single input vector. Returns (y, cache)."""
    if w.ndim != 2 or x.ndim != 1 or b.ndim != 1 \
            or w.shape[1] != x.shape[0] or w.shape[0] != b.shape[0]:
        raise ShapeError(f"affine mismatch: W={w.shape}, x={x.shape}, b={b.shape}")
    return w @ x + b, (x, w)


def affine_backward(dout: Array, cache):
    """Gradients of an affine layer. Returns (dx, dW, db)."""
    x, w = cache
    return w.T @ dout, np.outer(dout, x), dout.copy()


def relu_forward(x: Array):
    """Elementwise max(0, x). The cache is the positive mask."""
    return np.maximum(x, 0), x > 0


def relu_backward(dout: Array, cache) -> Array:
    # gradient at exactly 0 is defined as 0 (mask is strict)
    return dout * cache


def dropout_forward(x: Array, rate: float, rng: np.random.Generator | None = None,
                    training: bool = False):
    """Inverted dropout: survivors scaled by 1/(1-rate) at train time.

    Inference mode returns x unchanged, bit-exact.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x, None
    keep = rng.random(size=x.shape) >= rate
    mask = keep.astype(x.dtype) * x.dtype.type(1.0 / (1.0 - rate))
    return x * mask, mask


def dropout_backward(dout: Array, cache) -> Array:
    if cache is None:
        return dout
    return dout * cache


def softmax_nll(logits: Array, gold_index: int):
    """Negative log likelihood of the gold class under softmax.

    Stabilized with max-subtraction. Returns (loss, dloss/dlogits) where
    the gradient is softmax(logits) - onehot(gold_index).
    """
    n = logits.shape[0]
    if not 0 <= gold_index < n:
        raise ValueError(f"gold index {gold_index} out of range for {n} logits")
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    total = exp.sum()
    loss = float(math.log(total) - shifted[gold_index])
    grad = exp / total
    grad[gold_index] -= 1.0
    return loss, grad


def multiclass_hinge(logits: Array, gold_index: int, margin: float = 1.0):
    """Crammer-Singer multiclass hinge loss.

    loss = max(0, margin + max_{j != gold} logits[j] - logits[gold]); the
    subgradient moves mass from the single highest-scoring violator
    (ties broken by lowest index) to the gold class.
    """
    n = logits.shape[0]
    if not 0 <= gold_index < n:
        raise ValueError(f"gold index {gold_index} out of range for {n} logits")
    if margin <= 0:
        raise ValueError(f"margin must be positive, got {margin}")
    grad = np.zeros_like(logits)
    if n == 1:
        return 0.0, grad
    rivals = logits.copy()
    rivals[gold_index] = -np.inf
    rival = int(np.argmax(rivals))
    loss = margin + float(logits[rival]) - float(logits[gold_index])
    if loss <= 0.0:
        return 0.0, grad
    grad[rival] = 1.0
    grad[gold_index] = -1.0
    return loss, grad


@dataclass
class AdamState:
    """Per-parameter Adam moments plus the shared hyperparameters."""

    m: Array
    v: Array
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    learning_rate: float = 0.001

    def __post_init__(self):
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ValueError(f"betas must lie in [0, 1), got {self.beta1}, {self.beta2}")
        if self.epsilon <= 0.0 or self.learning_rate <= 0.0:
            raise ValueError("epsilon and learning_rate must be positive")
        if self.m.shape != self.v.shape:
            raise ShapeError(f"moment shapes differ: {self.m.shape} vs {self.v.shape}")

    @classmethod
    def for_param(cls, param: Array, learning_rate: float = 0.001,
                  beta1: float = 0.9, beta2: float = 0.999,
                  epsilon: float = 1e-8) -> "AdamState":
        return cls(m=np.zeros_like(param), v=np.zeros_like(param),
                   beta1=beta1, beta2=beta2, epsilon=epsilon,
                   learning_rate=learning_rate)


def adam_step(param: Array, grad: Array, state: AdamState):
    """One in-place Adam update with bias correction.

    t <- t+1; m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g^2;
    param <- param - lr * m_hat / (sqrt(v_hat) + eps).
    """
    if param.shape != grad.shape or param.shape != state.m.shape:
        raise ShapeError(
            f"adam mismatch: param={param.shape}, grad={grad.shape}, m={state.m.shape}")
    state.step_count += 1
    t = state.step_count
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * (grad * grad)
    m_hat = state.m / (1.0 - state.beta1 ** t)
    v_hat = state.v / (1.0 - state.beta2 ** t)
    param -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return param, state


class Adam:
    """Adam over a list of Tensors, one moment pair per parameter."""

    def __init__(self, params: list[Tensor], learning_rate: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.params = list(params)
        self.states = [
            AdamState.for_param(p.data, learning_rate, beta1, beta2, epsilon)
            for p in self.params
        ]

    def step(self) -> None:
        for p, s in zip(self.params, self.states):
            adam_step(p.data, p.grad, s)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()


def finite_difference_check(f, params: Array, analytic_grad: Array,
                            h: float = 1e-5) -> float:
    """Largest relative disagreement between analytic and numeric gradients.

    Perturbs each coordinate of `params` in place (restoring it exactly),
    evaluates central differences (f(t+h e_i) - f(t-h e_i)) / 2h, and
    returns max_i |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
    """
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    if params.shape != analytic_grad.shape:
        raise ShapeError(
            f"gradient shape {analytic_grad.shape} does not match params {params.shape}")
    worst = 0.0
    for idx in np.ndindex(params.shape):
        orig = params[idx]
        params[idx] = orig + h
        f_plus = float(f(params))
        params[idx] = orig - h
        f_minus = float(f(params))
        params[idx] = orig
        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise NumericError(f"non-finite objective at coordinate {idx}")
        numeric = (f_plus - f_minus) / (2.0 * h)
        analytic = float(analytic_grad[idx])
        denom = max(abs(analytic), abs(numeric), 1e-8)
        worst = max(worst, abs(analytic - numeric) / denom)
    return worst
