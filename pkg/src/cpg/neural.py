"""Minimal reverse-mode autodiff over small dense numpy matrices.

Only what the program generator needs: parameters, linear layers, a one
hidden layer feed-forward net, hard Gumbel-softmax with straight-through
gradients, selector-mask products, cross entropy, Adam and a
reduce-on-plateau learning-rate rule.  Graphs are rebuilt for every
training example; nothing is batched.
"""
from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_EPS = 1e-9


class Tensor:
    """A dense matrix that remembers how it was computed."""

    __slots__ = ("data", "grad", "_parents", "_backward", "name")

    def __init__(self, data, parents: Sequence["Tensor"] = (), backward: Callable | None = None,
                 name: str = ""):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self._parents = tuple(parents)
        self._backward = backward
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def requires_grad(self) -> bool:
        return self._backward is not None or isinstance(self, Param)

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad += g

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Propagate gradients to every tensor this one depends on."""
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen and p.requires_grad:
                    stack.append((p, False))
        if grad is None:
            grad = np.ones_like(self.data)
        self._accumulate(grad)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
            if not isinstance(node, Param) and node is not self:
                # intermediate buffers are not needed after their backward ran
                node.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, name={self.name!r})"


class Param(Tensor):
    """A learnable matrix.  Frozen params never change again."""

    __slots__ = ("frozen",)

    def __init__(self, data, name: str = "", frozen: bool = False):
        super().__init__(data, name=name)
        self.grad = np.zeros_like(self.data)
        self.frozen = frozen

    def _accumulate(self, g: np.ndarray) -> None:
        if self.frozen:
            return
        self.grad += g

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)


def const(x) -> Tensor:
    return Tensor(x)


def _needs(t: Tensor) -> bool:
    return t.requires_grad


# ---------------------------------------------------------------------------
# elementary ops


def matmul(a: Tensor, b: Tensor) -> Tensor:
    def backward(g):
        if _needs(a):
            a._accumulate(g @ b.data.T)
        if _needs(b):
            b._accumulate(a.data.T @ g)
    return Tensor(a.data @ b.data, (a, b), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """a + b where b may broadcast along the leading axis (bias vectors)."""
    def backward(g):
        if _needs(a):
            a._accumulate(_unbroadcast(g, a.data.shape))
        if _needs(b):
            b._accumulate(_unbroadcast(g, b.data.shape))
    return Tensor(a.data + b.data, (a, b), backward)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)

    def backward(g):
        a._accumulate(g * (1.0 - y * y))
    return Tensor(y, (a,), backward)


def reshape(a: Tensor, shape) -> Tensor:
    def backward(g):
        a._accumulate(g.reshape(a.data.shape))
    return Tensor(a.data.reshape(shape), (a,), backward)


def take(a: Tensor, rows=None, cols=None) -> Tensor:
    """Sub-matrix a[rows][:, cols]; rows/cols are slices or index arrays."""
    r = slice(None) if rows is None else rows
    c = slice(None) if cols is None else cols
    out = a.data[r][:, c]

    def backward(g):
        full = np.zeros_like(a.data)
        if isinstance(r, slice) and isinstance(c, slice):
            full[r, c] += g
        else:
            ri = np.arange(a.data.shape[0])[r]
            ci = np.arange(a.data.shape[1])[c]
            np.add.at(full, np.ix_(ri, ci), g)
        a._accumulate(full)
    return Tensor(out, (a,), backward)


def vstack(parts: Sequence[Tensor]) -> Tensor:
    if len(parts) == 1:
        return parts[0]
    sizes = [p.data.shape[0] for p in parts]
    data = np.vstack([p.data for p in parts])

    def backward(g):
        start = 0
        for p, n in zip(parts, sizes):
            if _needs(p):
                p._accumulate(g[start:start + n])
            start += n
    return Tensor(data, tuple(parts), backward)


def gather_rows(refs: Sequence[tuple[Tensor, int]]) -> Tensor:
    """Stack single rows taken from several tensors into one matrix."""
    data = np.vstack([t.data[r:r + 1] for t, r in refs])

    def backward(g):
        for k, (t, r) in enumerate(refs):
            if _needs(t):
                full = np.zeros_like(t.data)
                full[r] = g[k]
                t._accumulate(full)
    parents = tuple({id(t): t for t, _ in refs}.values())
    return Tensor(data, parents, backward)


def affine(a: Tensor, scale: float, shift: float = 0.0) -> Tensor:
    def backward(g):
        a._accumulate(g * scale)
    return Tensor(a.data * scale + shift, (a,), backward)


def total(parts: Sequence[Tensor], scale: float = 1.0) -> Tensor:
    """scale * sum of scalar tensors."""
    value = scale * sum(float(p.data) for p in parts)

    def backward(g):
        for p in parts:
            if _needs(p):
                p._accumulate(np.asarray(g * scale))
    return Tensor(value, tuple(parts), backward)


# ---------------------------------------------------------------------------
# layers


def linear_const(weight: Param, bias: Param, rows: int, cols: int) -> Tensor:
    """Logits of a linear layer applied to an all-ones input, as rows x cols.

    The result does not depend on any data: it is ``1 @ W + b``.
    """
    ones = const(np.ones((1, weight.data.shape[0])))
    flat = add(matmul(ones, weight), bias)
    return reshape(flat, (rows, cols))


class FFNet:
    """One hidden layer tanh network mapping one-hot tokens to logits."""

    def __init__(self, n_in: int, n_out: int, hidden: int = 30, rng: np.random.Generator | None = None,
                 out_bias: np.ndarray | None = None, name: str = "ff"):
        if hidden < 1:
            raise ValueError("hidden size must be >= 1")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.hidden_size = hidden
        self.w1 = Param(rng.normal(0.0, 1.0 / math.sqrt(n_in), (n_in, hidden)), f"{name}.w1")
        self.b1 = Param(np.zeros((1, hidden)), f"{name}.b1")
        self.w2 = Param(rng.normal(0.0, 1.0 / math.sqrt(hidden), (hidden, n_out)), f"{name}.w2")
        b2 = np.zeros((1, n_out)) if out_bias is None else np.asarray(out_bias, dtype=float).reshape(1, n_out)
        self.b2 = Param(b2, f"{name}.b2")

    @property
    def params(self) -> list[Param]:
        return [self.w1, self.b1, self.w2, self.b2]

    def __call__(self, x: Tensor) -> Tensor:
        h = tanh(add(matmul(x, self.w1), self.b1))
        return add(matmul(h, self.w2), self.b2)


# ---------------------------------------------------------------------------
# Gumbel-softmax


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def gumbel_noise(rng: np.random.Generator, shape) -> np.ndarray:
    u = rng.random(shape)
    return -np.log(-np.log(u + 1e-20) + 1e-20)


def one_hot_rows(index: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((len(index), n))
    out[np.arange(len(index)), index] = 1.0
    return out


def gumbel_sample(logits: Tensor, temperature: float, noise: np.ndarray | None = None,
                  hard: bool = True) -> Tensor:
    """Row-wise Gumbel-softmax sample.

    ``hard=True`` returns exact one-hot rows in the forward pass and
    propagates the Jacobian of the soft relaxation backwards
    (straight-through).  ``hard=False`` returns the soft relaxation itself.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if not np.all(np.isfinite(logits.data)):
        raise FloatingPointError("non-finite logits")
    z = logits.data if noise is None else logits.data + noise
    y_soft = softmax(z / temperature)
    if hard:
        y = one_hot_rows(np.argmax(z, axis=-1), z.shape[-1])
    else:
        y = y_soft

    def backward(g):
        inner = (g * y_soft).sum(axis=-1, keepdims=True)
        logits._accumulate(y_soft * (g - inner) / temperature)
    return Tensor(y, (logits,), backward)


# ---------------------------------------------------------------------------
# selector masks


def select_copy(sample: Tensor, stacked: Tensor, index: np.ndarray, slot: np.ndarray) -> Tensor:
    """Copy rows of ``stacked`` through a binary selector mask.

    Output row p is ``sum_c sample[slot[p], c] * stacked[index[p, c]]``.
    With a one-hot ``sample`` this is exact row copying; gradients reach
    both the selector and the copied rows.
    """
    w = sample.data[slot]                        # P x C
    gathered = stacked.data[index]               # P x C x V
    out = np.einsum("pc,pcv->pv", w, gathered)

    def backward(g):
        if _needs(sample):
            dw = np.einsum("pv,pcv->pc", g, gathered)
            full = np.zeros_like(sample.data)
            np.add.at(full, slot, dw)
            sample._accumulate(full)
        if _needs(stacked):
            ds = np.zeros_like(stacked.data)
            contrib = w[:, :, None] * g[:, None, :]
            np.add.at(ds, index, contrib)
            stacked._accumulate(ds)
    return Tensor(out, (sample, stacked), backward)


# ---------------------------------------------------------------------------
# losses


def cross_entropy(pred: Tensor, target: Sequence[int], eps: float = DEFAULT_EPS) -> Tensor:
    """Mean over rows of -log pred[i, target[i]] with the log clamped at eps.

    The clamp is smooth, ``log((1 - eps) * p + eps)``, so a row holding an
    exact zero at the target still receives a (large) gradient.
    """
    target = np.asarray(target, dtype=int)
    if pred.data.shape[0] != len(target):
        raise ValueError(f"length mismatch: {pred.data.shape[0]} rows vs {len(target)} targets")
    n = len(target)
    rows = np.arange(n)
    p = pred.data[rows, target]
    q = (1.0 - eps) * p + eps
    value = -np.log(q).mean()

    def backward(g):
        d = np.zeros_like(pred.data)
        d[rows, target] = -float(g) * (1.0 - eps) / (q * n)
        pred._accumulate(d)
    return Tensor(value, (pred,), backward)


def row_log_loss(logits: Tensor, index: int) -> Tensor:
    """-log softmax(logits)[0, index] for a single-row logits tensor."""
    p = softmax(logits.data)

    def backward(g):
        d = p.copy()
        d[0, index] -= 1.0
        logits._accumulate(float(g) * d)
    return Tensor(-math.log(max(p[0, index], 1e-300)), (logits,), backward)


# ---------------------------------------------------------------------------
# optimisation


class Adam:
    def __init__(self, params: Iterable[Param], lr: float = 1e-2, betas=(0.9, 0.999), eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def add_params(self, params: Iterable[Param]) -> None:
        for p in params:
            if any(p is q for q in self.params):
                continue
            self.params.append(p)
            self.m.append(np.zeros_like(p.data))
            self.v.append(np.zeros_like(p.data))

    def step(self) -> None:
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for i, p in enumerate(self.params):
            if p.frozen:
                p.grad[...] = 0.0
                continue
            g = p.grad
            if not g.any():
                continue
            self.m[i] = self.b1 * self.m[i] + (1.0 - self.b1) * g
            self.v[i] = self.b2 * self.v[i] + (1.0 - self.b2) * g * g
            p.data -= self.lr * (self.m[i] / c1) / (np.sqrt(self.v[i] / c2) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad[...] = 0.0


class ReduceOnPlateau:
    """Multiply the learning rate by ``factor`` when a minimised metric stalls.

    The metric must improve on the best value so far by more than
    ``min_delta`` within ``patience`` consecutive calls.
    """

    def __init__(self, lr: float, factor: float = 0.5, patience: int = 50, min_delta: float = 1e-4,
                 min_lr: float = 1e-5):
        self.lr = lr
        self.factor = factor
        self.patience = patience
        self.min_delta = min_delta
        self.min_lr = min_lr
        self.best = math.inf
        self.bad = 0

    def step(self, metric: float) -> float:
        if metric < self.best - self.min_delta:
            self.best = metric
            self.bad = 0
        else:
            self.bad += 1
            if self.bad > self.patience:
                self.lr = max(self.min_lr, self.lr * self.factor)
                self.bad = 0
        return self.lr


def plateau_schedule(history: Sequence[float], lr: float, factor: float = 0.5, patience: int = 50,
                     min_delta: float = 1e-4, min_lr: float = 0.0) -> float:
    """Replay ``history`` through :class:`ReduceOnPlateau` and return the final lr."""
    sched = ReduceOnPlateau(lr, factor, patience, min_delta, min_lr)
    for m in history:
        sched.step(m)
    return sched.lr
