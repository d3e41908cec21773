"""Minimal dense-tensor engine with reverse-mode automatic differentiation.

Provides exactly the kernels the classification heads and baselines need:
matmul, elementwise activations, (masked) softmax, masked sequence pooling,
1-D convolution, LSTM recurrence, cross-entropy, dropout and an Adam
optimizer. Storage and compute default to float32; every op preserves the
dtype of its inputs, so a graph built from float64 leaves runs entirely in
float64 (used by the finite-difference test harness).

All randomness flows through explicit ``numpy.random.Generator`` values;
nothing touches global RNG state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Operand shapes are incompatible with the requested op."""


class EmptySequenceError(ValueError):
    """A masked reduction was asked to reduce zero unmasked positions."""


def _as_array(data, dtype=np.float32) -> np.ndarray:
    arr = np.asarray(data)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(dtype)
    return arr


class Tensor:
    """A numpy-backed tensor that records the ops applied to it.

    Each op produces a new Tensor holding a ``_backward`` closure and its
    parent nodes; ``backward(loss)`` replays those closures in reverse
    topological order. Gradients are plain numpy arrays in ``.grad``.
    """

    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents", "_op")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._backward = None
        self._parents: tuple[Tensor, ...] = ()
        self._op = "leaf"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, op={self._op}, requires_grad={self.requires_grad})"

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())


def _make(data: np.ndarray, parents: tuple[Tensor, ...], op: str, backward) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.requires_grad = any(p.requires_grad for p in parents)
    out._parents = parents if out.requires_grad else ()
    out._backward = backward if out.requires_grad else None
    out._op = op
    return out


def _accum(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = g.astype(t.data.dtype, copy=True)
    else:
        t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` down to ``shape`` to undo numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data + b.data

    def backward(out):
        if a.requires_grad:
            _accum(a, _unbroadcast(out.grad, a.data.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(out.grad, b.data.shape))

    return _make(out_data, (a, b), "add", backward)


def sub(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data - b.data

    def backward(out):
        if a.requires_grad:
            _accum(a, _unbroadcast(out.grad, a.data.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(-out.grad, b.data.shape))

    return _make(out_data, (a, b), "sub", backward)


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data * b.data

    def backward(out):
        if a.requires_grad:
            _accum(a, _unbroadcast(out.grad * b.data, a.data.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(out.grad * a.data, b.data.shape))

    return _make(out_data, (a, b), "mul", backward)


def scale(a, s: float) -> Tensor:
    a = _wrap(a)
    out_data = a.data * s

    def backward(out):
        if a.requires_grad:
            _accum(a, out.grad * s)

    return _make(out_data, (a,), "scale", backward)


def neg(a) -> Tensor:
    return scale(a, -1.0)


# ---------------------------------------------------------------------------
# matmul


def matmul(a, b) -> Tensor:
    """Matrix product supporting 2D@2D, 2D@1D, 1D@2D and 1D@1D operands."""
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim not in (1, 2) or b.data.ndim not in (1, 2):
        raise ShapeError(f"matmul supports rank 1/2 operands, got {a.data.shape} @ {b.data.shape}")
    inner_a = a.data.shape[-1]
    inner_b = b.data.shape[0]
    if inner_a != inner_b:
        raise ShapeError(f"matmul inner dimensions differ: {a.data.shape} @ {b.data.shape}")
    out_data = a.data @ b.data

    def backward(out):
        g = out.grad
        if a.data.ndim == 2 and b.data.ndim == 2:
            ga, gb = g @ b.data.T, a.data.T @ g
        elif a.data.ndim == 2 and b.data.ndim == 1:
            ga, gb = np.outer(g, b.data), a.data.T @ g
        elif a.data.ndim == 1 and b.data.ndim == 2:
            ga, gb = b.data @ g, np.outer(a.data, g)
        else:
            ga, gb = g * b.data, g * a.data
        if a.requires_grad:
            _accum(a, ga)
        if b.requires_grad:
            _accum(b, gb)

    return _make(out_data, (a, b), "matmul", backward)


# ---------------------------------------------------------------------------
# activations


def relu(x) -> Tensor:
    x = _wrap(x)
    out_data = np.maximum(x.data, 0)

    def backward(out):
        if x.requires_grad:
            _accum(x, out.grad * (x.data > 0))

    return _make(out_data, (x,), "relu", backward)


def tanh(x) -> Tensor:
    x = _wrap(x)
    out_data = np.tanh(x.data)

    def backward(out):
        if x.requires_grad:
            _accum(x, out.grad * (1.0 - out_data * out_data))

    return _make(out_data, (x,), "tanh", backward)


def sigmoid(x) -> Tensor:
    x = _wrap(x)
    d = x.data
    # split by sign so exp never overflows
    out_data = np.where(d >= 0, 1.0 / (1.0 + np.exp(-np.abs(d))), np.exp(-np.abs(d)) / (1.0 + np.exp(-np.abs(d))))
    out_data = out_data.astype(d.dtype, copy=False)

    def backward(out):
        if x.requires_grad:
            _accum(x, out.grad * out_data * (1.0 - out_data))

    return _make(out_data, (x,), "sigmoid", backward)


def activation(x, kind: str) -> Tensor:
    try:
        return {"relu": relu, "tanh": tanh, "sigmoid": sigmoid}[kind](x)
    except KeyError:
        raise ValueError(f"unknown activation kind {kind!r}") from None


# ---------------------------------------------------------------------------
# softmax


def softmax(x, axis: int = -1) -> Tensor:
    x = _wrap(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward(out):
        if x.requires_grad:
            g = out.grad
            inner = (g * out_data).sum(axis=axis, keepdims=True)
            _accum(x, (g - inner) * out_data)

    return _make(out_data, (x,), "softmax", backward)


def masked_softmax(scores, mask: np.ndarray) -> Tensor:
    """Softmax over a 1-D score vector restricted to unmasked positions.

    Masked positions receive weight exactly 0 and propagate no gradient.
    """
    scores = _wrap(scores)
    mask = np.asarray(mask, dtype=bool)
    if scores.data.ndim != 1 or mask.shape != scores.data.shape:
        raise ShapeError(f"masked_softmax wants 1-D scores with matching mask, got {scores.data.shape} / {mask.shape}")
    if not mask.any():
        raise EmptySequenceError("masked_softmax over an all-masked sequence")
    d = scores.data
    m = d[mask].max()
    e = np.zeros_like(d)
    e[mask] = np.exp(d[mask] - m)
    out_data = e / e.sum()

    def backward(out):
        if scores.requires_grad:
            g = out.grad
            inner = (g * out_data).sum()
            _accum(scores, (g - inner) * out_data)

    return _make(out_data, (scores,), "masked_softmax", backward)


# ---------------------------------------------------------------------------
# masked sequence pooling


def pool_axis(x, mask: np.ndarray | None, kind: str) -> Tensor:
    """Reduce a T×d sequence over unmasked positions only.

    ``max`` treats masked rows as -inf, ``avg`` divides by the true length
    and ``var`` is the population variance over unmasked rows (zero for a
    single row).
    """
    x = _wrap(x)
    if x.data.ndim != 2:
        raise ShapeError(f"pool_axis wants a T×d matrix, got shape {x.data.shape}")
    t_len = x.data.shape[0]
    if mask is None:
        mask = np.ones(t_len, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (t_len,):
        raise ShapeError(f"mask length {mask.shape} does not match sequence length {t_len}")
    if not mask.any():
        raise EmptySequenceError("pool_axis over an all-masked sequence")
    n = int(mask.sum())
    rows = np.flatnonzero(mask)

    if kind == "max":
        sub = x.data[rows]
        arg = sub.argmax(axis=0)
        out_data = sub[arg, np.arange(x.data.shape[1])]

        def backward(out):
            if x.requires_grad:
                g = np.zeros_like(x.data)
                g[rows[arg], np.arange(x.data.shape[1])] = out.grad
                _accum(x, g)

    elif kind == "avg":
        out_data = x.data[rows].sum(axis=0) / n

        def backward(out):
            if x.requires_grad:
                g = np.zeros_like(x.data)
                g[rows] = out.grad / n
                _accum(x, g)

    elif kind == "var":
        sub = x.data[rows]
        mean = sub.sum(axis=0) / n
        centered = sub - mean
        out_data = (centered * centered).sum(axis=0) / n

        def backward(out):
            if x.requires_grad:
                g = np.zeros_like(x.data)
                g[rows] = out.grad * 2.0 * centered / n
                _accum(x, g)

    else:
        raise ValueError(f"unknown pooling kind {kind!r}")

    return _make(out_data.astype(x.data.dtype, copy=False), (x,), f"pool_{kind}", backward)


# ---------------------------------------------------------------------------
# axis reductions (unmasked)


def reduce_max(x, axis: int) -> Tensor:
    x = _wrap(x)
    out_data = x.data.max(axis=axis)
    arg = x.data.argmax(axis=axis)

    def backward(out):
        if x.requires_grad:
            g = np.zeros_like(x.data)
            idx = list(np.indices(out_data.shape))
            idx.insert(axis if axis >= 0 else x.data.ndim + axis, arg)
            g[tuple(idx)] = out.grad
            _accum(x, g)

    return _make(out_data, (x,), "reduce_max", backward)


def reduce_mean(x, axis: int) -> Tensor:
    x = _wrap(x)
    n = x.data.shape[axis]
    out_data = x.data.mean(axis=axis)

    def backward(out):
        if x.requires_grad:
            _accum(x, np.repeat(np.expand_dims(out.grad / n, axis), n, axis=axis))

    return _make(out_data.astype(x.data.dtype, copy=False), (x,), "reduce_mean", backward)


def reduce_sum(x, axis: int | None = None) -> Tensor:
    x = _wrap(x)
    out_data = x.data.sum(axis=axis)

    def backward(out):
        if x.requires_grad:
            if axis is None:
                _accum(x, np.full_like(x.data, out.grad))
            else:
                _accum(x, np.repeat(np.expand_dims(out.grad, axis), x.data.shape[axis], axis=axis))

    return _make(np.asarray(out_data), (x,), "reduce_sum", backward)


# ---------------------------------------------------------------------------
# shape plumbing


def reshape(x, shape) -> Tensor:
    x = _wrap(x)
    out_data = x.data.reshape(shape)

    def backward(out):
        if x.requires_grad:
            _accum(x, out.grad.reshape(x.data.shape))

    return _make(out_data, (x,), "reshape", backward)


def transpose(x) -> Tensor:
    x = _wrap(x)
    out_data = x.data.T

    def backward(out):
        if x.requires_grad:
            _accum(x, out.grad.T)

    return _make(out_data, (x,), "transpose", backward)


def narrow(x, axis: int, start: int, length: int) -> Tensor:
    """Contiguous slice of ``length`` entries along ``axis``."""
    x = _wrap(x)
    sl = [slice(None)] * x.data.ndim
    sl[axis] = slice(start, start + length)
    sl = tuple(sl)
    out_data = x.data[sl]

    def backward(out):
        if x.requires_grad:
            g = np.zeros_like(x.data)
            g[sl] = out.grad
            _accum(x, g)

    return _make(out_data, (x,), "narrow", backward)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [_wrap(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]

    def backward(out):
        offset = 0
        for t, size in zip(tensors, sizes):
            if t.requires_grad:
                sl = [slice(None)] * out.data.ndim
                sl[axis] = slice(offset, offset + size)
                _accum(t, out.grad[tuple(sl)])
            offset += size

    return _make(out_data, tuple(tensors), "concat", backward)


# ---------------------------------------------------------------------------
# 1-D convolution (cross-correlation, stride 1, no padding)


def conv1d(x, weights, bias) -> Tensor:
    """Cross-correlate ``x`` [C_in×L] with ``weights`` [C_out×C_in×k] + bias.

    Output length is L-k+1; callers needing same-length output pad ``x``
    explicitly (see ``pad_cols``).
    """
    x, weights, bias = _wrap(x), _wrap(weights), _wrap(bias)
    if x.data.ndim != 2 or weights.data.ndim != 3:
        raise ShapeError(f"conv1d wants x[C_in,L], w[C_out,C_in,k]; got {x.data.shape}, {weights.data.shape}")
    c_in, length = x.data.shape
    c_out, c_in_w, k = weights.data.shape
    if c_in != c_in_w:
        raise ShapeError(f"conv1d channel mismatch: x has {c_in}, weights expect {c_in_w}")
    if bias.data.shape != (c_out,):
        raise ShapeError(f"conv1d bias must be [{c_out}], got {bias.data.shape}")
    if k > length:
        raise ShapeError(f"conv1d kernel width {k} exceeds input length {length}")
    windows = np.lib.stride_tricks.sliding_window_view(x.data, k, axis=1)  # [C_in, L', k]
    out_data = np.einsum("ocj,clj->ol", weights.data, windows) + bias.data[:, None]
    out_data = out_data.astype(x.data.dtype, copy=False)

    def backward(out):
        g = out.grad  # [C_out, L']
        if weights.requires_grad:
            _accum(weights, np.einsum("ol,clj->ocj", g, windows))
        if bias.requires_grad:
            _accum(bias, g.sum(axis=1))
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            lp = g.shape[1]
            for j in range(k):
                gx[:, j : j + lp] += np.einsum("ol,oc->cl", g, weights.data[:, :, j])
            _accum(x, gx)

    return _make(out_data, (x, weights, bias), "conv1d", backward)


def pad_cols(x, left: int, right: int) -> Tensor:
    """Zero-pad a 2-D tensor along its column axis."""
    x = _wrap(x)
    pieces = []
    if left:
        pieces.append(Tensor(np.zeros((x.data.shape[0], left), dtype=x.data.dtype)))
    pieces.append(x)
    if right:
        pieces.append(Tensor(np.zeros((x.data.shape[0], right), dtype=x.data.dtype)))
    return concat(pieces, axis=1) if len(pieces) > 1 else x


# ---------------------------------------------------------------------------
# LSTM


@dataclass
class LSTMParams:
    """One direction of one LSTM layer; gate order is i, f, g, o."""

    w_ih: Tensor  # [d_in, 4h]
    w_hh: Tensor  # [h, 4h]
    b: Tensor  # [4h]

    @property
    def hidden(self) -> int:
        return self.w_hh.data.shape[0]


def _lstm_direction(x: Tensor, p: LSTMParams, reverse: bool) -> Tensor:
    t_len = x.data.shape[0]
    h_dim = p.hidden
    h = Tensor(np.zeros((1, h_dim), dtype=x.data.dtype))
    c = Tensor(np.zeros((1, h_dim), dtype=x.data.dtype))
    steps = range(t_len - 1, -1, -1) if reverse else range(t_len)
    outputs: list[Tensor | None] = [None] * t_len
    for t in steps:
        x_t = narrow(x, 0, t, 1)  # [1, d_in]
        z = add(add(matmul(x_t, p.w_ih), matmul(h, p.w_hh)), p.b)
        i = sigmoid(narrow(z, 1, 0, h_dim))
        f = sigmoid(narrow(z, 1, h_dim, h_dim))
        g = tanh(narrow(z, 1, 2 * h_dim, h_dim))
        o = sigmoid(narrow(z, 1, 3 * h_dim, h_dim))
        c = add(mul(f, c), mul(i, g))
        h = mul(o, tanh(c))
        outputs[t] = h
    return concat(outputs, axis=0)  # [T, h]


def lstm_forward(x, params: list[dict[str, LSTMParams]], direction: str = "bi", layers: int = 1) -> Tensor:
    """Run a 1- or 2-layer (bi)LSTM over a T×d_in sequence.

    ``params`` holds one dict per layer with keys ``fwd`` (and, for the
    bidirectional case, ``bwd``). Bidirectional output concatenates both
    directions feature-wise; layer 2 consumes layer 1's full output.
    """
    if direction not in ("fwd", "bwd", "bi"):
        raise ValueError(f"unknown direction {direction!r}")
    if layers not in (1, 2):
        raise ValueError("layers must be 1 or 2")
    if len(params) != layers:
        raise ShapeError(f"expected params for {layers} layers, got {len(params)}")
    out = _wrap(x)
    for layer in range(layers):
        p = params[layer]
        if direction == "fwd":
            out = _lstm_direction(out, p["fwd"], reverse=False)
        elif direction == "bwd":
            out = _lstm_direction(out, p["bwd"], reverse=True)
        else:
            fwd = _lstm_direction(out, p["fwd"], reverse=False)
            bwd = _lstm_direction(out, p["bwd"], reverse=True)
            out = concat([fwd, bwd], axis=1)
    return out


# ---------------------------------------------------------------------------
# loss


def cross_entropy(logits, labels) -> Tensor:
    """Mean negative log-softmax of the true class over a B×C batch."""
    logits = _wrap(logits)
    if logits.data.ndim != 2:
        raise ShapeError(f"cross_entropy wants B×C logits, got shape {logits.data.shape}")
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    batch, n_classes = logits.data.shape
    if labels.shape[0] != batch:
        raise ShapeError(f"{labels.shape[0]} labels for a batch of {batch}")
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError(f"labels must lie in [0, {n_classes}), got {labels.min()}..{labels.max()}")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    nll = lse - shifted[np.arange(batch), labels]
    out_data = np.asarray(nll.mean(), dtype=logits.data.dtype)

    def backward(out):
        if logits.requires_grad:
            probs = np.exp(shifted) / np.exp(shifted).sum(axis=1, keepdims=True)
            probs[np.arange(batch), labels] -= 1.0
            _accum(logits, out.grad * probs / batch)

    return _make(out_data, (logits,), "cross_entropy", backward)


# ---------------------------------------------------------------------------
# dropout


def dropout(x, p: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Zero elements with probability ``p`` and rescale survivors by 1/(1-p)."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate must satisfy 0 <= p < 1, got {p}")
    x = _wrap(x)
    if not training or p == 0.0:
        def backward_id(out):
            if x.requires_grad:
                _accum(x, out.grad)

        return _make(x.data, (x,), "dropout_eval", backward_id)
    if rng is None:
        raise ValueError("training-mode dropout needs an explicit rng")
    keep = (rng.random(x.data.shape) >= p).astype(x.data.dtype)
    factor = 1.0 / (1.0 - p)
    out_data = x.data * keep * factor

    def backward(out):
        if x.requires_grad:
            _accum(x, out.grad * keep * factor)

    return _make(out_data.astype(x.data.dtype, copy=False), (x,), "dropout", backward)


# ---------------------------------------------------------------------------
# backward pass


def backward(loss: Tensor) -> None:
    """Accumulate gradients of a scalar loss into every reachable tensor.

    Grads of all nodes in the graph are reset first, so calling backward on
    the same graph twice yields identical gradients.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.data.shape}")
    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    for node in topo:
        node.grad = None
    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is not None and node.grad is not None:
            node._backward(node)


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    """Per-parameter moment estimates plus the shared step counter."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def ensure(self, params: list[Tensor]) -> None:
        if not self.m:
            self.m = [np.zeros_like(p.data) for p in params]
            self.v = [np.zeros_like(p.data) for p in params]


def adam_step(state: AdamState, params: list[Tensor], grads: list[np.ndarray] | None = None) -> None:
    """One bias-corrected Adam update, in place. ``grads`` defaults to ``p.grad``."""
    if grads is None:
        grads = [p.grad for p in params]
    if len(grads) != len(params):
        raise ShapeError(f"{len(grads)} grads for {len(params)} params")
    state.ensure(params)
    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            continue
        if g.shape != p.data.shape:
            raise ShapeError(f"grad shape {g.shape} does not match param shape {p.data.shape}")
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * (g * g)
        m_hat = state.m[i] / bc1
        v_hat = state.v[i] / bc2
        p.data -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.data.dtype)


def glorot_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int,
                   dtype=np.float32) -> np.ndarray:
    """Fan-based uniform init, U(-limit, limit) with limit = sqrt(6/(fan_in+fan_out))."""
    limit = float(np.sqrt(6.0 / (fan_in + fan_out)))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)
