"""Minimal reverse-mode autodiff on f64 numpy arrays.

Define-by-run tape: each Tensor records its parents and a backward closure;
``backward`` runs one reverse topological pass.  Only the operations the
training stack needs are provided; every one is checked against central
finite differences in the test suite.
"""

from __future__ import annotations

import numpy as np

from ..errors import GraphError, ShapeError


class Tensor:
    __slots__ = ("value", "grad", "parents", "_backward_fn", "requires_grad")

    def __init__(self, value, requires_grad=False, parents=(), backward_fn=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        # Keep ALL parents: backward closures return gradients positionally.
        self.parents = tuple(parents)
        self._backward_fn = backward_fn
        self.requires_grad = bool(requires_grad) or any(
            p.requires_grad for p in self.parents
        )

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Tensor(shape={self.value.shape}, grad={'set' if self.grad is not None else 'none'})"

    # Operator sugar for the composite layers below.
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __truediv__(self, other):
        return div(self, _as_tensor(other))

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, _as_tensor(-1.0))


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcasted gradient back to ``shape``."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _make(value, parents, backward_fn) -> Tensor:
    if any(p.requires_grad for p in parents):
        return Tensor(value, parents=parents, backward_fn=backward_fn)
    return Tensor(value)


def add(a: Tensor, b: Tensor) -> Tensor:
    out = a.value + b.value

    def bw(g):
        return _unbroadcast(g, a.value.shape), _unbroadcast(g, b.value.shape)

    return _make(out, (a, b), bw)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = a.value - b.value

    def bw(g):
        return _unbroadcast(g, a.value.shape), -_unbroadcast(g, b.value.shape)

    return _make(out, (a, b), bw)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = a.value * b.value

    def bw(g):
        return (
            _unbroadcast(g * b.value, a.value.shape),
            _unbroadcast(g * a.value, b.value.shape),
        )

    return _make(out, (a, b), bw)


def div(a: Tensor, b: Tensor) -> Tensor:
    out = a.value / b.value

    def bw(g):
        return (
            _unbroadcast(g / b.value, a.value.shape),
            _unbroadcast(-g * a.value / b.value**2, b.value.shape),
        )

    return _make(out, (a, b), bw)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = a.value @ b.value

    def bw(g):
        return g @ b.value.T, a.value.T @ g

    return _make(out, (a, b), bw)


def relu(a: Tensor) -> Tensor:
    mask = a.value > 0.0

    def bw(g):
        return (g * mask,)

    return _make(a.value * mask, (a,), bw)


def sqrt(a: Tensor) -> Tensor:
    root = np.sqrt(a.value)

    def bw(g):
        return (g * 0.5 / root,)

    return _make(root, (a,), bw)


def sigmoid(a: Tensor) -> Tensor:
    s = 1.0 / (1.0 + np.exp(-a.value))

    def bw(g):
        return (g * s * (1.0 - s),)

    return _make(s, (a,), bw)


def tsum(a: Tensor, axis=None, keepdims=False) -> Tensor:
    out = a.value.sum(axis=axis, keepdims=keepdims)

    def bw(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.value.shape).copy(),)

    return _make(out, (a,), bw)


def tmean(a: Tensor, axis=None, keepdims=False) -> Tensor:
    count = a.value.size if axis is None else np.prod(
        [a.value.shape[ax] for ax in (axis if isinstance(axis, tuple) else (axis,))]
    )
    out = a.value.mean(axis=axis, keepdims=keepdims)

    def bw(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.value.shape) / count,)

    return _make(out, (a,), bw)


def reshape(a: Tensor, shape) -> Tensor:
    def bw(g):
        return (g.reshape(a.value.shape),)

    return _make(a.value.reshape(shape), (a,), bw)


def transpose(a: Tensor, axes) -> Tensor:
    inverse = np.argsort(axes)

    def bw(g):
        return (g.transpose(inverse),)

    return _make(a.value.transpose(axes), (a,), bw)


def concat(tensors, axis=0) -> Tensor:
    values = [t.value for t in tensors]
    sizes = [v.shape[axis] for v in values]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        return tuple(
            piece for piece, t in zip(np.split(g, splits, axis=axis), tensors)
        )

    return _make(np.concatenate(values, axis=axis), tuple(tensors), bw)


def normalize_groups(x: Tensor, groups: int, eps: float = 1e-5) -> Tensor:
    """Fused per-sample group normalization (no affine part).

    Normalizes (N, C, H, W) over channel groups with the standard fused
    backward; the affine scale/shift stay separate primitive ops.
    """
    n, c, h, w = x.shape
    m = (c // groups) * h * w
    xg = x.value.reshape(n, groups, m)
    mu = xg.mean(axis=2, keepdims=True)
    var = xg.var(axis=2, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (xg - mu) * inv

    def bw(g):
        gg = g.reshape(n, groups, m)
        gmean = gg.mean(axis=2, keepdims=True)
        proj = (gg * xhat).mean(axis=2, keepdims=True)
        gx = (gg - gmean - xhat * proj) * inv
        return (gx.reshape(x.shape),)

    return _make(xhat.reshape(x.shape), (x,), bw)


def _im2col(x: np.ndarray, kernel: int, stride: int):
    """(N, C, H, W) -> (N, H_out, W_out, C*k*k) patch matrix (copies)."""
    n, c, h, w = x.shape
    h_out = (h - kernel) // stride + 1
    w_out = (w - kernel) // stride + 1
    s = x.strides
    view = np.lib.stride_tricks.as_strided(
        x,
        shape=(n, c, h_out, w_out, kernel, kernel),
        strides=(s[0], s[1], s[2] * stride, s[3] * stride, s[2], s[3]),
        writeable=False,
    )
    return view.transpose(0, 2, 3, 1, 4, 5).reshape(n, h_out, w_out, c * kernel * kernel), h_out, w_out


def _col2im(cols: np.ndarray, x_shape, kernel: int, stride: int):
    """Adjoint of _im2col: scatter-add patch gradients back."""
    n, c, h, w = x_shape
    h_out = (h - kernel) // stride + 1
    w_out = (w - kernel) // stride + 1
    grad = np.zeros(x_shape, dtype=np.float64)
    # One contiguous transpose up front beats nine strided ones in the loop.
    cols = np.ascontiguousarray(
        cols.reshape(n, h_out, w_out, c, kernel, kernel).transpose(0, 3, 4, 5, 1, 2)
    )
    for i in range(kernel):
        hi = i + stride * h_out
        for j in range(kernel):
            wj = j + stride * w_out
            grad[:, :, i:hi:stride, j:wj:stride] += cols[:, :, i, j]
    return grad


def conv2d(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 1, padding: int = 1) -> Tensor:
    """NCHW convolution via im2col; weight (C_out, C_in, k, k), bias (C_out,)."""
    n, c_in, h, w = x.shape
    c_out, c_in_w, kh, kw = weight.shape
    if c_in != c_in_w or kh != kw:
        raise ShapeError(
            f"conv2d weight {weight.shape} incompatible with input {x.shape}"
        )
    xp = np.pad(x.value, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    cols, h_out, w_out = _im2col(xp, kh, stride)
    w_flat = weight.value.reshape(c_out, -1)
    out = cols @ w_flat.T + bias.value
    out = out.transpose(0, 3, 1, 2)

    def bw(g):
        g_nhwc = g.transpose(0, 2, 3, 1)
        g_flat = g_nhwc.reshape(-1, c_out)
        cols_flat = cols.reshape(-1, cols.shape[-1])
        grad_w = (g_flat.T @ cols_flat).reshape(weight.shape)
        grad_b = g_flat.sum(axis=0)
        grad_cols = g_nhwc @ w_flat
        grad_xp = _col2im(grad_cols, xp.shape, kh, stride)
        grad_x = (
            grad_xp[:, :, padding : padding + h, padding : padding + w]
            if padding
            else grad_xp
        )
        return grad_x, grad_w, grad_b

    return _make(out, (x, weight, bias), bw)


def conv1d(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 1, padding: int = 1) -> Tensor:
    """NCL convolution expressed through conv2d with a unit height."""
    n, c, length = x.shape
    c_out, c_in, k = weight.shape
    x4 = reshape(x, (n, c, 1, length))
    w4 = reshape(weight, (c_out, c_in, 1, k))
    out = _conv2d_hw(x4, w4, bias, stride=stride, pad_h=0, pad_w=padding)
    return reshape(out, (n, c_out, out.shape[3]))


def _conv2d_hw(x: Tensor, weight: Tensor, bias: Tensor, stride: int, pad_h: int, pad_w: int) -> Tensor:
    """conv2d variant with rectangular kernels/padding (used by conv1d)."""
    n, c_in, h, w = x.shape
    c_out, _, kh, kw = weight.shape
    xp = np.pad(x.value, ((0, 0), (0, 0), (pad_h, pad_h), (pad_w, pad_w)))
    s = xp.strides
    h_out = (xp.shape[2] - kh) + 1  # height never strided here
    w_out = (xp.shape[3] - kw) // stride + 1
    view = np.lib.stride_tricks.as_strided(
        xp,
        shape=(n, c_in, h_out, w_out, kh, kw),
        strides=(s[0], s[1], s[2], s[3] * stride, s[2], s[3]),
        writeable=False,
    )
    cols = view.transpose(0, 2, 3, 1, 4, 5).reshape(n, h_out, w_out, c_in * kh * kw)
    w_flat = weight.value.reshape(c_out, -1)
    out = (cols @ w_flat.T + bias.value).transpose(0, 3, 1, 2)

    def bw(g):
        g_nhwc = g.transpose(0, 2, 3, 1)
        g_flat = g_nhwc.reshape(-1, c_out)
        grad_w = (g_flat.T @ cols.reshape(-1, cols.shape[-1])).reshape(weight.shape)
        grad_b = g_flat.sum(axis=0)
        grad_cols = (g_nhwc @ w_flat).reshape(n, h_out, w_out, c_in, kh, kw)
        grad_xp = np.zeros(xp.shape, dtype=np.float64)
        for i in range(kh):
            for j in range(kw):
                grad_xp[:, :, i : i + h_out, j : j + stride * w_out : stride] += (
                    grad_cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                )
        grad_x = grad_xp[:, :, pad_h : pad_h + h, pad_w : pad_w + w]
        return grad_x, grad_w, grad_b

    return _make(out, (x, weight, bias), bw)


def backward(loss: Tensor) -> None:
    """Reverse-accumulate gradients of a scalar loss into .grad slots."""
    if loss.value.size != 1:
        raise GraphError(f"backward needs a scalar loss, got shape {loss.value.shape}")
    if not loss.requires_grad:
        raise GraphError("loss does not depend on any parameter")
    order: list[Tensor] = []
    state: dict[int, int] = {}  # 0 visiting, 1 done
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            state[id(node)] = 1
            order.append(node)
            continue
        mark = state.get(id(node))
        if mark == 1:
            continue
        if mark == 0:
            raise GraphError("cycle detected in autodiff graph")
        state[id(node)] = 0
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and state.get(id(p), -1) == -1:
                stack.append((p, False))
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.value)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.grad is None:
            node.grad = g.copy()
        else:
            node.grad = node.grad + g
        if node._backward_fn is None:
            continue
        parent_grads = node._backward_fn(g)
        for p, pg in zip(node.parents, parent_grads):
            if pg is None or not p.requires_grad:
                continue
            if id(p) in grads:
                grads[id(p)] = grads[id(p)] + pg
            else:
                grads[id(p)] = pg


def zero_grads(params) -> None:
    for p in params:
        p.grad = None
