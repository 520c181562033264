"""Differentiable primitives.

Each function computes the forward value with numpy and hands ``record`` a
closure mapping the output gradient to one gradient per input.  Binary ops
broadcast numpy-style; gradients are summed back to each input's shape.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .tensor import ShapeMismatch, Tensor, as_tensor, default_dtype, record


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    ndim_extra = g.ndim - len(shape)
    if ndim_extra > 0:
        g = g.sum(axis=tuple(range(ndim_extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _broadcast_check(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(f"{op}: cannot broadcast {a.shape} with {b.shape}") from None


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("add", a, b)
    sa, sb = a.shape, b.shape
    return record("add", a.data + b.data, (a, b),
                  lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("sub", a, b)
    sa, sb = a.shape, b.shape
    return record("sub", a.data - b.data, (a, b),
                  lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("mul", a, b)
    ad, bd = a.data, b.data
    return record("mul", ad * bd, (a, b),
                  lambda g: (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)))


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("div", a, b)
    ad, bd = a.data, b.data
    out = ad / bd

    def back(g):
        return _unbroadcast(g / bd, ad.shape), _unbroadcast(-g * out / bd, bd.shape)

    return record("div", out, (a, b), back)


def neg(a) -> Tensor:
    a = as_tensor(a)
    return record("neg", -a.data, (a,), lambda g: (-g,))


def exp(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        out = np.exp(a.data)
    return record("exp", out, (a,), lambda g: (g * out,))


def log(a) -> Tensor:
    a = as_tensor(a)
    ad = a.data
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(ad)
    return record("log", out, (a,), lambda g: (g / ad,))


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)
    return record("tanh", out, (a,), lambda g: (g * (1.0 - out * out),))


def relu(a) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return record("relu", a.data * mask, (a,), lambda g: (g * mask,))


def square(a) -> Tensor:
    a = as_tensor(a)
    ad = a.data
    return record("square", ad * ad, (a,), lambda g: (2.0 * g * ad,))


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(invalid="ignore"):
        out = np.sqrt(a.data)

    def back(g):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (g * 0.5 / out,)

    return record("sqrt", out, (a,), back)


def clip(a, lo, hi) -> Tensor:
    a = as_tensor(a)
    ad = a.data
    mask = (ad >= lo) & (ad <= hi)
    return record("clip", np.clip(ad, lo, hi), (a,), lambda g: (g * mask,))


def minimum(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("minimum", a, b)
    pick_a = a.data <= b.data
    return record("minimum", np.where(pick_a, a.data, b.data), (a, b),
                  lambda g: (_unbroadcast(g * pick_a, a.shape), _unbroadcast(g * ~pick_a, b.shape)))


def maximum(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("maximum", a, b)
    pick_a = a.data >= b.data
    return record("maximum", np.where(pick_a, a.data, b.data), (a, b),
                  lambda g: (_unbroadcast(g * pick_a, a.shape), _unbroadcast(g * ~pick_a, b.shape)))


def _expand(g, shape, axis, keepdims):
    if axis is None:
        g = np.reshape(g, [1] * len(shape))
    elif not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


def sum(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    shape = a.shape
    out = np.asarray(a.data.sum(axis=axis, keepdims=keepdims))
    return record("sum", out, (a,), lambda g: (_expand(g, shape, axis, keepdims),))


def mean(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    shape = a.shape
    n = float(a.data.size if axis is None else np.prod([shape[i] for i in np.atleast_1d(axis)]))
    out = np.asarray(a.data.mean(axis=axis, keepdims=keepdims))
    return record("mean", out, (a,), lambda g: (_expand(g, shape, axis, keepdims) / n,))


def max(a, axis=-1, keepdims=False) -> Tensor:
    a = as_tensor(a)
    ad = a.data
    idx = np.expand_dims(np.argmax(ad, axis=axis), axis)
    out = np.take_along_axis(ad, idx, axis=axis)
    if not keepdims:
        out = np.squeeze(out, axis=axis)

    def back(g):
        gi = np.zeros_like(ad)
        gk = g if keepdims else np.expand_dims(g, axis)
        np.put_along_axis(gi, idx, gk, axis=axis)
        return (gi,)

    return record("max", out, (a,), back)


def softmax(a, axis=-1) -> Tensor:
    a = as_tensor(a)
    z = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    out = e / e.sum(axis=axis, keepdims=True)

    def back(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return record("softmax", out, (a,), back)


def log_softmax(a, axis=-1) -> Tensor:
    a = as_tensor(a)
    z = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    out = z - lse
    p = np.exp(out)

    def back(g):
        return (g - p * g.sum(axis=axis, keepdims=True),)

    return record("log_softmax", out, (a,), back)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data
    return record("matmul", ad @ bd, (a, b), lambda g: (g @ bd.T, ad.T @ g))


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    old = a.shape
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeMismatch(f"reshape: {old} -> {shape}") from None
    return record("reshape", out, (a,), lambda g: (g.reshape(old),))


def flatten(a) -> Tensor:
    """Collapse everything but the leading batch dimension."""
    a = as_tensor(a)
    return reshape(a, (a.shape[0], -1))


def concat(tensors, axis=-1) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in ts], axis=axis)
    except ValueError:
        raise ShapeMismatch(f"concat: shapes {[t.shape for t in ts]} on axis {axis}") from None
    sizes = [t.shape[axis] for t in ts]
    cuts = np.cumsum(sizes)[:-1]

    def back(g):
        return tuple(np.split(g, cuts, axis=axis))

    return record("concat", out, tuple(ts), back)


def slice(a, key) -> Tensor:
    a = as_tensor(a)
    shape = a.shape
    out = np.array(a.data[key])

    def back(g):
        gi = np.zeros(shape, dtype=g.dtype)
        np.add.at(gi, key, g)
        return (gi,)

    return record("slice", out, (a,), back)


def gather(a, indices) -> Tensor:
    """Pick one entry per row along the last axis: ``out[i] = a[i, indices[i]]``."""
    a = as_tensor(a)
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if a.ndim != 2 or idx.shape[0] != a.shape[0]:
        raise ShapeMismatch(f"gather: {a.shape} with {idx.shape[0]} indices")
    if idx.size and (idx.min() < 0 or idx.max() >= a.shape[1]):
        raise ShapeMismatch(f"gather: index out of range for width {a.shape[1]}")
    rows = np.arange(a.shape[0])
    shape = a.shape

    def back(g):
        gi = np.zeros(shape, dtype=g.dtype)
        gi[rows, idx] = g
        return (gi,)

    return record("gather", a.data[rows, idx], (a,), back)


def stop_gradient(a) -> Tensor:
    a = as_tensor(a)
    return Tensor(a.data)


def _windows(x: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    b, h, w, c = x.shape
    ho = (h - kh) // stride + 1
    wo = (w - kw) // stride + 1
    sb, sh, sw, sc = x.strides
    return as_strided(x, shape=(b, ho, wo, kh, kw, c),
                      strides=(sb, sh * stride, sw * stride, sh, sw, sc), writeable=False)


def conv2d(x, kernel, stride: int = 1) -> Tensor:
    """Valid (unpadded) 2-D convolution, NHWC input, kernel (kh, kw, c_in, c_out)."""
    x, kernel = as_tensor(x), as_tensor(kernel)
    if x.ndim != 4 or kernel.ndim != 4 or x.shape[3] != kernel.shape[2]:
        raise ShapeMismatch(f"conv2d: input {x.shape} with kernel {kernel.shape}")
    kh, kw, cin, cout = kernel.shape
    b, h, w, _ = x.shape
    if h < kh or w < kw:
        raise ShapeMismatch(f"conv2d: input {x.shape} smaller than kernel {kernel.shape}")
    xd = np.ascontiguousarray(x.data)
    win = _windows(xd, kh, kw, stride)
    ho, wo = win.shape[1], win.shape[2]
    cols = win.reshape(b * ho * wo, kh * kw * cin)
    wmat = kernel.data.reshape(kh * kw * cin, cout)
    out = (cols @ wmat).reshape(b, ho, wo, cout)

    def back(g):
        g2 = g.reshape(b * ho * wo, cout)
        gk = (cols.T @ g2).reshape(kernel.shape)
        gcols = (g2 @ wmat.T).reshape(b, ho, wo, kh, kw, cin)
        gx = np.zeros(xd.shape, dtype=g.dtype)
        for i in range(kh):
            for j in range(kw):
                gx[:, i:i + stride * ho:stride, j:j + stride * wo:stride, :] += gcols[:, :, :, i, j, :]
        return gx, gk

    return record("conv2d", out, (x, kernel), back)


def pad2d(x, pad: int) -> Tensor:
    """Zero-pad the two spatial axes of an NHWC tensor by ``pad`` on every side."""
    x = as_tensor(x)
    if x.ndim != 4:
        raise ShapeMismatch(f"pad2d: expected NHWC input, got {x.shape}")
    if pad == 0:
        return x
    out = np.pad(x.data, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    return record("pad2d", out, (x,), lambda g: (g[:, pad:-pad, pad:-pad, :],))


PRIMITIVES = {
    "matmul": matmul, "add": add, "mul": mul, "sub": sub, "div": div, "neg": neg,
    "exp": exp, "log": log, "tanh": tanh, "relu": relu, "softmax": softmax,
    "log_softmax": log_softmax, "sum": sum, "mean": mean, "max": max,
    "reshape": reshape, "concat": concat, "slice": slice, "conv2d": conv2d,
    "flatten": flatten, "clip": clip, "square": square, "sqrt": sqrt,
    "gather": gather, "stop_gradient": stop_gradient, "minimum": minimum,
    "maximum": maximum, "pad2d": pad2d,
}


def apply_primitive(op: str, *inputs, **attrs) -> Tensor:
    """Dispatch a primitive by name, e.g. ``apply_primitive("softmax", z, axis=-1)``."""
    try:
        fn = PRIMITIVES[op]
    except KeyError:
        raise ValueError(f"unknown primitive {op!r}; known: {', '.join(sorted(PRIMITIVES))}") from None
    if op == "concat":
        return fn(list(inputs), **attrs)
    return fn(*inputs, **attrs)


def constant(x) -> Tensor:
    return Tensor(np.asarray(x, dtype=default_dtype()))


__all__ = [name for name in PRIMITIVES] + ["apply_primitive", "constant"]
