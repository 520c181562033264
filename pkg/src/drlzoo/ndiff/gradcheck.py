from __future__ import annotations

import numpy as np

from .tensor import Tensor, backward, float64_mode


def finite_diff_check(f, x, h: float = 1e-6) -> float:
    """Max-norm relative error between autodiff and central differences.

    ``f`` maps a Tensor to a scalar Tensor.  Both routes run in float64 so the
    comparison measures the gradient code rather than float32 round-off.  The
    error is ``max|a - n| / max(max|a|, max|n|, 1e-8)``; identical zero
    gradients give 0.
    """
    x0 = np.asarray(x.data if isinstance(x, Tensor) else x, dtype=np.float64)
    with float64_mode():
        xt = Tensor(x0.copy(), requires_grad=True)
        out = f(xt)
        backward(out)
        analytic = np.zeros_like(x0) if xt.grad is None else np.asarray(xt.grad, dtype=np.float64)
        numeric = np.zeros_like(x0)
        flat = numeric.reshape(-1)
        for i in range(x0.size):
            xp = x0.copy().reshape(-1)
            xm = x0.copy().reshape(-1)
            xp[i] += h
            xm[i] -= h
            fp = f(Tensor(xp.reshape(x0.shape))).item()
            fm = f(Tensor(xm.reshape(x0.shape))).item()
            flat[i] = (fp - fm) / (2.0 * h)
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), 1e-8)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)
