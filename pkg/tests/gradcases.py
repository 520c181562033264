"""Finite-difference cases: every differentiable primitive and every zoo loss.

Each factory takes a numpy Generator and returns ``(f, x)`` where ``f`` maps a
Tensor to a scalar Tensor.  Fixed random weights ``W`` contract the output so
every output element carries a distinct gradient.
"""

from __future__ import annotations

import numpy as np

from drlzoo.ndiff import Tensor, ops
from drlzoo.nets import DiagGaussian, squash_to_box
from drlzoo.envs import Box
from drlzoo.zoo.losses import (dueling_combine, mse, policy_gradient_loss, ppo_clip_loss, sac_alpha_loss,
                               weighted_mse)


def _away_from(x, points, margin=1e-2):
    # keep samples off kinks so central differences stay on one side
    for p in points:
        close = np.abs(x - p) < margin
        x = np.where(close, p + np.sign(x - p + 1e-12) * margin * 2, x)
    return x


def _unary(op, lo=-2.0, hi=2.0, kinks=()):
    def make(rng):
        x = _away_from(rng.uniform(lo, hi, (3, 4)), kinks)
        w = rng.standard_normal((3, 4))
        return (lambda t: ops.sum(op(t) * w)), x
    return make


def _binary(op, left=True, positive_other=False):
    def make(rng):
        x = rng.uniform(-2, 2, (3, 4))
        other = rng.uniform(0.5, 2, (1, 4)) if positive_other else rng.uniform(-2, 2, (1, 4))
        w = rng.standard_normal((3, 4))
        if left:
            return (lambda t: ops.sum(op(t, other) * w)), x
        return (lambda t: ops.sum(op(other, t) * w)), rng.uniform(0.5, 2, (3, 4))
    return make


def _matmul(rng):
    b = rng.standard_normal((4, 2))
    w = rng.standard_normal((3, 2))
    return (lambda t: ops.sum(ops.matmul(t, b) * w)), rng.standard_normal((3, 4))


def _matmul_right(rng):
    a = rng.standard_normal((3, 4))
    w = rng.standard_normal((3, 2))
    return (lambda t: ops.sum(ops.matmul(a, t) * w)), rng.standard_normal((4, 2))


def _reduce(op, **kw):
    def make(rng):
        x = rng.standard_normal((3, 4))
        probe = op(Tensor(x), **kw)
        w = rng.standard_normal(probe.shape)
        return (lambda t: ops.sum(op(t, **kw) * w)), x
    return make


def _concat(rng):
    other = rng.standard_normal((3, 2))
    w = rng.standard_normal((3, 6))
    return (lambda t: ops.sum(ops.concat([t, other], axis=-1) * w)), rng.standard_normal((3, 4))


def _slice(rng):
    w = rng.standard_normal((2, 2))
    return (lambda t: ops.sum(ops.slice(t, (slice(1, 3), slice(0, 4, 2))) * w)), rng.standard_normal((3, 4))


def _reshape(rng):
    w = rng.standard_normal((6, 2))
    return (lambda t: ops.sum(ops.reshape(t, (6, 2)) * w)), rng.standard_normal((3, 4))


def _flatten(rng):
    w = rng.standard_normal((2, 12))
    return (lambda t: ops.sum(ops.flatten(t) * w)), rng.standard_normal((2, 3, 2, 2))


def _conv(stride):
    def make(rng):
        k = rng.standard_normal((3, 3, 2, 3))
        x = rng.standard_normal((2, 5, 5, 2))
        probe = ops.conv2d(Tensor(x), Tensor(k), stride)
        w = rng.standard_normal(probe.shape)
        return (lambda t: ops.sum(ops.conv2d(t, k, stride) * w)), x
    return make


def _conv_kernel(rng):
    x = rng.standard_normal((2, 5, 5, 2))
    w = rng.standard_normal((2, 3, 3, 3))
    return (lambda t: ops.sum(ops.conv2d(x, t, 1) * w)), rng.standard_normal((3, 3, 2, 3))


def _pad(rng):
    w = rng.standard_normal((1, 5, 5, 2))
    return (lambda t: ops.sum(ops.pad2d(t, 1) * w)), rng.standard_normal((1, 3, 3, 2))


def _gather(rng):
    idx = rng.integers(0, 4, 3)
    w = rng.standard_normal(3)
    return (lambda t: ops.sum(ops.gather(t, idx) * w)), rng.standard_normal((3, 4))


def _minmax(op):
    def make(rng):
        other = rng.standard_normal((3, 4))
        x = other + np.where(rng.random((3, 4)) < 0.5, -1, 1) * rng.uniform(0.1, 1, (3, 4))
        w = rng.standard_normal((3, 4))
        return (lambda t: ops.sum(op(t, other) * w)), x
    return make


PRIMITIVE_CASES = {
    "matmul(left)": _matmul,
    "matmul(right)": _matmul_right,
    "add": _binary(ops.add),
    "mul": _binary(ops.mul),
    "sub": _binary(ops.sub, left=False),
    "div(numerator)": _binary(ops.div, positive_other=True),
    "div(denominator)": _binary(ops.div, left=False),
    "neg": _unary(ops.neg),
    "exp": _unary(ops.exp),
    "log": _unary(ops.log, 0.2, 3.0),
    "tanh": _unary(ops.tanh),
    "relu": _unary(ops.relu, kinks=(0.0,)),
    "square": _unary(ops.square),
    "sqrt": _unary(ops.sqrt, 0.2, 3.0),
    "clip": _unary(lambda t: ops.clip(t, -1.0, 1.0), kinks=(-1.0, 1.0)),
    "softmax": _reduce(ops.softmax, axis=-1),
    "log_softmax": _reduce(ops.log_softmax, axis=-1),
    "sum(axis)": _reduce(ops.sum, axis=0),
    "mean(axis)": _reduce(ops.mean, axis=1),
    "max(axis)": _reduce(ops.max, axis=-1),
    "reshape": _reshape,
    "flatten": _flatten,
    "concat": _concat,
    "slice": _slice,
    "conv2d(stride 1)": _conv(1),
    "conv2d(stride 2)": _conv(2),
    "conv2d(kernel)": _conv_kernel,
    "pad2d": _pad,
    "gather": _gather,
    "minimum": _minmax(ops.minimum),
    "maximum": _minmax(ops.maximum),
}


# ---- losses ----

def _pg_logp(rng):
    n = 6
    adv, v, ret, ent = (rng.standard_normal(n) for _ in range(4))
    return (lambda t: policy_gradient_loss(t, adv, Tensor(v), ret, Tensor(ent), 0.5, 0.01)), rng.standard_normal(n)


def _pg_values(rng):
    n = 6
    lp, adv, ret, ent = (rng.standard_normal(n) for _ in range(4))
    return (lambda t: policy_gradient_loss(Tensor(lp), adv, t, ret, Tensor(ent), 0.5, 0.01)), rng.standard_normal(n)


def _pg_entropy(rng):
    n = 6
    lp, adv, v, ret = (rng.standard_normal(n) for _ in range(4))
    return (lambda t: policy_gradient_loss(Tensor(lp), adv, Tensor(v), ret, t, 0.5, 0.3)), rng.standard_normal(n)


def _ppo(rng):
    adv = rng.standard_normal(8)
    ratio = _away_from(rng.uniform(0.5, 1.5, 8), (0.8, 1.2))
    return (lambda t: ppo_clip_loss(t, adv, 0.2)), ratio


def _dueling_v(rng):
    a = rng.standard_normal((4, 3))
    w = rng.standard_normal((4, 3))
    return (lambda t: ops.sum(dueling_combine(t, a) * w)), rng.standard_normal((4, 1))


def _dueling_a(rng):
    v = rng.standard_normal((4, 1))
    w = rng.standard_normal((4, 3))
    return (lambda t: ops.sum(dueling_combine(v, t) * w)), rng.standard_normal((4, 3))


def _mse(rng):
    target = rng.standard_normal(5)
    return (lambda t: mse(t, target)), rng.standard_normal(5)


def _weighted_mse(rng):
    target, w = rng.standard_normal(5), rng.uniform(0.1, 1, 5)
    return (lambda t: weighted_mse(t, target, w)), rng.standard_normal(5)


def _alpha(rng):
    log_pi = rng.standard_normal(6)
    return (lambda t: sac_alpha_loss(t, log_pi, -1.0)), rng.standard_normal(1)


def _actor_q(rng):
    # deterministic actor objective -mean(Q(s, pi(s))) with pi linear-tanh and Q quadratic in a
    obs = rng.standard_normal((5, 3))
    target = rng.standard_normal((1, 2))

    def f(w):
        a = ops.tanh(ops.matmul(obs, w))
        q = -ops.sum(ops.square(a - target), axis=-1)
        return -ops.mean(q)

    return f, rng.standard_normal((3, 2)) * 0.5


def _gauss_mean(rng):
    log_std = rng.uniform(-1, 0.5, (4, 2))
    a = rng.standard_normal((4, 2))
    return (lambda t: ops.sum(DiagGaussian(t, log_std).log_prob(a))), rng.standard_normal((4, 2))


def _gauss_log_std(rng):
    mean = rng.standard_normal((4, 2))
    a = rng.standard_normal((4, 2))
    return (lambda t: ops.sum(DiagGaussian(mean, t).log_prob(a))), rng.uniform(-1, 0.5, (4, 2))


def _gauss_entropy(rng):
    return (lambda t: ops.sum(DiagGaussian(np.zeros((4, 2)), t).entropy())), rng.uniform(-1, 0.5, (4, 2))


def _squash(rng):
    box = Box(-2.0, 2.0, (2,))

    def f(u):
        a, corr = squash_to_box(u, box)
        return ops.sum(a * a) + ops.sum(corr)

    return f, rng.uniform(-1.5, 1.5, (3, 2))


def _categorical_logp(rng):
    k = rng.integers(0, 4, 3)
    return (lambda z: ops.sum(ops.gather(ops.log_softmax(z, axis=-1), k))), rng.standard_normal((3, 4))


LOSS_CASES = {
    "policy_gradient(log_prob)": _pg_logp,
    "policy_gradient(value)": _pg_values,
    "policy_gradient(entropy)": _pg_entropy,
    "ppo_clip": _ppo,
    "dueling_combine(V)": _dueling_v,
    "dueling_combine(A)": _dueling_a,
    "mse": _mse,
    "weighted_mse": _weighted_mse,
    "sac_alpha": _alpha,
    "deterministic_actor": _actor_q,
    "gaussian_log_prob(mean)": _gauss_mean,
    "gaussian_log_prob(log_std)": _gauss_log_std,
    "gaussian_entropy": _gauss_entropy,
    "squash_to_box": _squash,
    "categorical_log_prob": _categorical_logp,
}


def max_error(factory, trials: int = 10, seed: int = 0) -> float:
    from drlzoo.ndiff import finite_diff_check
    worst = 0.0
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        f, x = factory(rng)
        worst = max(worst, finite_diff_check(f, x))
    return worst
