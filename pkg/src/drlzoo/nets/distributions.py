"""Action distributions over network outputs."""

from __future__ import annotations

import math

import numpy as np

from ..envs.spaces import Box
from ..ndiff import ops
from ..ndiff.tensor import Tensor, as_tensor

LOG_STD_MIN, LOG_STD_MAX = -20.0, 2.0
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class Categorical:
    def __init__(self, logits):
        self.logits = as_tensor(logits)
        self.log_probs = ops.log_softmax(self.logits, axis=-1)

    @property
    def probs(self) -> Tensor:
        return ops.exp(self.log_probs)

    def log_prob(self, actions) -> Tensor:
        return ops.gather(self.log_probs, np.asarray(actions, dtype=np.int64).reshape(-1))

    def entropy(self) -> Tensor:
        return -ops.sum(self.probs * self.log_probs, axis=-1)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Gumbel-argmax draw, one action per row."""
        g = rng.gumbel(size=self.logits.shape).astype(np.float32)
        return np.argmax(self.log_probs.data + g, axis=-1)

    def mode(self) -> np.ndarray:
        return np.argmax(self.logits.data, axis=-1)


class DiagGaussian:
    def __init__(self, mean, log_std):
        self.mean = as_tensor(mean)
        self.log_std = ops.clip(as_tensor(log_std), LOG_STD_MIN, LOG_STD_MAX)
        self.std = ops.exp(self.log_std)

    @classmethod
    def from_params(cls, params) -> "DiagGaussian":
        """Split a ``(batch, 2*dim)`` head output into mean and log-std halves."""
        params = as_tensor(params)
        d = params.shape[-1] // 2
        return cls(params[:, :d], params[:, d:])

    def log_prob(self, actions) -> Tensor:
        z = (as_tensor(actions) - self.mean) / self.std
        per_dim = -0.5 * ops.square(z) - self.log_std - HALF_LOG_2PI
        return ops.sum(per_dim, axis=-1)

    def entropy(self) -> Tensor:
        return ops.sum(self.log_std + (0.5 + HALF_LOG_2PI), axis=-1)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        eps = rng.standard_normal(self.mean.shape).astype(np.float32)
        return self.mean.data + self.std.data * eps

    def rsample(self, rng: np.random.Generator) -> Tensor:
        """Reparameterised sample; differentiable in mean and log-std."""
        eps = rng.standard_normal(self.mean.shape).astype(np.float32)
        return self.mean + self.std * eps

    def mode(self) -> np.ndarray:
        return self.mean.data


def categorical_eval(logits, action, rng: np.random.Generator):
    """(log_prob, entropy, sample) for a batch of categorical distributions."""
    dist = Categorical(logits)
    return dist.log_prob(action), dist.entropy(), dist.sample(rng)


def gaussian_eval(mean, log_std, action, rng: np.random.Generator):
    """(log_prob, entropy, sample) for a batch of diagonal Gaussians."""
    dist = DiagGaussian(mean, log_std)
    return dist.log_prob(action), dist.entropy(), dist.sample(rng)


def squash_to_box(raw, box: Box):
    """Map unbounded ``raw`` into ``box`` with tanh; also return the log-prob correction.

    ``a = low + (tanh(u) + 1) / 2 * (high - low)``.  The correction is added to
    the Gaussian log-density of ``u`` to obtain the density of ``a``:
    ``-sum(log(1 - tanh(u)^2 + 1e-6)) - sum(log((high - low) / 2))``.
    """
    raw = as_tensor(raw)
    t = ops.tanh(raw)
    half = (box.high - box.low) / 2.0
    action = t * half + (box.low + half)
    jac = ops.sum(ops.log(1.0 - ops.square(t) + 1e-6), axis=-1)
    correction = -jac - float(np.log(half).sum())
    return action, correction


def unsquash_scale(box: Box):
    """Centre and half-range used to map [-1, 1] onto ``box``."""
    half = (box.high - box.low) / 2.0
    return box.low + half, half
