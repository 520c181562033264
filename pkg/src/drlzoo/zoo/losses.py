"""Update rules shared by the zoo algorithms.

Targets are plain float32 arrays (no gradient); losses are scalar Tensors.
"""

from __future__ import annotations

import numpy as np

from ..ndiff import ops
from ..ndiff.tensor import ShapeMismatch, Tensor, as_tensor, no_grad


class LengthMismatch(ValueError):
    pass


def _f32(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float32)


def td_target(batch, q_target_net, q_online_net, gamma: float, mode: str = "dqn") -> np.ndarray:
    """One-step Q-learning targets; ``mode="double"`` picks a' with the online net."""
    r, d = _f32(batch["rewards"]), _f32(batch["dones"])
    with no_grad():
        q_next = q_target_net(batch["next_obs"]).data
        if mode == "double":
            a_star = np.argmax(q_online_net(batch["next_obs"]).data, axis=-1)
            boot = q_next[np.arange(len(a_star)), a_star]
        elif mode == "dqn":
            boot = q_next.max(axis=-1)
        else:
            raise ValueError(f"unknown td_target mode {mode!r}")
    return (r + np.float32(gamma) * (1.0 - d) * boot).astype(np.float32)


def dueling_combine(value, advantage) -> Tensor:
    """Q = V + A - mean(A) over actions."""
    advantage = as_tensor(advantage)
    return as_tensor(value) + advantage - ops.mean(advantage, axis=-1, keepdims=True)


def compute_gae(rewards, values, dones, gamma: float, lam: float):
    """Generalised advantage estimates and returns.

    ``values`` carries one more entry than ``rewards``: the bootstrap value of
    the state after the last step.  ``dones[t]`` cuts the recursion after step t.
    """
    rewards, values, dones = _f32(rewards), _f32(values), _f32(dones)
    n = len(rewards)
    if len(values) != n + 1 or len(dones) != n:
        raise LengthMismatch(f"need len(values) == len(rewards) + 1 == len(dones) + 1, "
                             f"got {len(values)}, {n}, {len(dones)}")
    g, lg = np.float32(gamma), np.float32(gamma * lam)
    adv = np.zeros(n, dtype=np.float32)
    last = np.float32(0.0)
    for t in range(n - 1, -1, -1):
        nonterminal = np.float32(1.0) - dones[t]
        delta = rewards[t] + g * nonterminal * values[t + 1] - values[t]
        last = delta + lg * nonterminal * last
        adv[t] = last
    return adv, adv + values[:n]


def policy_gradient_loss(log_probs, advantages, values, returns, entropy,
                         value_coef: float = 0.5, entropy_coef: float = 0.01) -> Tensor:
    """-mean(log_prob * A) + c_v * mean((V - R)^2) - c_e * mean(entropy)."""
    adv = Tensor(_f32(advantages))
    loss = -ops.mean(as_tensor(log_probs) * adv)
    if value_coef:
        loss = loss + value_coef * ops.mean(ops.square(as_tensor(values) - Tensor(_f32(returns))))
    if entropy_coef:
        loss = loss - entropy_coef * ops.mean(as_tensor(entropy))
    return loss


def ppo_clip_loss(ratio, advantages, clip_eps: float) -> Tensor:
    """Negative clipped surrogate: -mean(min(r*A, clip(r, 1-eps, 1+eps)*A))."""
    ratio = as_tensor(ratio)
    adv = Tensor(_f32(advantages))
    unclipped = ratio * adv
    clipped = ops.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv
    return -ops.mean(ops.minimum(unclipped, clipped))


def deterministic_actor_loss(obs, actor, critic) -> Tensor:
    """-mean(Q(s, pi(s))).  Gradients reach the critic too; only the actor is stepped."""
    return -ops.mean(critic(obs, actor(obs)))


def td3_smoothed_target(batch, target_actor, target_critics, gamma: float, noise_std: float,
                        noise_clip: float, rng) -> np.ndarray:
    """Clipped double-Q target with target-policy smoothing (actions in [-1, 1])."""
    r, d = _f32(batch["rewards"]), _f32(batch["dones"])
    with no_grad():
        a = target_actor(batch["next_obs"]).data
        if noise_std > 0:
            noise = rng.normal(0.0, noise_std, size=a.shape).astype(np.float32)
            a = a + np.clip(noise, -noise_clip, noise_clip)
        a = np.clip(a, -1.0, 1.0).astype(np.float32)
        qs = [c(batch["next_obs"], a).data.reshape(-1) for c in target_critics]
    q = np.minimum.reduce(qs) if len(qs) > 1 else qs[0]
    return (r + np.float32(gamma) * (1.0 - d) * q).astype(np.float32)


def mse(pred, target) -> Tensor:
    pred = as_tensor(pred)
    t = Tensor(_f32(target).reshape(pred.shape))
    return ops.mean(ops.square(pred - t))


def weighted_mse(pred, target, weights) -> Tensor:
    pred = as_tensor(pred)
    t = Tensor(_f32(target).reshape(pred.shape))
    w = Tensor(_f32(weights).reshape(pred.shape))
    return ops.mean(w * ops.square(pred - t))


def sac_alpha_loss(log_alpha, log_pi, target_entropy: float) -> Tensor:
    """-mean(log_alpha * (log_pi + H_target)) with log_pi held constant."""
    lp = Tensor(_f32(log_pi))
    return -ops.mean(as_tensor(log_alpha) * (lp + np.float32(target_entropy)))


def soft_update(target_params, online_params, tau: float) -> None:
    target_params, online_params = list(target_params), list(online_params)
    if len(target_params) != len(online_params):
        raise ShapeMismatch(f"soft_update: {len(target_params)} target vs {len(online_params)} online tensors")
    for t, o in zip(target_params, online_params):
        if t.shape != o.shape:
            raise ShapeMismatch(f"soft_update: {t.shape} vs {o.shape}")
    tau32 = np.float32(tau)
    for t, o in zip(target_params, online_params):
        if tau == 1.0:
            t.data[...] = o.data
        elif tau != 0.0:
            t.data *= np.float32(1.0) - tau32
            t.data += tau32 * o.data
