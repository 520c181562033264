"""Independent reference computations used by the tests.

Nothing here imports the package's implementation of the quantity being
checked; each oracle is a direct, slow restatement of the definition.
"""

from __future__ import annotations

import math

import numpy as np


# ---- GridWorld value iteration ----

GRID = 5
GOAL = (4, 4)
MOVES = [(-1, 0), (1, 0), (0, -1), (0, 1)]


def grid_next(r, c, a, size=GRID):
    nr, nc = r + MOVES[a][0], c + MOVES[a][1]
    if 0 <= nr < size and 0 <= nc < size:
        return nr, nc
    return r, c


def value_iteration(gamma=0.9, size=GRID, tol=1e-12):
    """Q*[cell, action] for the corner-to-corner grid (reward 1 on entering the goal)."""
    goal = (size - 1, size - 1)
    V = np.zeros((size, size))
    while True:
        Q = np.zeros((size * size, 4))
        for r in range(size):
            for c in range(size):
                if (r, c) == goal:
                    continue
                for a in range(4):
                    nr, nc = grid_next(r, c, a, size)
                    Q[r * size + c, a] = 1.0 if (nr, nc) == goal else gamma * V[nr, nc]
        newV = Q.max(axis=1).reshape(size, size)
        newV[goal] = 0.0
        if np.abs(newV - V).max() < tol:
            return Q
        V = newV


def optimal_actions(Q, size=GRID):
    """Set of optimal actions per non-terminal cell."""
    out = {}
    for s in range(size * size):
        if s == size * size - 1:
            continue
        best = Q[s].max()
        out[s] = {a for a in range(4) if abs(Q[s, a] - best) < 1e-9}
    return out


# ---- advantage estimation ----

def gae_bruteforce(rewards, values, dones, gamma, lam):
    """A_t as the explicit sum over k of (gamma*lam)^k * delta_{t+k}, truncated at dones."""
    n = len(rewards)
    deltas = [rewards[t] + gamma * (1 - dones[t]) * values[t + 1] - values[t] for t in range(n)]
    adv = []
    for t in range(n):
        total, w = 0.0, 1.0
        for k in range(t, n):
            total += w * deltas[k]
            if dones[k]:
                break
            w *= gamma * lam
        adv.append(total)
    adv = np.array(adv)
    return adv, adv + np.asarray(values[:n])


# ---- cart-pole dynamics (semi-implicit form written out independently) ----

def cartpole_step(state, action):
    x, xd, th, thd = state
    g, mc, mp, l, dt = 9.8, 1.0, 0.1, 0.5, 0.02
    f = 10.0 if action == 1 else -10.0
    m = mc + mp
    s, c = math.sin(th), math.cos(th)
    # equations of motion of a pole on a cart, solved for the two accelerations
    a = (f + mp * l * thd * thd * s) / m
    thdd = (g * s - c * a) / (l * (4.0 / 3.0 - mp * c * c / m))
    xdd = a - mp * l * thdd * c / m
    new = (x + dt * xd, xd + dt * xdd, th + dt * thd, thd + dt * thdd)
    done = abs(new[0]) > 2.4 or abs(new[2]) > 12 * math.pi / 180
    return new, done


# ---- distributions ----

def gaussian_logpdf(a, mu, sigma):
    return -((a - mu) ** 2) / (2 * sigma ** 2) - math.log(sigma) - 0.5 * math.log(2 * math.pi)


def softmax(z):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


# ---- reduction tree ----

def serial_tree_sum(parts):
    """Sum float32 arrays by recursive range halving, written as an explicit work list."""
    parts = [np.asarray(p, dtype=np.float32) for p in parts]

    def go(lo, hi):
        if hi - lo == 1:
            return parts[lo].copy()
        mid = (lo + hi) // 2
        left = go(lo, mid)
        right = go(mid, hi)
        return (left + right).astype(np.float32)

    return go(0, len(parts))


# ---- numerical derivative ----

def numeric_grad(f, x, h=1e-6):
    """Central differences of a float64 numpy function."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        xp, xm = x.copy().reshape(-1), x.copy().reshape(-1)
        xp[i] += h
        xm[i] -= h
        g.reshape(-1)[i] = (f(xp.reshape(x.shape)) - f(xm.reshape(x.shape))) / (2 * h)
    return g
