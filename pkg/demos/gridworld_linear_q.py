"""DQN with a hand-supplied linear Q function on the 5x5 grid, scored against value iteration."""

import numpy as np

from drlzoo import DQN, build_env, call_default_params, override_params
from drlzoo.nets import build_linear

GAMMA = 0.9


def optimal_q(env):
    cells = [(r, c) for r in range(env.size) for c in range(env.size)]
    v = {p: 0.0 for p in cells}

    def q(p, a):
        nxt = env.transition(p, a)
        return 1.0 if nxt == env.goal else GAMMA * v[nxt]

    for _ in range(100):
        v = {p: 0.0 if p == env.goal else max(q(p, a) for a in range(4)) for p in cells}
    return {p: [q(p, a) for a in range(4)] for p in cells if p != env.goal}


def greedy_agreement(agent, env):
    qs = optimal_q(env)
    hits = sum(np.isclose(q[agent.act(env.encode(p))], max(q)) for p, q in qs.items())
    return hits / len(qs)


if __name__ == "__main__":
    env = build_env("GridWorld-5x5", "toy")
    params = call_default_params(env, "toy", "DQN")
    params = override_params(params, {"net_list": [build_linear(25, 4, np.random.default_rng(0))],
                                      "max_episodes": 2000, "metrics_dir": None})
    agent = DQN(**params[0])
    record = agent.learn(env, "train", **params[1])
    print(f"{len(record)} episodes, greedy agreement {greedy_agreement(agent, env):.2f}")
