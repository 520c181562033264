"""Train PPO on CartPole under two seeds, then line up the runs."""

import sys

from drlzoo import PPO, build_env, call_default_params, compare_runs, override_params

if __name__ == "__main__":
    episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    records = []
    for seed in (0, 1):
        env = build_env("CartPole-v0", "classic_control")
        params = call_default_params(env, "classic_control", "PPO", seed=seed)
        alg_params, learn_params = override_params(params, {"learn.seed": seed, "max_episodes": episodes})
        records.append(PPO(**alg_params).learn(env, "train", **learn_params))
    for row in compare_runs(records):
        print(row)
