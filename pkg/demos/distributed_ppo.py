"""PPO on CartPole with two actors and two learners on the in-process runtime."""

from drlzoo import DPPO, build_env, call_default_params, override_params

if __name__ == "__main__":
    env = build_env("CartPole-v0", "classic_control")
    params = call_default_params(env, "classic_control", "DPPO")
    alg_params, learn_params = override_params(params, {"actors": 2, "learners": 2, "max_episodes": 200})
    record = DPPO(**alg_params).learn(env, "train", **learn_params)
    print(f"{len(record)} episodes, trailing-20 mean reward {record.trailing_mean(20):.1f}")
