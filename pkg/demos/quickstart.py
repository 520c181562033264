"""Declare and train TD3 on Pendulum in four calls."""

from drlzoo import TD3, build_env, call_default_params

env = build_env("Pendulum-v0", "classic_control")
alg_params, learn_params = call_default_params(env, "classic_control", "TD3")
agent = TD3(**alg_params)
record = agent.learn(env, "train", **learn_params)
