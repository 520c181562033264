"""User-facing workflow: build an environment, fetch defaults, construct an agent, learn."""

from ..construct import construct_agent
from ..envs.registry import build_env, list_envs
from ..tracking import ExperimentRecord, UnknownRun, compare_runs, read_run, report_csv, track_metrics
from ..zoo.base import UnknownKey
from ..zoo.registry import get_algorithm, list_algorithms
from .checkpoint import BadMagic, CheckpointError, MissingParam, ShapeMismatch, checkpoint_load, checkpoint_save
from .params import (
    ENV_OVERRIDES,
    ParamSet,
    call_default_params,
    describe_net_list,
    override_params,
    params_from_json,
    params_to_json,
)


def make_agent(alg_name: str, alg_params: dict):
    """Instantiate the zoo class for ``alg_name`` from an ``alg_params`` dict."""
    return get_algorithm(alg_name)(**alg_params)


def agent_learn(agent, env, mode: str = "train", render: bool = False, **learn_params) -> ExperimentRecord:
    return agent.learn(env, mode, render, **learn_params)


__all__ = [
    "BadMagic", "CheckpointError", "ENV_OVERRIDES", "ExperimentRecord", "MissingParam", "ParamSet",
    "ShapeMismatch", "UnknownKey", "UnknownRun", "agent_learn", "build_env", "call_default_params",
    "checkpoint_load", "checkpoint_save", "compare_runs", "construct_agent", "describe_net_list",
    "get_algorithm", "list_algorithms", "list_envs", "make_agent", "override_params",
    "params_from_json", "params_to_json", "read_run", "report_csv", "track_metrics",
]
