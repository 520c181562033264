"""Default parameter registry, overrides and the JSON config form of a ParamSet."""

from __future__ import annotations

import copy
import json
from ..construct import construct_graph, default_networks, get_nature, policy_adaptor
from ..envs.registry import build_env
from ..envs.spaces import space_from_description
from ..nets.networks import Network
from ..zoo.base import COMMON_LEARN, UnknownKey, check_keys, validate_hyperparams
from ..zoo.registry import get_algorithm

# Environment-specific departures from the algorithm defaults, keyed by env name
# and then by algorithm name ("*" applies to every algorithm).
ENV_OVERRIDES = {
    "GridWorld-5x5": {"*": {"alg": {"gamma": 0.9}}},
    "PixelGrid-8x8": {"*": {"alg": {"gamma": 0.9}}},
}

RESERVED_ALG_KEYS = ("observation_space", "action_space", "net_list", "seed")


class ParamSet(tuple):
    """``(alg_params, learn_params)``; unpacks like a pair and remembers its algorithm."""

    def __new__(cls, alg_params: dict, learn_params: dict, alg_name: str | None = None):
        self = super().__new__(cls, (alg_params, learn_params))
        self.alg_name = alg_name
        return self

    @property
    def alg_params(self) -> dict:
        return self[0]

    @property
    def learn_params(self) -> dict:
        return self[1]

    def __repr__(self):
        return f"ParamSet(alg={self.alg_name!r}, alg_params={sorted(self[0])}, learn_params={sorted(self[1])})"


def _env_overrides(env_name: str, alg_name: str) -> tuple[dict, dict]:
    table = ENV_OVERRIDES.get(env_name, {})
    alg, learn = {}, {}
    for key in ("*", alg_name):
        alg.update(table.get(key, {}).get("alg", {}))
        learn.update(table.get(key, {}).get("learn", {}))
    return alg, learn


def call_default_params(env, env_type: str, alg_name: str, seed: int = 0) -> ParamSet:
    """Default ``(alg_params, learn_params)`` for running ``alg_name`` on ``env``.

    ``alg_params`` already holds the adaptor-generated ``net_list``, so it can
    be passed straight to the algorithm class.
    """
    cls = get_algorithm(alg_name)
    nature = get_nature(alg_name)
    policy_adaptor(nature, env.action_space, dueling=cls.dueling)
    alg_over, learn_over = _env_overrides(env.name, alg_name)
    alg_params = {
        "observation_space": env.observation_space,
        "action_space": env.action_space,
        "net_list": default_networks(nature, env.observation_space, env.action_space,
                                     dueling=cls.dueling, seed=seed),
        "seed": seed,
        **copy.deepcopy(cls.DEFAULTS),
        **alg_over,
    }
    learn_params = {**COMMON_LEARN, **cls.LEARN_DEFAULTS, **learn_over, "seed": seed}
    return ParamSet(alg_params, learn_params, alg_name)


def _split_key(key: str, params: ParamSet) -> tuple[str, str]:
    if key.startswith("alg."):
        return "alg", key[4:]
    if key.startswith("learn."):
        return "learn", key[6:]
    in_alg, in_learn = key in params.alg_params, key in params.learn_params
    if in_alg and in_learn:
        raise UnknownKey(f"key {key!r} is ambiguous; use alg.{key} or learn.{key}")
    if in_alg:
        return "alg", key
    if in_learn:
        return "learn", key
    raise UnknownKey(f"unknown parameter {key!r}; alg keys: {', '.join(sorted(params.alg_params))}; "
                     f"learn keys: {', '.join(sorted(params.learn_params))}")


def override_params(params, overrides: dict, alg_name: str | None = None) -> ParamSet:
    """New ParamSet with ``overrides`` applied; plain or ``alg.``/``learn.`` prefixed keys."""
    if not isinstance(params, ParamSet):
        params = ParamSet(*params)
    alg = dict(params.alg_params)
    learn = dict(params.learn_params)
    for key, value in overrides.items():
        side, name = _split_key(key, params)
        target = alg if side == "alg" else learn
        check_keys([name], target, f"{side}_params")
        target[name] = value
    validate_hyperparams(alg)
    if "net_list" in {(_split_key(k, params)[1]) for k in overrides}:
        nets = alg["net_list"]
        if not isinstance(nets, (list, tuple)):
            raise TypeError("net_list must be a list of networks")
        name = alg_name or params.alg_name or _guess_alg(params)
        construct_graph(alg["observation_space"], alg["action_space"], name, list(nets),
                        dueling=get_algorithm(name).dueling)
    return ParamSet(alg, learn, alg_name or params.alg_name)


def _guess_alg(params: ParamSet) -> str:
    """Algorithm whose defaults match this ParamSet's keys (used for net_list checks)."""
    from ..zoo.registry import ALGORITHMS
    alg_keys = set(params.alg_params) - set(RESERVED_ALG_KEYS)
    learn_keys = set(params.learn_params)
    matches = [name for name, cls in ALGORITHMS.items()
               if set(cls.DEFAULTS) == alg_keys and set(COMMON_LEARN) | set(cls.LEARN_DEFAULTS) == learn_keys]
    n_nets = len(params.alg_params.get("net_list") or [])
    matches.sort(key=lambda name: len(policy_adaptor(get_nature(name), params.alg_params["action_space"]).slots) != n_nets)
    if not matches:
        raise UnknownKey("cannot infer the algorithm for this ParamSet; pass alg_name")
    return matches[0]


def describe_net_list(nets) -> list[dict]:
    return [{"class": type(n).__name__, "parameters": int(n.num_parameters())} for n in nets]


def params_to_json(params: ParamSet, alg_name: str, env) -> str:
    """JSON document mirroring the two dictionaries (``net_list`` is summarised, not stored)."""
    alg = {k: v for k, v in params.alg_params.items() if k not in ("observation_space", "action_space", "net_list")}
    doc = {
        "alg": alg_name,
        "env": {"name": env.name, "env_type": env.env_type},
        "spaces": {"observation": params.alg_params["observation_space"].describe(),
                   "action": params.alg_params["action_space"].describe()},
        "alg_params": alg,
        "learn_params": dict(params.learn_params),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def params_from_json(text: str) -> tuple[str, object, ParamSet]:
    """Rebuild ``(alg_name, env, ParamSet)`` from a config document."""
    doc = json.loads(text)
    alg_params = doc.get("alg_params", {})
    if "net_list" in alg_params:
        raise UnknownKey("net_list cannot be set from a config file; set it programmatically")
    env = build_env(doc["env"]["name"], doc["env"]["env_type"])
    if "spaces" in doc:
        obs = space_from_description(doc["spaces"]["observation"])
        act = space_from_description(doc["spaces"]["action"])
        if obs != env.observation_space or act != env.action_space:
            raise ValueError("config spaces do not match the environment")
    seed = alg_params.get("seed", 0)
    base = call_default_params(env, doc["env"]["env_type"], doc["alg"], seed=seed)
    overrides = {f"alg.{k}": v for k, v in alg_params.items()}
    overrides.update({f"learn.{k}": v for k, v in doc.get("learn_params", {}).items()})
    return doc["alg"], env, override_params(base, overrides, doc["alg"])


def is_network_list(nets) -> bool:
    return isinstance(nets, (list, tuple)) and all(isinstance(n, Network) for n in nets)
