"""Automatic agent construction.

Three adaptors run in sequence.  The observation adaptor turns the
observation space into an encoder spec.  The policy adaptor turns the
algorithm's nature plus the action space into output heads and critics.  The
action adaptor turns a stochastic head into a distribution over environment
actions; deterministic and value-based heads get an exploration wrapper
instead.  Swapping the environment only changes the inferred specs, so callers
never edit networks by hand.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .envs.spaces import Box, DictSpace, Discrete, Space
from .ndiff.rng import seeded_rng
from .nets.distributions import Categorical, DiagGaussian, squash_to_box
from .nets.networks import CNN, MLP, HeadNet, MultiHead, Network, QCritic, to_input


class ConstructionError(ValueError):
    pass


class UnsupportedObservation(ConstructionError):
    pass


class IncompatibleAlgorithm(ConstructionError):
    pass


class UnknownAlgorithm(ConstructionError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NetListShapeMismatch(ConstructionError):
    pass


@dataclass(frozen=True)
class AlgorithmNature:
    name: str
    policy_kind: str  # stochastic | deterministic | value_based
    action_support: frozenset
    on_policy: bool
    n_critics: int = 0

    def __post_init__(self):
        if self.policy_kind == "value_based" and self.action_support != {"discrete"}:
            raise ValueError(f"{self.name}: value-based algorithms are discrete-only")
        if self.policy_kind == "deterministic" and self.action_support != {"continuous"}:
            raise ValueError(f"{self.name}: deterministic algorithms are continuous-only")


_D, _C = frozenset({"discrete"}), frozenset({"continuous"})
_BOTH = _D | _C

NATURES: dict[str, AlgorithmNature] = {
    "DQN": AlgorithmNature("DQN", "value_based", _D, False),
    "DoubleDQN": AlgorithmNature("DoubleDQN", "value_based", _D, False),
    "DuelingDQN": AlgorithmNature("DuelingDQN", "value_based", _D, False),
    "PrioritizedDQN": AlgorithmNature("PrioritizedDQN", "value_based", _D, False),
    "VPG": AlgorithmNature("VPG", "stochastic", _BOTH, True, 1),
    "A2C": AlgorithmNature("A2C", "stochastic", _BOTH, True, 1),
    "PPO": AlgorithmNature("PPO", "stochastic", _BOTH, True, 1),
    "DPPO": AlgorithmNature("DPPO", "stochastic", _BOTH, True, 1),
    "DDPG": AlgorithmNature("DDPG", "deterministic", _C, False, 1),
    "TD3": AlgorithmNature("TD3", "deterministic", _C, False, 2),
    "SAC": AlgorithmNature("SAC", "stochastic", _BOTH, False, 2),
}


def get_nature(alg_name: str) -> AlgorithmNature:
    try:
        return NATURES[alg_name]
    except KeyError:
        raise UnknownAlgorithm(
            f"unknown algorithm {alg_name!r}; available: {', '.join(NATURES)}") from None


def action_kind(space: Space) -> str:
    if isinstance(space, Discrete):
        return "discrete"
    if isinstance(space, Box) and len(space.shape) == 1 and space.bounded:
        return "continuous"
    raise IncompatibleAlgorithm(f"unsupported action space {space!r}")


# ---- adaptor 1: observation -> encoder spec ----

@dataclass
class NetworkSpec:
    kind: str  # MLP | CNN | MultiHead
    input_shape: tuple = ()
    hidden: tuple = (64, 64)
    activation: str = "tanh"
    heads: OrderedDict = field(default_factory=OrderedDict)
    fusion_width: int = 64
    space: Space | None = None

    def build(self, rng) -> Network:
        if self.kind == "MLP":
            return MLP(self.input_shape[0], self.hidden, self.activation, rng)
        if self.kind == "CNN":
            return CNN(self.input_shape, rng)
        if self.kind == "MultiHead":
            return MultiHead(self.space, self.hidden, self.activation, rng, self.fusion_width)
        raise ConstructionError(f"unknown network kind {self.kind!r}")


def observation_adaptor(space: Space, hidden=(64, 64), activation: str = "tanh") -> NetworkSpec:
    """MLP for vectors, CNN for images, multi-head for dictionaries."""
    if isinstance(space, Box):
        if len(space.shape) == 1:
            return NetworkSpec("MLP", space.shape, tuple(hidden), activation, space=space)
        if len(space.shape) == 3:
            return NetworkSpec("CNN", space.shape, tuple(hidden), activation, space=space)
        raise UnsupportedObservation(f"Box observations of rank {len(space.shape)} are not supported")
    if isinstance(space, DictSpace):
        heads = OrderedDict()
        for key, sub in space.entries.items():
            try:
                heads[key] = observation_adaptor(sub, hidden, activation)
            except UnsupportedObservation as err:
                raise UnsupportedObservation(f"dictionary entry {key!r}: {err}") from None
            if heads[key].kind == "MultiHead":
                raise UnsupportedObservation(f"nested dictionary entry {key!r}")
        return NetworkSpec("MultiHead", (), tuple(hidden), activation, heads, space=space)
    raise UnsupportedObservation(f"observation space {space!r} is not supported")


# ---- adaptor 2: algorithm nature + action space -> heads ----

@dataclass
class HeadSpec:
    policy_slot: str
    policy_kind: str  # q | dueling_q | categorical | gaussian | deterministic
    policy_width: int
    critic_slots: tuple = ()
    critic_kind: str | None = None  # v | q_sa | q_table
    critic_width: int = 1
    action: str = "discrete"

    @property
    def slots(self) -> tuple:
        return (self.policy_slot,) + tuple(self.critic_slots)


def policy_adaptor(nature: AlgorithmNature, action_space: Space, dueling: bool = False) -> HeadSpec:
    kind = action_kind(action_space)
    if kind not in nature.action_support:
        raise IncompatibleAlgorithm(
            f"{nature.name} supports {'/'.join(sorted(nature.action_support))} actions "
            f"but the environment has {kind} actions ({action_space!r})")
    n = action_space.n if kind == "discrete" else int(action_space.shape[0])

    if nature.policy_kind == "value_based":
        return HeadSpec("q", "dueling_q" if dueling else "q", n, action=kind)
    if nature.policy_kind == "deterministic":
        critics = ("critic",) if nature.n_critics == 1 else tuple(f"critic{i + 1}" for i in range(nature.n_critics))
        return HeadSpec("actor", "deterministic", n, critics, "q_sa", 1, action=kind)
    # stochastic
    policy_kind = "categorical" if kind == "discrete" else "gaussian"
    width = n if kind == "discrete" else 2 * n
    if nature.on_policy:
        return HeadSpec("policy", policy_kind, width, ("value",), "v", 1, action=kind)
    critic_kind, critic_width = ("q_table", n) if kind == "discrete" else ("q_sa", 1)
    critics = tuple(f"critic{i + 1}" for i in range(nature.n_critics))
    return HeadSpec("policy", policy_kind, width, critics, critic_kind, critic_width, action=kind)


# ---- adaptor 3: head -> action distribution / exploration ----

class CategoricalActions:
    stochastic = True

    def __init__(self, space: Discrete):
        self.space = space

    def dist(self, head_out) -> Categorical:
        return Categorical(head_out)

    def to_env(self, action):
        return int(np.asarray(action).reshape(-1)[0])


class GaussianActions:
    """Diagonal Gaussian over actions.

    With ``squash`` the sample is tanh-squashed into [-1, 1] (and later scaled
    to the box); otherwise raw samples are clipped to the box bounds.
    """

    stochastic = True

    def __init__(self, space: Box, squash: bool = False):
        self.space = space
        self.squash = squash
        self.center = (space.high + space.low) / 2.0
        self.half = (space.high - space.low) / 2.0

    def dist(self, head_out) -> DiagGaussian:
        return DiagGaussian.from_params(head_out)

    def squash_sample(self, raw):
        unit = Box(-1.0, 1.0, self.space.shape)
        return squash_to_box(raw, unit)

    def to_env(self, action):
        a = np.asarray(action, dtype=np.float32).reshape(self.space.shape)
        if self.squash:
            return (self.center + self.half * a).astype(np.float32)
        return self.space.clip(a)


class DeterministicActions:
    """Pass-through for tanh actor outputs with Gaussian exploration noise.

    Actor outputs live in [-1, 1]; ``noise_fraction`` of the action range is the
    exploration standard deviation in environment units.
    """

    stochastic = False

    def __init__(self, space: Box, noise_fraction: float = 0.1):
        self.space = space
        self.center = (space.high + space.low) / 2.0
        self.half = (space.high - space.low) / 2.0
        self.noise_fraction = noise_fraction

    @property
    def unit_noise_std(self) -> float:
        # noise_fraction * (high - low) expressed in [-1, 1] units
        return 2.0 * self.noise_fraction

    def explore(self, action, rng) -> np.ndarray:
        a = np.asarray(action, dtype=np.float32)
        noise = rng.normal(0.0, self.unit_noise_std, size=a.shape).astype(np.float32)
        return np.clip(a + noise, -1.0, 1.0)

    def to_env(self, action):
        a = np.asarray(action, dtype=np.float32).reshape(self.space.shape)
        return (self.center + self.half * a).astype(np.float32)


class EpsilonGreedy:
    stochastic = False

    def __init__(self, space: Discrete):
        self.space = space

    def select(self, q_values: np.ndarray, epsilon: float, rng) -> int:
        if rng.uniform() < epsilon:
            return int(rng.integers(self.space.n))
        return int(np.argmax(q_values))

    def to_env(self, action):
        return int(np.asarray(action).reshape(-1)[0])


def action_adaptor(head: HeadSpec, action_space: Space, squash: bool = False):
    if head.policy_kind == "categorical":
        return CategoricalActions(action_space)
    if head.policy_kind == "gaussian":
        return GaussianActions(action_space, squash=squash)
    if head.policy_kind == "deterministic":
        return DeterministicActions(action_space)
    return EpsilonGreedy(action_space)


# ---- assembly ----

@dataclass
class AgentGraph:
    nature: AlgorithmNature
    observation_space: Space
    action_space: Space
    obs_spec: NetworkSpec
    head: HeadSpec
    actions: object
    nets: OrderedDict

    @property
    def net_list(self) -> list[Network]:
        return list(self.nets.values())

    @property
    def encoders(self) -> list[Network]:
        return [n.encoder for n in self.nets.values() if hasattr(n, "encoder")]

    @property
    def policy(self) -> Network:
        return self.nets[self.head.policy_slot]

    @property
    def critics(self) -> list[Network]:
        return [self.nets[s] for s in self.head.critic_slots]


def _policy_network(slot, head: HeadSpec, obs_spec: NetworkSpec, seed: int) -> Network:
    rng = seeded_rng(seed, f"init/{slot}")
    encoder = obs_spec.build(rng)
    if head.policy_kind == "q":
        return HeadNet(encoder, head.policy_width, "linear", rng)
    if head.policy_kind == "dueling_q":
        return HeadNet(encoder, head.policy_width, "dueling", rng)
    if head.policy_kind == "deterministic":
        return HeadNet(encoder, head.policy_width, "tanh", rng)
    # small initial policy outputs: near-uniform logits, near-zero means
    return HeadNet(encoder, head.policy_width, "linear", rng, init_scale=0.01)


def _critic_network(slot, head: HeadSpec, obs_spec: NetworkSpec, action_space: Space, seed: int) -> Network:
    rng = seeded_rng(seed, f"init/{slot}")
    encoder = obs_spec.build(rng)
    if head.critic_kind == "q_sa":
        return QCritic(encoder, int(action_space.shape[0]), rng=rng)
    return HeadNet(encoder, head.critic_width, "linear", rng)


def default_networks(nature: AlgorithmNature, observation_space: Space, action_space: Space,
                     hidden=None, activation=None, dueling: bool = False, seed: int = 0) -> list[Network]:
    """Adaptor-generated networks, in slot order."""
    hidden, activation = _net_defaults(nature, hidden, activation)
    obs_spec = observation_adaptor(observation_space, hidden, activation)
    head = policy_adaptor(nature, action_space, dueling)
    nets = [_policy_network(head.policy_slot, head, obs_spec, seed)]
    nets += [_critic_network(s, head, obs_spec, action_space, seed) for s in head.critic_slots]
    return nets


def _net_defaults(nature, hidden, activation):
    if hidden is None:
        hidden = (64, 64)
    if activation is None:
        activation = "tanh" if nature.on_policy else "relu"
    return tuple(hidden), activation


def _probe_batch(space: Space, n: int = 2):
    rng = np.random.default_rng(12345)
    samples = [space.sample(rng) for _ in range(n)]
    if isinstance(space, DictSpace):
        return OrderedDict((k, np.stack([s[k] for s in samples]).astype(np.float32)) for k in space.keys())
    if isinstance(space, Discrete):
        return np.asarray(samples, dtype=np.int64)
    return np.stack(samples).astype(np.float32)


def check_network(slot: str, net, expected_width: int, observation_space: Space,
                  action_space: Space | None = None) -> None:
    """Run one probe batch through ``net``; raise NetListShapeMismatch on disagreement."""
    if not isinstance(net, Network):
        raise NetListShapeMismatch(f"net_list entry {slot!r} is {type(net).__name__}, not a Network")
    obs = to_input(_probe_batch(observation_space))
    try:
        if action_space is not None:
            if not getattr(net, "takes_action", False):
                raise NetListShapeMismatch(f"net_list entry {slot!r} must take (observation, action)")
            act = np.clip(_probe_batch(action_space), -1.0, 1.0)
            out = net(obs, act)
        else:
            out = net(obs)
    except NetListShapeMismatch:
        raise
    except Exception as err:  # any shape failure inside a user network
        raise NetListShapeMismatch(f"net_list entry {slot!r} cannot consume the inferred input: {err}") from None
    if out.ndim != 2 or out.shape != (2, expected_width):
        raise NetListShapeMismatch(
            f"net_list entry {slot!r} outputs shape {tuple(out.shape[1:])} per sample, "
            f"expected ({expected_width},)")


def construct_graph(observation_space: Space, action_space: Space, alg_name: str, net_list=None,
                    hidden=None, activation=None, dueling: bool = False, seed: int = 0,
                    squash: bool | None = None) -> AgentGraph:
    nature = get_nature(alg_name)
    hidden, activation = _net_defaults(nature, hidden, activation)
    obs_spec = observation_adaptor(observation_space, hidden, activation)
    head = policy_adaptor(nature, action_space, dueling)
    if squash is None:
        squash = alg_name == "SAC"
    actions = action_adaptor(head, action_space, squash=squash)

    if net_list is None:
        nets = default_networks(nature, observation_space, action_space, hidden, activation, dueling, seed)
    else:
        nets = list(net_list)
        if len(nets) != len(head.slots):
            raise NetListShapeMismatch(
                f"{alg_name} expects {len(head.slots)} networks {list(head.slots)}, got {len(nets)}")
    check_network(head.policy_slot, nets[0], head.policy_width, observation_space)
    for slot, net in zip(head.critic_slots, nets[1:]):
        check_network(slot, net, head.critic_width, observation_space,
                      action_space if head.critic_kind == "q_sa" else None)
    seen = set()
    for net in nets:
        if id(net) in seen:
            raise NetListShapeMismatch("the same network object appears twice in net_list")
        seen.add(id(net))
    return AgentGraph(nature, observation_space, action_space, obs_spec, head, actions,
                      OrderedDict(zip(head.slots, nets)))


def construct_agent(env, alg_name: str, alg_params: dict | None = None) -> AgentGraph:
    """Run the three adaptors against ``env`` and assemble an AgentGraph."""
    p = dict(alg_params or {})
    return construct_graph(env.observation_space, env.action_space, alg_name,
                           net_list=p.get("net_list"), hidden=p.get("hidden"),
                           activation=p.get("activation"), dueling=p.get("dueling", alg_name == "DuelingDQN"),
                           seed=p.get("seed", 0))
