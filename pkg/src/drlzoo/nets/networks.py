"""Network builders.

A ``Network`` owns an ordered set of named parameter tensors and maps a batch
of inputs to a batch of outputs.  Parameter names follow ``<layer>/<param>``;
agents prefix them with the network's slot to get ``<scope>/<layer>/<param>``.
"""

from __future__ import annotations

import copy
import math
from collections import OrderedDict

import numpy as np

from ..envs.spaces import Box, DictSpace, Space
from ..ndiff import ops
from ..ndiff.tensor import Tensor


class BadSpec(ValueError):
    pass


class ImageTooSmall(BadSpec):
    pass


class UnsupportedEntry(BadSpec):
    pass


ACTIVATIONS = {"tanh": ops.tanh, "relu": ops.relu}

FEATURE_WIDTH = 64


def glorot(rng, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


def to_input(x):
    """Batch input as a Tensor (or an ordered dict of Tensors)."""
    if isinstance(x, dict):
        return OrderedDict((k, to_input(v)) for k, v in x.items())
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float32))


class Network:
    takes_action = False
    output_dim: int

    def named_parameters(self) -> OrderedDict:
        raise NotImplementedError

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())

    def forward(self, x):
        raise NotImplementedError

    def __call__(self, *inputs):
        return self.forward(*inputs)

    def clone(self) -> "Network":
        """Independent copy with identical parameter values and no gradients."""
        twin = copy.deepcopy(self)
        for p in twin.parameters():
            p.grad = None
        return twin

    def load_values(self, other: "Network") -> None:
        for (name, dst), src in zip(self.named_parameters().items(), other.parameters()):
            if dst.shape != src.shape:
                raise BadSpec(f"cannot copy {name}: {src.shape} into {dst.shape}")
            dst.data[...] = src.data

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())


def _prefixed(prefix: str, params: OrderedDict) -> OrderedDict:
    return OrderedDict((f"{prefix}/{k}", v) for k, v in params.items())


class Dense(Network):
    def __init__(self, in_dim: int, out_dim: int, rng, init_scale: float = 1.0):
        self.W = Tensor(glorot(rng, in_dim, out_dim, (in_dim, out_dim)) * init_scale, requires_grad=True)
        self.b = Tensor(np.zeros(out_dim, dtype=np.float32), requires_grad=True)
        self.input_dim = in_dim
        self.output_dim = out_dim

    def named_parameters(self):
        return OrderedDict([("W", self.W), ("b", self.b)])

    def forward(self, x):
        return ops.matmul(to_input(x), self.W) + self.b


class Conv(Network):
    def __init__(self, in_ch: int, out_ch: int, kernel: int, stride: int, pad: int, rng):
        fan = kernel * kernel
        self.K = Tensor(glorot(rng, fan * in_ch, fan * out_ch, (kernel, kernel, in_ch, out_ch)),
                        requires_grad=True)
        self.b = Tensor(np.zeros(out_ch, dtype=np.float32), requires_grad=True)
        self.stride, self.pad = stride, pad
        self.output_dim = out_ch

    def named_parameters(self):
        return OrderedDict([("K", self.K), ("b", self.b)])

    def out_size(self, n: int) -> int:
        k = self.K.shape[0]
        return (n + 2 * self.pad - k) // self.stride + 1

    def forward(self, x):
        x = ops.pad2d(to_input(x), self.pad)
        return ops.conv2d(x, self.K, stride=self.stride) + self.b


class MLP(Network):
    """Fully connected stack; the activation follows every hidden layer."""

    def __init__(self, input_dim: int, hidden, activation: str = "tanh", rng=None):
        hidden = list(hidden)
        if not hidden:
            raise BadSpec("MLP needs at least one hidden layer")
        if input_dim < 1 or any(h < 1 for h in hidden):
            raise BadSpec(f"MLP dimensions must be positive: {input_dim} -> {hidden}")
        if activation not in ACTIVATIONS:
            raise BadSpec(f"unknown activation {activation!r}")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.input_dim = input_dim
        self.hidden = hidden
        self.activation = activation
        self.layers = []
        prev = input_dim
        for h in hidden:
            self.layers.append(Dense(prev, h, rng))
            prev = h
        self.output_dim = prev

    def named_parameters(self):
        out = OrderedDict()
        for i, layer in enumerate(self.layers):
            out.update(_prefixed(f"dense{i}", layer.named_parameters()))
        return out

    def forward(self, x):
        act = ACTIVATIONS[self.activation]
        h = to_input(x)
        if h.ndim > 2:
            h = ops.flatten(h)
        for layer in self.layers:
            h = act(layer(h))
        return h


class CNN(Network):
    """conv 3x3x16 s1 -> relu -> conv 3x3x32 s2 -> relu -> flatten -> dense 64 -> relu.

    Both convolutions zero-pad by one pixel, so 4x4 images are the smallest
    accepted input.
    """

    def __init__(self, input_shape, rng=None, activation: str = "relu"):
        if len(input_shape) != 3:
            raise BadSpec(f"CNN expects HxWxC input, got {tuple(input_shape)}")
        h, w, c = (int(v) for v in input_shape)
        if h < 4 or w < 4:
            raise ImageTooSmall(f"image {h}x{w} is smaller than the 4x4 minimum")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.input_shape = (h, w, c)
        self.activation = activation
        self.conv1 = Conv(c, 16, 3, 1, 1, rng)
        self.conv2 = Conv(16, 32, 3, 2, 1, rng)
        oh = self.conv2.out_size(self.conv1.out_size(h))
        ow = self.conv2.out_size(self.conv1.out_size(w))
        self.dense = Dense(oh * ow * 32, FEATURE_WIDTH, rng)
        self.output_dim = FEATURE_WIDTH

    def named_parameters(self):
        out = OrderedDict()
        out.update(_prefixed("conv0", self.conv1.named_parameters()))
        out.update(_prefixed("conv1", self.conv2.named_parameters()))
        out.update(_prefixed("dense0", self.dense.named_parameters()))
        return out

    def forward(self, x):
        h = ops.relu(self.conv1(x))
        h = ops.relu(self.conv2(h))
        return ACTIVATIONS[self.activation](self.dense(ops.flatten(h)))


def _entry_encoder(key, space: Space, hidden, activation, rng) -> Network:
    if not isinstance(space, Box):
        raise UnsupportedEntry(f"dictionary entry {key!r} is {space!r}; only Box entries are supported")
    if len(space.shape) == 1:
        return MLP(space.shape[0], hidden, activation, rng)
    if len(space.shape) == 3:
        return CNN(space.shape, rng)
    raise UnsupportedEntry(f"dictionary entry {key!r} has unsupported rank {len(space.shape)}")


class MultiHead(Network):
    """One sub-network per dictionary entry, concatenated and fused to width 64."""

    def __init__(self, space: DictSpace, hidden=(64, 64), activation: str = "relu", rng=None,
                 fusion_width: int = FEATURE_WIDTH):
        if not isinstance(space, DictSpace):
            raise BadSpec(f"MultiHead needs a DictSpace, got {space!r}")
        if fusion_width < 1:
            raise BadSpec("fusion width must be positive")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.keys = space.keys()
        self.activation = activation
        self.heads = OrderedDict((k, _entry_encoder(k, s, hidden, activation, rng))
                                 for k, s in space.entries.items())
        self.fusion = Dense(sum(h.output_dim for h in self.heads.values()), fusion_width, rng)
        self.output_dim = fusion_width

    def named_parameters(self):
        out = OrderedDict()
        for k, head in self.heads.items():
            out.update(_prefixed(k, head.named_parameters()))
        out.update(_prefixed("fusion", self.fusion.named_parameters()))
        return out

    def forward(self, x):
        if not isinstance(x, dict):
            raise BadSpec("MultiHead input must be a dict of batched arrays")
        feats = [head(x[k]) for k, head in self.heads.items()]
        return ACTIVATIONS[self.activation](self.fusion(ops.concat(feats, axis=-1)))


class HeadNet(Network):
    """Encoder followed by a linear output layer.

    ``kind`` selects the output transform: ``linear`` (Q values, logits, state
    value, Gaussian parameters), ``tanh`` (deterministic actions in [-1, 1]) or
    ``dueling`` (separate value and advantage streams).
    """

    def __init__(self, encoder: Network, out_dim: int, kind: str = "linear", rng=None,
                 init_scale: float = 1.0):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.encoder = encoder
        self.kind = kind
        self.output_dim = out_dim
        if kind == "dueling":
            self.value = Dense(encoder.output_dim, 1, rng)
            self.advantage = Dense(encoder.output_dim, out_dim, rng)
        elif kind in ("linear", "tanh"):
            self.head = Dense(encoder.output_dim, out_dim, rng, init_scale=init_scale)
        else:
            raise BadSpec(f"unknown head kind {kind!r}")

    def named_parameters(self):
        out = _prefixed("encoder", self.encoder.named_parameters())
        if self.kind == "dueling":
            out.update(_prefixed("value", self.value.named_parameters()))
            out.update(_prefixed("advantage", self.advantage.named_parameters()))
        else:
            out.update(_prefixed("head", self.head.named_parameters()))
        return out

    def forward(self, x):
        feat = self.encoder(x)
        if self.kind == "dueling":
            from ..zoo.losses import dueling_combine
            return dueling_combine(self.value(feat), self.advantage(feat))
        out = self.head(feat)
        return ops.tanh(out) if self.kind == "tanh" else out


class QCritic(Network):
    """Q(s, a) for continuous actions: encoder features joined with the action."""

    takes_action = True

    def __init__(self, encoder: Network, action_dim: int, hidden: int = FEATURE_WIDTH, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.encoder = encoder
        self.action_dim = action_dim
        self.joint = Dense(encoder.output_dim + action_dim, hidden, rng)
        self.head = Dense(hidden, 1, rng)
        self.output_dim = 1

    def named_parameters(self):
        out = _prefixed("encoder", self.encoder.named_parameters())
        out.update(_prefixed("joint", self.joint.named_parameters()))
        out.update(_prefixed("head", self.head.named_parameters()))
        return out

    def forward(self, obs, action):
        feat = self.encoder(obs)
        h = ops.relu(self.joint(ops.concat([feat, to_input(action)], axis=-1)))
        return self.head(h)


def build_mlp(input_dim: int, hidden, activation: str = "tanh", rng=None) -> MLP:
    return MLP(input_dim, hidden, activation, rng)


def build_cnn(input_shape, rng=None) -> CNN:
    return CNN(input_shape, rng)


def build_multihead(space: DictSpace, hidden=(64, 64), activation: str = "relu", rng=None) -> MultiHead:
    return MultiHead(space, hidden, activation, rng)


def build_linear(input_dim: int, output_dim: int, rng=None) -> Dense:
    """A single affine layer, e.g. a tabular-style Q function over one-hot inputs."""
    return Dense(input_dim, output_dim, rng if rng is not None else np.random.default_rng(0))
