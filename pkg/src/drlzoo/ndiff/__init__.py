"""Small float32 tensor engine with reverse-mode autodiff."""

from . import ops
from .gradcheck import finite_diff_check
from .ops import apply_primitive
from .optim import SGD, Adam, Optimizer, clip_grad_norm, optimizer_step
from .rng import derive_seed, seeded_rng
from .serialize import pack_tensors, tensor_deserialize, tensor_serialize, unpack_tensors
from .tensor import (
    MissingGrad,
    NdiffError,
    NonFinite,
    NotScalar,
    ShapeMismatch,
    Tensor,
    TruncatedBuffer,
    as_tensor,
    backward,
    float64_mode,
    no_grad,
    tape,
)

__all__ = [
    "Adam", "MissingGrad", "NdiffError", "NonFinite", "NotScalar", "Optimizer", "SGD",
    "ShapeMismatch", "Tensor", "TruncatedBuffer", "apply_primitive", "as_tensor", "backward",
    "clip_grad_norm", "derive_seed", "finite_diff_check", "float64_mode", "no_grad", "ops",
    "optimizer_step", "pack_tensors", "seeded_rng", "tape", "tensor_deserialize",
    "tensor_serialize", "unpack_tensors",
]
