from .distributions import (
    LOG_STD_MAX,
    LOG_STD_MIN,
    Categorical,
    DiagGaussian,
    categorical_eval,
    gaussian_eval,
    squash_to_box,
)
from .networks import (
    CNN,
    MLP,
    BadSpec,
    Dense,
    HeadNet,
    ImageTooSmall,
    MultiHead,
    Network,
    QCritic,
    UnsupportedEntry,
    build_cnn,
    build_linear,
    build_mlp,
    build_multihead,
    to_input,
)

__all__ = [
    "BadSpec", "CNN", "Categorical", "Dense", "DiagGaussian", "HeadNet", "ImageTooSmall",
    "LOG_STD_MAX", "LOG_STD_MIN", "MLP", "MultiHead", "Network", "QCritic", "UnsupportedEntry",
    "build_cnn", "build_linear", "build_mlp", "build_multihead", "categorical_eval",
    "gaussian_eval", "squash_to_box", "to_input",
]
