"""Maximum output p-norms of quantum channels and their (non-)multiplicativity."""

__version__ = "0.1.0"

from .channels import (  # noqa: E402
    ChannelDescriptor,
    KrausChannel,
    RandomUnitaryChannel,
    conjugate,
    identity_channel,
    random_unitary_channel,
    tensor,
    werner_holevo,
    weyl_channel,
)
from .optimize import OptimizerConfig, certify_epsilon, maximize_output_pnorm  # noqa: E402
from .rng import SeededRng  # noqa: E402

__all__ = [
    "ChannelDescriptor",
    "KrausChannel",
    "OptimizerConfig",
    "RandomUnitaryChannel",
    "SeededRng",
    "certify_epsilon",
    "conjugate",
    "identity_channel",
    "maximize_output_pnorm",
    "random_unitary_channel",
    "tensor",
    "werner_holevo",
    "weyl_channel",
]
