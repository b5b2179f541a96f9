"""
Noise - Pauli channels, SCEM and the multi-channel trapped-ion model
"""

from noise.channels import ChannelKind, NoiseChannel, idle_dephase_prob
from noise.models import (
    MultiChannelModel,
    MultiChannelParams,
    NoiseModel,
    ScemModel,
    ScemParams,
    load_noise_parameters,
    multichannel_attach,
    scem_attach,
)

__all__ = [
    "ChannelKind",
    "MultiChannelModel",
    "MultiChannelParams",
    "NoiseChannel",
    "NoiseModel",
    "ScemModel",
    "ScemParams",
    "idle_dephase_prob",
    "load_noise_parameters",
    "multichannel_attach",
    "scem_attach",
]
