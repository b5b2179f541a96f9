"""
Frame engine - sparse Pauli-frame propagation with geometric noise sampling
"""

from engine.errors import (
    ConfigError,
    DecoderConsistencyError,
    InfeasibleScheduleError,
    PredicateError,
    QecSimError,
    ValidationFailure,
)
from engine.gates import CliffordAction, GateKind, conjugate_columns, inverse
from engine.pauli_frame import (
    MeasurementRecord,
    PauliFrame,
    apply_measurement,
    apply_reset,
    conjugate_frame,
)
from engine.sampling import BLOCK_SIZE, sample_noise_sites, sample_noise_sites_bernoulli, stream
from engine.shot_store import ShotStore, apply_channel

__all__ = [
    "BLOCK_SIZE",
    "CliffordAction",
    "ConfigError",
    "DecoderConsistencyError",
    "GateKind",
    "InfeasibleScheduleError",
    "MeasurementRecord",
    "PauliFrame",
    "PredicateError",
    "QecSimError",
    "ShotStore",
    "ValidationFailure",
    "apply_channel",
    "apply_measurement",
    "apply_reset",
    "conjugate_columns",
    "conjugate_frame",
    "inverse",
    "sample_noise_sites",
    "sample_noise_sites_bernoulli",
    "stream",
]
