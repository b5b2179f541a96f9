"""
Circuit instructions
--------------------
Everything a node circuit can contain besides unitary ``CliffordAction``s:
resets, measurements, noise sites, idle markers, layer ticks, detector
declarations and noiseless classically-controlled frame updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Union

from engine.gates import CliffordAction

if TYPE_CHECKING:
    from circuits.corrections import CorrectionRule
    from noise.channels import NoiseChannel


def _basis(value: str) -> str:
    value = str(value).upper()
    if value not in ("X", "Z"):
        raise ValueError(f"❌ Basis must be 'X' or 'Z', got '{value}'")
    return value


@dataclass(frozen=True)
class Reset:
    """Prepare ``qubit`` in |0⟩ (basis Z) or |+⟩ (basis X)."""

    qubit: int
    basis: str = "Z"

    def __post_init__(self):
        object.__setattr__(self, "basis", _basis(self.basis))

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Measure:
    """
    Destructive single-qubit measurement appending one record bit.

    ``random`` declares the noiseless outcome as random (e.g. the first
    X-check round on |0…0⟩); every other outcome must be deterministic-zero
    relative to the noiseless reference.  ``noise`` is the classical
    readout-flip channel attached by a noise model.
    """

    qubit:  int
    basis:  str
    label:  str
    random: bool = False
    noise:  "NoiseChannel | None" = None

    def __post_init__(self):
        object.__setattr__(self, "basis", _basis(self.basis))

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Noise:
    """A channel attachment site."""

    channel: "NoiseChannel"

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.channel.qubits


@dataclass(frozen=True)
class Idle:
    """Qubits waiting through one layer; ``duration`` is resolved by a schedule (seconds)."""

    qubits:   tuple[int, ...]
    duration: float | None = None


@dataclass(frozen=True)
class Tick:
    """Layer boundary."""

    qubits: tuple[int, ...] = ()


@dataclass(frozen=True)
class Detector:
    """Parity of record labels that is deterministic in the absence of noise."""

    labels: tuple[str, ...]
    name:   str = ""
    qubits: tuple[int, ...] = ()


@dataclass(frozen=True)
class FrameUpdate:
    """Noiseless Pauli applied to the frame as a function of the record (decoder output)."""

    rules:  tuple["CorrectionRule", ...] = field(default_factory=tuple)
    name:   str = ""
    qubits: tuple[int, ...] = ()

    @property
    def labels(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for rule in self.rules:
            for label in rule.labels:
                seen.setdefault(label)
        return tuple(seen)


Instruction = Union[CliffordAction, Reset, Measure, Noise, Idle, Tick, Detector, FrameUpdate]


def describe(instruction: Any) -> str:
    """One-line human readable form (used in logs and validation reports)."""
    if isinstance(instruction, CliffordAction):
        return str(instruction)
    if isinstance(instruction, Reset):
        return f"R{'X' if instruction.basis == 'X' else ''} {instruction.qubit}"
    if isinstance(instruction, Measure):
        return f"M{'X' if instruction.basis == 'X' else ''} {instruction.qubit} -> {instruction.label}"
    if isinstance(instruction, Noise):
        return f"NOISE {instruction.channel}"
    if isinstance(instruction, Idle):
        return f"IDLE {' '.join(map(str, instruction.qubits))}"
    if isinstance(instruction, Tick):
        return "TICK"
    if isinstance(instruction, Detector):
        return f"DETECTOR {' '.join(instruction.labels)}"
    if isinstance(instruction, FrameUpdate):
        return f"FRAME_UPDATE {instruction.name}"
    return repr(instruction)
