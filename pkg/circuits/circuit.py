"""
Circuits
--------
A ``Circuit`` is a flat instruction list over ``n_qubits`` qubits.  Gadget
generators build them layer by layer with ``CircuitBuilder``, which emits an
``Idle`` marker for every live qubit a layer leaves untouched and closes each
layer with a ``Tick``.  Depth is the number of ticked layers that contain a
reset, gate or measurement.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

from circuits.instructions import (
    Detector,
    FrameUpdate,
    Idle,
    Instruction,
    Measure,
    Noise,
    Reset,
    Tick,
    describe,
)
from engine.gates import CliffordAction, GateKind

logger = logging.getLogger(__name__)

_OPERATIONS = (CliffordAction, Reset, Measure)


@dataclass
class Circuit:
    """Instruction list plus the flags set by noise attachment."""

    n_qubits:     int
    instructions: list[Instruction] = field(default_factory=list)
    name:         str = ""
    noiseless:    bool = False
    noise_tag:    str | None = None

    def __post_init__(self):
        self.check(known_labels=None)

    # ──────────────────────────────────────────────────────────────────────
    # VALIDATION
    # ──────────────────────────────────────────────────────────────────────

    def check(self, known_labels: Iterable[str] | None = ()) -> None:
        """
        Operands in range and labels unique; with ``known_labels`` (ancestor
        labels, possibly empty) detectors and updates must refer to earlier labels.
        """
        resolve = known_labels is not None
        seen    = set(known_labels or ())
        for index, ins in enumerate(self.instructions):
            for q in getattr(ins, "qubits", ()):
                if not 0 <= q < self.n_qubits:
                    raise ValueError(
                        f"❌ Circuit '{self.name}' instruction {index} ({describe(ins)}) "
                        f"uses qubit {q} outside [0, {self.n_qubits})"
                    )
            if isinstance(ins, Measure):
                if ins.label in seen:
                    raise ValueError(f"❌ Circuit '{self.name}' repeats measurement label '{ins.label}'")
                seen.add(ins.label)
            elif resolve and isinstance(ins, (Detector, FrameUpdate)):
                missing = [label for label in ins.labels if label not in seen]
                if missing:
                    raise ValueError(
                        f"❌ Circuit '{self.name}' instruction {index} ({describe(ins)}) "
                        f"references unknown or later measurements {missing}"
                    )

    # ──────────────────────────────────────────────────────────────────────
    # VIEWS
    # ──────────────────────────────────────────────────────────────────────

    @property
    def measurements(self) -> list[Measure]:
        return [ins for ins in self.instructions if isinstance(ins, Measure)]

    @property
    def labels(self) -> list[str]:
        return [m.label for m in self.measurements]

    @property
    def has_noise(self) -> bool:
        return any(isinstance(ins, Noise) or (isinstance(ins, Measure) and ins.noise) for ins in self.instructions)

    def layers(self) -> list[list[Instruction]]:
        """Instructions grouped by ``Tick``; a trailing unticked group is its own layer."""
        layers, current = [], []
        for ins in self.instructions:
            if isinstance(ins, Tick):
                layers.append(current)
                current = []
            else:
                current.append(ins)
        if current:
            layers.append(current)
        return layers

    @property
    def depth(self) -> int:
        return sum(1 for layer in self.layers() if any(isinstance(ins, _OPERATIONS) for ins in layer))

    def count(self, *kinds: GateKind) -> int:
        return sum(1 for ins in self.instructions if isinstance(ins, CliffordAction) and ins.kind in kinds)

    def qubits_used(self) -> set[int]:
        used = set()
        for ins in self.instructions:
            if isinstance(ins, _OPERATIONS):
                used.update(ins.qubits)
        return used

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def __len__(self) -> int:
        return len(self.instructions)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(
            n_qubits     = max(self.n_qubits, other.n_qubits),
            instructions = self.instructions + other.instructions,
            name         = f"{self.name}+{other.name}".strip("+"),
            noiseless    = self.noiseless and other.noiseless,
            noise_tag    = self.noise_tag or other.noise_tag,
        )

    def with_instructions(self, instructions: list[Instruction], **changes) -> "Circuit":
        return replace(self, instructions=list(instructions), **changes)

    def __str__(self) -> str:
        return "\n".join(describe(ins) for ins in self.instructions)


class CircuitBuilder:
    """
    Layer-by-layer circuit construction.

    ``live`` qubits hold state: they receive an ``Idle`` marker in every layer
    that does not act on them.  Resets make a qubit live, measurements retire it.
    """

    def __init__(self, n_qubits: int, *, live: Iterable[int] = (), name: str = "", noiseless: bool = False):
        self.n_qubits     = n_qubits
        self.name         = name
        self.noiseless    = noiseless
        self.live         = set(live)
        self.instructions: list[Instruction] = []

    # ──────────────────────────────────────────────────────────────────────
    # OPERATION CONSTRUCTORS
    # ──────────────────────────────────────────────────────────────────────

    @staticmethod
    def gate(kind: GateKind | str, *qubits: int) -> CliffordAction:
        return CliffordAction(GateKind(kind), qubits)

    @staticmethod
    def cnot(control: int, target: int) -> CliffordAction:
        return CliffordAction(GateKind.CNOT, (control, target))

    # ──────────────────────────────────────────────────────────────────────
    # LAYERS
    # ──────────────────────────────────────────────────────────────────────

    def layer(self, *operations) -> "CircuitBuilder":
        """Append one time step; no qubit may be used twice within it."""
        ops = [op for op in operations if op is not None]
        if not ops:
            return self
        touched: set[int] = set()
        for op in ops:
            if not isinstance(op, _OPERATIONS):
                raise ValueError(f"❌ Layer accepts gates, resets and measurements, got {op!r}")
            clash = touched & set(op.qubits)
            if clash:
                raise ValueError(f"❌ Layer of '{self.name}' uses qubit(s) {sorted(clash)} twice")
            touched.update(op.qubits)

        self.instructions.extend(ops)
        idle = sorted(self.live - touched)
        if idle:
            self.instructions.append(Idle(tuple(idle)))
        self.instructions.append(Tick(tuple(sorted(touched))))

        for op in ops:
            if isinstance(op, Reset):
                self.live.add(op.qubit)
            elif isinstance(op, Measure):
                self.live.discard(op.qubit)
        return self

    def layers(self, *layers: Iterable) -> "CircuitBuilder":
        for ops in layers:
            self.layer(*ops)
        return self

    def add(self, *instructions: Instruction) -> "CircuitBuilder":
        """Zero-duration classical instructions (detectors, frame updates)."""
        self.instructions.extend(instructions)
        return self

    def extend(self, circuit: Circuit) -> "CircuitBuilder":
        self.instructions.extend(circuit.instructions)
        return self

    def build(self) -> Circuit:
        circuit = Circuit(self.n_qubits, list(self.instructions), self.name, self.noiseless)
        logger.debug(f"🔧 Built circuit '{self.name}': {len(circuit)} instructions, depth {circuit.depth}")
        return circuit
