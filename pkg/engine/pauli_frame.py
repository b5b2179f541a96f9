"""
Pauli frames
------------
Sparse single-shot Pauli frame and the per-frame operations of the engine:
conjugation, reset and measurement.

A frame maps qubit id → (x, z) bits; absent ids are identity and no (0, 0)
entry is ever stored.  Phases are discarded everywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from engine.gates import CliffordAction, conjugate_columns

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}
_TOKEN       = re.compile(r"^([IXYZ])(\d+)$")


class PauliFrame:
    """Phase-free sparse Pauli operator."""

    __slots__ = ("_components",)

    def __init__(self, components: Mapping[int, tuple[int, int]] | None = None):
        self._components: dict[int, tuple[int, int]] = {}
        for q, (x, z) in (components or {}).items():
            bits = (int(x) & 1, int(z) & 1)
            if bits != (0, 0):
                self._components[int(q)] = bits

    # ──────────────────────────────────────────────────────────────────────
    # CONSTRUCTORS
    # ──────────────────────────────────────────────────────────────────────

    @classmethod
    def from_string(cls, text: str) -> "PauliFrame":
        """Parse ``"X0 Z3 Y5"`` (repeated qubits multiply)."""
        frame = cls()
        for token in text.split():
            match = _TOKEN.match(token.strip())
            if not match:
                raise ValueError(f"❌ Cannot parse Pauli token '{token}'")
            letter, q = match.group(1), int(match.group(2))
            frame = frame * cls({q: _LETTER_BITS[letter]})
        return frame

    @classmethod
    def from_supports(cls, x_support: Iterable[int] = (), z_support: Iterable[int] = ()) -> "PauliFrame":
        comps: dict[int, list[int]] = {}
        for q in x_support:
            comps.setdefault(int(q), [0, 0])[0] ^= 1
        for q in z_support:
            comps.setdefault(int(q), [0, 0])[1] ^= 1
        return cls({q: tuple(b) for q, b in comps.items()})

    @classmethod
    def from_arrays(cls, x: np.ndarray, z: np.ndarray) -> "PauliFrame":
        qubits = np.flatnonzero(np.asarray(x, dtype=bool) | np.asarray(z, dtype=bool))
        return cls({int(q): (int(x[q]), int(z[q])) for q in qubits})

    # ──────────────────────────────────────────────────────────────────────
    # ACCESSORS
    # ──────────────────────────────────────────────────────────────────────

    @property
    def components(self) -> dict[int, tuple[int, int]]:
        return dict(self._components)

    def letter(self, q: int) -> str:
        return _BITS_LETTER[self._components.get(q, (0, 0))]

    @property
    def x_support(self) -> frozenset[int]:
        return frozenset(q for q, (x, _) in self._components.items() if x)

    @property
    def z_support(self) -> frozenset[int]:
        return frozenset(q for q, (_, z) in self._components.items() if z)

    @property
    def weight(self) -> int:
        return len(self._components)

    @property
    def is_identity(self) -> bool:
        return not self._components

    def restrict(self, qubits: Iterable[int]) -> "PauliFrame":
        keep = set(qubits)
        return PauliFrame({q: b for q, b in self._components.items() if q in keep})

    def to_arrays(self, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
        x = np.zeros(n_qubits, dtype=bool)
        z = np.zeros(n_qubits, dtype=bool)
        for q, (xb, zb) in self._components.items():
            if q >= n_qubits:
                raise ValueError(f"❌ Frame touches qubit {q} outside a {n_qubits}-qubit register")
            x[q], z[q] = xb, zb
        return x, z

    # ──────────────────────────────────────────────────────────────────────
    # ALGEBRA
    # ──────────────────────────────────────────────────────────────────────

    def __mul__(self, other: "PauliFrame") -> "PauliFrame":
        comps = dict(self._components)
        for q, (x, z) in other._components.items():
            ox, oz = comps.get(q, (0, 0))
            comps[q] = (ox ^ x, oz ^ z)
        return PauliFrame(comps)

    def anticommutes_with(self, other: "PauliFrame") -> bool:
        """Symplectic product parity (1 = anticommute)."""
        parity = 0
        for q, (x, z) in self._components.items():
            ox, oz = other._components.get(q, (0, 0))
            parity ^= (x & oz) ^ (z & ox)
        return bool(parity)

    def commutes_with(self, other: "PauliFrame") -> bool:
        return not self.anticommutes_with(other)

    # ──────────────────────────────────────────────────────────────────────
    # DUNDER
    # ──────────────────────────────────────────────────────────────────────

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PauliFrame) and self._components == other._components

    def __hash__(self) -> int:
        return hash(frozenset(self._components.items()))

    def __iter__(self) -> Iterator[tuple[int, tuple[int, int]]]:
        return iter(sorted(self._components.items()))

    def __len__(self) -> int:
        return len(self._components)

    def __str__(self) -> str:
        if not self._components:
            return "I"
        return " ".join(f"{_BITS_LETTER[b]}{q}" for q, b in sorted(self._components.items()))

    def __repr__(self) -> str:
        return f"PauliFrame('{self}')"


@dataclass(frozen=True)
class MeasurementRecord:
    """Flip bits of one shot, in execution order (1 = flipped vs the noiseless reference)."""

    bits: tuple[int, ...] = field(default_factory=tuple)

    def append(self, bit: int) -> "MeasurementRecord":
        return MeasurementRecord(self.bits + (int(bit) & 1,))

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, index: int) -> int:
        return self.bits[index]


# ──────────────────────────────────────────────────────────────────────────────
# PER-FRAME OPERATIONS
# ──────────────────────────────────────────────────────────────────────────────

def conjugate_frame(frame: PauliFrame, gate: CliffordAction) -> PauliFrame:
    """Return U f U† as a phase-free frame; untouched qubits are unchanged."""
    if not gate.kind.is_unitary:
        raise ValueError(f"❌ conjugate_frame needs a unitary gate, got {gate.kind.value}")
    local = tuple(range(len(gate.qubits)))
    x = np.zeros((1, len(local)), dtype=bool)
    z = np.zeros((1, len(local)), dtype=bool)
    for i, q in enumerate(gate.qubits):
        x[0, i], z[0, i] = frame._components.get(q, (0, 0))
    conjugate_columns(x, z, CliffordAction(gate.kind, local))

    comps = {q: b for q, b in frame._components.items() if q not in gate.qubits}
    for i, q in enumerate(gate.qubits):
        comps[q] = (int(x[0, i]), int(z[0, i]))
    return PauliFrame(comps)


def apply_reset(frame: PauliFrame, q: int) -> PauliFrame:
    """A fresh |0⟩ (or |+⟩) carries no frame: both bits of ``q`` are cleared."""
    return PauliFrame({k: b for k, b in frame._components.items() if k != q})


def apply_measurement(
    frame: PauliFrame, q: int, basis: str, record: MeasurementRecord
) -> tuple[PauliFrame, MeasurementRecord]:
    """Append the flip bit of measuring ``q`` in ``basis`` and drop the unobservable component."""
    basis = basis.upper()
    x, z  = frame._components.get(q, (0, 0))
    if basis == "Z":
        bit, kept = x, (x, 0)
    elif basis == "X":
        bit, kept = z, (0, z)
    else:
        raise ValueError(f"❌ Unknown measurement basis '{basis}' (expected Z or X)")
    comps = {k: b for k, b in frame._components.items() if k != q}
    comps[q] = kept
    return PauliFrame(comps), record.append(bit)
