"""
Frame-update rules
------------------
Record-controlled Pauli corrections applied noiselessly to the frame: decoder
lookups, teleportation updates X^b Z^a and gauge fixes.  A rule maps each
shot's record to a Pauli on fixed qubits; ``FrameUpdate`` instructions carry
a tuple of rules.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Callable, Iterable

import numpy as np

from circuits.predicates import Predicate, RecordView
from engine.pauli_frame import PauliFrame

if TYPE_CHECKING:
    from decoders.lookup import LookupTable

CORRECTION_BITS = 14


class CorrectionRule(ABC):
    """``labels`` and ``qubits`` come from subclass fields or properties."""

    labels: tuple[str, ...]
    qubits: tuple[int, ...]

    @abstractmethod
    def masks(self, view: RecordView) -> tuple[np.ndarray, np.ndarray]:
        """Per-row (x, z) masks over ``qubits``, shape (n_rows, len(qubits))."""


@dataclass(frozen=True)
class ParityPauli(CorrectionRule):
    """Apply ``pauli`` on every shot whose record parity over ``labels`` is odd."""

    labels: tuple[str, ...]
    pauli:  PauliFrame

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.pauli)

    def masks(self, view: RecordView) -> tuple[np.ndarray, np.ndarray]:
        parity = np.logical_xor.reduce(view.bits(self.labels), axis=1) if self.labels else np.zeros(view.n_rows, bool)
        px = np.array([x for _, (x, _) in self.pauli], dtype=bool)
        pz = np.array([z for _, (_, z) in self.pauli], dtype=bool)
        return parity[:, None] & px[None, :], parity[:, None] & pz[None, :]


@dataclass(frozen=True)
class LookupCorrection(CorrectionRule):
    """
    Tabulated correction: pattern of ``labels`` (first label = least
    significant bit) → Pauli on ``qubits``.  Missing patterns mean identity.
    """

    labels: tuple[str, ...]
    qubits: tuple[int, ...]
    table_x: tuple[tuple[int, int], ...]
    table_z: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.labels) > CORRECTION_BITS:
            raise ValueError(f"❌ Lookup correction over {len(self.labels)} bits exceeds {CORRECTION_BITS}")

    @classmethod
    def from_function(
        cls,
        labels: Iterable[str],
        qubits: Iterable[int],
        rule: Callable[[tuple[int, ...]], PauliFrame | None],
    ) -> "LookupCorrection":
        """Tabulate ``rule(bits)`` (bits in label order) into per-pattern qubit masks."""
        labels, qubits = tuple(labels), tuple(qubits)
        position       = {q: i for i, q in enumerate(qubits)}
        table_x, table_z = [], []
        for bits in itertools.product((0, 1), repeat=len(labels)):
            pauli = rule(bits)
            if pauli is None or pauli.is_identity:
                continue
            pattern = sum(b << i for i, b in enumerate(bits))
            mx = mz = 0
            for q, (x, z) in pauli:
                if q not in position:
                    raise ValueError(f"❌ Correction touches qubit {q} outside {qubits}")
                mx |= x << position[q]
                mz |= z << position[q]
            if mx:
                table_x.append((pattern, mx))
            if mz:
                table_z.append((pattern, mz))
        return cls(labels, qubits, tuple(table_x), tuple(table_z))

    @cached_property
    def _dense_x(self) -> np.ndarray:
        return _dense(self.table_x, len(self.labels))

    @cached_property
    def _dense_z(self) -> np.ndarray:
        return _dense(self.table_z, len(self.labels))

    def masks(self, view: RecordView) -> tuple[np.ndarray, np.ndarray]:
        pattern = view.pattern(self.labels) if self.labels else np.zeros(view.n_rows, dtype=np.int64)
        shifts  = np.arange(len(self.qubits), dtype=np.int64)
        mx = (self._dense_x[pattern][:, None] >> shifts) & 1
        mz = (self._dense_z[pattern][:, None] >> shifts) & 1
        return mx.astype(bool), mz.astype(bool)

    def lookup(self, bits: tuple[int, ...]) -> PauliFrame:
        pattern = sum(int(b) << i for i, b in enumerate(bits))
        mx, mz  = dict(self.table_x).get(pattern, 0), dict(self.table_z).get(pattern, 0)
        return PauliFrame({q: ((mx >> i) & 1, (mz >> i) & 1) for i, q in enumerate(self.qubits)})


def _dense(table, n_bits: int) -> np.ndarray:
    dense = np.zeros(1 << n_bits, dtype=np.int64)
    for pattern, mask in table:
        dense[pattern] = mask
    return dense


def apply_rules(store, rules: Iterable[CorrectionRule], view: RecordView) -> None:
    """XOR every rule's per-row masks into the matching frame rows of ``store``."""
    rows = np.arange(store.n_rows)
    for rule in rules:
        if not rule.qubits:
            continue
        mx, mz = rule.masks(view)
        hit    = (mx | mz).any(axis=1)
        if hit.any():
            store.xor_rows(rows[hit], rule.qubits, mx[hit], mz[hit])



# ──────────────────────────────────────────────────────────────────────────────
# DECODER RULES
# ──────────────────────────────────────────────────────────────────────────────

def flag_contexts(view: RecordView, labels: tuple[str | None, ...], mode: str = "first_raised") -> np.ndarray:
    """
    Flag context per row.  "first_raised": 1 + position of the first raised
    label (0 if none); ``None`` entries keep their position but never fire.
    "pattern": the label pattern itself (first label least significant).
    """
    if not labels:
        return np.zeros(view.n_rows, dtype=np.int64)
    if mode == "pattern":
        return view.pattern(labels)
    if mode != "first_raised":
        raise ValueError(f"❌ Unknown context mode '{mode}'")
    raised = np.zeros((view.n_rows, len(labels)), dtype=bool)
    for i, label in enumerate(labels):
        if label is not None:
            raised[:, i] = view.bit(label)
    first = np.argmax(raised, axis=1) + 1
    return np.where(raised.any(axis=1), first, 0).astype(np.int64)


@dataclass(frozen=True)
class ConditionalPauli(CorrectionRule):
    """Apply ``pauli`` on every shot where ``predicate`` holds (``ALWAYS`` injects a fixed Pauli)."""

    predicate: Predicate
    pauli:     PauliFrame

    @property
    def labels(self) -> tuple[str, ...]:
        return self.predicate.labels

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.pauli)

    def masks(self, view: RecordView) -> tuple[np.ndarray, np.ndarray]:
        hit = self.predicate.evaluate(view)
        px  = np.array([x for _, (x, _) in self.pauli], dtype=bool)
        pz  = np.array([z for _, (_, z) in self.pauli], dtype=bool)
        return hit[:, None] & px[None, :], hit[:, None] & pz[None, :]


@dataclass(frozen=True)
class SyndromeLookup(CorrectionRule):
    """
    Lookup-table decode of the syndrome bits ``syndrome_labels`` (first label =
    P1 = most significant bit) under the flag context of ``context_labels``,
    applied as an X (``basis="X"``) or Z correction on ``qubits``.
    """

    syndrome_labels: tuple[str, ...]
    qubits:          tuple[int, ...]
    basis:           str
    table:           "LookupTable"
    context_labels:  tuple[str | None, ...] = ()
    context_mode:    str = "first_raised"

    def __post_init__(self):
        if self.basis not in ("X", "Z"):
            raise ValueError(f"❌ Correction basis must be 'X' or 'Z', got '{self.basis}'")
        if len(self.qubits) != self.table.n_qubits:
            raise ValueError(f"❌ Table '{self.table.name}' covers {self.table.n_qubits} qubits, got {len(self.qubits)}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.syndrome_labels) + tuple(l for l in self.context_labels if l is not None)

    def masks(self, view: RecordView) -> tuple[np.ndarray, np.ndarray]:
        lookup   = self.table.corrections
        bits     = view.bits(self.syndrome_labels).astype(np.int64)
        index    = bits @ (1 << np.arange(bits.shape[1] - 1, -1, -1))
        context  = np.minimum(flag_contexts(view, self.context_labels, self.context_mode), lookup.shape[0] - 1)
        fix      = lookup[context, index]
        nothing  = np.zeros_like(fix)
        return (fix, nothing) if self.basis == "X" else (nothing, fix)
