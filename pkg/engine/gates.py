"""
Clifford actions
----------------
Gate kinds understood by the frame engine and their phase-free conjugation
rules on (x, z) bit columns.

Every rule works in place on two boolean matrices of shape
``(n_rows, n_qubits)`` so the same code path serves a single frame and a
whole batch of faulty shots.  Gate names follow the stim vocabulary so that
circuits can be cross-checked against ``stim.PauliString.after``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np


class GateKind(str, Enum):
    """Clifford operations, resets and measurements of the circuit IR."""

    I          = "I"
    X          = "X"
    Y          = "Y"
    Z          = "Z"
    H          = "H"
    S          = "S"
    S_DAG      = "S_DAG"
    SQRT_X     = "SQRT_X"
    SQRT_X_DAG = "SQRT_X_DAG"
    SQRT_Y     = "SQRT_Y"
    SQRT_Y_DAG = "SQRT_Y_DAG"
    CNOT       = "CNOT"
    CZ         = "CZ"
    XX         = "SQRT_XX"
    ZZ         = "SQRT_ZZ"
    SWAP       = "SWAP"
    RESET_Z    = "R"
    RESET_X    = "RX"
    MEASURE_Z  = "M"
    MEASURE_X  = "MX"

    @property
    def arity(self) -> int:
        return 2 if self in _TWO_QUBIT else 1

    @property
    def is_unitary(self) -> bool:
        return self not in (GateKind.RESET_Z, GateKind.RESET_X, GateKind.MEASURE_Z, GateKind.MEASURE_X)


_TWO_QUBIT = {GateKind.CNOT, GateKind.CZ, GateKind.XX, GateKind.ZZ, GateKind.SWAP}


@dataclass(frozen=True)
class CliffordAction:
    """A gate kind applied to concrete qubit ids."""

    kind:   GateKind
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != self.kind.arity:
            raise ValueError(
                f"❌ Gate {self.kind.value} expects {self.kind.arity} operand(s), got {self.qubits}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"❌ Gate {self.kind.value} has repeated operands {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"❌ Negative qubit id in {self.qubits}")

    def __str__(self) -> str:
        return f"{self.kind.value} {' '.join(map(str, self.qubits))}"


# ──────────────────────────────────────────────────────────────────────────────
# CONJUGATION RULES  (in place, phase discarded)
# ──────────────────────────────────────────────────────────────────────────────

def _noop(x: np.ndarray, z: np.ndarray, q: tuple[int, ...]) -> None:
    pass


def _swap_xz(x, z, q):
    (a,) = q
    tmp     = x[:, a].copy()
    x[:, a] = z[:, a]
    z[:, a] = tmp


def _phase(x, z, q):
    (a,) = q
    z[:, a] ^= x[:, a]


def _sqrt_x(x, z, q):
    (a,) = q
    x[:, a] ^= z[:, a]


def _cnot(x, z, q):
    c, t = q
    x[:, t] ^= x[:, c]
    z[:, c] ^= z[:, t]


def _cz(x, z, q):
    a, b = q
    z[:, a] ^= x[:, b]
    z[:, b] ^= x[:, a]


def _sqrt_xx(x, z, q):
    a, b = q
    flip = z[:, a] ^ z[:, b]
    x[:, a] ^= flip
    x[:, b] ^= flip


def _sqrt_zz(x, z, q):
    a, b = q
    flip = x[:, a] ^ x[:, b]
    z[:, a] ^= flip
    z[:, b] ^= flip


def _swap(x, z, q):
    a, b = q
    x[:, [a, b]] = x[:, [b, a]]
    z[:, [a, b]] = z[:, [b, a]]


CONJUGATION_RULES: dict[GateKind, Callable[[np.ndarray, np.ndarray, tuple[int, ...]], None]] = {
    GateKind.I:          _noop,
    GateKind.X:          _noop,
    GateKind.Y:          _noop,
    GateKind.Z:          _noop,
    GateKind.H:          _swap_xz,
    GateKind.S:          _phase,
    GateKind.S_DAG:      _phase,
    GateKind.SQRT_X:     _sqrt_x,
    GateKind.SQRT_X_DAG: _sqrt_x,
    GateKind.SQRT_Y:     _swap_xz,
    GateKind.SQRT_Y_DAG: _swap_xz,
    GateKind.CNOT:       _cnot,
    GateKind.CZ:         _cz,
    GateKind.XX:         _sqrt_xx,
    GateKind.ZZ:         _sqrt_zz,
    GateKind.SWAP:       _swap,
}

# Phase-free rules are involutions, so U and U† share one rule.
INVERSE_KIND = {
    GateKind.S:          GateKind.S_DAG,
    GateKind.S_DAG:      GateKind.S,
    GateKind.SQRT_X:     GateKind.SQRT_X_DAG,
    GateKind.SQRT_X_DAG: GateKind.SQRT_X,
    GateKind.SQRT_Y:     GateKind.SQRT_Y_DAG,
    GateKind.SQRT_Y_DAG: GateKind.SQRT_Y,
}


def inverse(action: CliffordAction) -> CliffordAction:
    """Return U† for a unitary action."""
    if not action.kind.is_unitary:
        raise ValueError(f"❌ {action.kind.value} is not unitary and has no inverse")
    return CliffordAction(INVERSE_KIND.get(action.kind, action.kind), action.qubits)


def conjugate_columns(x: np.ndarray, z: np.ndarray, action: CliffordAction) -> None:
    """Conjugate every row of the (x, z) batch by ``action`` in place."""
    rule = CONJUGATION_RULES.get(action.kind)
    if rule is None:
        raise ValueError(f"❌ No conjugation rule for gate kind '{action.kind.value}'")
    if x.shape[0]:
        rule(x, z, action.qubits)
