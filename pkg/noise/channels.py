"""
Noise channels
--------------
Pauli channels attached to circuit sites.  A channel fires with its total
rate ``p``; given that it fired, one non-identity letter of its support is
drawn with the conditional probabilities listed by :meth:`NoiseChannel.letters`.

    depol1        X, Y, Z                    p/3 each
    depol2        15 two-qubit letters       p/15 each
    crosstalk     as depol2 on (target, neighbour)
    meas_flip     classical record flip      p
    reset_flip    X after a Z reset, Z after an X reset
    idle_dephase  Z with p = ½(1 − e^(−t/T2))
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

logger = logging.getLogger(__name__)


class ChannelKind(str, Enum):
    DEPOL1       = "depol1"
    DEPOL2       = "depol2"
    CROSSTALK    = "crosstalk"
    MEAS_FLIP    = "meas_flip"
    RESET_FLIP   = "reset_flip"
    IDLE_DEPHASE = "idle_dephase"


# (x, z) bits per single-qubit letter, identity excluded
_ONE_QUBIT = ((1, 0), (1, 1), (0, 1))
_NAMES     = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z", (0, 0): "I"}


def idle_dephase_prob(t: float, t2: float) -> float:
    """Dephasing probability of a qubit idling for ``t`` seconds with coherence time ``t2``."""
    if t < 0:
        raise ValueError(f"❌ Idle duration must be non-negative, got {t}")
    if t2 <= 0:
        raise ValueError(f"❌ T2 must be positive, got {t2}")
    if math.isinf(t2):
        return 0.0
    return 0.5 * (1.0 - math.exp(-t / t2))


@lru_cache(maxsize=None)
def _letter_table(arity: int) -> tuple[np.ndarray, np.ndarray]:
    letters = [l for l in itertools.product(((0, 0),) + _ONE_QUBIT, repeat=arity) if any(map(any, l))]
    lx = np.array([[bits[0] for bits in letter] for letter in letters], dtype=bool)
    lz = np.array([[bits[1] for bits in letter] for letter in letters], dtype=bool)
    return lx, lz


@dataclass(frozen=True)
class NoiseChannel:
    """A Pauli channel of total rate ``p`` on ``qubits``."""

    kind:   ChannelKind
    qubits: tuple[int, ...]
    p:      float
    basis:  str = "Z"
    label:  str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        p = float(self.p)
        if not 0.0 <= p <= 1.0 or math.isnan(p):
            raise ValueError(f"❌ Channel rate {p} outside [0, 1] for {self.kind.value}")
        object.__setattr__(self, "p", p)
        expected = 2 if self.kind in (ChannelKind.DEPOL2, ChannelKind.CROSSTALK) else 1
        if len(self.qubits) != expected:
            raise ValueError(f"❌ Channel {self.kind.value} acts on {expected} qubit(s), got {self.qubits}")

    # ──────────────────────────────────────────────────────────────────────
    # CONSTRUCTORS
    # ──────────────────────────────────────────────────────────────────────

    @classmethod
    def depol1(cls, q: int, p: float) -> "NoiseChannel":
        return cls(ChannelKind.DEPOL1, (q,), p)

    @classmethod
    def depol2(cls, a: int, b: int, p: float) -> "NoiseChannel":
        return cls(ChannelKind.DEPOL2, (a, b), p)

    @classmethod
    def crosstalk(cls, target: int, neighbour: int, p: float) -> "NoiseChannel":
        return cls(ChannelKind.CROSSTALK, (target, neighbour), p)

    @classmethod
    def meas_flip(cls, q: int, p: float) -> "NoiseChannel":
        return cls(ChannelKind.MEAS_FLIP, (q,), p)

    @classmethod
    def reset_flip(cls, q: int, p: float, basis: str = "Z") -> "NoiseChannel":
        return cls(ChannelKind.RESET_FLIP, (q,), p, basis=basis.upper())

    @classmethod
    def idle_dephase(cls, q: int, t: float, t2: float) -> "NoiseChannel":
        return cls(ChannelKind.IDLE_DEPHASE, (q,), idle_dephase_prob(t, t2), label=f"t={t:.3e}")

    # ──────────────────────────────────────────────────────────────────────
    # LETTERS
    # ──────────────────────────────────────────────────────────────────────

    @property
    def is_record_flip(self) -> bool:
        return self.kind is ChannelKind.MEAS_FLIP

    def _letter_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind in (ChannelKind.DEPOL1,):
            return _letter_table(1)
        if self.kind in (ChannelKind.DEPOL2, ChannelKind.CROSSTALK):
            return _letter_table(2)
        if self.kind is ChannelKind.RESET_FLIP:
            flip_x = self.basis == "Z"
            return np.array([[flip_x]]), np.array([[not flip_x]])
        if self.kind is ChannelKind.IDLE_DEPHASE:
            return np.array([[False]]), np.array([[True]])
        raise ValueError(f"❌ Channel {self.kind.value} has no Pauli letters (record flip)")

    def letters(self) -> list[tuple[str, float]]:
        """Non-identity letters with their conditional probabilities (sum to 1)."""
        if self.is_record_flip:
            return [("FLIP", 1.0)]
        lx, lz = self._letter_arrays()
        names  = ["".join(_NAMES[(int(x), int(z))] for x, z in zip(rx, rz)) for rx, rz in zip(lx, lz)]
        return [(name, 1.0 / len(names)) for name in names]

    def letter_probabilities(self) -> list[tuple[str, float]]:
        """Absolute probability of every non-identity letter; they sum to ``p``."""
        return [(name, self.p * share) for name, share in self.letters()]

    def letter_bits(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        lx, lz = self._letter_arrays()
        return lx[index], lz[index]

    def sample_letters(self, k: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``k`` letters, shape (k, len(qubits)) each for the x and z parts."""
        lx, lz = self._letter_arrays()
        if len(lx) == 1:
            return np.repeat(lx, k, axis=0), np.repeat(lz, k, axis=0)
        picks = rng.integers(0, len(lx), size=k)
        return lx[picks], lz[picks]

    def scaled(self, p: float) -> "NoiseChannel":
        return NoiseChannel(self.kind, self.qubits, p, self.basis, self.label)

    def __str__(self) -> str:
        return f"{self.kind.value}({self.p:.3g}) {' '.join(map(str, self.qubits))}"
