"""
Shot store
----------
Sparse batch of Pauli frames and measurement records for one block of shots.

Only shots that have ever been hit by noise (or forced to materialise by a
frame update) are stored explicitly as rows:

    ids  : sorted global shot ids          (k,)
    x, z : frame bits                      (k, n_qubits)
    rec  : record flip bits along the path (k, record_width)

Every other shot of the block is *trivial*: identity frame, all-zero record.
Trivial shots all follow the branch taken by the all-zero record, so a store
only needs one flag (``trivial``) telling whether that implicit population is
present at the current tree node.  The block-wide ledger of materialised ids
is shared by all stores split from the same root store.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from engine.gates import CliffordAction, conjugate_columns
from engine.pauli_frame import MeasurementRecord, PauliFrame
from engine.sampling import sample_noise_sites

logger = logging.getLogger(__name__)


@dataclass
class _Ledger:
    """Which shots of the block have left the implicit trivial population."""

    mask:  np.ndarray
    count: int = 0


class ShotStore:
    """Faulty-shot rows plus the implicit trivial population of one shot block."""

    def __init__(self, n_shots: int, n_qubits: int, *, offset: int = 0, record_width: int = 0):
        if n_shots < 0 or n_qubits < 0:
            raise ValueError(f"❌ Invalid store shape n_shots={n_shots}, n_qubits={n_qubits}")
        self.n_shots  = int(n_shots)
        self.n_qubits = int(n_qubits)
        self.offset   = int(offset)
        self.ids      = np.empty(0, dtype=np.int64)
        self.x        = np.zeros((0, n_qubits), dtype=bool)
        self.z        = np.zeros((0, n_qubits), dtype=bool)
        self.rec      = np.zeros((0, record_width), dtype=bool)
        self.trivial  = True
        self._ledger  = _Ledger(np.zeros(self.n_shots, dtype=bool))

    # ──────────────────────────────────────────────────────────────────────
    # CONSTRUCTORS
    # ──────────────────────────────────────────────────────────────────────

    @classmethod
    def dense(cls, n_shots: int, n_qubits: int, *, offset: int = 0) -> "ShotStore":
        """Every shot materialised as an explicit row (gauge randomisation, fault injection)."""
        store = cls(n_shots, n_qubits, offset=offset)
        store.materialize_all()
        return store

    @classmethod
    def from_frames(cls, n_shots: int, n_qubits: int, frames: dict[int, PauliFrame]) -> "ShotStore":
        store = cls(n_shots, n_qubits)
        if frames:
            shots = np.array(sorted(frames), dtype=np.int64)
            store._materialize(shots)
            for row, shot in enumerate(shots):
                store.x[row], store.z[row] = frames[int(shot)].to_arrays(n_qubits)
        return store

    # ──────────────────────────────────────────────────────────────────────
    # VIEWS
    # ──────────────────────────────────────────────────────────────────────

    @property
    def n_rows(self) -> int:
        return int(self.ids.size)

    @property
    def record_width(self) -> int:
        return int(self.rec.shape[1])

    @property
    def n_trivial(self) -> int:
        """Shots present at this node only implicitly."""
        return self.n_shots - self._ledger.count if self.trivial else 0

    @property
    def population(self) -> int:
        return self.n_rows + self.n_trivial

    @property
    def faulty_shots(self) -> dict[int, PauliFrame]:
        """Shot id → frame, for rows whose frame is not the identity."""
        nonzero = np.flatnonzero((self.x | self.z).any(axis=1))
        return {int(self.ids[r]): PauliFrame.from_arrays(self.x[r], self.z[r]) for r in nonzero}

    def frame(self, shot: int) -> PauliFrame:
        row = self._row_of(shot)
        return PauliFrame() if row is None else PauliFrame.from_arrays(self.x[row], self.z[row])

    def record(self, shot: int) -> MeasurementRecord:
        row = self._row_of(shot)
        if row is None:
            return MeasurementRecord((0,) * self.record_width)
        return MeasurementRecord(tuple(int(b) for b in self.rec[row]))

    def _row_of(self, shot: int) -> int | None:
        pos = int(np.searchsorted(self.ids, shot))
        if pos < self.ids.size and self.ids[pos] == shot:
            return pos
        return None

    # ──────────────────────────────────────────────────────────────────────
    # FRAME OPERATIONS
    # ──────────────────────────────────────────────────────────────────────

    def apply_gate(self, action: CliffordAction) -> None:
        conjugate_columns(self.x, self.z, action)

    def apply_reset(self, q: int) -> None:
        self.x[:, q] = False
        self.z[:, q] = False

    def measure(self, q: int, basis: str) -> int:
        """Append the flip bit of measuring ``q``; returns the new record column."""
        if basis == "Z":
            bit = self.x[:, q].copy()
            self.z[:, q] = False
        elif basis == "X":
            bit = self.z[:, q].copy()
            self.x[:, q] = False
        else:
            raise ValueError(f"❌ Unknown measurement basis '{basis}'")
        self.rec = np.concatenate([self.rec, bit[:, None]], axis=1)
        return self.record_width - 1

    def xor_rows(self, rows: np.ndarray, qubits, lx: np.ndarray, lz: np.ndarray) -> None:
        """Multiply Pauli letters ``(lx, lz)`` of shape (len(rows), len(qubits)) into rows."""
        if rows.size == 0:
            return
        index = np.ix_(rows, np.asarray(qubits, dtype=np.int64))
        self.x[index] ^= lx
        self.z[index] ^= lz

    def flip_record(self, rows: np.ndarray, column: int) -> None:
        if rows.size:
            self.rec[rows, column] ^= True

    # ──────────────────────────────────────────────────────────────────────
    # NOISE SITES
    # ──────────────────────────────────────────────────────────────────────

    def hit_rows(self, p: float, rng: np.random.Generator) -> np.ndarray:
        """Row indices of the shots hit by a rate-``p`` channel (trivial hits materialise)."""
        if p <= 0.0 or self.population == 0:
            return np.empty(0, dtype=np.int64)
        if not self.trivial:
            return np.flatnonzero(rng.random(self.n_rows) < p)
        return self.rows_for_sites(sample_noise_sites(p, self.n_shots, rng))

    def rows_for_sites(self, sites: np.ndarray) -> np.ndarray:
        """Map local shot indices to rows, materialising trivial shots; drops absent shots."""
        sites = np.asarray(sites, dtype=np.int64)
        if sites.size == 0:
            return np.empty(0, dtype=np.int64)
        if sites.min() < 0 or sites.max() >= self.n_shots:
            raise ValueError(f"❌ Noise sites outside [0, {self.n_shots})")
        if self.trivial:
            fresh = sites[~self._ledger.mask[sites]]
            if fresh.size:
                self._materialize(fresh + self.offset)
        if self.n_rows == 0:
            return np.empty(0, dtype=np.int64)
        shots  = sites + self.offset
        pos    = np.searchsorted(self.ids, shots)
        inside = pos < self.n_rows
        found  = inside & (self.ids[np.where(inside, pos, 0)] == shots)
        return pos[found]

    def materialize_all(self) -> None:
        if self.trivial:
            fresh = np.flatnonzero(~self._ledger.mask)
            self._materialize(fresh + self.offset)
        self.trivial = False

    def _materialize(self, shots: np.ndarray) -> None:
        shots = np.unique(np.asarray(shots, dtype=np.int64))
        if shots.size == 0:
            return
        k          = shots.size
        self.ids   = np.concatenate([self.ids, shots])
        self.x     = np.concatenate([self.x, np.zeros((k, self.n_qubits), bool)])
        self.z     = np.concatenate([self.z, np.zeros((k, self.n_qubits), bool)])
        self.rec   = np.concatenate([self.rec, np.zeros((k, self.record_width), bool)])
        order      = np.argsort(self.ids, kind="stable")
        self.ids, self.x, self.z, self.rec = self.ids[order], self.x[order], self.z[order], self.rec[order]
        self._ledger.mask[shots - self.offset] = True
        self._ledger.count += k

    # ──────────────────────────────────────────────────────────────────────
    # REGROUPING
    # ──────────────────────────────────────────────────────────────────────

    def extend_record(self, width: int) -> None:
        """Pad records with zero columns up to ``width`` (a node measured nothing on this row)."""
        if width > self.record_width:
            pad      = np.zeros((self.n_rows, width - self.record_width), dtype=bool)
            self.rec = np.concatenate([self.rec, pad], axis=1)

    def compact(self) -> int:
        """Return rows with identity frame and zero record to the trivial population."""
        if not self.trivial or self.n_rows == 0:
            return 0
        idle = ~(self.x.any(axis=1) | self.z.any(axis=1) | self.rec.any(axis=1))
        dropped = int(idle.sum())
        if dropped:
            self._ledger.mask[self.ids[idle] - self.offset] = False
            self._ledger.count -= dropped
            keep = ~idle
            self.ids, self.x, self.z, self.rec = self.ids[keep], self.x[keep], self.z[keep], self.rec[keep]
        return dropped

    def split(self, child_of_row: np.ndarray, n_children: int, trivial_child: int | None) -> list["ShotStore"]:
        """Partition rows by child index; the implicit population follows ``trivial_child``."""
        children = []
        for c in range(n_children):
            keep          = child_of_row == c
            child         = self._sibling()
            child.ids     = self.ids[keep]
            child.x       = self.x[keep]
            child.z       = self.z[keep]
            child.rec     = self.rec[keep]
            child.trivial = self.trivial and trivial_child == c
            children.append(child)
        return children

    def copy(self) -> "ShotStore":
        clone         = self._sibling()
        clone.ids     = self.ids.copy()
        clone.x       = self.x.copy()
        clone.z       = self.z.copy()
        clone.rec     = self.rec.copy()
        clone.trivial = self.trivial
        return clone

    def _sibling(self) -> "ShotStore":
        sibling          = ShotStore.__new__(ShotStore)
        sibling.n_shots  = self.n_shots
        sibling.n_qubits = self.n_qubits
        sibling.offset   = self.offset
        sibling._ledger  = self._ledger
        return sibling

    def merge(self, other: "ShotStore") -> "ShotStore":
        """Union of two stores covering adjacent, disjoint shot ranges."""
        first, second = (self, other) if self.offset <= other.offset else (other, self)
        if first.offset + first.n_shots != second.offset:
            raise ValueError(
                f"❌ Cannot merge shot ranges [{first.offset}, {first.offset + first.n_shots}) "
                f"and [{second.offset}, {second.offset + second.n_shots}): not adjacent"
            )
        if first.n_qubits != second.n_qubits or first.trivial != second.trivial:
            raise ValueError("❌ Cannot merge stores with different qubit counts or populations")
        width = max(first.record_width, second.record_width)
        for part in (first, second):
            part.extend_record(width)

        merged          = ShotStore(first.n_shots + second.n_shots, first.n_qubits, offset=first.offset)
        merged.ids      = np.concatenate([first.ids, second.ids])
        merged.x        = np.concatenate([first.x, second.x])
        merged.z        = np.concatenate([first.z, second.z])
        merged.rec      = np.concatenate([first.rec, second.rec])
        merged.trivial  = first.trivial
        merged._ledger  = _Ledger(np.concatenate([first._ledger.mask, second._ledger.mask]),
                                  first._ledger.count + second._ledger.count)
        return merged


# ──────────────────────────────────────────────────────────────────────────────
# MODULE-LEVEL OPERATION
# ──────────────────────────────────────────────────────────────────────────────

def apply_channel(store: ShotStore, sites: np.ndarray, channel, rng: np.random.Generator) -> ShotStore:
    """
    Multiply one letter of ``channel`` into every listed shot (local indices).

    ``channel`` provides ``qubits`` and ``sample_letters(k, rng)``; shots that
    were trivial are materialised first, identity results stay as zero rows
    until the next :meth:`ShotStore.compact`.
    """
    rows = store.rows_for_sites(sites)
    if rows.size:
        lx, lz = channel.sample_letters(rows.size, rng)
        store.xor_rows(rows, channel.qubits, lx, lz)
    return store
