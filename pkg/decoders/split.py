"""
Split decoding
--------------
Joint decode at the end of a teleportation: the source block has just been
measured transversally in Z, the destination block's Z checks were measured
by the split.  One frame-update rule turns that record into

  * an X correction on the destination (its own syndrome, flag context from
    the merge, plus the X6 gauge fix of the fused boundary check), and
  * the X_L^b teleportation update, where b is the source's decoded Z_L.

When the two boundary plaquettes were fused into one weight-8 check during
the merge, only their product is fixed.  Their individual values are a
gauge: both equal to 1 means the gauge, one of them alone means an error on
that side unless the other syndrome bits of that side already explain it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from circuits.corrections import CorrectionRule, flag_contexts
from circuits.predicates import RecordView
from decoders.lookup import LookupTable

D3_CHECKS    = ((0, 1, 2, 3), (1, 2, 4, 5), (2, 3, 5, 6))
D3_LOGICAL   = (0, 1, 4)
GAUGE_QUBIT  = 6
HOOK_CONTEXT = 3


@dataclass(frozen=True)
class SplitDecoder(CorrectionRule):
    """
    ``data_labels``: the seven source Z-measurement bits.  ``syndrome_labels``:
    the destination's three Z-check bits.  ``qubits``: the destination data
    qubits.  ``hook_labels`` force context 3 on both blocks when raised
    (flag of the weight-6 joint measurement).
    """

    data_labels:         tuple[str, ...]
    syndrome_labels:     tuple[str, ...]
    qubits:              tuple[int, ...]
    table:               LookupTable
    source_context:      tuple[str | None, ...] = ()
    destination_context: tuple[str | None, ...] = ()
    hook_labels:         tuple[str, ...] = ()
    shared_w8:           bool = True
    checks:              tuple[tuple[int, ...], ...] = D3_CHECKS
    logical:             tuple[int, ...] = D3_LOGICAL

    def __post_init__(self):
        if len(self.data_labels) != len(self.qubits):
            raise ValueError(
                f"❌ Split decoder needs one source bit per destination qubit, "
                f"got {len(self.data_labels)} bits for {len(self.qubits)} qubits"
            )
        if len(self.syndrome_labels) != len(self.checks):
            raise ValueError(f"❌ Split decoder needs {len(self.checks)} syndrome labels, got {len(self.syndrome_labels)}")

    @property
    def labels(self) -> tuple[str, ...]:
        context = tuple(l for l in self.source_context + self.destination_context if l is not None)
        return tuple(self.data_labels) + tuple(self.syndrome_labels) + context + tuple(self.hook_labels)

    def _check_matrix(self) -> np.ndarray:
        matrix = np.zeros((len(self.checks), len(self.qubits)), dtype=np.int64)
        for i, check in enumerate(self.checks):
            matrix[i, list(check)] = 1
        return matrix

    def masks(self, view: RecordView) -> tuple[np.ndarray, np.ndarray]:
        lookup  = self.table.corrections
        top     = lookup.shape[0] - 1
        weights = 1 << np.arange(len(self.checks) - 1, -1, -1)

        data = view.bits(self.data_labels).astype(np.int64)
        h    = (data @ self._check_matrix().T) % 2
        s    = view.bits(self.syndrome_labels).astype(np.int64)

        ctx1 = flag_contexts(view, self.source_context)
        ctx2 = flag_contexts(view, self.destination_context)
        if self.hook_labels:
            hooked = view.bits(self.hook_labels).any(axis=1)
            ctx1   = np.where(hooked, HOOK_CONTEXT, ctx1)
            ctx2   = np.where(hooked, HOOK_CONTEXT, ctx2)
        ctx1, ctx2 = np.minimum(ctx1, top), np.minimum(ctx2, top)

        gauge = np.zeros(view.n_rows, dtype=np.int64)
        if self.shared_w8:
            p1, p2 = h[:, -1].astype(bool), s[:, -1].astype(bool)
            rest1  = h[:, :-1].any(axis=1) | (ctx1 > 0)
            rest2  = s[:, :-1].any(axis=1) | (ctx2 > 0)
            gauge  = ((p1 & p2) | (p1 & ~p2 & ~rest1) | (p2 & ~p1 & ~rest2)).astype(np.int64)
        h[:, -1] ^= gauge
        s[:, -1] ^= gauge

        mx = lookup[ctx2, s @ weights].copy()
        mx[:, GAUGE_QUBIT] ^= gauge.astype(bool)

        source_fix = lookup[ctx1, h @ weights]
        logical    = list(self.logical)
        b = (data[:, logical].sum(axis=1) + source_fix[:, logical].sum(axis=1)) & 1
        mx[:, logical] ^= b.astype(bool)[:, None]
        return mx, np.zeros_like(mx)
