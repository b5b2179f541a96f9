"""
Resource counts
---------------
Qubit partition, CNOT counts and depths of the syndrome-extraction
strategies, counted from the generated circuits.

Per block or in the teleportation context (two blocks plus two surgery
ancillas).  CNOT counts are (X half, Z half) pairs; the superdense circuit
serves both check types at once, so its pair is split by block instead.

Depth conventions (reset and measurement one layer each):

    flagged, un-flagged   circuit depth of one check type (half) and of both (full)
    superdense            half = 3 + largest coupling count of one ancilla,
                          full = the whole circuit (reset, Bell, couplings, un-Bell, measure)

Usage:
    counts = count_resources("simultaneous", context="teleport")
    counts = count_resources(gen_memory("sequential"))
"""

from __future__ import annotations

import logging
import re
from dataclasses import asdict, dataclass

from circuits.circuit import Circuit
from circuits.instructions import Measure
from circuits.protocol_tree import ProtocolTree
from engine.gates import GateKind
from gadgets.se_circuits import SUPERDENSE_A, SUPERDENSE_B, color_code, gen_se_circuit, superdense_layout

logger = logging.getLogger(__name__)

CONTEXTS       = ("block", "teleport")
STRATEGIES     = ("sequential", "simultaneous", "superdense", "bare")
SURGERY_QUBITS = 2
_FLAG_LABEL    = re.compile(r"(?:^|\.)f[xz]\d+$")


@dataclass(frozen=True)
class ResourceCount:
    data:           int
    syndrome:       int
    flag:           int
    surgery:        int
    cnot_flagged:   tuple[int, int]
    cnot_unflagged: tuple[int, int]
    depth_half:     int
    depth_full:     int
    blocks:         int = 1

    def __post_init__(self):
        values = [self.data, self.syndrome, self.flag, self.surgery, self.depth_half, self.depth_full,
                  *self.cnot_flagged, *self.cnot_unflagged]
        if any(v < 0 for v in values):
            raise ValueError(f"❌ Resource counts must be non-negative, got {self}")

    @property
    def qubits(self) -> int:
        return self.data + self.syndrome + self.flag + self.surgery

    def as_row(self) -> dict:
        row = asdict(self)
        row["qubits"]         = self.qubits
        row["cnot_flagged"]   = "+".join(map(str, self.cnot_flagged))
        row["cnot_unflagged"] = "+".join(map(str, self.cnot_unflagged))
        return row


def _cnots(circuit: Circuit) -> int:
    return circuit.count(GateKind.CNOT)


def _strategy_counts(strategy: str, d: int) -> ResourceCount:
    """One block."""
    if strategy not in STRATEGIES:
        raise ValueError(f"❌ Unknown strategy '{strategy}'. Must be one of: {', '.join(STRATEGIES)}")
    code = color_code(d)
    if strategy == "superdense":
        circuit  = gen_se_circuit("superdense", code)
        per_anc  = max(len(couplings) for couplings in SUPERDENSE_A + SUPERDENSE_B)
        cnots    = _cnots(circuit)
        layout   = superdense_layout()
        return ResourceCount(code.n, len(layout.ancillas + layout.partners), 0, 0, (cnots, 0), (0, 0),
                             3 + per_anc, circuit.depth)

    parallel = strategy != "sequential"
    if parallel and d != 3:
        raise ValueError(f"❌ Parallel schedules exist for d=3 only, got strategy '{strategy}' at d={d}")
    flagged  = [gen_se_circuit("flagged", code, basis, parallel=parallel) for basis in "XZ"]
    bare     = [gen_se_circuit("bare", code, basis, parallel=parallel) for basis in "XZ"]
    ancillas = len(code.plaquettes) if parallel else 1
    if strategy == "bare":
        return ResourceCount(code.n, ancillas, 0, 0, (0, 0), tuple(map(_cnots, bare)),
                             bare[0].depth, bare[0].depth + bare[1].depth)
    return ResourceCount(code.n, ancillas, ancillas, 0, tuple(map(_cnots, flagged)), tuple(map(_cnots, bare)),
                         flagged[0].depth, flagged[0].depth + flagged[1].depth)


def _in_context(counts: ResourceCount, context: str, strategy: str) -> ResourceCount:
    if context not in CONTEXTS:
        raise ValueError(f"❌ Unknown resource context '{context}'. Must be one of: {', '.join(CONTEXTS)}")
    if context == "block":
        return counts
    flagged = counts.cnot_flagged
    if strategy == "superdense":
        flagged = (flagged[0], flagged[0])
    else:
        flagged = (2 * flagged[0], 2 * flagged[1])
    return ResourceCount(
        data           = 2 * counts.data,
        syndrome       = 2 * counts.syndrome,
        flag           = 2 * counts.flag,
        surgery        = SURGERY_QUBITS,
        cnot_flagged   = flagged,
        cnot_unflagged = (2 * counts.cnot_unflagged[0], 2 * counts.cnot_unflagged[1]),
        depth_half     = counts.depth_half,
        depth_full     = counts.depth_full,
        blocks         = 2,
    )


def _circuit_counts(circuit: Circuit) -> ResourceCount:
    """Direct count: measured qubits are ancillas (flags by label), the rest data."""
    measured = {}
    for ins in circuit.instructions:
        if isinstance(ins, Measure):
            measured[ins.qubit] = measured.get(ins.qubit, False) or bool(_FLAG_LABEL.search(ins.label))
    used  = circuit.qubits_used()
    flags = sum(measured.values())
    cnots = _cnots(circuit)
    return ResourceCount(
        data           = len(used - set(measured)),
        syndrome       = len(measured) - flags,
        flag           = flags,
        surgery        = 0,
        cnot_flagged   = (cnots, 0) if flags else (0, 0),
        cnot_unflagged = (0, 0) if flags else (cnots, 0),
        depth_half     = circuit.depth,
        depth_full     = circuit.depth,
    )


def count_resources(target: str | ProtocolTree | Circuit, *, context: str | None = None, d: int = 3) -> ResourceCount:
    """Counts of a strategy name, a generated tree (its strategy and context) or one circuit."""
    if isinstance(target, Circuit):
        return _circuit_counts(target)
    if isinstance(target, ProtocolTree):
        strategy = target.meta.get("strategy")
        if strategy is None:
            raise ValueError(f"❌ Tree '{target.name}' does not declare a syndrome-extraction strategy")
        context = context or target.meta.get("context", "teleport" if target.meta.get("blocks") == 2 else "block")
        target  = strategy
    counts = _in_context(_strategy_counts(target, d), context or "block", target)
    logger.debug(f"📊 Resources {target} ({context or 'block'}, d={d}): {counts.as_row()}")
    return counts
