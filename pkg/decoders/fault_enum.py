"""
Single-fault enumeration
------------------------
Every single fault a noisy tree can suffer: one non-identity letter of one
channel site, or one flipped measurement.  Each fault is run as its own
deterministic shot (executor injection mode), so the outcome carries the
propagated final frame, the terminal reached and the full record.

Only nodes on the all-zero-record path are enumerated: a site anywhere
else is reached only after an earlier fault.

Usage:
    faults   = FaultSet(gen_se_tree("flagged"))
    outcomes = faults.run()
    bad      = faults.witnesses()          # accepted shots with a logical error
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from circuits.executor import FaultLocation, TerminalResult, execute_tree, logical_outcome
from circuits.instructions import Measure, Noise
from circuits.predicates import RecordView
from circuits.protocol_tree import ACCEPT, ProtocolTree
from engine.errors import PredicateError
from engine.pauli_frame import PauliFrame
from noise.models import NoiseModel, ScemModel

logger = logging.getLogger(__name__)

DEFAULT_RATE = 1e-3


@dataclass(frozen=True)
class Fault:
    """One forced fault and the probability it carries under the attached rates."""

    location:    FaultLocation
    channel:     str
    qubits:      tuple[int, ...]
    letter:      str
    probability: float

    def __str__(self) -> str:
        return f"{self.letter}@{','.join(map(str, self.qubits))} ({self.channel}, {self.location.node_id}[{self.location.index}])"


@dataclass(frozen=True)
class FaultOutcome:
    """Where a single-fault shot ended and what it carried."""

    fault:   Fault
    result:  TerminalResult
    record:  dict[str, int] = field(default_factory=dict)

    @property
    def node_id(self) -> str:
        return self.result.node_id

    @property
    def accepted(self) -> bool:
        return self.result.kind == ACCEPT

    @property
    def frame(self) -> PauliFrame:
        return self.result.frame

    def data_error(self, data_qubits) -> PauliFrame:
        return self.result.frame.restrict(data_qubits)

    def logical_error(self, observable: PauliFrame) -> bool:
        return self.accepted and bool(logical_outcome(self.result, observable))

    def view(self) -> RecordView:
        columns = {label: i for i, label in enumerate(self.record)}
        return RecordView(np.array([list(self.record.values())], dtype=bool).reshape(1, -1), columns)


def has_noise(tree: ProtocolTree) -> bool:
    return any(circuit.has_noise for _, circuit in tree.circuits())


def zero_path(tree: ProtocolTree) -> list[str]:
    """Node ids visited by the fault-free shot."""
    path = [tree.root]
    while not tree.nodes[path[-1]].is_terminal:
        node_id = path[-1]
        zero    = RecordView.zeros(tree.columns(node_id))
        taken   = [e.target for e in tree.nodes[node_id].edges if e.predicate.evaluate(zero)[0]]
        if len(taken) != 1:
            raise PredicateError(node_id, int(not taken), int(len(taken) > 1))
        path.append(taken[0])
    return path


class FaultSet:
    """Enumerated single faults of one tree (``noise`` is attached first unless the tree already carries noise)."""

    def __init__(self, tree: ProtocolTree, noise: NoiseModel | None = None, *, nodes: list[str] | None = None):
        if noise is not None:
            tree = noise.attach_tree(tree)
        elif not has_noise(tree):
            tree = ScemModel(DEFAULT_RATE).attach_tree(tree)
        self.tree  = tree
        self.nodes = list(nodes) if nodes is not None else zero_path(tree)
        self.faults: list[Fault] = list(self._enumerate())
        logger.debug(f"🧪 FaultSet '{tree.name}': {len(self.faults)} single faults on {len(self.nodes)} node(s)")

    def _enumerate(self):
        for node_id in self.nodes:
            circuit = self.tree.nodes[node_id].circuit
            for index, ins in enumerate(circuit.instructions):
                if isinstance(ins, Noise):
                    channel = ins.channel
                    if channel.is_record_flip:
                        continue
                    for letter, (name, share) in enumerate(channel.letters()):
                        yield Fault(FaultLocation(node_id, index, letter), channel.kind.value,
                                    channel.qubits, name, channel.p * share)
                elif isinstance(ins, Measure) and not circuit.noiseless:
                    p = ins.noise.p if ins.noise is not None else 0.0
                    yield Fault(FaultLocation(node_id, index, 0), "meas_flip", ins.qubits, "FLIP", p)

    def __len__(self) -> int:
        return len(self.faults)

    def __iter__(self):
        return iter(self.faults)

    # ──────────────────────────────────────────────────────────────────────
    # EXECUTION
    # ──────────────────────────────────────────────────────────────────────

    def run(self, workers: int = 1) -> list[FaultOutcome]:
        return self._outcomes if workers == 1 else self._execute(workers)

    @cached_property
    def _outcomes(self) -> list[FaultOutcome]:
        return self._execute(1)

    def _execute(self, workers: int) -> list[FaultOutcome]:
        if not self.faults:
            return []
        result   = execute_tree(self.tree, 0, faults=[f.location for f in self.faults], workers=workers)
        outcomes = []
        for shot, fault in enumerate(self.faults):
            terminal = result.result(shot)
            columns  = self.tree.columns(terminal.node_id)
            record   = {label: int(terminal.record[column]) for label, column in columns.items()}
            outcomes.append(FaultOutcome(fault, terminal, record))
        logger.debug(f"📊 FaultSet '{self.tree.name}': {len(outcomes)} outcome(s)")
        return outcomes

    def witnesses(self, observable: PauliFrame | None = None, workers: int = 1) -> list[FaultOutcome]:
        """Accepted single-fault shots whose corrected frame flips ``observable``."""
        observable = self.tree.observable if observable is None else observable
        if observable is None:
            raise ValueError(f"❌ Tree '{self.tree.name}' declares no observable")
        return [o for o in self.run(workers) if o.logical_error(observable)]
