"""
Detector-error-model export
---------------------------
Error mechanisms of a fixed-path tree in the stim DEM text format, so the
lattice-surgery and memory circuits can be handed to external decoders.

Every single fault (``FaultSet``) is one mechanism: its probability, the
detectors it fires and the logical observables it flips.  Mechanisms with
the same signature merge into one line with the combined probability
p = p1(1-p2) + p2(1-p1); signature-free ones are dropped.

Grammar (one mechanism per line, as stim writes it):

    line      := "error(" probability ")" { " D" index } { " L" index }
    index     := decimal detector / observable id in declaration order

Detectors are numbered in path order of their ``Detector`` instructions;
observable L0 is the tree observable (frame anticommutation before the
ideal readout), further observables may be passed explicitly.

Branching trees are exported one path at a time (``terminal=``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import stim

from circuits.instructions import Detector
from circuits.predicates import ALWAYS
from circuits.protocol_tree import ProtocolTree
from decoders.fault_enum import FaultSet
from engine.pauli_frame import PauliFrame
from noise.models import NoiseModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Mechanism:
    probability: float
    detectors:   tuple[int, ...]
    observables: tuple[int, ...]

    @property
    def signature(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.detectors, self.observables


def linear_path(tree: ProtocolTree, terminal: str) -> ProtocolTree:
    """The root-to-``terminal`` path of ``tree`` as a non-branching tree."""
    if terminal not in tree.nodes or not tree.nodes[terminal].is_terminal:
        raise ValueError(f"❌ '{terminal}' is not a terminal of tree '{tree.name}'")
    path  = tree.path_to(terminal)
    clone = ProtocolTree(tree.n_qubits, f"{tree.name}@{terminal}", observable=tree.observable,
                         tags=tree.tags, meta=tree.meta)
    for node_id in path:
        node = tree.nodes[node_id]
        clone.add_node(node_id, node.circuit, node.terminal)
    clone.chain(*path, predicate=ALWAYS)
    return clone


def _detectors(tree: ProtocolTree) -> list[Detector]:
    found = []
    node_id = tree.root
    while True:
        found.extend(ins for ins in tree.nodes[node_id].circuit.instructions if isinstance(ins, Detector))
        children = tree.children(node_id)
        if not children:
            return found
        node_id = children[0]


def dem_mechanisms(tree: ProtocolTree, noise: NoiseModel | None = None, *, terminal: str | None = None,
                   observables: list[PauliFrame] | None = None, merge: bool = True) -> list[Mechanism]:
    """Per-fault (``merge=False``) or signature-merged mechanisms of one path."""
    if tree.is_branching:
        if terminal is None:
            raise ValueError(
                f"❌ Tree '{tree.name}' branches: DEM export is per path, pass terminal= one of {tree.terminals()}"
            )
        tree = linear_path(tree, terminal)

    faults    = FaultSet(tree, noise)
    detectors = _detectors(faults.tree)
    watched   = list(observables or ([tree.observable] if tree.observable is not None else []))

    mechanisms = []
    for outcome in faults.run():
        fired = tuple(i for i, d in enumerate(detectors) if sum(outcome.record.get(l, 0) for l in d.labels) & 1)
        flips = tuple(j for j, obs in enumerate(watched) if outcome.frame.anticommutes_with(obs))
        mechanisms.append(Mechanism(outcome.fault.probability, fired, flips))
    if not merge:
        return mechanisms

    combined: dict = {}
    for m in mechanisms:
        if not m.detectors and not m.observables:
            continue
        p = combined.get(m.signature, 0.0)
        combined[m.signature] = p * (1 - m.probability) + m.probability * (1 - p)
    return [Mechanism(p, d, o) for (d, o), p in sorted(combined.items())]


def export_dem(tree: ProtocolTree, noise: NoiseModel | None = None, path: str | Path | None = None, *,
               terminal: str | None = None, observables: list[PauliFrame] | None = None) -> stim.DetectorErrorModel:
    """Merged mechanisms as a ``stim.DetectorErrorModel``; also written to ``path`` when given."""
    model = stim.DetectorErrorModel()
    for m in dem_mechanisms(tree, noise, terminal=terminal, observables=observables):
        if m.probability <= 0:
            continue
        targets = [stim.target_relative_detector_id(d) for d in m.detectors]
        targets += [stim.target_logical_observable_id(o) for o in m.observables]
        model.append("error", m.probability, targets)

    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(str(model) + "\n", encoding="utf-8")
        logger.info(f"💾 DEM for '{tree.name}' written to {path} ({model.num_errors} mechanisms)")
    return model
