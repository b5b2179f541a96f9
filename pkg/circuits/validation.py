"""
Tree validation
---------------
Noiseless check of the all-zero-outcome assumption behind frame simulation.

A uniformly random Z is injected after every Z-basis reset and measurement
(X after X-basis ones).  These gauge letters act trivially on the prepared
state, so any measurement or detector that is deterministic in the absence
of noise must keep a zero flip bit on every randomised shot.  Outcomes that
are genuinely random (declared ``random=True``) are allowed to flip.

Two passes:
  forced   every shot is copied into every child, so every root-to-terminal
           path is checked whatever its predicates
  natural  shots follow their predicates; no shot may be discarded and no
           accepted shot may carry a logical error
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from circuits.executor import execute_tree
from circuits.instructions import Detector, Measure
from circuits.protocol_tree import ACCEPT, DISCARD, ProtocolTree
from engine.errors import PredicateError, ValidationFailure

logger = logging.getLogger(__name__)

DEFAULT_SHOTS = 10_000


@dataclass(frozen=True)
class ValidationEntry:
    """One violated expectation."""

    kind:    str
    node_id: str
    index:   int
    detail:  str
    count:   int = 0

    def __str__(self) -> str:
        where = f"{self.node_id}[{self.index}]" if self.index >= 0 else self.node_id
        return f"{self.kind:<12} {where:<36} {self.detail} ({self.count} shot(s))"


@dataclass
class ValidationReport:
    tree_name: str
    n_shots:   int
    entries:   list[ValidationEntry] = field(default_factory=list)
    paths:     int = 0

    @property
    def ok(self) -> bool:
        return not self.entries

    @property
    def first(self) -> ValidationEntry | None:
        return self.entries[0] if self.entries else None

    def raise_if_failed(self) -> "ValidationReport":
        if not self.ok:
            raise ValidationFailure(self)
        return self

    def __str__(self) -> str:
        status = "✅ valid" if self.ok else f"❌ {len(self.entries)} violation(s)"
        lines  = [f"Validation of '{self.tree_name}': {status} ({self.paths} path(s), {self.n_shots} randomised shots)"]
        lines += [f"  {entry}" for entry in self.entries]
        return "\n".join(lines)


# ──────────────────────────────────────────────────────────────────────────────
# PUBLIC API
# ──────────────────────────────────────────────────────────────────────────────

def validate_tree(tree: ProtocolTree, n_shots: int = DEFAULT_SHOTS, seed: int = 0) -> ValidationReport:
    """Gauge-randomised noiseless validation of every path of ``tree``; never raises on findings."""
    tree.check()
    report = ValidationReport(tree.name, n_shots, paths=len(tree.terminals()))
    sites  = _measurement_sites(tree)

    forced = execute_tree(tree, n_shots, seed=seed, randomize_gauge=True, route="forced")
    for batch in forced.batches:
        for label, column in batch.columns.items():
            node_id, index, random = sites[label]
            if random:
                continue
            flips = int(batch.rec[:, column].sum())
            if flips:
                report.entries.append(ValidationEntry(
                    "measurement", node_id, index, f"label '{label}' flipped on path to '{batch.node_id}'", flips))
        for node_id in tree.path_to(batch.node_id):
            for index, ins in enumerate(tree.nodes[node_id].circuit.instructions):
                if not isinstance(ins, Detector):
                    continue
                parity = np.logical_xor.reduce(batch.rec[:, [batch.columns[l] for l in ins.labels]], axis=1)
                flips  = int(parity.sum())
                if flips:
                    report.entries.append(ValidationEntry(
                        "detector", node_id, index, f"detector '{ins.name or ins.labels}' fired", flips))

    try:
        natural = execute_tree(tree, n_shots, seed=seed + 1, randomize_gauge=True)
    except PredicateError as error:
        report.entries.append(ValidationEntry("predicate", error.node_id, -1, str(error),
                                              error.n_unmatched + error.n_ambiguous))
    else:
        for batch in natural.batches:
            if batch.kind == DISCARD and batch.n_shots:
                report.entries.append(ValidationEntry("discard", batch.node_id, -1,
                                                      "noiseless shots post-selected away", batch.n_shots))
            if batch.kind == ACCEPT and tree.observable is not None and batch.ids.size:
                errors = int(batch.logical_errors(tree.observable).sum())
                if errors:
                    report.entries.append(ValidationEntry("logical", batch.node_id, -1,
                                                          f"observable {tree.observable} flipped", errors))

    report.entries = _dedupe(report.entries, tree)
    if report.ok:
        logger.info(f"🧪 ✅ Tree '{tree.name}' valid over {report.paths} path(s)")
    else:
        logger.warning(f"🧪 ⚠️ Tree '{tree.name}' failed validation: {report.first}")
    return report


# ──────────────────────────────────────────────────────────────────────────────
# PRIVATE HELPERS
# ──────────────────────────────────────────────────────────────────────────────

def _measurement_sites(tree: ProtocolTree) -> dict[str, tuple[str, int, bool]]:
    sites = {}
    for node_id, circuit in tree.circuits():
        for index, ins in enumerate(circuit.instructions):
            if isinstance(ins, Measure):
                sites[ins.label] = (node_id, index, ins.random)
    return sites


def _dedupe(entries: list[ValidationEntry], tree: ProtocolTree) -> list[ValidationEntry]:
    """Merge repeats of the same site (one per path) and order by execution position."""
    depth  = {node_id: len(tree.path_to(node_id)) for node_id in tree.nodes}
    merged: dict[tuple[str, str, int], ValidationEntry] = {}
    for entry in entries:
        key = (entry.kind, entry.node_id, entry.index)
        if key in merged:
            entry = ValidationEntry(entry.kind, entry.node_id, entry.index, merged[key].detail,
                                    merged[key].count + entry.count)
        merged[key] = entry
    return sorted(merged.values(), key=lambda e: (depth.get(e.node_id, 0), e.node_id, e.index, e.kind))
