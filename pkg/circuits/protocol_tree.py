"""
Protocol trees
--------------
A protocol is a tree of circuits.  Every non-terminal node lists out-edges
guarded by predicates over the record; exactly one must hold for every shot.
Terminal nodes either accept the shot (the logical outcome is evaluated after
an ideal readout) or discard it (post-selection).

Measurement labels are global: a predicate, detector or frame update may use
any label measured on the path from the root to its node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Iterator

import numpy as np

from circuits.circuit import Circuit
from circuits.corrections import flag_contexts
from circuits.predicates import ALWAYS, Predicate, RecordView
from engine.pauli_frame import PauliFrame

if TYPE_CHECKING:
    from decoders.lookup import LookupTable

logger = logging.getLogger(__name__)

ACCEPT  = "accept"
DISCARD = "discard"


# ──────────────────────────────────────────────────────────────────────────────
# IDEAL READOUT
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ReadoutBlock:
    """
    One d=3 block decoded by a noiseless perfect syndrome readout.

    ``x_context`` / ``z_context`` list the record labels that select the flag
    context for correcting X / Z errors: with ``context_mode`` "first_raised"
    the context is 1 + index of the first raised label (0 if none), with
    "pattern" it is the label pattern itself.
    """

    qubits:       tuple[int, ...]
    checks:       tuple[tuple[int, ...], ...]
    x_context:    tuple[str | None, ...] = ()
    z_context:    tuple[str | None, ...] = ()
    context_mode: str = "first_raised"

    def check_matrix(self) -> np.ndarray:
        matrix = np.zeros((len(self.checks), len(self.qubits)), dtype=np.int64)
        for i, check in enumerate(self.checks):
            matrix[i, list(check)] = 1
        return matrix

    def contexts(self, view: RecordView, labels: tuple[str | None, ...]) -> np.ndarray:
        return flag_contexts(view, labels, self.context_mode)


@dataclass(frozen=True)
class IdealReadout:
    """Perfect final syndrome readout of every block, decoded with ``table``."""

    blocks: tuple[ReadoutBlock, ...]
    table:  "LookupTable"

    @property
    def data_qubits(self) -> tuple[int, ...]:
        return tuple(q for block in self.blocks for q in block.qubits)

    def corrections(self, x: np.ndarray, z: np.ndarray, view: RecordView) -> tuple[np.ndarray, np.ndarray]:
        """Correction masks (rows, n_qubits): X corrections from the X frame, Z from the Z frame."""
        cx     = np.zeros_like(x)
        cz     = np.zeros_like(z)
        lookup = self.table.corrections
        for block in self.blocks:
            qubits  = np.asarray(block.qubits)
            h       = block.check_matrix()
            weights = 1 << np.arange(len(block.checks) - 1, -1, -1)
            for frame, out, labels in ((x, cx, block.x_context), (z, cz, block.z_context)):
                syndrome = (frame[:, qubits].astype(np.int64) @ h.T) % 2
                index    = syndrome @ weights
                context  = np.minimum(block.contexts(view, labels), lookup.shape[0] - 1)
                out[:, qubits] = lookup[context, index]
        return cx, cz


# ──────────────────────────────────────────────────────────────────────────────
# TREE
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Terminal:
    kind:        str = ACCEPT
    readout:     IdealReadout | None = None
    data_qubits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in (ACCEPT, DISCARD):
            raise ValueError(f"❌ Terminal kind must be '{ACCEPT}' or '{DISCARD}', got '{self.kind}'")
        if self.readout is not None and not self.data_qubits:
            object.__setattr__(self, "data_qubits", self.readout.data_qubits)


@dataclass(frozen=True)
class Edge:
    predicate: Predicate
    target:    str


@dataclass
class Node:
    id:       str
    circuit:  Circuit
    edges:    list[Edge] = field(default_factory=list)
    terminal: Terminal | None = None

    @property
    def is_terminal(self) -> bool:
        return self.terminal is not None


class ProtocolTree:
    """Directed tree of circuits with predicate-guarded edges."""

    def __init__(self, n_qubits: int, name: str = "protocol", *, observable: PauliFrame | None = None,
                 tags: Iterable[str] = (), meta: dict | None = None):
        self.n_qubits   = n_qubits
        self.name       = name
        self.nodes:  dict[str, Node] = {}
        self.root:   str | None = None
        self.parent: dict[str, str] = {}
        self.observable = observable
        self.tags       = set(tags)
        self.meta       = dict(meta or {})

    # ──────────────────────────────────────────────────────────────────────
    # CONSTRUCTION
    # ──────────────────────────────────────────────────────────────────────

    def add_node(self, node_id: str, circuit: Circuit, terminal: Terminal | None = None) -> Node:
        if node_id in self.nodes:
            raise ValueError(f"❌ Duplicate node id '{node_id}' in tree '{self.name}'")
        if circuit.n_qubits > self.n_qubits:
            raise ValueError(f"❌ Node '{node_id}' needs {circuit.n_qubits} qubits, tree has {self.n_qubits}")
        node = Node(node_id, circuit, [], terminal)
        self.nodes[node_id] = node
        if self.root is None:
            self.root = node_id
        return node

    def add_edge(self, source: str, predicate: Predicate, target: str) -> None:
        for node_id in (source, target):
            if node_id not in self.nodes:
                raise ValueError(f"❌ Unknown node '{node_id}' in tree '{self.name}'")
        if target in self.parent or target == self.root:
            raise ValueError(f"❌ Node '{target}' already has a parent: trees cannot merge paths")
        if self.nodes[source].is_terminal:
            raise ValueError(f"❌ Terminal node '{source}' cannot have out-edges")
        self.nodes[source].edges.append(Edge(predicate, target))
        self.parent[target] = source

    def chain(self, *node_ids: str, predicate: Predicate | None = None) -> None:
        """Connect consecutive nodes with unconditional edges."""
        for source, target in zip(node_ids, node_ids[1:]):
            self.add_edge(source, predicate or ALWAYS, target)

    def then(self, factory: Callable[["ProtocolTree", str, str], str]) -> "ProtocolTree":
        """
        Graft a subtree onto every accept terminal.

        ``factory(tree, terminal_id, prefix)`` adds the subtree's nodes (ids
        starting with ``prefix``) and returns the id of its root; the terminal
        node keeps its circuit and loses its terminal status.
        """
        accepting = [n.id for n in self.nodes.values() if n.terminal and n.terminal.kind == ACCEPT]
        for node_id in accepting:
            self.nodes[node_id].terminal = None
            root = factory(self, node_id, f"{node_id}/")
            self.add_edge(node_id, ALWAYS, root)
        logger.debug(f"🔀 Tree '{self.name}': grafted onto {len(accepting)} terminal(s)")
        return self

    # ──────────────────────────────────────────────────────────────────────
    # NAVIGATION
    # ──────────────────────────────────────────────────────────────────────

    def children(self, node_id: str) -> list[str]:
        return [edge.target for edge in self.nodes[node_id].edges]

    def path_to(self, node_id: str) -> list[str]:
        path = [node_id]
        while path[-1] in self.parent:
            path.append(self.parent[path[-1]])
        return path[::-1]

    def columns(self, node_id: str, *, through: bool = True) -> dict[str, int]:
        """Record column of every label measured on the path (up to and including ``node_id``)."""
        columns: dict[str, int] = {}
        path = self.path_to(node_id)
        if not through:
            path = path[:-1]
        for nid in path:
            for label in self.nodes[nid].circuit.labels:
                columns[label] = len(columns)
        return columns

    def terminals(self) -> list[str]:
        return [n.id for n in self.nodes.values() if n.is_terminal]

    def leaves_without_terminal(self) -> list[str]:
        return [n.id for n in self.nodes.values() if not n.edges and not n.is_terminal]

    def paths(self) -> Iterator[list[str]]:
        for terminal in self.terminals():
            yield self.path_to(terminal)

    @property
    def is_branching(self) -> bool:
        return any(len(n.edges) > 1 for n in self.nodes.values())

    def circuits(self) -> Iterator[tuple[str, Circuit]]:
        for node_id, node in self.nodes.items():
            yield node_id, node.circuit

    def map_circuits(self, transform: Callable[[Circuit], Circuit], name: str | None = None) -> "ProtocolTree":
        """Copy of the tree with every node circuit transformed (noise attachment)."""
        clone = ProtocolTree(self.n_qubits, name or self.name, observable=self.observable,
                             tags=self.tags, meta=self.meta)
        for node_id, node in self.nodes.items():
            clone.add_node(node_id, transform(node.circuit), node.terminal)
        for node_id, node in self.nodes.items():
            for edge in node.edges:
                clone.add_edge(node_id, edge.predicate, edge.target)
        clone.root = self.root
        return clone

    @property
    def is_ft(self) -> bool:
        return "ft" in self.tags

    # ──────────────────────────────────────────────────────────────────────
    # WELL-FORMEDNESS
    # ──────────────────────────────────────────────────────────────────────

    def check(self) -> "ProtocolTree":
        """Structural checks: single root, every leaf terminal, labels resolvable along paths."""
        if self.root is None:
            raise ValueError(f"❌ Tree '{self.name}' is empty")
        orphans = [nid for nid in self.nodes if nid != self.root and nid not in self.parent]
        if orphans:
            raise ValueError(f"❌ Tree '{self.name}' has unreachable nodes {orphans}")
        dangling = self.leaves_without_terminal()
        if dangling:
            raise ValueError(f"❌ Tree '{self.name}' has leaves without terminal: {dangling}")
        for node_id, node in self.nodes.items():
            known = self.columns(node_id, through=False)
            node.circuit.check(known_labels=known)
            visible = self.columns(node_id)
            for edge in node.edges:
                missing = [label for label in edge.predicate.labels if label not in visible]
                if missing:
                    raise ValueError(f"❌ Edge {node_id} → {edge.target} reads unmeasured labels {missing}")
            readout = node.terminal.readout if node.terminal else None
            if readout is not None:
                for block in readout.blocks:
                    missing = [l for l in block.x_context + block.z_context if l is not None and l not in visible]
                    if missing:
                        raise ValueError(f"❌ Readout at '{node_id}' reads unmeasured labels {missing}")
        return self

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        return f"ProtocolTree('{self.name}', nodes={len(self.nodes)}, terminals={len(self.terminals())})"


def single_node_tree(circuit: Circuit, terminal: Terminal | None = None, **kwargs) -> ProtocolTree:
    """Wrap one circuit as a non-branching tree (DEM export, small tests)."""
    tree = ProtocolTree(circuit.n_qubits, name=circuit.name or "circuit", **kwargs)
    tree.add_node("root", circuit, terminal or Terminal(ACCEPT))
    return tree

