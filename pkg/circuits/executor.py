"""
Tree executor
-------------
Branching Monte Carlo execution of a protocol tree on the sparse frame engine.

Shots are simulated in fixed blocks of ``BLOCK_SIZE``.  Every noise site of
every node draws from its own RNG stream keyed by (seed, block, node, index),
so the per-shot outcome depends only on (seed, tree) and never on how blocks
are spread over worker processes.

At a branch node the surviving rows are partitioned by the satisfied
out-edge; the implicit trivial population (identity frame, zero record)
follows whichever edge the all-zero record selects.

Usage:
    result = execute_tree(tree, 100_000, noise=ScemModel(1e-3), seed=7)
    result.failures()           # logical errors on accepted shots
    result.branch_counts        # node id → shots that reached it
"""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from circuits.corrections import apply_rules
from circuits.instructions import Detector, FrameUpdate, Idle, Measure, Noise, Reset, Tick
from circuits.predicates import RecordView
from circuits.protocol_tree import ACCEPT, DISCARD, ProtocolTree
from engine.errors import PredicateError
from engine.gates import CliffordAction
from engine.pauli_frame import MeasurementRecord, PauliFrame
from engine.sampling import BLOCK_SIZE, key_of, stream
from engine.shot_store import ShotStore

logger = logging.getLogger(__name__)

ROUTES = ("natural", "forced")


# ──────────────────────────────────────────────────────────────────────────────
# RESULTS
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FaultLocation:
    """One forced fault: letter ``letter`` of the channel at ``index`` of node ``node_id``."""

    node_id: str
    index:   int
    letter:  int = 0


@dataclass
class TerminalResult:
    """Outcome of one shot: where it ended, its final frame and record, and the readout correction."""

    node_id:    str
    kind:       str
    frame:      PauliFrame
    record:     MeasurementRecord
    correction: PauliFrame
    data_qubits: tuple[int, ...] = ()


@dataclass
class TerminalBatch:
    """All shots of one block that ended at one terminal."""

    node_id:     str
    kind:        str
    ids:         np.ndarray
    x:           np.ndarray
    z:           np.ndarray
    rec:         np.ndarray
    columns:     dict[str, int]
    cx:          np.ndarray
    cz:          np.ndarray
    n_trivial:   int
    data_qubits: tuple[int, ...] = ()
    span:        tuple[int, int] = (0, 0)

    @property
    def n_shots(self) -> int:
        return int(self.ids.size) + self.n_trivial

    def logical_errors(self, observable: PauliFrame) -> np.ndarray:
        """Per explicit row: 1 when the corrected frame anticommutes with ``observable``."""
        outside = set(q for q, _ in observable) - set(self.data_qubits)
        if self.data_qubits and outside:
            raise ValueError(f"❌ Observable {observable} touches qubits {sorted(outside)} not alive at '{self.node_id}'")
        n_qubits = self.x.shape[1]
        ox, oz   = observable.to_arrays(n_qubits)
        fx, fz   = self.x ^ self.cx, self.z ^ self.cz
        parity   = (fx & oz).sum(axis=1) + (fz & ox).sum(axis=1)
        return (parity & 1).astype(bool)

    def result(self, row: int) -> TerminalResult:
        return TerminalResult(
            node_id     = self.node_id,
            kind        = self.kind,
            frame       = PauliFrame.from_arrays(self.x[row], self.z[row]),
            record      = MeasurementRecord(tuple(int(b) for b in self.rec[row])),
            correction  = PauliFrame.from_arrays(self.cx[row], self.cz[row]),
            data_qubits = self.data_qubits,
        )


@dataclass
class ExecutionResult:
    """Terminal batches of every block, in block order, plus per-node populations."""

    n_shots:       int
    batches:       list[TerminalBatch] = field(default_factory=list)
    branch_counts: Counter = field(default_factory=Counter)
    observable:    PauliFrame | None = None

    # ──────────────────────────────────────────────────────────────────────
    # COUNTS
    # ──────────────────────────────────────────────────────────────────────

    @property
    def accepted(self) -> int:
        return sum(b.n_shots for b in self.batches if b.kind == ACCEPT)

    @property
    def discarded(self) -> int:
        return sum(b.n_shots for b in self.batches if b.kind == DISCARD)

    def terminal_counts(self) -> Counter:
        counts: Counter = Counter()
        for batch in self.batches:
            counts[batch.node_id] += batch.n_shots
        return counts

    def failure_mask(self, observable: PauliFrame | None = None) -> dict[int, bool]:
        """Accepted explicit shot id → logical error bit (trivial shots never fail)."""
        observable = self.observable if observable is None else observable
        if observable is None:
            raise ValueError("❌ No observable given and the tree declares none")
        mask = {}
        for batch in self.batches:
            if batch.kind != ACCEPT or batch.ids.size == 0:
                continue
            for shot, bit in zip(batch.ids, batch.logical_errors(observable)):
                mask[int(shot)] = bool(bit)
        return mask

    def failures(self, observable: PauliFrame | None = None) -> int:
        observable = self.observable if observable is None else observable
        if observable is None:
            raise ValueError("❌ No observable given and the tree declares none")
        return int(sum(int(b.logical_errors(observable).sum()) for b in self.batches if b.kind == ACCEPT))

    @property
    def logical_error_rate(self) -> float:
        return self.failures() / self.accepted if self.accepted else 0.0

    # ──────────────────────────────────────────────────────────────────────
    # PER-SHOT ACCESS
    # ──────────────────────────────────────────────────────────────────────

    def result(self, shot: int) -> TerminalResult:
        for batch in self.batches:
            pos = int(np.searchsorted(batch.ids, shot))
            if pos < batch.ids.size and batch.ids[pos] == shot:
                return batch.result(pos)
        for batch in self.batches:
            offset, n = batch.span
            if batch.n_trivial and offset <= shot < offset + n:
                return TerminalResult(batch.node_id, batch.kind, PauliFrame(),
                                      MeasurementRecord((0,) * len(batch.columns)), PauliFrame(),
                                      batch.data_qubits)
        raise ValueError(f"❌ Shot {shot} not found in execution result")

    def merge(self, other: "ExecutionResult") -> "ExecutionResult":
        return ExecutionResult(
            n_shots       = self.n_shots + other.n_shots,
            batches       = self.batches + other.batches,
            branch_counts = self.branch_counts + other.branch_counts,
            observable    = self.observable if self.observable is not None else other.observable,
        )

    def summary(self) -> str:
        lines = [f"shots={self.n_shots} accepted={self.accepted} discarded={self.discarded}"]
        for node_id, count in sorted(self.terminal_counts().items()):
            lines.append(f"  {node_id:<40} {count}")
        return "\n".join(lines)


def logical_outcome(result: TerminalResult, observable: PauliFrame) -> int:
    """Anticommutation parity of the corrected final frame with ``observable`` (1 = logical error)."""
    outside = set(q for q, _ in observable) - set(result.data_qubits)
    if result.data_qubits and outside:
        raise ValueError(f"❌ Observable {observable} touches qubits {sorted(outside)} not alive at '{result.node_id}'")
    return int((result.frame * result.correction).anticommutes_with(observable))


# ──────────────────────────────────────────────────────────────────────────────
# EXECUTION
# ──────────────────────────────────────────────────────────────────────────────

def execute_tree(
    tree: ProtocolTree,
    n_shots: int,
    noise=None,
    seed: int = 0,
    *,
    workers: int = 1,
    randomize_gauge: bool = False,
    dense: bool = False,
    faults: list[FaultLocation] | None = None,
    route: str = "natural",
    block_size: int = BLOCK_SIZE,
) -> ExecutionResult:
    """
    Run ``n_shots`` through ``tree`` (noise attached by ``noise.attach`` when given).

    ``faults`` switches to injection mode: one shot per listed fault, channel
    rates ignored.  ``route="forced"`` copies every shot into every child so
    every path is exercised (validation only).
    """
    if route not in ROUTES:
        raise ValueError(f"❌ Unknown route '{route}', expected one of {ROUTES}")
    if faults is not None:
        n_shots = len(faults)
    if n_shots < 0:
        raise ValueError(f"❌ n_shots must be non-negative, got {n_shots}")
    if noise is not None:
        tree = noise.attach_tree(tree)
    dense = dense or randomize_gauge or faults is not None or route == "forced"

    ranges  = [(start, min(block_size, n_shots - start)) for start in range(0, n_shots, block_size)]
    options = dict(seed=seed, randomize_gauge=randomize_gauge, dense=dense, faults=faults, route=route)
    logger.debug(f"🚀 Executing '{tree.name}': {n_shots} shots in {len(ranges)} block(s), workers={workers}")

    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, [tree] * len(ranges), ranges, range(len(ranges)), [options] * len(ranges)))
    else:
        parts = [_run_block(tree, r, i, options) for i, r in enumerate(ranges)]

    result = ExecutionResult(0, observable=tree.observable)
    for part in parts:
        result = result.merge(part)
    result.n_shots = n_shots
    logger.debug(f"📊 '{tree.name}': accepted={result.accepted} discarded={result.discarded}")
    return result


def inject_fault(tree: ProtocolTree, location: FaultLocation, **kwargs) -> ExecutionResult:
    """One deterministic shot carrying exactly one forced fault."""
    return execute_tree(tree, 1, faults=[location], **kwargs)


class DenseExecutor:
    """Per-shot reference executor: every shot is an explicit row and every site a Bernoulli draw."""

    def __init__(self, tree: ProtocolTree, noise=None):
        self.tree  = tree
        self.noise = noise

    def run(self, n_shots: int, seed: int = 0) -> ExecutionResult:
        return execute_tree(self.tree, n_shots, self.noise, seed, dense=True)


# ──────────────────────────────────────────────────────────────────────────────
# PRIVATE HELPERS
# ──────────────────────────────────────────────────────────────────────────────

def _run_block(tree: ProtocolTree, span: tuple[int, int], block: int, options: dict) -> ExecutionResult:
    offset, n = span
    store     = ShotStore.dense(n, tree.n_qubits, offset=offset) if options["dense"] else \
                ShotStore(n, tree.n_qubits, offset=offset)
    faults    = _faults_by_site(options["faults"], offset, n)
    result    = ExecutionResult(n, observable=tree.observable)

    pending = [(tree.root, store)]
    while pending:
        node_id, store = pending.pop()
        node = tree.nodes[node_id]
        if store.population == 0:
            continue
        store.compact()
        columns = tree.columns(node_id)
        _run_circuit(node_id, node.circuit, store, columns, block, options, faults)
        result.branch_counts[node_id] += store.population

        if node.is_terminal:
            result.batches.append(_terminal_batch(tree, node_id, store, columns))
            continue
        children = _split(tree, node_id, store, columns, options["route"])
        pending.extend(reversed(list(zip(tree.children(node_id), children))))

    result.batches.sort(key=lambda b: (b.node_id, b.ids[0] if b.ids.size else -1))
    return result


def _faults_by_site(faults, offset: int, n: int) -> dict[tuple[str, int], list[tuple[int, int]]]:
    """(node, index) → [(local shot, letter)] for the faults of this block."""
    if faults is None:
        return {}
    by_site: dict[tuple[str, int], list[tuple[int, int]]] = {}
    for shot in range(offset, offset + n):
        fault = faults[shot]
        by_site.setdefault((fault.node_id, fault.index), []).append((shot - offset, fault.letter))
    return by_site


def _run_circuit(node_id: str, circuit, store: ShotStore, columns: dict[str, int],
                 block: int, options: dict, faults: dict) -> None:
    seed      = options["seed"]
    gauge     = options["randomize_gauge"]
    injecting = options["faults"] is not None
    node_key  = key_of(node_id)

    for index, ins in enumerate(circuit.instructions):
        if isinstance(ins, CliffordAction):
            store.apply_gate(ins)
        elif isinstance(ins, Reset):
            store.apply_reset(ins.qubit)
            if gauge:
                _randomize(store, ins.qubit, ins.basis, stream(seed, block, node_key, index, 1))
        elif isinstance(ins, Measure):
            column = store.measure(ins.qubit, ins.basis)
            if injecting:
                rows = _injected_rows(store, faults.get((node_id, index), ()))
                store.flip_record(rows, column)
            elif ins.noise is not None and ins.noise.p > 0:
                store.flip_record(store.hit_rows(ins.noise.p, stream(seed, block, node_key, index)), column)
            if gauge:
                _randomize(store, ins.qubit, ins.basis, stream(seed, block, node_key, index, 1))
        elif isinstance(ins, Noise):
            channel = ins.channel
            if injecting:
                for local, letter in faults.get((node_id, index), ()):
                    rows = _injected_rows(store, ((local, letter),))
                    if rows.size:
                        lx, lz = channel.letter_bits(letter)
                        store.xor_rows(rows, channel.qubits, lx[None, :], lz[None, :])
            elif channel.p > 0:
                rng  = stream(seed, block, node_key, index)
                rows = store.hit_rows(channel.p, rng)
                if rows.size:
                    lx, lz = channel.sample_letters(rows.size, rng)
                    store.xor_rows(rows, channel.qubits, lx, lz)
        elif isinstance(ins, FrameUpdate):
            if store.trivial:
                zero = RecordView.zeros(columns)
                if any((mx.any() or mz.any()) for mx, mz in (rule.masks(zero) for rule in ins.rules)):
                    store.materialize_all()
            apply_rules(store, ins.rules, RecordView(store.rec, columns))
        elif isinstance(ins, (Idle, Tick, Detector)):
            continue
        else:
            raise ValueError(f"❌ Unknown instruction {ins!r} in node '{node_id}'")


def _injected_rows(store: ShotStore, targets) -> np.ndarray:
    locals_ = np.array([local for local, _ in targets], dtype=np.int64)
    if locals_.size == 0:
        return locals_
    return store.rows_for_sites(locals_)


def _randomize(store: ShotStore, q: int, basis: str, rng: np.random.Generator) -> None:
    """Gauge letter stabilising the fresh state: Z after Z-basis events, X after X-basis events."""
    rows = np.flatnonzero(rng.random(store.n_rows) < 0.5)
    if rows.size == 0:
        return
    ones, nones = np.ones((rows.size, 1), bool), np.zeros((rows.size, 1), bool)
    if basis == "Z":
        store.xor_rows(rows, (q,), nones, ones)
    else:
        store.xor_rows(rows, (q,), ones, nones)


def _split(tree: ProtocolTree, node_id: str, store: ShotStore, columns: dict[str, int], route: str) -> list[ShotStore]:
    edges = tree.nodes[node_id].edges
    if route == "forced":
        return [store.copy() for _ in edges]

    view    = RecordView(store.rec, columns)
    matches = np.stack([edge.predicate.evaluate(view) for edge in edges], axis=1) if edges else \
              np.zeros((store.n_rows, 0), bool)
    hits    = matches.sum(axis=1)
    unmatched, ambiguous = int((hits == 0).sum()), int((hits > 1).sum())

    trivial_child = None
    if store.trivial and store.n_trivial:
        zero     = RecordView.zeros(columns)
        selected = [i for i, edge in enumerate(edges) if edge.predicate.evaluate(zero)[0]]
        if len(selected) == 1:
            trivial_child = selected[0]
        elif selected:
            ambiguous += store.n_trivial
        else:
            unmatched += store.n_trivial
    if unmatched or ambiguous:
        raise PredicateError(node_id, unmatched, ambiguous)

    child_of_row = np.argmax(matches, axis=1) if edges else np.zeros(store.n_rows, np.int64)
    children     = store.split(child_of_row, len(edges), trivial_child)
    logger.debug(f"🔀 Node '{node_id}': " + ", ".join(f"{e.target}={c.population}" for e, c in zip(edges, children)))
    return children


def _terminal_batch(tree: ProtocolTree, node_id: str, store: ShotStore, columns: dict[str, int]) -> TerminalBatch:
    terminal = tree.nodes[node_id].terminal
    order    = np.argsort(store.ids, kind="stable")
    x, z     = store.x[order], store.z[order]
    rec      = store.rec[order]
    if terminal.readout is not None and x.shape[0]:
        cx, cz = terminal.readout.corrections(x, z, RecordView(rec, columns))
    else:
        cx, cz = np.zeros_like(x), np.zeros_like(z)
    return TerminalBatch(
        node_id     = node_id,
        kind        = terminal.kind,
        ids         = store.ids[order],
        x           = x,
        z           = z,
        rec         = rec,
        columns     = dict(columns),
        cx          = cx,
        cz          = cz,
        n_trivial   = store.n_trivial,
        data_qubits = terminal.data_qubits,
        span        = (store.offset, store.n_shots),
    )
