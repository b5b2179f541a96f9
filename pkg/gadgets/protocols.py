"""
QEC protocols
-------------
Syndrome-extraction trees and memory experiments on one d=3 block.

  gen_se_tree(kind)        noiseless |0_L⟩ encoder, one noisy SE round, ideal readout;
                           ``meta["decode"]`` tells the table builder what to key on
  gen_protocol(kind)       one QEC round with its branching and corrections
  gen_memory(strategy, n)  noiseless encoder followed by n QEC rounds

Round strategies:

  sequential    six flagged checks S1X, S1Z, S2X, S2Z, S3X, S3Z one after the
                other on one ancilla + flag; any syndrome or flag interrupts to
                an un-flagged measurement of all six checks
  simultaneous  flagged S^X on three ancillas (+3 flags) in parallel; a trigger
                interrupts to un-flagged S^X + S^Z, a clean block continues with
                flagged S^Z (same rule)
  superdense    Bell-pair extraction of both check types; any raised bit
                repeats it once and decodes with the round-1 pattern as context
  bare          un-flagged S^X + S^Z, always corrected (not fault tolerant)

Labels of round k start with ``r{k}.``.

Usage:
    tree   = gen_memory("simultaneous", rounds=3, state="+")
    tables = superdense_tables()
"""

from __future__ import annotations

import logging
from functools import lru_cache

from circuits.circuit import Circuit
from circuits.corrections import SyndromeLookup
from circuits.instructions import FrameUpdate
from circuits.predicates import AnyOf
from circuits.protocol_tree import ACCEPT, ProtocolTree, Terminal
from decoders.lookup import LookupTable
from gadgets.se_circuits import (
    BlockLayout,
    bare_layers,
    build_circuit,
    flagged_layers,
    labels,
    plaquettes,
    sequential_layout,
    simultaneous_layout,
    superdense_layers,
    superdense_layout,
)
from gadgets.spec import check_state
from gadgets.state_prep import encoder_circuit, ideal_readout, lookup_table, state_observable

logger = logging.getLogger(__name__)

STRATEGIES     = ("sequential", "simultaneous", "superdense", "bare")
FT_STRATEGIES  = ("sequential", "simultaneous", "superdense")
DEFAULT_ROUNDS = 3

# sequential check order: (plaquette index, basis)
SEQUENTIAL_ORDER = ((0, "X"), (0, "Z"), (1, "X"), (1, "Z"), (2, "X"), (2, "Z"))


def check_strategy(strategy: str) -> str:
    if strategy not in STRATEGIES:
        raise ValueError(f"❌ Unknown QEC strategy '{strategy}'. Must be one of: {', '.join(STRATEGIES)}")
    return strategy


def strategy_layout(strategy: str) -> BlockLayout:
    if strategy == "sequential":
        return sequential_layout()
    if strategy == "superdense":
        return superdense_layout()
    return simultaneous_layout()


@lru_cache(maxsize=1)
def superdense_tables():
    """X and Z tables of the superdense decoder, built once from ``gen_se_tree("superdense")``."""
    from decoders.builder import build_superdense_table

    return build_superdense_table(gen_se_tree("superdense"))


def superdense_context(prefix: str) -> tuple[str, ...]:
    return labels(prefix, "s", "X") + labels(prefix, "s", "Z")


# ──────────────────────────────────────────────────────────────────────────────
# SYNDROME-EXTRACTION TREES (lookup-table construction)
# ──────────────────────────────────────────────────────────────────────────────

def gen_se_tree(kind: str, basis: str = "Z") -> ProtocolTree:
    """One SE round of ``kind`` after a noiseless |0_L⟩ (basis Z) or |+_L⟩ (basis X) encoder."""
    if basis not in ("X", "Z"):
        raise ValueError(f"❌ SE trees encode a Z or X eigenstate, got basis '{basis}'")
    state  = "0" if basis == "Z" else "+"
    layout = superdense_layout() if kind == "superdense" else simultaneous_layout()
    n      = layout.n_qubits
    tree   = ProtocolTree(n, f"se_{kind}", observable=state_observable(state),
                          tags=("se", "ft" if kind != "bare" else "non_ft"),
                          meta={"strategy": "simultaneous" if kind == "flagged" else kind, "blocks": 1})
    tree.add_node("encode", encoder_circuit(state, layout.data, n))

    if kind == "superdense":
        first  = superdense_layers(layout, "r1.")
        second = superdense_layers(layout, "r2.")
        context = superdense_context("r1.")
        tree.add_node("round1", build_circuit(first, n, layout.data, "superdense_round1", detectors=True))
        tree.add_node("round2", build_circuit(second, n, layout.data, "superdense_round2"),
                      Terminal(ACCEPT, ideal_readout(layout.data)))
        tree.add_node("clean", Circuit(n, name="clean"), Terminal(ACCEPT, ideal_readout(layout.data)))
        tree.chain("encode", "round1")
        tree.add_edge("round1", AnyOf(context), "round2")
        tree.add_edge("round1", ~AnyOf(context), "clean")
        decode = {"x_context": list(context), "z_context": list(context), "context_mode": "pattern"}
    else:
        if kind == "flagged":
            layers = flagged_layers("X", layout) + flagged_layers("Z", layout)
            decode = {"x_context": list(labels("", "f", "X")), "z_context": list(labels("", "f", "Z"))}
        elif kind == "bare":
            layers = bare_layers("X", layout, tag="s") + bare_layers("Z", layout, tag="s")
            decode = {}
        else:
            raise ValueError(f"❌ Unknown syndrome-extraction kind '{kind}'")
        readout = ideal_readout(layout.data, decode.get("x_context", ()), decode.get("z_context", ()))
        tree.add_node("round", build_circuit(layers, n, layout.data, f"se_{kind}", detectors=True),
                      Terminal(ACCEPT, readout))
        tree.chain("encode", "round")

    tree.meta["decode"] = {"data": list(layout.data), "checks": [list(p) for p in plaquettes()], **decode}
    return tree.check()


# ──────────────────────────────────────────────────────────────────────────────
# ROUND FACTORIES
# ──────────────────────────────────────────────────────────────────────────────

def _correction(x_syndrome, z_syndrome, data, *, x_table: LookupTable, z_table: LookupTable,
                x_context=(), z_context=(), context_mode: str = "first_raised") -> FrameUpdate:
    """X correction from the Z-check syndrome, Z correction from the X-check syndrome."""
    return FrameUpdate((
        SyndromeLookup(tuple(x_syndrome), data, "X", x_table, tuple(x_context), context_mode),
        SyndromeLookup(tuple(z_syndrome), data, "Z", z_table, tuple(z_context), context_mode),
    ), name="qec_correction")


def _unflagged_exit(tree: ProtocolTree, node_id: str, layout: BlockLayout, prefix: str, *,
                    x_context=(), z_context=(), parallel: bool = True) -> str:
    """Un-flagged S^X + S^Z, lookup corrections, accept terminal."""
    table  = lookup_table()
    layers = bare_layers("X", layout, prefix, parallel=parallel) + bare_layers("Z", layout, prefix, parallel=parallel)
    update = _correction(labels(prefix, "u", "Z"), labels(prefix, "u", "X"), layout.data,
                         x_table=table, z_table=table, x_context=x_context, z_context=z_context)
    circuit = build_circuit(layers, tree.n_qubits, layout.data, f"{prefix}unflagged", detectors=True, extra=(update,))
    tree.add_node(node_id, circuit, Terminal(ACCEPT))
    return node_id


def _exit(tree: ProtocolTree, node_id: str) -> str:
    tree.add_node(node_id, Circuit(tree.n_qubits, name="round_done"), Terminal(ACCEPT))
    return node_id


def simultaneous_round(tree: ProtocolTree, k: int, node_prefix: str = "") -> str:
    layout = simultaneous_layout()
    lp     = f"r{k}."
    sx, fx = labels(lp, "s", "X"), labels(lp, "f", "X")
    sz, fz = labels(lp, "s", "Z"), labels(lp, "f", "Z")

    half_x = flagged_layers("X", layout, lp)
    half_z = flagged_layers("Z", layout, lp)
    root   = f"{node_prefix}r{k}_sx"
    tree.add_node(root, build_circuit(half_x, tree.n_qubits, layout.data, f"{lp}flagged_x", detectors=True))
    tree.add_node(f"{node_prefix}r{k}_sz",
                  build_circuit(half_z, tree.n_qubits, layout.data, f"{lp}flagged_z", detectors=True))
    _unflagged_exit(tree, f"{node_prefix}r{k}_ux", layout, lp, x_context=fx)
    _unflagged_exit(tree, f"{node_prefix}r{k}_uz", layout, lp, x_context=fx, z_context=fz)
    _exit(tree, f"{node_prefix}r{k}_ok")

    trigger_x, trigger_z = AnyOf(sx + fx), AnyOf(sz + fz)
    tree.add_edge(root, trigger_x, f"{node_prefix}r{k}_ux")
    tree.add_edge(root, ~trigger_x, f"{node_prefix}r{k}_sz")
    tree.add_edge(f"{node_prefix}r{k}_sz", trigger_z, f"{node_prefix}r{k}_uz")
    tree.add_edge(f"{node_prefix}r{k}_sz", ~trigger_z, f"{node_prefix}r{k}_ok")
    return root


def sequential_round(tree: ProtocolTree, k: int, node_prefix: str = "") -> str:
    layout = sequential_layout()
    lp     = f"r{k}."
    syn    = {"X": labels(lp, "s", "X"), "Z": labels(lp, "s", "Z")}
    flags  = {"X": labels(lp, "f", "X"), "Z": labels(lp, "f", "Z")}
    ids    = [f"{node_prefix}r{k}_s{i + 1}{basis.lower()}" for i, basis in SEQUENTIAL_ORDER]
    done   = _exit(tree, f"{node_prefix}r{k}_ok")

    for step, ((i, basis), node_id) in enumerate(zip(SEQUENTIAL_ORDER, ids)):
        layers = flagged_layers(basis, layout, lp, parallel=False, only=(i,))
        tree.add_node(node_id, build_circuit(layers, tree.n_qubits, layout.data, f"{lp}s{i + 1}{basis.lower()}",
                                             detectors=True))
        # flags of checks not yet measured keep their context slot but never fire
        seen      = SEQUENTIAL_ORDER[: step + 1]
        x_context = tuple(flags["X"][j] if (j, "X") in seen else None for j in range(3))
        z_context = tuple(flags["Z"][j] if (j, "Z") in seen else None for j in range(3))
        _unflagged_exit(tree, f"{node_id}_u", layout, lp, x_context=x_context, z_context=z_context, parallel=False)

    for step, ((i, basis), node_id) in enumerate(zip(SEQUENTIAL_ORDER, ids)):
        trigger = AnyOf((syn[basis][i], flags[basis][i]))
        tree.add_edge(node_id, trigger, f"{node_id}_u")
        tree.add_edge(node_id, ~trigger, ids[step + 1] if step + 1 < len(ids) else done)
    return ids[0]


def bare_round(tree: ProtocolTree, k: int, node_prefix: str = "") -> str:
    return _unflagged_exit(tree, f"{node_prefix}r{k}_bare", simultaneous_layout(), f"r{k}.")


def superdense_round(tree: ProtocolTree, k: int, node_prefix: str = "") -> str:
    layout  = superdense_layout()
    first   = f"r{k}."
    second  = f"r{k}b."
    context = superdense_context(first)
    tables  = superdense_tables()

    root = f"{node_prefix}r{k}_sd"
    tree.add_node(root, build_circuit(superdense_layers(layout, first), tree.n_qubits, layout.data,
                                      f"{first}superdense", detectors=True))
    update = _correction(labels(second, "s", "Z"), labels(second, "s", "X"), layout.data,
                         x_table=tables.x, z_table=tables.z, x_context=context, z_context=context,
                         context_mode="pattern")
    repeat = build_circuit(superdense_layers(layout, second), tree.n_qubits, layout.data, f"{second}superdense",
                           detectors=True, extra=(update,))
    tree.add_node(f"{node_prefix}r{k}_sd2", repeat, Terminal(ACCEPT))
    _exit(tree, f"{node_prefix}r{k}_ok")
    tree.add_edge(root, AnyOf(context), f"{node_prefix}r{k}_sd2")
    tree.add_edge(root, ~AnyOf(context), f"{node_prefix}r{k}_ok")
    return root


ROUNDS = {
    "sequential":   sequential_round,
    "simultaneous": simultaneous_round,
    "superdense":   superdense_round,
    "bare":         bare_round,
}


def round_factory(strategy: str, k: int):
    """``ProtocolTree.then`` factory adding QEC round ``k`` of ``strategy``."""
    build = ROUNDS[check_strategy(strategy)]
    return lambda tree, terminal_id, prefix: build(tree, k, prefix)


# ──────────────────────────────────────────────────────────────────────────────
# PROTOCOLS
# ──────────────────────────────────────────────────────────────────────────────

def set_readout(tree: ProtocolTree, readout) -> ProtocolTree:
    """Attach ``readout`` to every accept terminal."""
    for node in tree.nodes.values():
        if node.terminal is not None and node.terminal.kind == ACCEPT:
            node.terminal = Terminal(ACCEPT, readout)
    return tree


def gen_memory(strategy: str, rounds: int | None = None, state: str = "0") -> ProtocolTree:
    """Noiseless encoding of ``state``, ``rounds`` QEC rounds of ``strategy``, ideal readout."""
    strategy = check_strategy(strategy)
    state    = check_state(state)
    rounds   = DEFAULT_ROUNDS if rounds is None else rounds
    if rounds < 1:
        raise ValueError(f"❌ rounds must be >= 1, got {rounds}")

    layout = strategy_layout(strategy)
    tree   = ProtocolTree(layout.n_qubits, f"memory_{strategy}_{state}_r{rounds}", observable=state_observable(state),
                          tags=("ft" if strategy in FT_STRATEGIES else "non_ft", "memory"),
                          meta={"strategy": strategy, "blocks": 1, "rounds": rounds, "state": state,
                                "data": list(layout.data)})
    tree.add_node("encode", encoder_circuit(state, layout.data, layout.n_qubits), Terminal(ACCEPT))
    for k in range(1, rounds + 1):
        tree.then(round_factory(strategy, k))
    set_readout(tree, ideal_readout(layout.data))
    logger.info(f"🔷 Memory '{tree.name}': {len(tree)} nodes, {len(tree.terminals())} terminals")
    return tree.check()


def gen_protocol(kind: str, state: str = "0") -> ProtocolTree:
    """One QEC round of ``kind`` (sequential or simultaneous scheduling) on an encoded block."""
    tree      = gen_memory(kind, rounds=1, state=state)
    tree.name = f"protocol_{kind}_{check_state(state)}"
    tree.tags.add("protocol")
    return tree
