"""
State preparation
-----------------
Logical cardinal states of one d=3 block, as protocol trees or as subtrees
grafted into larger gadgets (teleportation source and destination).

Verified preparation
  Fan-out encoder from the leaders 0, 4, 6 (one per plaquette) followed by a
  single-flag measurement of the Z_L representative on {1, 3, 5}.  A raised
  flag discards the shot.  |1⟩, |±⟩, |±i⟩ come from transversal gates after
  verification; the S gate turns a harmless X⊗Z pair into a Y⊗Z pair, so the
  |±i⟩ variant is not fault tolerant.

Stabilizer-based preparation
  Data reset to |0…0⟩, then flagged S^X twice.  The first round fixes a
  random syndrome; a flag, or a second round that disagrees, falls back to an
  un-flagged round of all six checks.  A clean second round is projected
  onto the code space by a Z correction looked up from its syndrome.  Works
  for all six states.

Usage:
    tree = gen_prep_verified("0")
    tree = gen_prep_stabilizer("+i")
"""

from __future__ import annotations

import logging
from functools import lru_cache

from circuits.circuit import Circuit, CircuitBuilder
from circuits.corrections import SyndromeLookup
from circuits.instructions import Detector, FrameUpdate, Measure, Reset
from circuits.predicates import AnyOf, Differ
from circuits.protocol_tree import ACCEPT, DISCARD, IdealReadout, ProtocolTree, ReadoutBlock, Terminal
from decoders.lookup import LookupTable, published_table
from engine.pauli_frame import PauliFrame
from gadgets.se_circuits import BlockLayout, bare_layers, color_code, flagged_layers, labels, plaquettes, simultaneous_layout
from gadgets.spec import STATE_OBSERVABLE, check_state

logger = logging.getLogger(__name__)

ENCODER_LEADERS = (0, 4, 6)
# one matching per layer; 4 → 1 is the last CNOT of leader 4
ENCODER_LAYERS  = (
    ((0, 1), (4, 2), (6, 5)),
    ((0, 2), (4, 5), (6, 3)),
    ((0, 3), (4, 1), (6, 2)),
)
VERIFY_SUPPORT  = (1, 3, 5)

TRANSVERSAL = {
    "0":  (),
    "1":  ("X",),
    "+":  ("H",),
    "-":  ("H", "Z"),
    "+i": ("H", "S"),
    "-i": ("H", "S_DAG"),
}
NON_FT_VERIFIED = ("+i", "-i")


@lru_cache(maxsize=1)
def lookup_table() -> LookupTable:
    return published_table()


# ──────────────────────────────────────────────────────────────────────────────
# BUILDING BLOCKS
# ──────────────────────────────────────────────────────────────────────────────

def state_observable(state: str, offset: int = 0) -> PauliFrame:
    return color_code(3).logical_operator(STATE_OBSERVABLE[check_state(state)], offset)


def ideal_readout(data, x_context=(), z_context=(), context_mode: str = "first_raised",
                  table: LookupTable | None = None) -> IdealReadout:
    block = ReadoutBlock(tuple(data), plaquettes(), tuple(x_context), tuple(z_context), context_mode)
    return IdealReadout((block,), table or lookup_table())


def encoder_layers(data) -> list[list]:
    data   = tuple(data)
    resets = [Reset(data[q], "X" if q in ENCODER_LEADERS else "Z") for q in range(7)]
    return [resets] + [[CircuitBuilder.cnot(data[c], data[t]) for c, t in layer] for layer in ENCODER_LAYERS]


def transversal_layers(state: str, data) -> list[list]:
    return [[CircuitBuilder.gate(gate, q) for q in data] for gate in TRANSVERSAL[check_state(state)]]


def encoder_circuit(state: str = "0", data=tuple(range(7)), n_qubits: int | None = None, *,
                    noiseless: bool = True, name: str = "") -> Circuit:
    """Fan-out encoder plus the transversal gates of ``state``; ideal unless ``noiseless=False``."""
    data    = tuple(data)
    builder = CircuitBuilder(n_qubits or max(data) + 1, name=name or f"encode_{check_state(state)}",
                             noiseless=noiseless)
    builder.layers(*encoder_layers(data), *transversal_layers(state, data))
    return builder.build()


# ──────────────────────────────────────────────────────────────────────────────
# VERIFIED PREPARATION
# ──────────────────────────────────────────────────────────────────────────────

def add_verified_prep(tree: ProtocolTree, state: str, *, data=tuple(range(7)), flag: int = 7,
                      node_prefix: str = "", label_prefix: str = "",
                      readout: IdealReadout | None = None, idle=()) -> str:
    """
    Add the verified-prep nodes to ``tree``; returns the root id.  The accept
    terminal carries ``readout``; ``idle`` qubits hold state meanwhile.
    """
    state = check_state(state)
    data  = tuple(data)
    idle  = tuple(idle)
    label = f"{label_prefix}flag"

    builder = CircuitBuilder(tree.n_qubits, live=idle, name=f"{label_prefix}encode")
    layers  = encoder_layers(data)
    layers[0].append(Reset(flag, "Z"))
    builder.layers(*layers)
    for q in VERIFY_SUPPORT:
        builder.layer(CircuitBuilder.cnot(data[q], flag))
    builder.layer(Measure(flag, "Z", label))

    root = f"{node_prefix}encode"
    tree.add_node(root, builder.build())

    gates = CircuitBuilder(tree.n_qubits, live=data + idle, name=f"{label_prefix}gates").layers(*transversal_layers(state, data))
    tree.add_node(f"{node_prefix}accept", gates.build(), Terminal(ACCEPT, readout, data))
    tree.add_node(f"{node_prefix}discard", Circuit(tree.n_qubits, name="discard"), Terminal(DISCARD, None, data))
    tree.add_edge(root, ~AnyOf((label,)), f"{node_prefix}accept")
    tree.add_edge(root, AnyOf((label,)), f"{node_prefix}discard")
    return root


def gen_prep_verified(state: str) -> ProtocolTree:
    """Encoder + flag verification (post-selected) + transversal gates, ideal readout."""
    state = check_state(state)
    ft    = state not in NON_FT_VERIFIED
    tree  = ProtocolTree(8, f"prep_verified_{state}", observable=state_observable(state),
                         tags=("ft" if ft else "non_ft", "prep", "post_selected"),
                         meta={"state": state, "data": list(range(7))})
    add_verified_prep(tree, state, readout=ideal_readout(range(7)))
    if not ft:
        logger.warning(f"⚠️ Verified preparation of |{state}⟩ is not fault tolerant (transversal S after verification)")
    return tree.check()


# ──────────────────────────────────────────────────────────────────────────────
# STABILIZER-BASED PREPARATION
# ──────────────────────────────────────────────────────────────────────────────

def _unflagged_fallback(tree: ProtocolTree, node_id: str, state: str, layout: BlockLayout, label_prefix: str,
                        x_context: tuple[str, ...], readout: IdealReadout | None, idle: tuple[int, ...]) -> None:
    """All six checks un-flagged, then X correction (flag context of the S^X round) and Z correction."""
    ux, uz  = labels(label_prefix, "u", "X"), labels(label_prefix, "u", "Z")
    table   = lookup_table()
    builder = CircuitBuilder(tree.n_qubits, live=layout.data + idle, name=f"{label_prefix}unflagged")
    builder.layers(*bare_layers("X", layout, label_prefix, random=True), *bare_layers("Z", layout, label_prefix))
    builder.add(FrameUpdate((
        SyndromeLookup(uz, layout.data, "X", table, x_context),
        SyndromeLookup(ux, layout.data, "Z", table),
    ), name="unflagged_correction"))
    builder.layers(*transversal_layers(state, layout.data))
    tree.add_node(node_id, builder.build(), Terminal(ACCEPT, readout, layout.data))


def add_stabilizer_prep(tree: ProtocolTree, state: str, *, layout: BlockLayout | None = None,
                        node_prefix: str = "", label_prefix: str = "",
                        readout: IdealReadout | None = None, idle=()) -> str:
    """Add the two-round stabilizer-prep nodes to ``tree``; returns the root id."""
    state  = check_state(state)
    idle   = tuple(idle)
    layout = layout or simultaneous_layout()
    table  = lookup_table()
    p1, p2 = f"{label_prefix}r1.", f"{label_prefix}r2."
    sx1, fx1 = labels(p1, "s", "X"), labels(p1, "f", "X")
    sx2, fx2 = labels(p2, "s", "X"), labels(p2, "f", "X")

    first = CircuitBuilder(tree.n_qubits, live=idle, name=f"{label_prefix}round1")
    first.layer(*[Reset(q, "Z") for q in layout.data])
    first.layers(*flagged_layers("X", layout, p1, random=True))
    root = f"{node_prefix}round1"
    tree.add_node(root, first.build())

    second = CircuitBuilder(tree.n_qubits, live=layout.data + idle, name=f"{label_prefix}round2")
    second.layers(*flagged_layers("X", layout, p2, random=True))
    second.add(*[Detector((a, b), name=f"{a}^{b}") for a, b in zip(sx1, sx2)])
    tree.add_node(f"{node_prefix}round2", second.build())

    fix = CircuitBuilder(tree.n_qubits, live=layout.data + idle, name=f"{label_prefix}project")
    fix.add(FrameUpdate((SyndromeLookup(sx2, layout.data, "Z", table),), name="project"))
    fix.layers(*transversal_layers(state, layout.data))
    tree.add_node(f"{node_prefix}clean", fix.build(), Terminal(ACCEPT, readout, layout.data))

    _unflagged_fallback(tree, f"{node_prefix}unflagged1", state, layout, f"{label_prefix}u1.", fx1, readout, idle)
    _unflagged_fallback(tree, f"{node_prefix}unflagged2", state, layout, f"{label_prefix}u2.", fx2, readout, idle)

    flagged_first  = AnyOf(fx1)
    retry          = AnyOf(fx2) | Differ(sx1, sx2)
    tree.add_edge(root, flagged_first, f"{node_prefix}unflagged1")
    tree.add_edge(root, ~flagged_first, f"{node_prefix}round2")
    tree.add_edge(f"{node_prefix}round2", retry, f"{node_prefix}unflagged2")
    tree.add_edge(f"{node_prefix}round2", ~retry, f"{node_prefix}clean")
    return root


def gen_prep_stabilizer(state: str) -> ProtocolTree:
    state  = check_state(state)
    layout = simultaneous_layout()
    tree   = ProtocolTree(layout.n_qubits, f"prep_stabilizer_{state}", observable=state_observable(state),
                          tags=("ft", "prep"), meta={"state": state, "data": list(layout.data)})
    add_stabilizer_prep(tree, state, layout=layout, readout=ideal_readout(layout.data))
    logger.debug(f"🔧 Stabilizer-based preparation of |{state}⟩: {len(tree)} nodes")
    return tree.check()
