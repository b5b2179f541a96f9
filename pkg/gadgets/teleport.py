"""
Logical teleportation
---------------------
Teleport a d=3 block (source, qubits 0-6) into a fresh |0_L⟩ block
(destination, 7-13) by measuring the joint X_L¹X_L² (merge), then the
destination's Z checks and the source transversally in Z (split).  The
destination ends in X^b Z^a |ψ⟩; both Paulis are applied as frame updates.

Qubits (28):

    0-6    source data          14-16 / 17-19   source ancillas / flags
    7-13   destination data     20-22 / 23-25   destination ancillas / flags
    26, 27 surgery ancillas (lattice surgery: w4, w2; direct: J ancilla, J flag)

Merge (lattice surgery)
  w4 = X4¹X5¹X4²X5² and w2 = X6¹X6² each measured twice (surgery ancillas
  reset between repetitions).  Agreement keeps the first value; a
  disagreement measures a third time and marks the fault as spent.  Then:

    spent            un-flagged S^X on both blocks, Z corrections, a = stored
                     values corrected by the decoded Z error on the boundary
    clean            flagged S^X on both blocks, nothing raised: a = stored
    triggered        un-flagged S^X; a decoded Z error on the w4 (w2) boundary
                     re-measures w4 (w2) to tell whether it happened before or
                     after the merge; anything else keeps the stored value

Split
  Flagged S^Z on both blocks.  The boundary plaquettes P3¹, P3² were fused
  into W8 during the merge, so only their parity is a detector; a trigger
  repeats S^Z un-flagged.  The source is measured in Z and ``SplitDecoder``
  produces the destination's X correction and X_L^b.

Direct joint measurement
  One flagged weight-6 check J measures X_L¹X_L² at once.  Measured once it
  is not fault tolerant; ``repeated=True`` applies the same repeat rule as
  the merge above.

Usage:
    tree = gen_teleport_ls("+i")
    bell = gen_teleport_ls("0", halt_before_split=True)
    tree = gen_teleport_direct(repeated=True, state="-")
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from circuits.circuit import Circuit, CircuitBuilder
from circuits.corrections import ConditionalPauli, SyndromeLookup
from circuits.instructions import Detector, FrameUpdate, Measure
from circuits.predicates import ALWAYS, AnyOf, Parity, PatternIn, Predicate, Xor
from circuits.protocol_tree import ACCEPT, ProtocolTree, Terminal
from codes.merged_code import merge_codes
from decoders.split import SplitDecoder
from engine.pauli_frame import PauliFrame
from gadgets.protocols import set_readout
from gadgets.se_circuits import (
    BlockLayout,
    bare_check,
    bare_layers,
    color_code,
    detectors_for,
    flagged_check,
    flagged_layers,
    labels,
    merge_layers,
)
from gadgets.spec import check_state
from gadgets.state_prep import add_stabilizer_prep, add_verified_prep, ideal_readout, lookup_table, state_observable

logger = logging.getLogger(__name__)

N_QUBITS    = 28
SOURCE      = BlockLayout(tuple(range(0, 7)), (14, 15, 16), (17, 18, 19))
DESTINATION = BlockLayout(tuple(range(7, 14)), (20, 21, 22), (23, 24, 25))
SURGERY     = (26, 27)
BOTH_BLOCKS = SOURCE.data + DESTINATION.data

# states the stabilizer-based preparation serves (verified prep is not FT for them)
STABILIZER_SOURCES = ("+i", "-i")


@dataclass(frozen=True)
class JointPart:
    """One X-type boundary check of the merge, measured on a surgery ancilla (+ optional flag)."""

    name:    str
    support: tuple[int, ...]
    ancilla: int
    flag:    int | None = None

    @property
    def boundary(self) -> frozenset[int]:
        return frozenset(q % 7 for q in self.support)

    def flag_labels(self, measured: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(f"{label}f" for label in measured) if self.flag is not None else ()

    def layers(self, label: str) -> list[list]:
        if self.flag is None:
            return bare_check("X", self.support, self.ancilla, label, random=True)
        return flagged_check("X", self.support, self.ancilla, self.flag, label, f"{label}f", random=True)


def _interleaved(support) -> tuple[int, ...]:
    """Boundary qubits block by block: 4¹, 4², 5¹, 5², …"""
    return tuple(sorted(support, key=lambda q: (q % 7, q)))


def lattice_surgery_parts() -> tuple[JointPart, JointPart]:
    merged = merge_codes(color_code(3), color_code(3))
    return (
        JointPart("w4", _interleaved(merged.w4), SURGERY[0]),
        JointPart("w2", _interleaved(merged.w2), SURGERY[1]),
    )


def direct_part() -> JointPart:
    merged = merge_codes(color_code(3), color_code(3))
    return JointPart("J", _interleaved(merged.w4 | merged.w2), SURGERY[0], SURGERY[1])


@dataclass(frozen=True)
class ExitContext:
    """Labels a merge exit hands to the split decoder."""

    source:      tuple[str | None, ...] = ()
    destination: tuple[str | None, ...] = ()
    hooks:       tuple[str, ...] = ()


# ──────────────────────────────────────────────────────────────────────────────
# MERGE
# ──────────────────────────────────────────────────────────────────────────────

@dataclass
class _Merge:
    """Builds the merge subtree; records what every exit needs for the split."""

    parts:    tuple[JointPart, ...]
    repeated: bool = True
    exits:    dict[str, ExitContext] = field(default_factory=dict)

    @property
    def z_logical_destination(self) -> PauliFrame:
        return color_code(3).logical_operator("Z", offset=7)

    def _measure(self, tree: ProtocolTree, node_id: str, part: JointPart, measured: tuple[str, ...],
                 extra=(), terminal: Terminal | None = None) -> str:
        builder = CircuitBuilder(tree.n_qubits, live=BOTH_BLOCKS, name=f"measure_{part.name}")
        for label in measured:
            builder.layers(*part.layers(label))
        if len(measured) == 2:
            builder.add(Detector(measured, name=f"{measured[0]}^{measured[1]}"))
        builder.add(*extra)
        tree.add_node(node_id, builder.build(), terminal)
        return node_id

    def _z_corrections(self, ux_source: tuple[str, ...], ux_destination: tuple[str, ...]) -> tuple:
        table = lookup_table()
        return (
            SyndromeLookup(ux_source, SOURCE.data, "Z", table),
            SyndromeLookup(ux_destination, DESTINATION.data, "Z", table),
        )

    def _boundary_hit(self, bits: tuple[int, ...]) -> int | None:
        """Index of the part whose boundary holds the decoded Z error (source block first)."""
        table = lookup_table()
        for block in (bits[:3], bits[3:]):
            if any(block):
                fix = table.decode(block, 0)
                for index, part in enumerate(self.parts):
                    if fix & part.boundary:
                        return index
                return None
        return None

    def _boundary_parity(self, bits: tuple[int, ...]) -> bool:
        """The decoded Z corrections of both blocks flip the stored joint value."""
        table  = lookup_table()
        joint  = frozenset().union(*(part.boundary for part in self.parts))
        return bool(sum(len(table.decode(block, 0) & joint) for block in (bits[:3], bits[3:])) & 1)

    # ── steps ────────────────────────────────────────────────────────────

    def build(self, tree: ProtocolTree, node_prefix: str) -> str:
        return self._step(tree, 0, node_prefix, (), spent=False, hooks=())

    def _step(self, tree: ProtocolTree, j: int, node_prefix: str, stored: tuple[str, ...], *,
              spent: bool, hooks: tuple[str, ...]) -> str:
        if j == len(self.parts):
            return self._finish_spent(tree, node_prefix, stored, hooks) if spent else \
                   self._finish(tree, node_prefix, stored, hooks)

        part = self.parts[j]
        node = f"{node_prefix}{part.name}"
        base = f"mg.{part.name}_"
        if spent or not self.repeated:
            once = (f"{base}1",)
            self._measure(tree, node, part, once)
            rest = self._step(tree, j + 1, f"{node}.", stored + once, spent=spent,
                              hooks=hooks + part.flag_labels(once))
            tree.add_edge(node, ALWAYS, rest)
            return node

        twice = (f"{base}1", f"{base}2")
        third = (f"{base}3",)
        flags = part.flag_labels(twice)
        agree: Predicate = Parity(twice, value=0)
        if flags:
            agree = agree & ~AnyOf(flags)

        self._measure(tree, node, part, twice)
        kept = self._step(tree, j + 1, f"{node}_ok.", stored + twice[:1], spent=False, hooks=hooks + flags)
        self._measure(tree, f"{node}_3", part, third)
        rest = self._step(tree, j + 1, f"{node}_3.", stored + third, spent=True,
                          hooks=hooks + flags + part.flag_labels(third))
        tree.add_edge(f"{node}_3", ALWAYS, rest)
        tree.add_edge(node, agree, kept)
        tree.add_edge(node, ~agree, f"{node}_3")
        return node

    def _joint_update(self, a: Predicate) -> ConditionalPauli:
        return ConditionalPauli(a, self.z_logical_destination)

    def _finish_spent(self, tree: ProtocolTree, node_prefix: str, stored: tuple[str, ...],
                      hooks: tuple[str, ...]) -> str:
        """One fault already happened: un-flagged S^X, the stored values were measured after it."""
        ux1, ux2 = labels("mg.b1.", "u", "X"), labels("mg.b2.", "u", "X")
        layers   = merge_layers(bare_layers("X", SOURCE, "mg.b1."), bare_layers("X", DESTINATION, "mg.b2."))
        a        = Xor((Parity(stored, 1), PatternIn.from_function(ux1 + ux2, self._boundary_parity)))
        update   = FrameUpdate(self._z_corrections(ux1, ux2) + (self._joint_update(a),), name="merge_spent")
        node_id  = f"{node_prefix}spent"
        circuit  = CircuitBuilder(tree.n_qubits, live=BOTH_BLOCKS, name="merge_spent").layers(*layers)
        tree.add_node(node_id, circuit.add(*detectors_for(layers), update).build(), Terminal(ACCEPT))
        self.exits[node_id] = ExitContext(hooks=hooks)
        return node_id

    def _finish(self, tree: ProtocolTree, node_prefix: str, stored: tuple[str, ...], hooks: tuple[str, ...]) -> str:
        sx1, fx1 = labels("mg.b1.", "s", "X"), labels("mg.b1.", "f", "X")
        sx2, fx2 = labels("mg.b2.", "s", "X"), labels("mg.b2.", "f", "X")
        ux1, ux2 = labels("mg.b1.", "u", "X"), labels("mg.b2.", "u", "X")
        context  = ExitContext(fx1, fx2, hooks)

        flagged = merge_layers(flagged_layers("X", SOURCE, "mg.b1."), flagged_layers("X", DESTINATION, "mg.b2."))
        root    = f"{node_prefix}fsx"
        circuit = CircuitBuilder(tree.n_qubits, live=BOTH_BLOCKS, name="merge_flagged_sx").layers(*flagged)
        tree.add_node(root, circuit.add(*detectors_for(flagged)).build())

        clean = f"{node_prefix}clean"
        tree.add_node(clean, CircuitBuilder(tree.n_qubits, name="merge_clean")
                      .add(FrameUpdate((self._joint_update(Parity(stored, 1)),), name="merge_clean")).build(),
                      Terminal(ACCEPT))
        self.exits[clean] = context

        unflagged = merge_layers(bare_layers("X", SOURCE, "mg.b1."), bare_layers("X", DESTINATION, "mg.b2."))
        check     = f"{node_prefix}usx"
        circuit   = CircuitBuilder(tree.n_qubits, live=BOTH_BLOCKS, name="merge_unflagged_sx").layers(*unflagged)
        tree.add_node(check, circuit.add(*detectors_for(unflagged)).build())

        trigger = AnyOf(sx1 + fx1 + sx2 + fx2)
        tree.add_edge(root, trigger, check)
        tree.add_edge(root, ~trigger, clean)

        corrections = self._z_corrections(ux1, ux2)
        keep = f"{node_prefix}keep"
        tree.add_node(keep, Circuit(tree.n_qubits, [FrameUpdate(corrections + (self._joint_update(Parity(stored, 1)),),
                                                                name="merge_keep")], "merge_keep"), Terminal(ACCEPT))
        self.exits[keep] = context
        tree.add_edge(check, PatternIn.from_function(ux1 + ux2, lambda bits: self._boundary_hit(bits) is None), keep)

        for index, part in enumerate(self.parts):
            again  = (f"mg.{part.name}_r",)
            others = tuple(label for label in stored if not label.startswith(f"mg.{part.name}_"))
            # the re-measured value still carries the decoded error: a = others ⊕ again ⊕ 1
            a      = Parity(others + again, value=0)
            update = FrameUpdate(corrections + (self._joint_update(a),), name=f"merge_remeasure_{part.name}")
            node   = self._measure(tree, f"{node_prefix}re_{part.name}", part, again, extra=(update,),
                                   terminal=Terminal(ACCEPT))
            self.exits[node] = ExitContext(fx1, fx2, hooks + part.flag_labels(again))
            hit = PatternIn.from_function(ux1 + ux2, lambda bits, index=index: self._boundary_hit(bits) == index)
            tree.add_edge(check, hit, node)
        return root


# ──────────────────────────────────────────────────────────────────────────────
# SPLIT
# ──────────────────────────────────────────────────────────────────────────────

def _split(tree: ProtocolTree, node_prefix: str, context: ExitContext, *, fused_boundary: bool) -> str:
    random   = (2,) if fused_boundary else False
    sz1, fz1 = labels("sp.b1.", "s", "Z"), labels("sp.b1.", "f", "Z")
    sz2, fz2 = labels("sp.b2.", "s", "Z"), labels("sp.b2.", "f", "Z")
    uz1, uz2 = labels("sp.b1.", "u", "Z"), labels("sp.b2.", "u", "Z")
    measured = tuple(f"sp.m{q}" for q in SOURCE.data)

    flagged = merge_layers(flagged_layers("Z", SOURCE, "sp.b1.", random=random),
                           flagged_layers("Z", DESTINATION, "sp.b2.", random=random))
    checks  = detectors_for(flagged)
    if fused_boundary:
        checks.append(Detector((sz1[2], sz2[2]), name="W8"))
        trigger = AnyOf(sz1[:2] + sz2[:2] + fz1 + fz2) | Parity((sz1[2], sz2[2]), 1)
    else:
        trigger = AnyOf(sz1 + sz2 + fz1 + fz2)

    root = f"{node_prefix}ssz"
    tree.add_node(root, CircuitBuilder(tree.n_qubits, live=BOTH_BLOCKS, name="split_flagged_sz")
                  .layers(*flagged).add(*checks).build())

    def decoder(syndrome: tuple[str, ...]) -> FrameUpdate:
        rule = SplitDecoder(measured, syndrome, DESTINATION.data, lookup_table(),
                            source_context=context.source, destination_context=context.destination,
                            hook_labels=context.hooks, shared_w8=fused_boundary)
        return FrameUpdate((rule,), name="split_decode")

    source_readout = [Measure(q, "Z", label, True) for q, label in zip(SOURCE.data, measured)]

    done = f"{node_prefix}done"
    builder = CircuitBuilder(tree.n_qubits, live=BOTH_BLOCKS, name="split_measure_source")
    builder.layer(*source_readout)
    tree.add_node(done, builder.add(decoder(sz2)).build(), Terminal(ACCEPT))

    repeat   = f"{node_prefix}usz"
    bare     = merge_layers(bare_layers("Z", SOURCE, "sp.b1.", random=random),
                            bare_layers("Z", DESTINATION, "sp.b2.", random=random))
    builder  = CircuitBuilder(tree.n_qubits, live=BOTH_BLOCKS, name="split_unflagged_sz").layers(*bare)
    builder.add(*[Detector((u, s), name=f"{u}^{s}") for u, s in zip(uz1 + uz2, sz1 + sz2)])
    builder.layer(*source_readout)
    tree.add_node(repeat, builder.add(decoder(uz2)).build(), Terminal(ACCEPT))

    tree.add_edge(root, trigger, repeat)
    tree.add_edge(root, ~trigger, done)
    return root


# ──────────────────────────────────────────────────────────────────────────────
# PIPELINE
# ──────────────────────────────────────────────────────────────────────────────

def _prepare(tree: ProtocolTree, state: str) -> None:
    if state in STABILIZER_SOURCES:
        add_stabilizer_prep(tree, state, layout=SOURCE, node_prefix="src.", label_prefix="src.")
    else:
        add_verified_prep(tree, state, data=SOURCE.data, flag=SOURCE.flags[0], node_prefix="src.",
                          label_prefix="src.")
    tree.then(lambda t, terminal_id, prefix: add_verified_prep(
        t, "0", data=DESTINATION.data, flag=DESTINATION.flags[0], node_prefix=prefix, label_prefix="dst.",
        idle=SOURCE.data,
    ))


def _teleport(name: str, state: str, merge: _Merge, *, fused_boundary: bool, halt_before_split: bool,
              tags: tuple[str, ...]) -> ProtocolTree:
    state = check_state(state)
    meta  = {"state": state, "strategy": "simultaneous", "blocks": 2, "context": "teleport",
             "surgery": len(SURGERY), "data": list(DESTINATION.data)}
    if halt_before_split:
        bell = color_code(3).logical_operator("X") * color_code(3).logical_operator("X", offset=7)
        tree = ProtocolTree(N_QUBITS, f"{name}_{state}_bell", observable=bell, tags=tags + ("bell_pair",), meta=meta)
    else:
        tree = ProtocolTree(N_QUBITS, f"{name}_{state}", observable=state_observable(state, offset=7),
                            tags=tags, meta=meta)

    _prepare(tree, state)
    tree.then(lambda t, terminal_id, prefix: merge.build(t, prefix))
    if halt_before_split:
        logger.info(f"🔗 '{tree.name}': halted before the split ({len(tree.terminals())} terminals)")
        return tree.check()

    tree.then(lambda t, terminal_id, prefix: _split(t, prefix, merge.exits[terminal_id],
                                                    fused_boundary=fused_boundary))
    set_readout(tree, ideal_readout(DESTINATION.data, z_context=labels("sp.b2.", "f", "Z")))
    logger.info(f"🔗 Teleportation '{tree.name}': {len(tree)} nodes, {len(tree.terminals())} terminals")
    return tree.check()


def gen_teleport_ls(state: str = "0", halt_before_split: bool = False) -> ProtocolTree:
    """Lattice-surgery teleportation of a cardinal ``state``."""
    return _teleport("teleport_ls", state, _Merge(lattice_surgery_parts()), fused_boundary=True,
                     halt_before_split=halt_before_split, tags=("ft", "teleport"))


def gen_teleport_direct(repeated: bool = True, state: str = "0") -> ProtocolTree:
    """Teleportation through the flagged weight-6 joint measurement, once or with repetition."""
    if not repeated:
        logger.warning("⚠️ Single direct joint measurement is not fault tolerant")
    return _teleport("teleport_direct" + ("" if repeated else "_single"), state,
                     _Merge((direct_part(),), repeated=repeated), fused_boundary=False,
                     halt_before_split=False, tags=("ft" if repeated else "non_ft", "teleport"))


def gen_lattice_surgery_round() -> Circuit:
    """One w4 + w2 measurement on the surgery ancillas (transpiler section, no branching)."""
    w4, w2 = lattice_surgery_parts()
    layers = merge_layers(w4.layers("w4"), w2.layers("w2"))
    return CircuitBuilder(N_QUBITS, live=BOTH_BLOCKS, name="lattice_surgery_round").layers(*layers).build()
