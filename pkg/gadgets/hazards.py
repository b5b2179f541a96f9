"""
Transversal-S hazard
--------------------
Transversal S maps an X error to Y: an X⊗Z pair that two CSS decoders fix
independently becomes a Y⊗Z pair whose Z part has weight two.  On the d=3
code that Z part is one qubit away from a logical operator.

The gadget encodes |+_L⟩ noiselessly, injects ``fault``, optionally runs one
FT QEC round, applies transversal S (|+⟩ → |+i⟩) and runs one FT QEC round
before the ideal Y_L readout.  With the default X2 Z5 injection the run
without the early round ends in a logical error, the run with it does not.

Usage:
    tree = gen_transversal_s_hazard(qec_before_s=True)
"""

from __future__ import annotations

import logging

from circuits.circuit import CircuitBuilder
from circuits.corrections import ConditionalPauli
from circuits.instructions import FrameUpdate
from circuits.predicates import ALWAYS
from circuits.protocol_tree import ACCEPT, ProtocolTree, Terminal
from engine.pauli_frame import PauliFrame
from gadgets.protocols import round_factory, set_readout
from gadgets.se_circuits import simultaneous_layout
from gadgets.state_prep import encoder_circuit, ideal_readout, state_observable

logger = logging.getLogger(__name__)

DEFAULT_FAULT = "X2 Z5"


def _transversal_s(tree: ProtocolTree, terminal_id: str, prefix: str) -> str:
    data    = simultaneous_layout().data
    builder = CircuitBuilder(tree.n_qubits, live=data, name="transversal_s")
    builder.layer(*[CircuitBuilder.gate("S", q) for q in data])
    node_id = f"{prefix}s"
    tree.add_node(node_id, builder.build(), Terminal(ACCEPT))
    return node_id


def gen_transversal_s_hazard(fault: str | PauliFrame = DEFAULT_FAULT, qec_before_s: bool = False) -> ProtocolTree:
    """|+_L⟩, inject ``fault``, [QEC round], transversal S, QEC round, Y_L readout."""
    layout = simultaneous_layout()
    fault  = fault if isinstance(fault, PauliFrame) else PauliFrame.from_string(fault)
    name   = "s_hazard_" + ("qec_first" if qec_before_s else "s_first")
    tree   = ProtocolTree(layout.n_qubits, name, observable=state_observable("+i"),
                          tags=("hazard",), meta={"fault": str(fault), "qec_before_s": qec_before_s,
                                                  "strategy": "simultaneous", "blocks": 1})

    encode = CircuitBuilder(layout.n_qubits, name="encode_plus_with_fault", noiseless=True)
    encode.extend(encoder_circuit("+", layout.data, layout.n_qubits))
    encode.add(FrameUpdate((ConditionalPauli(ALWAYS, fault),), name="inject"))
    tree.add_node("encode", encode.build(), Terminal(ACCEPT))

    if qec_before_s:
        tree.then(round_factory("simultaneous", 1))
    tree.then(_transversal_s)
    tree.then(round_factory("simultaneous", 2))
    set_readout(tree, ideal_readout(layout.data))
    logger.info(f"🧪 Transversal-S hazard '{name}': injected {fault}")
    return tree.check()
