"""
Tree serialisation
------------------
Versioned JSON form of protocol trees (``dump-gadget`` output).

Layout (version 1):

    {
      "version": 1,
      "name": str, "n_qubits": int, "root": node id,
      "observable": "X0 X1 X4" | null,
      "tags": [str], "meta": {...},
      "nodes": [
        {
          "id": str,
          "circuit": {"n_qubits": int, "name": str, "noiseless": bool,
                      "noise_tag": str | null, "instructions": [object]},
          "edges": [{"predicate": object, "target": node id}],
          "terminal": object | null
        }
      ]
    }

Every instruction, predicate, correction rule, channel, readout and lookup
table is an object ``{"type": <class name>, <field>: <value>, ...}`` whose
fields are the dataclass fields of that class; tuples and frozensets are
written as JSON lists, Pauli operators as strings such as ``"X0 Z3"``.
Parents precede children in ``nodes``.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any

from circuits.circuit import Circuit
from circuits.corrections import ConditionalPauli, LookupCorrection, ParityPauli, SyndromeLookup
from circuits.instructions import Detector, FrameUpdate, Idle, Measure, Noise, Reset, Tick
from circuits.predicates import All, AnyOf, Any_, Bit, Const, Differ, Not, Parity, PatternIn, Xor
from circuits.protocol_tree import IdealReadout, ProtocolTree, ReadoutBlock, Terminal
from decoders.lookup import LookupTable
from engine.gates import CliffordAction
from engine.pauli_frame import PauliFrame
from noise.channels import NoiseChannel

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

_CORE_TYPES = (
    CliffordAction, Reset, Measure, Noise, Idle, Tick, Detector, FrameUpdate,
    Const, Bit, Parity, AnyOf, Differ, PatternIn, Not, All, Any_, Xor,
    ParityPauli, LookupCorrection, ConditionalPauli, SyndromeLookup, NoiseChannel,
    ReadoutBlock, IdealReadout, Terminal,
)


@lru_cache(maxsize=1)
def _registry() -> dict[str, type]:
    # decoder-side rules live outside circuits/ and are resolved on first use
    from decoders.split import SplitDecoder

    return {cls.__name__: cls for cls in (*_CORE_TYPES, SplitDecoder)}


# ──────────────────────────────────────────────────────────────────────────────
# ENCODING
# ──────────────────────────────────────────────────────────────────────────────

def encode(value: Any) -> Any:
    if isinstance(value, PauliFrame):
        return {"type": "PauliFrame", "pauli": "" if value.is_identity else str(value)}
    if isinstance(value, LookupTable):
        return {"type": "LookupTable", **value.to_dict()}
    if isinstance(value, enum.Enum):
        return value.value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        name = type(value).__name__
        if name not in _registry():
            raise ValueError(f"❌ Cannot serialise {name}: not a registered tree component")
        return {"type": name, **{f.name: encode(getattr(value, f.name)) for f in dataclasses.fields(value)}}
    if isinstance(value, (frozenset, set)):
        return sorted(encode(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if hasattr(value, "item"):
        return value.item()
    return value


def tree_to_dict(tree: ProtocolTree) -> dict:
    order = [node_id for node_id in _preorder(tree)]
    return {
        "version":    FORMAT_VERSION,
        "name":       tree.name,
        "n_qubits":   tree.n_qubits,
        "root":       tree.root,
        "observable": None if tree.observable is None else encode(tree.observable)["pauli"],
        "tags":       sorted(tree.tags),
        "meta":       encode(tree.meta),
        "nodes": [
            {
                "id":       node_id,
                "circuit":  _circuit_to_dict(tree.nodes[node_id].circuit),
                "edges":    [{"predicate": encode(e.predicate), "target": e.target} for e in tree.nodes[node_id].edges],
                "terminal": encode(tree.nodes[node_id].terminal),
            }
            for node_id in order
        ],
    }


def dump_tree(tree: ProtocolTree, path: str | Path | None = None) -> str:
    """JSON text of ``tree``; also written to ``path`` when given."""
    text = json.dumps(tree_to_dict(tree), indent=2, ensure_ascii=False)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"💾 Tree '{tree.name}' written to {path}")
    return text


# ──────────────────────────────────────────────────────────────────────────────
# DECODING
# ──────────────────────────────────────────────────────────────────────────────

def decode(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(decode(v) for v in value)
    if not isinstance(value, dict):
        return value
    kind = value.get("type")
    if kind is None:
        return {k: decode(v) for k, v in value.items()}
    if kind == "PauliFrame":
        return PauliFrame.from_string(value["pauli"])
    if kind == "LookupTable":
        return LookupTable.from_dict(value)
    if kind not in _registry():
        raise ValueError(f"❌ Unknown component type '{kind}' in tree file")
    return _registry()[kind](**{k: decode(v) for k, v in value.items() if k != "type"})


def tree_from_dict(data: dict) -> ProtocolTree:
    if data.get("version") != FORMAT_VERSION:
        raise ValueError(f"❌ Unsupported tree format version {data.get('version')!r} (expected {FORMAT_VERSION})")
    observable = data.get("observable")
    tree = ProtocolTree(
        data["n_qubits"],
        data["name"],
        observable = None if observable is None else PauliFrame.from_string(observable),
        tags       = data.get("tags", ()),
        meta       = data.get("meta", {}),
    )
    for item in data["nodes"]:
        tree.add_node(item["id"], _circuit_from_dict(item["circuit"]), decode(item["terminal"]))
    for item in data["nodes"]:
        for edge in item["edges"]:
            tree.add_edge(item["id"], decode(edge["predicate"]), edge["target"])
    tree.root = data["root"]
    return tree


def load_tree(path: str | Path) -> ProtocolTree:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        tree = tree_from_dict(json.load(f))
    logger.info(f"📂 Tree '{tree.name}' loaded from {path.name} ({len(tree)} nodes)")
    return tree


# ──────────────────────────────────────────────────────────────────────────────
# PRIVATE HELPERS
# ──────────────────────────────────────────────────────────────────────────────

def _circuit_to_dict(circuit: Circuit) -> dict:
    return {
        "n_qubits":     circuit.n_qubits,
        "name":         circuit.name,
        "noiseless":    circuit.noiseless,
        "noise_tag":    circuit.noise_tag,
        "instructions": [encode(ins) for ins in circuit.instructions],
    }


def _circuit_from_dict(data: dict) -> Circuit:
    return Circuit(
        n_qubits     = data["n_qubits"],
        instructions = [decode(ins) for ins in data["instructions"]],
        name         = data.get("name", ""),
        noiseless    = data.get("noiseless", False),
        noise_tag    = data.get("noise_tag"),
    )


def _preorder(tree: ProtocolTree):
    stack = [tree.root]
    while stack:
        node_id = stack.pop()
        yield node_id
        stack.extend(reversed(tree.children(node_id)))
