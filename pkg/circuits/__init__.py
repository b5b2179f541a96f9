"""
Circuits - circuit IR, protocol trees, branching execution and validation
"""

from circuits.circuit import Circuit, CircuitBuilder
from circuits.corrections import CorrectionRule, LookupCorrection, ParityPauli, apply_rules
from circuits.executor import (
    DenseExecutor,
    ExecutionResult,
    FaultLocation,
    TerminalBatch,
    TerminalResult,
    execute_tree,
    inject_fault,
    logical_outcome,
)
from circuits.instructions import Detector, FrameUpdate, Idle, Measure, Noise, Reset, Tick
from circuits.predicates import (
    ALWAYS,
    NEVER,
    AnyOf,
    Bit,
    Differ,
    Parity,
    PatternIn,
    Predicate,
    RecordView,
    none_of,
)
from circuits.protocol_tree import (
    ACCEPT,
    DISCARD,
    IdealReadout,
    ProtocolTree,
    ReadoutBlock,
    Terminal,
    single_node_tree,
)
from circuits.serialization import dump_tree, load_tree, tree_from_dict, tree_to_dict
from circuits.validation import ValidationReport, validate_tree

__all__ = [
    "ACCEPT",
    "ALWAYS",
    "AnyOf",
    "Bit",
    "Circuit",
    "CircuitBuilder",
    "CorrectionRule",
    "DISCARD",
    "DenseExecutor",
    "Detector",
    "Differ",
    "ExecutionResult",
    "FaultLocation",
    "FrameUpdate",
    "IdealReadout",
    "Idle",
    "LookupCorrection",
    "Measure",
    "NEVER",
    "Noise",
    "Parity",
    "ParityPauli",
    "PatternIn",
    "Predicate",
    "ProtocolTree",
    "ReadoutBlock",
    "RecordView",
    "Reset",
    "Terminal",
    "TerminalBatch",
    "TerminalResult",
    "Tick",
    "ValidationReport",
    "apply_rules",
    "dump_tree",
    "execute_tree",
    "inject_fault",
    "load_tree",
    "logical_outcome",
    "none_of",
    "single_node_tree",
    "tree_from_dict",
    "tree_to_dict",
    "validate_tree",
]
