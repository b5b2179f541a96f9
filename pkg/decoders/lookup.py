"""
Lookup-table decoding
---------------------
Flag-aware lookup table for the d=3 color code.  Keys are a syndrome string
(bit i = plaquette P(i+1), first character = P1) and a flag context; values
are correction supports.  One table serves both bit- and phase-flip decoding.

Contexts for the flagged table are 0 = no flag, 1/2/3 = the flag of
plaquette P1/P2/P3 raised in the first round (the lowest index wins when
several flags fire).  The superdense table reuses the same structure with the
six-bit first-round pattern as context.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from codes import gf2

logger = logging.getLogger(__name__)

DATA_VERSION    = 1
DEFAULT_PATH    = Path(__file__).resolve().parent.parent / "data" / "lookup_table.json"
SYNDROME_BITS   = 3


class FlagContext(IntEnum):
    NONE   = 0
    FIRST  = 1
    SECOND = 2
    THIRD  = 3


def syndrome_key(syndrome) -> str:
    """Normalise '010', (0, 1, 0) or an integer (P1 most significant) to the string form."""
    if isinstance(syndrome, str):
        key = syndrome.strip()
    elif isinstance(syndrome, (int, np.integer)):
        key = format(int(syndrome), f"0{SYNDROME_BITS}b")
    else:
        key = "".join(str(int(b)) for b in syndrome)
    if len(key) != SYNDROME_BITS or set(key) - {"0", "1"}:
        raise ValueError(f"❌ Syndrome must be {SYNDROME_BITS} bits, got {syndrome!r}")
    return key


@dataclass(frozen=True)
class LookupTable:
    """(syndrome, context) → correction support; absent contexts fall back to context 0."""

    entries:    Mapping[tuple[str, int], frozenset[int]]
    n_qubits:   int = 7
    n_contexts: int = 4
    name:       str = "lookup"
    meta:       dict = field(default_factory=dict, compare=False, hash=False)

    def __hash__(self) -> int:
        return hash((self.name, self.n_qubits, self.n_contexts, frozenset(self.entries.items())))

    # ──────────────────────────────────────────────────────────────────────
    # DECODING
    # ──────────────────────────────────────────────────────────────────────

    def decode(self, syndrome, context: int = 0) -> frozenset[int]:
        key = syndrome_key(syndrome)
        if key == "0" * SYNDROME_BITS:
            return frozenset()
        context = int(context)
        if not 0 <= context < self.n_contexts:
            raise ValueError(f"❌ Flag context {context} outside [0, {self.n_contexts})")
        if (key, context) in self.entries:
            return self.entries[(key, context)]
        return self.entries.get((key, 0), frozenset())

    @cached_property
    def corrections(self) -> np.ndarray:
        """Dense (n_contexts, 8, n_qubits) array indexed by the syndrome integer (P1 = MSB)."""
        dense = np.zeros((self.n_contexts, 1 << SYNDROME_BITS, self.n_qubits), dtype=bool)
        for context in range(self.n_contexts):
            for s in range(1 << SYNDROME_BITS):
                support = self.decode(s, context)
                if support:
                    dense[context, s, sorted(support)] = True
        return dense

    def rows(self) -> Iterable[tuple[str, list[frozenset[int]]]]:
        for s in range(1 << SYNDROME_BITS):
            key = syndrome_key(s)
            yield key, [self.decode(key, c) for c in range(self.n_contexts)]

    def __str__(self) -> str:
        lines = [f"{self.name}: syndrome | " + " | ".join(f"ctx {c}" for c in range(min(self.n_contexts, 4)))]
        for key, row in self.rows():
            cells = [",".join(map(str, sorted(s))) or "-" for s in row[:4]]
            lines.append(f"  {key}    | " + " | ".join(f"{c:5}" for c in cells))
        return "\n".join(lines)

    # ──────────────────────────────────────────────────────────────────────
    # SERIALISATION
    # ──────────────────────────────────────────────────────────────────────

    def to_dict(self) -> dict:
        return {
            "version":    DATA_VERSION,
            "name":       self.name,
            "n_qubits":   self.n_qubits,
            "n_contexts": self.n_contexts,
            "entries":    [
                {"syndrome": key, "context": ctx, "correction": sorted(support)}
                for (key, ctx), support in sorted(self.entries.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LookupTable":
        _check_version(data, "lookup table")
        entries = {}
        if "rows" in data:
            for key, cells in data["rows"].items():
                for ctx, support in enumerate(cells):
                    entries[(syndrome_key(key), ctx)] = frozenset(support)
        for item in data.get("entries", ()):
            entries[(syndrome_key(item["syndrome"]), int(item["context"]))] = frozenset(item["correction"])
        return cls(
            entries    = entries,
            n_qubits   = int(data.get("n_qubits", 7)),
            n_contexts = int(data.get("n_contexts", 4)),
            name       = data.get("name", "lookup"),
        )


def decode_lookup(table: LookupTable, syndrome, context: int = 0) -> frozenset[int]:
    return table.decode(syndrome, context)


def load_lookup_table(path: str | Path = DEFAULT_PATH) -> LookupTable:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    table = LookupTable.from_dict(data)
    logger.info(f"📂 Lookup table '{table.name}' loaded from {path.name}")
    return table


def published_table() -> LookupTable:
    """The published flag-aware table for the flagged d=3 syndrome extraction."""
    return load_lookup_table(DEFAULT_PATH)


def tables_equivalent(a: LookupTable, b: LookupTable, stabilizers: np.ndarray) -> tuple[bool, list[str]]:
    """
    Compare two tables entry by entry up to stabilizer (``stabilizers`` is a
    check matrix over the table's qubits).  Returns (equal, differences).
    """
    if a.n_qubits != b.n_qubits:
        return False, [f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}"]
    differences = []
    n_contexts  = max(a.n_contexts, b.n_contexts)
    for s, ctx in itertools.product(range(1 << SYNDROME_BITS), range(n_contexts)):
        key  = syndrome_key(s)
        ca   = a.decode(key, min(ctx, a.n_contexts - 1))
        cb   = b.decode(key, min(ctx, b.n_contexts - 1))
        diff = np.zeros(a.n_qubits, dtype=np.uint8)
        diff[sorted(ca ^ cb)] = 1
        if diff.any() and not gf2.in_rowspace(stabilizers, diff):
            differences.append(f"({key}, ctx {ctx}): {sorted(ca)} vs {sorted(cb)}")
    return not differences, differences


def _check_version(data: dict, what: str) -> None:
    if data.get("version") != DATA_VERSION:
        raise ValueError(f"❌ Unsupported {what} version {data.get('version')!r} (expected {DATA_VERSION})")
