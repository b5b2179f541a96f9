"""
Lookup-table construction
-------------------------
Builds a flag-aware lookup table from a syndrome-extraction tree by brute
force: enumerate every single fault, propagate it to the end, and record the
final data error together with its syndrome and flag context.  For each
(syndrome, context) the correction is the minimum-weight error seen (ties
broken lexicographically), reduced modulo stabilisers.

Two errors with the same signature that differ by a logical operator make
the signature ambiguous; the builder refuses with DecoderConsistencyError
instead of picking one.

The tree describes what to decode through ``tree.meta["decode"]``:

    {"data": [7 data qubits], "checks": [[local supports]],
     "x_context": [labels], "z_context": [labels], "context_mode": "first_raised" | "pattern"}

X errors are keyed by the ``x_context`` labels (flags of the X-type checks
whose hooks are X errors), Z errors by ``z_context``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from codes import gf2
from decoders.fault_enum import FaultOutcome, FaultSet
from decoders.lookup import SYNDROME_BITS, LookupTable, syndrome_key
from engine.errors import DecoderConsistencyError
from noise.models import NoiseModel

logger = logging.getLogger(__name__)

Signature = tuple[str, int]


@dataclass(frozen=True)
class DecodeSpec:
    """What ``tree.meta["decode"]`` declares."""

    data:         tuple[int, ...]
    checks:       tuple[tuple[int, ...], ...]
    x_context:    tuple[str | None, ...]
    z_context:    tuple[str | None, ...]
    context_mode: str = "first_raised"

    @classmethod
    def of(cls, tree) -> "DecodeSpec":
        meta = tree.meta.get("decode")
        if not meta:
            raise ValueError(f"❌ Tree '{tree.name}' has no meta['decode'] entry: nothing to build a table from")
        return cls(
            data         = tuple(meta["data"]),
            checks       = tuple(tuple(c) for c in meta["checks"]),
            x_context    = tuple(meta.get("x_context", ())),
            z_context    = tuple(meta.get("z_context", ())),
            context_mode = meta.get("context_mode", "first_raised"),
        )

    @property
    def n_contexts(self) -> int:
        width = max(len(self.x_context), len(self.z_context))
        return 1 << width if self.context_mode == "pattern" else width + 1

    def context(self, record: dict[str, int], labels: tuple[str | None, ...]) -> int:
        bits = [record.get(label, 0) if label is not None else 0 for label in labels]
        if self.context_mode == "pattern":
            return sum(b << i for i, b in enumerate(bits))
        raised = [i for i, b in enumerate(bits) if b]
        return raised[0] + 1 if raised else 0


@dataclass(frozen=True)
class SuperdenseTables:
    """X-error and Z-error tables of the two-round superdense decoder (context = round-1 pattern)."""

    x: LookupTable
    z: LookupTable


class _Pool:
    """Signature → candidate corrections, each reduced to its min-weight stabilizer-equivalent form."""

    def __init__(self, spec: DecodeSpec):
        self.spec       = spec
        self.stabilizer = np.zeros((len(spec.checks), len(spec.data)), dtype=np.uint8)
        for i, check in enumerate(spec.checks):
            self.stabilizer[i, list(check)] = 1
        self.group      = [frozenset(int(q) for q in np.flatnonzero(row)) for row in gf2.span(self.stabilizer)]
        self.candidates: dict[Signature, set[frozenset[int]]] = {}

    def syndrome(self, support: frozenset[int]) -> str:
        return syndrome_key(tuple(len(support & set(check)) & 1 for check in self.spec.checks))

    def reduce(self, support: frozenset[int]) -> frozenset[int]:
        return min((support ^ s for s in self.group), key=_order)

    def add(self, support: frozenset[int], context: int) -> None:
        key = (self.syndrome(support), context)
        self.candidates.setdefault(key, set()).add(self.reduce(support))

    def seed_single_qubit(self) -> None:
        for q in range(len(self.spec.data)):
            self.add(frozenset({q}), 0)

    def resolve(self) -> dict[Signature, frozenset[int]]:
        entries = {}
        for key, found in sorted(self.candidates.items()):
            ordered = sorted(found, key=_order)
            best    = ordered[0]
            if len(ordered) > 1:
                raise DecoderConsistencyError(key, best, ordered[1])
            if best:
                entries[key] = best
        return entries


def _order(support: frozenset[int]) -> tuple[int, tuple[int, ...]]:
    return len(support), tuple(sorted(support))


def _local(frame_support, data: tuple[int, ...]) -> frozenset[int]:
    position = {q: i for i, q in enumerate(data)}
    return frozenset(position[q] for q in frame_support if q in position)


def _fill(spec: DecodeSpec, outcomes: list[FaultOutcome], pool_x: _Pool, pool_z: _Pool) -> int:
    used = 0
    for outcome in outcomes:
        if not outcome.accepted:
            continue
        frame = outcome.frame
        pool_x.add(_local(frame.x_support, spec.data), spec.context(outcome.record, spec.x_context))
        pool_z.add(_local(frame.z_support, spec.data), spec.context(outcome.record, spec.z_context))
        used += 1
    return used


# ──────────────────────────────────────────────────────────────────────────────
# PUBLIC API
# ──────────────────────────────────────────────────────────────────────────────

def build_lookup(tree, noise: NoiseModel | None = None, *, name: str = "built", workers: int = 1) -> LookupTable:
    """
    One table serving X and Z errors alike; both error types feed the same
    signatures, so the self-dual tree must produce a consistent map.
    """
    spec = DecodeSpec.of(tree)
    if len(spec.checks) != SYNDROME_BITS:
        raise ValueError(f"❌ Lookup tables hold {SYNDROME_BITS}-check syndromes, tree declares {len(spec.checks)}")
    faults = FaultSet(tree, noise)
    logger.info(f"🚀 Building lookup table from '{tree.name}' ({len(faults)} single faults)")

    pool = _Pool(spec)
    pool.seed_single_qubit()
    used    = _fill(spec, faults.run(workers), pool, pool)
    entries = pool.resolve()
    table   = LookupTable(entries, n_qubits=len(spec.data), n_contexts=spec.n_contexts, name=name,
                          meta={"source": tree.name, "faults": len(faults), "accepted": used})
    logger.info(f"✅ Lookup table '{name}': {len(entries)} entries over {spec.n_contexts} contexts")
    return table


def build_superdense_table(tree, noise: NoiseModel | None = None, *, workers: int = 1) -> SuperdenseTables:
    """Tables keyed by (round-1 six-bit pattern, round-2 syndrome), one per error type."""
    spec = DecodeSpec.of(tree)
    if spec.context_mode != "pattern":
        raise ValueError(f"❌ Superdense tables use pattern contexts, tree '{tree.name}' declares '{spec.context_mode}'")
    faults = FaultSet(tree, noise)
    logger.info(f"🚀 Building superdense tables from '{tree.name}' ({len(faults)} single faults)")

    pool_x, pool_z = _Pool(spec), _Pool(spec)
    pool_x.seed_single_qubit()
    pool_z.seed_single_qubit()
    _fill(spec, faults.run(workers), pool_x, pool_z)

    tables = SuperdenseTables(
        x = LookupTable(pool_x.resolve(), len(spec.data), spec.n_contexts, name="superdense_x"),
        z = LookupTable(pool_z.resolve(), len(spec.data), spec.n_contexts, name="superdense_z"),
    )
    logger.info(f"✅ Superdense tables: {len(tables.x.entries)} X / {len(tables.z.entries)} Z entries")
    return tables


def single_fault_signatures(tree, noise: NoiseModel | None = None) -> dict[Signature, set[frozenset[int]]]:
    """Raw signature → reduced error classes (diagnostics for an inconsistent build)."""
    spec = DecodeSpec.of(tree)
    pool = _Pool(spec)
    _fill(spec, FaultSet(tree, noise).run(), pool, pool)
    return pool.candidates
