"""
Syndrome-extraction circuits
----------------------------
Layer schedules for the three ways of measuring a color-code plaquette:

  bare        one ancilla, one CNOT per data qubit            (w + 2 layers)
  flagged     ancilla + flag; the two flag CNOTs surround the middle data
              CNOTs so a hook error always raises the flag      (w + 4 layers)
  superdense  Bell pair (a, b) per plaquette measuring X_P on a and Z_P on b
              at once; each ancilla catches the other's hooks    (10 layers)

X-type checks use the ancilla as CNOT control (RX / MX), Z-type checks are
the dual (data controls, ancilla target, R / M; flag in |+⟩).

Label convention, ``prefix`` + tag + basis + plaquette number:

    sx1..3 / sz1..3   flagged (or superdense) syndrome bits
    fx1..3 / fz1..3   flags
    ux1..3 / uz1..3   un-flagged (bare) syndrome bits

Usage:
    circuit = gen_se_circuit("flagged", basis="XZ")          # S^X then S^Z, parallel
    layers  = flagged_layers("X", BlockLayout(), prefix="r1.")
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import zip_longest

from circuits.circuit import Circuit, CircuitBuilder
from circuits.instructions import Detector, Measure, Reset
from codes.color_code import ColorCode, build_hex_color_code

logger = logging.getLogger(__name__)

SE_KINDS = ("bare", "flagged", "superdense")

# superdense couplings per plaquette: (data qubit, coupling layer); a → data CNOTs, data → b CNOTs
SUPERDENSE_A = (
    ((0, 0), (1, 1), (2, 2), (3, 3)),
    ((1, 0), (2, 1), (4, 2), (5, 3)),
    ((3, 0), (6, 1), (5, 2), (2, 3)),
)
SUPERDENSE_B = (
    ((0, 1), (1, 3), (2, 4), (3, 5)),
    ((1, 2), (4, 3), (5, 4), (2, 5)),
    ((2, 0), (5, 1), (3, 2), (6, 3)),
)
SUPERDENSE_COUPLING_LAYERS = 6


@lru_cache(maxsize=None)
def color_code(d: int = 3) -> ColorCode:
    return build_hex_color_code(d)


def plaquettes(code: ColorCode | None = None) -> tuple[tuple[int, ...], ...]:
    code = code or color_code(3)
    return tuple(p.qubits for p in code.plaquettes)


@dataclass(frozen=True)
class BlockLayout:
    """Qubit ids of one block: data, one syndrome ancilla and one flag per check slot, superdense partners."""

    data:     tuple[int, ...] = tuple(range(7))
    ancillas: tuple[int, ...] = (7, 8, 9)
    flags:    tuple[int, ...] = (10, 11, 12)
    partners: tuple[int, ...] = ()

    @property
    def n_qubits(self) -> int:
        return max(self.data + self.ancillas + self.flags + self.partners) + 1

    def support(self, local: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(self.data[q] for q in local)

    def shifted(self, offset: int) -> "BlockLayout":
        move = lambda qs: tuple(q + offset for q in qs)
        return BlockLayout(move(self.data), move(self.ancillas), move(self.flags), move(self.partners))


def simultaneous_layout(offset: int = 0, base: int = 7) -> BlockLayout:
    return BlockLayout(tuple(range(offset, offset + 7)), (base, base + 1, base + 2), (base + 3, base + 4, base + 5))


def sequential_layout(offset: int = 0, base: int = 7) -> BlockLayout:
    return BlockLayout(tuple(range(offset, offset + 7)), (base,), (base + 1,))


def superdense_layout(offset: int = 0, base: int = 7) -> BlockLayout:
    return BlockLayout(tuple(range(offset, offset + 7)), (base, base + 1, base + 2), (), (base + 3, base + 4, base + 5))


def labels(prefix: str, tag: str, basis: str, n: int = 3) -> tuple[str, ...]:
    return tuple(f"{prefix}{tag}{basis.lower()}{i}" for i in range(1, n + 1))


def _is_random(random: bool | tuple[int, ...], index: int) -> bool:
    """``random`` is a flag for every check or the tuple of random plaquette indices."""
    return random if isinstance(random, bool) else index in random


# ──────────────────────────────────────────────────────────────────────────────
# SINGLE CHECKS
# ──────────────────────────────────────────────────────────────────────────────

def _coupling(basis: str, ancilla: int, q: int):
    return CircuitBuilder.cnot(ancilla, q) if basis == "X" else CircuitBuilder.cnot(q, ancilla)


def _flag_coupling(basis: str, ancilla: int, flag: int):
    return CircuitBuilder.cnot(ancilla, flag) if basis == "X" else CircuitBuilder.cnot(flag, ancilla)


def bare_check(basis: str, support: tuple[int, ...], ancilla: int, label: str, *, random: bool = False) -> list[list]:
    return (
        [[Reset(ancilla, basis)]]
        + [[_coupling(basis, ancilla, q)] for q in support]
        + [[Measure(ancilla, basis, label, random)]]
    )


def flagged_check(basis: str, support: tuple[int, ...], ancilla: int, flag: int, label: str, flag_label: str,
                  *, random: bool = False) -> list[list]:
    """Flag CNOTs after the first and before the last data CNOT."""
    if len(support) < 3:
        raise ValueError(f"❌ Flagged check needs weight >= 3, got support {support}")
    flag_basis = "Z" if basis == "X" else "X"
    first, *middle, last = support
    return (
        [[Reset(ancilla, basis), Reset(flag, flag_basis)]]
        + [[_coupling(basis, ancilla, first)], [_flag_coupling(basis, ancilla, flag)]]
        + [[_coupling(basis, ancilla, q)] for q in middle]
        + [[_flag_coupling(basis, ancilla, flag)], [_coupling(basis, ancilla, last)]]
        + [[Measure(ancilla, basis, label, random), Measure(flag, flag_basis, flag_label)]]
    )


def merge_layers(*schedules: list[list]) -> list[list]:
    """Run schedules side by side, layer i of each in layer i of the result."""
    return [[op for layer in group if layer for op in layer] for group in zip_longest(*schedules)]


# ──────────────────────────────────────────────────────────────────────────────
# HALF ROUNDS
# ──────────────────────────────────────────────────────────────────────────────

def flagged_layers(basis: str, layout: BlockLayout, prefix: str = "", *, random: bool | tuple[int, ...] = False,
                   parallel: bool = True, code: ColorCode | None = None,
                   only: tuple[int, ...] | None = None) -> list[list]:
    """Flagged checks of one type; ``only`` restricts to some plaquette indices."""
    plaqs  = plaquettes(code)
    chosen = range(len(plaqs)) if only is None else only
    syn, fl = labels(prefix, "s", basis, len(plaqs)), labels(prefix, "f", basis, len(plaqs))
    checks = []
    for slot, i in enumerate(chosen):
        k = slot if parallel else 0
        checks.append(flagged_check(basis, layout.support(plaqs[i]), layout.ancillas[k], layout.flags[k],
                                    syn[i], fl[i], random=_is_random(random, i)))
    if parallel:
        return merge_layers(*checks)
    return [layer for check in checks for layer in check]


def bare_layers(basis: str, layout: BlockLayout, prefix: str = "", *, tag: str = "u",
                random: bool | tuple[int, ...] = False,
                parallel: bool = True, code: ColorCode | None = None) -> list[list]:
    plaqs  = plaquettes(code)
    names  = labels(prefix, tag, basis, len(plaqs))
    checks = [
        bare_check(basis, layout.support(p), layout.ancillas[i if parallel else 0], names[i], random=_is_random(random, i))
        for i, p in enumerate(plaqs)
    ]
    if parallel:
        return merge_layers(*checks)
    return [layer for check in checks for layer in check]


def superdense_layers(layout: BlockLayout, prefix: str = "", *, random: bool = False) -> list[list]:
    """Reset, Bell pair, six coupling layers, un-Bell, measure."""
    if len(layout.partners) != 3:
        raise ValueError("❌ Superdense extraction needs three partner ancillas in the layout")
    a, b = layout.ancillas, layout.partners
    sx, sz = labels(prefix, "s", "X"), labels(prefix, "s", "Z")
    layers = [[op for i in range(3) for op in (Reset(a[i], "X"), Reset(b[i], "Z"))]]
    layers.append([CircuitBuilder.cnot(a[i], b[i]) for i in range(3)])
    for step in range(SUPERDENSE_COUPLING_LAYERS):
        layer = []
        for i in range(3):
            layer += [CircuitBuilder.cnot(a[i], layout.data[q]) for q, t in SUPERDENSE_A[i] if t == step]
            layer += [CircuitBuilder.cnot(layout.data[q], b[i]) for q, t in SUPERDENSE_B[i] if t == step]
        layers.append(layer)
    layers.append([CircuitBuilder.cnot(a[i], b[i]) for i in range(3)])
    layers.append([op for i in range(3) for op in (Measure(a[i], "X", sx[i], random), Measure(b[i], "Z", sz[i], random))])
    return layers


def se_layers(kind: str, basis: str, layout: BlockLayout, prefix: str = "", **options) -> list[list]:
    """Layers of one strategy; ``basis`` "X", "Z" or "XZ" (X block then Z block)."""
    if kind not in SE_KINDS:
        raise ValueError(f"❌ Unknown syndrome-extraction kind '{kind}'. Must be one of: {', '.join(SE_KINDS)}")
    if kind == "superdense":
        return superdense_layers(layout, prefix, random=options.get("random", False))
    build = flagged_layers if kind == "flagged" else bare_layers
    return [layer for b in basis for layer in build(b, layout, prefix, **options)]


def detectors_for(layers: list[list]) -> list[Detector]:
    """One single-label detector per deterministic measurement."""
    return [
        Detector((op.label,), name=op.label, qubits=op.qubits)
        for layer in layers for op in layer
        if isinstance(op, Measure) and not op.random
    ]


# ──────────────────────────────────────────────────────────────────────────────
# CIRCUITS
# ──────────────────────────────────────────────────────────────────────────────

def build_circuit(layers: list[list], n_qubits: int, live, name: str, *, detectors: bool = False,
                  extra=()) -> Circuit:
    builder = CircuitBuilder(n_qubits, live=live, name=name)
    builder.layers(*layers)
    if detectors:
        builder.add(*detectors_for(layers))
    builder.add(*extra)
    return builder.build()


def gen_se_circuit(kind: str, code: ColorCode | None = None, basis: str = "XZ", *,
                   layout: BlockLayout | None = None, prefix: str = "", random: bool = False,
                   parallel: bool = True, detectors: bool = False) -> Circuit:
    """
    One syndrome-extraction round of ``kind`` on one block.  ``parallel=False``
    measures the checks one after another with a single ancilla (and flag).
    """
    code = code or color_code(3)
    if kind == "superdense":
        if code.d != 3:
            raise ValueError(f"❌ The superdense schedule exists for d=3 only, got d={code.d}")
        layout = layout or superdense_layout()
    elif layout is None:
        if parallel and code.d != 3:
            raise ValueError(f"❌ Parallel extraction schedules exist for d=3 only, use parallel=False for d={code.d}")
        layout = simultaneous_layout(0, code.n) if parallel else \
                 BlockLayout(tuple(range(code.n)), (code.n,), (code.n + 1,))
    options = dict(random=random) if kind == "superdense" else dict(random=random, parallel=parallel, code=code)
    layers  = se_layers(kind, basis, layout, prefix, **options)
    name    = f"se_{kind}_{basis.lower()}" + ("" if parallel else "_sequential")
    return build_circuit(layers, layout.n_qubits, layout.data, name, detectors=detectors)
