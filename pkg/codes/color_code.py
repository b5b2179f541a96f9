"""
Color codes
-----------
Triangular 6.6.6 color codes, CSS audits and small-code logical-weight search.

Lattice construction (odd distance d, L = 3(d-1)/2):
  rows y = 0..L, points x = y, y+2, ..., 2L-y
  a point is a plaquette centre when ((x-y)/2) mod 3 equals 2, 0, 1 for
  y mod 3 = 0, 1, 2 (colours g, b, r); every other point is a data qubit.
  Neighbours of a centre: (x±2, y) and (x±1, y±1).

The d=3 labelling is frozen to the published drawing so decoder tables and
lattice-surgery boundaries can use literal indices:

      6            P1 (b) = {0,1,2,3}
     3 .           P2 (g) = {1,2,4,5}
    . 2 5          P3 (r) = {2,3,5,6}
   0 1 . 4         Z_L = X_L = {0,1,4}
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from codes import gf2
from engine.pauli_frame import PauliFrame

logger = logging.getLogger(__name__)

_D3_LABELS = {(0, 0): 0, (2, 0): 1, (3, 1): 2, (2, 2): 3, (6, 0): 4, (5, 1): 5, (3, 3): 6}
_D3_ORDER  = ("b", "g", "r")
_COLOURS   = {0: "g", 1: "b", 2: "r"}
_CENTRE_AT = {0: 2, 1: 0, 2: 1}

MAX_EXHAUSTIVE_QUBITS = 25


@dataclass(frozen=True)
class Plaquette:
    color:  str
    qubits: tuple[int, ...]
    centre: tuple[int, int] = (0, 0)

    @property
    def weight(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class StabilizerCode:
    """CSS code given by its check supports and one logical pair."""

    n:         int
    x_checks:  tuple[frozenset[int], ...]
    z_checks:  tuple[frozenset[int], ...]
    x_logical: frozenset[int]
    z_logical: frozenset[int]
    name:      str = "css"

    @cached_property
    def hx(self) -> np.ndarray:
        return _matrix(self.x_checks, self.n)

    @cached_property
    def hz(self) -> np.ndarray:
        return _matrix(self.z_checks, self.n)

    @property
    def k(self) -> int:
        return self.n - gf2.rank(self.hx) - gf2.rank(self.hz)

    # ──────────────────────────────────────────────────────────────────────
    # SYNDROMES AND LOGICAL CLASSES
    # ──────────────────────────────────────────────────────────────────────

    def x_error_syndrome(self, support: Iterable[int]) -> tuple[int, ...]:
        """Z-check syndrome of an X-type error."""
        return tuple(len(check & set(support)) & 1 for check in self.z_checks)

    def z_error_syndrome(self, support: Iterable[int]) -> tuple[int, ...]:
        """X-check syndrome of a Z-type error."""
        return tuple(len(check & set(support)) & 1 for check in self.x_checks)

    def flips_z_logical(self, x_support: Iterable[int]) -> bool:
        return bool(len(self.z_logical & set(x_support)) & 1)

    def flips_x_logical(self, z_support: Iterable[int]) -> bool:
        return bool(len(self.x_logical & set(z_support)) & 1)

    def is_x_stabilizer(self, support: Iterable[int]) -> bool:
        return gf2.in_rowspace(self.hx, _vector(support, self.n))

    def is_z_stabilizer(self, support: Iterable[int]) -> bool:
        return gf2.in_rowspace(self.hz, _vector(support, self.n))

    def logical_class(self, frame: PauliFrame) -> tuple[int, int]:
        """(X_L flip, Z_L flip) carried by a syndrome-free frame."""
        if any(self.x_error_syndrome(frame.x_support)) or any(self.z_error_syndrome(frame.z_support)):
            raise ValueError(f"❌ Frame {frame} has a non-trivial syndrome")
        return int(self.flips_z_logical(frame.x_support)), int(self.flips_x_logical(frame.z_support))

    def logical_operator(self, basis: str, offset: int = 0) -> PauliFrame:
        """X_L, Z_L or Y_L as a frame (shifted by ``offset``)."""
        xs = [q + offset for q in self.x_logical]
        zs = [q + offset for q in self.z_logical]
        if basis == "X":
            return PauliFrame.from_supports(x_support=xs)
        if basis == "Z":
            return PauliFrame.from_supports(z_support=zs)
        if basis == "Y":
            return PauliFrame.from_supports(x_support=xs, z_support=zs)
        raise ValueError(f"❌ Unknown logical basis '{basis}'")


@dataclass(frozen=True)
class ColorCode(StabilizerCode):
    """Self-dual triangular color code."""

    d:          int = 3
    plaquettes: tuple[Plaquette, ...] = field(default_factory=tuple)
    coords:     tuple[tuple[int, int], ...] = field(default_factory=tuple)


# ──────────────────────────────────────────────────────────────────────────────
# CONSTRUCTION
# ──────────────────────────────────────────────────────────────────────────────

def build_hex_color_code(d: int) -> ColorCode:
    """Triangular color code of odd distance ``d >= 3`` on n = (3d²+1)/4 qubits."""
    if not isinstance(d, (int, np.integer)) or d < 3 or d % 2 == 0:
        raise ValueError(f"❌ Color-code distance must be odd and >= 3, got {d}")

    size    = 3 * (d - 1) // 2
    data    = []
    centres = []
    for y in range(size + 1):
        for x in range(y, 2 * size - y + 1, 2):
            if ((x - y) // 2) % 3 == _CENTRE_AT[y % 3]:
                centres.append((x, y))
            else:
                data.append((x, y))

    if d == 3:
        labels = dict(_D3_LABELS)
    else:
        labels = {p: i for i, p in enumerate(sorted(data, key=lambda p: (p[1], p[0])))}

    plaquettes = []
    for cx, cy in centres:
        around = [(cx + 2, cy), (cx - 2, cy), (cx + 1, cy + 1), (cx - 1, cy + 1),
                  (cx + 1, cy - 1), (cx - 1, cy - 1)]
        support = tuple(sorted(labels[p] for p in around if p in labels))
        plaquettes.append(Plaquette(_COLOURS[cy % 3], support, (cx, cy)))

    if d == 3:
        plaquettes.sort(key=lambda p: _D3_ORDER.index(p.color))
    else:
        plaquettes.sort(key=lambda p: (p.centre[1], p.centre[0]))

    checks   = tuple(frozenset(p.qubits) for p in plaquettes)
    boundary = frozenset(labels[p] for p in data if p[1] == 0)
    coords   = tuple(p for p, _ in sorted(labels.items(), key=lambda item: item[1]))

    code = ColorCode(
        n          = len(data),
        x_checks   = checks,
        z_checks   = checks,
        x_logical  = boundary,
        z_logical  = boundary,
        name       = f"color_d{d}",
        d          = d,
        plaquettes = tuple(plaquettes),
        coords     = coords,
    )
    logger.debug(f"🔷 Built d={d} color code: n={code.n}, {len(plaquettes)} plaquettes")
    return code


# ──────────────────────────────────────────────────────────────────────────────
# AUDITS
# ──────────────────────────────────────────────────────────────────────────────

@dataclass
class CssReport:
    code_name:  str
    k:          int
    violations: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.clean:
            return f"✅ {self.code_name}: CSS audit clean (k={self.k})"
        lines = [f"❌ {self.code_name}: {len(self.violations)} violation(s) (k={self.k})"]
        lines += [f"   - {v}" for v in self.violations]
        return "\n".join(lines)


def verify_css(code: StabilizerCode) -> CssReport:
    """Check every structural invariant; never raises on findings."""
    report = CssReport(code.name, code.k)

    commutation = (code.hx.astype(int) @ code.hz.T.astype(int)) % 2
    for i, j in zip(*np.nonzero(commutation)):
        report.violations.append(f"X check {i} anticommutes with Z check {j}")

    if report.k != 1:
        report.violations.append(f"expected k=1, found k={report.k}")

    for name, support, checks in (("X_L", code.x_logical, code.z_checks),
                                  ("Z_L", code.z_logical, code.x_checks)):
        for j, check in enumerate(checks):
            if len(check & support) & 1:
                report.violations.append(f"{name} anticommutes with check {j}")
    if not len(code.x_logical & code.z_logical) & 1:
        report.violations.append("X_L and Z_L commute")
    if code.is_x_stabilizer(code.x_logical):
        report.violations.append("X_L lies in the X stabilizer group")
    if code.is_z_stabilizer(code.z_logical):
        report.violations.append("Z_L lies in the Z stabilizer group")

    if isinstance(code, ColorCode):
        if not np.array_equal(code.hx, code.hz):
            report.violations.append("H_X != H_Z (color codes are self-dual)")
        for i, plaquette in enumerate(code.plaquettes):
            if plaquette.weight not in (4, 6):
                report.violations.append(f"plaquette {i} has weight {plaquette.weight}")
        for (i, a), (j, b) in itertools.combinations(enumerate(code.plaquettes), 2):
            if a.color == b.color and set(a.qubits) & set(b.qubits):
                report.violations.append(f"adjacent plaquettes {i} and {j} share colour {a.color}")
        for name, support in (("X_L", code.x_logical), ("Z_L", code.z_logical)):
            if len(support) != code.d:
                report.violations.append(f"|{name}| = {len(support)} != d = {code.d}")

    if report.clean:
        logger.debug(str(report))
    else:
        logger.warning(str(report))
    return report


def min_logical_weight(code: StabilizerCode) -> int:
    """Minimum weight of a non-trivial logical operator, by exhaustive search."""
    if code.n > MAX_EXHAUSTIVE_QUBITS:
        raise ValueError(
            f"❌ Exhaustive logical search refused for n={code.n} > {MAX_EXHAUSTIVE_QUBITS}"
        )
    best = code.n
    for checks, stabilizers in ((code.hx, code.hz), (code.hz, code.hx)):
        candidates = gf2.span(gf2.nullspace(checks))
        basis, _   = gf2.row_reduce(stabilizers)
        trivial    = {row.tobytes() for row in gf2.span(basis)}
        for vector in candidates:
            if vector.any() and vector.tobytes() not in trivial:
                best = min(best, int(vector.sum()))
    return best


def transversal_s_image(frame: PauliFrame) -> PauliFrame:
    """Frame after a transversal S (or S†) on every qubit: X → Y, Z → Z."""
    return PauliFrame({q: (x, z ^ x) for q, (x, z) in frame})


# ──────────────────────────────────────────────────────────────────────────────
# PRIVATE HELPERS
# ──────────────────────────────────────────────────────────────────────────────

def _matrix(checks: tuple[frozenset[int], ...], n: int) -> np.ndarray:
    matrix = np.zeros((len(checks), n), dtype=np.uint8)
    for i, check in enumerate(checks):
        matrix[i, sorted(check)] = 1
    return matrix


def _vector(support: Iterable[int], n: int) -> np.ndarray:
    vector = np.zeros(n, dtype=np.uint8)
    vector[list(support)] = 1
    return vector
