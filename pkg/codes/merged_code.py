"""
Merged code
-----------
The [[14,1,3]] code obtained by lattice surgery between two d=3 color-code
blocks along their (4, 5, 6) boundaries.

Block 1 occupies qubits 0..6, block 2 qubits 7..13.  Merging adds the two
boundary X checks w4 = X4¹X5¹X4²X5² and w2 = X6¹X6², and fuses the two
boundary Z plaquettes P3¹, P3² into the weight-8 check W8.  Their product
w4·w2 equals the joint logical X_L¹X_L² (with X_L represented on {4,5,6}).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from codes.color_code import ColorCode, StabilizerCode

logger = logging.getLogger(__name__)

BOUNDARY_W4  = (4, 5)
BOUNDARY_W2  = (6,)
BOUNDARY_REP = frozenset({4, 5, 6})


@dataclass(frozen=True)
class MergedCode(StabilizerCode):
    """Merged code plus the designations of its new boundary checks."""

    block_size:    int = 7
    w4:            frozenset[int] = frozenset()
    w2:            frozenset[int] = frozenset()
    w8:            frozenset[int] = frozenset()
    joint_logical: tuple[frozenset[int], ...] = ()

    def block(self, index: int) -> range:
        return range(index * self.block_size, (index + 1) * self.block_size)


def merge_codes(a: ColorCode, b: ColorCode) -> MergedCode:
    """Merge two d=3 blocks into the [[14,1,3]] code."""
    for code in (a, b):
        if not isinstance(code, ColorCode) or code.d != 3:
            raise ValueError(f"❌ merge_codes needs two d=3 color codes, got {getattr(code, 'name', code)}")

    n1    = a.n
    shift = lambda support: frozenset(q + n1 for q in support)

    w4 = frozenset(BOUNDARY_W4) | shift(BOUNDARY_W4)
    w2 = frozenset(BOUNDARY_W2) | shift(BOUNDARY_W2)
    w8 = a.z_checks[2] | shift(b.z_checks[2])

    x_checks = tuple(a.x_checks) + tuple(shift(c) for c in b.x_checks) + (w4, w2)
    z_checks = tuple(a.z_checks[:2]) + tuple(shift(c) for c in b.z_checks[:2]) + (w8,)

    merged = MergedCode(
        n             = n1 + b.n,
        x_checks      = x_checks,
        z_checks      = z_checks,
        x_logical     = frozenset(a.x_logical),
        z_logical     = frozenset(a.z_logical) | shift(b.z_logical),
        name          = "merged_d3",
        block_size    = n1,
        w4            = w4,
        w2            = w2,
        w8            = w8,
        joint_logical = (w4, w2),
    )
    logger.debug(f"🔗 Merged code: n={merged.n}, {len(x_checks)} X checks, {len(z_checks)} Z checks")
    return merged
