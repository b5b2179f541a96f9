"""
Gadget specifications
---------------------
Names of the gadgets the generators can build, the six cardinal input
states, and ``GadgetSpec``: one frozen description that the CLI, the
experiment configs and the tests turn into a protocol tree.

Usage:
    tree = GadgetSpec(GadgetKind.TELEPORT_LS, state="+i").build()
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

logger = logging.getLogger(__name__)

CARDINAL_STATES = ("0", "1", "+", "-", "+i", "-i")

# logical Pauli stabilising each cardinal state (up to sign)
STATE_OBSERVABLE = {"0": "Z", "1": "Z", "+": "X", "-": "X", "+i": "Y", "-i": "Y"}

_ALIASES = {
    "zero": "0", "one": "1", "plus": "+", "minus": "-",
    "i": "+i", "+j": "+i", "-j": "-i", "plus_i": "+i", "minus_i": "-i",
}


def check_state(state: str) -> str:
    """Normalised cardinal state name; anything else is a contract violation."""
    name = _ALIASES.get(str(state).strip().lower(), str(state).strip().lower())
    if name not in CARDINAL_STATES:
        raise ValueError(f"❌ Unsupported input state '{state}'. Must be one of: {', '.join(CARDINAL_STATES)}")
    return name


class GadgetKind(str, Enum):
    PREP_VERIFIED      = "prep_verified"
    PREP_STABILIZER    = "prep_stabilizer"
    SE_BARE            = "se_bare"
    SE_FLAGGED         = "se_flagged"
    SE_SUPERDENSE      = "se_superdense"
    PROTO_SEQUENTIAL   = "proto_sequential"
    PROTO_SIMULTANEOUS = "proto_simultaneous"
    MEMORY             = "memory"
    TELEPORT_LS        = "teleport_ls"
    TELEPORT_DIRECT    = "teleport_direct"
    S_HAZARD           = "s_hazard"


@dataclass(frozen=True)
class GadgetSpec:
    """
    What to build.  ``state`` is the input (or prepared) cardinal state,
    ``strategy`` the syndrome-extraction strategy of memory experiments,
    ``rounds`` the number of QEC rounds (default d), ``repeated`` switches the
    direct joint measurement to its repeated variant.
    """

    kind:     GadgetKind
    state:    str = "0"
    strategy: str = "simultaneous"
    rounds:   int | None = None
    repeated: bool = True
    basis:    str = "Z"
    d:        int = 3
    options:  dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", GadgetKind(self.kind))
        object.__setattr__(self, "state", check_state(self.state))
        if self.d != 3:
            raise ValueError(f"❌ Gadget generators cover the d=3 code only, got d={self.d}")
        if self.rounds is not None and self.rounds < 1:
            raise ValueError(f"❌ rounds must be >= 1, got {self.rounds}")

    @property
    def name(self) -> str:
        parts = [self.kind.value]
        if self.kind in (GadgetKind.MEMORY,):
            parts.append(self.strategy)
        if self.kind is GadgetKind.TELEPORT_DIRECT:
            parts.append("repeated" if self.repeated else "single")
        parts.append(self.state)
        return "_".join(parts)

    def build(self):
        """The protocol tree this spec describes."""
        from gadgets.hazards import gen_transversal_s_hazard
        from gadgets.protocols import gen_memory, gen_protocol, gen_se_tree
        from gadgets.state_prep import gen_prep_stabilizer, gen_prep_verified
        from gadgets.teleport import gen_teleport_direct, gen_teleport_ls

        kind = self.kind
        logger.debug(f"🔧 Building gadget {self.name}")
        if kind is GadgetKind.PREP_VERIFIED:
            return gen_prep_verified(self.state)
        if kind is GadgetKind.PREP_STABILIZER:
            return gen_prep_stabilizer(self.state)
        if kind in (GadgetKind.SE_BARE, GadgetKind.SE_FLAGGED, GadgetKind.SE_SUPERDENSE):
            return gen_se_tree(kind.value.removeprefix("se_"), basis=self.basis)
        if kind is GadgetKind.PROTO_SEQUENTIAL:
            return gen_protocol("sequential", state=self.state)
        if kind is GadgetKind.PROTO_SIMULTANEOUS:
            return gen_protocol("simultaneous", state=self.state)
        if kind is GadgetKind.MEMORY:
            return gen_memory(self.strategy, rounds=self.rounds, state=self.state)
        if kind is GadgetKind.TELEPORT_LS:
            return gen_teleport_ls(self.state, halt_before_split=bool(self.options.get("halt_before_split", False)))
        if kind is GadgetKind.TELEPORT_DIRECT:
            return gen_teleport_direct(self.repeated, self.state)
        return gen_transversal_s_hazard(qec_before_s=bool(self.options.get("qec_before_s", False)))
