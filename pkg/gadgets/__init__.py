"""
Gadgets - protocol-tree generators for state preparation, syndrome extraction, memory and teleportation
"""

from gadgets.hazards import gen_transversal_s_hazard
from gadgets.protocols import gen_memory, gen_protocol, gen_se_tree, superdense_tables
from gadgets.resources import ResourceCount, count_resources
from gadgets.se_circuits import BlockLayout, gen_se_circuit
from gadgets.spec import CARDINAL_STATES, GadgetKind, GadgetSpec, check_state
from gadgets.state_prep import encoder_circuit, gen_prep_stabilizer, gen_prep_verified
from gadgets.teleport import gen_lattice_surgery_round, gen_teleport_direct, gen_teleport_ls

__all__ = [
    "BlockLayout",
    "CARDINAL_STATES",
    "GadgetKind",
    "GadgetSpec",
    "ResourceCount",
    "check_state",
    "count_resources",
    "encoder_circuit",
    "gen_lattice_surgery_round",
    "gen_memory",
    "gen_prep_stabilizer",
    "gen_prep_verified",
    "gen_protocol",
    "gen_se_circuit",
    "gen_se_tree",
    "gen_teleport_direct",
    "gen_teleport_ls",
    "gen_transversal_s_hazard",
    "superdense_tables",
]
