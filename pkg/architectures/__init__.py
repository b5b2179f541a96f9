"""
Ion architectures - trap layouts, timing scenarios, transpilation and schedule lowering
"""

from architectures.lowering import ArchitectureModel, lower_to_noisy_circuit, resolve_idles
from architectures.models import (
    ARCHITECTURES,
    SCENARIOS,
    Architecture,
    Placement,
    PrimitiveKind,
    PrimitiveOp,
    TimingScenario,
    Zone,
    ZoneRole,
    accumulate_excitation,
    cooling_time,
    load_architecture,
    load_timing_scenario,
)
from architectures.transpiler import (
    AuditReport,
    Schedule,
    audit_schedule,
    export_schedule_csv,
    transpile,
    transpile_circuit,
)

__all__ = [
    "ARCHITECTURES",
    "SCENARIOS",
    "Architecture",
    "ArchitectureModel",
    "AuditReport",
    "Placement",
    "PrimitiveKind",
    "PrimitiveOp",
    "Schedule",
    "TimingScenario",
    "Zone",
    "ZoneRole",
    "accumulate_excitation",
    "audit_schedule",
    "cooling_time",
    "export_schedule_csv",
    "load_architecture",
    "load_timing_scenario",
    "lower_to_noisy_circuit",
    "resolve_idles",
    "transpile",
    "transpile_circuit",
]
