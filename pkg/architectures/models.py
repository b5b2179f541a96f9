"""
Trapped-ion architectures
-------------------------
Zone layouts, primitive operations and timing scenarios.

  * AbaQusA   two 13-ion working chains between three detection zones
  * AbaQusS   six two-ion working zones and eight storage zones on one rail
  * AbaQusX   the same zone kinds arranged around two X-junctions

The two integrated layouts connect their blocks through the same pair of
interface zones, which host the lattice-surgery ancillas.  Layouts and timing
tables are JSON data files; durations are in µs, excitations in quanta.

Usage:
    arch     = load_architecture("AbaQusS")
    scenario = load_timing_scenario("intermediate")
    cooling_time(27, 0.01, 1e4)          # 7.9e-4 s
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

DATA_VERSION      = 1
DATA_DIR          = Path(__file__).resolve().parent.parent / "data"
ARCHITECTURE_PATH = DATA_DIR / "architectures.json"
TIMING_PATH       = DATA_DIR / "timing_scenarios.json"
ARCHITECTURES     = ("AbaQusA", "AbaQusS", "AbaQusX")
SCENARIOS         = ("current", "intermediate", "optimistic")


def _load(path: Path, what: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if data.get("version") != DATA_VERSION:
        raise ValueError(f"❌ Unsupported {what} file version {data.get('version')!r} in {path}")
    return data


# ──────────────────────────────────────────────────────────────────────────────
# PRIMITIVES
# ──────────────────────────────────────────────────────────────────────────────

class ZoneRole(str, Enum):
    WORKING   = "working"
    IDLE      = "idle"
    DETECTION = "detection"
    INTERFACE = "interface"


class PrimitiveKind(str, Enum):
    GATE1Q         = "gate1q"
    GATE2Q         = "gate2q"
    SPLIT          = "split"
    MERGE          = "merge"
    LINEAR_SHUTTLE = "linear_shuttle"
    JUNCTION_CROSS = "junction_cross"
    SWAP           = "swap"
    READOUT        = "readout"
    RECOOL         = "recool"

    @property
    def category(self) -> str:
        if self in GATE_KINDS:
            return "gate"
        if self is PrimitiveKind.RECOOL:
            return "recool"
        return "transport"


GATE_KINDS      = frozenset({PrimitiveKind.GATE1Q, PrimitiveKind.GATE2Q, PrimitiveKind.READOUT})
TRANSPORT_KINDS = frozenset({PrimitiveKind.SPLIT, PrimitiveKind.MERGE, PrimitiveKind.LINEAR_SHUTTLE,
                             PrimitiveKind.JUNCTION_CROSS, PrimitiveKind.SWAP})
CATEGORIES      = ("gate", "transport", "recool")


@dataclass(frozen=True)
class PrimitiveOp:
    """
    One timed primitive.  Transport ops list their zones in travel order
    (``src, dst`` or ``src, junction, dst``); ``instructions`` are the
    circuit positions a gate or readout executes.
    """

    kind:         PrimitiveKind
    ions:         tuple[int, ...]
    zones:        tuple[str, ...]
    start:        float
    end:          float
    coherent:     float = 0.0
    thermal:      float = 0.0
    instructions: tuple[int, ...] = ()
    wells:        int = 1

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"❌ {self.kind.value} on {self.ions} ends before it starts ({self.start} > {self.end})")
        if self.coherent < 0 or self.thermal < 0:
            raise ValueError(f"❌ Negative excitation on {self.kind.value}: {self.coherent}, {self.thermal}")

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def excitation(self) -> float:
        return self.coherent + self.thermal


@dataclass(frozen=True)
class Zone:
    id:       str
    role:     ZoneRole
    capacity: int
    block:    int | None = None
    index:    int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError(f"❌ Zone '{self.id}' needs capacity >= 1, got {self.capacity}")

    @property
    def gate_capable(self) -> bool:
        return self.role in (ZoneRole.WORKING, ZoneRole.INTERFACE)


# ──────────────────────────────────────────────────────────────────────────────
# TIMING
# ──────────────────────────────────────────────────────────────────────────────

def cooling_time(nbar: float, nbar0: float, cooling_rate: float) -> float:
    """Seconds to cool from ``nbar`` to ``nbar0`` at ``cooling_rate`` quanta/s; zero when already cold."""
    if nbar0 <= 0 or cooling_rate <= 0:
        raise ValueError(f"❌ Cooling needs nbar0 > 0 and W_c > 0, got nbar0={nbar0}, W_c={cooling_rate}")
    if nbar <= nbar0:
        return 0.0
    return math.log(nbar / nbar0) / cooling_rate


class OpTiming(BaseModel):
    model_config = ConfigDict(frozen=True)

    duration: float = Field(ge=0.0)
    coherent: float = Field(default=0.0, ge=0.0)
    thermal:  float = Field(default=0.0, ge=0.0)

    @property
    def excitation(self) -> float:
        return self.coherent + self.thermal


class TimingScenario(BaseModel):
    """Operation durations and motional excitations of one technology scenario."""

    model_config = ConfigDict(frozen=True)

    tag:          str
    heating_rate: float = Field(ge=0.0)
    cooling_rate: float = Field(gt=0.0)
    target_nbar:  float = Field(gt=0.0)
    linear:       dict[str, float]
    integrated:   dict[str, OpTiming]

    @field_validator("tag")
    @classmethod
    def _known_tag(cls, value: str) -> str:
        if value not in SCENARIOS:
            raise ValueError(f"unknown timing scenario '{value}' (expected one of {SCENARIOS})")
        return value

    def timing(self, kind: PrimitiveKind | str, *, integrated: bool) -> OpTiming:
        kind = PrimitiveKind(kind)
        if integrated:
            entry = self.integrated.get(kind.value)
        else:
            duration = self.linear.get(kind.value)
            entry    = None if duration is None else OpTiming(duration=duration)
        if entry is None:
            trap = "integrated" if integrated else "linear"
            raise ValueError(f"❌ No {kind.value} timing for the {trap} trap in scenario '{self.tag}'")
        return entry

    def recool_duration(self, nbar: float, *, integrated: bool) -> float:
        """µs: the cooling-time law on integrated traps, the fixed post-detection cooling on the linear one."""
        if integrated:
            return 1e6 * cooling_time(nbar, self.target_nbar, self.cooling_rate)
        return self.timing(PrimitiveKind.RECOOL, integrated=False).duration


def load_timing_scenario(tag: str, path: str | Path = TIMING_PATH) -> TimingScenario:
    data = _load(Path(path), "timing-scenario")
    if tag not in data["scenarios"]:
        raise ValueError(f"❌ Unknown scenario '{tag}'. Must be one of: {', '.join(data['scenarios'])}")
    rates    = data["scenarios"][tag]
    scenario = TimingScenario(
        tag          = tag,
        heating_rate = rates["heating_rate"],
        cooling_rate = rates["cooling_rate"],
        target_nbar  = data["target_nbar"],
        linear       = data["linear_trap"][tag],
        integrated   = data["integrated"][tag],
    )
    logger.debug(f"📂 Timing scenario loaded: {tag} (heating {scenario.heating_rate:g}/s, W_c {scenario.cooling_rate:g}/s)")
    return scenario


def accumulate_excitation(ops: Iterable[PrimitiveOp | PrimitiveKind | str],
                          scenario: TimingScenario | None = None) -> float:
    """
    Quanta gathered by one crystal since its last recool: coherent plus
    thermal part of every op.  Bare kinds are priced from ``scenario``'s
    integrated table.
    """
    total = 0.0
    for op in ops:
        if isinstance(op, PrimitiveOp):
            total += op.excitation
            continue
        if scenario is None:
            raise ValueError(f"❌ Pricing '{op}' needs a timing scenario")
        total += scenario.timing(op, integrated=True).excitation
    return total


# ──────────────────────────────────────────────────────────────────────────────
# ARCHITECTURE
# ──────────────────────────────────────────────────────────────────────────────

@dataclass
class Placement:
    """Which zone holds every ion, and each zone's crystal order (last ion leaves first)."""

    zone_of:  dict[int, str]
    crystals: dict[str, list[int]]
    surgery:  frozenset[int] = frozenset()

    def occupancy(self, zone: str) -> int:
        return len(self.crystals.get(zone, ()))

    def move(self, ion: int, dst: str) -> None:
        self.crystals[self.zone_of[ion]].remove(ion)
        self.crystals.setdefault(dst, []).append(ion)
        self.zone_of[ion] = dst

    def copy(self) -> "Placement":
        return Placement(dict(self.zone_of), {z: list(c) for z, c in self.crystals.items()}, self.surgery)


@dataclass
class Architecture:
    kind:      str
    family:    str
    zones:     dict[str, Zone]
    graph:     nx.Graph
    junctions: tuple[str, ...] = ()
    home:      dict[str, tuple[str, ...]] = field(default_factory=dict)
    detect_at: dict[str, str] = field(default_factory=dict)

    @property
    def integrated(self) -> bool:
        return self.family == "integrated"

    def zones_with(self, role: ZoneRole | str) -> list[Zone]:
        role = ZoneRole(role)
        return [z for z in self.zones.values() if z.role is role]

    @property
    def trap_zones(self) -> list[Zone]:
        """Working, storage and detection zones (interface segments excluded)."""
        return [z for z in self.zones.values() if z.role is not ZoneRole.INTERFACE]

    def by_distance(self, source: str, candidates: Iterable[str]) -> list[str]:
        lengths = nx.single_source_shortest_path_length(self.graph, source)
        reach   = [z for z in candidates if z in lengths]
        return sorted(reach, key=lambda z: (lengths[z], self.zones[z].index))

    def home_placement(self, n_qubits: int) -> Placement:
        """
        Single-block circuits fill the block-0 slots in qubit order; the
        28-qubit teleportation layout puts each block's data then ancillas
        and flags into its own slots and the surgery ancillas at the interface.
        """
        block0, block1, surgery = self.home["block0"], self.home["block1"], self.home["surgery"]
        if n_qubits <= len(block0):
            zone_of = {q: block0[q] for q in range(n_qubits)}
            special = frozenset()
        elif n_qubits == len(block0) + len(block1) + len(surgery):
            per     = len(block0)
            data    = 7
            zone_of = {}
            for q in range(n_qubits):
                if q < data:
                    zone_of[q] = block0[q]
                elif q < 2 * data:
                    zone_of[q] = block1[q - data]
                elif q < 2 * data + (per - data):
                    zone_of[q] = block0[data + q - 2 * data]
                elif q < 2 * per:
                    zone_of[q] = block1[data + q - 2 * data - (per - data)]
                else:
                    zone_of[q] = surgery[q - 2 * per]
            special = frozenset(range(2 * per, n_qubits))
        else:
            raise ValueError(f"❌ No home placement on {self.kind} for a {n_qubits}-qubit circuit")

        crystals: dict[str, list[int]] = {z: [] for z in self.zones}
        for q in range(n_qubits):
            crystals[zone_of[q]].append(q)
        for zone_id, ions in crystals.items():
            if len(ions) > self.zones[zone_id].capacity:
                raise ValueError(f"❌ Home placement overfills zone '{zone_id}' on {self.kind}")
        return Placement(zone_of, crystals, special)

    def crosstalk_neighbours(self, placement: Placement) -> dict[int, tuple[int, ...]]:
        """Chain neighbours inside working chains (shared motional modes); empty on integrated traps."""
        if self.integrated:
            return {}
        neighbours = {}
        for zone in self.zones_with(ZoneRole.WORKING):
            chain = placement.crystals.get(zone.id, [])
            for i, ion in enumerate(chain):
                neighbours[ion] = tuple(chain[j] for j in (i - 1, i + 1) if 0 <= j < len(chain))
        return neighbours

    def __repr__(self) -> str:
        counts = ", ".join(f"{r.value}={len(self.zones_with(r))}" for r in ZoneRole if self.zones_with(r))
        return f"Architecture('{self.kind}', {counts}, junctions={len(self.junctions)})"


def _expand(slots: list) -> tuple[str, ...]:
    out = []
    for slot in slots:
        if isinstance(slot, str):
            out.append(slot)
        else:
            zone, count = slot
            out.extend([zone] * count)
    return tuple(out)


def load_architecture(kind: str, path: str | Path = ARCHITECTURE_PATH) -> Architecture:
    data = _load(Path(path), "architecture")
    spec = data["architectures"].get(kind)
    if spec is None:
        raise ValueError(f"❌ Unknown architecture '{kind}'. Must be one of: {', '.join(data['architectures'])}")

    zones = {
        z["id"]: Zone(z["id"], ZoneRole(z["role"]), z["capacity"], z.get("block"), index)
        for index, z in enumerate(spec["zones"])
    }
    graph = nx.Graph()
    graph.add_nodes_from(zones)
    graph.add_nodes_from(spec.get("junctions", []))
    for a, b in spec["edges"]:
        for node in (a, b):
            if node not in graph:
                raise ValueError(f"❌ Edge ({a}, {b}) of {kind} names an undeclared zone '{node}'")
        graph.add_edge(a, b)
    if not nx.is_connected(graph):
        raise ValueError(f"❌ Zone graph of {kind} is not connected")

    arch = Architecture(
        kind      = kind,
        family    = spec["family"],
        zones     = zones,
        graph     = graph,
        junctions = tuple(spec.get("junctions", [])),
        home      = {name: _expand(slots) for name, slots in spec["home"].items()},
        detect_at = dict(spec.get("detect_at", {})),
    )
    logger.debug(f"📂 Architecture loaded: {arch!r}")
    return arch
