"""
Transpiler
----------
Turns node circuits into timed schedules of primitive trap operations.

AbaQusA (linear)
  Gates inside one 13-ion chain run one after another (shared motional
  modes).  Measured ions leave as a sub-chain to the chain's detection zone
  and come back; cooling follows every detection.  The lattice-surgery
  ancillas travel as one crystal: 2 CNOTs in block 1, 3 in block 2, the last
  one back in block 1, then detection.

AbaQusS / AbaQusX (integrated)
  Greedy router: a gate runs in the nearest working zone with room for its
  ions (evicting a stranger to storage if none has), crystals are reordered
  with swaps so the travelling ion leaves from the edge, and every gate whose
  ions gathered excitation is preceded by a recool to n̄₀.  Surgery gates
  bring the data ion to the ancilla's interface zone and back, so both
  integrated layouts share the lattice-surgery schedule.

Usage:
    schedule  = transpile_circuit(circuit, "AbaQusS", "current")
    schedules = transpile(tree, "AbaQusX", "optimistic")
    audit_schedule(schedule).ok
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx

from architectures.models import (
    CATEGORIES,
    Architecture,
    Placement,
    PrimitiveKind,
    PrimitiveOp,
    TimingScenario,
    ZoneRole,
    load_architecture,
    load_timing_scenario,
)
from circuits.circuit import Circuit
from circuits.instructions import Idle, Measure, Reset, Tick
from circuits.protocol_tree import ProtocolTree
from engine.errors import InfeasibleScheduleError
from engine.gates import CliffordAction, GateKind

logger = logging.getLogger(__name__)

_EPS = 1e-9

GATE1Q, GATE2Q, READOUT, RECOOL = (PrimitiveKind.GATE1Q, PrimitiveKind.GATE2Q,
                                   PrimitiveKind.READOUT, PrimitiveKind.RECOOL)
SPLIT, MERGE, SWAP              = PrimitiveKind.SPLIT, PrimitiveKind.MERGE, PrimitiveKind.SWAP
SHUTTLE, CROSS                  = PrimitiveKind.LINEAR_SHUTTLE, PrimitiveKind.JUNCTION_CROSS


def _primitive(ins) -> PrimitiveKind | None:
    if isinstance(ins, CliffordAction):
        if ins.kind is GateKind.I:
            return None
        return GATE2Q if ins.kind.arity == 2 else GATE1Q
    if isinstance(ins, Reset):
        return GATE1Q
    if isinstance(ins, Measure):
        return READOUT
    return None


# ──────────────────────────────────────────────────────────────────────────────
# SCHEDULE
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Schedule:
    """Timed primitive ops of one circuit on one architecture (µs)."""

    arch:        Architecture
    scenario:    str
    circuit:     Circuit
    ops:         tuple[PrimitiveOp, ...]
    placement:   Placement
    target_nbar: float

    @property
    def duration(self) -> float:
        return max((op.end for op in self.ops), default=0.0)

    def count(self, *kinds: PrimitiveKind) -> int:
        return sum(1 for op in self.ops if op.kind in kinds)

    def breakdown(self) -> dict[str, float]:
        """Summed op durations per category (gate, transport, recool) and their total."""
        sums = {category: 0.0 for category in CATEGORIES}
        for op in self.ops:
            sums[op.kind.category] += op.duration
        sums["total"] = sum(sums[c] for c in CATEGORIES)
        return sums

    def zone_timeline(self) -> dict[str, list[PrimitiveOp]]:
        timeline = defaultdict(list)
        for op in self.ops:
            for zone in op.zones:
                timeline[zone].append(op)
        return {zone: sorted(ops, key=lambda op: op.start) for zone, ops in timeline.items()}

    def gaps(self) -> list[tuple[int, float, float, int | None]]:
        """
        (qubit, start, end, next instruction) for every stretch a live qubit
        spends outside gates and readouts.  A reset starts a qubit's life, a
        measurement ends it; stored qubits the circuit never touches idle
        throughout.
        """
        spans: dict[int, list[tuple[float, float, int]]] = defaultdict(list)
        for op in self.ops:
            for index in op.instructions:
                for q in self.circuit.instructions[index].qubits:
                    spans[q].append((op.start, op.end, index))
        stored = {q for ins in self.circuit.instructions if isinstance(ins, Idle) for q in ins.qubits}
        end    = self.duration
        out    = []
        for q in sorted(stored | set(spans)):
            mine = sorted(spans.get(q, []))
            if not mine:
                if end > 0:
                    out.append((q, 0.0, end, None))
                continue
            cursor = None if isinstance(self.circuit.instructions[mine[0][2]], Reset) else 0.0
            for start, stop, index in mine:
                if cursor is not None and start > cursor + _EPS:
                    out.append((q, cursor, start, index))
                cursor = None if isinstance(self.circuit.instructions[index], Measure) else stop
            if cursor is not None and end > cursor + _EPS:
                out.append((q, cursor, end, None))
        return out

    def idle_intervals(self) -> dict[int, list[tuple[float, float]]]:
        intervals = defaultdict(list)
        for q, start, end, _ in self.gaps():
            intervals[q].append((start, end))
        return dict(intervals)

    def __repr__(self) -> str:
        return (f"Schedule('{self.circuit.name}' on {self.arch.kind}/{self.scenario}: "
                f"{len(self.ops)} ops, {self.duration:.1f} µs)")


def export_schedule_csv(schedule: Schedule, path: str | Path) -> Path:
    """Per-zone timeline: one row per (zone, op)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["zone", "start_us", "end_us", "kind", "ions", "instructions"])
        for zone, ops in sorted(schedule.zone_timeline().items()):
            for op in ops:
                writer.writerow([zone, f"{op.start:.3f}", f"{op.end:.3f}", op.kind.value,
                                 " ".join(map(str, op.ions)), " ".join(map(str, op.instructions))])
    logger.info(f"💾 Schedule timeline written: {path}")
    return path


# ──────────────────────────────────────────────────────────────────────────────
# TIMELINE
# ──────────────────────────────────────────────────────────────────────────────

class _Timeline:
    """Resource clocks (ions, zones, junctions) plus running n̄ per ion."""

    def __init__(self, arch: Architecture, scenario: TimingScenario, circuit: Circuit):
        self.arch      = arch
        self.scenario  = scenario
        self.circuit   = circuit
        self.home      = arch.home_placement(circuit.n_qubits)
        self.placement = self.home.copy()
        self.clock     = defaultdict(float)
        self.nbar      = {q: scenario.target_nbar for q in self.placement.zone_of}
        self.ops: list[PrimitiveOp] = []

    def emit(self, kind: PrimitiveKind, ions, zones, *, instructions=(), wells: int = 1,
             duration: float | None = None) -> PrimitiveOp:
        if kind is RECOOL:
            coherent = thermal = 0.0
        else:
            timing   = self.scenario.timing(kind, integrated=self.arch.integrated)
            duration = timing.duration
            coherent, thermal = timing.coherent, timing.thermal
        keys  = [("ion", q) for q in ions] + [("zone", z) for z in zones]
        start = max((self.clock[k] for k in keys), default=0.0)
        op    = PrimitiveOp(kind, tuple(ions), tuple(zones), start, start + duration,
                            coherent, thermal, tuple(instructions), wells)
        for k in keys:
            self.clock[k] = op.end
        for q in op.ions:
            self.nbar[q] = self.scenario.target_nbar if kind is RECOOL else self.nbar[q] + op.excitation
        self.ops.append(op)
        return op

    def schedule(self) -> Schedule:
        return Schedule(self.arch, self.scenario.tag, self.circuit, tuple(self.ops), self.home,
                        self.scenario.target_nbar)


# ──────────────────────────────────────────────────────────────────────────────
# AbaQusA
# ──────────────────────────────────────────────────────────────────────────────

class _LinearTranspiler(_Timeline):

    def run(self) -> Schedule:
        done: set[int] = set()
        for layer in self._layers():
            measured: dict[str, list[int]] = {}
            for index, ins in layer:
                kind = _primitive(ins)
                if kind is None or index in done:
                    continue
                if kind is READOUT:
                    measured.setdefault(self.placement.zone_of[ins.qubit], []).append(index)
                elif kind is GATE2Q and set(ins.qubits) & self.placement.surgery:
                    done |= self._itinerary(index)
                else:
                    zones = {self.placement.zone_of[q] for q in ins.qubits}
                    if len(zones) != 1:
                        raise InfeasibleScheduleError("chain", f"gate on {ins.qubits} spans chains {sorted(zones)}")
                    self.emit(kind, ins.qubits, tuple(zones), instructions=(index,))
            for zone, indexes in measured.items():
                self._detect(zone, indexes)
        return self.schedule()

    def _layers(self) -> list[list[tuple[int, object]]]:
        layers, current = [], []
        for index, ins in enumerate(self.circuit.instructions):
            if isinstance(ins, Tick):
                layers.append(current)
                current = []
            else:
                current.append((index, ins))
        return layers + [current] if current else layers

    def _shuttle(self, ions: tuple[int, ...], src: str, dst: str) -> None:
        path = nx.shortest_path(self.arch.graph, src, dst)
        for a, b in zip(path, path[1:]):
            self.emit(SHUTTLE, ions, (a, b))
            for q in ions:
                self.placement.move(q, b)

    def _detect(self, zone: str, indexes: list[int]) -> None:
        """Readout plus post-detection cooling; chain ions make a round trip to the detection zone."""
        ions = tuple(self.circuit.instructions[i].qubit for i in indexes)
        if self.arch.zones[zone].role is ZoneRole.DETECTION:
            self.emit(READOUT, ions, (zone,), instructions=tuple(indexes))
            self.emit(RECOOL, ions, (zone,), duration=self.scenario.recool_duration(0.0, integrated=False))
            return
        detector = self.arch.detect_at[zone]
        self.emit(SPLIT, tuple(self.placement.crystals[zone]), (zone,), wells=2)
        self._shuttle(ions, zone, detector)
        self.emit(READOUT, ions, (detector,), instructions=tuple(indexes))
        self.emit(RECOOL, ions, (detector,), duration=self.scenario.recool_duration(0.0, integrated=False))
        self._shuttle(ions, detector, zone)
        self.emit(MERGE, tuple(self.placement.crystals[zone]), (zone,), wells=2)

    def _visits(self, gates: list[int]) -> list[tuple[str | None, list[int]]]:
        surgery = self.placement.surgery

        def chain_of(index: int) -> str | None:
            data = [q for q in self.circuit.instructions[index].qubits if q not in surgery]
            return self.placement.zone_of[data[0]] if data else None

        located = [(chain_of(i), i) for i in gates]
        chains  = list(dict.fromkeys(c for c, _ in located if c is not None))
        if len(chains) == 2 and all(c is not None for c, _ in located):
            first  = [i for c, i in located if c == chains[0]]
            second = [i for c, i in located if c == chains[1]]
            if len(first) >= 2:
                return [(chains[0], first[:-1]), (chains[1], second), (chains[0], first[-1:])]

        visits: list[tuple[str | None, list[int]]] = []
        for chain, index in located:
            chain = chain or (visits[-1][0] if visits else (chains[0] if chains else None))
            if visits and visits[-1][0] == chain:
                visits[-1][1].append(index)
            else:
                visits.append((chain, [index]))
        return visits

    def _itinerary(self, first: int) -> set[int]:
        """
        Surgery-ancilla CNOTs up to the next surgery reset, or until every
        ancilla taking part has been measured, grouped into chain visits.
        """
        surgery = self.placement.surgery
        gates   = []
        active, retired = set(), set()
        for i, ins in enumerate(self.circuit.instructions[first:], start=first):
            if isinstance(ins, Reset) and ins.qubit in surgery:
                break
            if isinstance(ins, Measure) and ins.qubit in surgery:
                retired.add(ins.qubit)
                if active <= retired:
                    break
                continue
            if _primitive(ins) is GATE2Q and set(ins.qubits) & surgery:
                gates.append(i)
                active |= set(ins.qubits) & surgery
        crystal = tuple(sorted({q for i in gates for q in self.circuit.instructions[i].qubits if q in surgery}))
        home    = self.placement.zone_of[crystal[0]]
        route   = []
        for chain, indexes in self._visits(gates):
            if chain is None:
                for i in indexes:
                    self.emit(GATE2Q, self.circuit.instructions[i].qubits, (home,), instructions=(i,))
                continue
            busy   = {q for i in indexes for q in self.circuit.instructions[i].qubits}
            parked = self._dock(crystal, chain, busy)
            for i in indexes:
                self.emit(GATE2Q, self.circuit.instructions[i].qubits, (chain,), instructions=(i,))
            self._undock(crystal, chain, home, parked)
            route.append(f"{chain}×{len(indexes)}")
        logger.debug(f"🔀 Surgery itinerary {crystal}: {' → '.join(route)}")
        return set(gates)

    def _dock(self, crystal: tuple[int, ...], chain: str, busy: set[int]) -> tuple[int, ...]:
        """Merge the surgery crystal into ``chain``; idle chain ions park in detection if it would overflow."""
        over   = len(self.placement.crystals[chain]) + len(crystal) - self.arch.zones[chain].capacity
        parked = ()
        if over > 0:
            spare  = [q for q in reversed(self.placement.crystals[chain]) if q not in busy]
            if len(spare) < over:
                raise InfeasibleScheduleError("capacity", f"chain {chain} cannot host surgery crystal {crystal}")
            parked = tuple(spare[:over])
            self.emit(SPLIT, tuple(self.placement.crystals[chain]), (chain,), wells=2)
            self._shuttle(parked, chain, self.arch.detect_at[chain])
        self._shuttle(crystal, self.placement.zone_of[crystal[0]], chain)
        self.emit(MERGE, tuple(self.placement.crystals[chain]), (chain,), wells=2)
        return parked

    def _undock(self, crystal: tuple[int, ...], chain: str, home: str, parked: tuple[int, ...]) -> None:
        self.emit(SPLIT, tuple(self.placement.crystals[chain]), (chain,), wells=2)
        self._shuttle(crystal, chain, home)
        if parked:
            self._shuttle(parked, self.arch.detect_at[chain], chain)
            self.emit(MERGE, tuple(self.placement.crystals[chain]), (chain,), wells=2)


# ──────────────────────────────────────────────────────────────────────────────
# AbaQusS / AbaQusX
# ──────────────────────────────────────────────────────────────────────────────

class _IntegratedRouter(_Timeline):

    def run(self) -> Schedule:
        surgery = self.placement.surgery
        for index, ins in enumerate(self.circuit.instructions):
            kind = _primitive(ins)
            if kind is None:
                continue
            if kind is GATE2Q and set(ins.qubits) & surgery:
                self._interface_gate(index, ins.qubits)
                continue
            zone = self._host(ins.qubits)
            if kind is not READOUT:
                self._cool(ins.qubits, zone)
            self.emit(kind, ins.qubits, (zone,), instructions=(index,))
        return self.schedule()

    # ── placement ────────────────────────────────────────────────────────

    def _room(self, zone: str, ions) -> int:
        strangers = sum(1 for q in self.placement.crystals[zone] if q not in ions)
        return self.arch.zones[zone].capacity - strangers - len(ions)

    def _host(self, ions) -> str:
        """Gate-capable zone for ``ions``: their own if it has room, else the nearest working zone with room."""
        own        = [self.placement.zone_of[q] for q in ions]
        candidates = list(dict.fromkeys(z for z in own if self.arch.zones[z].gate_capable))
        working    = [z.id for z in self.arch.zones_with(ZoneRole.WORKING)]
        candidates += [z for z in self.arch.by_distance(own[0], working) if z not in candidates]
        host = next((z for z in candidates if self._room(z, ions) >= 0), None)
        if host is None:
            host = next(z for z in candidates if self.arch.zones[z].role is ZoneRole.WORKING)
            self._evict(host, ions)
        for q in ions:
            if self.placement.zone_of[q] != host:
                self._move(q, host)
        return host

    def _evict(self, zone: str, ions) -> None:
        storage = [z.id for z in self.arch.zones_with(ZoneRole.IDLE)]
        working = [z.id for z in self.arch.zones_with(ZoneRole.WORKING) if z.id != zone]
        while self._room(zone, ions) < 0:
            victim = next(q for q in reversed(self.placement.crystals[zone]) if q not in ions)
            target = next((z for z in self.arch.by_distance(zone, storage) + self.arch.by_distance(zone, working)
                           if self.placement.occupancy(z) < self.arch.zones[z].capacity), None)
            if target is None:
                raise InfeasibleScheduleError("capacity", f"no zone can take ion {victim} evicted from {zone}")
            logger.debug(f"🔀 Evict ion {victim}: {zone} → {target}")
            self._move(victim, target)

    # ── transport ────────────────────────────────────────────────────────

    def _to_edge(self, ion: int, zone: str) -> None:
        crystal = self.placement.crystals[zone]
        while crystal[-1] != ion:
            i = crystal.index(ion)
            self.emit(SWAP, (ion, crystal[i + 1]), (zone,))
            crystal[i], crystal[i + 1] = crystal[i + 1], crystal[i]

    def _move(self, ion: int, dst: str) -> None:
        src  = self.placement.zone_of[ion]
        path = nx.shortest_path(self.arch.graph, src, dst)
        if len(self.placement.crystals[src]) > 1:
            self._to_edge(ion, src)
            self.emit(SPLIT, tuple(self.placement.crystals[src]), (src,), wells=2)
        here, i = src, 1
        while i < len(path):
            if path[i] in self.arch.junctions:
                nxt = path[i + 1]
                self.emit(CROSS, (ion,), (here, path[i], nxt))
                i += 2
            else:
                nxt = path[i]
                self.emit(SHUTTLE, (ion,), (here, nxt))
                i += 1
            self.placement.move(ion, nxt)
            here = nxt
        if len(self.placement.crystals[dst]) > 1:
            self.emit(MERGE, tuple(self.placement.crystals[dst]), (dst,), wells=2)

    def _cool(self, ions, zone: str) -> None:
        hottest = max(self.nbar[q] for q in ions)
        if hottest > self.scenario.target_nbar + _EPS:
            self.emit(RECOOL, ions, (zone,), duration=self.scenario.recool_duration(hottest, integrated=True))

    def _interface_gate(self, index: int, qubits: tuple[int, ...]) -> None:
        """Bring the partner ion to the surgery ancilla's zone, gate, send it back."""
        anchor   = next(q for q in qubits if q in self.placement.surgery)
        hub      = self.placement.zone_of[anchor]
        visitors = [q for q in qubits if self.placement.zone_of[q] != hub]
        origins  = {q: self.placement.zone_of[q] for q in visitors}
        for q in visitors:
            self._move(q, hub)
        self._cool(qubits, hub)
        self.emit(GATE2Q, qubits, (hub,), instructions=(index,))
        for q in visitors:
            self._move(q, origins[q])


# ──────────────────────────────────────────────────────────────────────────────
# ENTRY POINTS
# ──────────────────────────────────────────────────────────────────────────────

def resolve(arch: Architecture | str, scenario: TimingScenario | str) -> tuple[Architecture, TimingScenario]:
    arch     = arch if isinstance(arch, Architecture) else load_architecture(arch)
    scenario = scenario if isinstance(scenario, TimingScenario) else load_timing_scenario(scenario)
    return arch, scenario


def transpile_circuit(circuit: Circuit, arch: Architecture | str, scenario: TimingScenario | str) -> Schedule:
    arch, scenario = resolve(arch, scenario)
    engine   = _IntegratedRouter if arch.integrated else _LinearTranspiler
    schedule = engine(arch, scenario, circuit).run()
    logger.debug(f"🔧 {schedule!r}")
    return schedule


def transpile(tree: ProtocolTree, arch: Architecture | str, scenario: TimingScenario | str) -> dict[str, Schedule]:
    """One schedule per tree node, each starting from the home placement."""
    arch, scenario = resolve(arch, scenario)
    schedules = {node_id: transpile_circuit(circuit, arch, scenario) for node_id, circuit in tree.circuits()}
    total     = sum(s.duration for s in schedules.values())
    logger.info(f"🔧 Transpiled '{tree.name}' on {arch.kind}/{scenario.tag}: "
                f"{len(schedules)} nodes, {total / 1000:.2f} ms summed over nodes")
    return schedules


# ──────────────────────────────────────────────────────────────────────────────
# AUDIT
# ──────────────────────────────────────────────────────────────────────────────

@dataclass
class AuditReport:
    schedule:   str
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return f"✅ {self.schedule}: legal"
        return f"❌ {self.schedule}: {len(self.violations)} violation(s)\n" + "\n".join(f"  - {v}" for v in self.violations)


def audit_schedule(schedule: Schedule) -> AuditReport:
    """
    Replays the schedule: zone capacities, gate locations, two-well merges,
    two-ion swaps, one crystal per junction at a time and the cooling rule
    (recool before any hot gate on integrated traps, cooling only right after
    a detection on AbaQusA).  Capacity bounds resting crystals; an ion in
    transit is counted where its move ends.
    """
    arch      = schedule.arch
    placement = schedule.placement.copy()
    nbar      = {q: schedule.target_nbar for q in placement.zone_of}
    report    = AuditReport(repr(schedule))
    flag      = report.violations.append
    previous  = None

    resting, last_hop = set(), {}
    for n, op in enumerate(schedule.ops):
        for q in op.ions:
            if op.kind in (SHUTTLE, CROSS):
                last_hop[q] = n
            elif q in last_hop:
                resting.add(last_hop.pop(q))
    resting |= set(last_hop.values())

    for n, op in enumerate(schedule.ops):
        if op.kind in (SHUTTLE, CROSS):
            src, dst = op.zones[0], op.zones[-1]
            for q in op.ions:
                if placement.zone_of.get(q) != src:
                    flag(f"op {n}: ion {q} leaves {src} but sits in {placement.zone_of.get(q)}")
                    continue
                placement.move(q, dst)
            if n in resting and placement.occupancy(dst) > arch.zones[dst].capacity:
                flag(f"op {n}: capacity of {dst} exceeded ({placement.occupancy(dst)} > {arch.zones[dst].capacity})")
            if op.kind is CROSS and (len(op.zones) != 3 or op.zones[1] not in arch.junctions):
                flag(f"op {n}: junction crossing without a junction {op.zones}")
        elif op.kind is MERGE and op.wells != 2:
            flag(f"op {n}: merge of {op.wells} wells")
        elif op.kind is SWAP and len(op.ions) != 2:
            flag(f"op {n}: swap on {len(op.ions)} ions")
        elif op.kind is GATE2Q:
            where = {placement.zone_of[q] for q in op.ions}
            zone  = arch.zones[op.zones[0]]
            if where != {zone.id}:
                flag(f"op {n}: gate on {op.ions} in {zone.id} but ions sit in {sorted(where)}")
            if not (zone.gate_capable if arch.integrated else zone.role is ZoneRole.WORKING):
                flag(f"op {n}: two-qubit gate in {zone.role.value} zone {zone.id}")

        if arch.integrated:
            if op.kind in (GATE1Q, GATE2Q) and any(nbar[q] > schedule.target_nbar + _EPS for q in op.ions):
                flag(f"op {n}: {op.kind.value} on {op.ions} without recool (n̄ up to {max(nbar[q] for q in op.ions):.2f})")
            for q in op.ions:
                nbar[q] = schedule.target_nbar if op.kind is RECOOL else nbar[q] + op.excitation
        elif op.kind is RECOOL and (previous is None or previous.kind is not READOUT
                                    or set(previous.ions) != set(op.ions)):
            flag(f"op {n}: recool on {op.ions} that does not follow their detection")
        previous = op

    for junction in arch.junctions:
        crossings = sorted((op for op in schedule.ops if op.kind is CROSS and junction in op.zones),
                           key=lambda op: op.start)
        for a, b in zip(crossings, crossings[1:]):
            if b.start < a.end - _EPS:
                flag(f"junction {junction}: crossings of {a.ions} and {b.ions} overlap")

    if report.ok:
        logger.debug(f"✅ Audit passed: {schedule!r}")
    else:
        logger.error(str(report))
    return report
