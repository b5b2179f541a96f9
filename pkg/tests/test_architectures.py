"""
Ion architecture tests
──────────────────────
Architecture:
  test_architectures.py  ← assertions + test intent only  (this file)
  architectures/         ← trap layouts, timing scenarios, transpiler, audit, lowering
"""

import csv
import logging
import math

import allure
import pytest
from pydantic import ValidationError

from architectures import (
    ARCHITECTURES,
    SCENARIOS,
    ArchitectureModel,
    PrimitiveKind,
    PrimitiveOp,
    Schedule,
    TimingScenario,
    Zone,
    ZoneRole,
    accumulate_excitation,
    audit_schedule,
    cooling_time,
    export_schedule_csv,
    load_architecture,
    load_timing_scenario,
    lower_to_noisy_circuit,
    transpile,
    transpile_circuit,
)
from circuits.circuit import Circuit
from circuits.instructions import Noise, Reset
from circuits.protocol_tree import single_node_tree
from engine.errors import InfeasibleScheduleError
from engine.gates import CliffordAction, GateKind
from gadgets.se_circuits import gen_se_circuit
from gadgets.teleport import SURGERY, gen_lattice_surgery_round
from noise.channels import ChannelKind
from noise.models import MultiChannelParams
from services.analysis_service import sections

logger = logging.getLogger(__name__)

RECOOL, READOUT, GATE2Q = PrimitiveKind.RECOOL, PrimitiveKind.READOUT, PrimitiveKind.GATE2Q


# ──────────────────────────────────────────────────────────────────────────────
# HELPERS
# ──────────────────────────────────────────────────────────────────────────────

def surgery_gate_zones(schedule: Schedule) -> list[str]:
    """Zone of every two-qubit gate touching a surgery ancilla, in schedule order."""
    return [op.zones[0] for op in schedule.ops if op.kind is GATE2Q and set(op.ions) & set(SURGERY)]


def run_lengths(zones: list[str]) -> list[tuple[str, int]]:
    runs: list[tuple[str, int]] = []
    for zone in zones:
        if runs and runs[-1][0] == zone:
            runs[-1] = (zone, runs[-1][1] + 1)
        else:
            runs.append((zone, 1))
    return runs


def idle_gap_schedule(arch) -> Schedule:
    """Two resets, a 500 µs recool, one CNOT: both qubits idle through the recool."""
    circuit = Circuit(2, [Reset(0), Reset(1), CliffordAction(GateKind.CNOT, (0, 1))], name="idle_gap")
    ops = (
        PrimitiveOp(PrimitiveKind.GATE1Q, (0,), ("W1",), 0.0, 300.0, instructions=(0,)),
        PrimitiveOp(PrimitiveKind.GATE1Q, (1,), ("W1",), 0.0, 300.0, instructions=(1,)),
        PrimitiveOp(RECOOL, (0, 1), ("W1",), 300.0, 800.0),
        PrimitiveOp(GATE2Q, (0, 1), ("W1",), 800.0, 1100.0, instructions=(2,)),
    )
    return Schedule(arch, "current", circuit, ops, arch.home_placement(2), 0.01)


# ──────────────────────────────────────────────────────────────────────────────
# TESTS
# ──────────────────────────────────────────────────────────────────────────────

@allure.feature("Ion Architectures")
@allure.story("Cooling and Excitation")
class TestCooling:

    @allure.title("Recooling time after {nbar} quanta at W_c={rate}/s is about {expected_ms} ms")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.smoke
    @pytest.mark.regression
    @pytest.mark.parametrize("nbar, rate, expected_ms", [
        (27.0, 1e4, 0.79),
        (9.0,  3e4, 0.23),
        (2.4,  5e4, 0.11),
    ], ids=["current", "intermediate", "optimistic"])
    def test_cooling_time(self, nbar, rate, expected_ms):
        logger.info(f"🧪 TEST: cooling time for n̄={nbar}")

        seconds = cooling_time(nbar, 0.01, rate)
        allure.attach(f"{seconds * 1e3:.4f} ms", name="Cooling time", attachment_type=allure.attachment_type.TEXT)
        assert seconds * 1e3 == pytest.approx(expected_ms, abs=0.005)

        logger.info("✅ TEST PASSED: cooling time")

    @allure.title("Already cold crystals need no cooling")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_cold(self):
        assert cooling_time(0.01, 0.01, 1e4) == 0.0
        assert cooling_time(0.005, 0.01, 1e4) == 0.0

    @allure.title("Cooling time grows with n̄ and shrinks with the cooling rate")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_monotonic(self):
        nbars = [0.1, 1.0, 4.3, 27.0, 100.0]
        times = [cooling_time(n, 0.01, 1e4) for n in nbars]
        assert times == sorted(times) and len(set(times)) == len(times)

        rates = [1e4, 3e4, 5e4]
        times = [cooling_time(27.0, 0.01, w) for w in rates]
        assert times == sorted(times, reverse=True) and len(set(times)) == len(times)

    @allure.title("Non-positive target n̄ or cooling rate is rejected")
    @allure.severity(allure.severity_level.MINOR)
    @pytest.mark.regression
    @pytest.mark.parametrize("nbar0, rate", [(0.0, 1e4), (0.01, 0.0), (-1.0, 1e4)])
    def test_bad_inputs(self, nbar0, rate):
        with pytest.raises(ValueError):
            cooling_time(1.0, nbar0, rate)

    @allure.title("Excitation adds the coherent and thermal part of every op")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_excitation(self):
        current = load_timing_scenario("current")

        with allure.step("Verify single-op totals of the current scenario"):
            assert accumulate_excitation(["swap"], current) == pytest.approx(4.3)
            assert accumulate_excitation([PrimitiveKind.SPLIT], current) == pytest.approx(3.3)
            assert accumulate_excitation(["readout"], current) == pytest.approx(10.0)
        with allure.step("Verify sums and the empty history"):
            history = ["split", "linear_shuttle", "merge", "swap", "readout"]
            assert accumulate_excitation(history, current) == pytest.approx(3.3 + 2.3 + 3.3 + 4.3 + 10.0)
            assert accumulate_excitation([], current) == 0.0
        with allure.step("Verify timed ops carry their own excitation"):
            op = PrimitiveOp(PrimitiveKind.SWAP, (0, 1), ("W1",), 0.0, 300.0, coherent=4.0, thermal=0.3)
            assert accumulate_excitation([op, op]) == pytest.approx(8.6)

    @allure.title("Step-two history heats the crystal to {quanta} quanta and recools in about {expected_ms} ms ({tag})")
    @allure.description("Seven split/merge/junction-crossing ops plus one swap, priced per scenario and recooled to the target n̄")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    @pytest.mark.parametrize("tag, quanta, tolerance, expected_ms", [
        ("current",      27.0, 0.5, 0.79),
        ("intermediate",  9.0, 0.2, 0.23),
        ("optimistic",    2.4, 0.05, 0.11),
    ])
    def test_step_two_example(self, tag, quanta, tolerance, expected_ms):
        logger.info(f"🧪 TEST: step-two excitation ({tag})")

        # ── Arrange ───────────────────────────────────────────────────────
        scenario = load_timing_scenario(tag)
        history  = ["split"] + ["junction_cross"] * 5 + ["merge", "swap"]

        # ── Act ───────────────────────────────────────────────────────────
        nbar    = accumulate_excitation(history, scenario)
        seconds = cooling_time(nbar, scenario.target_nbar, scenario.cooling_rate)
        allure.attach(f"n̄={nbar:.3f}  t={seconds * 1e3:.4f} ms", name="Step two", attachment_type=allure.attachment_type.TEXT)

        # ── Assert ────────────────────────────────────────────────────────
        assert nbar == pytest.approx(quanta, abs=tolerance)
        assert seconds * 1e3 == pytest.approx(expected_ms, abs=0.005)

        logger.info(f"✅ TEST PASSED: step-two excitation ({tag})")

    @allure.title("Pricing a bare op kind needs a scenario")
    @allure.severity(allure.severity_level.MINOR)
    def test_excitation_needs_scenario(self):
        with pytest.raises(ValueError):
            accumulate_excitation(["swap"])

    @allure.title("Heating falls and cooling speeds up from current to optimistic")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_scenario_rates(self, timing_data):
        scenarios = [load_timing_scenario(tag) for tag in SCENARIOS]
        assert [s.heating_rate for s in scenarios] == [1e3, 1e2, 1.0]
        assert [s.cooling_rate for s in scenarios] == [1e4, 3e4, 5e4]
        assert all(s.target_nbar == timing_data["target_nbar"] == 0.01 for s in scenarios)
        assert [s.recool_duration(0.0, integrated=False) for s in scenarios] == [2000, 1000, 500]


@allure.feature("Ion Architectures")
@allure.story("Layouts and Scenarios")
class TestLayouts:

    @allure.title("All three layouts load with connected zone graphs")
    @allure.severity(allure.severity_level.BLOCKER)
    @pytest.mark.smoke
    @pytest.mark.regression
    def test_load_all(self, architecture_data):
        for kind in ARCHITECTURES:
            arch = load_architecture(kind)
            allure.attach(repr(arch), name=kind, attachment_type=allure.attachment_type.TEXT)
            assert len(arch.zones) == len(architecture_data["architectures"][kind]["zones"])
            assert arch.integrated == (kind != "AbaQusA")

    @allure.title("Integrated working zones hold two ions, storage three; AbaQusA chains hold 13")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_capacities(self):
        linear = load_architecture("AbaQusA")
        assert {z.capacity for z in linear.zones_with(ZoneRole.WORKING)} == {13}
        assert len(linear.zones_with(ZoneRole.DETECTION)) == 3
        for kind in ("AbaQusS", "AbaQusX"):
            arch = load_architecture(kind)
            assert {z.capacity for z in arch.zones_with(ZoneRole.WORKING)} == {2}
            assert {z.capacity for z in arch.zones_with(ZoneRole.IDLE)} == {3}
            assert [z.id for z in arch.zones_with(ZoneRole.INTERFACE)] == ["IF1", "IF2"]
        assert load_architecture("AbaQusX").junctions == ("X1", "X2")

    @allure.title("Home placement: one block, the 28-qubit teleportation layout, nothing else")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_home_placement(self):
        arch = load_architecture("AbaQusS")

        with allure.step("Verify the teleportation layout"):
            placement = arch.home_placement(28)
            assert placement.surgery == frozenset(SURGERY)
            assert placement.zone_of[26] == "IF1" and placement.zone_of[27] == "IF2"
            assert all(arch.zones[placement.zone_of[q]].block == 0 for q in range(7))
            assert all(arch.zones[placement.zone_of[q]].block == 1 for q in range(7, 14))
        with allure.step("Verify impossible sizes are rejected"):
            with pytest.raises(ValueError):
                arch.home_placement(20)

    @allure.title("AbaQusA chain neighbours share motional modes; integrated traps have none")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_crosstalk_neighbours(self):
        linear     = load_architecture("AbaQusA")
        neighbours = linear.crosstalk_neighbours(linear.home_placement(13))
        assert neighbours[0] == (1,)
        assert neighbours[5] == (4, 6)
        integrated = load_architecture("AbaQusS")
        assert integrated.crosstalk_neighbours(integrated.home_placement(13)) == {}

    @allure.title("Unknown names are rejected")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_unknown(self):
        with pytest.raises(ValueError):
            load_architecture("AbaQusZ")
        with pytest.raises(ValueError):
            load_timing_scenario("pessimistic")
        with pytest.raises(ValidationError):
            TimingScenario.model_validate({**load_timing_scenario("current").model_dump(), "tag": "pessimistic"})

    @allure.title("Malformed primitives and zones are rejected")
    @allure.severity(allure.severity_level.MINOR)
    def test_bad_primitives(self):
        with pytest.raises(ValueError):
            PrimitiveOp(PrimitiveKind.SWAP, (0, 1), ("W1",), 10.0, 5.0)
        with pytest.raises(ValueError):
            PrimitiveOp(PrimitiveKind.SWAP, (0, 1), ("W1",), 0.0, 5.0, coherent=-1.0)
        with pytest.raises(ValueError):
            Zone("W9", ZoneRole.WORKING, 0)
        assert PrimitiveKind.SWAP.category == "transport"
        assert PrimitiveKind.READOUT.category == "gate"
        assert RECOOL.category == "recool"


@allure.feature("Ion Architectures")
@allure.story("Transpilation")
class TestTranspiler:

    @allure.title("AbaQusA surgery ancillas run their CNOTs in a 2-3-1 grouping across the blocks")
    @allure.severity(allure.severity_level.BLOCKER)
    @pytest.mark.smoke
    @pytest.mark.regression
    def test_surgery_itinerary(self):
        logger.info("🧪 TEST: lattice-surgery itinerary on AbaQusA")

        # ── Act ───────────────────────────────────────────────────────────
        schedule = transpile_circuit(gen_lattice_surgery_round(), "AbaQusA", "current")
        runs     = run_lengths(surgery_gate_zones(schedule))
        allure.attach(str(runs), name="Chain visits", attachment_type=allure.attachment_type.TEXT)

        # ── Assert ────────────────────────────────────────────────────────
        with allure.step("Verify the visit pattern"):
            assert [count for _, count in runs] == [2, 3, 1]
            assert runs[0][0] == runs[2][0] != runs[1][0]
            assert {zone for zone, _ in runs} == {"W1", "W2"}
        with allure.step("Verify the schedule is legal"):
            report = audit_schedule(schedule)
            assert report.ok, str(report)

        logger.info("✅ TEST PASSED: lattice-surgery itinerary")

    @allure.title("AbaQusS and AbaQusX share the lattice-surgery schedule")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    @pytest.mark.parametrize("scenario", SCENARIOS)
    def test_shared_surgery_schedule(self, scenario):
        circuit = gen_lattice_surgery_round()
        s = transpile_circuit(circuit, "AbaQusS", scenario)
        x = transpile_circuit(circuit, "AbaQusX", scenario)

        assert s.duration == pytest.approx(x.duration)
        assert [op.kind for op in s.ops] == [op.kind for op in x.ops]
        assert s.breakdown() == pytest.approx(x.breakdown())
        assert set(surgery_gate_zones(s)) == set(surgery_gate_zones(x)) == {"IF1", "IF2"}

    @allure.title("AbaQusX never needs more surgery transport ops than AbaQusS")
    @allure.description("Split, merge, shuttle, junction-crossing and swap counts of the joint measurement, compared op kind by op kind")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_surgery_transport_ordering(self):
        circuit = gen_lattice_surgery_round()
        s = transpile_circuit(circuit, "AbaQusS", "current")
        x = transpile_circuit(circuit, "AbaQusX", "current")
        kinds = (PrimitiveKind.SPLIT, PrimitiveKind.MERGE, PrimitiveKind.LINEAR_SHUTTLE,
                 PrimitiveKind.JUNCTION_CROSS, PrimitiveKind.SWAP)

        counts = {kind.value: (s.count(kind), x.count(kind)) for kind in kinds}
        allure.attach(str(counts), name="S vs X transport", attachment_type=allure.attachment_type.TEXT)
        for kind in kinds:
            assert x.count(kind) <= s.count(kind), kind
        assert 0 < x.count(*kinds) <= s.count(*kinds)

    @allure.title("Every section schedule passes the legality audit")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    @pytest.mark.parametrize("arch", ARCHITECTURES)
    def test_audit(self, arch):
        for name, circuit in sections().items():
            schedule = transpile_circuit(circuit, arch, "current")
            report   = audit_schedule(schedule)
            allure.attach(str(report), name=f"{arch} {name}", attachment_type=allure.attachment_type.TEXT)
            assert report.ok, str(report)

    @allure.title("AbaQusA cools only right after detection; integrated traps recool before hot gates")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_cooling_rule(self):
        circuit = gen_se_circuit("flagged", basis="X")

        with allure.step("Verify AbaQusA pairs every readout with one recool"):
            linear = transpile_circuit(circuit, "AbaQusA", "current")
            assert linear.count(RECOOL) == linear.count(READOUT) > 0
            for before, op in zip(linear.ops, linear.ops[1:]):
                if op.kind is RECOOL:
                    assert before.kind is READOUT and set(before.ions) == set(op.ions)
        with allure.step("Verify AbaQusS recools mid-sequence"):
            integrated = transpile_circuit(circuit, "AbaQusS", "current")
            assert integrated.count(RECOOL) > 0
            assert integrated.count(PrimitiveKind.SPLIT, PrimitiveKind.MERGE, PrimitiveKind.LINEAR_SHUTTLE) > 0

    @allure.title("Gate + transport + recool add up, and every section gets faster per scenario")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    @pytest.mark.parametrize("arch", ARCHITECTURES)
    def test_breakdown(self, arch):
        logger.info(f"🧪 TEST: duration breakdown on {arch}")

        rows = {tag: {name: transpile_circuit(c, arch, tag).breakdown() for name, c in sections().items()}
                for tag in SCENARIOS}
        allure.attach(str(rows), name="Breakdown (µs)", attachment_type=allure.attachment_type.TEXT)

        for name in sections():
            with allure.step(f"Verify {name}"):
                totals = [rows[tag][name]["total"] for tag in SCENARIOS]
                for tag in SCENARIOS:
                    row = rows[tag][name]
                    assert row["total"] == pytest.approx(row["gate"] + row["transport"] + row["recool"])
                assert totals[0] > totals[1] > totals[2] > 0
                for category in ("gate", "transport", "recool"):
                    values = [rows[tag][name][category] for tag in SCENARIOS]
                    assert values == sorted(values, reverse=True), f"{category} of {name}: {values}"

        logger.info(f"✅ TEST PASSED: duration breakdown on {arch}")

    @allure.title("A circuit without operations gives an empty schedule")
    @allure.severity(allure.severity_level.MINOR)
    @pytest.mark.regression
    @pytest.mark.parametrize("arch", ARCHITECTURES)
    def test_empty(self, arch):
        empty     = Circuit(7, [], name="empty")
        schedules = transpile(single_node_tree(empty), arch, "optimistic")
        assert list(schedules) == ["root"]
        assert schedules["root"].ops == ()
        assert schedules["root"].duration == 0.0
        assert schedules["root"].breakdown()["total"] == 0.0

    @allure.title("A gate between the two AbaQusA chains names the violated constraint")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_infeasible(self):
        circuit = Circuit(28, [CliffordAction(GateKind.CNOT, (0, 7))], name="cross_chain")
        with pytest.raises(InfeasibleScheduleError) as error:
            transpile_circuit(circuit, "AbaQusA", "current")
        assert error.value.constraint == "chain"

    @allure.title("Untouched stored qubits idle through the whole schedule")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_idle_intervals(self):
        schedule  = transpile_circuit(gen_lattice_surgery_round(), "AbaQusS", "current")
        intervals = schedule.idle_intervals()
        assert intervals[0] == [(0.0, schedule.duration)]
        assert 4 in intervals and sum(end - start for start, end in intervals[4]) < schedule.duration

    @allure.title("Schedule CSV has one row per (zone, op)")
    @allure.severity(allure.severity_level.MINOR)
    def test_csv(self, tmp_path):
        schedule = transpile_circuit(gen_se_circuit("flagged", basis="Z"), "AbaQusX", "intermediate")
        path     = export_schedule_csv(schedule, tmp_path / "timeline" / "se.csv")
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["zone", "start_us", "end_us", "kind", "ions", "instructions"]
        assert len(rows) - 1 == sum(len(op.zones) for op in schedule.ops)


@allure.feature("Ion Architectures")
@allure.story("Lowering")
class TestLowering:

    @allure.title("A 500 µs recool at T2=2 s dephases each waiting qubit with p ≈ 1.25e-4")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_idle_dephasing(self):
        logger.info("🧪 TEST: idle dephasing from a recool")

        # ── Arrange ───────────────────────────────────────────────────────
        schedule = idle_gap_schedule(load_architecture("AbaQusS"))
        params   = MultiChannelParams(p_1q=0.0, p_2q=0.0, p_m=0.0, p_r=0.0, t2=2.0)

        # ── Act ───────────────────────────────────────────────────────────
        noisy = lower_to_noisy_circuit(schedule, params)
        idles = [ins.channel for ins in noisy.instructions
                 if isinstance(ins, Noise) and ins.channel.kind is ChannelKind.IDLE_DEPHASE]

        # ── Assert ────────────────────────────────────────────────────────
        with allure.step("Verify one dephasing channel per waiting qubit"):
            assert sorted(c.qubits[0] for c in idles) == [0, 1]
        with allure.step("Verify the closed form ½(1 − e^(−t/T2))"):
            expected = 0.5 * (1 - math.exp(-500e-6 / 2.0))
            for channel in idles:
                assert channel.p == pytest.approx(expected, rel=1e-9)
                assert channel.p == pytest.approx(1.2498e-4, rel=1e-3)

        logger.info("✅ TEST PASSED: idle dephasing from a recool")

    @allure.title("All-zero rates and infinite T2 lower to a noiseless circuit")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_zero_rates(self):
        schedule = transpile_circuit(gen_se_circuit("flagged", basis="X"), "AbaQusS", "current")
        noisy    = lower_to_noisy_circuit(schedule, MultiChannelParams.uniform(0.0))
        assert all(ins.channel.p == 0.0 for ins in noisy.instructions if isinstance(ins, Noise))

    @allure.title("AbaQusA current: every CNOT carries p_2q=2e-2 and chain crosstalk 2e-4")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_abaqus_a_channels(self):
        model = ArchitectureModel("AbaQusA", "current", t2=2.0)
        noisy = model.attach(gen_se_circuit("flagged", basis="X"))
        assert model.tag == "AbaQusA_current_t2_2"

        instructions = noisy.instructions
        for i, ins in enumerate(instructions):
            if isinstance(ins, CliffordAction) and ins.kind.arity == 2:
                follow = instructions[i + 1]
                assert isinstance(follow, Noise) and follow.channel.kind is ChannelKind.DEPOL2
                assert follow.channel.p == pytest.approx(2e-2)
        crosstalk = [ins.channel for ins in instructions
                     if isinstance(ins, Noise) and ins.channel.kind is ChannelKind.CROSSTALK]
        assert crosstalk and all(c.p == pytest.approx(2e-4) for c in crosstalk)

    @allure.title("Integrated architectures attach no crosstalk")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_integrated_no_crosstalk(self):
        noisy = ArchitectureModel("AbaQusX", "optimistic").attach(gen_se_circuit("flagged", basis="Z"))
        kinds = {ins.channel.kind for ins in noisy.instructions if isinstance(ins, Noise)}
        assert ChannelKind.CROSSTALK not in kinds
        assert ChannelKind.IDLE_DEPHASE in kinds
