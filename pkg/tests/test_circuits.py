"""
Circuit IR and protocol tree tests
──────────────────────────────────
Architecture:
  test_circuits.py  ← assertions + test intent only  (this file)
  circuits/         ← circuits, predicates, trees, executor, validation, serialisation

The trees here are hand-built three- to six-qubit protocols; the color-code
gadgets are covered in test_gadgets.py.
"""

import json
import logging

import allure
import numpy as np
import pytest

from circuits.circuit import Circuit, CircuitBuilder
from circuits.executor import DenseExecutor, ExecutionResult, TerminalResult, execute_tree, logical_outcome
from circuits.instructions import Detector, Measure, Reset
from circuits.predicates import AnyOf, Bit, Parity, PatternIn, RecordView, none_of
from circuits.protocol_tree import ACCEPT, DISCARD, ProtocolTree, Terminal, single_node_tree
from circuits.serialization import dump_tree, tree_from_dict
from circuits.validation import validate_tree
from engine.errors import PredicateError
from engine.pauli_frame import MeasurementRecord, PauliFrame
from engine.shot_store import ShotStore
from noise.channels import NoiseChannel
from noise.models import ScemModel

logger = logging.getLogger(__name__)


# ──────────────────────────────────────────────────────────────────────────────
# HELPERS
# ──────────────────────────────────────────────────────────────────────────────

def bell_parity_circuit(drop_entangler: bool = False) -> Circuit:
    """Bell pair on (0, 1) with an X-basis ancilla reading the XX stabiliser."""
    b = CircuitBuilder(3, name="bell_parity")
    b.layer(Reset(0), Reset(1), Reset(2, "X"))
    b.layer(b.gate("H", 0))
    if not drop_entangler:
        b.layer(b.cnot(0, 1))
    b.layer(b.cnot(2, 0))
    b.layer(b.cnot(2, 1))
    b.layer(Measure(2, "X", "xx"))
    return b.build()


def parity_check_tree() -> ProtocolTree:
    """Z0 Z1 parity check; a raised ancilla is post-selected away."""
    b = CircuitBuilder(3, name="parity_check")
    b.layer(Reset(0), Reset(1), Reset(2))
    b.layer(b.cnot(0, 2))
    b.layer(b.cnot(1, 2))
    b.layer(Measure(2, "Z", "s"))

    tree = ProtocolTree(3, "parity_check", observable=PauliFrame.from_string("Z0"))
    tree.add_node("check", b.build())
    tree.add_node("flagged", Circuit(3, name="flagged"), Terminal(DISCARD))
    tree.add_node("clean", Circuit(3, name="clean"), Terminal(ACCEPT, data_qubits=(0, 1)))
    tree.add_edge("check", Bit("s"), "flagged")
    tree.add_edge("check", ~Bit("s"), "clean")
    return tree.check()


def readout_tree(n: int, p: float) -> ProtocolTree:
    """``n`` fresh qubits read out with classical flip rate ``p``; any raised bit leaves the main path."""
    labels = tuple(f"m{q}" for q in range(n))
    b = CircuitBuilder(n, name="readout")
    b.layer(*(Reset(q) for q in range(n)))
    b.layer(*(Measure(q, "Z", labels[q], noise=NoiseChannel.meas_flip(q, p)) for q in range(n)))

    tree = ProtocolTree(n, "readout")
    tree.add_node("readout", b.build())
    tree.add_node("raised", Circuit(n, name="raised"), Terminal(DISCARD))
    tree.add_node("quiet", Circuit(n, name="quiet"), Terminal(ACCEPT))
    tree.add_edge("readout", AnyOf(labels), "raised")
    tree.add_edge("readout", none_of(AnyOf(labels)), "quiet")
    return tree.check()


def ghz_tree() -> ProtocolTree:
    """Three-qubit GHZ state, a Z0 Z1 parity ancilla that gates acceptance, then Z readout of the data."""
    labels = ("m0", "m1", "m2")
    b = CircuitBuilder(4, name="ghz")
    b.layer(*(Reset(q) for q in range(4)))
    b.layer(b.gate("H", 0))
    b.layer(b.cnot(0, 1))
    b.layer(b.cnot(1, 2))
    b.layer(b.cnot(0, 3))
    b.layer(b.cnot(1, 3))
    b.layer(Measure(3, "Z", "s"))
    b.layer(*(Measure(q, "Z", labels[q]) for q in range(3)))

    tree = ProtocolTree(4, "ghz", observable=PauliFrame.from_string("Z0 Z1"))
    tree.add_node("ghz", b.build())
    tree.add_node("flagged", Circuit(4, name="flagged"), Terminal(DISCARD))
    tree.add_node("clean", Circuit(4, name="clean"), Terminal(ACCEPT, data_qubits=(0, 1, 2)))
    tree.add_edge("ghz", Bit("s"), "flagged")
    tree.add_edge("ghz", ~Bit("s"), "clean")
    return tree.check()


def outcome_histogram(result: ExecutionResult) -> dict[tuple[str, int], int]:
    """(terminal, record pattern) → shots; implicit trivial shots carry the all-zero pattern."""
    counts: dict[tuple[str, int], int] = {}
    for batch in result.batches:
        weights  = np.left_shift(1, np.arange(batch.rec.shape[1], dtype=np.int64))
        patterns = batch.rec.astype(np.int64) @ weights
        for pattern, n in zip(*np.unique(patterns, return_counts=True)):
            key = (batch.node_id, int(pattern))
            counts[key] = counts.get(key, 0) + int(n)
        if batch.n_trivial:
            counts[(batch.node_id, 0)] = counts.get((batch.node_id, 0), 0) + batch.n_trivial
    return counts


def total_variation(first: dict, second: dict, n: int) -> float:
    keys = set(first) | set(second)
    return 0.5 * sum(abs(first.get(k, 0) - second.get(k, 0)) for k in keys) / n


# ──────────────────────────────────────────────────────────────────────────────
# TESTS
# ──────────────────────────────────────────────────────────────────────────────

@allure.feature("Circuit IR")
@allure.story("Circuit Construction")
class TestCircuitConstruction:

    @allure.title("Layers mark idle live qubits and reject reused operands")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.smoke
    @pytest.mark.regression
    def test_builder_layers(self):
        logger.info("🧪 TEST: Builder layers")

        # ── Act ────────────────────────────────────────────────────────────
        circuit = bell_parity_circuit()
        idles   = [ins for ins in circuit.instructions if type(ins).__name__ == "Idle"]

        # ── Assert ─────────────────────────────────────────────────────────
        with allure.step("Verify depth counts only operation layers"):
            assert circuit.depth == 6, f"Expected 6 layers, got {circuit.depth}"
        with allure.step("Verify the waiting qubits receive idle markers"):
            assert idles[0].qubits == (1, 2), f"H layer should idle qubits 1 and 2, got {idles[0].qubits}"
            assert all(2 not in ins.qubits for ins in idles[-1:]), "the measured ancilla idles nowhere after its layer"
        with allure.step("Verify a qubit cannot be used twice in one layer"):
            with pytest.raises(ValueError):
                CircuitBuilder(2).layer(CircuitBuilder.cnot(0, 1), CircuitBuilder.gate("H", 1))

        logger.info("✅ TEST PASSED: Builder layers")

    @allure.title("Operands and labels are checked")
    @allure.description("Out-of-range qubits, repeated labels and detectors on later measurements are rejected")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_circuit_checks(self):
        with pytest.raises(ValueError):
            Circuit(2, [Reset(5)])
        with pytest.raises(ValueError):
            Circuit(2, [Measure(0, "Z", "m"), Measure(1, "Z", "m")])
        with pytest.raises(ValueError):
            Measure(0, "Y", "m")

        early = Circuit(2, [Detector(("m",)), Measure(0, "Z", "m")], name="early_detector")
        with pytest.raises(ValueError):
            single_node_tree(early).check()

    @allure.title("Enumerated patterns agree with the rule they tabulate")
    @allure.description("PatternIn over three bits matches a parity rule on every one of 10^5 random records")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_pattern_predicate(self):
        labels  = ("a", "b", "c")
        rule    = PatternIn.from_function(labels, lambda bits: (bits[0] ^ bits[2]) == 1)
        parity  = Parity(("a", "c"), 1)
        rec     = np.random.default_rng(4).integers(0, 2, size=(100_000, 3)).astype(bool)
        view    = RecordView(rec, {"a": 0, "b": 1, "c": 2})

        assert np.array_equal(rule.evaluate(view), parity.evaluate(view))
        both = np.stack([parity.evaluate(view), (~parity).evaluate(view)], axis=1)
        assert np.all(both.sum(axis=1) == 1), "a predicate and its complement must partition the records"


@allure.feature("Circuit IR")
@allure.story("Noiseless Validation")
class TestValidation:

    @allure.title("A correct Bell-parity circuit validates")
    @allure.severity(allure.severity_level.BLOCKER)
    @pytest.mark.smoke
    @pytest.mark.regression
    def test_valid_circuit(self):
        logger.info("🧪 TEST: Valid Bell parity")

        report = validate_tree(single_node_tree(bell_parity_circuit()))

        allure.attach(str(report), name="Validation report", attachment_type=allure.attachment_type.TEXT)
        with allure.step("Verify no declared-deterministic bit flipped"):
            assert report.ok, str(report)
            assert report.n_shots >= 10_000

        logger.info("✅ TEST PASSED: Valid Bell parity")

    @allure.title("Deleting the entangling CNOT is reported at the parity measurement")
    @allure.description("The XX readout becomes random; the report names the node and instruction index")
    @allure.severity(allure.severity_level.BLOCKER)
    @pytest.mark.smoke
    @pytest.mark.regression
    def test_corrupted_circuit(self):
        logger.info("🧪 TEST: Corrupted Bell parity")

        # ── Arrange ────────────────────────────────────────────────────────
        circuit = bell_parity_circuit(drop_entangler=True)
        index   = next(i for i, ins in enumerate(circuit.instructions) if isinstance(ins, Measure))

        # ── Act ────────────────────────────────────────────────────────────
        report = validate_tree(single_node_tree(circuit))
        allure.attach(str(report), name="Validation report", attachment_type=allure.attachment_type.TEXT)

        # ── Assert ─────────────────────────────────────────────────────────
        with allure.step("Verify the first violation points at the XX measurement"):
            assert not report.ok, "a random outcome was not caught"
            assert report.first.kind == "measurement"
            assert report.first.node_id == "root"
            assert report.first.index == index, f"Expected instruction {index}, got {report.first.index}"
            assert report.first.count > 0

        logger.info("✅ TEST PASSED: Corrupted circuit caught")

    @allure.title("Declared-random outcomes are exempt")
    @allure.description("An X measurement of a fresh |0⟩ fails validation unless it is declared random")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_declared_random(self):
        undeclared = Circuit(1, [Reset(0), Measure(0, "X", "m")], name="x_on_zero")
        declared   = Circuit(1, [Reset(0), Measure(0, "X", "m", random=True)], name="x_on_zero_random")

        assert not validate_tree(single_node_tree(undeclared), n_shots=2_000).ok
        assert validate_tree(single_node_tree(declared), n_shots=2_000).ok


@allure.feature("Circuit IR")
@allure.story("Branching Execution")
class TestExecution:

    @allure.title("Every shot ends at exactly one terminal")
    @allure.severity(allure.severity_level.BLOCKER)
    @pytest.mark.smoke
    @pytest.mark.regression
    def test_shot_conservation(self):
        result = execute_tree(parity_check_tree(), 20_000, ScemModel(0.02), seed=3, block_size=4_096)

        with allure.step("Verify terminal populations add up to n_shots"):
            assert sum(result.terminal_counts().values()) == 20_000
            assert result.accepted + result.discarded == 20_000
            assert result.branch_counts["check"] == 20_000
        with allure.step("Verify noise drives some shots down the flagged edge"):
            assert result.discarded > 0 and result.terminal_counts()["flagged"] == result.discarded

    @allure.title("Zero noise keeps every shot on the main path")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.smoke
    def test_zero_noise(self):
        result = execute_tree(parity_check_tree(), 5_000, ScemModel(0.0), seed=1)
        assert result.discarded == 0
        assert result.failures() == 0
        assert result.branch_counts["clean"] == 5_000

    @allure.title("Unsatisfied predicates are a hard error naming the node")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_predicate_error(self):
        tree = ProtocolTree(3, "incomplete")
        tree.add_node("check", parity_check_tree().nodes["check"].circuit)
        tree.add_node("flagged", Circuit(3), Terminal(DISCARD))
        tree.add_edge("check", Bit("s"), "flagged")

        with pytest.raises(PredicateError) as error:
            execute_tree(tree, 100, seed=0)
        assert error.value.node_id == "check"
        assert error.value.n_unmatched == 100

    @allure.title("Replays are identical for any worker count")
    @allure.description("Terminal assignment, failures and frames depend on (seed, tree) only")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_replay_across_workers(self):
        logger.info("🧪 TEST: Worker-count determinism")
        tree   = parity_check_tree()
        kwargs = dict(n_shots=6_000, noise=ScemModel(0.05), seed=11, block_size=1_000)

        # ── Act ────────────────────────────────────────────────────────────
        serial   = execute_tree(tree, workers=1, **kwargs)
        parallel = execute_tree(tree, workers=3, **kwargs)

        # ── Assert ─────────────────────────────────────────────────────────
        with allure.step("Verify terminal counts and failure masks match"):
            assert serial.terminal_counts() == parallel.terminal_counts()
            assert serial.branch_counts == parallel.branch_counts
            assert serial.failure_mask() == parallel.failure_mask()
        with allure.step("Verify per-shot frames match"):
            for shot in range(0, 6_000, 37):
                assert serial.result(shot).frame == parallel.result(shot).frame, f"shot {shot} differs"
                assert serial.result(shot).node_id == parallel.result(shot).node_id

        logger.info("✅ TEST PASSED: Replays identical")

    @allure.title("Leaving the main path matches the first-fault probability")
    @allure.description("Six readout-flip sites at p = 0.01: P(leave) = 1 - (1 - p)^6")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.statistical
    @pytest.mark.regression
    def test_branch_population(self, stat_shots):
        p, sites = 0.01, 6
        n        = max(stat_shots, 100_000)
        result   = execute_tree(readout_tree(sites, p), n, seed=21)

        expected = 1.0 - (1.0 - p) ** sites
        observed = result.discarded / n
        sigma    = np.sqrt(expected * (1 - expected) / n)

        allure.attach(f"observed {observed:.5f}\nexpected {expected:.5f}\nσ {sigma:.2e}",
                      name="Branch population", attachment_type=allure.attachment_type.TEXT)
        assert abs(observed - expected) < 4 * sigma, f"{observed:.5f} vs {expected:.5f} (σ={sigma:.1e})"


@allure.feature("Circuit IR")
@allure.story("Dense Reference Executor")
class TestDenseReference:

    @allure.title("Sparse and dense executors sample the same outcome distribution")
    @allure.description("Noisy GHZ readout at SCEM p = 0.05: total-variation distance of (terminal, record) histograms")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.statistical
    @pytest.mark.regression
    def test_same_distribution(self, stat_shots):
        logger.info("🧪 TEST: Sparse vs dense distribution")
        n, noise = max(stat_shots, 100_000), ScemModel(0.05)

        # ── Act ────────────────────────────────────────────────────────────
        sparse = execute_tree(ghz_tree(), n, noise, seed=31)
        dense  = DenseExecutor(ghz_tree(), noise).run(n, seed=32)

        # ── Assert ─────────────────────────────────────────────────────────
        with allure.step("Verify both runs conserve shots"):
            assert sum(outcome_histogram(sparse).values()) == n
            assert sum(outcome_histogram(dense).values()) == n
        with allure.step("Verify dense run keeps every shot explicit"):
            assert all(batch.n_trivial == 0 for batch in dense.batches)

        distance = total_variation(outcome_histogram(sparse), outcome_histogram(dense), n)
        allure.attach(f"TV distance {distance:.5f} over {n} shots each", name="Sparse vs dense",
                      attachment_type=allure.attachment_type.TEXT)
        assert distance < 0.02, f"TV distance {distance:.4f}"
        assert abs(sparse.discarded - dense.discarded) < 5 * np.sqrt(n * 0.25), "discard rates disagree"

        logger.info(f"✅ TEST PASSED: TV distance {distance:.4f}")

    @allure.title("Sparse frame work grows with faults, not with shots × gates")
    @allure.description(
        "Rows conjugated by gates are counted: the dense executor touches every shot at every gate, "
        "the sparse store only shots that already carry a fault"
    )
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_work_follows_faults(self, monkeypatch):
        logger.info("🧪 TEST: Sparse work bound")
        touched  = {"rows": 0}
        original = ShotStore.apply_gate

        def counting_apply_gate(store, action):
            touched["rows"] += store.n_rows
            original(store, action)

        monkeypatch.setattr(ShotStore, "apply_gate", counting_apply_gate)
        n = 20_000

        def gate_rows(p: float, *, dense: bool = False) -> int:
            touched["rows"] = 0
            execute_tree(ghz_tree(), n, ScemModel(p), seed=5, dense=dense)
            return touched["rows"]

        # ── Act ────────────────────────────────────────────────────────────
        dense_rows = gate_rows(1e-3, dense=True)
        noiseless  = gate_rows(0.0)
        low        = gate_rows(1e-3)
        doubled    = gate_rows(2e-3)

        # ── Assert ─────────────────────────────────────────────────────────
        with allure.step("Verify the dense run conjugates every shot at each of the five gates"):
            assert dense_rows == 5 * n
        with allure.step("Verify a noiseless sparse run touches no row"):
            assert noiseless == 0
        with allure.step("Verify sparse work is a small fraction of dense work"):
            assert 0 < low < 0.05 * dense_rows
        with allure.step("Verify sparse work roughly doubles with the fault rate"):
            assert 1.5 < doubled / low < 2.6, f"{low} → {doubled}"

        allure.attach(f"dense {dense_rows}\nsparse p=1e-3 {low}\nsparse p=2e-3 {doubled}",
                      name="Gate-row updates", attachment_type=allure.attachment_type.TEXT)
        logger.info("✅ TEST PASSED: Sparse work bound")


@allure.feature("Circuit IR")
@allure.story("Logical Outcome")
class TestLogicalOutcome:

    @staticmethod
    def _result(frame: str, correction: str = "") -> TerminalResult:
        return TerminalResult("end", ACCEPT, PauliFrame.from_string(frame), MeasurementRecord(),
                              PauliFrame.from_string(correction), data_qubits=tuple(range(7)))

    @allure.title("Anticommutation parity of the corrected frame")
    @allure.severity(allure.severity_level.BLOCKER)
    @pytest.mark.smoke
    @pytest.mark.regression
    def test_examples(self):
        z_logical = PauliFrame.from_string("Z0 Z1 Z4")
        x_logical = PauliFrame.from_string("X0 X1 X4")

        assert logical_outcome(self._result(""), z_logical) == 0
        assert logical_outcome(self._result("X0 X1 X4"), z_logical) == 1
        assert logical_outcome(self._result("Z0 Z1 Z2 Z3"), x_logical) == 0
        assert logical_outcome(self._result("X0", correction="X0"), z_logical) == 0

    @allure.title("Observables on dead qubits are rejected")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_dead_qubit(self):
        with pytest.raises(ValueError):
            logical_outcome(self._result("X0"), PauliFrame.from_string("Z9"))


@allure.feature("Circuit IR")
@allure.story("Tree Serialisation")
class TestSerialisation:

    @allure.title("A reloaded tree executes identically")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_reload_executes_identically(self, tmp_path):
        tree     = parity_check_tree()
        text     = dump_tree(tree, tmp_path / "tree.json")
        reloaded = tree_from_dict(json.loads(text))

        assert (tmp_path / "tree.json").exists()
        assert json.loads(text)["version"] == 1
        first  = execute_tree(tree, 4_000, ScemModel(0.03), seed=8)
        second = execute_tree(reloaded, 4_000, ScemModel(0.03), seed=8)
        assert first.terminal_counts() == second.terminal_counts()
        assert first.failure_mask() == second.failure_mask()

    @allure.title("Unknown format versions are refused")
    @allure.severity(allure.severity_level.MINOR)
    def test_bad_version(self):
        data = json.loads(dump_tree(parity_check_tree()))
        data["version"] = 99
        with pytest.raises(ValueError):
            tree_from_dict(data)
