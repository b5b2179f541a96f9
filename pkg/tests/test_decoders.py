"""
Decoder tests
─────────────
Architecture:
  test_decoders.py  ← assertions + test intent only  (this file)
  decoders/         ← lookup tables, table builder, fault enumeration, ML oracle, DEM export

Table construction runs every single fault of a syndrome-extraction tree
once; the builds here take a few seconds each.
"""

import itertools
import logging

import allure
import pytest
import stim

from circuits.circuit import Circuit
from circuits.instructions import Measure, Noise, Reset
from circuits.protocol_tree import single_node_tree
from codes.color_code import build_hex_color_code
from decoders import LookupTable, brute_force_ml_decode, decode_lookup, syndrome_key, tables_equivalent
from decoders.builder import build_lookup, build_superdense_table, single_fault_signatures
from decoders.dem import dem_mechanisms, export_dem
from decoders.fault_enum import FaultSet, zero_path
from engine.errors import DecoderConsistencyError
from engine.gates import CliffordAction, GateKind
from engine.pauli_frame import PauliFrame
from gadgets import gen_se_tree
from noise.channels import NoiseChannel
from noise.models import ScemModel

logger = logging.getLogger(__name__)


# ──────────────────────────────────────────────────────────────────────────────
# HELPERS
# ──────────────────────────────────────────────────────────────────────────────

def two_qubit_depolarizing_tree(p: float):
    """CNOT followed by one depolarizing site; every letter flips a different set of observables."""
    circuit = Circuit(2, [Reset(0), Reset(1), CliffordAction(GateKind.CNOT, (0, 1)),
                          Noise(NoiseChannel.depol2(0, 1, p))], name="cnot_depol")
    return single_node_tree(circuit)


def expected_fault_count(faults: FaultSet) -> int:
    total = 0
    for node_id in faults.nodes:
        circuit = faults.tree.nodes[node_id].circuit
        for ins in circuit.instructions:
            if isinstance(ins, Noise) and not ins.channel.is_record_flip:
                total += len(ins.channel.letters())
            elif isinstance(ins, Measure) and not circuit.noiseless:
                total += 1
    return total


# ──────────────────────────────────────────────────────────────────────────────
# TESTS
# ──────────────────────────────────────────────────────────────────────────────

@allure.feature("Decoders")
@allure.story("Lookup Table")
class TestLookupTable:

    @allure.title("Published flag-aware table: examples")
    @allure.severity(allure.severity_level.BLOCKER)
    @pytest.mark.smoke
    @pytest.mark.regression
    def test_examples(self, published_table):
        logger.info("🧪 TEST: Lookup table examples")
        allure.attach(str(published_table), name="Lookup table", attachment_type=allure.attachment_type.TEXT)

        with allure.step("Verify single-qubit rows"):
            assert decode_lookup(published_table, "100", 0) == {0}
            assert decode_lookup(published_table, "001", 0) == {6}
        with allure.step("Verify a flag context selects the hook correction"):
            assert decode_lookup(published_table, "010", 1) == {2, 3}
            assert decode_lookup(published_table, "001", 2) == {4, 5}
        with allure.step("Verify the trivial syndrome needs no correction in any context"):
            for context in range(4):
                assert decode_lookup(published_table, "000", context) == frozenset()
        with allure.step("Verify unlisted contexts fall back to the un-flagged row"):
            assert published_table.decode("011", 3) == published_table.decode("011", 0) == {5}

        logger.info("✅ TEST PASSED: Lookup table examples")

    @allure.title("Corrections weigh at most two, and two only under a flag")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_weights(self, published_table):
        for (key, context), support in published_table.entries.items():
            assert len(support) <= 2, f"({key}, {context}) → {sorted(support)}"
            if len(support) == 2:
                assert context != 0, f"weight-2 correction without a flag at {key}"

    @allure.title("Syndromes may be given as strings, bit tuples or integers")
    @allure.severity(allure.severity_level.MINOR)
    def test_syndrome_forms(self, published_table):
        assert syndrome_key((0, 1, 0)) == syndrome_key(2) == "010"
        assert published_table.decode((1, 0, 1)) == published_table.decode(5) == {3}
        with pytest.raises(ValueError):
            syndrome_key("01")
        with pytest.raises(ValueError):
            published_table.decode("010", 4)

    @allure.title("Tables reload from their dictionary form")
    @allure.severity(allure.severity_level.MINOR)
    def test_reload(self, published_table):
        again = LookupTable.from_dict(published_table.to_dict())
        assert again == published_table
        assert (again.corrections == published_table.corrections).all()
        with pytest.raises(ValueError):
            LookupTable.from_dict({**published_table.to_dict(), "version": 99})


@allure.feature("Decoders")
@allure.story("Table Construction")
class TestTableConstruction:

    @allure.title("Building from the flagged extraction reproduces the published table")
    @allure.description("Every single fault of one flagged round is propagated; the minimum-weight "
                        "error per (syndrome, flag context) must agree with the published table up to stabilisers")
    @allure.severity(allure.severity_level.BLOCKER)
    @pytest.mark.certificate
    @pytest.mark.regression
    def test_flagged_build(self, code_d3, published_table):
        logger.info("🧪 TEST: Build lookup table from flagged SE")

        # ── Act ────────────────────────────────────────────────────────────
        built      = build_lookup(gen_se_tree("flagged"), name="flagged")
        same, diff = tables_equivalent(built, published_table, code_d3.hx)
        allure.attach(str(built), name="Built table", attachment_type=allure.attachment_type.TEXT)

        # ── Assert ─────────────────────────────────────────────────────────
        with allure.step("Verify the built table matches entry by entry"):
            assert same, "\n".join(diff)
        with allure.step("Verify the build used accepted fault shots"):
            assert built.meta["accepted"] > 0
            assert built.n_contexts == 4

        logger.info("✅ TEST PASSED: Build lookup table from flagged SE")

    @allure.title("Bare extraction has ambiguous signatures and refuses to build")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.certificate
    @pytest.mark.regression
    def test_bare_build_refused(self):
        tree = gen_se_tree("bare")
        with pytest.raises(DecoderConsistencyError) as info:
            build_lookup(tree)
        logger.info(f"Refusal: {info.value}")

        signatures = single_fault_signatures(tree)
        assert any(len(classes) > 1 for classes in signatures.values())

    @allure.title("Superdense tables use the round-1 pattern as context")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_superdense(self):
        tables = build_superdense_table(gen_se_tree("superdense"))
        for table in (tables.x, tables.z):
            assert table.n_contexts == 64
            assert table.decode("100", 0) == {0}
            assert all(len(s) <= 3 for s in table.entries.values())

    @allure.title("Trees without a decode declaration are rejected")
    @allure.severity(allure.severity_level.MINOR)
    def test_no_decode_meta(self):
        with pytest.raises(ValueError):
            build_lookup(two_qubit_depolarizing_tree(0.01))
        with pytest.raises(ValueError):
            build_superdense_table(gen_se_tree("flagged"))


@allure.feature("Decoders")
@allure.story("Brute-Force ML Oracle")
class TestBruteForce:

    @allure.title("Single errors are decoded exactly")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.smoke
    def test_single_error(self, code_d3):
        correction = brute_force_ml_decode(code_d3, (code_d3.x_error_syndrome({3}), (0, 0, 0)))
        assert correction == PauliFrame.from_string("X3")

    @allure.title("Residual of a correctable error is trivial, of a weight-2 error logical")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_residuals(self, code_d3):
        error      = PauliFrame.from_string("X4 Z1")
        correction = brute_force_ml_decode(code_d3, (code_d3.x_error_syndrome(error.x_support),
                                                     code_d3.z_error_syndrome(error.z_support)))
        assert code_d3.logical_class(error * correction) == (0, 0)

        error      = PauliFrame.from_string("X5 X6")
        correction = brute_force_ml_decode(code_d3, (code_d3.x_error_syndrome(error.x_support), (0, 0, 0)))
        assert correction == PauliFrame.from_string("X4")
        assert code_d3.logical_class(error * correction) == (1, 0)

    @allure.title("X4 Z1 is corrected, its transversal-S image Y4 Z1 is not")
    @allure.description("After S the Z part of the pair has weight two and decodes to the wrong coset")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_s_image_caveat(self, code_d3):
        for error, expected in ((PauliFrame.from_string("X4 Z1"), (0, 0)), (PauliFrame.from_string("Y4 Z1"), (0, 1))):
            correction = brute_force_ml_decode(code_d3, (code_d3.x_error_syndrome(error.x_support),
                                                         code_d3.z_error_syndrome(error.z_support)))
            assert code_d3.logical_class(error * correction) == expected, f"{error} → {correction}"

    @allure.title("Lookup table and ML oracle agree on every single X/Z error pair")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_agrees_with_lookup(self, code_d3, published_table):
        checked = 0
        for xq, zq in itertools.product(range(8), repeat=2):
            x_support = {xq} if xq < 7 else set()
            z_support = {zq} if zq < 7 else set()
            xs, zs    = code_d3.x_error_syndrome(x_support), code_d3.z_error_syndrome(z_support)
            oracle    = brute_force_ml_decode(code_d3, (xs, zs), p=0.01)
            assert oracle.x_support == published_table.decode(xs), f"X{xq}: oracle {oracle}"
            assert oracle.z_support == published_table.decode(zs), f"Z{zq}: oracle {oracle}"
            checked += 1
        assert checked == 64

    @allure.title("The oracle refuses codes above twenty qubits")
    @allure.severity(allure.severity_level.MINOR)
    def test_refuses_large(self):
        with pytest.raises(ValueError):
            brute_force_ml_decode(build_hex_color_code(7), ((0,), (0,)))


@allure.feature("Decoders")
@allure.story("Fault Enumeration")
class TestFaultEnumeration:

    @allure.title("One fault per channel letter and per noisy measurement on the fault-free path")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.regression
    def test_count(self):
        tree   = gen_se_tree("flagged")
        faults = FaultSet(tree)

        assert zero_path(tree) == ["encode", "round"]
        assert len(faults) == expected_fault_count(faults)
        assert len(FaultSet(two_qubit_depolarizing_tree(0.03))) == 15

    @allure.title("Flagged extraction: no single fault causes an accepted logical error")
    @allure.severity(allure.severity_level.BLOCKER)
    @pytest.mark.certificate
    def test_flagged_has_no_witness(self):
        witnesses = FaultSet(gen_se_tree("flagged")).witnesses()
        assert witnesses == [], "\n".join(str(w.fault) for w in witnesses[:10])

    @allure.title("Bare extraction: hook faults are witnesses")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.certificate
    def test_bare_has_witnesses(self):
        witnesses = FaultSet(gen_se_tree("bare")).witnesses()
        allure.attach("\n".join(str(w.fault) for w in witnesses), name="Witnesses",
                      attachment_type=allure.attachment_type.TEXT)
        assert witnesses, "bare extraction should not be fault tolerant"
        assert all(w.accepted for w in witnesses)


@allure.feature("Decoders")
@allure.story("Detector Error Model")
class TestDem:

    @allure.title("One depolarizing site gives fifteen mechanisms of p/15")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.smoke
    @pytest.mark.regression
    def test_fifteen_mechanisms(self):
        observables = [PauliFrame.from_string(s) for s in ("X0", "Z0", "X1", "Z1")]
        mechanisms  = dem_mechanisms(two_qubit_depolarizing_tree(0.03), observables=observables)

        assert len(mechanisms) == 15
        assert len({m.signature for m in mechanisms}) == 15
        for m in mechanisms:
            assert m.probability == pytest.approx(0.002)
            assert m.detectors == ()

    @allure.title("A noiseless tree exports an empty model")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_noiseless(self):
        model = export_dem(gen_se_tree("flagged"), ScemModel(0.0))
        assert model.num_errors == 0

    @allure.title("Branching trees are exported one path at a time")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_branching(self):
        tree = gen_se_tree("superdense")
        with pytest.raises(ValueError):
            dem_mechanisms(tree)
        assert dem_mechanisms(tree, terminal="clean")
        with pytest.raises(ValueError):
            dem_mechanisms(tree, terminal="round1")

    @allure.title("Merging keeps one mechanism per distinct signature")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_merge(self):
        tree   = gen_se_tree("bare")
        raw    = dem_mechanisms(tree, merge=False)
        merged = dem_mechanisms(tree)
        assert len(merged) == len({m.signature for m in raw if m.detectors or m.observables})
        assert len(merged) < len(raw)

    @allure.title("Export writes stim text that stim parses back")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.regression
    def test_export_file(self, tmp_path):
        path  = tmp_path / "se_flagged.dem"
        model = export_dem(gen_se_tree("flagged"), ScemModel(1e-3), path)

        parsed = stim.DetectorErrorModel(path.read_text(encoding="utf-8"))
        assert parsed.num_errors == model.num_errors > 0
        assert parsed.num_detectors > 0
        assert parsed.num_observables == 1
