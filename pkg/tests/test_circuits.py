"""Structural tests for the six syndrome-extraction circuit variants."""

from __future__ import annotations

import pathlib

import numpy as np
import pytest

from toricleak.circuits import (
    CNOT,
    H,
    MEAS_Z,
    PREP_Z,
    SWAP,
    VARIANTS,
    FaultLocation,
    GateOp,
    build_program,
    gate_counts,
    parse_program_text,
    partner_edges,
    program_to_text,
    validate_program,
    x_check_single_qubit_gates,
)
from toricleak.lattice import build_lattice

GOLDEN = pathlib.Path(__file__).parent / "golden"


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("d", [3, 5])
def test_all_variants_validate(variant, d):
    program = build_program(variant, d, n_rounds=3)
    validate_program(program)
    assert program.n_rounds == 3
    assert len(program.rounds) == 3


def test_standard_gate_counts_d3():
    counts = gate_counts(build_program("standard", 3, 1))
    assert counts == {PREP_Z: 18, H: 18, CNOT: 72, MEAS_Z: 18}


def test_swap_variants_swap_counts():
    assert gate_counts(build_program("swap_lrc", 3, 1))[SWAP] == 18
    alt = build_program("swap_alt", 3, 2)
    assert SWAP not in gate_counts(alt, 0)  # standard-first alternation
    assert gate_counts(alt, 1)[SWAP] == 18


def test_gate_biased_single_qubit_overheads():
    base = x_check_single_qubit_gates(build_program("swap_lrc", 3, 1))
    full = x_check_single_qubit_gates(build_program("gate_biased", 3, 1))
    opt = x_check_single_qubit_gates(build_program("gate_biased_opt", 3, 1))
    assert base == 2
    assert full - base == 12
    assert opt - base == 4


def test_gate_biased_cnot_directions():
    # full variant: data controls every X-check CNOT; optimized: only the 1st two
    for variant, reversed_ordinals in [("gate_biased", {1, 2, 3, 4}), ("gate_biased_opt", {1, 2})]:
        program = build_program(variant, 3, 1)
        for g in program.rounds[0]:
            if g.kind == CNOT and g.label.check[0] == "X":
                expect = ("data", "ancillaX") if g.label.cnot_ordinal in reversed_ordinals else ("ancillaX", "data")
                assert g.label.roles == expect
            if g.kind == CNOT and g.label.check[0] == "Z":
                assert g.label.roles == ("data", "ancillaZ")


def test_mixed_lrc_gate_counts_d3():
    counts = gate_counts(build_program("mixed_lrc", 3, 1))
    assert counts == {PREP_Z: 36, H: 18, CNOT: 72, SWAP: 36, MEAS_Z: 18}


@pytest.mark.parametrize("variant", VARIANTS)
def test_cnot_ordinals_per_check(variant):
    program = build_program(variant, 3, 1)
    seen: dict[tuple[str, int], list[int]] = {}
    for g in program.rounds[0]:
        if g.kind == CNOT:
            seen.setdefault(g.label.check, []).append(g.label.cnot_ordinal)
    assert len(seen) == 18
    for ordinals in seen.values():
        assert ordinals == [1, 2, 3, 4]  # time order


@pytest.mark.parametrize("d", [3, 5, 7])
def test_each_data_edge_uses_every_layer_once(d):
    program = build_program("standard", d, 1)
    per_edge: dict[int, list[int]] = {}
    for g in program.rounds[0]:
        if g.kind == CNOT:
            data_qubit = g.qubits[g.label.roles.index("data")]
            per_edge.setdefault(data_qubit, []).append(g.label.cnot_ordinal)
    assert len(per_edge) == 2 * d * d
    for ordinals in per_edge.values():
        assert sorted(ordinals) == [1, 2, 3, 4]


def test_partner_edges_form_perfect_pairing():
    lat = build_lattice(3)
    z_partner, x_partner = partner_edges(lat)
    assert sorted(np.concatenate([z_partner, x_partner])) == list(range(lat.n_data))


def test_collision_detection_catches_reuse():
    program = build_program("standard", 3, 1)
    bad = GateOp(H, (0,), 0, FaultLocation(0, 99, H, 0, ("data",), None))
    program.rounds[0].append(bad)
    program.rounds[0].append(bad)
    with pytest.raises(AssertionError, match="used twice"):
        validate_program(program)


def test_swap_lrc_roles_follow_swaps():
    program = build_program("swap_lrc", 3, 3)
    lat = program.lattice
    z_partner, x_partner = partner_edges(lat)
    for r in range(2):
        for s in range(9):
            # whoever was the check ancilla is the partner edge's data carrier next round
            anc_before = [q for q, role in program.role_maps[r].items() if role == "ancillaZ"]
            carrier_after = program.data_carriers[r + 1]
            assert set(anc_before) == {int(carrier_after[e]) for e in z_partner}
    # and the exchange is an involution: round 2 carriers equal round 0's
    np.testing.assert_array_equal(program.data_carriers[2], program.data_carriers[0])
    assert program.role_maps[2] == program.role_maps[0]


def test_swap_alt_holds_roles_in_even_rounds():
    program = build_program("swap_alt", 3, 4)
    np.testing.assert_array_equal(program.data_carriers[1], program.data_carriers[0])
    assert not np.array_equal(program.data_carriers[2], program.data_carriers[1])
    np.testing.assert_array_equal(program.data_carriers[3], program.data_carriers[2])


def test_mixed_lrc_rotation_has_period_three():
    program = build_program("mixed_lrc", 3, 7)
    assert not np.array_equal(program.data_carriers[1], program.data_carriers[0])
    assert not np.array_equal(program.data_carriers[2], program.data_carriers[0])
    np.testing.assert_array_equal(program.data_carriers[3], program.data_carriers[0])
    np.testing.assert_array_equal(program.data_carriers[6], program.data_carriers[0])
    assert program.role_maps[3] == program.role_maps[0]
    assert program.role_maps[4] == program.role_maps[1]


def test_mixed_lrc_measures_the_swapped_in_qubit():
    program = build_program("mixed_lrc", 3, 1)
    lat = program.lattice
    mid_swaps = {}
    for g in program.rounds[0]:
        if g.kind == SWAP and g.label.roles == ("ancillaZ", "spare"):
            mid_swaps[g.label.check] = g.qubits[1]
        if g.kind == SWAP and g.label.roles == ("ancillaX", "spare"):
            mid_swaps[g.label.check] = g.qubits[1]
        if g.kind == MEAS_Z:
            assert g.qubits[0] == mid_swaps[g.label.check]
    # in round 0 the swapped-in qubit is the dedicated spare site
    assert mid_swaps[("Z", 0)] == lat.z_spare(0)
    assert mid_swaps[("X", 4)] == lat.x_spare(4)


def test_configurable_support_order():
    program = build_program("standard", 3, 1, z_order=("S", "E", "W", "N"))
    lat = program.lattice
    for g in program.rounds[0]:
        if g.kind == CNOT and g.label.check == ("Z", 0):
            if g.label.cnot_ordinal == 1:
                assert g.qubits[0] == lat.z_support[0][3]  # S first
            if g.label.cnot_ordinal == 4:
                assert g.qubits[0] == lat.z_support[0][0]  # N last
    with pytest.raises(ValueError, match="order must permute"):
        build_program("standard", 3, 1, z_order=("N", "N", "E", "S"))


def test_unknown_variant_and_bad_rounds_raise():
    with pytest.raises(ValueError, match="unknown variant"):
        build_program("fancy", 3, 1)
    with pytest.raises(ValueError, match="n_rounds"):
        build_program("standard", 3, 0)


def test_program_text_round_trip():
    program = build_program("swap_lrc", 3, 2)
    text = program_to_text(program)
    assert text.startswith("toricleak-circuit v1 variant=swap_lrc d=3 rounds=2 qubits=36\n")
    parsed = parse_program_text(text)
    assert parsed["variant"] == "swap_lrc"
    assert len(parsed["rounds"]) == 2
    flat = [g for r, g in program.all_gates()]
    parsed_flat = [g for rnd in parsed["rounds"] for g in rnd]
    assert len(flat) == len(parsed_flat)
    for g, p in zip(flat, parsed_flat):
        assert g.kind == p["kind"]
        assert g.qubits == p["qubits"]
        assert g.step == p["step"]
        assert g.label.cnot_ordinal == p["ordinal"]
        assert g.label.roles == p["roles"]
        assert g.label.check == p["check"]


@pytest.mark.parametrize("variant", VARIANTS)
def test_emitted_text_matches_golden(variant):
    program = build_program(variant, 3, 1)
    golden = (GOLDEN / f"circuit_{variant}_d3_r1.txt").read_text()
    assert program_to_text(program) == golden
