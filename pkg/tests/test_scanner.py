"""Fault-universe, scan-report and residual-weight behavior."""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from pathlib import Path

import pytest

from toricleak.circuits import VARIANTS, build_program
from toricleak.decoder import Decoder
from toricleak.noise import NoiseModel
from toricleak.scanner import (
    FaultSpec,
    enumerate_fault_universe,
    leak_consequences,
    leak_failure_fraction,
    replay_spec,
    residual_weight,
    scan,
    spec_location,
    verdict_to_text,
)
from toricleak.sim import compile_program

GOLDEN = Path(__file__).parent / "golden"

# the documentary scan policy reproduced by the golden fixtures
DOC_NOISE = NoiseModel(p=1e-3, r=1.0, p_init_leak=1e-3)

# independent arithmetic: Pauli spec multiplicity per gate kind
# (prep: one flip of the prepared basis; H: 3 Paulis; two-qubit: 15
# nonidentity pairs; measurement: one outcome flip)
SPECS_PER_KIND = {"PrepZ": 1, "PrepX": 1, "H": 3, "CNOT": 15, "SWAP": 15,
                  "MeasZ": 1, "MeasX": 1}


def _compiled(variant, noise=DOC_NOISE, d=3, rounds=3):
    return compile_program(build_program(variant, d, rounds), noise)


def _first_gate(compiled, **want):
    for gi, g in enumerate(compiled.gates):
        if all(getattr(g, k) == v for k, v in want.items()) and g.leak_prob > 0:
            return gi
    raise AssertionError(f"no leaking gate matching {want}")


@pytest.mark.parametrize("variant", ["standard", "swap_lrc", "gate_biased"])
def test_universe_counts_follow_gate_arithmetic(variant):
    compiled = _compiled(variant)
    universe = enumerate_fault_universe(compiled)
    n_pauli = sum(1 for s in universe if s.kind in ("pauli", "meas_flip"))
    n_leak = sum(1 for s in universe if s.kind == "leak")
    want_pauli = sum(SPECS_PER_KIND[g.kind] for g in compiled.gates)
    want_leak = sum(len(g.leak_victims) for g in compiled.gates if g.leak_prob > 0)
    assert n_pauli == want_pauli
    assert n_leak == want_leak
    assert universe == enumerate_fault_universe(compiled)


def test_site_filter_prunes_leak_specs_only():
    full = enumerate_fault_universe(_compiled("standard"))
    anc = enumerate_fault_universe(
        _compiled("standard", NoiseModel(p=1e-3, r=1.0, site_filter="ancilla_only",
                                         p_init_leak=1e-3)))
    n_pauli = sum(1 for s in full if s.kind != "leak")
    assert sum(1 for s in anc if s.kind != "leak") == n_pauli
    assert sum(1 for s in anc if s.kind == "leak") < sum(
        1 for s in full if s.kind == "leak")


@pytest.mark.parametrize("variant", VARIANTS)
def test_scan_report_matches_golden(variant):
    compiled = _compiled(variant)
    verdict = scan(compiled, decoder=Decoder(compiled.lattice), max_faults=1)
    golden = (GOLDEN / f"scan_{variant}_d3.txt").read_text()
    assert verdict_to_text(compiled, verdict) == golden


def test_all_single_pauli_faults_are_correctable():
    """At d=3 the matcher must fix every single depolarizing fault."""
    compiled = _compiled("standard")
    verdict = scan(compiled, decoder=Decoder(compiled.lattice), max_faults=1)
    assert verdict.pauli_failures == []
    assert not verdict.distance_preserving  # leakage still defeats it
    assert verdict.exhaustive


# exact failing fractions for the standard circuit, distance 3, 3 rounds:
# (gate kind, cnot ordinal, role, round) -> P(logical failure | leak fires)
STANDARD_ANCHORS = [
    ("PrepZ", 0, "ancillaZ", 0, Fraction(7, 32)),
    ("PrepZ", 0, "ancillaX", 1, Fraction(7, 32)),
    ("H", 0, "ancillaX", 0, Fraction(7, 32)),
    ("CNOT", 1, "ancillaZ", 1, Fraction(1, 8)),
    ("CNOT", 1, "ancillaX", 2, Fraction(1, 8)),
    ("CNOT", 1, "data", 2, Fraction(1, 16)),
    ("CNOT", 3, "data", 1, Fraction(1, 32)),
]


@pytest.mark.parametrize("kind,ordinal,role,rnd,want", STANDARD_ANCHORS)
def test_exact_hook_fractions_standard(kind, ordinal, role, rnd, want):
    compiled = _compiled("standard")
    for spec in enumerate_fault_universe(compiled):
        if spec.kind != "leak":
            continue
        loc = spec_location(compiled, spec)
        if (loc.kind, loc.ordinal, loc.role, loc.round) == (kind, ordinal, role, rnd):
            q, exact = leak_failure_fraction(compiled, spec)
            assert exact
            assert Fraction(q).limit_denominator(1 << 20) == want
            return
    raise AssertionError("anchor location not found in universe")


def test_swap_reduction_leaves_only_first_cnot_data_hooks():
    """With a per-round data/ancilla swap, a leaked data qubit is retired at
    the round boundary, so only first-CNOT data leaks (and the swap carry
    itself) can still defeat the matcher."""
    compiled = _compiled("swap_lrc")
    fractions = {}
    for spec in enumerate_fault_universe(compiled):
        if spec.kind != "leak":
            continue
        loc = spec_location(compiled, spec)
        if loc.role != "data" or loc.kind != "CNOT":
            continue
        key = (loc.ordinal, loc.round)
        if key in fractions:
            continue
        fractions[key] = leak_failure_fraction(compiled, spec)
    for (ordinal, rnd), (q, exact) in fractions.items():
        assert exact
        if ordinal == 1:
            assert Fraction(q).limit_denominator(1 << 20) == Fraction(1, 16)
        else:
            assert q == 0.0


def test_swap_carry_promotion_fraction():
    """A leak seated at the swap itself rides into the next round's ancilla."""
    compiled = _compiled("swap_lrc")
    gi = _first_gate(compiled, kind="SWAP", round_index=0)
    q, exact = leak_failure_fraction(compiled, FaultSpec(kind="leak", gate_index=gi,
                                                         victim=0))
    assert exact
    assert Fraction(q).limit_denominator(1 << 20) == Fraction(1, 32)


def test_fraction_matches_manual_assignment_enumeration():
    """Dual route: enumerate every draw assignment through the replayer and
    compare the failing fraction against the span-based computation."""
    compiled = _compiled("standard")
    dec = Decoder(compiled.lattice)
    gi = _first_gate(compiled, kind="CNOT", round_index=1)
    spec0 = FaultSpec(kind="leak", gate_index=gi, victim=1)  # ancilla side
    _, slots = leak_consequences(compiled, spec0)
    pair_slots = [s for s in slots if s[0] == "pair"]
    meas_slots = [s for s in slots if s[0] == "measbit"]
    assert len(pair_slots) == 3 and len(meas_slots) == 1

    n_fail = n_tot = 0
    for combo in product("IXYZ", repeat=len(pair_slots)):
        for mbits in product((0, 1), repeat=len(meas_slots)):
            assign = tuple((s, c) for s, c in zip(pair_slots, combo) if c != "I")
            assign += tuple((s, 1) for s, b in zip(meas_slots, mbits) if b)
            _, outcome = replay_spec(compiled, dec, FaultSpec(
                kind="leak", gate_index=gi, victim=1, assignment=assign))
            n_tot += 1
            n_fail += outcome.failure
    q, exact = leak_failure_fraction(compiled, spec0)
    assert exact
    assert Fraction(n_fail, n_tot) == Fraction(q).limit_denominator(1 << 20)


def test_hook_spreads_four_x_and_reduces_to_aligned_pair():
    """A leaked plus-state ancilla sprays its whole support: one draw
    assignment leaves raw X on all 4 support edges (the check's own
    stabilizer) while its Y middle carries a weight-2 error parallel to a
    logical line."""
    compiled = _compiled("standard")
    lat = compiled.lattice
    gi = _first_gate(compiled, kind="PrepZ", check_type=1, round_index=1)
    spec0 = FaultSpec(kind="leak", gate_index=gi, victim=0)
    loc = spec_location(compiled, spec0)
    assert loc.role == "ancillaX"
    _, slots = leak_consequences(compiled, spec0)
    pair_slots = [s for s in slots if s[0] == "pair"]
    assert len(pair_slots) == 4  # one partner draw per coupling gate

    assign = tuple(zip(pair_slots, "XYYX"))
    rw = residual_weight(compiled, FaultSpec(kind="leak", gate_index=gi,
                                             victim=0, assignment=assign))
    assert rw.raw_x == 4
    assert set(rw.support_x) == set(lat.support("X", loc.check[1]).tolist())
    assert rw.reduced_x == 0  # the X spray is the measured stabilizer itself
    assert rw.reduced_z == 2 and rw.aligned_z
    assert rw.joint == 2


def test_pair_scan_is_deterministic_and_flags_uncorrectable_pairs():
    compiled = _compiled("standard", NoiseModel(p=1e-3, r=0.0))
    universe = [s for s in enumerate_fault_universe(compiled)
                if s.kind == "pauli"][:40]
    dec = Decoder(compiled.lattice)
    first = scan(compiled, universe=universe, decoder=dec, max_faults=2)
    again = scan(compiled, universe=universe, decoder=dec, max_faults=2)
    assert first.n_pairs == again.n_pairs == 40 * 39 // 2
    assert [tuple(p) for p in first.pair_failures] == \
        [tuple(p) for p in again.pair_failures]
    assert first.pauli_failures == []
