"""The batch executor must reproduce the scalar executor bit for bit."""

from __future__ import annotations

import numpy as np
import pytest

from toricleak.circuits import build_program
from toricleak.noise import NoiseModel
from toricleak.pauli import shot_uniforms
from toricleak.sim import compile_program, run_shot
from toricleak.vector import run_batch

CASES = [
    ("standard", 3, 2, NoiseModel(p=0.1, r=2.0)),
    ("standard", 3, 3, NoiseModel(p=0.3, r=1.0, p_init_leak=0.2)),
    ("swap_lrc", 3, 3, NoiseModel(p=0.2, r=3.0)),
    ("swap_alt", 3, 4, NoiseModel(p=0.05, r=10.0, site_filter="data_only")),
    ("gate_biased", 3, 2, NoiseModel(p=0.1, r=4.0, side_policy="control_only")),
    ("gate_biased_opt", 3, 2, NoiseModel(p=0.15, r=2.0, site_filter="cnot_ordinal:1")),
    ("mixed_lrc", 3, 3, NoiseModel(p=0.1, r=2.0, p_init_leak=0.1, leaked_meas="fixed_one")),
    ("mixed_lrc", 3, 4, NoiseModel(p=0.08, r=5.0, site_filter="ancilla_only")),
    ("swap_lrc", 5, 3, NoiseModel(p=0.12, r=1.5, meas_flip=0.02)),
]


@pytest.mark.parametrize("variant,d,rounds,noise", CASES)
def test_batch_matches_scalar_bitwise(variant, d, rounds, noise):
    compiled = compile_program(build_program(variant, d, rounds), noise)
    master_seed, n_shots = 424242, 40
    batch = run_batch(compiled, master_seed, 0, n_shots)
    for shot in range(n_shots):
        u = shot_uniforms(master_seed, shot, compiled.n_draws)
        ref = run_shot(compiled, uniforms=u)
        np.testing.assert_array_equal(batch.syndromes[shot], ref.syndromes, err_msg=f"shot {shot}")
        np.testing.assert_array_equal(batch.data_x[shot], ref.data_x)
        np.testing.assert_array_equal(batch.data_z[shot], ref.data_z)
        np.testing.assert_array_equal(batch.logical_parities[shot], ref.logical_parities)
        np.testing.assert_array_equal(batch.leak_final[shot], ref.leak_final)


def test_batch_rows_independent_of_chunking():
    noise = NoiseModel(p=0.1, r=2.0)
    compiled = compile_program(build_program("swap_lrc", 3, 3), noise)
    whole = run_batch(compiled, 7, 0, 12)
    parts = [run_batch(compiled, 7, start, 4) for start in (0, 4, 8)]
    merged = np.concatenate([p.syndromes for p in parts])
    np.testing.assert_array_equal(whole.syndromes, merged)
    single = run_batch(compiled, 7, 5, 1)
    np.testing.assert_array_equal(whole.syndromes[5], single.syndromes[0])


def test_batch_shapes():
    compiled = compile_program(build_program("mixed_lrc", 3, 2), NoiseModel(p=0.01))
    batch = run_batch(compiled, 1, 0, 5)
    assert batch.syndromes.shape == (5, 3, 2, 9)
    assert batch.data_x.shape == (5, 18)
    assert batch.logical_parities.shape == (5, 4)
    assert batch.leak_final.shape == (5, 54)
