"""Vectorized batch executor, bit-identical to the scalar one.

Shots form the leading axis; the per-gate resolution order, draw-slot layout
and sub-decode arithmetic mirror :mod:`toricleak.sim` exactly, so running a
batch and running its shots one at a time produce identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import CNOT, H, IDLE, MEAS_X, MEAS_Z, PREP_X, PREP_Z, SWAP
from .pauli import PAULI2_ERRORS, batch_uniforms, propagate_cnot, propagate_h, propagate_swap
from .sim import PAULI4, CompiledProgram

# component tables for vectorized sub-decodes
_X3 = np.array([1, 1, 0], dtype=np.uint8)  # X, Y, Z
_Z3 = np.array([0, 1, 1], dtype=np.uint8)
_X4 = np.array([p[0] for p in PAULI4], dtype=np.uint8)  # I, X, Y, Z
_Z4 = np.array([p[1] for p in PAULI4], dtype=np.uint8)
_X15A = np.array([a[0] for a, b in PAULI2_ERRORS], dtype=np.uint8)
_Z15A = np.array([a[1] for a, b in PAULI2_ERRORS], dtype=np.uint8)
_X15B = np.array([b[0] for a, b in PAULI2_ERRORS], dtype=np.uint8)
_Z15B = np.array([b[1] for a, b in PAULI2_ERRORS], dtype=np.uint8)


@dataclass
class BatchResult:
    syndromes: np.ndarray  # (shots, rounds + 1, 2, d*d)
    data_x: np.ndarray  # (shots, n_data)
    data_z: np.ndarray
    logical_parities: np.ndarray  # (shots, 4)
    leak_final: np.ndarray  # (shots, n_qubits)


def run_batch(
    compiled: CompiledProgram,
    master_seed: int,
    shot_start: int,
    n_shots: int,
) -> BatchResult:
    program = compiled.program
    lat = program.lattice
    noise = compiled.noise
    n_sites = lat.d * lat.d

    U = batch_uniforms(master_seed, shot_start, n_shots, compiled.n_draws)
    x = np.zeros((n_shots, lat.n_qubits), dtype=np.uint8)
    z = np.zeros_like(x)
    leak = np.zeros((n_shots, lat.n_qubits), dtype=np.uint8)
    syndromes = np.zeros((n_shots, program.n_rounds + 1, 2, n_sites), dtype=np.uint8)

    for g in compiled.gates:
        q0, q1, off = g.q0, g.q1, g.draw_offset
        if g.kind in (PREP_Z, PREP_X):
            x[:, q0] = 0
            z[:, q0] = 0
            leak[:, q0] = 0
            if noise.p > 0:
                flip = (U[:, off] < noise.p).astype(np.uint8)
                if g.kind == PREP_Z:
                    x[:, q0] ^= flip
                else:
                    z[:, q0] ^= flip
            if g.leak_victims and g.leak_prob > 0:
                leak[:, q0] = (U[:, off + 1] < g.leak_prob).astype(np.uint8)
        elif g.kind == H:
            active = 1 - leak[:, q0]
            propagate_h(x, z, q0, mask=active)
            if noise.p > 0:
                u = U[:, off]
                sel = active & (u < noise.p)
                idx = np.minimum((u / noise.p * 3).astype(np.int64), 2)
                x[:, q0] ^= sel & _X3[idx]
                z[:, q0] ^= sel & _Z3[idx]
            if g.leak_victims and g.leak_prob > 0:
                leak[:, q0] |= active & (U[:, off + 1] < g.leak_prob)
        elif g.kind in (CNOT, SWAP):
            lk0, lk1 = leak[:, q0], leak[:, q1]
            neither = (1 - lk0) & (1 - lk1)
            if g.kind == CNOT:
                propagate_cnot(x, z, q0, q1, mask=neither)
            else:
                propagate_swap(x, z, q0, q1, mask=neither)
            # a single leaked participant scrambles its partner
            u_pair = U[:, off + 2]
            idx4 = np.minimum((u_pair * 4).astype(np.int64), 3)
            only0 = lk0 & (1 - lk1)
            only1 = lk1 & (1 - lk0)
            x[:, q1] ^= only0 & _X4[idx4]
            z[:, q1] ^= only0 & _Z4[idx4]
            x[:, q0] ^= only1 & _X4[idx4]
            z[:, q0] ^= only1 & _Z4[idx4]
            if noise.p > 0:
                u = U[:, off]
                sel = neither & (u < noise.p)
                idx = np.minimum((u / noise.p * 15).astype(np.int64), 14)
                x[:, q0] ^= sel & _X15A[idx]
                z[:, q0] ^= sel & _Z15A[idx]
                x[:, q1] ^= sel & _X15B[idx]
                z[:, q1] ^= sel & _Z15B[idx]
            if g.leak_victims and g.leak_prob > 0:
                u = U[:, off + 1]
                hit = neither & (u < g.leak_prob)
                nv = len(g.leak_victims)
                vic = np.minimum((u / g.leak_prob * nv).astype(np.int64), nv - 1)
                for j, pos in enumerate(g.leak_victims):
                    leak[:, (q0, q1)[pos]] |= hit & (vic == j)
        elif g.kind in (MEAS_Z, MEAS_X):
            lk = leak[:, q0].astype(bool)
            if noise.leaked_meas == "fixed_one":
                junk = np.ones(n_shots, dtype=np.uint8)
            else:
                junk = (U[:, off + 1] < 0.5).astype(np.uint8)
            clean = (x[:, q0] if g.kind == MEAS_Z else z[:, q0]).copy()
            if noise.meas_flip > 0:
                clean ^= (U[:, off] < noise.meas_flip).astype(np.uint8)
            bit = np.where(lk, junk, clean)
            syndromes[:, g.round_index, g.check_type, g.check_site] ^= bit
            # measure-and-reset clears the frame and any leakage before reuse
            x[:, q0] = 0
            z[:, q0] = 0
            leak[:, q0] = 0
        elif g.kind == IDLE:
            if noise.p_idle > 0:
                u = U[:, off]
                sel = (1 - leak[:, q0]) & (u < noise.p_idle)
                idx = np.minimum((u / noise.p_idle * 3).astype(np.int64), 2)
                x[:, q0] ^= sel & _X3[idx]
                z[:, q0] ^= sel & _Z3[idx]
        else:  # pragma: no cover
            raise ValueError(f"unknown gate kind {g.kind}")

    carrier = program.final_data_carrier
    ro = compiled.readout_offset
    U_read = U[:, ro : ro + 2 * lat.n_data].reshape(n_shots, lat.n_data, 2)
    leak_c = leak[:, carrier].astype(bool)
    data_x = np.where(leak_c, (U_read[:, :, 0] < 0.5).astype(np.uint8), x[:, carrier])
    data_z = np.where(leak_c, (U_read[:, :, 1] < 0.5).astype(np.uint8), z[:, carrier])

    z_syn, x_syn = lat.syndrome_of(data_x, data_z)
    syndromes[:, program.n_rounds, 0] = z_syn
    syndromes[:, program.n_rounds, 1] = x_syn

    return BatchResult(
        syndromes=syndromes,
        data_x=data_x,
        data_z=data_z,
        logical_parities=lat.logical_parities(data_x, data_z),
        leak_final=leak.astype(bool),
    )
