"""Pauli algebra, error frames, and the deterministic random-stream contract.

Paulis are phase-free and encoded as (x, z) bit pairs: I=(0,0), X=(1,0),
Z=(0,1), Y=(1,1).  An error frame over n qubits is a pair of uint8 bit
vectors (xbits, zbits); composing frames is element-wise XOR.  Clifford
gates act on frames by conjugation, implemented as bit manipulations that
work on any array whose last axis indexes qubits (so the same rules serve
the scalar and the batched simulator).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Canonical single-qubit Paulis in (x, z) encoding.
PAULI_I = (0, 0)
PAULI_X = (1, 0)
PAULI_Y = (1, 1)
PAULI_Z = (0, 1)

PAULI_NAMES = {PAULI_I: "I", PAULI_X: "X", PAULI_Y: "Y", PAULI_Z: "Z"}
PAULI_BY_NAME = {v: k for k, v in PAULI_NAMES.items()}

# Fixed orders used by the noise sub-decoders.  PAULI1_ERRORS[k] is the k-th
# nontrivial single-qubit error; PAULI2_ERRORS[k] the k-th nontrivial pair.
PAULI1_ERRORS = (PAULI_X, PAULI_Y, PAULI_Z)
PAULI2_ERRORS = tuple(
    (a, b)
    for a in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
    for b in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
)[1:]  # drop II


def pauli_mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    """Phase-free product of two Paulis: component-wise XOR."""
    return (a[0] ^ b[0], a[1] ^ b[1])


def commutes(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """True iff the two Paulis commute (symplectic product is even)."""
    return (a[0] * b[1] + a[1] * b[0]) % 2 == 0


@dataclass
class Frame:
    """Bit-packed X/Z error record over all physical qubits of a lattice.

    ``x[q]`` / ``z[q]`` are the X and Z components of the accumulated error
    on qubit q.  Phases are never tracked.
    """

    x: np.ndarray
    z: np.ndarray

    @classmethod
    def zeros(cls, n_qubits: int) -> "Frame":
        return cls(np.zeros(n_qubits, dtype=np.uint8), np.zeros(n_qubits, dtype=np.uint8))

    def copy(self) -> "Frame":
        return Frame(self.x.copy(), self.z.copy())

    def xor(self, other: "Frame") -> "Frame":
        return Frame(self.x ^ other.x, self.z ^ other.z)

    def pauli_at(self, q: int) -> tuple[int, int]:
        return (int(self.x[q]), int(self.z[q]))

    def set_pauli(self, q: int, p: tuple[int, int]) -> None:
        self.x[q] ^= p[0]
        self.z[q] ^= p[1]

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))


# --- Clifford conjugation rules -------------------------------------------
# Each rule mutates (x, z) in place; the last axis indexes qubits so the same
# code handles a single frame (1-D) or a batch of frames (2-D).


def propagate_h(x: np.ndarray, z: np.ndarray, q: int, mask: np.ndarray | None = None) -> None:
    """H on qubit q swaps the X and Z components (Y is fixed)."""
    if mask is None:
        x[..., q], z[..., q] = z[..., q].copy(), x[..., q].copy()
    else:
        xq = x[..., q].copy()
        x[..., q] = np.where(mask, z[..., q], x[..., q])
        z[..., q] = np.where(mask, xq, z[..., q])


def propagate_cnot(
    x: np.ndarray, z: np.ndarray, control: int, target: int, mask: np.ndarray | None = None
) -> None:
    """CNOT copies X from control to target and Z from target to control."""
    if control == target:
        raise ValueError("control and target must differ")
    if mask is None:
        x[..., target] ^= x[..., control]
        z[..., control] ^= z[..., target]
    else:
        x[..., target] ^= x[..., control] & mask
        z[..., control] ^= z[..., target] & mask


def propagate_swap(
    x: np.ndarray, z: np.ndarray, a: int, b: int, mask: np.ndarray | None = None
) -> None:
    """SWAP exchanges both components between qubits a and b."""
    if mask is None:
        x[..., a], x[..., b] = x[..., b].copy(), x[..., a].copy()
        z[..., a], z[..., b] = z[..., b].copy(), z[..., a].copy()
    else:
        for bits in (x, z):
            va = bits[..., a].copy()
            bits[..., a] = np.where(mask, bits[..., b], bits[..., a])
            bits[..., b] = np.where(mask, va, bits[..., b])


# --- Deterministic random streams -----------------------------------------


def shot_uniforms(master_seed: int, shot_index: int, n_draws: int) -> np.ndarray:
    """The canonical uniform draw sequence for one shot.

    Identical (master_seed, shot_index) always yields an identical sequence,
    regardless of execution order across shots — the reproducibility contract
    every stochastic component relies on.
    """
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, shot_index])))
    return gen.random(n_draws)


def batch_uniforms(master_seed: int, shot_start: int, n_shots: int, n_draws: int) -> np.ndarray:
    """Stacked per-shot draw rows, bit-identical to ``shot_uniforms`` per row."""
    out = np.empty((n_shots, n_draws), dtype=np.float64)
    for i in range(n_shots):
        out[i] = shot_uniforms(master_seed, shot_start + i, n_draws)
    return out
