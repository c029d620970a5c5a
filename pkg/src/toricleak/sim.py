"""Scalar shot executor: Pauli-frame propagation with leakage tracking.

The simulator never touches amplitudes.  Each qubit carries two frame bits
(x, z) relative to the ideal circuit plus a leak flag.  Measured bits are the
ideal reference (always 0) XORed with the frame, so syndrome records start
from the all-zero baseline and detection events are differences of
consecutive rounds.

``compile_program`` fixes a static draw-slot layout: every gate owns a fixed
span of the shot's uniform stream, and the final data readout owns two slots
per edge.  ``run_shot`` then resolves a full shot from one uniform vector, or
— when given no uniforms — resolves every draw to its null outcome so that
scripted fault injections replay deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import (
    CNOT,
    H,
    IDLE,
    MEAS_X,
    MEAS_Z,
    PREP_X,
    PREP_Z,
    SWAP,
    CircuitProgram,
    FaultLocation,
)
from .noise import NoiseModel
from .pauli import (
    PAULI1_ERRORS,
    PAULI2_ERRORS,
    PAULI_I,
    PAULI_X,
    PAULI_Z,
    propagate_cnot,
    propagate_h,
    propagate_swap,
)

DRAWS_PER_KIND = {
    PREP_Z: 2,
    PREP_X: 2,
    H: 2,
    CNOT: 3,
    SWAP: 3,
    MEAS_Z: 2,
    MEAS_X: 2,
    IDLE: 2,
}
PAULI4 = (PAULI_I,) + PAULI1_ERRORS  # uniform partner draw alphabet


@dataclass(frozen=True)
class CompiledGate:
    kind: str
    q0: int
    q1: int  # -1 for single-qubit gates
    round_index: int
    draw_offset: int
    leak_victims: tuple[int, ...]  # positions eligible for the leak draw
    leak_prob: float
    check_type: int  # 0 = Z check, 1 = X check, -1 = none
    check_site: int
    label: FaultLocation


@dataclass
class CompiledProgram:
    program: CircuitProgram
    noise: NoiseModel
    gates: list[CompiledGate]
    n_draws: int  # total stream length including readout slots
    readout_offset: int

    @property
    def lattice(self):
        return self.program.lattice


@dataclass
class Script:
    """Deterministic fault injections for replay runs.

    Keys are global gate indices into ``CompiledProgram.gates``.
    """

    leaks: set[tuple[int, int]] = field(default_factory=set)  # (gate, position)
    paulis: dict[int, tuple] = field(default_factory=dict)  # gate -> per-qubit paulis
    meas_flips: set[int] = field(default_factory=set)
    readout_flips: dict[int, tuple[int, int]] = field(default_factory=dict)  # edge -> (dx, dz)


@dataclass
class ShotResult:
    syndromes: np.ndarray  # (n_rounds + 1, 2, d*d); last row is the perfect readout round
    data_x: np.ndarray  # readout-consistent frame, indexed by edge
    data_z: np.ndarray
    logical_parities: np.ndarray  # (4,) pre-correction parities of the readout frame
    leak_final: np.ndarray  # per physical qubit

    @property
    def n_rounds(self) -> int:
        return self.syndromes.shape[0] - 1


def compile_program(program: CircuitProgram, noise: NoiseModel) -> CompiledProgram:
    gates: list[CompiledGate] = []
    offset = 0
    for _, g in program.all_gates():
        check = g.label.check
        gates.append(
            CompiledGate(
                kind=g.kind,
                q0=g.qubits[0],
                q1=g.qubits[1] if len(g.qubits) > 1 else -1,
                round_index=g.label.round,
                draw_offset=offset,
                leak_victims=noise.leak_victims(g.label),
                leak_prob=noise.leak_prob(g.label),
                check_type={"Z": 0, "X": 1}.get(check[0] if check else None, -1),
                check_site=check[1] if check else -1,
                label=g.label,
            )
        )
        offset += DRAWS_PER_KIND[g.kind]
    readout_offset = offset
    n_draws = offset + 2 * program.lattice.n_data
    return CompiledProgram(program, noise, gates, n_draws, readout_offset)


def find_gates(
    compiled: CompiledProgram,
    kind: str | None = None,
    round_index: int | None = None,
    check: tuple[str, int] | None = None,
    ordinal: int | None = None,
) -> list[int]:
    """Global indices of gates matching all the given criteria."""
    out = []
    for gi, g in enumerate(compiled.gates):
        if kind is not None and g.kind != kind:
            continue
        if round_index is not None and g.round_index != round_index:
            continue
        if check is not None and g.label.check != check:
            continue
        if ordinal is not None and g.label.cnot_ordinal != ordinal:
            continue
        out.append(gi)
    return out


def _sub_decode(u: float, prob: float, n: int) -> int:
    """Index in [0, n) from a uniform known to be below ``prob``."""
    return min(int(u / prob * n), n - 1)


def run_shot(
    compiled: CompiledProgram,
    uniforms: np.ndarray | None = None,
    script: Script | None = None,
    initial_x: np.ndarray | None = None,
    initial_z: np.ndarray | None = None,
    trace: list | None = None,
) -> ShotResult:
    """Execute one shot.

    ``trace``, when given a list, collects the stochastic consequence slots a
    leak opens up: ``("pair", gate, partner_position)`` for each two-qubit
    gate with exactly one leaked participant, ``("measbit", gate)`` for each
    junk measurement under the random_bit policy, and ``("readout", edge)``
    for each leaked final data carrier.
    """
    program = compiled.program
    lat = program.lattice
    noise = compiled.noise
    n = lat.n_qubits
    n_sites = lat.d * lat.d

    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    if initial_x is not None:
        x[: len(initial_x)] |= np.asarray(initial_x, dtype=np.uint8)
    if initial_z is not None:
        z[: len(initial_z)] |= np.asarray(initial_z, dtype=np.uint8)
    leak = np.zeros(n, dtype=bool)
    syndromes = np.zeros((program.n_rounds + 1, 2, n_sites), dtype=np.uint8)

    stochastic = uniforms is not None
    if stochastic and len(uniforms) != compiled.n_draws:
        raise ValueError(f"need {compiled.n_draws} uniform draws, got {len(uniforms)}")
    script = script or Script()

    def apply_pauli(q: int, pauli) -> None:
        x[q] ^= pauli[0]
        z[q] ^= pauli[1]

    for gi, g in enumerate(compiled.gates):
        q0, q1 = g.q0, g.q1
        if g.kind in (PREP_Z, PREP_X):
            x[q0] = 0
            z[q0] = 0
            leak[q0] = False
            if stochastic:
                u_err, u_leak = uniforms[g.draw_offset : g.draw_offset + 2]
                if u_err < noise.p:
                    apply_pauli(q0, PAULI_X if g.kind == PREP_Z else PAULI_Z)
                if g.leak_victims and u_leak < g.leak_prob:
                    leak[q0] = True
        elif g.kind == H:
            if not leak[q0]:
                propagate_h(x, z, q0)
                if stochastic:
                    u_dep, u_leak = uniforms[g.draw_offset : g.draw_offset + 2]
                    if u_dep < noise.p:
                        apply_pauli(q0, PAULI1_ERRORS[_sub_decode(u_dep, noise.p, 3)])
                    if g.leak_victims and u_leak < g.leak_prob:
                        leak[q0] = True
        elif g.kind == CNOT:
            lk0, lk1 = leak[q0], leak[q1]
            if lk0 and lk1:
                pass
            elif lk0 or lk1:
                partner = q1 if lk0 else q0
                if trace is not None:
                    trace.append(("pair", gi, 1 if lk0 else 0))
                if stochastic:
                    u_pair = uniforms[g.draw_offset + 2]
                    apply_pauli(partner, PAULI4[min(int(u_pair * 4), 3)])
            else:
                propagate_cnot(x, z, q0, q1)
                if stochastic:
                    u_dep, u_leak = uniforms[g.draw_offset : g.draw_offset + 2]
                    if u_dep < noise.p:
                        pair = PAULI2_ERRORS[_sub_decode(u_dep, noise.p, 15)]
                        apply_pauli(q0, pair[0])
                        apply_pauli(q1, pair[1])
                    if g.leak_victims and u_leak < g.leak_prob:
                        pos = g.leak_victims[
                            _sub_decode(u_leak, g.leak_prob, len(g.leak_victims))
                        ]
                        leak[(q0, q1)[pos]] = True
        elif g.kind == SWAP:
            lk0, lk1 = leak[q0], leak[q1]
            if lk0 and lk1:
                pass
            elif lk0 or lk1:
                partner = q1 if lk0 else q0  # exchange blocked; partner scrambled
                if trace is not None:
                    trace.append(("pair", gi, 1 if lk0 else 0))
                if stochastic:
                    u_pair = uniforms[g.draw_offset + 2]
                    apply_pauli(partner, PAULI4[min(int(u_pair * 4), 3)])
            else:
                propagate_swap(x, z, q0, q1)
                if stochastic:
                    u_dep, u_leak = uniforms[g.draw_offset : g.draw_offset + 2]
                    if u_dep < noise.p:
                        pair = PAULI2_ERRORS[_sub_decode(u_dep, noise.p, 15)]
                        apply_pauli(q0, pair[0])
                        apply_pauli(q1, pair[1])
                    if g.leak_victims and u_leak < g.leak_prob:
                        pos = g.leak_victims[
                            _sub_decode(u_leak, g.leak_prob, len(g.leak_victims))
                        ]
                        leak[(q0, q1)[pos]] = True
        elif g.kind in (MEAS_Z, MEAS_X):
            if leak[q0]:
                if noise.leaked_meas == "fixed_one":
                    bit = 1
                else:
                    if trace is not None:
                        trace.append(("measbit", gi))
                    bit = int(uniforms[g.draw_offset + 1] < 0.5) if stochastic else 0
            else:
                bit = int(x[q0] if g.kind == MEAS_Z else z[q0])
                if stochastic and uniforms[g.draw_offset] < noise.meas_flip:
                    bit ^= 1
            if gi in script.meas_flips:
                bit ^= 1
            syndromes[g.round_index, g.check_type, g.check_site] ^= bit
            # measure-and-reset: the measured qubit is reinitialized, which
            # clears both its Pauli frame and any leakage before reuse
            x[q0] = 0
            z[q0] = 0
            leak[q0] = False
        elif g.kind == IDLE:
            if not leak[q0] and stochastic:
                u_dep = uniforms[g.draw_offset]
                if u_dep < noise.p_idle:
                    apply_pauli(q0, PAULI1_ERRORS[_sub_decode(u_dep, noise.p_idle, 3)])
        else:  # pragma: no cover - builders only emit the kinds above
            raise ValueError(f"unknown gate kind {g.kind}")

        # scripted injections land after the gate's resolved action
        if (gi, 0) in script.leaks:
            leak[q0] = True
        if (gi, 1) in script.leaks:
            if q1 < 0:
                raise ValueError(f"gate {gi} has no second qubit to leak")
            leak[q1] = True
        if gi in script.paulis:
            touched = (q0,) if q1 < 0 else (q0, q1)
            for q, pauli in zip(touched, script.paulis[gi]):
                if pauli != PAULI_I:
                    apply_pauli(q, pauli)

    # final transversal readout of the data carriers
    carrier = program.final_data_carrier
    data_x = np.zeros(lat.n_data, dtype=np.uint8)
    data_z = np.zeros(lat.n_data, dtype=np.uint8)
    for e in range(lat.n_data):
        q = carrier[e]
        if leak[q]:
            if trace is not None:
                trace.append(("readout", e))
            if stochastic:
                u1, u2 = uniforms[compiled.readout_offset + 2 * e : compiled.readout_offset + 2 * e + 2]
                data_x[e] = u1 < 0.5
                data_z[e] = u2 < 0.5
        else:
            data_x[e] = x[q]
            data_z[e] = z[q]
        if e in script.readout_flips:
            dx, dz = script.readout_flips[e]
            data_x[e] ^= dx
            data_z[e] ^= dz

    z_syn, x_syn = lat.syndrome_of(data_x, data_z)
    syndromes[program.n_rounds, 0] = z_syn
    syndromes[program.n_rounds, 1] = x_syn

    return ShotResult(
        syndromes=syndromes,
        data_x=data_x,
        data_z=data_z,
        logical_parities=lat.logical_parities(data_x, data_z),
        leak_final=leak,
    )
