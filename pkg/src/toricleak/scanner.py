"""Exhaustive fault scanner: which single fault locations break the distance.

The scanner enumerates a deterministic fault universe over a compiled
program and judges every spec with all other noise switched off:

* Pauli specs — one orthogonal flip per preparation, 3 single-qubit Paulis
  per H, all 15 two-qubit Paulis per CNOT/SWAP, one bit flip per
  measurement.  Each is injected after its gate and the shot is decoded.
* Leak specs — one per (gate, eligible victim) under the noise policy's
  side/site filters, with preparation leaks included only when the policy
  enables initialization leakage.  A leak spec fails if *any* assignment of
  its downstream stochastic outcomes fails: every partner scramble at a
  two-qubit gate with one leaked participant, every junk measurement bit,
  and every erased readout bit.

Worst-case leak semantics are evaluated exactly.  The leak trajectory is
fixed by the location alone (outcome choices never create or move leaks),
so the consequence slots are a fixed list and the map from outcome choices
to (detection events, readout frame) is GF(2)-linear.  Unit effects per
choice are measured by scripted replays of the scalar executor, reduced to
a basis, and the whole span is enumerated.  Because CNOT never mixes X and
Z frame sectors and every effect lands on a single check type, the span
factorizes into an X-error side (star events + data X frame) and a Z-error
side (plaquette events + data Z frame) that the decoder also treats
independently, so each side is enumerated on its own.  Within one side the
failure verdict only depends on the event cells hit and the two logical
parities of the frame, which keeps ranks small; matchings for all event
subsets come from one subset dynamic program whose tie-breaking is
order-isomorphic to the production matcher.

Pair scanning (``max_faults=2``) composes cached Pauli-spec effects, which
is exact by frame linearity; leak specs take part only singly because their
worst-case assignment already spans multi-error combinations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .circuits import CNOT, H, IDLE, MEAS_X, MEAS_Z, PREP_X, PREP_Z, SWAP
from .decoder import Decoder, extract_events, match_defects, path_edges
from .lattice import ToricLattice
from .pauli import (
    PAULI1_ERRORS,
    PAULI2_ERRORS,
    PAULI_BY_NAME,
    PAULI_I,
    PAULI_X,
    PAULI_Z,
)
from .sim import CompiledProgram, Script, run_shot

SPAN_BUDGET_BITS = 16  # max basis rank enumerated exhaustively per side
CELL_CAP = 16  # max event cells covered by one subset DP
SAMPLE_COUNT = 4096  # assignments drawn when a span exceeds the budget
PAIR_CAP = 1200  # max single-fault specs admitted into pair scanning
_SMALL_WITNESS = 10  # prefer witnesses within the production DP range


@dataclass(frozen=True)
class FaultSpec:
    """One element of the fault universe.

    ``assignment`` fixes the downstream stochastic outcomes of a leak spec:
    a tuple of ``(slot, choice)`` pairs where slots are the executor's
    consequence slots (``("pair", gate, position)``, ``("measbit", gate)``,
    ``("readout", edge)``) and choices are a Pauli name, the bit 1, or an
    erasure component "x"/"z"/"y".  An empty assignment means "enumerate".
    """

    kind: str  # "pauli" | "meas_flip" | "leak"
    gate_index: int
    paulis: tuple = ()
    victim: int = -1
    assignment: tuple = ()


@dataclass(frozen=True)
class SpecLocation:
    """Reporting identity of a spec: what kind of site it sits on."""

    fault: str
    kind: str
    round: int
    ordinal: int
    role: str
    phase: str  # H gates: pre/mid/post relative to the round's CNOT block
    check: tuple[str, int] | None


@dataclass
class LeakAnalysis:
    spec: FaultSpec
    slots: tuple
    rank_star: int
    rank_plaq: int
    exhaustive: bool
    failed: bool
    witness: FaultSpec | None  # failing spec with its assignment filled in


@dataclass
class ScanVerdict:
    variant: str
    d: int
    n_rounds: int
    max_faults: int
    n_pauli_specs: int
    n_leak_specs: int
    pauli_failures: list[FaultSpec]
    leak_failures: list[LeakAnalysis]
    pair_failures: list[tuple[FaultSpec, FaultSpec]] = field(default_factory=list)
    n_pairs: int = 0
    sampled: list[FaultSpec] = field(default_factory=list)

    @property
    def distance_preserving(self) -> bool:
        return not self.pauli_failures and not self.leak_failures

    @property
    def exhaustive(self) -> bool:
        return not self.sampled

    @property
    def failing_leak_specs(self) -> list[FaultSpec]:
        return [a.spec for a in self.leak_failures]


# ---------------------------------------------------------------------------
# universe


def enumerate_fault_universe(compiled: CompiledProgram) -> list[FaultSpec]:
    """Deterministic list of all single-fault specs for this program/policy."""
    specs: list[FaultSpec] = []
    for gi, g in enumerate(compiled.gates):
        if g.kind in (PREP_Z, PREP_X):
            flip = PAULI_X if g.kind == PREP_Z else PAULI_Z
            specs.append(FaultSpec("pauli", gi, paulis=(flip,)))
        elif g.kind == H:
            for p in PAULI1_ERRORS:
                specs.append(FaultSpec("pauli", gi, paulis=(p,)))
        elif g.kind in (CNOT, SWAP):
            for pair in PAULI2_ERRORS:
                specs.append(FaultSpec("pauli", gi, paulis=pair))
        elif g.kind in (MEAS_Z, MEAS_X):
            specs.append(FaultSpec("meas_flip", gi))
        elif g.kind == IDLE and compiled.noise.p_idle > 0:
            for p in PAULI1_ERRORS:
                specs.append(FaultSpec("pauli", gi, paulis=(p,)))
    for gi, g in enumerate(compiled.gates):
        if g.leak_prob > 0:
            for pos in g.leak_victims:
                specs.append(FaultSpec("leak", gi, victim=pos))
    return specs


def spec_location(compiled: CompiledProgram, spec: FaultSpec) -> SpecLocation:
    g = compiled.gates[spec.gate_index]
    label = g.label
    if spec.kind == "leak":
        role = label.roles[spec.victim]
    else:
        role = "+".join(label.roles)
    phase = "-"
    if label.kind == H:
        first, last = _round_cnot_bounds(compiled)[label.round]
        if label.gate_index < first:
            phase = "pre"
        elif label.gate_index > last:
            phase = "post"
        else:
            phase = "mid"
    return SpecLocation(
        fault=spec.kind,
        kind=label.kind,
        round=label.round,
        ordinal=label.cnot_ordinal,
        role=role,
        phase=phase,
        check=label.check,
    )


def _round_cnot_bounds(compiled: CompiledProgram) -> dict[int, tuple[int, int]]:
    bounds = getattr(compiled, "_cnot_bounds", None)
    if bounds is None:
        bounds = {}
        for g in compiled.gates:
            if g.kind == CNOT:
                r = g.label.round
                lo, hi = bounds.get(r, (g.label.gate_index, g.label.gate_index))
                bounds[r] = (min(lo, g.label.gate_index), max(hi, g.label.gate_index))
        compiled._cnot_bounds = bounds
    return bounds


# ---------------------------------------------------------------------------
# scripted replays


def script_for(compiled: CompiledProgram, spec: FaultSpec) -> Script:
    """Translate a spec (plus any assignment) into executor injections."""
    if spec.kind == "pauli":
        return Script(paulis={spec.gate_index: spec.paulis})
    if spec.kind == "meas_flip":
        return Script(meas_flips={spec.gate_index})
    script = Script(leaks={(spec.gate_index, spec.victim)})
    for slot, choice in spec.assignment:
        tag = slot[0]
        if tag == "pair":
            _, gi, pos = slot
            g = compiled.gates[gi]
            paulis = [PAULI_I, PAULI_I] if g.q1 >= 0 else [PAULI_I]
            paulis[pos] = PAULI_BY_NAME[choice]
            script.paulis[gi] = tuple(paulis)
        elif tag == "measbit":
            if choice:
                script.meas_flips.add(slot[1])
        elif tag == "readout":
            dx = 1 if choice in ("x", "y") else 0
            dz = 1 if choice in ("z", "y") else 0
            script.readout_flips[slot[1]] = (dx, dz)
        else:
            raise ValueError(f"unknown assignment slot {slot!r}")
    return script


def leak_consequences(compiled: CompiledProgram, spec: FaultSpec):
    """Baseline replay of a leak spec plus its downstream consequence slots."""
    if spec.kind != "leak":
        raise ValueError("consequence slots exist only for leak specs")
    trace: list = []
    base = run_shot(
        compiled, script=script_for(compiled, replace(spec, assignment=())), trace=trace
    )
    return base, tuple(trace)


def replay_spec(compiled: CompiledProgram, decoder: Decoder, spec: FaultSpec):
    """Run a fully specified spec and decode it (other noise off)."""
    if spec.kind == "leak" and spec.assignment:
        _, slots = leak_consequences(compiled, spec)
        valid = set(slots)
        for slot, _ in spec.assignment:
            if slot not in valid:
                raise ValueError(f"assignment slot {slot!r} is not downstream of the leak")
    res = run_shot(compiled, script=script_for(compiled, spec))
    return res, decoder.decode(res.syndromes, res.data_x, res.data_z)


# ---------------------------------------------------------------------------
# GF(2) spans of leak consequences


def _gf2_basis(vecs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Row-reduce (vector, provenance) pairs; provenance tracks generators."""
    by_lead: dict[int, tuple[int, int]] = {}
    basis: list[tuple[int, int]] = []
    for v, p in vecs:
        while v:
            lead = v.bit_length() - 1
            hit = by_lead.get(lead)
            if hit is None:
                by_lead[lead] = (v, p)
                basis.append((v, p))
                break
            v ^= hit[0]
            p ^= hit[1]
    return basis


class _PairMatcher:
    """Minimum-weight matchings for every even subset of fixed event cells.

    One subset DP serves all assignments of a leak location.  The pivot and
    tie-break rules mirror the production matcher on its shared range, and
    the walk returns only what the verdict needs: the two logical-crossing
    parities of the correction.
    """

    def __init__(self, lat: ToricLattice, check_type: int, cells: list[tuple[int, int]]):
        self.cells = cells
        n = len(cells)
        logicals = lat.z_logicals if check_type == 0 else lat.x_logicals
        sets = (frozenset(logicals[0]), frozenset(logicals[1]))
        w = np.zeros((n, n), dtype=np.int64)
        pairpar = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                (t1, s1), (t2, s2) = cells[i], cells[j]
                w[i, j] = w[j, i] = lat.torus_distance(s1, s2) + abs(t1 - t2)
                path = path_edges(lat, check_type, s1, s2)
                par = (sum(e in sets[0] for e in path) & 1) | (
                    (sum(e in sets[1] for e in path) & 1) << 1
                )
                pairpar[i, j] = pairpar[j, i] = par
        self._pairpar = pairpar
        INF = 1 << 60
        size = 1 << n
        dp = np.full(size, INF, dtype=np.int64)
        choice = np.zeros(size, dtype=np.int64)
        dp[0] = 0
        for mask in range(1, size):
            if bin(mask).count("1") % 2:
                continue
            i = (mask & -mask).bit_length() - 1
            rest = mask ^ (1 << i)
            best, best_j = INF, -1
            j_bits = rest
            while j_bits:
                j = (j_bits & -j_bits).bit_length() - 1
                j_bits &= j_bits - 1
                cand = dp[mask ^ (1 << i) ^ (1 << j)] + w[i, j]
                if cand < best:
                    best, best_j = cand, j
            dp[mask] = best
            choice[mask] = best_j
        self._choice = choice
        self._memo: dict[int, int] = {0: 0}

    def match_parities(self, mask: int) -> int:
        hit = self._memo.get(mask)
        if hit is not None:
            return hit
        if mask.bit_count() % 2:
            raise ValueError("odd defect parity cannot arise from a Pauli frame")
        par = 0
        m = mask
        while m:
            i = (m & -m).bit_length() - 1
            j = int(self._choice[m])
            par ^= int(self._pairpar[i, j])
            m ^= (1 << i) | (1 << j)
        self._memo[mask] = par
        return par


@dataclass
class _SpanProblem:
    """One independently enumerable side of a leak location's span."""

    cells: tuple[list, list]  # event cells per check type, sorted (t, site)
    base_masks: tuple[int, int]
    base_par: int  # 4 judge-parity bits
    basis: list[tuple[int, int]]

    def split(self, vec: int) -> tuple[int, int, int]:
        n0, n1 = len(self.cells[0]), len(self.cells[1])
        return vec & ((1 << n0) - 1), (vec >> n0) & ((1 << n1) - 1), vec >> (n0 + n1)


def _direct_parities(lat: ToricLattice, check_type: int, cells, mask: int) -> int:
    """Correction parities via the production matcher, for oversized spans."""
    defects = tuple(cells[j] for j in range(len(cells)) if mask >> j & 1)
    logicals = lat.z_logicals if check_type == 0 else lat.x_logicals
    sets = (frozenset(logicals[0]), frozenset(logicals[1]))
    par = 0
    for a, b in match_defects(lat, defects):
        path = path_edges(lat, check_type, a[1], b[1])
        par ^= (sum(e in sets[0] for e in path) & 1) | (
            (sum(e in sets[1] for e in path) & 1) << 1
        )
    return par


def _effect_parts(lat: ToricLattice, res, base_events, base_fx, base_fz):
    events = extract_events(res.syndromes) ^ base_events
    fx = res.data_x ^ base_fx
    fz = res.data_z ^ base_fz
    par = lat.logical_parities(fx, fz)
    cells0 = list(zip(*(a.tolist() for a in np.nonzero(events[:, 0, :]))))
    cells1 = list(zip(*(a.tolist() for a in np.nonzero(events[:, 1, :]))))
    par4 = int(par[0]) | int(par[1]) << 1 | int(par[2]) << 2 | int(par[3]) << 3
    return cells0, cells1, par4


def _pack(cells, index0, index1, par4) -> int:
    cells0, cells1, _ = cells
    n0, n1 = len(index0), len(index1)
    vec = 0
    for cell in cells0:
        vec |= 1 << index0[cell]
    for cell in cells1:
        vec |= 1 << (n0 + index1[cell])
    return vec | par4 << (n0 + n1)


def _leak_problems(
    compiled: CompiledProgram, spec: FaultSpec
) -> tuple[list, list[tuple], bool, list[_SpanProblem]]:
    """Shared setup: consequence slots, unit-effect generators and the GF(2)
    span problems (one per check-type side when factorizable, else joint)."""
    lat = compiled.lattice
    base, slots = leak_consequences(compiled, spec)
    base_events = extract_events(base.syndromes)

    generators: list[tuple] = []  # (slot, choice)
    for slot in slots:
        if slot[0] == "pair":
            generators.append((slot, "X"))
            generators.append((slot, "Z"))
        elif slot[0] == "measbit":
            generators.append((slot, 1))
        else:  # readout erasure
            generators.append((slot, "x"))
            generators.append((slot, "z"))

    zero_events = np.zeros_like(base_events)
    zero_fx = np.zeros_like(base.data_x)
    effects = []
    for gen in generators:
        res = run_shot(
            compiled, script=script_for(compiled, replace(spec, assignment=(gen,)))
        )
        effects.append(_effect_parts(lat, res, base_events, base.data_x, base.data_z))
    base_parts = _effect_parts(lat, base, zero_events, zero_fx, zero_fx)

    # split into per-check-type sides when every generator is single-sided
    def side_of(parts) -> int:
        star = bool(parts[0]) or parts[2] & 0b0011
        plaq = bool(parts[1]) or parts[2] & 0b1100
        return (1 if star else 0) | (2 if plaq else 0)

    sides = [side_of(parts) for parts in effects]
    factorized = all(s != 3 for s in sides)

    def build_problem(members: list[int], with_base: bool) -> _SpanProblem:
        cell_sets: tuple[set, set] = (set(), set())
        for gi in members:
            cell_sets[0].update(effects[gi][0])
            cell_sets[1].update(effects[gi][1])
        if with_base:
            cell_sets[0].update(base_parts[0])
            cell_sets[1].update(base_parts[1])
        cells0, cells1 = sorted(cell_sets[0]), sorted(cell_sets[1])
        index0 = {cell: i for i, cell in enumerate(cells0)}
        index1 = {cell: i for i, cell in enumerate(cells1)}
        vecs = []
        for gi in members:
            vec = _pack(effects[gi], index0, index1, effects[gi][2])
            vecs.append((vec, 1 << gi))
        n0, n1 = len(cells0), len(cells1)
        base_vec = _pack(base_parts, index0, index1, 0) if with_base else 0
        return _SpanProblem(
            cells=(cells0, cells1),
            base_masks=(base_vec & ((1 << n0) - 1), (base_vec >> n0) & ((1 << n1) - 1)),
            base_par=base_parts[2],
            basis=_gf2_basis(vecs),
        )

    if factorized:
        star_members = [i for i, s in enumerate(sides) if s == 1]
        plaq_members = [i for i, s in enumerate(sides) if s == 2]
        problems = [build_problem(star_members, True), build_problem(plaq_members, True)]
    else:
        problems = [build_problem(list(range(len(effects))), True)]
    return slots, generators, factorized, problems


def analyze_leak(
    compiled: CompiledProgram,
    spec: FaultSpec,
    span_budget_bits: int = SPAN_BUDGET_BITS,
    cell_cap: int = CELL_CAP,
    sample_count: int = SAMPLE_COUNT,
) -> LeakAnalysis:
    """Worst-case verdict for one leak location, exact unless flagged."""
    lat = compiled.lattice
    slots, generators, factorized, problems = _leak_problems(compiled, spec)

    failed = False
    witness_prov: int | None = None
    witness_defects = 1 << 30
    exhaustive = True

    for prob in problems:
        rank = len(prob.basis)
        n0, n1 = len(prob.cells[0]), len(prob.cells[1])
        use_dp = rank <= span_budget_bits and n0 <= cell_cap and n1 <= cell_cap
        if use_dp:
            matchers = (
                _PairMatcher(lat, 0, prob.cells[0]),
                _PairMatcher(lat, 1, prob.cells[1]),
            )

            def matchpar(ct: int, mask: int) -> int:
                return matchers[ct].match_parities(mask)

        else:
            exhaustive = False
            memo: dict[tuple[int, int], int] = {}

            def matchpar(ct: int, mask: int) -> int:
                key = (ct, mask)
                hit = memo.get(key)
                if hit is None:
                    hit = memo[key] = _direct_parities(lat, ct, prob.cells[ct], mask)
                return hit

        def judge(acc_vec: int, acc_prov: int) -> None:
            nonlocal failed, witness_prov, witness_defects
            m0, m1, par = prob.split(acc_vec)
            m0 ^= prob.base_masks[0]
            m1 ^= prob.base_masks[1]
            par ^= prob.base_par
            par ^= matchpar(0, m0) & 0b0011
            par ^= (matchpar(1, m1) << 2) & 0b1100
            if par:
                failed = True
                n_def = m0.bit_count() + m1.bit_count()
                if n_def < witness_defects:
                    witness_defects = n_def
                    witness_prov = acc_prov

        judge(0, 0)
        if use_dp:
            acc_vec = acc_prov = 0
            for k in range(1, 1 << rank):
                j = (k & -k).bit_length() - 1
                acc_vec ^= prob.basis[j][0]
                acc_prov ^= prob.basis[j][1]
                judge(acc_vec, acc_prov)
                if failed and witness_defects <= _SMALL_WITNESS:
                    break
        else:
            rng = np.random.default_rng(
                np.random.SeedSequence([spec.gate_index, spec.victim, rank])
            )
            for _ in range(sample_count):
                bits = rng.integers(0, 2, size=rank)
                acc_vec = acc_prov = 0
                for j in range(rank):
                    if bits[j]:
                        acc_vec ^= prob.basis[j][0]
                        acc_prov ^= prob.basis[j][1]
                judge(acc_vec, acc_prov)
                if failed and witness_defects <= _SMALL_WITNESS:
                    break
        if failed and witness_defects <= _SMALL_WITNESS:
            break

    witness = None
    if witness_prov is not None:
        merged: dict = {}
        for i, gen in enumerate(generators):
            if witness_prov >> i & 1:
                slot, choice = gen
                merged[slot] = _merge_choice(merged.get(slot), choice)
        witness = replace(spec, assignment=tuple(sorted(merged.items())))

    star_rank = plaq_rank = 0
    if factorized:
        star_rank = len(problems[0].basis)
        plaq_rank = len(problems[1].basis)
    else:
        star_rank = plaq_rank = len(problems[0].basis)

    return LeakAnalysis(
        spec=spec,
        slots=slots,
        rank_star=star_rank,
        rank_plaq=plaq_rank,
        exhaustive=exhaustive,
        failed=failed,
        witness=witness,
    )


def _merge_choice(current, choice):
    if current is None:
        return choice
    if {current, choice} == {"X", "Z"}:
        return "Y"
    if {current, choice} == {"x", "z"}:
        return "y"
    raise ValueError(f"cannot merge outcome choices {current!r} and {choice!r}")


def leak_failure_fraction(
    compiled: CompiledProgram,
    spec: FaultSpec,
    span_budget_bits: int = SPAN_BUDGET_BITS,
    cell_cap: int = CELL_CAP,
    sample_count: int = SAMPLE_COUNT,
) -> tuple[float, bool]:
    """Exact P(logical failure | this leak fires) under uniform draws.

    Every consequence draw resolves to independent uniform bits (a partner
    Pauli is two bits, a junk measurement one, a readout erasure two), and
    the map from draw choices to the judged effect is GF(2)-linear, so the
    effect is uniform over the span with equal fibers.  The failing fraction
    is therefore (#failing span points) / 2^rank, with independent sides
    combining as 1 - (1-q_star)(1-q_plaq).  Returns ``(fraction, exact)``;
    an over-budget side falls back to a sampled estimate with exact=False.
    """
    lat = compiled.lattice
    _, _, factorized, problems = _leak_problems(compiled, spec)

    exact = True
    survive = 1.0
    for pi, prob in enumerate(problems):
        if factorized:
            par_mask = 0b0011 if pi == 0 else 0b1100
        else:
            par_mask = 0b1111
        rank = len(prob.basis)
        n0, n1 = len(prob.cells[0]), len(prob.cells[1])
        use_dp = rank <= span_budget_bits and n0 <= cell_cap and n1 <= cell_cap
        if use_dp:
            matchers = (
                _PairMatcher(lat, 0, prob.cells[0]),
                _PairMatcher(lat, 1, prob.cells[1]),
            )

            def matchpar(ct: int, mask: int) -> int:
                return matchers[ct].match_parities(mask)

        else:
            exact = False
            memo: dict[tuple[int, int], int] = {}

            def matchpar(ct: int, mask: int) -> int:
                key = (ct, mask)
                hit = memo.get(key)
                if hit is None:
                    hit = memo[key] = _direct_parities(lat, ct, prob.cells[ct], mask)
                return hit

        def judged_par(acc_vec: int) -> int:
            m0, m1, par = prob.split(acc_vec)
            m0 ^= prob.base_masks[0]
            m1 ^= prob.base_masks[1]
            par ^= prob.base_par
            par ^= matchpar(0, m0) & 0b0011
            par ^= (matchpar(1, m1) << 2) & 0b1100
            return par

        failing = 0
        if use_dp:
            total = 1 << rank
            acc_vec = 0
            if judged_par(0) & par_mask:
                failing += 1
            for k in range(1, total):
                j = (k & -k).bit_length() - 1
                acc_vec ^= prob.basis[j][0]
                if judged_par(acc_vec) & par_mask:
                    failing += 1
        else:
            total = sample_count
            rng = np.random.default_rng(
                np.random.SeedSequence([spec.gate_index, spec.victim, rank, 1])
            )
            for _ in range(sample_count):
                bits = rng.integers(0, 2, size=rank)
                acc_vec = 0
                for j in range(rank):
                    if bits[j]:
                        acc_vec ^= prob.basis[j][0]
                if judged_par(acc_vec) & par_mask:
                    failing += 1
        survive *= 1.0 - failing / total
    return 1.0 - survive, exact


# ---------------------------------------------------------------------------
# the scan


def scan(
    compiled: CompiledProgram,
    universe: list[FaultSpec] | None = None,
    decoder: Decoder | None = None,
    max_faults: int = 1,
    pair_cap: int = PAIR_CAP,
    span_budget_bits: int = SPAN_BUDGET_BITS,
) -> ScanVerdict:
    """Judge every spec in the universe with all other noise off."""
    if max_faults not in (1, 2):
        raise ValueError("max_faults must be 1 or 2")
    if universe is None:
        universe = enumerate_fault_universe(compiled)
    decoder = decoder or Decoder(compiled.lattice)

    pauli_specs = [s for s in universe if s.kind in ("pauli", "meas_flip")]
    leak_specs = [s for s in universe if s.kind == "leak"]
    if max_faults == 2 and len(pauli_specs) > pair_cap:
        raise ValueError(
            f"pair scanning capped at {pair_cap} single-fault specs, "
            f"got {len(pauli_specs)}; pass a restricted universe"
        )

    pauli_failures: list[FaultSpec] = []
    cached = []
    for spec in pauli_specs:
        res = run_shot(compiled, script=script_for(compiled, spec))
        if decoder.decode(res.syndromes, res.data_x, res.data_z).failure:
            pauli_failures.append(spec)
        if max_faults == 2:
            cached.append((res.syndromes, res.data_x, res.data_z))

    leak_failures: list[LeakAnalysis] = []
    sampled: list[FaultSpec] = []
    for spec in leak_specs:
        analysis = analyze_leak(compiled, spec, span_budget_bits=span_budget_bits)
        if analysis.failed:
            leak_failures.append(analysis)
        if not analysis.exhaustive:
            sampled.append(spec)

    pair_failures: list[tuple[FaultSpec, FaultSpec]] = []
    n_pairs = 0
    if max_faults == 2:
        for i in range(len(pauli_specs)):
            si, xi, zi = cached[i]
            for j in range(i + 1, len(pauli_specs)):
                sj, xj, zj = cached[j]
                n_pairs += 1
                if decoder.decode(si ^ sj, xi ^ xj, zi ^ zj).failure:
                    pair_failures.append((pauli_specs[i], pauli_specs[j]))

    program = compiled.program
    return ScanVerdict(
        variant=program.variant,
        d=compiled.lattice.d,
        n_rounds=program.n_rounds,
        max_faults=max_faults,
        n_pauli_specs=len(pauli_specs),
        n_leak_specs=len(leak_specs),
        pauli_failures=pauli_failures,
        leak_failures=leak_failures,
        pair_failures=pair_failures,
        n_pairs=n_pairs,
        sampled=sampled,
    )


def verdict_to_text(compiled: CompiledProgram, verdict: ScanVerdict) -> str:
    """Versioned scan report with failing locations grouped by site class."""
    noise = compiled.noise
    lines = [
        "toricleak-scan v1",
        f"variant={verdict.variant} d={verdict.d} rounds={verdict.n_rounds} "
        f"max_faults={verdict.max_faults}",
        f"policy side_policy={noise.side_policy} site_filter={noise.site_filter} "
        f"init_leak={'on' if noise.p_init_leak > 0 else 'off'} "
        f"leaked_meas={noise.leaked_meas}",
        f"universe pauli={verdict.n_pauli_specs} leak={verdict.n_leak_specs}",
        f"pauli_failing={len(verdict.pauli_failures)}",
        f"leak_failing={len(verdict.leak_failures)}",
    ]
    groups: dict[tuple, list[int]] = {}
    for spec in verdict.pauli_failures + verdict.failing_leak_specs:
        loc = spec_location(compiled, spec)
        key = (loc.fault, loc.kind, loc.ordinal, loc.role, loc.phase)
        groups.setdefault(key, []).append(loc.round)
    for key in sorted(groups, key=str):
        fault, kind, ordinal, role, phase = key
        rounds = ",".join(str(r) for r in sorted(set(groups[key])))
        lines.append(
            f"group fault={fault} kind={kind} ordinal={ordinal} role={role} "
            f"phase={phase} specs={len(groups[key])} rounds={rounds}"
        )
    if verdict.max_faults == 2:
        lines.append(
            f"pairs_scanned={verdict.n_pairs} pairs_failing={len(verdict.pair_failures)}"
        )
    lines.append(f"sampled={len(verdict.sampled)}")
    lines.append(f"distance_preserving={int(verdict.distance_preserving)}")
    lines.append(f"exhaustive={int(verdict.exhaustive)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# residual error chains


@dataclass
class ResidualWeight:
    """Raw and stabilizer-reduced weight of a spec's residual data error."""

    raw_x: int
    raw_z: int
    reduced_x: int
    reduced_z: int
    joint: int  # min qubits carrying any error over simultaneous coset choices
    aligned_x: bool  # some minimal X representative sits inside a logical line
    aligned_z: bool
    support_x: tuple[int, ...]
    support_z: tuple[int, ...]


def _frame_int(bits: np.ndarray) -> int:
    out = 0
    for e in np.nonzero(bits)[0]:
        out |= 1 << int(e)
    return out


_COSET_CACHE: dict[tuple[int, int], list[int]] = {}


def _coset_masks(lat: ToricLattice, check_type: int) -> list[int]:
    """All stabilizer products that multiply onto a frame of one error type."""
    if lat.d != 3:
        raise NotImplementedError("exhaustive coset search is provided for d=3")
    key = (lat.d, check_type)
    hit = _COSET_CACHE.get(key)
    if hit is not None:
        return hit
    support = lat.x_support if check_type == 0 else lat.z_support
    rows = []
    for s in range(lat.d**2):
        m = 0
        for e in support[s]:
            m |= 1 << int(e)
        rows.append(m)
    masks = [0]
    for row in rows:
        masks += [m ^ row for m in masks]
    _COSET_CACHE[key] = masks
    return masks


def _logical_line_masks(lat: ToricLattice, check_type: int) -> list[int]:
    d = lat.d
    lines = []
    if check_type == 0:  # X errors: loops parallel to the X logicals
        for r in range(d):
            lines.append(sum(1 << lat.h(r, c) for c in range(d)))
        for c in range(d):
            lines.append(sum(1 << lat.v(r, c) for r in range(d)))
    else:  # Z errors: loops parallel to the Z logicals
        for c in range(d):
            lines.append(sum(1 << lat.h(r, c) for r in range(d)))
        for r in range(d):
            lines.append(sum(1 << lat.v(r, c) for c in range(d)))
    return lines


def _reduce(lat: ToricLattice, frame: int, check_type: int) -> tuple[int, list[int]]:
    best = frame.bit_count()
    reps = [frame]
    for mask in _coset_masks(lat, check_type):
        cand = frame ^ mask
        w = cand.bit_count()
        if w < best:
            best, reps = w, [cand]
        elif w == best and cand not in reps:
            reps.append(cand)
    return best, reps


def _aligned(reps: list[int], lines: list[int]) -> bool:
    return any(rep and rep & ~line == 0 for rep in reps for line in lines)


def residual_frames_to_weight(lat: ToricLattice, data_x, data_z) -> ResidualWeight:
    fx, fz = _frame_int(data_x), _frame_int(data_z)
    reduced_x, reps_x = _reduce(lat, fx, 0)
    reduced_z, reps_z = _reduce(lat, fz, 1)
    masks_x, masks_z = _coset_masks(lat, 0), _coset_masks(lat, 1)
    joint = min(
        ((fx ^ mx) | (fz ^ mz)).bit_count() for mx in masks_x for mz in masks_z
    )
    return ResidualWeight(
        raw_x=fx.bit_count(),
        raw_z=fz.bit_count(),
        reduced_x=reduced_x,
        reduced_z=reduced_z,
        joint=joint,
        aligned_x=_aligned(reps_x, _logical_line_masks(lat, 0)),
        aligned_z=_aligned(reps_z, _logical_line_masks(lat, 1)),
        support_x=tuple(int(e) for e in np.nonzero(data_x)[0]),
        support_z=tuple(int(e) for e in np.nonzero(data_z)[0]),
    )


def residual_weight(compiled: CompiledProgram, spec: FaultSpec) -> ResidualWeight:
    """Residual data error left at readout by a fully specified spec."""
    if spec.kind == "leak" and spec.assignment:
        _, slots = leak_consequences(compiled, spec)
        valid = set(slots)
        for slot, _ in spec.assignment:
            if slot not in valid:
                raise ValueError(f"assignment slot {slot!r} is not downstream of the leak")
    res = run_shot(compiled, script=script_for(compiled, spec))
    return residual_frames_to_weight(compiled.lattice, res.data_x, res.data_z)


@dataclass
class ResidualExtremes:
    """Worst cases over all outcome assignments of one leak location."""

    max_raw: int  # most qubits carrying any error, before reduction
    max_reduced_x: int
    max_reduced_z: int
    always_single_error: bool  # every assignment reduces to one qubit or none


def leak_residual_extremes(
    compiled: CompiledProgram, spec: FaultSpec, budget_bits: int = 12
) -> ResidualExtremes:
    """Enumerate the (small) span of readout frames a leak can leave behind."""
    lat = compiled.lattice
    base, slots = leak_consequences(compiled, spec)
    vec_pairs = []
    for slot in slots:
        choices = (
            ("X", "Z")
            if slot[0] == "pair"
            else ((1,) if slot[0] == "measbit" else ("x", "z"))
        )
        for choice in choices:
            res = run_shot(
                compiled,
                script=script_for(compiled, replace(spec, assignment=((slot, choice),))),
            )
            fx = _frame_int(res.data_x ^ base.data_x)
            fz = _frame_int(res.data_z ^ base.data_z)
            if fx or fz:
                vec_pairs.append((fx, fz))
    base_fx, base_fz = _frame_int(base.data_x), _frame_int(base.data_z)
    width = 2 * lat.n_data
    basis = _gf2_basis([(fx | fz << lat.n_data, 0) for fx, fz in vec_pairs])
    rank = len(basis)
    if rank > budget_bits:
        raise ValueError(f"frame span rank {rank} exceeds budget {budget_bits}")
    mask_lo = (1 << lat.n_data) - 1
    max_raw = 0
    max_rx = max_rz = 0
    always_single = True
    acc = base_fx | base_fz << lat.n_data
    for k in range(1 << rank):
        if k:
            j = (k & -k).bit_length() - 1
            acc ^= basis[j][0]
        fx, fz = acc & mask_lo, acc >> lat.n_data
        max_raw = max(max_raw, (fx | fz).bit_count())
        rx, reps_x = _reduce(lat, fx, 0)
        rz, reps_z = _reduce(lat, fz, 1)
        max_rx, max_rz = max(max_rx, rx), max(max_rz, rz)
        if always_single:
            always_single = _joint_single(rx, reps_x, rz, reps_z)
    return ResidualExtremes(
        max_raw=max_raw,
        max_reduced_x=max_rx,
        max_reduced_z=max_rz,
        always_single_error=always_single,
    )


def _joint_single(rx: int, reps_x: list[int], rz: int, reps_z: list[int]) -> bool:
    """Can both residuals be reduced onto at most one common qubit?"""
    if rx > 1 or rz > 1:
        return False
    if rx == 0 or rz == 0:
        return True
    return any(x == z for x in reps_x for z in reps_z)
