"""Minimal bare circuits for the 20 two-qubit targets by breadth-first search.

The search runs over two-qubit states reachable from |00> with the chip's
native single-qubit gates on either qubit and CNOT along the pair's edge.
States are deduplicated up to global phase, so each level of the search
holds states first reached at that gate count and the first hit is
minimal.  Exchanging the two qubits is free on a bare pair (it is a
relabelling of the readout), so each target is also matched with its
qubits exchanged.
"""
from __future__ import annotations

import csv
import heapq
import io
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .circuit import RAVEN, Circuit, Gate, GateKind, QubitLayout, decompose_cz, instruction_count
from .code422 import G_FT, TABLE1, EncodedTask
from .sim import OutcomeDistribution, StateVector, exact_distribution
from .sim.statevector import MATRICES, apply_gate, statevec_run

NATIVE_1Q = (GateKind.H, GateKind.S, GateKind.SDG, GateKind.X, GateKind.Y, GateKind.Z, GateKind.T, GateKind.TDG)
_DIGITS = 9


@dataclass(frozen=True)
class TargetState:
    row: int
    state: StateVector
    ideal: OutcomeDistribution
    task: EncodedTask


@dataclass(frozen=True)
class SearchStats:
    states_expanded: int
    depth: int


@dataclass(frozen=True)
class SynthesisResult:
    target: TargetState
    circuit: Circuit
    instruction_count: int
    stats: SearchStats
    gates: tuple[Gate, ...]  # on local qubits 0 (first logical) and 1
    relabelled: bool  # True when the physical qubits deliver the logical bits exchanged

    @property
    def n_gates(self) -> int:
        return len(self.gates)


def _canonical(amps: np.ndarray) -> tuple:
    k = int(np.argmax(np.abs(amps) > 1e-9))
    a = amps * (abs(amps[k]) / amps[k])
    a = np.round(a, _DIGITS) + 0.0  # drop negative zeros
    return tuple(np.concatenate([a.real, a.imag]).tolist())


def _swap_qubits(amps: np.ndarray) -> np.ndarray:
    # index bit k is qubit k; exchange |01> and |10>
    return amps[[0, 2, 1, 3]]


def is_stabilizer_state(amps: np.ndarray) -> bool:
    """A two-qubit pure state is a stabilizer state iff exactly four Paulis have |<P>| = 1."""
    state = StateVector(2, amps)
    hits = 0
    for a, b in product("IXYZ", repeat=2):
        v = state.amplitudes
        for q, ch in ((0, a), (1, b)):
            if ch != "I":
                v = _apply_1q(v, GateKind(ch), q)
        if abs(abs(np.vdot(state.amplitudes, v)) - 1) < 1e-9:
            hits += 1
    return hits == 4


def _apply_1q(amps: np.ndarray, kind: GateKind, q: int) -> np.ndarray:
    return apply_gate(amps, 2, Gate(kind, (q,)))


def native_gates(directions: list[tuple[int, int]], single: tuple[GateKind, ...] = NATIVE_1Q) -> list[Gate]:
    """Native gate alphabet on local qubits, in tie-break order (label, then operands)."""
    gates = [Gate(k, (q,)) for k in single for q in (0, 1)]
    gates += [Gate(GateKind.CNOT, d) for d in directions]
    return sorted(gates, key=lambda g: (g.kind.value, g.qubits))


@dataclass
class _Search:
    parents: dict[tuple, tuple[tuple | None, Gate | None, int]] = field(default_factory=dict)
    expanded: int = 0


def _bfs(directions, single, prune: bool, max_depth: int) -> _Search:
    start = np.zeros(4, dtype=complex)
    start[0] = 1
    alphabet = native_gates(directions, single)
    s = _Search()
    s.parents[_canonical(start)] = (None, None, 0)
    frontier = deque([(start, 0)])
    while frontier:
        amps, depth = frontier.popleft()
        if depth >= max_depth:
            continue
        key = _canonical(amps)
        s.expanded += 1
        for g in alphabet:
            nxt = apply_gate(amps, 2, g)
            k = _canonical(nxt)
            if k in s.parents:
                continue
            s.parents[k] = (key, g, depth + 1)
            if prune and not is_stabilizer_state(nxt):
                continue
            frontier.append((nxt, depth + 1))
    return s


def _path(s: _Search, key: tuple) -> list[Gate]:
    out = []
    while True:
        parent, g, _ = s.parents[key]
        if parent is None:
            return out[::-1]
        out.append(g)
        key = parent


# -- targets ---------------------------------------------------------------------------

_INITIAL_OPS = {"00": [], "0+": [("H", 1)], "bell": [("H", 0), ("CNOT", 0, 1)]}


def _bare_word(gates) -> list[tuple]:
    ops = []
    for g in gates:
        if g in ("X1", "X2", "Z1", "Z2"):
            ops.append((g[0], int(g[1]) - 1))
        elif g == "HHSWAP":
            ops += [("H", 0), ("H", 1), ("SWAP", 0, 1)]
        elif g == "CZ":
            ops += [(d.kind.value, *d.qubits) for d in decompose_cz(0, 1)]
        else:
            raise ValueError(g)
    return ops


def enumerate_targets() -> list[TargetState]:
    """Apply each row's bare unitary word to its initial state; 20 distinct states."""
    out, seen = [], set()
    for t in TABLE1:
        c = Circuit.from_ops(2, _INITIAL_OPS[t.initial] + _bare_word(t.gates))
        state = statevec_run(c)
        if not state.equal_up_to_phase(t.final_statevector, 1e-12):
            raise AssertionError(f"row {t.row}: bare word disagrees with the listed final state")
        key = _canonical(state.amplitudes)
        if key in seen:
            raise AssertionError(f"row {t.row}: duplicate target")
        seen.add(key)
        out.append(TargetState(t.row, state, t.ideal_logical_distribution, t))
    return out


# -- synthesis -------------------------------------------------------------------------


def pair_directions(layout: QubitLayout, pair: tuple[int, int]) -> list[tuple[int, int]]:
    """Local CNOT directions available on physical ``pair`` (local 0 = pair[0])."""
    a, b = pair
    dirs = []
    if (a, b) in layout.cnot_edges:
        dirs.append((0, 1))
    if (b, a) in layout.cnot_edges:
        dirs.append((1, 0))
    if not dirs:
        raise ValueError(f"qubits {a},{b} are not connected on {layout.name}")
    return dirs


def _physical_circuit(local: list[Gate], pair: tuple[int, int], relabelled: bool, n_qubits: int, name: str) -> Circuit:
    phys = [Gate(g.kind, tuple(pair[q] for q in g.qubits), i) for i, g in enumerate(local)]
    m = len(phys)
    phys.append(Gate(GateKind.MEASURE_Z, (pair[0],), m, 0))
    phys.append(Gate(GateKind.MEASURE_Z, (pair[1],), m + 1, 1))
    readout = ((pair[1],), (pair[0],)) if relabelled else ((pair[0],), (pair[1],))
    return Circuit(n_qubits, tuple(phys), None, readout, name)


class Synthesizer:
    """One breadth-first search per (layout, pair, gate set), shared by all targets."""

    def __init__(self, layout: QubitLayout = RAVEN, pair: tuple[int, int] = (2, 0),
                 single: tuple[GateKind, ...] = NATIVE_1Q, prune: bool = True, max_depth: int = 12):
        self.layout, self.pair, self.single = layout, tuple(pair), tuple(single)
        self.directions = pair_directions(layout, self.pair)
        self.search = _bfs(self.directions, self.single, prune, max_depth)

    def depth_of(self, amps: np.ndarray) -> int | None:
        hit = self.search.parents.get(_canonical(amps))
        return None if hit is None else hit[2]

    def synth(self, target: TargetState) -> SynthesisResult:
        amps = target.state.amplitudes
        options = []
        for relabelled, a in ((False, amps), (True, _swap_qubits(amps))):
            d = self.depth_of(a)
            if d is not None:
                options.append((d, relabelled, _canonical(a)))
        if not options:
            raise LookupError(f"row {target.row} unreachable with this gate set")
        depth, relabelled, key = min(options)
        local = _path(self.search, key)
        tag = f"{self.pair[0]}-{self.pair[1]}"
        c = _physical_circuit(local, self.pair, relabelled, self.layout.n_qubits, f"{target.task.task_id}-bare[{tag}]")
        stats = SearchStats(self.search.expanded, depth)
        return SynthesisResult(target, c, instruction_count(c), stats, tuple(local), relabelled)


def synth_min_circuit(target: TargetState, pair: tuple[int, int] = (2, 0), layout: QubitLayout = RAVEN,
                      native: tuple[GateKind, ...] = NATIVE_1Q, prune: bool = True) -> SynthesisResult:
    return Synthesizer(layout, pair, native, prune).synth(target)


def synthesize_all(layout: QubitLayout = RAVEN, pair: tuple[int, int] = (2, 0),
                   native: tuple[GateKind, ...] = NATIVE_1Q, prune: bool = True) -> list[SynthesisResult]:
    s = Synthesizer(layout, pair, native, prune)
    return [s.synth(t) for t in enumerate_targets()]


@dataclass(frozen=True)
class RowCheck:
    row: int
    expected: int
    found: int
    distribution_ok: bool

    @property
    def ok(self) -> bool:
        return self.expected == self.found and self.distribution_ok


def verify_table1(results: list[SynthesisResult] | None = None) -> list[RowCheck]:
    """Compare instruction counts and exact output distributions with the reference task table."""
    results = results if results is not None else synthesize_all()
    out = []
    for r in results:
        logical = exact_distribution(r.circuit).logical
        ideal = r.target.ideal
        keys = set(logical.probabilities) | set(ideal.probabilities)
        dist_ok = all(abs(logical.prob(k) - ideal.prob(k)) < 1e-12 for k in keys)
        out.append(RowCheck(r.target.row, r.target.task.instructions, r.instruction_count, dist_ok))
    return out


def exhaustive_min_depth(amps: np.ndarray, directions, single=NATIVE_1Q, max_depth: int = 4) -> int | None:
    """Brute-force minimum over all gate words up to ``max_depth`` (no dedup); optimality oracle."""
    alphabet = native_gates(directions, single)
    target = StateVector(2, amps)
    level = [np.eye(4, dtype=complex)[0]]
    for depth in range(max_depth + 1):
        for v in level:
            if target.equal_up_to_phase(StateVector(2, v), 1e-9):
                return depth
        if depth == max_depth:
            break
        level = [apply_gate(v, 2, g) for v in level for g in alphabet]
    return None


# -- logical-word search -----------------------------------------------------------------

# native cost of each bare preparation and logical gate; SWAP is a relabelling
INITIAL_COST = {"00": 0, "0+": 1, "bell": 2}
WORD_COST = {"X1": 1, "X2": 1, "Z1": 1, "Z2": 1, "HHSWAP": 2, "CZ": 3}


@dataclass(frozen=True)
class WordSolution:
    initial: str
    word: tuple[str, ...]  # application order
    cost: int
    amplitudes: np.ndarray = field(compare=False)


def word_search(max_cost: int = 12) -> dict[tuple, WordSolution]:
    """Cheapest (initial state, G_FT word) reaching every state, by uniform-cost search.

    Ties break on word length, then on the word's labels.  Keys are
    canonical amplitude tuples.
    """
    best: dict[tuple, WordSolution] = {}
    heap = []
    for init, cost in INITIAL_COST.items():
        amps = statevec_run(Circuit.from_ops(2, _INITIAL_OPS[init])).amplitudes
        heapq.heappush(heap, (cost, 0, (init,), init, (), amps.tolist()))
    while heap:
        cost, _, _, init, word, amps = heapq.heappop(heap)
        amps = np.array(amps, dtype=complex)
        key = _canonical(amps)
        if key in best:
            continue
        best[key] = WordSolution(init, word, cost, amps)
        for g in G_FT:
            c = cost + WORD_COST[g]
            if c > max_cost:
                continue
            nxt = statevec_run(Circuit.from_ops(2, _bare_word([g])), StateVector(2, amps)).amplitudes
            if _canonical(nxt) not in best:
                w = word + (g,)
                heapq.heappush(heap, (c, len(w), (init,) + w, init, w, nxt.tolist()))
    return best


def compile_word(initial: str, word: tuple[str, ...], directions: list[tuple[int, int]]) -> tuple[list[Gate], bool]:
    """Native gates on local qubits for a bare word; SWAPs become a readout relabelling.

    CZ is symmetric, so its H-CNOT-H is oriented along an available edge.  A
    CNOT against the edge is conjugated by Hadamards.  Returns the gates and
    whether the logical qubits end up exchanged.
    """
    # perm[k] = local qubit carrying logical qubit k; start so that logical 1 -> 2 is native
    perm = [0, 1] if (0, 1) in directions else [1, 0]
    gates: list[Gate] = []

    def cnot(c: int, t: int) -> None:
        if (c, t) in directions:
            gates.append(Gate(GateKind.CNOT, (c, t)))
        else:
            hs = [Gate(GateKind.H, (c,)), Gate(GateKind.H, (t,))]
            gates.extend(hs + [Gate(GateKind.CNOT, (t, c))] + hs)

    ops = list(_INITIAL_OPS[initial])
    for g in word:
        ops += [("CZ",)] if g == "CZ" else _bare_word([g])
    for op in ops:
        kind, qs = op[0], op[1:]
        if kind == "SWAP":
            perm.reverse()
        elif kind == "CZ":
            c, t = directions[0]
            gates.extend(Gate(d.kind, d.qubits) for d in decompose_cz(c, t))
        elif kind == "CNOT":
            cnot(perm[qs[0]], perm[qs[1]])
        else:
            gates.append(Gate(GateKind(kind), (perm[qs[0]],)))
    return gates, perm == [1, 0]


def synthesize_words(layout: QubitLayout = RAVEN, pair: tuple[int, int] = (2, 0)) -> list[SynthesisResult]:
    """Bare circuits compiled from the cheapest logical word reaching each target."""
    directions = pair_directions(layout, pair)
    best = word_search()
    tag = f"{pair[0]}-{pair[1]}"
    out = []
    for t in enumerate_targets():
        sol = best[_canonical(t.state.amplitudes)]
        local, relabelled = compile_word(sol.initial, sol.word, directions)
        c = _physical_circuit(local, tuple(pair), relabelled, layout.n_qubits, f"{t.task.task_id}-word[{tag}]")
        stats = SearchStats(len(best), len(local))
        out.append(SynthesisResult(t, c, instruction_count(c), stats, tuple(local), relabelled))
    return out


# -- export ----------------------------------------------------------------------------

CSV_COLUMNS = ["row", "task_id", "initial", "unitary", "final_state", "instructions", "expected", "match"]


def _ket_label(task: EncodedTask) -> str:
    terms = []
    for bits in ("00", "01", "10", "11"):
        a = task.final_state.get(bits, 0)
        if a:
            sign = "-" if a < 0 else "+"
            terms.append(f"{sign}|{bits}>")
    s = "".join(terms)
    return s[1:] if s.startswith("+") else s


def table1_csv(results: list[SynthesisResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        t = r.target.task
        w.writerow([t.row, t.task_id, t.initial, t.label, _ket_label(t), r.instruction_count, t.instructions,
                    int(r.instruction_count == t.instructions)])
    return buf.getvalue()


def export(results: list[SynthesisResult], out_dir: str | Path) -> list[Path]:
    """Write one QASM file per row plus ``table1.csv``; returns the paths written."""
    from .qasm import serialize_qasm

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for r in results:
        p = out / f"{r.target.task.task_id}.qasm"
        p.write_text(serialize_qasm(r.circuit))
        paths.append(p)
    p = out / "table1.csv"
    p.write_text(table1_csv(results))
    paths.append(p)
    return paths


__all__ = [
    "MATRICES",
    "NATIVE_1Q",
    "RowCheck",
    "SearchStats",
    "SynthesisResult",
    "Synthesizer",
    "TargetState",
    "enumerate_targets",
    "exhaustive_min_depth",
    "export",
    "is_stabilizer_state",
    "native_gates",
    "pair_directions",
    "synth_min_circuit",
    "synthesize_all",
    "table1_csv",
    "verify_table1",
    "word_search",
    "compile_word",
    "synthesize_words",
    "WordSolution",
]
