"""Dense statevector backend.

Amplitude index bit ``k`` is qubit ``k``.  Measurements are resolved by full
branching: a circuit with ``m`` measurements yields at most ``2**m`` branches,
each carrying its probability, collapsed state and classical record.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit, Gate, GateKind

MAX_QUBITS = 10
_PRUNE = 1e-14

_R2 = 1 / np.sqrt(2)
_T = np.exp(1j * np.pi / 4)
MATRICES = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _R2,
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, _T]], dtype=complex),
    GateKind.TDG: np.array([[1, 0], [0, np.conj(_T)]], dtype=complex),
}


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.n_qubits:
            raise ValueError(f"{amps.size} amplitudes for {self.n_qubits} qubits")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> StateVector:
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1
        return cls(n_qubits, amps)

    @classmethod
    def from_terms(cls, n_qubits: int, terms: dict[str, complex]) -> StateVector:
        """Normalised superposition of basis kets given as ``{"0110": amp}``.

        Character ``k`` of each key is the value of qubit ``k``.
        """
        amps = np.zeros(2**n_qubits, dtype=complex)
        for bits, a in terms.items():
            amps[int(bits[::-1], 2)] += a
        return cls(n_qubits, amps / np.linalg.norm(amps))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: StateVector) -> float:
        return abs(self.overlap(other)) ** 2

    def equal_up_to_phase(self, other: StateVector, tol: float = 1e-10) -> bool:
        return abs(1 - self.fidelity(other)) < tol

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def subsystem(self, qubits: list[int], fixed: dict[int, int] | None = None) -> StateVector:
        """Restrict to ``qubits`` (new order) given the other qubits are in a known basis state.

        ``fixed`` gives the basis value of every dropped qubit; the result is
        renormalised.  Raises if the projected state vanishes.
        """
        fixed = fixed or {}
        n = self.n_qubits
        tensor = self.amplitudes.reshape([2] * n)  # axis n-1-k is qubit k
        index = [slice(None)] * n
        for q, v in fixed.items():
            index[n - 1 - q] = v
        kept_axes_desc = [q for q in reversed(range(n)) if q not in fixed]
        sub = tensor[tuple(index)]
        if sorted(kept_axes_desc) != sorted(qubits):
            raise ValueError("fixed + kept qubits must cover the register")
        # reorder so new qubit j = qubits[j] sits on axis len-1-j
        order = [kept_axes_desc.index(q) for q in reversed(qubits)]
        sub = np.transpose(sub, order).reshape(-1)
        nrm = np.linalg.norm(sub)
        if nrm < 1e-12:
            raise ValueError("projected state vanishes")
        return StateVector(len(qubits), sub / nrm)


def apply_matrix(amps: np.ndarray, n: int, matrix: np.ndarray, qubit: int) -> np.ndarray:
    t = amps.reshape([2] * n)
    axis = n - 1 - qubit
    t = np.moveaxis(np.tensordot(matrix, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def _apply_cnot(amps: np.ndarray, n: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(2**n)
    src = np.where((idx >> c) & 1, idx ^ (1 << t), idx)
    return amps[src]


def _apply_swap(amps: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(2**n)
    diff = ((idx >> a) ^ (idx >> b)) & 1
    src = np.where(diff == 1, idx ^ ((1 << a) | (1 << b)), idx)
    return amps[src]


def apply_gate(amps: np.ndarray, n: int, g: Gate) -> np.ndarray:
    if g.kind in MATRICES:
        return apply_matrix(amps, n, MATRICES[g.kind], g.qubits[0])
    if g.kind == GateKind.CNOT:
        return _apply_cnot(amps, n, *g.qubits)
    if g.kind == GateKind.SWAP:
        return _apply_swap(amps, n, *g.qubits)
    if g.kind == GateKind.BARRIER:
        return amps
    raise ValueError(f"{g.kind.value} is not unitary")


def _check_width(c: Circuit, initial: StateVector | None) -> StateVector:
    if c.n_qubits > MAX_QUBITS:
        raise ValueError(f"dense simulation limited to {MAX_QUBITS} qubits")
    if initial is None:
        return StateVector.zero(c.n_qubits)
    if initial.n_qubits != c.n_qubits:
        raise ValueError(f"circuit has {c.n_qubits} qubits, state has {initial.n_qubits}")
    return initial


def statevec_run(c: Circuit, initial: StateVector | None = None) -> StateVector:
    """Apply a measurement-free circuit.  Resets on qubits already in |0> are no-ops."""
    state = _check_width(c, initial)
    amps = state.amplitudes.copy()
    n = c.n_qubits
    for g in c.gates:
        if g.kind == GateKind.MEASURE_Z:
            raise ValueError("circuit contains measurements; use run_ensemble")
        if g.kind == GateKind.PREP_0:
            p1 = float(np.sum(np.abs(amps[(np.arange(2**n) >> g.qubits[0]) & 1 == 1]) ** 2))
            if p1 > _PRUNE:
                raise ValueError("reset of a qubit not in |0>; use run_ensemble")
            continue
        amps = apply_gate(amps, n, g)
    return StateVector(n, amps)


@dataclass(frozen=True)
class Branch:
    probability: float
    state: StateVector
    bits: str  # one character per classical bit, in bit order


def _project(amps: np.ndarray, n: int, q: int, value: int) -> tuple[float, np.ndarray]:
    mask = ((np.arange(2**n) >> q) & 1) == value
    out = np.where(mask, amps, 0)
    p = float(np.sum(np.abs(out) ** 2))
    return p, out


def run_ensemble(c: Circuit, initial: StateVector | None = None) -> list[Branch]:
    """Every measurement branch with nonzero probability."""
    state = _check_width(c, initial)
    n = c.n_qubits
    m = c.n_cbits
    branches: list[tuple[float, np.ndarray, list[str]]] = [(1.0, state.amplitudes.copy(), ["?"] * m)]
    for g in c.gates:
        if g.kind in (GateKind.MEASURE_Z, GateKind.PREP_0):
            q = g.qubits[0]
            nxt = []
            for prob, amps, bits in branches:
                for v in (0, 1):
                    p, proj = _project(amps, n, q, v)
                    if p < _PRUNE:
                        continue
                    proj = proj / np.sqrt(p)
                    new_bits = bits
                    if g.kind == GateKind.MEASURE_Z:
                        new_bits = bits.copy()
                        new_bits[g.cbit] = str(v)
                    elif v == 1:
                        proj = _flip(proj, n, q)
                    nxt.append((prob * p, proj, new_bits))
            branches = nxt
        else:
            branches = [(p, apply_gate(a, n, g), b) for p, a, b in branches]
    return [Branch(p, StateVector(n, a), "".join(b)) for p, a, b in branches]


def _flip(amps: np.ndarray, n: int, q: int) -> np.ndarray:
    return amps[np.arange(2**n) ^ (1 << q)]


def unitary(c: Circuit) -> np.ndarray:
    """Full unitary of a measurement-free circuit (columns are images of basis states)."""
    n = c.n_qubits
    cols = []
    for k in range(2**n):
        e = np.zeros(2**n, dtype=complex)
        e[k] = 1
        for g in c.gates:
            if g.kind != GateKind.PREP_0:
                e = apply_gate(e, n, g)
        cols.append(e)
    return np.array(cols).T


def expectation(state: StateVector, pauli) -> complex:
    """<psi|P|psi> for a :class:`~detect422.pauli.PauliString`."""
    return state.overlap(apply_pauli(state, pauli))


def apply_pauli(state: StateVector, pauli) -> StateVector:
    n = state.n_qubits
    amps = state.amplitudes
    for k, ch in enumerate(pauli.label()):
        if ch != "I":
            amps = apply_matrix(amps, n, MATRICES[GateKind(ch)], k)
    return StateVector(n, amps * (1j ** pauli.hermitian_phase()))
