"""Stabilizer tableau backend (Aaronson-Gottesman layout).

Rows ``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers; each row is
``(x[0..n-1], z[0..n-1], r)`` with sign ``(-1)**r``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit, Gate, GateKind
from ..pauli import PauliString


class NonCliffordError(ValueError):
    def __init__(self, gate: Gate):
        super().__init__(f"non-Clifford gate {gate.kind.value} at location {gate.location_id}")
        self.gate = gate


def _g(x1, z1, x2, z2) -> np.ndarray:
    """Exponent of i picked up when multiplying single-qubit Paulis (vectorised)."""
    x1, z1, x2, z2 = (np.asarray(v, dtype=np.int64) for v in (x1, z1, x2, z2))
    out = np.zeros_like(x1)
    y = (x1 == 1) & (z1 == 1)
    xo = (x1 == 1) & (z1 == 0)
    zo = (x1 == 0) & (z1 == 1)
    out = np.where(y, z2 - x2, out)
    out = np.where(xo, z2 * (2 * x2 - 1), out)
    out = np.where(zo, x2 * (1 - 2 * z2), out)
    return out


class StabilizerTableau:
    def __init__(self, n_qubits: int):
        self.n = n_qubits
        self.x = np.zeros((2 * n_qubits, n_qubits), dtype=np.uint8)
        self.z = np.zeros((2 * n_qubits, n_qubits), dtype=np.uint8)
        self.r = np.zeros(2 * n_qubits, dtype=np.uint8)
        for i in range(n_qubits):
            self.x[i, i] = 1
            self.z[n_qubits + i, i] = 1

    def copy(self) -> StabilizerTableau:
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n, t.x, t.z, t.r = self.n, self.x.copy(), self.z.copy(), self.r.copy()
        return t

    # -- gates ---------------------------------------------------------------------

    def h(self, a: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, a]
        self.x[:, a], self.z[:, a] = self.z[:, a].copy(), self.x[:, a].copy()

    def s(self, a: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, a]
        self.z[:, a] ^= self.x[:, a]

    def pauli_z(self, a: int) -> None:
        self.r ^= self.x[:, a]

    def pauli_x(self, a: int) -> None:
        self.r ^= self.z[:, a]

    def cnot(self, c: int, t: int) -> None:
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def apply(self, g: Gate) -> None:
        k, q = g.kind, g.qubits
        if k == GateKind.H:
            self.h(q[0])
        elif k == GateKind.S:
            self.s(q[0])
        elif k == GateKind.SDG:
            self.s(q[0])
            self.pauli_z(q[0])
        elif k == GateKind.X:
            self.pauli_x(q[0])
        elif k == GateKind.Z:
            self.pauli_z(q[0])
        elif k == GateKind.Y:
            self.pauli_x(q[0])
            self.pauli_z(q[0])
        elif k == GateKind.CNOT:
            self.cnot(*q)
        elif k == GateKind.SWAP:
            a, b = q
            self.cnot(a, b)
            self.cnot(b, a)
            self.cnot(a, b)
        elif k == GateKind.BARRIER:
            pass
        else:
            raise NonCliffordError(g)

    # -- measurement ---------------------------------------------------------------

    def _rowmult(self, h: int, i: int) -> None:
        """Row h <- row i * row h, with the sign bookkeeping of rowsum."""
        total = 2 * int(self.r[h]) + 2 * int(self.r[i]) + int(
            np.sum(_g(self.x[i], self.z[i], self.x[h], self.z[h]))
        )
        self.r[h] = (total % 4) // 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def random_pivot(self, a: int) -> int | None:
        hits = np.nonzero(self.x[self.n :, a])[0]
        return None if hits.size == 0 else int(hits[0]) + self.n

    def measure(self, a: int, outcome: int | None = None) -> tuple[int, bool]:
        """Z-measure qubit ``a``; returns ``(outcome, deterministic)``.

        For a random measurement ``outcome`` chooses the branch (default 0).
        """
        n = self.n
        p = self.random_pivot(a)
        if p is not None:
            for i in range(2 * n):
                if i != p and self.x[i, a]:
                    self._rowmult(i, p)
            self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p].copy(), self.z[p].copy(), self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, a] = 1
            value = 0 if outcome is None else int(outcome)
            self.r[p] = value
            return value, False
        # deterministic: accumulate stabilizers selected by destabilizers anticommuting with Z_a
        sx = np.zeros(n, dtype=np.uint8)
        sz = np.zeros(n, dtype=np.uint8)
        sr = 0
        for i in range(n):
            if self.x[i, a]:
                j = i + n
                total = 2 * sr + 2 * int(self.r[j]) + int(np.sum(_g(self.x[j], self.z[j], sx, sz)))
                sr = (total % 4) // 2
                sx ^= self.x[j]
                sz ^= self.z[j]
        return sr, True

    def reset(self, a: int) -> None:
        value, _ = self.measure(a)
        if value:
            self.pauli_x(a)

    # -- inspection ----------------------------------------------------------------

    def row_pauli(self, i: int) -> PauliString:
        xb = int(sum(int(b) << k for k, b in enumerate(self.x[i])))
        zb = int(sum(int(b) << k for k, b in enumerate(self.z[i])))
        # rows store Hermitian operators: need i**(#Y) to account for Y = iXZ
        ny = int(np.sum(self.x[i] & self.z[i]))
        return PauliString(self.n, xb, zb, 2 * int(self.r[i]) + ny)

    def stabilizers(self) -> list[PauliString]:
        return [self.row_pauli(i) for i in range(self.n, 2 * self.n)]

    def destabilizers(self) -> list[PauliString]:
        return [self.row_pauli(i) for i in range(self.n)]

    def is_symplectic(self) -> bool:
        """Check the commutation structure of the 2n rows."""
        n = self.n
        m = np.concatenate([self.x, self.z], axis=1).astype(np.int64)
        omega = np.block([[np.zeros((n, n), int), np.eye(n, dtype=int)], [np.eye(n, dtype=int), np.zeros((n, n), int)]])
        # destabilizer i anticommutes with stabilizer i only, which is omega itself
        return bool(np.array_equal((m @ omega @ m.T) % 2, omega))


@dataclass(frozen=True)
class MeasurementRecord:
    cbit: int
    qubit: int
    outcome: int
    deterministic: bool


@dataclass
class TableauRun:
    tableau: StabilizerTableau
    record: list[MeasurementRecord]

    @property
    def bits(self) -> str:
        return "".join(str(m.outcome) for m in sorted(self.record, key=lambda m: m.cbit))


def tableau_run(c: Circuit, choices: dict[int, int] | None = None, check: bool = False) -> TableauRun:
    """Run a Clifford circuit; random measurement outcomes come from ``choices[cbit]`` (default 0)."""
    choices = choices or {}
    t = StabilizerTableau(c.n_qubits)
    record = []
    for g in c.gates:
        if g.kind == GateKind.MEASURE_Z:
            out, det = t.measure(g.qubits[0], choices.get(g.cbit))
            record.append(MeasurementRecord(g.cbit, g.qubits[0], out, det))
        elif g.kind == GateKind.PREP_0:
            t.reset(g.qubits[0])
        else:
            t.apply(g)
        if check and not t.is_symplectic():
            raise AssertionError(f"tableau lost symplectic form after {g}")
    return TableauRun(t, record)


def tableau_branches(c: Circuit) -> list[tuple[float, TableauRun]]:
    """Enumerate all measurement branches exactly.

    Each random measurement splits into two equiprobable branches.
    """
    for g in c.gates:
        if g.kind in (GateKind.T, GateKind.TDG):
            raise NonCliffordError(g)
    pending: list[tuple[float, StabilizerTableau, list[MeasurementRecord], int]] = [
        (1.0, StabilizerTableau(c.n_qubits), [], 0)
    ]
    done = []
    gates = c.gates
    while pending:
        prob, t, rec, pos = pending.pop()
        while pos < len(gates):
            g = gates[pos]
            pos += 1
            if g.kind == GateKind.MEASURE_Z:
                q = g.qubits[0]
                if t.random_pivot(q) is not None:
                    other = t.copy()
                    other.measure(q, 1)
                    pending.append((prob / 2, other, rec + [MeasurementRecord(g.cbit, q, 1, False)], pos))
                    t.measure(q, 0)
                    rec = rec + [MeasurementRecord(g.cbit, q, 0, False)]
                    prob /= 2
                else:
                    out, _ = t.measure(q)
                    rec = rec + [MeasurementRecord(g.cbit, q, out, True)]
            elif g.kind == GateKind.PREP_0:
                t.reset(g.qubits[0])
            else:
                t.apply(g)
        done.append((prob, TableauRun(t, rec)))
    return done
