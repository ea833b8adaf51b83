"""Pauli operators on a fixed number of qubits.

A :class:`PauliString` stores the operator ``i**phase * prod_k X_k**x_k Z_k**z_k``
with qubit ``k`` held in bit ``k`` of the two masks.  With this convention a
``Y`` on one qubit is ``x=z=1`` with phase 1 (since ``Y = iXZ``).
"""
from __future__ import annotations

from dataclasses import dataclass

_PHASE_NAMES = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    x_bits: int = 0
    z_bits: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        full = (1 << self.n_qubits) - 1
        if self.x_bits & ~full or self.z_bits & ~full:
            raise ValueError("bitmask wider than n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse ``"XIZY"``, optionally prefixed with ``+``, ``-``, ``i``, ``-i``.

        Character ``k`` acts on qubit ``k``.  The resulting operator is the
        Hermitian tensor product times the prefix, so ``from_label("Y")`` is Y.
        """
        phase = 0
        body = label
        for prefix, ph in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if body.startswith(prefix):
                phase, body = ph, body[len(prefix):]
                break
        x = z = 0
        for k, ch in enumerate(body):
            if ch == "X":
                x |= 1 << k
            elif ch == "Z":
                z |= 1 << k
            elif ch == "Y":
                x |= 1 << k
                z |= 1 << k
                phase += 1
            elif ch not in "I_":
                raise ValueError(f"bad Pauli character {ch!r} in {label!r}")
        return cls(len(body), x, z, phase)

    @classmethod
    def on(cls, n_qubits: int, paulis: dict[int, str]) -> PauliString:
        """Build from a sparse ``{qubit: "X"|"Y"|"Z"}`` map."""
        chars = ["I"] * n_qubits
        for q, p in paulis.items():
            chars[q] = p
        return cls.from_label("".join(chars))

    @property
    def weight(self) -> int:
        return _popcount(self.x_bits | self.z_bits)

    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def label(self) -> str:
        """Tensor-product label, without the phase."""
        out = []
        for k in range(self.n_qubits):
            xb = (self.x_bits >> k) & 1
            zb = (self.z_bits >> k) & 1
            out.append("IXZY"[xb | (zb << 1)])
        return "".join(out)

    def hermitian_phase(self) -> int:
        """Phase ``p`` such that ``self == i**p * <label()>`` with Hermitian Y's."""
        return (self.phase - _popcount(self.x_bits & self.z_bits)) % 4

    def __str__(self) -> str:
        return _PHASE_NAMES[self.hermitian_phase()] + self.label()

    def __mul__(self, other: PauliString) -> PauliString:
        return pauli_mul(self, other)

    def restrict(self, qubits: list[int]) -> PauliString:
        """Sub-operator on ``qubits`` (in the given order), phase dropped to the Hermitian form."""
        chars = self.label()
        return PauliString.from_label("".join(chars[q] for q in qubits))

    def embed(self, n_qubits: int, qubits: list[int]) -> PauliString:
        """Place this operator on ``qubits`` of a larger register."""
        chars = ["I"] * n_qubits
        for k, q in enumerate(qubits):
            chars[q] = self.label()[k]
        out = PauliString.from_label("".join(chars))
        return PauliString(n_qubits, out.x_bits, out.z_bits, out.phase + self.hermitian_phase())


def _check_width(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"width mismatch: {a.n_qubits} vs {b.n_qubits}")


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    _check_width(a, b)
    # X^a Z^b X^c Z^d = (-1)^{b.c} X^{a+c} Z^{b+d}
    sign = 2 * _popcount(a.z_bits & b.x_bits)
    return PauliString(a.n_qubits, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits, a.phase + b.phase + sign)


def symplectic_product(a: PauliString, b: PauliString) -> int:
    _check_width(a, b)
    return _popcount((a.x_bits & b.z_bits) ^ (a.z_bits & b.x_bits)) & 1


def commutes(a: PauliString, b: PauliString) -> bool:
    return symplectic_product(a, b) == 0
