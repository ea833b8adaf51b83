"""Pauli-frame propagation through Clifford gates.

Frames are ``(x, z)`` integer bitmasks over the register; signs are dropped
since a Pauli error only matters up to phase.
"""
from __future__ import annotations

from .circuit import Gate, GateKind


def _bit(v: int, q: int) -> int:
    return (v >> q) & 1


def _set(v: int, q: int, b: int) -> int:
    return (v & ~(1 << q)) | (b << q)


def conjugate(x: int, z: int, g: Gate) -> tuple[int, int]:
    """Frame after pushing it forward through gate ``g``."""
    k = g.kind
    if k == GateKind.H:
        q = g.qubits[0]
        xb, zb = _bit(x, q), _bit(z, q)
        return _set(x, q, zb), _set(z, q, xb)
    if k in (GateKind.S, GateKind.SDG):
        q = g.qubits[0]
        return x, z ^ (_bit(x, q) << q)
    if k == GateKind.CNOT:
        c, t = g.qubits
        return x ^ (_bit(x, c) << t), z ^ (_bit(z, t) << c)
    if k == GateKind.SWAP:
        a, b = g.qubits
        xa, xb, za, zb = _bit(x, a), _bit(x, b), _bit(z, a), _bit(z, b)
        return _set(_set(x, a, xb), b, xa), _set(_set(z, a, zb), b, za)
    if k == GateKind.PREP_0:
        q = g.qubits[0]
        return x & ~(1 << q), z & ~(1 << q)
    if k in (GateKind.X, GateKind.Y, GateKind.Z, GateKind.BARRIER, GateKind.MEASURE_Z):
        return x, z
    raise ValueError(f"cannot propagate a Pauli frame through {k.value}")


def propagate(x: int, z: int, gates, flips: int = 0) -> tuple[int, int, int]:
    """Push a frame through ``gates``; returns final ``(x, z, flipped_cbits_mask)``.

    A measurement on a qubit carrying an X component flips its classical bit.
    """
    for g in gates:
        if g.kind == GateKind.MEASURE_Z:
            q = g.qubits[0]
            if _bit(x, q):
                flips ^= 1 << g.cbit
            # the qubit's worldline ends here
            x, z = x & ~(1 << q), z & ~(1 << q)
            continue
        x, z = conjugate(x, z, g)
    return x, z, flips
