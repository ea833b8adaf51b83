"""The [[4,2,2]] code on the five-qubit chips.

Circuits are written on native qubit indices ``q0..q4``.  Code qubits follow
the chip labelling: native ``q1, q3, q4, q2`` are code
qubits 1, 2, 3, 4 and ``q0`` is the verification ancilla.  Four-qubit states
and Pauli operators in this module are indexed by code qubit (index ``k`` is
code qubit ``k+1``).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .circuit import RAVEN, SPARROW, Circuit, GateKind, PostSelect, QubitLayout, expand_swaps, validate_circuit
from .pauli import PauliString
from .pauli import symplectic_product as sp
from .sim import OutcomeDistribution, StateVector

ANCILLA = 0
# native qubit of code qubit 1..4
DATA_QUBITS = (1, 3, 4, 2)
CODE_TO_NATIVE = {k + 1: q for k, q in enumerate(DATA_QUBITS)}


@dataclass(frozen=True)
class Code422Spec:
    s_x: PauliString
    s_z: PauliString
    x1: PauliString
    x2: PauliString
    z1: PauliString
    z2: PauliString

    @property
    def stabilizers(self) -> tuple[PauliString, PauliString]:
        return self.s_x, self.s_z

    @property
    def logicals(self) -> dict[str, PauliString]:
        return {"X1": self.x1, "X2": self.x2, "Z1": self.z1, "Z2": self.z2}


CODE = Code422Spec(
    s_x=PauliString.from_label("XXXX"),
    s_z=PauliString.from_label("ZZZZ"),
    x1=PauliString.from_label("XIXI"),
    x2=PauliString.from_label("XXII"),
    z1=PauliString.from_label("ZZII"),
    z2=PauliString.from_label("ZIZI"),
)

_CODEWORD_TERMS = {
    (0, 0): ("0000", "1111"),
    (0, 1): ("1100", "0011"),
    (1, 0): ("1010", "0101"),
    (1, 1): ("1001", "0110"),
}


def logical_codeword(b1: int, b2: int) -> StateVector:
    a, b = _CODEWORD_TERMS[(int(b1), int(b2))]
    return StateVector.from_terms(4, {a: 1, b: 1})


def logical_state(amplitudes: dict[str, complex]) -> StateVector:
    """Encode a two-qubit state given as ``{"b1b2": amp}`` into the code space."""
    amps = sum(a * logical_codeword(int(k[0]), int(k[1])).amplitudes for k, a in amplitudes.items())
    return StateVector(4, amps / abs(sum(abs(a) ** 2 for a in amplitudes.values())) ** 0.5)


def codespace_weight(state: StateVector) -> float:
    """Squared norm of the projection of a 4-qubit state onto the code space."""
    return sum(abs(logical_codeword(*k).overlap(state)) ** 2 for k in _CODEWORD_TERMS)


def decode_outcome(raw: str) -> str | None:
    """Logical bits from the four data outcomes in code-qubit order; ``None`` on odd parity."""
    if len(raw) != 4 or set(raw) - {"0", "1"}:
        raise ValueError(f"expected a 4-bit string, got {raw!r}")
    bits = [int(ch) for ch in raw]
    if sum(bits) % 2:
        return None
    return f"{bits[0] ^ bits[1]}{bits[0] ^ bits[2]}"


def logical_class(pauli: PauliString) -> str:
    """Two-letter logical label of a 4-qubit Pauli that commutes with both stabilizers.

    The label is taken modulo the stabilizer group; e.g. ``ZIIZ`` and ``IZZI``
    both give ``"ZZ"`` (logical Z1 Z2).
    """
    if not all(sp(pauli, s) == 0 for s in CODE.stabilizers):
        raise ValueError(f"{pauli} is not a logical operator")
    bx1, bz1 = sp(pauli, CODE.z1), sp(pauli, CODE.x1)
    bx2, bz2 = sp(pauli, CODE.z2), sp(pauli, CODE.x2)
    return "IXZY"[bx1 | (bz1 << 1)] + "IXZY"[bx2 | (bz2 << 1)]


def logical_representative(label: str) -> PauliString:
    """Physical 4-qubit Pauli for a two-letter logical label such as ``"XZ"``."""
    out = PauliString.identity(4)
    for ch, x, z in zip(label, (CODE.x1, CODE.x2), (CODE.z1, CODE.z2)):
        if ch in "XY":
            out = out * x
        if ch in "ZY":
            out = out * z
    return PauliString(4, out.x_bits, out.z_bits, 0)


class PrepVariant(str, Enum):
    FTv1 = "FTv1"
    FTv2 = "FTv2"
    NFT = "NFT"
    ZeroPlus = "ZeroPlus"
    LogicalBell = "LogicalBell"
    Sparrow00 = "Sparrow00"
    SparrowZeroPlus = "SparrowZeroPlus"
    SparrowBell = "SparrowBell"


_R = "PREP_0"
_PREP_OPS: dict[PrepVariant, list[tuple]] = {
    PrepVariant.FTv1: [
        *[(_R, q) for q in range(5)],
        ("H", 2), ("CNOT", 2, 0), ("CNOT", 2, 1),
        ("H", 2), ("H", 3), ("CNOT", 3, 2), ("H", 2), ("H", 3),
        ("CNOT", 2, 4), ("CNOT", 2, 0), ("MEASURE_Z", 0),
    ],
    PrepVariant.FTv2: [
        *[(_R, q) for q in range(5)],
        ("H", 3), ("CNOT", 3, 2), ("H", 2), ("H", 3),
        ("CNOT", 2, 1), ("CNOT", 3, 4), ("SWAP", 2, 4),
        ("CNOT", 2, 0), ("CNOT", 1, 0), ("MEASURE_Z", 0),
    ],
    PrepVariant.NFT: [
        *[(_R, q) for q in range(1, 5)],
        ("H", 3), ("CNOT", 3, 4), ("CNOT", 3, 2), ("CNOT", 2, 1),
    ],
    PrepVariant.ZeroPlus: [
        *[(_R, q) for q in range(1, 5)],
        ("H", 1), ("H", 3), ("CNOT", 3, 2), ("SWAP", 1, 2), ("CNOT", 2, 4),
    ],
    PrepVariant.LogicalBell: [
        *[(_R, q) for q in range(1, 5)],
        ("H", 2), ("H", 3), ("CNOT", 2, 1), ("CNOT", 3, 4),
    ],
    PrepVariant.Sparrow00: [
        *[(_R, q) for q in range(5)],
        ("H", 3), ("CNOT", 3, 4), ("CNOT", 4, 2), ("SWAP", 1, 2), ("CNOT", 3, 2),
        ("H", 0), ("H", 1), ("H", 2), ("CNOT", 0, 2), ("CNOT", 0, 1),
        ("H", 0), ("H", 1), ("H", 2), ("MEASURE_Z", 0),
    ],
    PrepVariant.SparrowZeroPlus: [
        *[(_R, q) for q in range(1, 5)],
        ("H", 3), ("H", 4), ("CNOT", 3, 2), ("SWAP", 1, 2), ("CNOT", 4, 2),
    ],
    PrepVariant.SparrowBell: [
        *[(_R, q) for q in range(1, 5)],
        ("H", 1), ("H", 3), ("CNOT", 1, 2), ("CNOT", 3, 4),
    ],
}

PREP_LAYOUT = {
    PrepVariant.FTv1: "raven",
    PrepVariant.FTv2: "raven",
    PrepVariant.NFT: "raven",
    PrepVariant.ZeroPlus: "raven",
    PrepVariant.LogicalBell: "raven",
    PrepVariant.Sparrow00: "sparrow",
    PrepVariant.SparrowZeroPlus: "sparrow",
    PrepVariant.SparrowBell: "sparrow",
}

# logical initial state each preparation produces
PREP_STATE = {
    PrepVariant.FTv1: "00",
    PrepVariant.FTv2: "00",
    PrepVariant.NFT: "00",
    PrepVariant.Sparrow00: "00",
    PrepVariant.ZeroPlus: "0+",
    PrepVariant.SparrowZeroPlus: "0+",
    PrepVariant.LogicalBell: "bell",
    PrepVariant.SparrowBell: "bell",
}

INITIAL_STATES = {
    "00": {"00": 1},
    "0+": {"00": 1, "01": 1},
    "bell": {"00": 1, "11": 1},
}


def prepared_state(variant: PrepVariant | str) -> StateVector:
    """The ideal 4-qubit data state (code-qubit order) a preparation targets."""
    return logical_state(INITIAL_STATES[PREP_STATE[PrepVariant(variant)]])


def prep_circuit(variant: PrepVariant | str, layout: QubitLayout | None = None, expand: bool = True) -> Circuit:
    """Preparation circuit of a catalog variant.

    With ``expand`` (the default) SWAPs become three CNOTs oriented along the
    layout's edge; otherwise the abstract SWAP is kept as one location.
    """
    variant = PrepVariant(variant)
    home = RAVEN if PREP_LAYOUT[variant] == "raven" else SPARROW
    layout = layout or home
    if layout.name != home.name:
        raise ValueError(f"{variant.value} is laid out for {home.name}, not {layout.name}")
    ops = _PREP_OPS[variant]
    flagged = any(op[0] == "MEASURE_Z" for op in ops)
    post = PostSelect(flag_qubits=(ANCILLA,)) if flagged else None
    c = Circuit.from_ops(5, ops, postselect=post, name=variant.value)
    if expand:
        c = expand_swaps(c, layout)
    violations = validate_circuit(c, layout)
    if violations:
        raise AssertionError(f"catalog circuit {variant.value} illegal on {layout.name}: {violations}")
    return c


G_FT = ("X1", "X2", "Z1", "Z2", "HHSWAP", "CZ")
G_FT_LABELS = {"X1": "X⊗I", "X2": "I⊗X", "Z1": "Z⊗I", "Z2": "I⊗Z", "HHSWAP": "H⊗H·SWAP", "CZ": "CZ"}

# code-qubit supports of the logical Paulis
_LOGICAL_SUPPORT = {"X1": ("X", (1, 3)), "X2": ("X", (1, 2)), "Z1": ("Z", (1, 2)), "Z2": ("Z", (1, 3))}


def logical_gate(g: str) -> Circuit:
    """Transversal realisation of an element of ``G_FT`` on the native register."""
    if g in _LOGICAL_SUPPORT:
        kind, support = _LOGICAL_SUPPORT[g]
        ops = [(kind, CODE_TO_NATIVE[k]) for k in support]
    elif g == "HHSWAP":
        ops = [("H", q) for q in sorted(DATA_QUBITS)]
    elif g == "CZ":
        ops = [("S", q) for q in sorted(DATA_QUBITS)]
    else:
        raise ValueError(f"unsupported logical gate {g!r}")
    return Circuit.from_ops(5, ops, name=g)


@dataclass(frozen=True)
class EncodedTask:
    row: int
    initial: str  # key of INITIAL_STATES
    gates: tuple[str, ...]  # elements of G_FT in application order
    label: str  # operator notation as printed, rightmost applied first
    final_state: dict[str, complex]  # unnormalised amplitudes over "b1b2"
    instructions: int  # bare instruction count

    @property
    def ideal_logical_distribution(self) -> OutcomeDistribution:
        norm = sum(abs(a) ** 2 for a in self.final_state.values())
        probs = {k: abs(a) ** 2 / norm for k, a in self.final_state.items()}
        return OutcomeDistribution(("L0", "L1"), probs)

    @property
    def final_statevector(self) -> StateVector:
        return StateVector.from_terms(2, self.final_state)

    @property
    def task_id(self) -> str:
        return f"row{self.row:02d}"


def _row(row, initial, gates, label, final, count):
    return EncodedTask(row, initial, tuple(gates), label, final, count)


TABLE1: tuple[EncodedTask, ...] = (
    _row(1, "00", [], "I⊗I", {"00": 1}, 5),
    _row(2, "0+", [], "I⊗I", {"00": 1, "01": 1}, 6),
    _row(3, "00", ["X2"], "I⊗X", {"01": 1}, 6),
    _row(4, "00", ["X1"], "X⊗I", {"10": 1}, 6),
    _row(5, "bell", [], "I⊗I", {"00": 1, "11": 1}, 7),
    _row(6, "0+", ["Z2"], "I⊗Z", {"00": 1, "01": -1}, 7),
    _row(7, "00", ["HHSWAP"], "H⊗H·SWAP", {"00": 1, "01": 1, "10": 1, "11": 1}, 7),
    _row(8, "0+", ["X1"], "X⊗I", {"10": 1, "11": 1}, 7),
    _row(9, "00", ["X1", "X2"], "X⊗X", {"11": 1}, 7),
    _row(10, "bell", ["Z2"], "I⊗Z", {"00": 1, "11": -1}, 8),
    _row(11, "bell", ["X1"], "X⊗I", {"10": 1, "01": 1}, 8),
    _row(12, "00", ["HHSWAP", "Z2"], "I⊗Z·H⊗H·SWAP", {"00": 1, "01": -1, "10": 1, "11": -1}, 8),
    _row(13, "00", ["HHSWAP", "Z1"], "Z⊗I·H⊗H·SWAP", {"00": 1, "01": 1, "10": -1, "11": -1}, 8),
    _row(14, "0+", ["X1", "Z2"], "X⊗Z", {"10": 1, "11": -1}, 8),
    _row(15, "bell", ["X2", "Z2"], "I⊗ZX", {"10": 1, "01": -1}, 9),
    _row(16, "00", ["HHSWAP", "Z1", "Z2"], "Z⊗Z·H⊗H·SWAP", {"00": 1, "01": -1, "10": -1, "11": 1}, 9),
    _row(17, "00", ["HHSWAP", "CZ"], "CZ·H⊗H·SWAP", {"00": 1, "01": 1, "10": 1, "11": -1}, 10),
    _row(18, "00", ["HHSWAP", "Z2", "CZ"], "CZ·I⊗Z·H⊗H·SWAP", {"00": 1, "01": -1, "10": 1, "11": 1}, 11),
    _row(19, "00", ["HHSWAP", "Z1", "CZ"], "CZ·Z⊗I·H⊗H·SWAP", {"00": 1, "01": 1, "10": -1, "11": 1}, 11),
    _row(20, "00", ["X1", "HHSWAP", "CZ", "X2"], "I⊗X·CZ·H⊗H·SWAP·X⊗I", {"00": 1, "01": -1, "10": -1, "11": -1}, 12),
)


def task(row: int) -> EncodedTask:
    return TABLE1[row - 1]


_PREP_FOR = {
    ("raven", "0+"): PrepVariant.ZeroPlus,
    ("raven", "bell"): PrepVariant.LogicalBell,
    ("sparrow", "00"): PrepVariant.Sparrow00,
    ("sparrow", "0+"): PrepVariant.SparrowZeroPlus,
    ("sparrow", "bell"): PrepVariant.SparrowBell,
}


def prep_for(initial: str, zero_prep: PrepVariant | str = PrepVariant.FTv1, layout: str = "raven") -> PrepVariant:
    """Preparation used for an initial state; ``zero_prep`` selects the |00>_L variant on raven."""
    if initial == "00" and layout == "raven":
        return PrepVariant(zero_prep)
    return _PREP_FOR[(layout, initial)]


def measure_data() -> Circuit:
    return Circuit.from_ops(5, [("MEASURE_Z", q) for q in DATA_QUBITS])


def build_encoded_run(t: EncodedTask, prep: PrepVariant | str, expand: bool = True) -> Circuit:
    """Preparation, transversal gates and data readout with the detection rule attached."""
    prep = PrepVariant(prep)
    if PREP_STATE[prep] != t.initial:
        raise ValueError(f"{prep.value} prepares {PREP_STATE[prep]}, task row {t.row} starts from {t.initial}")
    c = prep_circuit(prep, expand=expand)
    for g in t.gates:
        c = c + logical_gate(g)
    c = c + measure_data()
    flags = (ANCILLA,) if c.count(GateKind.MEASURE_Z) == 5 else ()
    return replace(
        c,
        postselect=PostSelect(flag_qubits=flags, parity_qubits=DATA_QUBITS),
        readout=((CODE_TO_NATIVE[1], CODE_TO_NATIVE[2]), (CODE_TO_NATIVE[1], CODE_TO_NATIVE[3])),
        name=f"{t.task_id}-{prep.value}",
    )


def data_state(state: StateVector, ancilla_value: int | None = 0) -> StateVector:
    """4-qubit data state in code-qubit order from a native 5-qubit state."""
    fixed = {} if ancilla_value is None else {ANCILLA: ancilla_value}
    return state.subsystem(list(DATA_QUBITS), fixed)


def catalog() -> dict[str, Circuit]:
    """Every preparation plus every encoded task run, keyed by a stable id."""
    out = {v.value: prep_circuit(v) for v in PrepVariant}
    for t in TABLE1:
        preps = [PrepVariant.FTv1, PrepVariant.FTv2, PrepVariant.NFT] if t.initial == "00" else [prep_for(t.initial)]
        for p in preps:
            c = build_encoded_run(t, p)
            out[c.name] = c
    return out
