"""Gates, circuits, chip layouts and the gate decompositions used on the chips."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence


class GateKind(str, Enum):
    H = "H"
    S = "S"
    SDG = "Sdg"
    X = "X"
    Y = "Y"
    Z = "Z"
    T = "T"
    TDG = "Tdg"
    CNOT = "CNOT"
    SWAP = "SWAP"
    MEASURE_Z = "MEASURE_Z"
    PREP_0 = "PREP_0"
    BARRIER = "BARRIER"


SINGLE_QUBIT_UNITARIES = frozenset(
    {GateKind.H, GateKind.S, GateKind.SDG, GateKind.X, GateKind.Y, GateKind.Z, GateKind.T, GateKind.TDG}
)
TWO_QUBIT = frozenset({GateKind.CNOT, GateKind.SWAP})
CLIFFORD = frozenset(SINGLE_QUBIT_UNITARIES - {GateKind.T, GateKind.TDG}) | TWO_QUBIT
# instructions that are not cost-counted "gates"
NON_GATES = frozenset({GateKind.MEASURE_Z, GateKind.PREP_0, GateKind.BARRIER})


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    location_id: int = 0
    cbit: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind in TWO_QUBIT:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.kind.value} needs two distinct operands, got {self.qubits}")
        elif self.kind == GateKind.BARRIER:
            if not self.qubits:
                raise ValueError("barrier needs at least one operand")
        elif len(self.qubits) != 1:
            raise ValueError(f"{self.kind.value} takes exactly one operand, got {self.qubits}")
        if self.kind == GateKind.MEASURE_Z and self.cbit is None:
            raise ValueError("measurement needs a classical bit")

    @property
    def is_unitary(self) -> bool:
        return self.kind not in NON_GATES

    def __str__(self) -> str:
        ops = ",".join(str(q) for q in self.qubits)
        return f"{self.kind.value}({ops})"


@dataclass(frozen=True)
class PostSelect:
    """Reject a shot when a flag qubit reads 1 or the parity qubits read odd."""

    flag_qubits: tuple[int, ...] = ()
    parity_qubits: tuple[int, ...] = ()


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    postselect: PostSelect | None = None
    # each logical output bit is the XOR of the listed qubits' measurement outcomes
    readout: tuple[tuple[int, ...], ...] | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        last = -1
        measured: set[int] = set()
        cbits: set[int] = set()
        for g in self.gates:
            if g.location_id <= last:
                raise ValueError("location ids must be unique and ascending")
            last = g.location_id
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"operand {q} out of range for {self.n_qubits} qubits")
                if q in measured and g.kind != GateKind.BARRIER:
                    raise ValueError(f"qubit {q} used after its measurement")
            if g.kind == GateKind.MEASURE_Z:
                measured.add(g.qubits[0])
                if g.cbit in cbits:
                    raise ValueError(f"classical bit {g.cbit} written twice")
                cbits.add(g.cbit)
        if cbits and cbits != set(range(len(cbits))):
            raise ValueError("classical bits must be numbered 0..m-1")
        if self.postselect is not None:
            for q in self.postselect.flag_qubits + self.postselect.parity_qubits:
                if q not in measured:
                    raise ValueError(f"post-selection refers to unmeasured qubit {q}")
        if self.readout is not None:
            object.__setattr__(self, "readout", tuple(tuple(b) for b in self.readout))
            for bit in self.readout:
                for q in bit:
                    if q not in measured:
                        raise ValueError(f"readout refers to unmeasured qubit {q}")

    @classmethod
    def from_ops(
        cls,
        n_qubits: int,
        ops: Iterable[Sequence],
        postselect: PostSelect | None = None,
        readout=None,
        name: str = "",
    ) -> Circuit:
        """Build from ``("H", 2)``, ``("CNOT", 2, 0)``, ``("MEASURE_Z", 0)`` tuples.

        Location ids are assigned in order; measurement bits are assigned in
        measurement order.
        """
        gates = []
        n_meas = 0
        for i, op in enumerate(ops):
            kind = GateKind(op[0])
            cbit = None
            if kind == GateKind.MEASURE_Z:
                cbit, n_meas = n_meas, n_meas + 1
            gates.append(Gate(kind, tuple(op[1:]), i, cbit))
        return cls(n_qubits, tuple(gates), postselect, readout, name)

    def renumbered(self, gates: Iterable[Gate], **changes) -> Circuit:
        """Copy with ``gates`` re-assigned consecutive location ids."""
        new = tuple(replace(g, location_id=i) for i, g in enumerate(gates))
        return replace(self, gates=new, **changes)

    def gate_at(self, location_id: int) -> Gate:
        for g in self.gates:
            if g.location_id == location_id:
                return g
        raise KeyError(location_id)

    @property
    def measurements(self) -> list[Gate]:
        return sorted((g for g in self.gates if g.kind == GateKind.MEASURE_Z), key=lambda g: g.cbit)

    @property
    def measured_qubits(self) -> list[int]:
        """Measured qubit for each classical bit, in bit order."""
        return [g.qubits[0] for g in self.measurements]

    @property
    def n_cbits(self) -> int:
        return len(self.measurements)

    def count(self, *kinds: GateKind | str) -> int:
        wanted = {GateKind(k) for k in kinds}
        return sum(g.kind in wanted for g in self.gates)

    def is_clifford(self) -> bool:
        return all(g.kind in CLIFFORD or g.kind in NON_GATES for g in self.gates)

    # -- classical post-processing -------------------------------------------------

    def _cbit_of(self) -> dict[int, int]:
        return {g.qubits[0]: g.cbit for g in self.measurements}

    def accepts(self, bits: str) -> bool:
        if self.postselect is None:
            return True
        where = self._cbit_of()
        if any(bits[where[q]] == "1" for q in self.postselect.flag_qubits):
            return False
        return sum(bits[where[q]] == "1" for q in self.postselect.parity_qubits) % 2 == 0

    def logical(self, bits: str) -> str:
        """Apply the readout map to an accepted raw bitstring."""
        where = self._cbit_of()
        readout = self.readout
        if readout is None:
            readout = tuple((q,) for q in self.measured_qubits)
        return "".join(str(sum(bits[where[q]] == "1" for q in bit) % 2) for bit in readout)

    def __add__(self, other: Circuit) -> Circuit:
        """Concatenate gate lists; metadata of ``other`` wins when set."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        shift = self.n_cbits
        tail = [replace(g, cbit=g.cbit + shift) if g.cbit is not None else g for g in other.gates]
        return self.renumbered(
            list(self.gates) + tail,
            postselect=other.postselect or self.postselect,
            readout=other.readout or self.readout,
        )


@dataclass(frozen=True)
class QubitLayout:
    name: str
    n_qubits: int
    cnot_edges: frozenset[tuple[int, int]]
    qubit_labels: tuple[tuple[int, str], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "cnot_edges", frozenset(tuple(e) for e in self.cnot_edges))
        for c, t in self.cnot_edges:
            if c == t:
                raise ValueError(f"self-loop on qubit {c}")
            if not (0 <= c < self.n_qubits and 0 <= t < self.n_qubits):
                raise ValueError(f"edge {c}->{t} out of range")

    @property
    def labels(self) -> dict[int, str]:
        return dict(self.qubit_labels)

    def physical(self, label: str) -> int:
        for q, lab in self.qubit_labels:
            if lab == label:
                return q
        raise KeyError(label)

    def connected_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.cnot_edges)


_FIG1_LABELS = ((0, "A"), (1, "1"), (2, "4"), (3, "2"), (4, "3"))

RAVEN = QubitLayout("raven", 5, frozenset({(2, 0), (2, 1), (3, 2), (2, 4), (3, 4), (1, 0)}), _FIG1_LABELS)
SPARROW = QubitLayout("sparrow", 5, frozenset({(0, 2), (1, 2), (3, 2), (4, 2), (3, 4), (0, 1)}), _FIG1_LABELS)
LAYOUTS = {"raven": RAVEN, "sparrow": SPARROW}


@dataclass(frozen=True)
class Violation:
    location_id: int
    gate: Gate
    message: str


def validate_circuit(c: Circuit, layout: QubitLayout) -> list[Violation]:
    """Every gate that the layout cannot execute natively; empty means legal.

    A SWAP is legal when either orientation of the pair is a CNOT edge, since
    it expands into three CNOTs along that edge.
    """
    report = []
    for g in c.gates:
        if any(q >= layout.n_qubits for q in g.qubits):
            report.append(Violation(g.location_id, g, f"operand outside {layout.name}"))
            continue
        if g.kind == GateKind.CNOT and g.qubits not in layout.cnot_edges:
            report.append(Violation(g.location_id, g, f"no CNOT edge {g.qubits[0]}->{g.qubits[1]} on {layout.name}"))
        elif g.kind == GateKind.SWAP:
            a, b = g.qubits
            if (a, b) not in layout.cnot_edges and (b, a) not in layout.cnot_edges:
                report.append(Violation(g.location_id, g, f"qubits {a},{b} not connected on {layout.name}"))
    return report


def decompose_swap(a: int, b: int) -> list[Gate]:
    """Three CNOTs along ``a -> b``, the middle one reversed by Hadamards."""
    if a == b:
        raise ValueError("SWAP needs two distinct qubits")
    seq = [
        (GateKind.CNOT, (a, b)),
        (GateKind.H, (a,)),
        (GateKind.H, (b,)),
        (GateKind.CNOT, (a, b)),
        (GateKind.H, (a,)),
        (GateKind.H, (b,)),
        (GateKind.CNOT, (a, b)),
    ]
    return [Gate(k, q, i) for i, (k, q) in enumerate(seq)]


def decompose_cz(ctrl: int, tgt: int) -> list[Gate]:
    if ctrl == tgt:
        raise ValueError("CZ needs two distinct qubits")
    seq = [(GateKind.H, (tgt,)), (GateKind.CNOT, (ctrl, tgt)), (GateKind.H, (tgt,))]
    return [Gate(k, q, i) for i, (k, q) in enumerate(seq)]


def swap_leg(layout: QubitLayout, a: int, b: int) -> tuple[int, int]:
    """Orientation of the CNOT edge a SWAP between ``a`` and ``b`` should use."""
    if (a, b) in layout.cnot_edges:
        return a, b
    if (b, a) in layout.cnot_edges:
        return b, a
    raise ValueError(f"qubits {a},{b} not connected on {layout.name}")


def expand_swaps(c: Circuit, layout: QubitLayout | None = None) -> Circuit:
    """Replace every SWAP with its 3-CNOT realisation (oriented along ``layout`` if given)."""
    out: list[Gate] = []
    for g in c.gates:
        if g.kind != GateKind.SWAP:
            out.append(g)
            continue
        a, b = g.qubits if layout is None else swap_leg(layout, *g.qubits)
        out.extend(decompose_swap(a, b))
    return c.renumbered(out)


# fixed per-program overhead of the native instruction count
QASM_HEADER_OVERHEAD = 3


def instruction_count(c: Circuit) -> int:
    """Cost of a bare circuit as counted in QASM instructions.

    Native gates plus measurements plus a fixed header overhead.  SWAPs are
    free: on a bare pair they are done by relabelling the qubits.
    """
    n_gates = 0
    for g in c.gates:
        if g.kind == GateKind.SWAP:
            warnings.warn("physical SWAP in a bare circuit counted as a software relabelling", stacklevel=2)
        elif g.kind not in NON_GATES:
            n_gates += 1
    return n_gates + c.count(GateKind.MEASURE_Z) + QASM_HEADER_OVERHEAD
