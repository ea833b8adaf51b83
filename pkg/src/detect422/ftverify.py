"""Exhaustive single-fault injection and classification of preparation circuits.

Every fault is classified twice, by independent routes:

* statevector: the faulty circuit is simulated over its full measurement
  ensemble and each accepted branch's data state is compared with the ideal;
* frame: the fault is propagated as a Pauli frame through the rest of the
  circuit and tested against the noiseless final stabilizer tableau.

A fault is ``detected`` when every shot it affects is rejected or leaves the
code space, ``benign`` when the accepted state equals the ideal, and
``logical`` when an accepted state differs from the ideal by a logical
operator.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from itertools import product

from .circuit import Circuit, Gate, GateKind
from .code422 import (
    ANCILLA,
    CODE,
    DATA_QUBITS,
    PrepVariant,
    codespace_weight,
    data_state,
    logical_class,
    logical_representative,
    prep_circuit,
    prepared_state,
)
from .frames import propagate
from .pauli import PauliString, commutes
from .sim import StateVector, run_ensemble
from .sim.statevector import apply_pauli
from .sim.tableau import tableau_run

_TOL = 1e-9
_PAULIS_1Q = ("X", "Y", "Z")


class FaultKind(str, Enum):
    GATE = "gate"
    PREP_FLIP = "prep-flip"
    MEAS_FLIP = "meas-flip"
    IDLE = "idle"


class FaultClass(str, Enum):
    DETECTED = "detected"
    BENIGN = "benign"
    LOGICAL = "logical"


@dataclass(frozen=True, order=True)
class FaultLocation:
    location_id: int
    fault_kind: FaultKind


@dataclass(frozen=True, order=True)
class Fault:
    """A Pauli ``pauli`` (one letter per entry of ``qubits``) at ``location``.

    ``placement`` is ``"after"`` or ``"before"`` the located gate.  Idle
    faults sit after the gate at ``location_id`` on an otherwise idle qubit;
    ``layer`` records the idle timestep.
    """

    location: FaultLocation
    qubits: tuple[int, ...]
    pauli: str
    placement: str = "after"
    layer: int = -1

    @property
    def label(self) -> str:
        ops = ",".join(f"{p}{q}" for p, q in zip(self.pauli, self.qubits))
        tag = f"@{self.layer}" if self.location.fault_kind == FaultKind.IDLE else ""
        return f"{self.location.location_id}:{self.location.fault_kind.value}{tag}:{ops}"


def _gate_faults(g: Gate, placement: str) -> list[Fault]:
    loc = FaultLocation(g.location_id, FaultKind.GATE)
    out = []
    for combo in product("IXYZ", repeat=len(g.qubits)):
        if set(combo) != {"I"}:
            qubits = tuple(q for q, p in zip(g.qubits, combo) if p != "I")
            out.append(Fault(loc, qubits, "".join(p for p in combo if p != "I"), placement))
    return out


def _layers(c: Circuit) -> list[int]:
    """ASAP layer index of every gate."""
    front = [0] * c.n_qubits
    layers = []
    for g in c.gates:
        t = max(front[q] for q in g.qubits)
        layers.append(t)
        for q in g.qubits:
            front[q] = t + 1
    return layers


def _idle_faults(c: Circuit) -> list[Fault]:
    """X/Y/Z on each live qubit for each layer in which it does nothing."""
    layers = _layers(c)
    busy: dict[int, list[tuple[int, Gate]]] = {q: [] for q in range(c.n_qubits)}
    for t, g in zip(layers, c.gates):
        if g.kind == GateKind.BARRIER:
            continue
        for q in g.qubits:
            busy[q].append((t, g))
    out = []
    for q, events in busy.items():
        for (t0, g0), (t1, _) in zip(events, events[1:]):
            for t in range(t0 + 1, t1):
                loc = FaultLocation(g0.location_id, FaultKind.IDLE)
                out.extend(Fault(loc, (q,), p, "after", t) for p in _PAULIS_1Q)
    return out


def enumerate_faults(c: Circuit, placement: str = "after", idle: bool = False) -> list[Fault]:
    """All single faults of ``c``, sorted by location then Pauli.

    Unitary gates get every non-identity Pauli on their support, each PREP_0
    an X flip and each measurement a bit flip.  Barriers carry no faults.
    """
    if placement not in ("after", "before"):
        raise ValueError("placement must be 'after' or 'before'")
    out: list[Fault] = []
    for g in c.gates:
        if g.kind == GateKind.BARRIER:
            continue
        if g.kind == GateKind.PREP_0:
            out.append(Fault(FaultLocation(g.location_id, FaultKind.PREP_FLIP), g.qubits, "X"))
        elif g.kind == GateKind.MEASURE_Z:
            out.append(Fault(FaultLocation(g.location_id, FaultKind.MEAS_FLIP), g.qubits, "X", "before"))
        else:
            out.extend(_gate_faults(g, placement))
    if idle:
        out.extend(_idle_faults(c))
    return sorted(out)


def _check_fault(c: Circuit, f: Fault) -> Gate:
    try:
        g = c.gate_at(f.location.location_id)
    except (KeyError, IndexError, ValueError):
        raise ValueError(f"stale fault {f.label}: no gate at location {f.location.location_id}") from None
    kind = f.location.fault_kind
    ok = {
        FaultKind.GATE: g.is_unitary and set(f.qubits) <= set(g.qubits),
        FaultKind.PREP_FLIP: g.kind == GateKind.PREP_0 and f.qubits == g.qubits,
        FaultKind.MEAS_FLIP: g.kind == GateKind.MEASURE_Z and f.qubits == g.qubits,
        FaultKind.IDLE: True,
    }[kind]
    if not ok or len(f.pauli) != len(f.qubits) or set(f.pauli) - set(_PAULIS_1Q):
        raise ValueError(f"stale fault {f.label} for gate {g}")
    return g


def inject_fault(c: Circuit, f: Fault) -> Circuit:
    """Copy of ``c`` with the fault's Pauli gates inserted; ``c`` is unchanged.

    A measurement bit flip is realised as an X just before the Z measurement,
    which flips the recorded bit and nothing else.
    """
    target = _check_fault(c, f)
    errors = [Gate(GateKind(p), (q,)) for p, q in zip(f.pauli, f.qubits)]
    out: list[Gate] = []
    for g in c.gates:
        if g is target and f.placement == "before":
            out.extend(errors)
        out.append(g)
        if g is target and f.placement == "after":
            out.extend(errors)
    return c.renumbered(out, name=f"{c.name}+{f.label}")


@dataclass(frozen=True)
class Classification:
    """``witnesses`` is the full set of logical labels that map the ideal state
    to the faulty one, i.e. one coset of the target's logical stabilizer.
    ``raw`` is the frame route's propagated error modulo S_X and S_Z."""

    fault_class: FaultClass
    witnesses: frozenset[str] = frozenset()
    raw: str | None = None


_MUL = {("I", p): p for p in "IXYZ"} | {(p, "I"): p for p in "IXYZ"} | {(p, p): "I" for p in "XYZ"}
_MUL |= {(a, b): c for a, b, c in ("XYZ", "YXZ", "YZX", "ZYX", "XZY", "ZXY")}


def logical_product(a: str, b: str) -> str:
    """Product of two logical labels, phase dropped."""
    return "".join(_MUL[(p, q)] for p, q in zip(a, b))


def canonical_witness(coset: frozenset[str]) -> str:
    """Representative of a witness coset: fewest Y factors, then fewest identities."""
    return min(coset, key=lambda w: (w.count("Y"), w.count("I"), w))


def _logical_matches(state: StateVector, ideal: StateVector) -> frozenset[str]:
    """Logical labels L with L|ideal> equal to ``state`` up to phase."""
    hits = set()
    for a, b in product("IXYZ", repeat=2):
        label = a + b
        moved = apply_pauli(ideal, logical_representative(label))
        if abs(1 - moved.fidelity(state)) < _TOL:
            hits.add(label)
    return frozenset(hits)


def classify_fault(c: Circuit, ideal: StateVector) -> Classification:
    """Statevector classification of a (faulty) preparation circuit.

    ``ideal`` is the 4-qubit target in code-qubit order.  Data qubits must be
    left unmeasured; only the flag rule of ``c`` is applied.
    """
    if set(c.measured_qubits) & set(DATA_QUBITS):
        raise ValueError("classification needs the data qubits unmeasured")
    accepted = [b for b in run_ensemble(c) if c.accepts(b.bits)]
    acceptance = sum(b.probability for b in accepted)
    if acceptance < _TOL:
        return Classification(FaultClass.DETECTED)
    any_logical = False
    all_ideal = abs(1 - acceptance) < _TOL
    witnesses: set[str] = set()
    for b in accepted:
        psi = data_state(b.state, 0)
        w = codespace_weight(psi)
        if w < _TOL:
            all_ideal = False
            continue
        if w < 1 - _TOL:
            raise AssertionError(f"branch of {c.name} is partly outside the code space")
        if abs(1 - psi.fidelity(ideal)) < _TOL:
            continue
        all_ideal = False
        matches = _logical_matches(psi, ideal)
        if not matches:
            raise AssertionError(f"accepted state of {c.name} is not a logical Pauli image of the ideal")
        any_logical = True
        witnesses |= matches
    if any_logical:
        return Classification(FaultClass.LOGICAL, frozenset(witnesses))
    return Classification(FaultClass.BENIGN if all_ideal else FaultClass.DETECTED)


def _frame_start(c: Circuit, f: Fault) -> int:
    """Index into ``c.gates`` where the fault frame starts propagating."""
    for i, g in enumerate(c.gates):
        if g.location_id == f.location.location_id:
            return i if f.placement == "before" else i + 1
    raise ValueError(f"stale fault {f.label}")


def classify_fault_frame(c: Circuit, f: Fault, final_stabilizers: list[PauliString] | None = None) -> Classification:
    """Pauli-frame classification of fault ``f`` in the noiseless circuit ``c``.

    The noiseless run must have deterministic flag outcomes (as every catalog
    preparation does).
    """
    _check_fault(c, f)
    noiseless = tableau_run(c)
    flags = c.postselect.flag_qubits if c.postselect else ()
    for m in noiseless.record:
        if m.qubit in flags and not m.deterministic:
            raise ValueError("frame classification needs deterministic flag measurements")
    if set(c.measured_qubits) & set(DATA_QUBITS):
        raise ValueError("classification needs the data qubits unmeasured")
    stabs = final_stabilizers if final_stabilizers is not None else noiseless.tableau.stabilizers()

    x = z = 0
    for p, q in zip(f.pauli, f.qubits):
        if p in "XY":
            x |= 1 << q
        if p in "ZY":
            z |= 1 << q
    start = _frame_start(c, f)
    x, z, flips = propagate(x, z, c.gates[start:])
    cbit_of = {m.qubit: m.cbit for m in noiseless.record}
    for q in flags:
        bit = cbit_of[q]
        outcome = next(m.outcome for m in noiseless.record if m.qubit == q) ^ ((flips >> bit) & 1)
        if outcome:
            return Classification(FaultClass.DETECTED)

    # data part in code-qubit order; the measured ancilla carries nothing
    native = PauliString(c.n_qubits, x & ~(1 << ANCILLA), z & ~(1 << ANCILLA), 0)
    error = native.restrict(list(DATA_QUBITS))
    if not all(commutes(error, s) for s in CODE.stabilizers):
        return Classification(FaultClass.DETECTED)
    if all(commutes(native, s) for s in stabs):
        return Classification(FaultClass.BENIGN)
    raw = logical_class(error)
    state_stabs = [lab for lab in _LABELS if all(commutes(_native_logical(lab), s) for s in stabs)]
    coset = frozenset(logical_product(raw, s) for s in state_stabs)
    return Classification(FaultClass.LOGICAL, coset, raw)


_LABELS = ["".join(p) for p in product("IXYZ", repeat=2)]


def _native_logical(label: str) -> PauliString:
    rep = logical_representative(label)
    return rep.embed(5, list(DATA_QUBITS))


@dataclass(frozen=True)
class FaultRecord:
    fault: Fault
    statevector: Classification
    frame: Classification

    @property
    def agree(self) -> bool:
        if self.statevector.fault_class != self.frame.fault_class:
            return False
        return self.frame.witnesses == self.statevector.witnesses

    @property
    def fault_class(self) -> FaultClass:
        return self.frame.fault_class

    @property
    def witness(self) -> str | None:
        """Logical error of the fault, reduced modulo the target's stabilizers."""
        return canonical_witness(self.frame.witnesses) if self.frame.witnesses else None

    def to_dict(self) -> dict:
        return {
            "location": self.fault.location.location_id,
            "kind": self.fault.location.fault_kind.value,
            "qubits": list(self.fault.qubits),
            "pauli": self.fault.pauli,
            "placement": self.fault.placement,
            "layer": self.fault.layer,
            "class": self.fault_class.value,
            "witness": self.witness,
            "raw_witness": self.frame.raw,
            "statevector_witnesses": sorted(self.statevector.witnesses),
            "backends_agree": self.agree,
        }


@dataclass(frozen=True)
class Claim:
    """Documented single-fault behaviour of a preparation."""

    description: str
    max_logical: int | None = None
    min_logical: int | None = None
    witnesses: frozenset[str] | None = None

    def holds(self, n_logical: int, witnesses: frozenset[str]) -> bool:
        if self.max_logical is not None and n_logical > self.max_logical:
            return False
        if self.min_logical is not None and n_logical < self.min_logical:
            return False
        if self.witnesses is not None and (n_logical == 0 or witnesses != self.witnesses):
            return False
        return True


_FT = Claim("fault-tolerant: no single fault is an undetected logical error", max_logical=0)
CLAIMS: dict[PrepVariant, Claim] = {
    PrepVariant.FTv1: _FT,
    PrepVariant.FTv2: _FT,
    PrepVariant.LogicalBell: _FT,
    PrepVariant.SparrowBell: _FT,
    PrepVariant.NFT: Claim("non-fault-tolerant: some single fault is an undetected logical error", min_logical=1),
    PrepVariant.ZeroPlus: Claim("only undetected logical error is Z1 Z2", witnesses=frozenset({"ZZ"})),
    PrepVariant.Sparrow00: Claim("only undetected logical error is X1 X2", witnesses=frozenset({"XX"})),
    PrepVariant.SparrowZeroPlus: Claim("only undetected logical error is X1 X2", witnesses=frozenset({"XX"})),
}


def pretty_logical(label: str) -> str:
    """``"ZZ"`` -> ``"Z1⊗Z2"``; identity factors are dropped."""
    parts = [f"{p}{k}" for k, p in enumerate(label, start=1) if p != "I"]
    return "⊗".join(parts) or "I"


@dataclass
class FaultReport:
    variant: str
    granularity: str
    placement: str
    idle: bool
    claim: Claim
    records: list[FaultRecord] = field(default_factory=list)

    def totals(self) -> dict[str, int]:
        out = {k.value: 0 for k in FaultClass}
        for r in self.records:
            out[r.fault_class.value] += 1
        out["total"] = len(self.records)
        return out

    @property
    def logical_records(self) -> list[FaultRecord]:
        return [r for r in self.records if r.fault_class == FaultClass.LOGICAL]

    @property
    def witnesses(self) -> frozenset[str]:
        return frozenset(r.witness for r in self.logical_records)

    @property
    def backends_agree(self) -> bool:
        return all(r.agree for r in self.records)

    @property
    def claim_holds(self) -> bool:
        return self.claim.holds(len(self.logical_records), self.witnesses)

    @property
    def passed(self) -> bool:
        return self.claim_holds and self.backends_agree

    def summary_line(self) -> str:
        t = self.totals()
        wit = ",".join(pretty_logical(w) for w in sorted(self.witnesses)) or "-"
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} {self.variant} [{self.granularity}, {self.placement}{', idle' if self.idle else ''}] "
            f"total={t['total']} detected={t['detected']} benign={t['benign']} logical={t['logical']} "
            f"witnesses={wit} agree={self.backends_agree}"
        )

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "granularity": self.granularity,
            "placement": self.placement,
            "idle": self.idle,
            "claim": self.claim.description,
            "claim_holds": self.claim_holds,
            "backends_agree": self.backends_agree,
            "totals": self.totals(),
            "witnesses": sorted(self.witnesses),
            "faults": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def verify_circuit(c: Circuit, ideal: StateVector, claim: Claim, placement: str = "after", idle: bool = False,
                   granularity: str = "expanded") -> FaultReport:
    report = FaultReport(c.name, granularity, placement, idle, claim)
    stabs = tableau_run(c).tableau.stabilizers()
    for f in enumerate_faults(c, placement, idle):
        sv = classify_fault(inject_fault(c, f), ideal)
        fr = classify_fault_frame(c, f, stabs)
        report.records.append(FaultRecord(f, sv, fr))
    return report


def verify_prep(variant: PrepVariant | str, expand: bool = True, placement: str = "after",
                idle: bool = False) -> FaultReport:
    """Enumerate and classify every single fault of a catalog preparation.

    ``expand=False`` treats each SWAP as one two-qubit location instead of
    its three-CNOT realisation.
    """
    variant = PrepVariant(variant)
    c = prep_circuit(variant, expand=expand)
    return verify_circuit(c, prepared_state(variant), CLAIMS[variant], placement, idle,
                          "expanded" if expand else "abstract")
