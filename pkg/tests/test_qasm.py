import pytest
from hypothesis import given
from hypothesis import strategies as st

from detect422.circuit import RAVEN, SPARROW, Circuit, GateKind, expand_swaps
from detect422.code422 import PrepVariant, catalog, prep_circuit
from detect422.ftverify import enumerate_faults, inject_fault
from detect422.qasm import (
    ErrorKind,
    ParseError,
    QasmError,
    SourceSpan,
    load_layout,
    load_qasm,
    parse_layout,
    parse_qasm,
    serialize_layout,
    serialize_qasm,
)

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'

NFT_TEXT = HEADER + """qreg q[5];
h q[3];
cx q[3],q[4];
cx q[3],q[2];
cx q[2],q[1];
"""


def errors_of(text):
    out = parse_qasm(text)
    assert isinstance(out, list), out
    return out


def test_nft_text():
    c = parse_qasm(NFT_TEXT)
    assert isinstance(c, Circuit)
    assert c.count(GateKind.H) == 1 and c.count(GateKind.CNOT) == 3
    assert [g.qubits for g in c.gates] == [(3,), (3, 4), (3, 2), (2, 1)]
    assert [g.location_id for g in c.gates] == [0, 1, 2, 3]


def test_empty_body():
    c = parse_qasm(HEADER + "qreg q[2];\n")
    assert c == Circuit(2)


def test_arity_error_has_line():
    errs = errors_of(HEADER + "qreg q[2];\ncx q[0];\n")
    assert len(errs) == 1
    assert errs[0].kind == ErrorKind.ARITY and errs[0].span.line == 4


def test_multiple_errors_reported():
    text = HEADER + "qreg q[2];\nfoo q[0];\nh r[0];\nh q[7];\nh q[0]\n"
    kinds = [e.kind for e in errors_of(text)]
    assert ErrorKind.UNKNOWN_GATE in kinds
    assert ErrorKind.UNDECLARED_REGISTER in kinds
    assert ErrorKind.WIDTH in kinds
    assert len(kinds) >= 4


def test_missing_header():
    errs = errors_of("qreg q[1];\nh q[0];\n")
    assert errs[0].kind == ErrorKind.SYNTAX


def test_measure_barrier_and_pragmas():
    text = HEADER + """// @name demo
// @postselect flag=0 parity=1,2
// @readout 1^2 2
qreg q[3];
creg c[3];
h q[1];
barrier q;
cx q[1],q[2];
measure q[0] -> c[0];
measure q[1] -> c[1];
measure q[2] -> c[2];
"""
    c = load_qasm(text)
    assert c.name == "demo"
    assert c.postselect.flag_qubits == (0,) and c.postselect.parity_qubits == (1, 2)
    assert c.readout == ((1, 2), (2,))
    assert c.count(GateKind.BARRIER) == 1
    assert [g.cbit for g in c.measurements] == [0, 1, 2]
    assert load_qasm(serialize_qasm(c)) == c


def test_load_qasm_raises():
    with pytest.raises(QasmError) as exc:
        load_qasm(HEADER + "qreg q[1];\ncx q[0];\n")
    assert exc.value.errors[0].kind == ErrorKind.ARITY


def test_span_and_error_invariants():
    with pytest.raises(ValueError):
        SourceSpan(0, 1)
    with pytest.raises(ValueError):
        ParseError(SourceSpan(1, 1), "", ErrorKind.SYNTAX)


@pytest.mark.parametrize("name", sorted(catalog()))
def test_catalog_round_trip(name):
    c = catalog()[name]
    assert load_qasm(serialize_qasm(c)) == c


def test_round_trip_named_examples():
    for v in (PrepVariant.FTv1, PrepVariant.LogicalBell):
        c = prep_circuit(v)
        assert load_qasm(serialize_qasm(c)) == c
    assert load_qasm(serialize_qasm(Circuit(3))) == Circuit(3)


def test_swap_pseudo_gate_and_expansion():
    c = prep_circuit(PrepVariant.FTv2, expand=False)
    assert c.count(GateKind.SWAP) == 1
    assert load_qasm(serialize_qasm(c)) == c
    expanded = load_qasm(serialize_qasm(c, expand_swap=True, layout=RAVEN))
    assert expanded.count(GateKind.SWAP) == 0
    assert expanded == expand_swaps(c, RAVEN)
    assert expanded.count(GateKind.CNOT) == 8


def test_injected_circuits_round_trip():
    c = prep_circuit(PrepVariant.NFT)
    for f in enumerate_faults(c)[::3]:
        faulty = inject_fault(c, f)
        assert load_qasm(serialize_qasm(faulty)) == faulty


def test_gate_count_matches_statements():
    c = load_qasm(NFT_TEXT + "barrier q[1],q[2];\n")
    body = [ln for ln in NFT_TEXT.splitlines()[3:] if ln.strip()]
    assert len(c.gates) - c.count(GateKind.BARRIER) == len(body)


def test_shipped_layouts():
    raven, sparrow = load_layout("raven"), load_layout("sparrow")
    assert raven == RAVEN and raven.n_qubits == 5 and len(raven.cnot_edges) == 6
    assert sparrow == SPARROW and len(sparrow.cnot_edges) == 6
    assert parse_layout(serialize_layout(raven)) == raven


def test_layout_errors():
    base = "name=x\nqubits=3\n"
    (err,) = parse_layout(base + "edge=2 2\n")
    assert "self-loop" in err.message and err.span.line == 3
    (err,) = parse_layout(base + "edge=0,1\nedge=0 1\n")
    assert "duplicate" in err.message
    (err,) = parse_layout(base + "edge=0,5\n")
    assert err.kind == ErrorKind.WIDTH
    assert isinstance(parse_layout("qubits=2\n"), list)
    with pytest.raises(FileNotFoundError):
        load_layout("nowhere")


def test_layout_file_path(tmp_path):
    p = tmp_path / "line.cfg"
    p.write_text("# a line of three\nname=line\nqubits=3\nedge=0,1\nedge=1,2\n")
    lay = load_layout(p)
    assert lay.cnot_edges == {(0, 1), (1, 2)}


@given(st.binary(max_size=300))
def test_fuzz_bytes_never_crash(data):
    out = parse_qasm(data)
    assert isinstance(out, (Circuit, list))
    if isinstance(out, list):
        assert out and all(isinstance(e, ParseError) and e.message for e in out)


_FRAGMENTS = [
    "OPENQASM 2.0;", 'include "qelib1.inc";', "qreg q[3];", "creg c[3];", "h q[0];", "cx q[0],q[1];",
    "cx q[1];", "swap q[1],q[2];", "measure q[0] -> c[0];", "measure q[1] -> c[1];", "barrier q;",
    "reset q[2];", "t q[2];", "u3 q[0];", "h q[9];", "// @name z", "// @postselect flag=0 parity=1",
    "// @readout 0 1", "h q[0]", ";", "qreg", "[", "->", "sdg q[2];",
]


@given(st.lists(st.sampled_from(_FRAGMENTS), max_size=12))
def test_fuzz_token_soup(parts):
    out = parse_qasm("\n".join(parts))
    if isinstance(out, Circuit):
        assert load_qasm(serialize_qasm(out)) == out
    else:
        assert all(e.span.line >= 1 and e.span.column >= 1 for e in out)


@given(st.text(max_size=200))
def test_fuzz_layout_never_crashes(text):
    out = parse_layout(text)
    assert isinstance(out, list) or out.n_qubits >= 0
