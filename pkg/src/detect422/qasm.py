"""OpenQASM 2.0 subset and layout-config reader/writer.

Accepted QASM statements (each terminated by ``;``)::

    OPENQASM 2.0;
    include "qelib1.inc";          (ignored)
    qreg q[5];  creg c[4];         (several registers are concatenated)
    h|s|sdg|t|tdg|x|y|z q[i];
    cx|swap q[i],q[j];
    reset q[i];                    (preparation in |0>)
    measure q[i] -> c[j];
    barrier q[i],q[j];  barrier q;

Circuit metadata travels in pragma comments that plain QASM tools ignore::

    // @name FTv1
    // @postselect flag=0 parity=1,3,4,2
    // @readout 1^3 1^4

Layout configs are ``key=value`` lines: ``name=``, ``qubits=``, repeated
``edge=c,t`` and ``label=phys,name``; ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .circuit import Circuit, Gate, GateKind, PostSelect, QubitLayout, decompose_swap, swap_leg

__all__ = [
    "ErrorKind",
    "ParseError",
    "QasmError",
    "SourceSpan",
    "load_layout",
    "load_qasm",
    "parse_layout",
    "parse_qasm",
    "serialize_layout",
    "serialize_qasm",
]


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError("line and column are 1-based")


class ErrorKind(str, Enum):
    SYNTAX = "syntax"
    UNKNOWN_GATE = "unknown-gate"
    ARITY = "arity"
    UNDECLARED_REGISTER = "undeclared-register"
    WIDTH = "width"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    kind: ErrorKind

    def __post_init__(self):
        if not self.message:
            raise ValueError("empty parse error message")

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.kind.value}: {self.message}"


class QasmError(ValueError):
    def __init__(self, errors: list[ParseError]):
        super().__init__("\n".join(str(e) for e in errors))
        self.errors = errors


GATE_NAMES = {
    "h": GateKind.H,
    "s": GateKind.S,
    "sdg": GateKind.SDG,
    "t": GateKind.T,
    "tdg": GateKind.TDG,
    "x": GateKind.X,
    "y": GateKind.Y,
    "z": GateKind.Z,
    "cx": GateKind.CNOT,
    "swap": GateKind.SWAP,
    "reset": GateKind.PREP_0,
}
QASM_NAMES = {k: name for name, k in GATE_NAMES.items()}
_ARITY = {k: 2 if k in (GateKind.CNOT, GateKind.SWAP) else 1 for k in GATE_NAMES.values()}

# -- lexer ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)|(?P<nl>\n)|(?P<comment>//[^\n]*)"
    r"|(?P<real>\d+\.\d*)|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r'|(?P<string>"[^"\n]*")|(?P<arrow>->)|(?P<sym>[\[\],;])'
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    span: SourceSpan


def _lex(text: str, errors: list[ParseError]) -> tuple[list[_Tok], list[_Tok]]:
    """Tokens and pragma comments; unknown characters become syntax errors."""
    toks, pragmas = [], []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            errors.append(ParseError(SourceSpan(line, col), f"unexpected character {text[pos]!r}", ErrorKind.SYNTAX))
            pos += 1
            continue
        kind, value = m.lastgroup, m.group()
        span = SourceSpan(line, col, len(value))
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind == "comment":
            if value[2:].lstrip().startswith("@"):
                pragmas.append(_Tok("pragma", value[2:].strip()[1:], span))
        elif kind != "ws":
            toks.append(_Tok(kind, value, span))
        pos = m.end()
    return toks, pragmas


# -- parser --------------------------------------------------------------------------


class _Fail(Exception):
    def __init__(self, error: ParseError):
        self.error = error


def _err(tok: _Tok, message: str, kind: ErrorKind = ErrorKind.SYNTAX) -> _Fail:
    return _Fail(ParseError(tok.span, message, kind))


@dataclass
class _Register:
    offset: int
    size: int


class _Parser:
    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        self.qregs: dict[str, _Register] = {}
        self.cregs: dict[str, _Register] = {}
        self.n_qubits = 0
        self.n_clbits = 0
        self.gates: list[Gate] = []
        self.measured: set[int] = set()
        self.written: set[int] = set()
        self.seen_header = False

    # statement-level helpers
    @staticmethod
    def _expect(stmt: list[_Tok], i: int, kind: str, text: str | None = None) -> _Tok:
        if i >= len(stmt):
            raise _err(stmt[-1], f"statement ends early, expected {text or kind}")
        t = stmt[i]
        if t.kind != kind or (text is not None and t.text != text):
            raise _err(t, f"expected {text or kind}, found {t.text!r}")
        return t

    def _operand(self, stmt: list[_Tok], i: int, regs: dict[str, _Register], what: str) -> tuple[list[int], int]:
        """Parse ``name[idx]`` or bare ``name``; returns (flat indices, next position)."""
        name = self._expect(stmt, i, "ident")
        if name.text not in regs:
            other = "creg" if what == "qubit" else "qreg"
            hint = f" (it is a {other})" if name.text in (self.cregs if what == "qubit" else self.qregs) else ""
            raise _err(name, f"undeclared {what} register {name.text!r}{hint}", ErrorKind.UNDECLARED_REGISTER)
        reg = regs[name.text]
        if i + 1 < len(stmt) and stmt[i + 1].text == "[":
            idx = self._expect(stmt, i + 2, "int")
            self._expect(stmt, i + 3, "sym", "]")
            k = int(idx.text)
            if k >= reg.size:
                raise _err(idx, f"index {k} out of range for {name.text}[{reg.size}]", ErrorKind.WIDTH)
            return [reg.offset + k], i + 4
        return [reg.offset + k for k in range(reg.size)], i + 1

    def _operand_list(self, stmt: list[_Tok], i: int) -> list[tuple[list[int], _Tok]]:
        out = []
        while True:
            start = stmt[i] if i < len(stmt) else stmt[-1]
            qs, i = self._operand(stmt, i, self.qregs, "qubit")
            out.append((qs, start))
            if i == len(stmt):
                return out
            self._expect(stmt, i, "sym", ",")
            i += 1

    def statement(self, stmt: list[_Tok]) -> None:
        head = stmt[0]
        if head.kind != "ident":
            raise _err(head, f"statement cannot start with {head.text!r}")
        word = head.text
        if word == "OPENQASM":
            v = stmt[1] if len(stmt) > 1 else head
            if len(stmt) != 2 or v.kind not in ("real", "int") or not v.text.startswith("2"):
                raise _err(v, "only 'OPENQASM 2.0' is supported")
            if self.seen_header or self.gates or self.qregs:
                raise _err(head, "version header must come first")
            self.seen_header = True
            return
        if word == "include":
            self._expect(stmt, 1, "string")
            if len(stmt) != 2:
                raise _err(stmt[2], "unexpected tokens after include")
            return
        if word in ("qreg", "creg"):
            name = self._expect(stmt, 1, "ident")
            self._expect(stmt, 2, "sym", "[")
            size = self._expect(stmt, 3, "int")
            self._expect(stmt, 4, "sym", "]")
            if len(stmt) != 5:
                raise _err(stmt[5], "unexpected tokens after declaration")
            if name.text in self.qregs or name.text in self.cregs:
                raise _err(name, f"register {name.text!r} declared twice")
            n = int(size.text)
            if word == "qreg":
                self.qregs[name.text] = _Register(self.n_qubits, n)
                self.n_qubits += n
            else:
                self.cregs[name.text] = _Register(self.n_clbits, n)
                self.n_clbits += n
            return
        if word == "measure":
            qs, i = self._operand(stmt, 1, self.qregs, "qubit")
            self._expect(stmt, i, "arrow")
            cs, j = self._operand(stmt, i + 1, self.cregs, "classical")
            if j != len(stmt):
                raise _err(stmt[j], "unexpected tokens after measure")
            if len(qs) != 1 or len(cs) != 1:
                raise _err(head, "measure takes one qubit and one classical bit", ErrorKind.ARITY)
            self._check_live(head, qs)
            if cs[0] in self.written:
                raise _err(stmt[i + 1], f"classical bit {cs[0]} written twice", ErrorKind.WIDTH)
            self.written.add(cs[0])
            self.measured.add(qs[0])
            self.gates.append(Gate(GateKind.MEASURE_Z, (qs[0],), len(self.gates), cs[0]))
            return
        if word == "barrier":
            ops = self._operand_list(stmt, 1)
            qubits = tuple(q for qs, _ in ops for q in qs)
            if len(set(qubits)) != len(qubits):
                raise _err(head, "barrier lists a qubit twice", ErrorKind.ARITY)
            self.gates.append(Gate(GateKind.BARRIER, qubits, len(self.gates)))
            return
        if word not in GATE_NAMES:
            raise _err(head, f"unknown gate {word!r}", ErrorKind.UNKNOWN_GATE)
        kind = GATE_NAMES[word]
        ops = self._operand_list(stmt, 1) if len(stmt) > 1 else []
        if len(ops) != _ARITY[kind]:
            raise _err(head, f"{word} takes {_ARITY[kind]} operand(s), got {len(ops)}", ErrorKind.ARITY)
        for qs, tok in ops:
            if len(qs) != 1:
                raise _err(tok, "register broadcast is not supported; index the qubit", ErrorKind.ARITY)
        qubits = tuple(qs[0] for qs, _ in ops)
        if len(set(qubits)) != len(qubits):
            raise _err(head, f"{word} needs distinct operands", ErrorKind.ARITY)
        self._check_live(head, qubits)
        self.gates.append(Gate(kind, qubits, len(self.gates)))

    def _check_live(self, tok: _Tok, qubits) -> None:
        for q in qubits:
            if q in self.measured:
                raise _err(tok, f"qubit {q} used after its measurement", ErrorKind.SYNTAX)


def _split_statements(toks: list[_Tok], errors: list[ParseError]) -> list[list[_Tok]]:
    stmts, cur = [], []
    for t in toks:
        if t.text == ";" and t.kind == "sym":
            if cur:
                stmts.append(cur)
            cur = []
        else:
            cur.append(t)
    if cur:
        errors.append(ParseError(cur[-1].span, "missing ';' at end of statement", ErrorKind.SYNTAX))
    return stmts


def _parse_pragmas(pragmas: list[_Tok], n_qubits: int, errors: list[ParseError]):
    name, post, readout = "", None, None

    def qubit_list(tok: _Tok, text: str) -> tuple[int, ...]:
        if not text:
            return ()
        try:
            qs = tuple(int(v) for v in text.split(","))
        except ValueError:
            raise _err(tok, f"bad qubit list {text!r}") from None
        if any(not 0 <= q < n_qubits for q in qs):
            raise _err(tok, f"qubit out of range in {text!r}", ErrorKind.WIDTH)
        return qs

    for tok in pragmas:
        key, _, rest = tok.text.partition(" ")
        rest = rest.strip()
        try:
            if key == "name":
                name = rest
            elif key == "postselect":
                fields = dict.fromkeys(("flag", "parity"), "")
                for part in rest.split():
                    k, eq, v = part.partition("=")
                    if not eq or k not in fields:
                        raise _err(tok, f"bad postselect field {part!r}")
                    fields[k] = v
                post = PostSelect(qubit_list(tok, fields["flag"]), qubit_list(tok, fields["parity"]))
            elif key == "readout":
                readout = tuple(qubit_list(tok, bit.replace("^", ",")) for bit in rest.split())
            else:
                raise _err(tok, f"unknown pragma @{key}")
        except _Fail as f:
            errors.append(f.error)
    return name, post, readout


def parse_qasm(text: str | bytes) -> Circuit | list[ParseError]:
    """Parse the subset; returns a Circuit, or every error found."""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    errors: list[ParseError] = []
    toks, pragmas = _lex(text, errors)
    p = _Parser(errors)
    stmts = _split_statements(toks, errors)
    for stmt in stmts:
        try:
            p.statement(stmt)
        except _Fail as f:
            errors.append(f.error)
    if stmts and not p.seen_header:
        errors.insert(0, ParseError(stmts[0][0].span, "missing 'OPENQASM 2.0;' header", ErrorKind.SYNTAX))
    name, post, readout = _parse_pragmas(pragmas, p.n_qubits, errors)
    if errors:
        return sorted(errors, key=lambda e: (e.span.line, e.span.column))
    where = SourceSpan(1, 1)
    if p.written and p.written != set(range(len(p.written))):
        return [ParseError(where, "classical bits must be written as 0..m-1", ErrorKind.WIDTH)]
    try:
        return Circuit(p.n_qubits, tuple(p.gates), post, readout, name)
    except ValueError as e:
        return [ParseError(where, str(e), ErrorKind.SYNTAX)]


def load_qasm(text: str | bytes) -> Circuit:
    """Like :func:`parse_qasm` but raises :class:`QasmError` on failure."""
    out = parse_qasm(text)
    if isinstance(out, list):
        raise QasmError(out)
    return out


def serialize_qasm(c: Circuit, expand_swap: bool = False, layout: QubitLayout | None = None) -> str:
    """QASM text of ``c``; ``expand_swap`` writes each SWAP as three CNOTs.

    With a ``layout`` the expanded CNOTs follow its edge orientation.
    """
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if c.name:
        lines.append(f"// @name {c.name}")
    if c.postselect is not None:
        fl = ",".join(map(str, c.postselect.flag_qubits))
        par = ",".join(map(str, c.postselect.parity_qubits))
        lines.append(f"// @postselect flag={fl} parity={par}")
    if c.readout is not None:
        lines.append("// @readout " + " ".join("^".join(map(str, bit)) for bit in c.readout))
    lines.append(f"qreg q[{c.n_qubits}];")
    if c.n_cbits:
        lines.append(f"creg c[{c.n_cbits}];")
    for g in c.gates:
        if g.kind == GateKind.SWAP and expand_swap:
            a, b = g.qubits if layout is None else swap_leg(layout, *g.qubits)
            lines.extend(_gate_line(h) for h in decompose_swap(a, b))
        else:
            lines.append(_gate_line(g))
    return "\n".join(lines) + "\n"


def _gate_line(g: Gate) -> str:
    if g.kind == GateKind.MEASURE_Z:
        return f"measure q[{g.qubits[0]}] -> c[{g.cbit}];"
    ops = ",".join(f"q[{q}]" for q in g.qubits)
    word = "barrier" if g.kind == GateKind.BARRIER else QASM_NAMES[g.kind]
    return f"{word} {ops};"


# -- layout configs ------------------------------------------------------------------


def parse_layout(text: str) -> QubitLayout | list[ParseError]:
    errors: list[ParseError] = []
    name, n_qubits = None, None
    edges: list[tuple[tuple[int, int], SourceSpan]] = []
    labels: list[tuple[tuple[int, str], SourceSpan]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        col = len(body) - len(body.lstrip()) + 1
        span = SourceSpan(lineno, col, len(body.strip()))
        key, eq, value = body.strip().partition("=")
        key, value = key.strip(), value.strip()
        if not eq:
            errors.append(ParseError(span, f"expected key=value, got {body.strip()!r}", ErrorKind.SYNTAX))
            continue
        if key == "name":
            if not value:
                errors.append(ParseError(span, "empty layout name", ErrorKind.SYNTAX))
            name = value
        elif key == "qubits":
            if not value.isdigit():
                errors.append(ParseError(span, f"qubit count must be an integer, got {value!r}", ErrorKind.SYNTAX))
            else:
                n_qubits = int(value)
        elif key == "edge":
            parts = value.replace(",", " ").split()
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                errors.append(ParseError(span, f"edge needs two qubit indices, got {value!r}", ErrorKind.SYNTAX))
                continue
            e = (int(parts[0]), int(parts[1]))
            if e[0] == e[1]:
                errors.append(ParseError(span, f"self-loop edge on qubit {e[0]}", ErrorKind.SYNTAX))
            elif any(prev == e for prev, _ in edges):
                errors.append(ParseError(span, f"duplicate edge {e[0]}->{e[1]}", ErrorKind.SYNTAX))
            else:
                edges.append((e, span))
        elif key == "label":
            phys, comma, lname = value.partition(",")
            if not comma or not phys.strip().isdigit() or not lname.strip():
                errors.append(ParseError(span, f"label needs phys,name, got {value!r}", ErrorKind.SYNTAX))
                continue
            labels.append(((int(phys), lname.strip()), span))
        else:
            errors.append(ParseError(span, f"unknown key {key!r}", ErrorKind.SYNTAX))
    last = SourceSpan(max(1, len(text.splitlines())), 1)
    if name is None:
        errors.append(ParseError(last, "missing name=", ErrorKind.SYNTAX))
    if n_qubits is None:
        errors.append(ParseError(last, "missing qubits=", ErrorKind.SYNTAX))
    else:
        for (c, t), span in edges:
            if c >= n_qubits or t >= n_qubits:
                errors.append(ParseError(span, f"edge {c}->{t} outside {n_qubits} qubits", ErrorKind.WIDTH))
        for (q, _), span in labels:
            if q >= n_qubits:
                errors.append(ParseError(span, f"label for qubit {q} outside {n_qubits} qubits", ErrorKind.WIDTH))
    if errors:
        return sorted(errors, key=lambda e: (e.span.line, e.span.column))
    return QubitLayout(name, n_qubits, frozenset(e for e, _ in edges), tuple(sorted(lab for lab, _ in labels)))


def serialize_layout(layout: QubitLayout) -> str:
    lines = [f"name={layout.name}", f"qubits={layout.n_qubits}"]
    lines += [f"edge={c},{t}" for c, t in layout.connected_pairs()]
    lines += [f"label={q},{lab}" for q, lab in layout.qubit_labels]
    return "\n".join(lines) + "\n"


def load_layout(name_or_path: str | Path) -> QubitLayout:
    """A shipped layout by name (``raven``, ``sparrow``) or a config file path."""
    p = Path(name_or_path)
    if p.suffix == ".cfg" or p.exists():
        text = p.read_text()
    else:
        ref = resources.files("detect422") / "layouts" / f"{name_or_path}.cfg"
        if not ref.is_file():
            raise FileNotFoundError(f"no shipped layout {name_or_path!r}")
        text = ref.read_text()
    out = parse_layout(text)
    if isinstance(out, list):
        raise QasmError(out)
    return out
