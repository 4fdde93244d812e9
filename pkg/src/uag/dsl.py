"""The .uag model language and JSON reports.

Grammar (``#`` starts a comment; items inside braces are separated by ``;``,
``,`` or newlines)::

    signature NAME { sym/arity, ... }
    algebra NAME : SIG { size N; sym = table; const = k }
    system NAME : SIG on (x1, ..., xn) { term = term; ... }
    words NAME : SIG { sym -> term; ... }

Tables are nested brackets, row-major, with one nesting level per argument.
Terms are prefix applications ``sym(t1, ..., tk)``; constants and generators
``x1..xn`` are bare identifiers. Element indices are 0-based.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

import numpy as np

from .algebra import FiniteAlgebra, Signature
from .errors import UagError
from .terms import App, EquationSystem, Var
from .verbal import WordSystem


class DslError(UagError):
    kind = "syntax error"

    def __init__(self, message, line, col):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line, self.col, self.detail = line, col, message


class LexError(DslError):
    kind = "lexical error"


class GrammarError(DslError):
    kind = "syntax error"


class DslUnknownSymbolError(DslError):
    kind = "unknown symbol"


class DslArityError(DslError):
    kind = "arity mismatch"


class TableError(DslError):
    kind = "table error"


class DuplicateNameError(DslError):
    kind = "duplicate name"


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<comment>#[^\n]*)|(?P<nl>\n)|(?P<arrow>->)"
    r"|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[{}()\[\],;:=/])"
)
_GEN = re.compile(r"x([1-9]\d*)$")


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            toks.append(Tok("nl", "\n", line, col))
            line, line_start = line + 1, m.end()
        elif kind in ("int", "ident", "arrow"):
            toks.append(Tok(kind, m.group(), line, col))
        elif kind == "punct":
            toks.append(Tok(m.group(), m.group(), line, col))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


@dataclass
class ModelFile:
    signatures: dict = field(default_factory=dict)
    algebras: dict = field(default_factory=dict)
    systems: dict = field(default_factory=dict)
    system_signatures: dict = field(default_factory=dict)
    word_systems: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, ModelFile):
            return NotImplemented
        return (
            self.signatures == other.signatures
            and self.algebras == other.algebras
            and {k: a.name for k, a in self.algebras.items()} == {k: a.name for k, a in other.algebras.items()}
            and self.systems == other.systems
            and self.system_signatures == other.system_signatures
            and self.word_systems == other.word_systems
        )


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self.model = ModelFile()

    # token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, cls, msg, tok=None):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def skip_nl(self):
        while self.tok.kind == "nl":
            self.i += 1

    def take(self, kind, what=None):
        self.skip_nl()
        t = self.tok
        if t.kind != kind:
            shown = t.text if t.kind != "eof" else "end of input"
            raise self.error(GrammarError, f"expected {what or kind}, found {shown!r}")
        self.i += 1
        return t

    def peek(self, kind):
        self.skip_nl()
        return self.tok.kind == kind

    def items(self, parse_item, seps):
        """Brace-delimited list; separators are any of seps or newlines."""
        self.take("{", "'{'")
        out = []
        while True:
            while self.tok.kind == "nl" or self.tok.kind in seps:
                self.i += 1
            if self.tok.kind == "}":
                self.i += 1
                return out
            out.append(parse_item())
            t = self.tok
            if t.kind not in seps and t.kind not in ("nl", "}"):
                raise self.error(GrammarError, f"expected separator or '}}', found {t.text!r}")

    # declarations
    def parse(self):
        while True:
            self.skip_nl()
            t = self.tok
            if t.kind == "eof":
                return self.model
            if t.kind != "ident" or t.text not in ("signature", "algebra", "system", "words"):
                raise self.error(GrammarError, f"expected a declaration, found {t.text!r}")
            self.i += 1
            getattr(self, "decl_" + t.text)(t)

    def new_name(self, table, kind):
        t = self.take("ident", f"{kind} name")
        if t.text in table:
            raise self.error(DuplicateNameError, f"duplicate {kind} name {t.text!r}", t)
        return t

    def sig_ref(self):
        self.take(":", "':'")
        t = self.take("ident", "signature name")
        sig = self.model.signatures.get(t.text)
        if sig is None:
            raise self.error(DslUnknownSymbolError, f"unknown signature {t.text!r}", t)
        return sig

    def decl_signature(self, start):
        name = self.new_name(self.model.signatures, "signature")
        seen = set()

        def op():
            t = self.take("ident", "operation symbol")
            if t.text in seen:
                raise self.error(DuplicateNameError, f"duplicate operation symbol {t.text!r}", t)
            seen.add(t.text)
            self.take("/", "'/'")
            return (t.text, int(self.take("int", "arity").text))

        ops = self.items(op, (",",))
        self.model.signatures[name.text] = Signature(name.text, tuple(ops))

    def table(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return int(t.text)
        if t.kind != "[":
            raise self.error(GrammarError, f"expected table entry, found {t.text!r}")
        self.i += 1
        out = []
        while True:
            self.skip_nl()
            if self.tok.kind == "]" and not out:
                self.i += 1
                return out
            out.append(self.table())
            self.skip_nl()
            if self.tok.kind == ",":
                self.i += 1
            elif self.tok.kind == "]":
                self.i += 1
                return out
            else:
                raise self.error(GrammarError, f"expected ',' or ']', found {self.tok.text!r}")

    def decl_algebra(self, start):
        name = self.new_name(self.model.algebras, "algebra")
        sig = self.sig_ref()
        entries = {}
        size = [None]

        def item():
            t = self.take("ident", "'size' or operation symbol")
            if t.text == "size":
                size[0] = (int(self.take("int", "size").text), t)
                return
            if t.text not in sig.symbols:
                raise self.error(DslUnknownSymbolError, f"unknown symbol {t.text!r} in {sig.name}", t)
            if t.text in entries:
                raise self.error(DuplicateNameError, f"table for {t.text!r} given twice", t)
            self.take("=", "'='")
            self.skip_nl()
            entries[t.text] = (self.table(), t)

        self.items(item, (";",))
        if size[0] is None:
            raise self.error(TableError, f"algebra {name.text!r} has no size", name)
        n, size_tok = size[0]
        if n < 1:
            raise self.error(TableError, "size must be positive", size_tok)
        tables = {}
        for sym, arity in sig.ops:
            if sym not in entries:
                raise self.error(TableError, f"missing table for {sym!r}", name)
            value, tok = entries[sym]
            arr = _check_table(value, arity, n, sym, tok)
            tables[sym] = arr
        self.model.algebras[name.text] = FiniteAlgebra(sig, n, tables, name.text)

    def term(self, sig, rank):
        t = self.take("ident", "term")
        m = _GEN.match(t.text)
        if m and t.text not in sig.symbols:
            k = int(m.group(1))
            if k > rank:
                raise self.error(DslUnknownSymbolError, f"generator {t.text} outside x1..x{rank}", t)
            return Var(k)
        if t.text not in sig.symbols:
            raise self.error(DslUnknownSymbolError, f"unknown symbol {t.text!r}", t)
        args = []
        if self.tok.kind == "(":
            self.i += 1
            args.append(self.term(sig, rank))
            while self.peek(","):
                self.i += 1
                args.append(self.term(sig, rank))
            self.take(")", "')'")
        arity = sig.arity(t.text)
        if len(args) != arity:
            raise self.error(DslArityError, f"{t.text} expects {arity} arguments, got {len(args)}", t)
        return App(t.text, tuple(args))

    def decl_system(self, start):
        name = self.new_name(self.model.systems, "system")
        sig = self.sig_ref()
        on = self.take("ident", "'on'")
        if on.text != "on":
            raise self.error(GrammarError, f"expected 'on', found {on.text!r}", on)
        self.take("(", "'('")
        gens = [self.take("ident", "generator")]
        while self.peek(","):
            self.i += 1
            gens.append(self.take("ident", "generator"))
        self.take(")", "')'")
        for k, g in enumerate(gens, 1):
            if g.text != f"x{k}":
                raise self.error(GrammarError, f"generators must be x1..xn in order, found {g.text!r}", g)
        rank = len(gens)

        def eq():
            left = self.term(sig, rank)
            self.take("=", "'='")
            return (left, self.term(sig, rank))

        pairs = self.items(eq, (";",))
        self.model.systems[name.text] = EquationSystem(rank, tuple(pairs))
        self.model.system_signatures[name.text] = sig.name

    def decl_words(self, start):
        name = self.new_name(self.model.word_systems, "word system")
        sig = self.sig_ref()
        words = {}

        def item():
            t = self.take("ident", "operation symbol")
            if t.text not in sig.symbols:
                raise self.error(DslUnknownSymbolError, f"unknown symbol {t.text!r} in {sig.name}", t)
            if t.text in words:
                raise self.error(DuplicateNameError, f"word for {t.text!r} given twice", t)
            self.take("arrow", "'->'")
            words[t.text] = self.term(sig, sig.arity(t.text))

        self.items(item, (";",))
        for sym in sig.symbols:
            if sym not in words:
                raise self.error(DslUnknownSymbolError, f"no word for {sym!r}", name)
        self.model.word_systems[name.text] = WordSystem(sig, words, name.text)


def _check_table(value, arity, n, sym, tok):
    def shape_ok(v, depth):
        if depth == 0:
            return isinstance(v, int)
        return isinstance(v, list) and len(v) == n and all(shape_ok(x, depth - 1) for x in v)

    if not shape_ok(value, arity):
        raise TableError(
            f"table for {sym!r} must have {arity} nested dimension(s) of length {n}", tok.line, tok.col
        )
    arr = np.array(value, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise TableError(f"table for {sym!r} has entries outside 0..{n - 1}", tok.line, tok.col)
    return arr


def parse_model(text: str) -> ModelFile:
    return _Parser(text).parse()


def load_model(path) -> ModelFile:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# --- rendering ----------------------------------------------------------------


def _table_text(arr):
    return json.dumps(np.asarray(arr).tolist(), separators=(",", ":"))


def render_signature(sig: Signature) -> str:
    return f"signature {sig.name} {{ " + ", ".join(f"{s}/{a}" for s, a in sig.ops) + " }"


def render_algebra(name, A: FiniteAlgebra) -> str:
    parts = [f"size {A.size}"] + [f"{s} = {_table_text(A.table(s))}" for s in A.signature.symbols]
    return f"algebra {name} : {A.signature.name} {{ " + "; ".join(parts) + " }"


def render_system(name, sig_name, T: EquationSystem) -> str:
    gens = ",".join(f"x{i + 1}" for i in range(T.rank))
    eqs = "; ".join(f"{l} = {r}" for l, r in T.pairs)
    body = f"{{ {eqs} }}" if eqs else "{ }"
    return f"system {name} : {sig_name} on ({gens}) {body}"


def render_words(name, W: WordSystem) -> str:
    body = "; ".join(f"{s} -> {W[s]}" for s in W.signature.symbols)
    return f"words {name} : {W.signature.name} {{ {body} }}"


def render_model(model: ModelFile) -> str:
    lines = [render_signature(s) for s in model.signatures.values()]
    lines += [render_algebra(n, a) for n, a in model.algebras.items()]
    lines += [render_system(n, model.system_signatures[n], t) for n, t in model.systems.items()]
    lines += [render_words(n, w) for n, w in model.word_systems.items()]
    return "\n".join(lines) + "\n"


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


# --- report payloads -----------------------------------------------------------


def points_payload(S) -> list:
    return S.assignments.tolist()


def congruence_payload(T) -> dict:
    return {
        "algebra": T.algebra.name,
        "rank": T.rank,
        "points": points_payload(T.base),
        "coordinate_size": len(T.coordinate),
    }


def closure_payload(T) -> dict:
    return {"data": congruence_payload(T)}


def closed_sets_payload(sets) -> dict:
    return {"data": {"count": len(sets), "sets": [congruence_payload(T) for T in sets]}}


def free_payload(C) -> dict:
    return {"data": {"size": len(C), "witnesses": [str(w) for w in C.witnesses]}}


def _counterexample(v) -> dict | None:
    from .geometry import closure_in, defining_system, separating_pair

    if v.counterexample is None:
        return None
    T = v.counterexample
    out = congruence_payload(T)
    out["rank"] = v.counterexample_rank
    out["not_closed_in"] = v.not_closed_in.name
    # closure of this system in the first algebra is T (modulo its identities)
    out["system"] = [f"{l} = {r}" for l, r in defining_system(T).pairs]
    pair = separating_pair(T, closure_in(T, v.not_closed_in))
    out["separating_equation"] = f"{pair[0]} = {pair[1]}"
    return out


def geom_payload(v) -> dict:
    out = {"verdict": v.equivalent_up_to_rank, "checked_rank": v.checked_rank}
    cx = _counterexample(v)
    if cx is not None:
        out["counterexample"] = cx
    if v.budget_exceeded_at is not None:
        out["diagnostics"] = [f"point budget exceeded at rank {v.budget_exceeded_at}"]
    return out


def algebra_payload(A) -> dict:
    return {"data": {"name": A.name, "size": A.size,
                     "tables": {s: A.table(s).tolist() for s in A.signature.symbols}}}


def applicability_payload(report) -> dict:
    ranks = {}
    for r, st in sorted(report.ranks.items()):
        entry = {"status": st.status}
        if st.free is not None:
            entry["free_size"] = st.free.size
        if st.s_map is not None:
            entry["s_map"] = [int(v) for v in st.s_map]
        if st.violation is not None:
            entry["violation"] = [str(t) for t in st.violation]
        if st.collision is not None:
            entry["collision"] = [int(v) for v in st.collision]
        ranks[str(r)] = entry
    return {"verdict": report.ok, "data": {"h0": report.h0.name, "ranks": ranks}}


def autoeq_payload(v) -> dict:
    out = geom_payload(v.geom)
    basis = {"kind": v.basis}
    if v.basis_h0 is not None:
        basis["h0"] = v.basis_h0
        basis["rank"] = v.basis_rank
    out["basis"] = basis
    return out


def inner_payload(w) -> dict:
    if w is None:
        return {"verdict": False, "data": {"c": None}}
    return {"verdict": True, "data": {"c": str(w.c), "verified_ranks": list(w.verified_ranks)}}


_ORDER = ("command", "inputs", "verdict", "data", "checked_rank", "counterexample", "basis", "diagnostics")


def make_report(command: str, inputs: dict, payload: dict, timing_ms: float | None = None) -> dict:
    rep = {"command": command, "inputs": inputs}
    rep.update(payload)
    ordered = {k: rep[k] for k in _ORDER if k in rep}
    ordered.update({k: v for k, v in rep.items() if k not in ordered})
    if timing_ms is not None:
        ordered["timing_ms"] = round(float(timing_ms), 3)
    return ordered


def render_report(report: dict) -> str:
    """Deterministic JSON; ``timing_ms`` (if any) is always the last key."""
    body = {k: v for k, v in report.items() if k != "timing_ms"}
    if "timing_ms" in report:
        body["timing_ms"] = report["timing_ms"]
    return json.dumps(body, indent=2, ensure_ascii=False) + "\n"
