"""Reader and writer for the workbench file format.

A file holds any number of declarations::

    signature Mag { fn m/2; }
    structure Z2 : Mag { universe 2; fn m = [0,1,1,0]; }
    formula comm : Mag = |- m(x,y) = m(y,x)

Function tables list values in lexicographic argument order. A bare name in
a formula is a constant if the signature declares it with arity 0 and a
variable otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .errors import ArityMismatch, ParseError, UnknownSymbol
from .structures import FiniteStructure, StructureCatalog
from .syntax import (
    FUNCTION,
    RELATION,
    App,
    Atom,
    Eq,
    HornFormula,
    Rel,
    Signature,
    Symbol,
    Term,
    Var,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<turnstile>\|-)
  | (?P<nat>\d+)
  | (?P<name>[^\W\d][\w']*)
  | (?P<punct>[{}()\[\],;:=/&])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            tokens.append(Token("punct" if kind == "turnstile" else kind, value, line, pos - line_start + 1))
        newlines = m.group().count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + m.group().rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class Workspace:
    """Everything declared in one or more input files, by name."""

    signatures: dict[str, Signature] = field(default_factory=dict)
    structures: dict[str, FiniteStructure] = field(default_factory=dict)
    formulas: dict[str, HornFormula] = field(default_factory=dict)
    formula_sigs: dict[str, str] = field(default_factory=dict)

    def structure(self, name: str) -> FiniteStructure:
        try:
            return self.structures[name]
        except KeyError:
            raise ParseError(f"no structure named {name!r}") from None

    def formula(self, name: str) -> HornFormula:
        try:
            return self.formulas[name]
        except KeyError:
            raise ParseError(f"no formula named {name!r}") from None

    def signature(self, name: str) -> Signature:
        try:
            return self.signatures[name]
        except KeyError:
            raise ParseError(f"no signature named {name!r}") from None

    def catalog(self, names: Iterable[str]) -> StructureCatalog:
        members = [self.structure(n) for n in names]
        if not members:
            raise ParseError("empty class")
        return StructureCatalog(members[0].sig, members)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None, cls=ParseError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "name")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def name(self) -> str:
        if self.tok.kind != "name":
            raise self.error(f"expected a name, found {self.tok.text or 'end of input'!r}")
        return self.next().text

    def nat(self) -> int:
        if self.tok.kind != "nat":
            raise self.error(f"expected a number, found {self.tok.text or 'end of input'!r}")
        return int(self.next().text)

    # -- clauses --

    def clause(self, sig: Signature) -> HornFormula:
        negatives: list[Atom] = []
        start = self.tok
        if not self.at("|-"):
            negatives.append(self.atom(sig))
            while self.accept("&"):
                negatives.append(self.atom(sig))
        self.expect("|-")
        if self.tok.kind == "name" and self.tok.text == "false" and "false" not in sig:
            self.next()
            positive = None
        else:
            positive = self.atom(sig)
        if not negatives and positive is None:
            raise self.error("the empty clause '|- false' is not a basic Horn formula", start)
        return HornFormula(tuple(negatives), positive)

    def atom(self, sig: Signature) -> Atom:
        tok = self.tok
        if tok.kind == "name" and tok.text in sig and not sig[tok.text].is_function:
            sym = sig[self.next().text]
            args: tuple[Term, ...] = ()
            if self.accept("("):
                args = self.term_list(sig)
                self.expect(")")
            if len(args) != sym.arity:
                raise self.error(f"{sym.name} expects {sym.arity} arguments, got {len(args)}", tok, ArityMismatch)
            return Rel(sym.name, args)
        if tok.kind == "name" and self.peek().text == "(" and tok.text not in sig:
            raise self.error(f"unknown symbol {tok.text!r}", tok, UnknownSymbol)
        left = self.term(sig)
        if not self.at("="):
            raise self.error(f"expected '=' after term {left}")
        self.next()
        return Eq(left, self.term(sig))

    def term_list(self, sig) -> tuple[Term, ...]:
        items = [self.term(sig)]
        while self.accept(","):
            items.append(self.term(sig))
        return tuple(items)

    def term(self, sig: Signature) -> Term:
        tok = self.tok
        name = self.name()
        if self.at("("):
            if name not in sig:
                raise self.error(f"unknown symbol {name!r}", tok, UnknownSymbol)
            sym = sig[name]
            if not sym.is_function:
                raise self.error(f"relation {name} used as a term", tok)
            self.next()
            args = self.term_list(sig)
            self.expect(")")
            if len(args) != sym.arity:
                raise self.error(f"{name} expects {sym.arity} arguments, got {len(args)}", tok, ArityMismatch)
            return App(name, args)
        if name in sig:
            sym = sig[name]
            if not sym.is_function:
                raise self.error(f"relation {name} used as a term", tok)
            if sym.arity != 0:
                raise self.error(f"{name} expects {sym.arity} arguments, got 0", tok, ArityMismatch)
            return App(name)
        return Var(name)

    # -- declarations --

    def file(self, ws: Workspace) -> Workspace:
        while self.tok.kind != "eof":
            tok = self.tok
            kw = self.name()
            if kw == "signature":
                self.signature_decl(ws)
            elif kw == "structure":
                self.structure_decl(ws)
            elif kw == "formula":
                self.formula_decl(ws)
            else:
                raise self.error(f"expected a declaration, found {kw!r}", tok)
        return ws

    def signature_decl(self, ws: Workspace):
        name_tok = self.tok
        name = self.name()
        self.expect("{")
        symbols = []
        while not self.accept("}"):
            kind_tok = self.tok
            kind = self.name()
            if kind not in ("fn", "rel"):
                raise self.error("expected 'fn' or 'rel'", kind_tok)
            sym = self.name()
            self.expect("/")
            arity = self.nat()
            self.expect(";")
            if any(s.name == sym for s in symbols):
                raise self.error(f"duplicate symbol {sym!r}", kind_tok)
            symbols.append(Symbol(sym, FUNCTION if kind == "fn" else RELATION, arity))
        if name in ws.signatures:
            raise self.error(f"signature {name!r} declared twice", name_tok)
        ws.signatures[name] = Signature(tuple(symbols), name)

    def sig_ref(self, ws: Workspace) -> Signature:
        tok = self.tok
        name = self.name()
        if name not in ws.signatures:
            raise self.error(f"undeclared signature {name!r}", tok)
        return ws.signatures[name]

    def structure_decl(self, ws: Workspace):
        name_tok = self.tok
        name = self.name()
        self.expect(":")
        sig = self.sig_ref(ws)
        self.expect("{")
        size = None
        labels = None
        fns: dict[str, tuple[int, ...]] = {}
        rels: dict[str, frozenset] = {}
        while not self.accept("}"):
            tok = self.tok
            kw = self.name()
            if kw == "universe":
                size = self.nat()
                if size < 1:
                    raise self.error("universe must be nonempty", tok)
            elif kw == "labels":
                labels = [self.name()]
                while self.accept(","):
                    labels.append(self.name())
            elif kw in ("fn", "rel"):
                sym_tok = self.tok
                sym = self.name()
                if sym not in sig or sig[sym].is_function != (kw == "fn"):
                    raise self.error(f"{sym!r} is not a {'function' if kw == 'fn' else 'relation'} of {sig}", sym_tok, UnknownSymbol)
                self.expect("=")
                if kw == "fn":
                    fns[sym] = tuple(self.table())
                else:
                    rels[sym] = frozenset(self.tuple_set())
            else:
                raise self.error(f"unexpected {kw!r} in structure body", tok)
            self.expect(";")
        if size is None:
            raise self.error(f"structure {name!r} lacks a universe declaration", name_tok)
        missing = [s.name for s in sig.functions if s.name not in fns]
        if missing:
            raise self.error(f"structure {name!r} lacks tables for {missing}", name_tok)
        for s in sig.relations:
            rels.setdefault(s.name, frozenset())
        if name in ws.structures:
            raise self.error(f"structure {name!r} declared twice", name_tok)
        try:
            ws.structures[name] = FiniteStructure(sig, size, fns, rels, name, tuple(labels) if labels else None)
        except Exception as exc:
            raise self.error(str(exc), name_tok) from None

    def table(self) -> list[int]:
        self.expect("[")
        values: list[int] = []
        if self.accept("]"):
            return values
        while True:
            if self.at("["):
                values.extend(self.table())
            else:
                values.append(self.nat())
            if self.accept("]"):
                return values
            self.accept(",")

    def tuple_set(self) -> list[tuple[int, ...]]:
        self.expect("{")
        out = []
        while not self.accept("}"):
            if self.accept("("):
                items = []
                if not self.accept(")"):
                    items.append(self.nat())
                    while self.accept(","):
                        items.append(self.nat())
                    self.expect(")")
                out.append(tuple(items))
            else:
                out.append((self.nat(),))
            if not self.at("}"):
                self.expect(",")
        return out

    def formula_decl(self, ws: Workspace):
        name_tok = self.tok
        name = self.name()
        self.expect(":")
        sig_tok = self.tok
        sig = self.sig_ref(ws)
        self.expect("=")
        phi = self.clause(sig)
        self.accept(";")
        if name in ws.formulas:
            raise self.error(f"formula {name!r} declared twice", name_tok)
        ws.formulas[name] = phi
        ws.formula_sigs[name] = sig_tok.text


def parse_file(text: str, ws: Optional[Workspace] = None) -> Workspace:
    return _Parser(text).file(ws or Workspace())


def load(path) -> Workspace:
    with open(path, encoding="utf-8") as fh:
        return parse_file(fh.read())


def parse_formula(text: str, sig: Signature) -> HornFormula:
    """Parse one clause ``premises |- conclusion`` over ``sig``."""
    p = _Parser(text)
    phi = p.clause(sig)
    p.accept(";")
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after clause")
    return phi


def parse_term(text: str, sig: Signature) -> Term:
    p = _Parser(text)
    t = p.term(sig)
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after term")
    return t


def parse_subsets(text: str, n: int) -> list[int]:
    """Parse ``"{0,1};{1,2}"`` into bitmasks over ``{0..n-1}``."""
    masks = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if not (chunk.startswith("{") and chunk.endswith("}")):
            raise ParseError(f"subset literal must be braced: {chunk!r}")
        mask = 0
        for item in chunk[1:-1].split(","):
            item = item.strip()
            if not item:
                continue
            if not item.isdigit() or int(item) >= n:
                raise ParseError(f"index {item!r} out of range for n={n}")
            mask |= 1 << int(item)
        masks.append(mask)
    return masks


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from None


# -- writers ------------------------------------------------------------------


def signature_to_dsl(sig: Signature, name: Optional[str] = None) -> str:
    decls = " ".join(f"{'fn' if s.is_function else 'rel'} {s.name}/{s.arity};" for s in sig.symbols)
    return f"signature {name or sig.name or 'Sig'} {{ {decls} }}" if decls else f"signature {name or sig.name or 'Sig'} {{ }}"


def structure_to_dsl(A: FiniteStructure, name: Optional[str] = None, sig_name: Optional[str] = None) -> str:
    lines = [f"structure {name or A.name or 'S'} : {sig_name or A.sig.name or 'Sig'} {{", f"  universe {A.size};"]
    if A.labels:
        lines.append(f"  labels {', '.join(A.labels)};")
    for s in A.sig.functions:
        lines.append(f"  fn {s.name} = [{', '.join(map(str, A.functions[s.name]))}];")
    for s in A.sig.relations:
        tuples = sorted(A.relations[s.name])
        body = ", ".join("(" + ",".join(map(str, t)) + ")" for t in tuples)
        lines.append(f"  rel {s.name} = {{{body}}};")
    lines.append("}")
    return "\n".join(lines)


def formula_to_dsl(name: str, sig_name: str, phi: HornFormula) -> str:
    return f"formula {name} : {sig_name} = {phi}"
