"""Symbols, signatures, terms, and basic Horn clauses.

A basic Horn clause is kept in sequent form: a list of premise atoms (the
negated disjuncts) and an optional conclusion atom (the one positive
disjunct). All objects here are immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, NamedTuple, Optional, Sequence, Union

from .errors import SignatureError

FUNCTION = "function"
RELATION = "relation"
CONSTANT = "constant"
KINDS = (FUNCTION, RELATION, CONSTANT)

_POOL = ("x", "y", "z", "u", "v", "w")


def var_name(i: int) -> str:
    """Name of the i-th variable of the canonical pool: x, y, z, u, v, w, x6, ..."""
    return _POOL[i] if i < len(_POOL) else f"x{i}"


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str
    arity: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SignatureError(f"unknown symbol kind {self.kind!r}")
        if self.arity < 0:
            raise SignatureError(f"negative arity for {self.name}")
        if self.kind == CONSTANT and self.arity != 0:
            raise SignatureError(f"constant {self.name} must have arity 0")

    @property
    def is_function(self) -> bool:
        return self.kind != RELATION


@dataclass(frozen=True)
class Signature:
    symbols: tuple[Symbol, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        seen = set()
        for s in self.symbols:
            if s.name in seen:
                raise SignatureError(f"duplicate symbol {s.name!r}")
            seen.add(s.name)

    @classmethod
    def of(cls, name: str = "", functions=(), relations=()) -> Signature:
        """Build from ``(name, arity)`` pairs, functions first."""
        syms = [Symbol(n, FUNCTION, a) for n, a in functions]
        syms += [Symbol(n, RELATION, a) for n, a in relations]
        return cls(tuple(syms), name)

    @cached_property
    def _index(self) -> dict[str, Symbol]:
        return {s.name: s for s in self.symbols}

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __getitem__(self, name: str) -> Symbol:
        try:
            return self._index[name]
        except KeyError:
            raise SignatureError(f"unknown symbol {name!r}") from None

    @property
    def functions(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.is_function)

    @property
    def relations(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if not s.is_function)

    @property
    def names(self) -> frozenset[str]:
        return frozenset(self._index)

    def __str__(self):
        return self.name or "Σ"


@dataclass(frozen=True)
class ExpandedSignature(Signature):
    """``base`` plus one fresh constant per element of a universe.

    ``constants[k]`` names the constant denoting element ``k``.
    """

    base: Signature = field(default_factory=Signature)
    constants: tuple[str, ...] = ()

    @cached_property
    def element_of(self) -> dict[str, int]:
        return {c: k for k, c in enumerate(self.constants)}

    def constant(self, element: int) -> str:
        return self.constants[element]


def expand_signature(sig: Signature, universe_size: int, name_hint: str = "ȧ") -> ExpandedSignature:
    """Add constants ``hint0 .. hint{n-1}``; a name already used by ``sig`` gets ``_k`` appended."""
    if universe_size < 1:
        raise ValueError("universe_size must be positive")
    planned = [f"{name_hint}{i}" for i in range(universe_size)]
    taken = set(sig.names) | set(planned)
    names = []
    for name in planned:
        if name in sig.names:
            k = 1
            while f"{name}_{k}" in taken:
                k += 1
            name = f"{name}_{k}"
            taken.add(name)
        names.append(name)
    syms = sig.symbols + tuple(Symbol(n, CONSTANT, 0) for n in names)
    label = f"{sig.name}(A)" if sig.name else ""
    return ExpandedSignature(syms, label, base=sig, constants=tuple(names))


# -- terms and atoms --------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple[Term, ...] = ()

    def __str__(self):
        if not self.args:
            return self.symbol
        return f"{self.symbol}({','.join(map(str, self.args))})"


Term = Union[Var, App]


@dataclass(frozen=True)
class Rel:
    symbol: str
    args: tuple[Term, ...] = ()

    def __str__(self):
        if not self.args:
            return self.symbol
        return f"{self.symbol}({','.join(map(str, self.args))})"

    def terms(self) -> tuple[Term, ...]:
        return self.args


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __str__(self):
        return f"{self.left}={self.right}"

    def terms(self) -> tuple[Term, ...]:
        return (self.left, self.right)


Atom = Union[Rel, Eq]


def term_vars(t: Term) -> Iterator[str]:
    """Variables of ``t`` in left-to-right order, with repeats."""
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from term_vars(a)


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def atom_vars(atom: Atom) -> Iterator[str]:
    for t in atom.terms():
        yield from term_vars(t)


def substitute(t, mapping):
    """Rename variables (or replace them by terms) in a term or atom."""
    if isinstance(t, Var):
        new = mapping.get(t.name, t)
        return Var(new) if isinstance(new, str) else new
    if isinstance(t, App):
        return App(t.symbol, tuple(substitute(a, mapping) for a in t.args))
    if isinstance(t, Rel):
        return Rel(t.symbol, tuple(substitute(a, mapping) for a in t.args))
    return Eq(substitute(t.left, mapping), substitute(t.right, mapping))


def check_term(t: Term, sig: Signature) -> None:
    if isinstance(t, Var):
        return
    sym = sig[t.symbol]
    if not sym.is_function:
        raise SignatureError(f"{t.symbol} is a relation, not a function")
    if len(t.args) != sym.arity:
        raise SignatureError(f"{t.symbol} expects {sym.arity} arguments, got {len(t.args)}")
    for a in t.args:
        check_term(a, sig)


def check_atom(atom: Atom, sig: Signature) -> None:
    if isinstance(atom, Rel):
        sym = sig[atom.symbol]
        if sym.is_function:
            raise SignatureError(f"{atom.symbol} is a function, not a relation")
        if len(atom.args) != sym.arity:
            raise SignatureError(f"{atom.symbol} expects {sym.arity} arguments, got {len(atom.args)}")
    for t in atom.terms():
        check_term(t, sig)


# -- Horn clauses -------------------------------------------------------------


@dataclass(frozen=True)
class HornFormula:
    """``negatives |- positive``; ``positive`` is None for a headless clause."""

    negatives: tuple[Atom, ...] = ()
    positive: Optional[Atom] = None

    def __post_init__(self):
        object.__setattr__(self, "negatives", tuple(self.negatives))
        if not self.negatives and self.positive is None:
            raise ValueError("the empty clause is not a basic Horn formula")

    @cached_property
    def free_vars(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for atom in self.atoms():
            for v in atom_vars(atom):
                seen.setdefault(v)
        return tuple(seen)

    def atoms(self) -> tuple[Atom, ...]:
        return self.negatives + ((self.positive,) if self.positive is not None else ())

    @property
    def strict(self) -> bool:
        return self.positive is not None

    def check(self, sig: Signature) -> HornFormula:
        for atom in self.atoms():
            check_atom(atom, sig)
        return self

    def rename(self, mapping) -> HornFormula:
        pos = substitute(self.positive, mapping) if self.positive is not None else None
        return HornFormula(tuple(substitute(a, mapping) for a in self.negatives), pos)

    def __str__(self):
        head = str(self.positive) if self.positive is not None else "false"
        body = " & ".join(map(str, self.negatives))
        return f"{body} |- {head}" if body else f"|- {head}"


class Classification(NamedTuple):
    basic_horn: bool
    strict: bool
    identity: bool
    quasi_identity: bool


def classify(phi: HornFormula) -> Classification:
    strict = phi.positive is not None
    return Classification(
        basic_horn=True,
        strict=strict,
        identity=strict and not phi.negatives,
        quasi_identity=strict,
    )


def kind_label(phi: HornFormula) -> str:
    c = classify(phi)
    if c.identity:
        return "identity"
    return "quasi-identity" if c.quasi_identity else "horn"


def first_occurrence_renaming(phi: HornFormula) -> dict[str, str]:
    return {v: var_name(i) for i, v in enumerate(phi.free_vars)}


def atoms_over(sig: Signature, variables: Sequence[str], max_depth: int) -> list[Atom]:
    """Every atom over ``variables`` with terms of depth at most ``max_depth``.

    Equations are unordered: only ``s=t`` with ``s`` not after ``t`` in term order.
    """
    terms = terms_over(sig, variables, max_depth)
    atoms: list[Atom] = []
    for r in sig.relations:
        for args in _tuples(terms, r.arity):
            atoms.append(Rel(r.name, args))
    for i, s in enumerate(terms):
        for t in terms[i:]:
            atoms.append(Eq(s, t))
    return atoms


def terms_over(sig: Signature, variables: Sequence[str], max_depth: int) -> list[Term]:
    levels: list[list[Term]] = [[Var(v) for v in variables] + [App(f.name) for f in sig.functions if f.arity == 0]]
    allterms = list(levels[0])
    for _ in range(max_depth):
        new: list[Term] = []
        for f in sig.functions:
            if f.arity == 0:
                continue
            for args in _tuples(allterms, f.arity):
                t = App(f.name, args)
                # keep only terms whose depth is exactly the new level
                if any(a in levels[-1] for a in args):
                    new.append(t)
        levels.append(new)
        allterms.extend(new)
    return allterms


def _tuples(items, k):
    from itertools import product

    return product(items, repeat=k)
