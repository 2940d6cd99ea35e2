"""Finite Σ-structures and satisfaction of basic Horn clauses.

Universes are the canonical indices ``0..n-1``. A function table of arity k
is stored flattened in lexicographic argument order; relations are sets of
tuples. Satisfaction is decided by evaluating the clause over the whole
assignment grid at once with numpy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ResourceCapError, SignatureError, StructureError
from .syntax import (
    App,
    Atom,
    Eq,
    ExpandedSignature,
    HornFormula,
    Rel,
    Signature,
    Term,
    Var,
    check_atom,
)

MAX_ASSIGNMENTS = 10**6


@dataclass(frozen=True)
class FiniteStructure:
    sig: Signature
    size: int
    functions: Mapping[str, tuple[int, ...]]
    relations: Mapping[str, frozenset[tuple[int, ...]]]
    name: str = field(default="", compare=False)
    labels: Optional[tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        n = self.size
        if n < 1:
            raise StructureError("universe must be nonempty")
        fns = {k: tuple(int(x) for x in v) for k, v in self.functions.items()}
        rels = {k: frozenset(tuple(int(x) for x in t) for t in v) for k, v in self.relations.items()}
        expected_f = {s.name for s in self.sig.functions}
        expected_r = {s.name for s in self.sig.relations}
        if set(fns) != expected_f:
            raise StructureError(f"function tables {sorted(fns)} do not match signature {sorted(expected_f)}")
        if set(rels) != expected_r:
            raise StructureError(f"relation tables {sorted(rels)} do not match signature {sorted(expected_r)}")
        for s in self.sig.functions:
            table = fns[s.name]
            if len(table) != n**s.arity:
                raise StructureError(f"table for {s.name} has {len(table)} entries, expected {n ** s.arity}")
            if any(not 0 <= v < n for v in table):
                raise StructureError(f"table for {s.name} has a value outside the universe")
        for s in self.sig.relations:
            for t in rels[s.name]:
                if len(t) != s.arity or any(not 0 <= v < n for v in t):
                    raise StructureError(f"bad tuple {t} for relation {s.name}")
        if self.labels is not None and len(self.labels) != n:
            raise StructureError("labels must name every element")
        object.__setattr__(self, "functions", fns)
        object.__setattr__(self, "relations", rels)

    @classmethod
    def build(
        cls,
        sig: Signature,
        size: int,
        functions: Mapping[str, Callable[..., int]] = {},
        relations: Mapping[str, Iterable | Callable[..., bool]] = {},
        name: str = "",
    ) -> FiniteStructure:
        """Construct from Python callables (functions) and tuple sets or predicates (relations)."""
        fns = {}
        for s in sig.functions:
            f = functions[s.name]
            fns[s.name] = tuple(f(*args) for args in product(range(size), repeat=s.arity))
        rels = {}
        for s in sig.relations:
            r = relations[s.name]
            if callable(r):
                rels[s.name] = frozenset(a for a in product(range(size), repeat=s.arity) if r(*a))
            else:
                rels[s.name] = frozenset(tuple(t) for t in r)
        return cls(sig, size, fns, rels, name)

    def elements(self) -> range:
        return range(self.size)

    def apply(self, symbol: str, args: Sequence[int]) -> int:
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return self.functions[symbol][idx]

    def holds(self, symbol: str, args: Sequence[int]) -> bool:
        return tuple(args) in self.relations[symbol]

    @cached_property
    def _tables(self) -> dict[str, np.ndarray]:
        n = self.size
        out = {}
        for s in self.sig.functions:
            out[s.name] = np.array(self.functions[s.name], dtype=np.int64).reshape((n,) * s.arity)
        return out

    @cached_property
    def _rel_arrays(self) -> dict[str, np.ndarray]:
        n = self.size
        out = {}
        for s in self.sig.relations:
            arr = np.zeros((n,) * s.arity, dtype=bool)
            for t in self.relations[s.name]:
                arr[t] = True
            out[s.name] = arr
        return out

    def table(self, symbol: str) -> np.ndarray:
        return self._tables[symbol]

    def rel_array(self, symbol: str) -> np.ndarray:
        return self._rel_arrays[symbol]

    def label(self, element: int) -> str:
        return self.labels[element] if self.labels else str(element)

    def renamed(self, name: str) -> FiniteStructure:
        return FiniteStructure(self.sig, self.size, self.functions, self.relations, name, self.labels)

    def __repr__(self):
        return f"FiniteStructure({self.name or '?'}: {self.sig}, size={self.size})"


class StructureCatalog:
    """A finite, named list of structures over one signature."""

    def __init__(self, sig: Signature, members: Iterable[FiniteStructure] = ()):
        self.sig = sig
        self.members = tuple(members)
        names = [m.name for m in self.members]
        if len(set(names)) != len(names):
            raise StructureError(f"catalog names must be unique: {names}")
        for m in self.members:
            if m.sig != sig:
                raise SignatureError(f"{m.name} is not over signature {sig}")

    @classmethod
    def of(cls, *members: FiniteStructure) -> StructureCatalog:
        if not members:
            raise ValueError("use StructureCatalog(sig) for an empty catalog")
        return cls(members[0].sig, members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def with_member(self, m: FiniteStructure) -> StructureCatalog:
        return StructureCatalog(self.sig, self.members + (m,))


# -- evaluation ---------------------------------------------------------------


def eval_term(A, asg: Mapping[str, object], t: Term):
    """Evaluate ``t`` in ``A`` (any object with ``apply``) under ``asg``."""
    if isinstance(t, Var):
        try:
            return asg[t.name]
        except KeyError:
            raise SignatureError(f"unbound variable {t.name}") from None
    if t.symbol not in A.sig:
        raise SignatureError(f"unknown symbol {t.symbol!r}")
    return A.apply(t.symbol, [eval_term(A, asg, a) for a in t.args])


def eval_atom(A, asg: Mapping[str, object], atom: Atom) -> bool:
    if isinstance(atom, Eq):
        return eval_term(A, asg, atom.left) == eval_term(A, asg, atom.right)
    if atom.symbol not in A.sig:
        raise SignatureError(f"unknown symbol {atom.symbol!r}")
    return A.holds(atom.symbol, [eval_term(A, asg, a) for a in atom.args])


def holds_at(A, phi: HornFormula, asg: Mapping[str, object]) -> bool:
    """Truth of the clause at one assignment, by direct recursive evaluation."""
    if any(not eval_atom(A, asg, a) for a in phi.negatives):
        return True
    return phi.positive is not None and eval_atom(A, asg, phi.positive)


def _grid_term(A: FiniteStructure, t: Term, axes: Mapping[str, np.ndarray]):
    if isinstance(t, Var):
        return axes[t.name]
    children = tuple(_grid_term(A, a, axes) for a in t.args)
    return A.table(t.symbol)[children]


def atom_grid(A: FiniteStructure, atom: Atom, variables: Sequence[str]) -> np.ndarray:
    """Truth of ``atom`` at every assignment of ``variables`` (axis i = variable i)."""
    k = len(variables)
    n = A.size
    axes = {}
    for i, v in enumerate(variables):
        shape = [1] * k
        shape[i] = n
        axes[v] = np.arange(n).reshape(shape)
    if isinstance(atom, Eq):
        out = _grid_term(A, atom.left, axes) == _grid_term(A, atom.right, axes)
    else:
        children = tuple(_grid_term(A, a, axes) for a in atom.args)
        out = A.rel_array(atom.symbol)[children]
    return np.broadcast_to(out, (n,) * k)


class GridPlan:
    """Atoms compiled for repeated evaluation over assignment grids.

    Each distinct term becomes one row of values; atoms become gathers over
    those rows, so evaluating in a structure is a fixed sequence of numpy
    operations.
    """

    def __init__(self, atoms: Sequence[Atom], variables: Sequence[str]):
        self.atoms = tuple(atoms)
        self.variables = tuple(variables)
        index: dict = {}
        self.steps: list[tuple] = []  # ("var", position) or (symbol, child rows)

        def row(t) -> int:
            got = index.get(t)
            if got is None:
                if isinstance(t, Var):
                    step = ("var", self.variables.index(t.name))
                else:
                    step = (t.symbol, tuple(row(a) for a in t.args))
                got = index[t] = len(self.steps)
                self.steps.append(step)
            return got

        eqs: list[tuple[int, int, int]] = []
        rels: dict[str, list] = {}
        for i, atom in enumerate(self.atoms):
            if isinstance(atom, Eq):
                eqs.append((i, row(atom.left), row(atom.right)))
            else:
                rels.setdefault(atom.symbol, []).append((i, [row(a) for a in atom.args]))
        self.eqs = tuple(np.array(c, dtype=np.int64) for c in zip(*eqs)) if eqs else None
        self.rels = {
            sym: (np.array([i for i, _ in group]), np.array([a for _, a in group], dtype=np.int64).reshape(len(group), -1))
            for sym, group in rels.items()
        }

    def evaluate(self, A: FiniteStructure) -> np.ndarray:
        """Truth of every atom at every assignment, shape (atoms, |A|^k), row-major grid."""
        k = len(self.variables)
        n = A.size
        points = n**k
        coords = np.indices((n,) * k, dtype=np.int32).reshape(k, points)
        vals = np.empty((len(self.steps), points), dtype=np.int32)
        for r, (head, arg) in enumerate(self.steps):
            if head == "var":
                vals[r] = coords[arg]
                continue
            flat = np.zeros(points, dtype=np.int32)
            for c in arg:
                flat = flat * n + vals[c]
            vals[r] = A.table(head).reshape(-1)[flat]
        out = np.empty((len(self.atoms), points), dtype=bool)
        if self.eqs is not None:
            where, left, right = self.eqs
            out[where] = vals[left] == vals[right]
        for symbol, (where, args) in self.rels.items():
            rel = A.rel_array(symbol).reshape(-1)
            flat = np.zeros((len(where), points), dtype=np.int32)
            for j in range(args.shape[1]):
                flat = flat * n + vals[args[:, j]]
            out[where] = rel[flat]
        return out


def atom_grids(A: FiniteStructure, atoms: Sequence[Atom], variables: Sequence[str]) -> np.ndarray:
    """Stacked, flattened :func:`atom_grid` of every atom (see :class:`GridPlan`)."""
    return GridPlan(atoms, variables).evaluate(A)


def clause_grid(A: FiniteStructure, phi: HornFormula, variables: Sequence[str]) -> np.ndarray:
    n, k = A.size, len(variables)
    out = np.zeros((n,) * k, dtype=bool)
    for a in phi.negatives:
        out |= ~atom_grid(A, a, variables)
    if phi.positive is not None:
        out |= atom_grid(A, phi.positive, variables)
    return out


class SatResult(NamedTuple):
    holds: bool
    witness: Optional[dict[str, int]]


def satisfies(A: FiniteStructure, phi: HornFormula, max_assignments: int = MAX_ASSIGNMENTS) -> SatResult:
    """Decide ``A ⊨ phi`` under the universal reading.

    On failure the witness is the lexicographically least falsifying
    assignment of ``phi.free_vars``.
    """
    for atom in phi.atoms():
        check_atom(atom, A.sig)
    variables = phi.free_vars
    if A.size ** len(variables) > max_assignments:
        raise ResourceCapError(
            f"{A.size}^{len(variables)} assignments exceed the cap of {max_assignments}"
        )
    grid = clause_grid(A, phi, variables)
    if grid.all():
        return SatResult(True, None)
    first = int(np.argmin(grid.reshape(-1)))
    point = np.unravel_index(first, grid.shape) if variables else ()
    return SatResult(False, {v: int(p) for v, p in zip(variables, point)})


class ClassResult(NamedTuple):
    holds: bool
    failing_member: Optional[str]
    witness: Optional[dict[str, int]]


def class_satisfies(K: StructureCatalog, phi: HornFormula, max_assignments: int = MAX_ASSIGNMENTS) -> ClassResult:
    for atom in phi.atoms():
        check_atom(atom, K.sig)
    for M in K:
        res = satisfies(M, phi, max_assignments)
        if not res.holds:
            return ClassResult(False, M.name, res.witness)
    return ClassResult(True, None, None)


def unit_structure(sig: Signature, name: str = "unit") -> FiniteStructure:
    fns = {s.name: (0,) for s in sig.functions}
    rels = {s.name: frozenset({(0,) * s.arity}) for s in sig.relations}
    return FiniteStructure(sig, 1, fns, rels, name)


def reduct(B):
    """Forget the expansion constants of a structure over an expanded signature."""
    if not isinstance(B, FiniteStructure):
        return B.reduct()
    if not isinstance(B.sig, ExpandedSignature):
        raise SignatureError("reduct needs a structure over an expanded signature")
    base = B.sig.base
    fns = {s.name: B.functions[s.name] for s in base.functions}
    rels = {s.name: B.relations[s.name] for s in base.relations}
    return FiniteStructure(base, B.size, fns, rels, B.name, B.labels)
