"""Substructures, products, filters, reduced products, expansions and diagrams.

Products are lazy: elements are tuples and the operations are computed
componentwise on demand, so a construction can be used as the target of a
morphism without listing its (possibly huge) universe. ``carrier``
materializes the explicit finite structure when it fits the caps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from itertools import product
from math import prod
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

from .codes import ProductCodec, closure_codes, tabulate_codes
from .errors import FIPViolation, ResourceCapError, SignatureError, StructureError
from .morphisms import EMBEDDING, HOM, Morphism, check_morphism
from .structures import FiniteStructure, unit_structure
from .syntax import App, Atom, Eq, ExpandedSignature, Rel, Signature, expand_signature

MAX_PRODUCT = 10**5
MAX_TABLE = 10**6
MAX_FILTER_INDEX = 16


# -- filters -----------------------------------------------------------------


@dataclass(frozen=True)
class FilterOnFiniteSet:
    """A proper filter over ``{0..n-1}``.

    Every filter on a finite set is principal, so it is stored by its
    least member ``core``; ``members`` lists it extensionally as bitmasks.
    """

    index_size: int
    core: int

    def __post_init__(self):
        full = (1 << self.index_size) - 1
        if self.index_size < 0 or self.core & ~full:
            raise ValueError("core must be a subset of the index set")
        if self.core == 0:
            raise ValueError("a proper filter cannot contain the empty set")

    @classmethod
    def trivial(cls, n: int) -> FilterOnFiniteSet:
        return cls(n, (1 << n) - 1)

    @classmethod
    def principal(cls, n: int, indices: Iterable[int]) -> FilterOnFiniteSet:
        return cls(n, reduce(lambda m, i: m | 1 << i, indices, 0))

    @classmethod
    def from_members(cls, n: int, members: Iterable[int]) -> FilterOnFiniteSet:
        members = frozenset(members)
        problems = filter_law_violations(n, members)
        if problems:
            raise ValueError("not a proper filter: " + "; ".join(problems))
        return cls(n, reduce(lambda a, b: a & b, members, (1 << n) - 1))

    @property
    def full(self) -> int:
        return (1 << self.index_size) - 1

    def __contains__(self, mask: int) -> bool:
        return self.core & ~mask == 0

    @property
    def core_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.index_size) if self.core >> i & 1)

    @cached_property
    def members(self) -> frozenset[int]:
        if self.index_size > MAX_FILTER_INDEX:
            raise ResourceCapError(f"extensional filter over {self.index_size} > {MAX_FILTER_INDEX} indices")
        free = self.full & ~self.core
        out = []
        sub = free
        while True:
            out.append(self.core | sub)
            if sub == 0:
                break
            sub = (sub - 1) & free
        return frozenset(out)

    def __str__(self):
        from .errors import format_subset

        return f"⟨{format_subset(self.core, self.index_size)}⟩"


def filter_law_violations(n: int, members: frozenset[int]) -> list[str]:
    """Check the proper-filter laws extensionally; returns a list of failures."""
    full = (1 << n) - 1
    problems = []
    if full not in members:
        problems.append("missing the full index set")
    if 0 in members:
        problems.append("contains the empty set")
    for m in members:
        if m & ~full:
            problems.append(f"{m:b} is not a subset of the index set")
            continue
        for extra in range(full + 1):
            if (m | extra) not in members:
                problems.append(f"not upward closed at {m:b}")
                break
    for a in members:
        for b in members:
            if a & b not in members:
                problems.append(f"not closed under {a:b}∩{b:b}")
                return problems
    return problems


def filter_from_generators(n: int, gens: Iterable[int]) -> FilterOnFiniteSet:
    """The filter generated by ``gens`` over ``{0..n-1}``.

    Raises :class:`FIPViolation` naming a minimal subfamily with empty
    intersection.
    """
    if n < 1:
        raise ValueError("index set must be nonempty")
    gens = list(gens)
    full = (1 << n) - 1
    acc = full
    for k, g in enumerate(gens):
        acc &= g
        if acc == 0:
            family = gens[: k + 1]
            # drop generators whose removal keeps the intersection empty
            i = 0
            while i < len(family):
                rest = family[:i] + family[i + 1 :]
                if reduce(lambda a, b: a & b, rest, full) == 0:
                    family = rest
                else:
                    i += 1
            raise FIPViolation(family, n)
    return FilterOnFiniteSet(n, acc)


def all_proper_filters(n: int) -> list[FilterOnFiniteSet]:
    return [FilterOnFiniteSet(n, core) for core in range(1, 1 << n)]


# -- substructures -------------------------------------------------------------


class Substructure(NamedTuple):
    structure: FiniteStructure
    inclusion: Morphism


def generated_substructure(B, seed: Iterable, max_size: int = MAX_PRODUCT, name: str = "") -> Substructure:
    """The least subset of ``B`` containing ``seed`` and closed under every function.

    Elements of the result are numbered in ascending order of the ``B``
    elements they stand for; ``inclusion`` is the verified embedding.
    """
    members = set(seed)
    sig = B.sig
    for s in sig.functions:
        if s.arity == 0:
            members.add(B.apply(s.name, ()))
    if not members:
        raise StructureError("empty seed over a signature without constants")
    if len(members) > max_size:
        raise ResourceCapError(f"generated substructure exceeds {max_size} elements")
    if ProductCodec.supports(B):
        return _generated_in_product(B, members, max_size, name)
    order = list(members)
    old = 0
    while old < len(order):
        new = len(order)
        for s in sig.functions:
            if s.arity == 0:
                continue
            for j in range(s.arity):
                ranges = [range(old)] * j + [range(old, new)] + [range(new)] * (s.arity - j - 1)
                for args in product(*ranges):
                    e = B.apply(s.name, [order[i] for i in args])
                    if e not in members:
                        if len(order) >= max_size:
                            raise ResourceCapError(f"generated substructure exceeds {max_size} elements")
                        members.add(e)
                        order.append(e)
        old = new
    elems = sorted(order)
    pos = {e: i for i, e in enumerate(elems)}
    n = len(elems)
    fns = {}
    for s in sig.functions:
        if n**s.arity > MAX_TABLE:
            raise ResourceCapError(f"table for {s.name} would have {n ** s.arity} entries")
        fns[s.name] = tuple(pos[B.apply(s.name, [elems[i] for i in args])] for args in product(range(n), repeat=s.arity))
    rels = {}
    for s in sig.relations:
        if isinstance(B, FiniteStructure):
            rels[s.name] = frozenset(tuple(pos[v] for v in t) for t in B.relations[s.name] if all(v in pos for v in t))
        else:
            if n**s.arity > MAX_TABLE:
                raise ResourceCapError(f"relation {s.name} would need {n ** s.arity} checks")
            rels[s.name] = frozenset(
                args for args in product(range(n), repeat=s.arity) if B.holds(s.name, [elems[i] for i in args])
            )
    C = FiniteStructure(sig, n, fns, rels, name or (f"sub_{B.name}" if getattr(B, "name", "") else ""))
    return Substructure(C, check_morphism(elems, C, B, EMBEDDING))


def _generated_in_product(B, members: set, max_size: int, name: str) -> Substructure:
    # same result as the generic loop, computed on integer codes
    codec = ProductCodec(B.factors)
    functions = [(s.name, s.arity) for s in B.sig.functions if s.arity]
    codes = closure_codes(codec, functions, sorted(codec.encode(t) for t in members), max_size)
    fns, rels = tabulate_codes(codec, B.sig, codes, MAX_TABLE)
    C = FiniteStructure(B.sig, len(codes), fns, rels, name or (f"sub_{B.name}" if B.name else ""))
    elems = [codec.decode(c) for c in codes.tolist()]
    return Substructure(C, check_morphism(elems, C, B, EMBEDDING))


# -- products -------------------------------------------------------------------


def _common_sig(factors: Sequence, sig: Optional[Signature]) -> Signature:
    if not factors:
        if sig is None:
            raise SignatureError("an empty product needs an explicit signature")
        return sig
    s0 = factors[0].sig
    for F in factors[1:]:
        if F.sig != s0:
            raise SignatureError(f"factors over different signatures: {s0} vs {F.sig}")
    if sig is not None and sig != s0:
        raise SignatureError(f"factors are over {s0}, not {sig}")
    return s0


class ProductStructure:
    """Direct product of finite structures; elements are tuples indexed by factor."""

    componentwise = True

    def __init__(self, factors: Sequence[FiniteStructure], sig: Optional[Signature] = None, name: str = ""):
        self.factors = tuple(factors)
        self.sig = _common_sig(self.factors, sig)
        self.name = name or "×".join(F.name or "?" for F in self.factors) or "unit"

    @property
    def size(self) -> int:
        return prod(F.size for F in self.factors)

    def apply(self, symbol: str, args: Sequence[tuple]) -> tuple:
        return tuple(F.apply(symbol, [a[i] for a in args]) for i, F in enumerate(self.factors))

    def holds(self, symbol: str, args: Sequence[tuple]) -> bool:
        return all(F.holds(symbol, [a[i] for a in args]) for i, F in enumerate(self.factors))

    def elements(self):
        return product(*(range(F.size) for F in self.factors))

    def index(self, t: Sequence[int]) -> int:
        idx = 0
        for v, F in zip(t, self.factors):
            idx = idx * F.size + v
        return idx

    def element(self, idx: int) -> tuple:
        out = []
        for F in reversed(self.factors):
            idx, v = divmod(idx, F.size)
            out.append(v)
        return tuple(reversed(out))

    def reduct(self) -> ProductStructure:
        from .structures import reduct

        base = self.sig.base if isinstance(self.sig, ExpandedSignature) else None
        if base is None:
            raise SignatureError("reduct needs an expanded signature")
        return ProductStructure([reduct(F) for F in self.factors], base, self.name)

    def materialize(self, max_product: int = MAX_PRODUCT) -> FiniteStructure:
        return self._build(max_product)

    @cached_property
    def carrier(self) -> FiniteStructure:
        """The explicit product; element ``k`` is ``self.element(k)``."""
        return self._build(MAX_PRODUCT)

    def _build(self, cap: int) -> FiniteStructure:
        n = self.size
        if n > cap:
            raise ResourceCapError(f"product has {n} elements, over the cap of {cap}")
        elems = list(self.elements())
        return _tabulate(self, elems, {e: i for i, e in enumerate(elems)}.__getitem__, self.name)

    def projection(self, i: int) -> Morphism:
        C = self.carrier
        return check_morphism([self.element(k)[i] for k in range(C.size)], C, self.factors[i], HOM)

    def __repr__(self):
        return f"ProductStructure({self.name}, factors={len(self.factors)})"


def _tabulate(S, elems: list, locate, name: str) -> FiniteStructure:
    n = len(elems)
    fns = {}
    for s in S.sig.functions:
        if n**s.arity > MAX_TABLE:
            raise ResourceCapError(f"table for {s.name} would have {n ** s.arity} entries")
        fns[s.name] = tuple(locate(S.apply(s.name, [elems[i] for i in args])) for args in product(range(n), repeat=s.arity))
    rels = {}
    for s in S.sig.relations:
        if n**s.arity > MAX_TABLE:
            raise ResourceCapError(f"relation {s.name} would need {n ** s.arity} checks")
        rels[s.name] = frozenset(args for args in product(range(n), repeat=s.arity) if S.holds(s.name, [elems[i] for i in args]))
    return FiniteStructure(S.sig, n, fns, rels, name)


def direct_product(factors: Sequence[FiniteStructure], sig: Optional[Signature] = None, max_product: int = MAX_PRODUCT) -> ProductStructure:
    """Componentwise product; the empty product is the unit over ``sig``."""
    P = ProductStructure(factors, sig)
    if P.size > max_product:
        raise ResourceCapError(f"product has {P.size} elements, over the cap of {max_product}")
    return P


class ReducedProductStructure:
    """Product modulo a filter.

    Elements are class representatives: the lexicographically least tuple
    of each class, which agrees with its class on the filter core and is
    0 elsewhere. A relation holds on a tuple of elements when the set of
    indices where it holds belongs to the filter.
    """

    def __init__(self, factors: Sequence[FiniteStructure], F: FilterOnFiniteSet, sig: Optional[Signature] = None, name: str = ""):
        self.factors = tuple(factors)
        if not self.factors:
            raise ValueError("a reduced product needs at least one factor")
        if F.index_size != len(self.factors):
            raise ValueError(f"filter over {F.index_size} indices for {len(self.factors)} factors")
        self.filter = F
        self.sig = _common_sig(self.factors, sig)
        self.core = F.core_indices
        self.name = name or f"({'×'.join(f.name or '?' for f in self.factors)})/{F}"

    def agreement(self, s: Sequence[int], t: Sequence[int]) -> int:
        return sum(1 << i for i, (a, b) in enumerate(zip(s, t)) if a == b)

    def equivalent(self, s, t) -> bool:
        return self.agreement(s, t) in self.filter

    def rep(self, t: Sequence[int]) -> tuple:
        keep = self.filter.core
        return tuple(v if keep >> i & 1 else 0 for i, v in enumerate(t))

    def apply(self, symbol: str, args: Sequence[tuple]) -> tuple:
        return self.rep(F.apply(symbol, [a[i] for a in args]) for i, F in enumerate(self.factors))

    def truth_set(self, symbol: str, args: Sequence[tuple]) -> int:
        return sum(1 << i for i, F in enumerate(self.factors) if F.holds(symbol, [a[i] for a in args]))

    def holds(self, symbol: str, args: Sequence[tuple]) -> bool:
        return self.truth_set(symbol, args) in self.filter

    @property
    def size(self) -> int:
        return prod(self.factors[i].size for i in self.core)

    @property
    def full_size(self) -> int:
        return prod(F.size for F in self.factors)

    def class_reps(self) -> list[tuple]:
        ranges = [range(F.size) if i in self.core else range(1) for i, F in enumerate(self.factors)]
        return list(product(*ranges))

    def quotient(self, t: Sequence[int]) -> int:
        idx = 0
        for i in self.core:
            idx = idx * self.factors[i].size + t[i]
        return idx

    def reduct(self) -> ReducedProductStructure:
        from .structures import reduct

        if not isinstance(self.sig, ExpandedSignature):
            raise SignatureError("reduct needs an expanded signature")
        return ReducedProductStructure([reduct(F) for F in self.factors], self.filter, self.sig.base, self.name)

    @cached_property
    def carrier(self) -> FiniteStructure:
        return self.materialize()

    def materialize(self, max_product: int = MAX_PRODUCT) -> FiniteStructure:
        if self.size > max_product:
            raise ResourceCapError(f"reduced product has {self.size} classes, over the cap of {max_product}")
        reps = self.class_reps()
        return _tabulate(self, reps, self.quotient, self.name)

    def verify_well_defined(self, carrier: Optional[FiniteStructure] = None, max_checks: int = MAX_TABLE) -> None:
        """Check exhaustively that the carrier does not depend on representatives.

        Every tuple must be equivalent to its representative, representatives
        must be pairwise inequivalent, and for every symbol and every tuple of
        arbitrary product elements the operation agrees with the carrier
        after quotienting. Raises AssertionError on the first discrepancy.
        """
        C = carrier if carrier is not None else self.carrier
        N = self.full_size
        tuples = list(product(*(range(F.size) for F in self.factors)))
        reps = self.class_reps()
        for t in tuples:
            assert self.equivalent(t, self.rep(t)), f"{t} not equivalent to its representative"
        for i, r in enumerate(reps):
            for s in reps[i + 1 :]:
                assert not self.equivalent(r, s), f"representatives {r} and {s} are equivalent"
        for s in self.sig.symbols:
            if N**s.arity > max_checks:
                raise ResourceCapError(f"{N}^{s.arity} checks for {s.name} exceed {max_checks}")
            for args in product(tuples, repeat=s.arity):
                q = [self.quotient(a) for a in args]
                if s.is_function:
                    raw = tuple(F.apply(s.name, [a[i] for a in args]) for i, F in enumerate(self.factors))
                    assert self.quotient(raw) == C.apply(s.name, q), f"{s.name} depends on representatives at {args}"
                else:
                    assert self.holds(s.name, args) == C.holds(s.name, q), f"{s.name} depends on representatives at {args}"

    def __repr__(self):
        return f"ReducedProductStructure({self.name})"


def reduced_product(
    factors: Sequence[FiniteStructure],
    F: FilterOnFiniteSet,
    max_product: int = MAX_PRODUCT,
    verify: bool = True,
) -> ReducedProductStructure:
    """Reduced product of ``factors`` modulo ``F``.

    When the full product is small enough the carrier is materialized and
    checked to be independent of representatives.
    """
    R = ReducedProductStructure(factors, F)
    if R.size > max_product:
        raise ResourceCapError(f"reduced product has {R.size} classes, over the cap of {max_product}")
    if verify and R.full_size <= max_product:
        try:
            R.verify_well_defined(R.materialize(max_product))
        except ResourceCapError:
            pass
    return R


# -- expansions and diagrams --------------------------------------------------------


def expand_structure(M: FiniteStructure, sig: ExpandedSignature, const_map: Union[Sequence[int], Mapping[str, int]]) -> FiniteStructure:
    """Interpret the expansion constants of ``sig`` in ``M``."""
    if M.sig != sig.base:
        raise SignatureError(f"{M.name or 'structure'} is not over {sig.base}")
    if isinstance(const_map, Mapping):
        missing = [c for c in sig.constants if c not in const_map]
        if missing:
            raise StructureError(f"no value for constants {missing}")
        values = [const_map[c] for c in sig.constants]
    else:
        values = list(const_map)
        if len(values) != len(sig.constants):
            raise StructureError(f"{len(values)} values for {len(sig.constants)} constants")
    for c, v in zip(sig.constants, values):
        if not 0 <= v < M.size:
            raise StructureError(f"value {v} for {c} outside the universe")
    fns = dict(M.functions)
    fns.update({c: (v,) for c, v in zip(sig.constants, values)})
    return FiniteStructure(sig, M.size, fns, M.relations, M.name, M.labels)


def self_expansion(A: FiniteStructure, sig: Optional[ExpandedSignature] = None) -> FiniteStructure:
    sig = sig or expand_signature(A.sig, A.size)
    return expand_structure(A, sig, range(A.size))


@dataclass(frozen=True)
class Diagram:
    """Flat atomic diagram over Σ(A).

    ``negative`` holds the atoms whose negations belong to diag⁻.
    """

    expanded_sig: ExpandedSignature
    positive: tuple[Atom, ...]
    negative: tuple[Atom, ...]

    def sentences(self):
        """``(atom, negated)`` pairs: positives first, then negatives."""
        for a in self.positive:
            yield a, False
        for a in self.negative:
            yield a, True


def diagram(A: FiniteStructure, sig: Optional[ExpandedSignature] = None) -> Diagram:
    """Flat positive and negative diagram of ``A``.

    Positive: relation facts, then function facts ``f(ȧ..)=ḃ``. Negative:
    distinctness ``ȧ≠ḃ`` for a<b, absent relation facts, then wrong function
    values. Reflexive equations are left out.
    """
    sig = sig or expand_signature(A.sig, A.size)
    if sig.base != A.sig or len(sig.constants) != A.size:
        raise SignatureError("expanded signature does not match the structure")
    c = [App(name) for name in sig.constants]
    n = A.size
    pos: list[Atom] = []
    neg: list[Atom] = [Eq(c[a], c[b]) for a in range(n) for b in range(a + 1, n)]
    for s in A.sig.relations:
        for args in product(range(n), repeat=s.arity):
            atom = Rel(s.name, tuple(c[a] for a in args))
            (pos if A.holds(s.name, args) else neg).append(atom)
    for s in A.sig.functions:
        for args in product(range(n), repeat=s.arity):
            lhs = App(s.name, tuple(c[a] for a in args))
            v = A.apply(s.name, args)
            pos.append(Eq(lhs, c[v]))
            neg.extend(Eq(lhs, c[b]) for b in range(n) if b != v)
    return Diagram(sig, tuple(pos), tuple(neg))


def flat_atom_count(A: FiniteStructure) -> int:
    n = A.size
    total = n * (n - 1) // 2
    total += sum(n**s.arity for s in A.sig.relations)
    total += sum(n**s.arity * n for s in A.sig.functions)
    return total


def unit_product(sig: Signature) -> FiniteStructure:
    return direct_product([], sig).carrier.renamed("unit")


__all__ = [
    "FilterOnFiniteSet",
    "filter_from_generators",
    "filter_law_violations",
    "all_proper_filters",
    "generated_substructure",
    "Substructure",
    "ProductStructure",
    "direct_product",
    "ReducedProductStructure",
    "reduced_product",
    "expand_structure",
    "self_expansion",
    "Diagram",
    "diagram",
    "flat_atom_count",
    "unit_structure",
]
