"""Homomorphisms, embeddings and isomorphisms between finite structures.

Targets may be any structure-like object exposing ``sig``, ``apply`` and
``holds`` (finite structures, or the lazy products in
:mod:`fmw.constructions`); sources are always explicit finite structures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .codes import ProductCodec, all_tuples, fresh_index_batches
from .errors import DiagramViolation, MorphismViolation, QuotientConflict, ResourceCapError, SignatureError
from .structures import FiniteStructure, eval_atom, eval_term, reduct
from .syntax import App, Eq, ExpandedSignature, Rel

HOM = "hom"
EMBEDDING = "embedding"
ISO = "iso"
KINDS = (HOM, EMBEDDING, ISO)

MAX_SEARCH = 10**6


@dataclass(frozen=True)
class Morphism:
    source: FiniteStructure
    target: object
    map: tuple
    kind: str = HOM

    def __call__(self, a):
        return self.map[a]

    def __repr__(self):
        return f"Morphism({self.kind}: {list(self.map)})"


def check_morphism(h: Sequence, A: FiniteStructure, B, kind: str = HOM) -> Morphism:
    """Verify ``h`` as a morphism of the given kind or raise :class:`MorphismViolation`.

    Function symbols and relations are checked over the signature of ``A``.
    Embeddings must be injective and reflect relations; isomorphisms must
    additionally be onto a finite target.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown morphism kind {kind!r}")
    if A.sig != B.sig:
        for s in A.sig.symbols:
            if s.name not in B.sig or B.sig[s.name].arity != s.arity or B.sig[s.name].is_function != s.is_function:
                raise SignatureError(f"{s.name} of {A.sig} missing from target signature {B.sig}")
    h = tuple(h)
    if len(h) != A.size:
        raise MorphismViolation(f"map has {len(h)} entries for a source of size {A.size}")
    if isinstance(B, FiniteStructure) and any(not (isinstance(v, int) and 0 <= v < B.size) for v in h):
        raise MorphismViolation("map value outside the target universe")
    strong = kind in (EMBEDDING, ISO)
    if _codable(h, B):
        _check_into_product(h, A, B, strong)
    else:
        for s in A.sig.functions:
            for args in product(range(A.size), repeat=s.arity):
                lhs = h[A.apply(s.name, args)]
                rhs = B.apply(s.name, [h[a] for a in args])
                if lhs != rhs:
                    raise MorphismViolation(f"{s.name} not preserved", s.name, args)
        for s in A.sig.relations:
            if strong:
                for args in product(range(A.size), repeat=s.arity):
                    src = A.holds(s.name, args)
                    tgt = B.holds(s.name, [h[a] for a in args])
                    if src and not tgt:
                        raise MorphismViolation(f"{s.name} not preserved", s.name, args)
                    if tgt and not src:
                        raise MorphismViolation(f"{s.name} not reflected", s.name, args)
            else:
                for args in sorted(A.relations[s.name]):
                    if not B.holds(s.name, [h[a] for a in args]):
                        raise MorphismViolation(f"{s.name} not preserved", s.name, args)
    if strong and len(set(h)) != len(h):
        first = next(i for i, v in enumerate(h) if h.index(v) != i)
        raise MorphismViolation(f"not injective: {h.index(h[first])} and {first} both map to {h[first]}")
    if kind == ISO:
        if not isinstance(B, FiniteStructure):
            raise TypeError("isomorphism checks need a finite target")
        if len(set(h)) != B.size:
            raise MorphismViolation("not surjective")
    return Morphism(A, B, h, kind)


def _codable(h: tuple, B) -> bool:
    if not ProductCodec.supports(B) or not h:
        return False
    sizes = [F.size for F in B.factors]
    return all(
        isinstance(v, tuple) and len(v) == len(sizes) and all(isinstance(x, int) and 0 <= x < n for x, n in zip(v, sizes))
        for v in h
    )


def _check_into_product(h: tuple, A: FiniteStructure, B, strong: bool) -> None:
    """The function and relation conditions of :func:`check_morphism`, vectorized over a product target.

    The first violation reported is the one the plain loops would find.
    """
    codec = ProductCodec(B.factors)
    codes = np.array([codec.encode(v) for v in h], dtype=np.int64)
    for s in A.sig.functions:
        grid = all_tuples(A.size, s.arity)
        lhs = codes[np.asarray(A.functions[s.name], dtype=np.int64)]
        rhs = codec.apply(s.name, [codes[grid[:, p]] for p in range(s.arity)])
        bad = np.flatnonzero(lhs != rhs)
        if len(bad):
            raise MorphismViolation(f"{s.name} not preserved", s.name, tuple(grid[bad[0]].tolist()))
    for s in A.sig.relations:
        grid = all_tuples(A.size, s.arity)
        src = A.rel_array(s.name).reshape(-1)
        tgt = codec.holds(s.name, [codes[grid[:, p]] for p in range(s.arity)])
        bad = np.flatnonzero(src != tgt if strong else src & ~tgt)
        if len(bad):
            args = tuple(grid[bad[0]].tolist())
            verb = "preserved" if src[bad[0]] else "reflected"
            raise MorphismViolation(f"{s.name} not {verb}", s.name, args)


def is_morphism(h, A, B, kind=HOM) -> bool:
    try:
        check_morphism(h, A, B, kind)
    except MorphismViolation:
        return False
    return True


class _Constraint(NamedTuple):
    kind: str  # "fn", "rel", "nrel"
    symbol: str
    args: tuple
    value: Optional[int]


def _constraints(A: FiniteStructure, strong: bool):
    """Group the morphism conditions by the largest source element they mention."""
    buckets: list[list[_Constraint]] = [[] for _ in range(A.size)]
    for s in A.sig.functions:
        for args in product(range(A.size), repeat=s.arity):
            v = A.apply(s.name, args)
            buckets[max(args + (v,))].append(_Constraint("fn", s.name, args, v))
    for s in A.sig.relations:
        for args in product(range(A.size), repeat=s.arity):
            holds = A.holds(s.name, args)
            if not holds and not strong:
                continue
            key = max(args) if args else 0
            buckets[key].append(_Constraint("rel" if holds else "nrel", s.name, args, None))
    return buckets


def search_morphisms(
    A: FiniteStructure,
    B: FiniteStructure,
    kind: str = HOM,
    accept: Optional[Callable[[tuple], bool]] = None,
    max_search: int = MAX_SEARCH,
):
    """Yield every map of the given kind in lexicographic order.

    Elements of ``A`` are assigned in index order, target values ascending;
    each condition is checked as soon as every element it mentions is
    assigned. ``accept`` filters complete maps. Raises
    :class:`ResourceCapError` after ``max_search`` search nodes.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown morphism kind {kind!r}")
    if A.sig != B.sig:
        raise SignatureError(f"signatures differ: {A.sig} vs {B.sig}")
    strong = kind in (EMBEDDING, ISO)
    if kind == ISO and A.size != B.size:
        return
    if strong and A.size > B.size:
        return
    buckets = _constraints(A, strong)
    h = [0] * A.size
    used = [False] * B.size
    nodes = 0

    def ok(c: _Constraint) -> bool:
        if c.kind == "fn":
            return B.apply(c.symbol, [h[a] for a in c.args]) == h[c.value]
        holds = B.holds(c.symbol, [h[a] for a in c.args])
        return holds if c.kind == "rel" else not holds

    def extend(i):
        nonlocal nodes
        if i == A.size:
            m = tuple(h)
            if accept is None or accept(m):
                yield m
            return
        for v in range(B.size):
            if strong and used[v]:
                continue
            nodes += 1
            if nodes > max_search:
                raise ResourceCapError(f"morphism search exceeded {max_search} nodes")
            h[i] = v
            if all(ok(c) for c in buckets[i]):
                used[v] = True
                yield from extend(i + 1)
                used[v] = False

    yield from extend(0)


def find_morphism(A: FiniteStructure, B: FiniteStructure, kind: str = HOM, max_search: int = MAX_SEARCH) -> Optional[Morphism]:
    """The lexicographically least morphism of the requested kind, or None."""
    for m in search_morphisms(A, B, kind, max_search=max_search):
        return check_morphism(m, A, B, kind)
    return None


def isomorphic(A: FiniteStructure, B: FiniteStructure, max_search: int = MAX_SEARCH) -> bool:
    return find_morphism(A, B, ISO, max_search) is not None


# -- the diagram constructions ------------------------------------------------


def _check_expansion(A: FiniteStructure, B) -> ExpandedSignature:
    sig = B.sig
    if not isinstance(sig, ExpandedSignature) or sig.base != A.sig or len(sig.constants) != A.size:
        raise SignatureError("B must be a structure over the expansion of A's signature by A's elements")
    return sig


def embed_from_diagram(A: FiniteStructure, B) -> Morphism:
    """The embedding ``a ↦ ȧ^B`` of ``A`` into the reduct of ``B``.

    ``B`` must satisfy the diagram of ``A``; the first diagram sentence that
    fails is raised as :class:`DiagramViolation`.
    """
    from .constructions import diagram

    sig = _check_expansion(A, B)
    D = diagram(A, sig)
    for atom, negated in D.sentences():
        if eval_atom(B, {}, atom) == negated:
            raise DiagramViolation(atom, negated)
    h = tuple(B.apply(c, ()) for c in sig.constants)
    return check_morphism(h, A, reduct(B), EMBEDDING)


@dataclass(frozen=True)
class QuotientPresentation:
    """``A`` as the image of ``sub`` (a substructure of ``ambient``) under ``surjection``."""

    ambient: object
    sub: FiniteStructure
    inclusion: Morphism
    surjection: Morphism
    terms: tuple = field(default=(), compare=False)


def quotient_from_negative_diagram(A: FiniteStructure, B, max_size: int = 10**5) -> QuotientPresentation:
    """Present ``A`` as a homomorphic image of a substructure of ``B``'s reduct.

    The substructure generated by the constants is built together with the
    value in ``A`` of a closed term naming each generated element. Two terms
    that name one element of ``B`` but different elements of ``A`` (or a
    relation fact of ``B`` that fails in ``A``) raise
    :class:`QuotientConflict` carrying the offending atomic sentence.
    """
    from .constructions import diagram, generated_substructure

    sig = _check_expansion(A, B)
    D = diagram(A, sig)
    for atom in D.negative:
        if eval_atom(B, {}, atom):
            raise DiagramViolation(atom, True)
    base = sig.base
    if ProductCodec.supports(B):
        value, term, order = _paired_closure_in_product(A, B, sig, max_size)
    else:
        value, term, order = _paired_closure(A, B, sig, max_size)
    ambient = reduct(B)
    sub = generated_substructure(ambient, order)
    g = tuple(value[e] for e in sub.inclusion.map)
    for s in base.relations:
        for args in sorted(sub.structure.relations[s.name]):
            if not A.holds(s.name, [g[j] for j in args]):
                t = tuple(term[sub.inclusion.map[j]] for j in args)
                raise QuotientConflict(Rel(s.name, t))
    surj = check_morphism(g, sub.structure, A, HOM)
    if len(set(g)) != A.size:
        raise MorphismViolation("surjection misses elements of A")
    terms = tuple(term[e] for e in sub.inclusion.map)
    return QuotientPresentation(ambient, sub.structure, sub.inclusion, surj, terms)


def _paired_closure(A: FiniteStructure, B, sig: ExpandedSignature, max_size: int):
    """Generated elements of ``B`` in discovery order, each with its value in ``A`` and a naming term."""
    base = sig.base
    value: dict = {}
    term: dict = {}
    order: list = []

    def admit(e, v, t):
        if e in value:
            if value[e] != v:
                raise QuotientConflict(Eq(term[e], t), (value[e], v))
            return
        if len(order) >= max_size:
            raise ResourceCapError(f"generated substructure exceeds {max_size} elements")
        value[e] = v
        term[e] = t
        order.append(e)

    for a, c in enumerate(sig.constants):
        admit(B.apply(c, ()), a, App(c))
    for s in base.functions:
        if s.arity == 0:
            admit(B.apply(s.name, ()), A.apply(s.name, ()), App(s.name))
    # semi-naive closure: each round only combines tuples touching the last round
    old = 0
    while old < len(order):
        new = len(order)
        for s in base.functions:
            if s.arity == 0:
                continue
            for args in _fresh_tuples(new, old, s.arity):
                elems = [order[j] for j in args]
                e = B.apply(s.name, elems)
                v = A.apply(s.name, [value[x] for x in elems])
                admit(e, v, App(s.name, tuple(term[x] for x in elems)))
        old = new

    return value, term, order


def _paired_closure_in_product(A: FiniteStructure, B, sig: ExpandedSignature, max_size: int):
    """:func:`_paired_closure` on integer codes of a product of finite structures.

    Candidates are processed a batch at a time but in the same order as the
    plain loop, so the same conflict (or cap) is reported first.
    """
    base = sig.base
    codec = ProductCodec(B.factors)
    codes: list = []
    vals: list = []
    parent: list = []  # (symbol, argument element indices)
    where: dict = {}

    def admit(code, v, origin):
        if code in where:
            e = where[code]
            if vals[e] != v:
                raise QuotientConflict(Eq(name(e), name(origin)), (vals[e], v))
            return
        if len(codes) >= max_size:
            raise ResourceCapError(f"generated substructure exceeds {max_size} elements")
        where[code] = len(codes)
        codes.append(code)
        vals.append(v)
        parent.append(origin)

    @lru_cache(maxsize=None)
    def term_of(e):
        symbol, args = parent[e]
        return App(symbol, tuple(term_of(a) for a in args))

    def name(origin):
        if isinstance(origin, int):
            return term_of(origin)
        symbol, args = origin
        return App(symbol, tuple(term_of(a) for a in args))

    for a, c in enumerate(sig.constants):
        admit(codec.encode(B.apply(c, ())), a, (c, ()))
    for s in base.functions:
        if s.arity == 0:
            admit(codec.encode(B.apply(s.name, ())), A.apply(s.name, ()), (s.name, ()))
    old = 0
    while old < len(codes):
        new = len(codes)
        for s in base.functions:
            if s.arity == 0:
                continue
            table = np.asarray(A.functions[s.name], dtype=np.int64)
            for idx in fresh_index_batches(new, old, s.arity):
                _admit_batch(codec, table, A.size, s.name, idx, codes, vals, where, admit, max_size)
        old = new
    value = {}
    term = {}
    order = []
    for e, code in enumerate(codes):
        t = codec.decode(code)
        value[t] = vals[e]
        term[t] = term_of(e)
        order.append(t)
    return value, term, order


def _admit_batch(codec, table, n_a, symbol, idx, codes, vals, where, admit, max_size):
    known = np.asarray(codes, dtype=np.int64)
    known_vals = np.asarray(vals, dtype=np.int64)
    arity = idx.shape[1]
    out = codec.apply(symbol, [known[idx[:, p]] for p in range(arity)])
    flat = np.zeros(len(idx), dtype=np.int64)
    for p in range(arity):
        flat = flat * n_a + known_vals[idx[:, p]]
    v = table[flat]
    # reference value per candidate: the existing element's, else the first candidate's with that code
    sorter = np.argsort(known, kind="stable")
    pos = np.searchsorted(known[sorter], out)
    pos[pos == len(known)] = 0
    exists = known[sorter][pos] == out
    ref = np.where(exists, known_vals[sorter][pos], -1)
    uniq, first, inv = np.unique(out, return_index=True, return_inverse=True)
    inv = inv.reshape(-1)
    ref = np.where(exists, ref, v[first][inv])
    fresh_first = np.unique(first[~exists[first]])
    stop = len(idx)
    bad = np.flatnonzero(v != ref)
    if len(bad):
        stop = int(bad[0])
    room = max_size - len(codes)
    if len(fresh_first) > room:
        stop = min(stop, int(fresh_first[room]))
    # replay the decisive prefix exactly; everything before it is conflict free
    for k in fresh_first[fresh_first < stop].tolist():
        admit(int(out[k]), int(v[k]), (symbol, tuple(idx[k].tolist())))
    if stop < len(idx):
        admit(int(out[stop]), int(v[stop]), (symbol, tuple(idx[stop].tolist())))
        raise AssertionError("batch replay did not reproduce the expected failure")


def _fresh_tuples(n: int, old: int, k: int):
    """Index tuples over range(n) with at least one entry >= old."""
    for j in range(k):
        # position j is the first fresh entry
        for args in product(*([range(old)] * j + [range(old, n)] + [range(n)] * (k - j - 1))):
            yield args


def image_structure(h: Morphism) -> FiniteStructure:
    """The structure induced on the range of a homomorphism.

    Elements are the range values in ascending order. Relations are the
    images of source facts together with the target facts among range
    elements; function tables are induced through preimages and checked to
    be well defined.
    """
    A = h.source
    B = h.target
    rng = sorted(set(h.map))
    pos = {v: i for i, v in enumerate(rng)}
    pre: dict = {}
    for a, v in enumerate(h.map):
        pre.setdefault(v, []).append(a)
    fns = {}
    for s in A.sig.functions:
        table = []
        for args in product(range(len(rng)), repeat=s.arity):
            vals = {h.map[A.apply(s.name, list(src))] for src in product(*(pre[rng[i]] for i in args))}
            if len(vals) != 1:
                raise AssertionError(f"induced {s.name} ill-defined at {args}")
            table.append(pos[vals.pop()])
        fns[s.name] = tuple(table)
    rels = {}
    for s in A.sig.relations:
        facts = {tuple(pos[h.map[a]] for a in t) for t in A.relations[s.name]}
        for args in product(range(len(rng)), repeat=s.arity):
            if B.holds(s.name, [rng[i] for i in args]):
                facts.add(args)
        rels[s.name] = frozenset(facts)
    name = f"im_{A.name}" if A.name else ""
    return FiniteStructure(A.sig, len(rng), fns, rels, name)


def corestrict(h: Morphism) -> Morphism:
    """``h`` viewed as a surjective homomorphism onto :func:`image_structure`."""
    img = image_structure(h)
    rng = sorted(set(h.map))
    pos = {v: i for i, v in enumerate(rng)}
    return check_morphism([pos[v] for v in h.map], h.source, img, HOM)


def compose(g: Morphism, f: Morphism) -> tuple:
    """Map of ``g ∘ f``."""
    return tuple(g.map[v] for v in f.map)
