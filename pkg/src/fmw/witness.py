"""Witness procedures for membership in the quasivariety and the variety generated by a catalog.

Both engines decide, for a finite ``A`` and a catalog ``K``, between an
explicit construction placing ``A`` in the class and a basic Horn formula
that holds throughout ``K`` but fails in ``A``.

Mal'cev: every index is a member ``M`` with a homomorphism ``h: A → M``
that also falsifies one atom of the negative diagram (or none, for the
empty requirement). The expanded factors satisfy the positive diagram, and
each negative sentence holds at its own index, so under the trivial filter
the reduced product satisfies the whole diagram and ``a ↦ ȧ`` embeds ``A``.

Birkhoff: indices only need maps falsifying a negative sentence; a
homomorphism is taken when one exists, otherwise the least arbitrary map.
The paired closure then either presents ``A`` as a homomorphic image of the
substructure generated by the constants, or names a closed-term sentence
true in the product but false in ``A``. A fresh index falsifying that
sentence is added and the closure is retried; when no member and map can
falsify it, the sentence read with variables is an identity of ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Optional, Union

from .constructions import (
    FilterOnFiniteSet,
    ProductStructure,
    ReducedProductStructure,
    diagram,
    expand_structure,
    filter_from_generators,
)
from .errors import DiagramViolation, MorphismViolation, QuotientConflict, ResourceCapError, SignatureError, WorkbenchError
from .morphisms import (
    EMBEDDING,
    HOM,
    MAX_SEARCH,
    Morphism,
    QuotientPresentation,
    check_morphism,
    embed_from_diagram,
    quotient_from_negative_diagram,
    search_morphisms,
)
from .structures import MAX_ASSIGNMENTS, FiniteStructure, StructureCatalog, eval_atom, holds_at, reduct, satisfies
from .syntax import App, Atom, Eq, ExpandedSignature, HornFormula, Rel, Var, expand_signature, kind_label, var_name

MALCEV = "malcev"
BIRKHOFF = "birkhoff"
MAX_FAITHFUL_POSITIVE = 6
MAX_ROUNDS = 10**4


@dataclass(frozen=True)
class Index:
    """One factor of the construction: catalog member ``member`` with map ``map``."""

    member: int
    name: str
    map: tuple[int, ...]
    sentence: str = ""  # the negative-diagram requirement that introduced it
    theta: tuple[str, ...] = ()  # positive-diagram subset (faithful mode only)


@dataclass(frozen=True)
class MemberEvidence:
    name: str
    holds: bool
    assignments: int


@dataclass
class Embedded:
    engine: str
    indices: list[Index]
    construction: object
    morphism: Optional[Morphism] = None
    presentation: Optional[QuotientPresentation] = None
    filter: Optional[FilterOnFiniteSet] = None
    rounds: int = 0

    refuted = False


@dataclass
class Refuted:
    engine: str
    formula: HornFormula
    kind: str
    falsifying: dict[str, int]
    evidence: list[MemberEvidence] = field(default_factory=list)
    sentence: str = ""

    refuted = True


WitnessResult = Union[Embedded, Refuted]


def constants_to_variables(atom: Atom, sig: ExpandedSignature) -> Atom:
    """Replace each constant ``ȧk`` by the pool variable number ``k``."""
    names = {c: Var(var_name(k)) for k, c in enumerate(sig.constants)}

    def go(t):
        if isinstance(t, Var):
            return t
        if not t.args and t.symbol in names:
            return names[t.symbol]
        return App(t.symbol, tuple(go(a) for a in t.args))

    if isinstance(atom, Eq):
        return Eq(go(atom.left), go(atom.right))
    return Rel(atom.symbol, tuple(go(a) for a in atom.args))


def _identity_assignment(A: FiniteStructure) -> dict[str, int]:
    return {var_name(a): a for a in A.elements()}


def _holds_under(M: FiniteStructure, atom: Atom, h: tuple) -> bool:
    """Truth in ``M`` of a variable-form sentence with ``x_k`` read as ``h[k]``."""
    return eval_atom(M, {var_name(k): v for k, v in enumerate(h)}, atom)


def _check_catalog(A: FiniteStructure, K: StructureCatalog) -> None:
    if len(K) == 0:
        raise WorkbenchError("the catalog is empty")
    if K.sig != A.sig:
        raise SignatureError(f"{A.name or 'A'} is over {A.sig}, the catalog over {K.sig}")


def _refute(engine, A, K, phi: HornFormula, sentence: str, max_assignments: int) -> Refuted:
    evidence = []
    for M in K:
        res = satisfies(M, phi, max_assignments)
        evidence.append(MemberEvidence(M.name, res.holds, M.size ** len(phi.free_vars)))
    asg = _identity_assignment(A)
    falsifying = {v: asg[v] for v in phi.free_vars}
    out = Refuted(engine, phi, kind_label(phi), falsifying, evidence, sentence)
    if not all(e.holds for e in evidence) or holds_at(A, phi, falsifying):
        raise AssertionError(f"unsound refutation {phi}")
    return out


# -- Mal'cev ----------------------------------------------------------------


def _hom_falsifying(A, K, atom, premises, max_search):
    """Least (member, hom) of ``A`` into ``K`` under which ``atom`` fails.

    ``premises`` restricts the candidate maps further (faithful mode passes
    a subset of the positive diagram in place of full homomorphism).
    """
    for i, M in enumerate(K):
        if premises is None:
            maps = search_morphisms(A, M, HOM, max_search=max_search)
        else:
            maps = _maps_satisfying(A, M, premises, max_search)
        for h in maps:
            if atom is None or not _holds_under(M, atom, h):
                return i, h
    return None


def _maps_satisfying(A, M, premises, max_search):
    if M.size**A.size > max_search:
        raise ResourceCapError(f"{M.size}^{A.size} maps exceed {max_search}")
    for h in product(range(M.size), repeat=A.size):
        if all(_holds_under(M, p, h) for p in premises):
            yield h


def malcev_witness(
    A: FiniteStructure,
    K: StructureCatalog,
    faithful: bool = False,
    max_search: int = MAX_SEARCH,
    max_assignments: int = MAX_ASSIGNMENTS,
) -> WitnessResult:
    """Embed ``A`` into a reduced product of expanded members of ``K``, or refute.

    A single embedding into a member serves every index at once and is
    tried first. Otherwise there is one index per requirement: none, or one
    negative-diagram atom to falsify, each filled by the least member and
    homomorphism. A failing requirement ``¬ξ`` yields the quasi-identity
    ``diag⁺ |- ξ`` (headless when nothing is to be falsified).

    With ``faithful`` the index set also ranges over subsets Θ of the
    positive diagram, the generator sets ``{i : θ ∈ Θᵢ}`` are passed to
    :func:`filter_from_generators`, and the product is reduced modulo the
    resulting filter.
    """
    _check_catalog(A, K)
    sig = expand_signature(A.sig, A.size)
    D = diagram(A, sig)
    positive = [constants_to_variables(a, sig) for a in D.positive]
    requirements: list[Optional[Atom]] = [None] + list(D.negative)

    if faithful:
        return _malcev_faithful(A, K, sig, D, positive, requirements, max_search, max_assignments)

    for i, M in enumerate(K):
        for h in search_morphisms(A, M, EMBEDDING, max_search=max_search):
            index = Index(i, M.name, h, "all")
            return _assemble_malcev(A, K, sig, [index], FilterOnFiniteSet.trivial(1))

    indices: list[Index] = []
    unconstrained = None
    for xi in requirements:
        xi_v = constants_to_variables(xi, sig) if xi is not None else None
        text = f"¬{_wrap(xi)}" if xi is not None else "∅"
        if xi_v is not None and any(not _holds_under(K.members[ix.member], xi_v, ix.map) for ix in indices):
            continue
        found = _hom_falsifying(A, K, xi_v, None, max_search)
        if found is None:
            phi = HornFormula(tuple(positive), xi_v)
            return _refute(MALCEV, A, K, phi, text, max_assignments)
        m, h = found
        index = Index(m, K.members[m].name, h, text)
        if xi is None:
            # every other index satisfies the positive diagram too; keep this
            # one only when the negative diagram is empty
            unconstrained = index
        else:
            indices.append(index)
    if not indices:
        indices = [unconstrained]
    return _assemble_malcev(A, K, sig, indices, FilterOnFiniteSet.trivial(len(indices)))


def _wrap(atom: Atom) -> str:
    return f"({atom})" if isinstance(atom, Eq) else str(atom)


def _malcev_faithful(A, K, sig, D, positive, requirements, max_search, max_assignments):
    if len(positive) > MAX_FAITHFUL_POSITIVE:
        raise ResourceCapError(f"faithful mode needs |diag⁺| ≤ {MAX_FAITHFUL_POSITIVE}, got {len(positive)}")
    thetas = [c for k in range(len(positive) + 1) for c in combinations(range(len(positive)), k)]
    indices: list[Index] = []
    for xi in requirements:
        xi_v = constants_to_variables(xi, sig) if xi is not None else None
        text = f"¬{_wrap(xi)}" if xi is not None else "∅"
        for theta in thetas:
            premises = [positive[j] for j in theta]
            if xi_v is None and not premises:
                # Θ = Ξ = ∅ asks for nothing; any member with any map will do
                indices.append(Index(0, K.members[0].name, (0,) * A.size, text, ()))
                continue
            found = _hom_falsifying(A, K, xi_v, premises, max_search)
            if found is None:
                phi = HornFormula(tuple(premises), xi_v)
                return _refute(MALCEV, A, K, phi, text, max_assignments)
            m, h = found
            names = tuple(str(D.positive[j]) for j in theta)
            indices.append(Index(m, K.members[m].name, h, text, names))
    n = len(indices)
    gens = [sum(1 << i for i, ix in enumerate(indices) if str(p) in ix.theta) for p in D.positive]
    F = filter_from_generators(n, gens)
    return _assemble_malcev(A, K, sig, indices, F)


def _assemble_malcev(A, K, sig, indices, F) -> Embedded:
    factors = [expand_structure(K.members[ix.member], sig, ix.map) for ix in indices]
    R = ReducedProductStructure(factors, F, sig, name=f"Π/{F}")
    h = embed_from_diagram(A, R)
    return Embedded(MALCEV, indices, R, morphism=h, filter=F)


# -- Birkhoff ---------------------------------------------------------------


def _map_falsifying(A, K, atom, max_search):
    """A (member, map) under which the variable-form ``atom`` fails.

    Homomorphisms are preferred: their expansions satisfy the positive
    diagram, so they never cause pairing conflicts and keep the generated
    substructure small. Otherwise the least arbitrary map is taken.
    """
    found = _hom_falsifying(A, K, atom, None, max_search)
    if found is not None:
        return found
    for i, M in enumerate(K):
        if M.size**A.size > max_search:
            raise ResourceCapError(f"{M.size}^{A.size} maps exceed {max_search}")
        for h in product(range(M.size), repeat=A.size):
            if not _holds_under(M, atom, h):
                return i, h
    return None


def birkhoff_witness(
    A: FiniteStructure,
    K: StructureCatalog,
    max_search: int = MAX_SEARCH,
    max_product: int = 10**5,
    max_assignments: int = MAX_ASSIGNMENTS,
) -> WitnessResult:
    """Present ``A`` as a homomorphic image of a substructure of a product of ``K``, or refute.

    Each negative-diagram sentence gets an index (an earlier index is reused
    when it already falsifies the atom). Conflicts found by the paired
    closure add further indices until the closure succeeds or a sentence
    admits no falsifying member and map; that sentence, with constants read
    as variables, is returned as an identity.
    """
    _check_catalog(A, K)
    sig = expand_signature(A.sig, A.size)
    D = diagram(A, sig)
    indices: list[Index] = []

    def falsified(xi_v) -> bool:
        return any(not _holds_under(K.members[ix.member], xi_v, ix.map) for ix in indices)

    def require(xi: Atom) -> Optional[Refuted]:
        xi_v = constants_to_variables(xi, sig)
        text = f"¬{_wrap(xi)}"
        found = _map_falsifying(A, K, xi_v, max_search)
        if found is None:
            return _refute(BIRKHOFF, A, K, HornFormula((), xi_v), text, max_assignments)
        m, h = found
        indices.append(Index(m, K.members[m].name, h, text))
        return None

    for xi in D.negative:
        if falsified(constants_to_variables(xi, sig)):
            continue
        refuted = require(xi)
        if refuted is not None:
            return refuted
    rounds = 0
    while True:
        rounds += 1
        if rounds > MAX_ROUNDS:
            raise ResourceCapError(f"closure did not settle within {MAX_ROUNDS} rounds")
        factors = [expand_structure(K.members[ix.member], sig, ix.map) for ix in indices]
        B = ProductStructure(factors, sig, name="Π")
        try:
            q = quotient_from_negative_diagram(A, B, max_size=max_product)
        except DiagramViolation as exc:
            # the sentence holds in the product, hence at every index
            assert not falsified(constants_to_variables(exc.atom, sig))
            refuted = require(exc.atom)
            if refuted is not None:
                return refuted
            continue
        return Embedded(BIRKHOFF, indices, B, presentation=q, rounds=rounds)


# -- re-verification -------------------------------------------------------


def verify_witness(A: FiniteStructure, K: StructureCatalog, result: WitnessResult, max_assignments: int = MAX_ASSIGNMENTS) -> None:
    """Re-check a witness from scratch; raises on any defect."""
    if isinstance(result, Refuted):
        phi = result.formula
        for M in K:
            if not satisfies(M, phi, max_assignments).holds:
                raise AssertionError(f"{phi} fails in {M.name}")
        if holds_at(A, phi, result.falsifying):
            raise AssertionError(f"{phi} holds in A at {result.falsifying}")
        return
    for ix in result.indices:
        M = K.members[ix.member]
        if M.name != ix.name or len(ix.map) != A.size or any(not 0 <= v < M.size for v in ix.map):
            raise AssertionError(f"index {ix} does not match the catalog")
    if result.engine == MALCEV:
        h = result.morphism
        check_morphism(h.map, A, reduct(result.construction), EMBEDDING)
        expected = tuple(result.construction.apply(c, ()) for c in result.construction.sig.constants)
        if h.map != expected:
            raise AssertionError("embedding differs from the constants' interpretation")
        return
    q = result.presentation
    check_morphism(q.inclusion.map, q.sub, q.ambient, EMBEDDING)
    check_morphism(q.surjection.map, q.sub, A, HOM)
    if set(q.surjection.map) != set(A.elements()):
        raise MorphismViolation("not surjective")
