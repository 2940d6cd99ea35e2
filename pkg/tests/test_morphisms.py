import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmw.constructions import ProductStructure, expand_structure, self_expansion
from fmw.errors import DiagramViolation, MorphismViolation, QuotientConflict, ResourceCapError, SignatureError
from fmw.generate import SIGNATURES, random_structure
from fmw.morphisms import (
    EMBEDDING,
    HOM,
    ISO,
    check_morphism,
    corestrict,
    embed_from_diagram,
    find_morphism,
    image_structure,
    is_morphism,
    isomorphic,
    quotient_from_negative_diagram,
    search_morphisms,
)
from fmw.structures import eval_atom
from fmw.syntax import expand_signature

from . import oracles


def test_mod_two_is_the_least_hom(ws):
    h = find_morphism(ws.structure("Z4"), ws.structure("Z2"))
    assert h.map == (0, 0, 0, 0)
    homs = list(search_morphisms(ws.structure("Z4"), ws.structure("Z2")))
    assert homs == [(0, 0, 0, 0), (0, 1, 0, 1)]


def test_violations_name_the_condition(ws):
    P, S = ws.structure("P_edge"), ws.structure("S_sym")
    with pytest.raises(MorphismViolation, match="r not preserved at r\\(0,1\\)"):
        check_morphism([0, 0], P, S)
    with pytest.raises(MorphismViolation):
        check_morphism([0, 1], S, P, HOM)
    with pytest.raises(MorphismViolation):
        check_morphism([0, 1], P, S, EMBEDDING)
    with pytest.raises(MorphismViolation, match="map has 1 entries"):
        check_morphism([0], P, S)
    with pytest.raises(MorphismViolation, match="not injective"):
        check_morphism([0, 0], ws.structure("Z2"), ws.structure("Z2"), EMBEDDING)
    with pytest.raises(SignatureError):
        check_morphism([0, 1], P, ws.structure("Z2"))
    assert is_morphism([1, 0], S, S, ISO)


def test_search_cap(ws):
    with pytest.raises(ResourceCapError):
        find_morphism(ws.structure("Path3"), ws.structure("P_edge"), max_search=2)


pairs = st.tuples(st.integers(0, 10**6), st.sampled_from(SIGNATURES), st.integers(1, 3), st.integers(1, 3))


@settings(max_examples=80, deadline=None)
@given(case=pairs, kind=st.sampled_from([HOM, EMBEDDING, ISO]))
def test_search_is_complete_and_ordered(case, kind):
    seed, sig, n, m = case
    rng = random.Random(seed)
    A = random_structure(rng, sig, n)
    B = random_structure(rng, sig, m)
    expected = oracles.all_homs(A, B, kind)
    assert list(search_morphisms(A, B, kind)) == expected
    found = find_morphism(A, B, kind)
    assert (found.map if found else None) == (expected[0] if expected else None)
    assert isomorphic(A, B) == oracles.isomorphic(A, B)


def test_image_structure(ws):
    Z4 = ws.structure("Z4")
    h = check_morphism([0, 2], ws.structure("Z2"), Z4)
    img = image_structure(h)
    assert img.size == 2 and isomorphic(img, ws.structure("Z2"))
    onto = corestrict(h)
    assert onto.map == (0, 1)
    P, S = ws.structure("Path3"), ws.structure("S_sym")
    g = check_morphism([0, 1, 0], P, S)
    assert image_structure(g).relations["r"] == {(0, 1), (1, 0)}


# -- diagram embedding -----------------------------------------------------------


def test_embedding_from_the_diagram(ws):
    Z2, Z4 = ws.structure("Z2"), ws.structure("Z4")
    B = expand_structure(Z4, expand_signature(Z2.sig, 2), [0, 2])
    assert embed_from_diagram(Z2, B).map == (0, 2)
    bad = expand_structure(Z4, expand_signature(Z2.sig, 2), [0, 1])
    with pytest.raises(DiagramViolation) as info:
        embed_from_diagram(Z2, bad)
    assert info.value.sentence == "m(ȧ0,ȧ1)=ȧ1" or not info.value.negated


def test_first_failing_sentence_is_reported(ws):
    P = ws.structure("P_edge")
    B = expand_structure(ws.structure("S_sym"), expand_signature(P.sig, 2), [0, 1])
    with pytest.raises(DiagramViolation) as info:
        embed_from_diagram(P, B)
    assert info.value.sentence == "¬r(ȧ1,ȧ0)"
    B = expand_structure(ws.structure("S_loop"), expand_signature(P.sig, 2), [0, 0])
    with pytest.raises(DiagramViolation) as info:
        embed_from_diagram(P, B)
    assert info.value.sentence == "¬(ȧ0=ȧ1)"


def test_embedding_requires_expanded_signature(ws):
    with pytest.raises(SignatureError):
        embed_from_diagram(ws.structure("Z2"), ws.structure("Z4"))


# -- quotient ---------------------------------------------------------------------


def test_mod_two_quotient(ws):
    Z2, Z4 = ws.structure("Z2"), ws.structure("Z4")
    B = expand_structure(Z4, expand_signature(Z2.sig, 2), [0, 1])
    q = quotient_from_negative_diagram(Z2, B)
    assert q.inclusion.map == (0, 1, 2, 3)
    assert q.surjection.map == (0, 1, 0, 1)
    assert oracles.is_hom(q.surjection.map, q.sub, Z2)
    assert [str(t) for t in q.terms][:2] == ["ȧ0", "ȧ1"]


def test_quotient_conflict_carries_a_term_pair(ws):
    Z2, Z3 = ws.structure("Z2"), ws.structure("Z3")
    B = expand_structure(Z3, expand_signature(Z2.sig, 2), [0, 1])
    with pytest.raises(QuotientConflict) as info:
        quotient_from_negative_diagram(Z2, B)
    exc = info.value
    left, right = exc.atom.left, exc.atom.right
    e = [oracles.term_value(B, t, {}) for t in (left, right)]
    assert e[0] == e[1]
    assert exc.values[0] != exc.values[1]


def test_negative_diagram_violation_in_quotient(ws):
    Z2 = ws.structure("Z2")
    B = expand_structure(ws.structure("Z4"), expand_signature(Z2.sig, 2), [0, 0])
    with pytest.raises(DiagramViolation) as info:
        quotient_from_negative_diagram(Z2, B)
    assert info.value.sentence == "¬(ȧ0=ȧ1)"
    assert not isinstance(info.value, QuotientConflict)


def test_quotient_of_a_product_presents_the_factor(ws):
    for name in ("Z2", "Z3", "LeftProj", "Path3", "P_edge"):
        A = ws.structure(name)
        sig = expand_signature(A.sig, A.size)
        other = ws.structure("Z4" if A.sig.name == "Mag" else "S_sym")
        B = ProductStructure([self_expansion(A, sig), expand_structure(other, sig, [0] * A.size)], sig)
        q = quotient_from_negative_diagram(A, B)
        assert sorted(set(q.surjection.map)) == list(range(A.size))
        assert oracles.is_hom(q.surjection.map, q.sub, A)
        for t, e in zip(q.terms, q.inclusion.map):
            assert oracles.term_value(B.factors[0], t, {}) == q.surjection.map[q.inclusion.map.index(e)]
