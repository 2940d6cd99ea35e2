import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmw import codes
from fmw.codes import ProductCodec, fresh_index_batches
from fmw.constructions import ProductStructure, expand_structure, generated_substructure
from fmw.errors import DiagramViolation, MorphismViolation, QuotientConflict, ResourceCapError
from fmw.generate import GRAPH, MAG, RM, random_structure
from fmw.morphisms import _fresh_tuples, check_morphism, quotient_from_negative_diagram
from fmw.syntax import expand_signature

OUTCOMES = (DiagramViolation, MorphismViolation, QuotientConflict, ResourceCapError)


def outcome(f):
    try:
        return ("ok", f())
    except OUTCOMES as e:
        return (type(e).__name__, str(e), getattr(e, "point", None))


def both_paths(f):
    fast = outcome(f)
    with pytest.MonkeyPatch.context() as m:
        m.setattr(codes.ProductCodec, "supports", staticmethod(lambda B: False))
        slow = outcome(f)
    return fast, slow


def random_product(rng, sig, esig=None, A_size=0):
    factors = []
    for _ in range(rng.randint(1, 3)):
        N = random_structure(rng, sig, rng.randint(1, 3))
        if esig is not None:
            N = expand_structure(N, esig, [rng.randrange(N.size) for _ in range(A_size)])
        factors.append(N)
    return ProductStructure(factors, esig or sig)


def test_codes_follow_tuple_order():
    rng = random.Random(1)
    P = random_product(rng, MAG)
    codec = ProductCodec(P.factors)
    elems = list(P.elements())
    assert [codec.encode(t) for t in elems] == list(range(len(elems)))
    assert [codec.decode(k) for k in range(len(elems))] == elems


@pytest.mark.parametrize("n,old,k", [(5, 2, 2), (4, 0, 3), (3, 3, 2), (6, 5, 1), (4, 1, 3)])
def test_fresh_batches_keep_loop_order(n, old, k):
    rows = [tuple(r) for b in fresh_index_batches(n, old, k, limit=7) for r in b.tolist()]
    assert rows == list(_fresh_tuples(n, old, k))


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_vectorized_paths_agree_with_plain_loops(seed):
    rng = random.Random(seed)
    sig = rng.choice([GRAPH, MAG, RM])
    P = random_product(rng, sig)
    elems = list(P.elements())
    gens = rng.sample(elems, rng.randint(1, min(3, len(elems))))
    cap = rng.choice([2, 5, 100])

    def sub():
        S = generated_substructure(P, gens, max_size=cap)
        return S.structure.functions, S.structure.relations, S.inclusion.map

    fast, slow = both_paths(sub)
    assert fast == slow

    A = random_structure(rng, sig, rng.randint(1, 3))
    h = [rng.choice(elems) for _ in range(A.size)]
    kind = rng.choice(["hom", "embedding"])
    fast, slow = both_paths(lambda: check_morphism(h, A, P, kind).map)
    assert fast == slow


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_paired_closure_agrees_with_plain_loop(seed):
    rng = random.Random(seed)
    sig = rng.choice([GRAPH, MAG, RM])
    A = random_structure(rng, sig, rng.randint(1, 3))
    esig = expand_signature(sig, A.size)
    B = random_product(rng, sig, esig, A.size)
    cap = rng.choice([3, 8, 300])

    def present():
        q = quotient_from_negative_diagram(A, B, max_size=cap)
        return q.sub.functions, q.sub.relations, q.inclusion.map, q.surjection.map, q.terms

    fast, slow = both_paths(present)
    assert fast == slow
