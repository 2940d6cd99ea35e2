import random

import pytest

from fmw.dsl import parse_formula
from fmw.enumeration import (
    FORMULA_KINDS,
    HORN,
    IDENTITY,
    NON_STRICT,
    EnumerationBounds,
    canonical_key,
    enumerate_horn,
    valid_formulas,
)
from fmw.errors import ResourceCapError
from fmw.generate import GRAPH, MAG, RM, random_catalog
from fmw.structures import StructureCatalog, unit_structure
from fmw.constructions import direct_product
from fmw.syntax import atoms_over, var_name

from . import oracles


def test_graph_identities_without_terms(ws):
    phis = enumerate_horn(GRAPH, EnumerationBounds(2, 0, 0), IDENTITY)
    assert sorted(str(p) for p in phis) == ["|- r(x,x)", "|- r(x,y)", "|- x=x", "|- x=y"]


def test_commutativity_is_enumerated():
    phis = {str(p) for p in enumerate_horn(MAG, EnumerationBounds(2, 1, 0), IDENTITY)}
    assert "|- m(x,y)=m(y,x)" in phis


def test_non_strict_needs_a_premise():
    assert enumerate_horn(GRAPH, EnumerationBounds(2, 1, 0), NON_STRICT) == []


CLASS_COUNT_CASES = [
    (GRAPH, EnumerationBounds(2, 0, 2)),
    (GRAPH, EnumerationBounds(3, 0, 1)),
    (MAG, EnumerationBounds(2, 1, 1)),
    (RM, EnumerationBounds(2, 1, 1)),
    (MAG, EnumerationBounds(3, 0, 2)),
]


@pytest.mark.parametrize("sig, bounds", CLASS_COUNT_CASES, ids=lambda v: str(v))
@pytest.mark.parametrize("kind", FORMULA_KINDS)
def test_class_count_matches_orbit_oracle(sig, bounds, kind):
    pool = [var_name(i) for i in range(bounds.max_vars)]
    atoms = atoms_over(sig, pool, bounds.max_term_depth)
    expected = oracles.count_clause_classes(atoms, pool, bounds.max_negatives, kind)
    phis = enumerate_horn(sig, bounds, kind)
    assert len(phis) == expected
    assert len({canonical_key(p) for p in phis}) == len(phis)


def test_representatives_are_canonically_named():
    for phi in enumerate_horn(RM, EnumerationBounds(3, 1, 1)):
        assert phi.free_vars == tuple(var_name(i) for i in range(len(phi.free_vars)))


def test_canonical_key_ignores_renaming_and_premise_order():
    a = parse_formula("r(y,x) & m(x,x)=y |- r(x,y)", RM)
    b = parse_formula("y=m(x,x) & r(y,x) |- r(x,y)", RM)
    c = parse_formula("x=m(y,y) & r(x,y) |- r(y,x)", RM)
    assert canonical_key(a) == canonical_key(b) == canonical_key(c)
    assert canonical_key(a) != canonical_key(parse_formula("r(x,y) & m(x,x)=y |- r(y,x)", RM))


def test_enumeration_is_deterministic():
    b = EnumerationBounds(2, 1, 2)
    assert [str(p) for p in enumerate_horn(RM, b)] == [str(p) for p in enumerate_horn(RM, b)]


def test_enumeration_cap():
    with pytest.raises(ResourceCapError):
        enumerate_horn(RM, EnumerationBounds(3, 1, 2), max_clauses=1000)


@pytest.mark.parametrize("sig", [GRAPH, MAG, RM], ids=lambda s: s.name)
def test_valid_formulas_agree_with_loop_oracle(sig):
    rng = random.Random(f"valid:{sig.name}")
    bounds = EnumerationBounds(2, 1, 1)
    phis = enumerate_horn(sig, bounds)
    for _ in range(4):
        K = random_catalog(rng, sig)
        expected = [p for p in phis if all(oracles.satisfies(M, p)[0] for M in K)]
        assert valid_formulas(K, bounds) == expected


def test_z2_identities_include_comm_and_assoc(ws):
    K = StructureCatalog.of(ws.structure("Z2"))
    valid = {str(p) for p in valid_formulas(K, EnumerationBounds(3, 2, 0), IDENTITY)}
    assert "|- m(x,y)=m(y,x)" in valid
    assert "|- m(m(x,y),z)=m(x,m(y,z))" in valid or "|- m(x,m(y,z))=m(m(x,y),z)" in valid


def test_square_of_left_projection_keeps_its_identities(ws):
    L = ws.structure("LeftProj")
    square = direct_product([L, L]).carrier
    bounds = EnumerationBounds(2, 2, 0)
    ids_l = valid_formulas(StructureCatalog.of(L), bounds, IDENTITY)
    for phi in ids_l:
        assert oracles.satisfies(square, phi)[0]


def test_edge_admits_a_headless_clause(ws):
    valid = {str(p) for p in valid_formulas(StructureCatalog.of(ws.structure("P_edge")), EnumerationBounds(2, 1, 1), HORN)}
    assert "r(x,x) |- false" in valid


def test_unit_catalog_has_only_strict_valid_clauses():
    for sig in (GRAPH, MAG, RM):
        K = StructureCatalog.of(unit_structure(sig))
        assert all(p.strict for p in valid_formulas(K, EnumerationBounds(2, 1, 1)))
