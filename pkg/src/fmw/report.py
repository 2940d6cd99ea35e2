"""Text and machine-readable reports, and the round-trip audit of the latter."""

from __future__ import annotations

import json
from typing import Any

from .constructions import FilterOnFiniteSet, ProductStructure, ReducedProductStructure, expand_structure, generated_substructure
from .dsl import parse_formula, structure_to_dsl
from .morphisms import EMBEDDING, HOM, check_morphism
from .structures import FiniteStructure, StructureCatalog, holds_at, reduct, satisfies
from .syntax import expand_signature
from .witness import BIRKHOFF, MALCEV, Embedded, Refuted, WitnessResult


def dumps(doc: Any) -> str:
    """Canonical JSON text: fixed key order, UTF-8 symbols kept, trailing newline."""
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def format_assignment(asg: dict) -> str:
    return ", ".join(f"{v}={a}" for v, a in asg.items())


def structure_document(A: FiniteStructure) -> dict:
    return {
        "name": A.name,
        "size": A.size,
        "functions": {s.name: list(A.functions[s.name]) for s in A.sig.functions},
        "relations": {s.name: [list(t) for t in sorted(A.relations[s.name])] for s in A.sig.relations},
    }


def witness_document(A: FiniteStructure, K: StructureCatalog, result: WitnessResult) -> dict:
    doc: dict = {
        "engine": result.engine,
        "structure": A.name,
        "catalog": [M.name for M in K],
    }
    if isinstance(result, Refuted):
        doc.update(
            result="refuted",
            formula=str(result.formula),
            kind=result.kind,
            falsifying=dict(result.falsifying),
            failing_sentence=result.sentence,
            validity=[{"member": e.name, "holds": e.holds, "assignments": e.assignments} for e in result.evidence],
        )
        return doc
    doc["result"] = "embedded"
    doc["indices"] = [
        {"member": ix.name, "map": list(ix.map), "requirement": ix.sentence, **({"theta": list(ix.theta)} if ix.theta else {})}
        for ix in result.indices
    ]
    if result.engine == MALCEV:
        F = result.filter
        doc["filter"] = {"index_size": F.index_size, "core": list(F.core_indices)}
        doc["embedding"] = [list(t) for t in result.morphism.map]
    else:
        q = result.presentation
        doc["rounds"] = result.rounds
        doc["substructure"] = {
            "elements": [list(t) for t in q.inclusion.map],
            "tables": structure_document(q.sub),
        }
        doc["surjection"] = list(q.surjection.map)
        doc["naming_terms"] = [str(t) for t in q.terms]
    return doc


def witness_text(A: FiniteStructure, K: StructureCatalog, result: WitnessResult) -> str:
    members = ", ".join(M.name for M in K)
    lines = [f"{result.engine}: {A.name} against {{{members}}}"]
    if isinstance(result, Refuted):
        lines.append(f"refuted by {result.kind}: {result.formula}")
        lines.append(f"  falsified in {A.name} at {format_assignment(result.falsifying)}")
        if result.sentence:
            lines.append(f"  no member model for {result.sentence}")
        for e in result.evidence:
            lines.append(f"  holds in {e.name} ({e.assignments} assignments checked)")
        return "\n".join(lines) + "\n"
    lines.append(f"embedded: {len(result.indices)} indices")
    for i, ix in enumerate(result.indices):
        lines.append(f"  index {i}: {ix.name} via {list(ix.map)} for {ix.sentence}")
    if result.engine == MALCEV:
        lines.append(f"  filter {result.filter}")
        lines.append("  embedding " + ", ".join(f"{a}↦{t}" for a, t in enumerate(result.morphism.map)))
    else:
        q = result.presentation
        lines.append(f"  substructure of the product: {q.sub.size} elements after {result.rounds} closure round(s)")
        for j, (e, a) in enumerate(zip(q.inclusion.map, q.surjection.map)):
            lines.append(f"  {e} ↦ {a}  named by {q.terms[j]}")
    return "\n".join(lines) + "\n"


def audit_witness_document(text: str, A: FiniteStructure, K: StructureCatalog) -> None:
    """Re-parse a machine-readable witness and re-verify it from the catalog alone.

    Raises AssertionError (or a morphism/signature error) on any defect.
    """
    doc = json.loads(text)
    members = {M.name: M for M in K}
    assert doc["structure"] == A.name and doc["catalog"] == [M.name for M in K]
    if doc["result"] == "refuted":
        phi = parse_formula(doc["formula"], A.sig)
        for M in K:
            assert satisfies(M, phi).holds, f"{phi} fails in {M.name}"
        assert not holds_at(A, phi, doc["falsifying"]), f"{phi} holds in {A.name}"
        return
    sig = expand_signature(A.sig, A.size)
    factors = [expand_structure(members[ix["member"]], sig, ix["map"]) for ix in doc["indices"]]
    if doc["engine"] == MALCEV:
        F = FilterOnFiniteSet.principal(doc["filter"]["index_size"], doc["filter"]["core"])
        R = ReducedProductStructure(factors, F, sig)
        h = tuple(tuple(t) for t in doc["embedding"])
        assert h == tuple(R.apply(c, ()) for c in sig.constants), "embedding is not a ↦ ȧ"
        check_morphism(h, A, reduct(R), EMBEDDING)
        return
    assert doc["engine"] == BIRKHOFF
    B = ProductStructure(factors, sig)
    ambient = reduct(B)
    elements = [tuple(t) for t in doc["substructure"]["elements"]]
    seed = [B.apply(c, ()) for c in sig.constants]
    sub = generated_substructure(ambient, seed)
    assert list(sub.inclusion.map) == elements, "listed elements are not the generated substructure"
    assert structure_document(sub.structure)["functions"] == doc["substructure"]["tables"]["functions"]
    surj = check_morphism(doc["surjection"], sub.structure, A, HOM)
    assert set(surj.map) == set(A.elements()), "not surjective"


def embedded_summary(result: Embedded) -> str:
    if result.engine == MALCEV:
        return f"embedded into a reduced product of {len(result.indices)} factor(s)"
    return f"image of a {result.presentation.sub.size}-element substructure of a product of {len(result.indices)} factor(s)"


__all__ = [
    "dumps",
    "format_assignment",
    "structure_document",
    "witness_document",
    "witness_text",
    "audit_witness_document",
    "embedded_summary",
    "structure_to_dsl",
]
