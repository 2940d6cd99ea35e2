"""Seeded random instances for the property suites."""

from __future__ import annotations

import random
from itertools import product
from typing import Optional

from .constructions import FilterOnFiniteSet, expand_structure
from .structures import FiniteStructure, StructureCatalog
from .syntax import ExpandedSignature, Signature

GRAPH = Signature.of("Graph", relations=[("r", 2)])
MAG = Signature.of("Mag", functions=[("m", 2)])
RM = Signature.of("RM", functions=[("m", 2)], relations=[("r", 2)])
SIGNATURES = (GRAPH, MAG, RM)


def random_structure(rng: random.Random, sig: Signature, size: int, name: str = "", density: Optional[float] = None) -> FiniteStructure:
    """Uniform tables; each relation tuple is present with probability ``density`` (random when None)."""
    p = rng.random() if density is None else density
    fns = {s.name: tuple(rng.randrange(size) for _ in range(size**s.arity)) for s in sig.functions}
    rels = {}
    for s in sig.relations:
        rels[s.name] = frozenset(t for t in product(range(size), repeat=s.arity) if rng.random() < p)
    return FiniteStructure(sig, size, fns, rels, name)


def random_family(rng: random.Random, sig: Signature, max_index: int = 4, max_size: int = 3) -> list[FiniteStructure]:
    n = rng.randint(1, max_index)
    return [random_structure(rng, sig, rng.randint(1, max_size), name=f"A{i}") for i in range(n)]


def random_catalog(rng: random.Random, sig: Signature, max_members: int = 3, max_size: int = 3) -> StructureCatalog:
    k = rng.randint(1, max_members)
    return StructureCatalog(sig, [random_structure(rng, sig, rng.randint(1, max_size), name=f"K{i}") for i in range(k)])


def random_filter(rng: random.Random, n: int) -> FilterOnFiniteSet:
    return FilterOnFiniteSet(n, rng.randrange(1, 1 << n))


def random_expansion(rng: random.Random, M: FiniteStructure, sig: ExpandedSignature) -> FiniteStructure:
    return expand_structure(M, sig, [rng.randrange(M.size) for _ in sig.constants])
