"""Finite model theory workbench: Horn clauses, finite structures, reduced
products, diagrams, and the witness procedures that place a finite structure
in the quasivariety or the variety generated by a finite catalog, or refute
membership with a formula.
"""

__version__ = "0.1.0"

from .audits import los_audit, strictness_audit
from .constructions import (
    Diagram,
    FilterOnFiniteSet,
    ProductStructure,
    ReducedProductStructure,
    all_proper_filters,
    diagram,
    direct_product,
    expand_structure,
    filter_from_generators,
    generated_substructure,
    reduced_product,
    self_expansion,
)
from .dsl import Workspace, load, parse_file, parse_formula
from .enumeration import EnumerationBounds, enumerate_horn, valid_formulas
from .errors import (
    DiagramViolation,
    FIPViolation,
    MorphismViolation,
    ParseError,
    QuotientConflict,
    ResourceCapError,
    SignatureError,
    StructureError,
    WorkbenchError,
)
from .morphisms import (
    Morphism,
    check_morphism,
    embed_from_diagram,
    find_morphism,
    image_structure,
    isomorphic,
    quotient_from_negative_diagram,
)
from .structures import FiniteStructure, StructureCatalog, class_satisfies, satisfies, unit_structure
from .syntax import HornFormula, Signature, classify, expand_signature
from .witness import Embedded, Refuted, birkhoff_witness, malcev_witness, verify_witness
