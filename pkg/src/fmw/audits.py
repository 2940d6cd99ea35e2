"""Exhaustive audits of reduced products and of strictness in the presence of a unit.

The Łoś audit compares, for every atom over the variable pool and every
tuple of class representatives, truth in the materialized carrier with
membership of the truth set in the filter. For Horn clauses only the pair
(truth set, carrier truth) of each atom matters, so every clause within the
bounds is decided by combining the distinct pairs present at a parameter
tuple; see :func:`_horn_violation`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Optional, Sequence

import numpy as np

from .constructions import FilterOnFiniteSet, ReducedProductStructure
from .enumeration import EnumerationBounds, valid_formulas
from .errors import ResourceCapError
from .structures import FiniteStructure, GridPlan, StructureCatalog, unit_structure
from .syntax import Signature
from .syntax import Atom, HornFormula, atoms_over, var_name

MAX_AUDIT_INDEX = 5  # truth-set codes must fit a 64-bit presence word
MAX_AUDIT_POINTS = 2 * 10**6


@dataclass
class LosViolation:
    clause: str  # "atomic" or "horn"
    formula: str
    params: tuple

    def __str__(self):
        return f"{self.clause}: {self.formula} at {self.params}"


@dataclass
class LosReport:
    atoms: int
    points: int
    atomic_checks: int = 0
    horn_checks: int = 0
    violations: list[LosViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def los_audit(
    factors: Sequence[FiniteStructure],
    F: FilterOnFiniteSet,
    bounds: EnumerationBounds,
    carrier: Optional[FiniteStructure] = None,
    max_violations: int = 5,
) -> LosReport:
    """Check both directions of the reduced-product truth lemma within ``bounds``.

    ``carrier`` defaults to the materialized reduced product; pass a
    modified copy to confirm that the audit notices corruption. Its element
    ``k`` must stand for the k-th class representative.
    """
    R = ReducedProductStructure(factors, F)
    if len(factors) > MAX_AUDIT_INDEX:
        raise ResourceCapError(f"audit supports at most {MAX_AUDIT_INDEX} indices")
    C = carrier if carrier is not None else R.carrier
    reps = np.array(R.class_reps(), dtype=np.int64).reshape(C.size, len(factors))
    pool = [var_name(i) for i in range(bounds.max_vars)]
    k = len(pool)
    points = C.size**k
    if points > MAX_AUDIT_POINTS:
        raise ResourceCapError(f"{points} parameter tuples exceed {MAX_AUDIT_POINTS}")
    plan = _plan(C.sig, bounds.max_vars, bounds.max_term_depth)
    atoms = plan.atoms
    report = LosReport(len(atoms), points)
    core = F.core

    truth = plan.evaluate(C)
    # sets[a, p]: bitmask of the indices whose factor satisfies atom a at point p
    sets = np.zeros((len(atoms), points), dtype=np.uint8)
    for i, Fi in enumerate(factors):
        # flat index of each carrier point's i-th coordinates in the factor grid
        fidx = np.zeros(points, dtype=np.int64)
        for axis in range(k):
            coord = reps[:, i].reshape([C.size if j == axis else 1 for j in range(k)])
            fidx = fidx * Fi.size + np.broadcast_to(coord, (C.size,) * k).reshape(-1)
        sets |= np.take(_factor_truth(plan, Fi), fidx, axis=1).view(np.uint8) << i
    core = np.uint8(F.core)
    mismatch = truth != ((sets & core) == core)
    report.atomic_checks = truth.size
    bad = np.argwhere(mismatch) if mismatch.any() else ()
    for a, p in bad[:max_violations]:
        report.violations.append(LosViolation("atomic", str(atoms[a]), _params(int(p), C.size, pool)))

    if not report.violations:
        _audit_horn(report, atoms, truth, sets, F.core, len(factors), bounds.max_negatives, C.size, pool, max_violations)
    return report


@lru_cache(maxsize=32)
def _plan(sig: Signature, max_vars: int, max_depth: int) -> GridPlan:
    pool = [var_name(i) for i in range(max_vars)]
    return GridPlan(atoms_over(sig, pool, max_depth), pool)


_FACTOR_MEMO: dict = {}


def _factor_truth(plan: GridPlan, M: FiniteStructure) -> np.ndarray:
    # factors recur across the filters of one family; key on the tables
    key = (
        id(plan),
        M.size,
        tuple(sorted(M.functions.items())),
        tuple(sorted((r, tuple(sorted(t))) for r, t in M.relations.items())),
    )
    got = _FACTOR_MEMO.get(key)
    if got is None:
        if len(_FACTOR_MEMO) > 256:
            _FACTOR_MEMO.clear()
        got = _FACTOR_MEMO[key] = plan.evaluate(M)
    return got


def _params(p: int, n: int, pool) -> tuple:
    point = np.unravel_index(p, (n,) * len(pool)) if pool else ()
    return tuple((v, int(x)) for v, x in zip(pool, point))


def _audit_horn(report, atoms, truth, sets, core, n_idx, max_neg, n, pool, max_violations, chunk=1 << 15):
    # presence[p] has bit s set when some atom false in the carrier at p has
    # truth set s, and bit 2^n_idx + s when some true atom has truth set s
    codes = sets | (truth.view(np.uint8) << n_idx)
    presence = np.empty(codes.shape[1], dtype=np.uint64)
    one = np.uint64(1)
    for lo in range(0, codes.shape[1], chunk):
        block = np.left_shift(one, codes[:, lo : lo + chunk].astype(np.uint64))
        presence[lo : lo + chunk] = np.bitwise_or.reduce(block, axis=0)
    report.horn_checks = report.points * sum(_n_clauses(len(atoms), j) for j in range(max_neg + 1))
    width = 1 << n_idx
    uniq, first = np.unique(presence, return_index=True)
    for code, p in zip(uniq.tolist(), first.tolist()):
        hit = _horn_violation(code >> width, code & ((1 << width) - 1), core, width - 1, max_neg)
        if hit is None:
            continue
        neg_sets, pos_set = hit
        negs = list(dict.fromkeys(_atom_with(atoms, truth, sets, p, s, True) for s in neg_sets))
        pos = _atom_with(atoms, truth, sets, p, pos_set, False) if pos_set is not None else None
        phi = HornFormula(tuple(negs), pos)
        report.violations.append(LosViolation("horn", str(phi), _params(p, n, pool)))
        if len(report.violations) >= max_violations:
            return


def _n_clauses(n_atoms: int, n_neg: int) -> int:
    from math import comb

    heads = n_atoms + (1 if n_neg else 0)
    return comb(n_atoms, n_neg) * heads


def _atom_with(atoms, truth, sets, p, s, value) -> Atom:
    for a in range(len(atoms)):
        if truth[a, p] == value and sets[a, p] == s:
            return atoms[a]
    raise AssertionError("no atom with the requested truth set")


@lru_cache(maxsize=None)
def _horn_violation(t_present: int, f_present: int, core: int, full: int, max_neg: int):
    """Find premise sets and a conclusion set breaking the Horn direction.

    With premises true in the carrier and conclusion false there, the clause
    fails in the carrier; it breaks the lemma when its truth set
    ``∪ complement(premise) ∪ conclusion`` contains the core, i.e. when
    ``core ∩ ⋂premises ∩ complement(conclusion)`` is empty. An absent
    conclusion behaves like an atom true nowhere.
    """
    trues = [s for s in range(full + 1) if t_present >> s & 1]
    falses = [s for s in range(full + 1) if f_present >> s & 1]
    heads = [(s, s) for s in falses] + [(None, 0)]
    for size in range(max_neg + 1):
        for combo in combinations_with_replacement(trues, size):
            inter = full
            for s in combo:
                inter &= s
            for label, s in heads:
                if label is None and not combo:
                    continue
                if core & inter & ~s == 0:
                    return tuple(combo), label
    return None


@dataclass
class StrictnessReport:
    valid: int
    non_strict: list[HornFormula]
    with_unit: bool

    @property
    def ok(self) -> bool:
        return not self.with_unit or not self.non_strict


def strictness_audit(K: StructureCatalog, bounds: EnumerationBounds, add_unit: bool = True) -> StrictnessReport:
    """Valid clauses of ``K`` (plus a unit) within ``bounds``; lists the headless ones."""
    if add_unit:
        K = K.with_member(unit_structure(K.sig, name=_fresh(K, "unit")))
    valid = valid_formulas(K, bounds)
    return StrictnessReport(len(valid), [phi for phi in valid if not phi.strict], add_unit)


def _fresh(K, name):
    names = {m.name for m in K}
    k = 0
    out = name
    while out in names:
        k += 1
        out = f"{name}{k}"
    return out
