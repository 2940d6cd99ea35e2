"""Bounded enumeration of basic Horn clauses and their validity in a catalog."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Optional

import numpy as np

from .errors import ResourceCapError
from .structures import StructureCatalog, atom_grid
from .syntax import (
    Atom,
    Eq,
    HornFormula,
    Signature,
    atom_vars,
    atoms_over,
    substitute,
    var_name,
)

HORN = "horn"
STRICT = "strict"
QUASI_IDENTITY = "quasi-identity"
IDENTITY = "identity"
NON_STRICT = "non-strict"
FORMULA_KINDS = (HORN, STRICT, QUASI_IDENTITY, IDENTITY, NON_STRICT)

MAX_CLAUSES = 2 * 10**6


@dataclass(frozen=True)
class EnumerationBounds:
    max_vars: int = 2
    max_term_depth: int = 1
    max_negatives: int = 1

    def __post_init__(self):
        if min(self.max_vars, self.max_term_depth, self.max_negatives) < 0:
            raise ValueError("bounds must be nonnegative")


def atom_key(atom: Atom) -> str:
    """String form with equation sides in a fixed order."""
    if isinstance(atom, Eq):
        left, right = sorted((str(atom.left), str(atom.right)))
        return f"{left}={right}"
    return str(atom)


def oriented(atom: Atom) -> Atom:
    if isinstance(atom, Eq) and str(atom.left) > str(atom.right):
        return Eq(atom.right, atom.left)
    return atom


def canonical_key(phi: HornFormula) -> tuple:
    """Invariant of ``phi`` under variable renaming, equation symmetry and premise order.

    Two clauses get the same key exactly when one is obtained from the
    other by those operations (duplicate premises count once).
    """
    variables = phi.free_vars
    best = None
    for perm in permutations(range(len(variables))):
        ren = {v: var_name(p) for v, p in zip(variables, perm)}
        negs = tuple(sorted({atom_key(substitute(a, ren)) for a in phi.negatives}))
        pos = atom_key(substitute(phi.positive, ren)) if phi.positive is not None else ""
        key = (negs, pos)
        if best is None or key < best:
            best = key
    return best


def _kind_ok(kind: str, n_neg: int, has_pos: bool) -> bool:
    if kind == HORN:
        return True
    if kind in (STRICT, QUASI_IDENTITY):
        return has_pos
    if kind == IDENTITY:
        return has_pos and n_neg == 0
    if kind == NON_STRICT:
        return not has_pos
    raise ValueError(f"unknown formula kind {kind!r}")


def enumerate_horn(
    sig: Signature,
    bounds: EnumerationBounds,
    kind: str = HORN,
    max_clauses: int = MAX_CLAUSES,
) -> list[HornFormula]:
    """Every basic Horn clause within ``bounds``, one per equivalence class.

    Classes are taken up to variable renaming, equation symmetry and premise
    order (see :func:`canonical_key`). Each representative has its premises
    sorted and its variables renamed in first-occurrence order. The result
    is sorted by number of premises, strict before headless, then key.
    """
    return [phi for phi, _, _ in _enumerate(sig, bounds, kind, max_clauses)[1]]


def _enumerate(sig, bounds, kind, max_clauses):
    """Representatives plus, for each, the pool-atom ids of one member of its class."""
    _kind_ok(kind, 0, True)
    pool = [var_name(i) for i in range(bounds.max_vars)]
    atoms = atoms_over(sig, pool, bounds.max_term_depth)
    index = {v: i for i, v in enumerate(pool)}
    masks = [sum(1 << index[v] for v in set(atom_vars(a))) for a in atoms]
    # rows[k] holds, per permutation of the first k pool variables, the rank
    # of each renamed atom's key (or -1 when the atom uses a variable >= k)
    keyed: dict[str, Atom] = {}
    raw_rows: list[list[list]] = []
    for k in range(len(pool) + 1):
        per_k = []
        for perm in permutations(range(k)):
            ren = {pool[i]: pool[p] for i, p in enumerate(perm)}
            row = []
            for a, m in zip(atoms, masks):
                if m >> k:
                    row.append(None)
                else:
                    b = oriented(substitute(a, ren))
                    key = atom_key(b)
                    keyed.setdefault(key, b)
                    row.append(key)
            per_k.append(row)
        raw_rows.append(per_k)
    names = sorted(keyed)
    rank = {key: r for r, key in enumerate(names)}
    rows = [[[rank[key] if key is not None else -1 for key in row] for row in per_k] for per_k in raw_rows]

    seen: dict[tuple, tuple] = {}
    considered = 0
    for n_neg in range(bounds.max_negatives + 1):
        pos_choices = ([None] if _kind_ok(kind, n_neg, False) and n_neg else []) + (
            list(range(len(atoms))) if _kind_ok(kind, n_neg, True) else []
        )
        if not pos_choices:
            continue
        for negs in combinations(range(len(atoms)), n_neg):
            neg_mask = 0
            for i in negs:
                neg_mask |= masks[i]
            neg_keys: dict[int, list] = {}
            for pos in pos_choices:
                considered += 1
                if considered > max_clauses:
                    raise ResourceCapError(f"enumeration exceeds {max_clauses} candidate clauses")
                mask = neg_mask | (masks[pos] if pos is not None else 0)
                if mask & (mask + 1):
                    continue  # variables are not an initial segment of the pool
                k = mask.bit_length()
                nk = neg_keys.get(k)
                if nk is None:
                    nk = neg_keys[k] = [tuple(sorted(row[i] for i in negs)) for row in rows[k]]
                if pos is None:
                    key = (min(nk), -1)
                else:
                    key = min(zip(nk, (row[pos] for row in rows[k])))
                if key not in seen:
                    seen[key] = (negs, pos)
    var_order = {key: tuple(dict.fromkeys(atom_vars(a))) for key, a in keyed.items()}
    renamed_cache: dict[tuple, Atom] = {}

    def rename(key, ren):
        if not ren:
            return keyed[key]
        got = renamed_cache.get((key, ren))
        if got is None:
            got = renamed_cache[(key, ren)] = substitute(keyed[key], dict(ren))
        return got

    out = []
    for key, (negs, pos) in sorted(seen.items(), key=lambda kv: (len(kv[0][0]), kv[0][1] < 0, kv[0])):
        keys = [names[r] for r in key[0]] + ([names[key[1]]] if key[1] >= 0 else [])
        order = dict.fromkeys(v for k in keys for v in var_order[k])
        ren = tuple((v, var_name(i)) for i, v in enumerate(order) if v != var_name(i))
        atoms_ = [rename(k, ren) for k in keys]
        if key[1] >= 0:
            phi = HornFormula(tuple(atoms_[:-1]), atoms_[-1])
        else:
            phi = HornFormula(tuple(atoms_), None)
        out.append((phi, negs, pos))
    return atoms, out


def atom_bitsets(M, atoms, variables) -> list[int]:
    """Truth set of each atom in ``M`` as a Python-int bitset over the assignment grid."""
    out = []
    for atom in atoms:
        grid = atom_grid(M, atom, variables).reshape(-1)
        out.append(int.from_bytes(np.packbits(grid, bitorder="little").tobytes(), "little"))
    return out


def valid_formulas(
    K: StructureCatalog,
    bounds: EnumerationBounds,
    kind: str = HORN,
    max_clauses: int = MAX_CLAUSES,
) -> list[HornFormula]:
    """The enumerated clauses that hold in every member of ``K``.

    A clause fails in M exactly when some assignment makes every premise
    true and the conclusion false, so validity is an AND / AND-NOT over
    per-atom truth bitsets.
    """
    atoms, candidates = _enumerate(K.sig, bounds, kind, max_clauses)
    pool = [var_name(i) for i in range(bounds.max_vars)]
    tables = [(atom_bitsets(M, atoms, pool), (1 << M.size ** len(pool)) - 1) for M in K]
    out = []
    for phi, negs, pos in candidates:
        for bits, full in tables:
            acc = full
            for i in negs:
                acc &= bits[i]
            if pos is not None:
                acc &= ~bits[pos]
            if acc:
                break
        else:
            out.append(phi)
    return out
