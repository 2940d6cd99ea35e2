"""Integer codes for the elements of a finite direct product.

A tuple ``(v_0, ..., v_{k-1})`` is coded as its mixed-radix number with the
first factor most significant, so code order is tuple order. Operations
act on whole arrays of codes by table lookup in each factor, which keeps
closure computations inside a large product out of the interpreter loop.
"""

from __future__ import annotations

from math import prod
from typing import Iterator, Sequence

import numpy as np

from .structures import FiniteStructure

MAX_CODE = 2**62
BATCH = 1 << 20


class ProductCodec:
    """Vectorized view of a product of explicit finite structures."""

    def __init__(self, factors: Sequence[FiniteStructure]):
        self.factors = tuple(factors)
        self.sizes = [F.size for F in self.factors]
        weights = []
        w = 1
        for n in reversed(self.sizes):
            weights.append(w)
            w *= n
        self.weights = list(reversed(weights))

    @staticmethod
    def supports(B) -> bool:
        if not getattr(B, "componentwise", False):
            return False
        factors = B.factors
        if not all(isinstance(F, FiniteStructure) for F in factors):
            return False
        return prod(F.size for F in factors) < MAX_CODE

    def encode(self, t: Sequence[int]) -> int:
        return sum(v * w for v, w in zip(t, self.weights))

    def decode(self, code: int) -> tuple:
        return tuple((code // w) % n for w, n in zip(self.weights, self.sizes))

    def coords(self, codes: np.ndarray, i: int) -> np.ndarray:
        return (codes // self.weights[i]) % self.sizes[i]

    def apply(self, symbol: str, args: Sequence[np.ndarray]) -> np.ndarray:
        """Codes of ``symbol`` applied coordinatewise to argument code arrays."""
        out = np.zeros(len(args[0]) if args else 1, dtype=np.int64)
        for i, F in enumerate(self.factors):
            flat = np.zeros_like(out)
            for a in args:
                flat = flat * F.size + self.coords(a, i)
            out += np.asarray(F.functions[symbol], dtype=np.int64)[flat] * self.weights[i]
        return out

    def holds(self, symbol: str, args: Sequence[np.ndarray]) -> np.ndarray:
        out = np.ones(len(args[0]) if args else 1, dtype=bool)
        for i, F in enumerate(self.factors):
            out &= F.rel_array(symbol)[tuple(self.coords(a, i) for a in args)]
        return out


def fresh_index_batches(n: int, old: int, k: int, limit: int = BATCH) -> Iterator[np.ndarray]:
    """Index tuples over range(n) with an entry >= old, as (m, k) arrays.

    Rows come in the same order as the nested loops "first fresh position
    j, then the product of the ranges in row-major order", split into
    batches of at most about ``limit`` rows along the leading axis.
    """
    for j in range(k):
        ranges = [np.arange(old)] * j + [np.arange(old, n)] + [np.arange(n)] * (k - j - 1)
        if any(len(r) == 0 for r in ranges):
            continue
        rest = prod(len(r) for r in ranges[1:])
        step = max(1, limit // max(rest, 1))
        head = ranges[0]
        for lo in range(0, len(head), step):
            grids = np.meshgrid(head[lo : lo + step], *ranges[1:], indexing="ij")
            yield np.stack([g.reshape(-1) for g in grids], axis=1)


def closure_codes(codec: ProductCodec, functions, seed: Sequence[int], max_size: int) -> np.ndarray:
    """Sorted codes of the subset generated by ``seed`` under ``functions`` (name, arity) pairs."""
    from .errors import ResourceCapError

    order = np.array(list(dict.fromkeys(seed)), dtype=np.int64)
    if len(order) > max_size:
        raise ResourceCapError(f"generated substructure exceeds {max_size} elements")
    known = np.sort(order)
    old = 0
    while old < len(order):
        new = len(order)
        for name, arity in functions:
            for idx in fresh_index_batches(new, old, arity):
                out = np.unique(codec.apply(name, [order[idx[:, p]] for p in range(arity)]))
                pos = np.searchsorted(known, out)
                hit = pos < len(known)
                hit[hit] = known[pos[hit]] == out[hit]
                fresh = out[~hit]
                if len(fresh):
                    if len(order) + len(fresh) > max_size:
                        raise ResourceCapError(f"generated substructure exceeds {max_size} elements")
                    order = np.concatenate([order, fresh])
                    known = np.sort(np.concatenate([known, fresh]))
        old = new
    return known


def tabulate_codes(codec: ProductCodec, sig, elems: np.ndarray, max_table: int):
    """Function tables and relation facts of the substructure on sorted ``elems``."""
    from .errors import ResourceCapError

    n = len(elems)
    fns = {}
    for s in sig.functions:
        if n**s.arity > max_table:
            raise ResourceCapError(f"table for {s.name} would have {n ** s.arity} entries")
        grid = all_tuples(n, s.arity)
        out = codec.apply(s.name, [elems[grid[:, p]] for p in range(s.arity)])
        fns[s.name] = tuple(np.searchsorted(elems, out).tolist())
    rels = {}
    for s in sig.relations:
        if n**s.arity > max_table:
            raise ResourceCapError(f"relation {s.name} would need {n ** s.arity} checks")
        grid = all_tuples(n, s.arity)
        mask = codec.holds(s.name, [elems[grid[:, p]] for p in range(s.arity)])
        rels[s.name] = frozenset(map(tuple, grid[mask].tolist()))
    return fns, rels


def all_tuples(n: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([np.arange(n)] * k), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


__all__ = ["ProductCodec", "all_tuples", "closure_codes", "fresh_index_batches", "tabulate_codes"]
