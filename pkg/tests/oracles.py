"""Independent reference implementations used only by the tests.

Nothing here calls the evaluators, search routines or constructions of
``fmw``; everything works from raw tables with plain loops.
"""

from __future__ import annotations

from itertools import permutations, product

from fmw.syntax import App, Eq, HornFormula, Rel, Var


def flat(args, n):
    k = 0
    for a in args:
        k = k * n + a
    return k


def fn(A, f, args):
    return A.functions[f][flat(args, A.size)]


def rel(A, r, args):
    return tuple(args) in A.relations[r]


def term_value(A, t, asg):
    if isinstance(t, Var):
        return asg[t.name]
    return fn(A, t.symbol, [term_value(A, a, asg) for a in t.args])


def atom_true(A, atom, asg):
    if isinstance(atom, Eq):
        return term_value(A, atom.left, asg) == term_value(A, atom.right, asg)
    return rel(A, atom.symbol, [term_value(A, a, asg) for a in atom.args])


def clause_true(A, phi: HornFormula, asg):
    if any(not atom_true(A, a, asg) for a in phi.negatives):
        return True
    return phi.positive is not None and atom_true(A, phi.positive, asg)


def variables_of(phi: HornFormula):
    seen = []

    def walk(t):
        if isinstance(t, Var):
            if t.name not in seen:
                seen.append(t.name)
        else:
            for a in t.args:
                walk(a)

    for atom in phi.negatives + ((phi.positive,) if phi.positive is not None else ()):
        for t in (atom.left, atom.right) if isinstance(atom, Eq) else atom.args:
            walk(t)
    return seen


def satisfies(A, phi):
    """(holds, least falsifying assignment in variable-occurrence order)."""
    xs = variables_of(phi)
    for vals in product(range(A.size), repeat=len(xs)):
        asg = dict(zip(xs, vals))
        if not clause_true(A, phi, asg):
            return False, asg
    return True, None


def is_hom(h, A, B, strong=False):
    for f, table in A.functions.items():
        for args in product(range(A.size), repeat=_arity(A, f)):
            if h[fn(A, f, args)] != fn(B, f, [h[a] for a in args]):
                return False
    for r in A.relations:
        for args in product(range(A.size), repeat=_arity(A, r)):
            here, there = rel(A, r, args), rel(B, r, [h[a] for a in args])
            if (here and not there) or (strong and there and not here):
                return False
    if strong and len(set(h)) != len(h):
        return False
    return True


def _arity(A, symbol):
    return A.sig[symbol].arity


def all_homs(A, B, kind="hom"):
    out = []
    for h in product(range(B.size), repeat=A.size):
        strong = kind in ("embedding", "iso")
        if kind == "iso" and (A.size != B.size):
            continue
        if is_hom(h, A, B, strong):
            out.append(h)
    return out


def isomorphic(A, B):
    if A.size != B.size:
        return False
    return any(is_hom(p, A, B, strong=True) for p in permutations(range(B.size)))


def filter_members(n, core):
    return {m for m in range(1 << n) if m & core == core}


def reduced_product_by_definition(factors, n_core_mask):
    """Quotient of the full product by ``{i : s_i = t_i} ∈ F``, classes listed in first-seen order."""
    n = len(factors)
    F = filter_members(n, n_core_mask)
    tuples = list(product(*(range(A.size) for A in factors)))

    def agree(s, t):
        return sum(1 << i for i in range(n) if s[i] == t[i])

    classes: list[list[tuple]] = []
    which = {}
    for t in tuples:
        for k, cls in enumerate(classes):
            if agree(cls[0], t) in F:
                cls.append(t)
                which[t] = k
                break
        else:
            which[t] = len(classes)
            classes.append([t])
    sig = factors[0].sig
    fns = {}
    for s in sig.functions:
        table = []
        for args in product(range(len(classes)), repeat=s.arity):
            reps = [classes[a][0] for a in args]
            value = tuple(fn(factors[i], s.name, [r[i] for r in reps]) for i in range(n))
            table.append(which[value])
        fns[s.name] = tuple(table)
    rels = {}
    for s in sig.relations:
        facts = set()
        for args in product(range(len(classes)), repeat=s.arity):
            reps = [classes[a][0] for a in args]
            truth = sum(1 << i for i in range(n) if rel(factors[i], s.name, [r[i] for r in reps]))
            if truth in F:
                facts.add(args)
        rels[s.name] = frozenset(facts)
    return classes, which, fns, rels


def atom_key(atom):
    if isinstance(atom, Eq):
        return "=".join(sorted((str(atom.left), str(atom.right))))
    return str(atom)


def rename_atom(atom, ren):
    def go(t):
        if isinstance(t, Var):
            return Var(ren[t.name])
        return App(t.symbol, tuple(go(a) for a in t.args))

    if isinstance(atom, Eq):
        return Eq(go(atom.left), go(atom.right))
    return Rel(atom.symbol, tuple(go(a) for a in atom.args))


def count_clause_classes(atoms, pool, max_neg, kind="horn"):
    """Number of clauses over ``atoms`` up to renaming inside ``pool``, by union-find over explicit renamings."""
    from itertools import combinations

    index = {atom_key(a): i for i, a in enumerate(atoms)}
    clauses = []
    for k in range(max_neg + 1):
        for negs in combinations(range(len(atoms)), k):
            heads = list(range(len(atoms))) + ([None] if k else [])
            for h in heads:
                if kind == "identity" and (k or h is None):
                    continue
                if kind == "non-strict" and h is not None:
                    continue
                if kind in ("strict", "quasi-identity") and h is None:
                    continue
                clauses.append((frozenset(negs), h))
    where = {c: i for i, c in enumerate(clauses)}
    parent = list(range(len(clauses)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for perm in permutations(pool):
        ren = dict(zip(pool, perm))
        img = [index[atom_key(rename_atom(a, ren))] for a in atoms]
        for c, i in where.items():
            negs, h = c
            d = (frozenset(img[j] for j in negs), img[h] if h is not None else None)
            a, b = find(i), find(where[d])
            if a != b:
                parent[a] = b
    return len({find(i) for i in range(len(clauses))})
