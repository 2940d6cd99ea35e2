"""Seeded property suites behind ``fmw verify``.

Each suite draws ``cases`` instances from ``random.Random(seed)``, checks
them with code paths independent of the construction under test (plain
loops over tables and assignments), and reports pass counts plus the first
counterexample. Reports contain no timings, so equal seeds give equal bytes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional

from .audits import los_audit
from .constructions import (
    ReducedProductStructure,
    all_proper_filters,
    diagram,
    direct_product,
    expand_structure,
    generated_substructure,
)
from .enumeration import EnumerationBounds
from .errors import DiagramViolation, QuotientConflict, ResourceCapError, format_sentence
from .generate import MAG, RM, SIGNATURES, random_catalog, random_family, random_filter, random_structure
from .morphisms import find_morphism, image_structure, quotient_from_negative_diagram, embed_from_diagram
from .structures import FiniteStructure, StructureCatalog, eval_atom, eval_term
from .syntax import Eq, HornFormula, expand_signature
from .witness import Refuted, birkhoff_witness, malcev_witness, verify_witness

LOS_BOUNDS = EnumerationBounds(max_vars=3, max_term_depth=1, max_negatives=0)
HORN_BOUNDS = EnumerationBounds(max_vars=3, max_term_depth=1, max_negatives=2)


@dataclass
class SuiteResult:
    suite: str
    seed: int
    cases: int
    passed: int = 0
    first_failure: Optional[str] = None
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.passed == self.cases

    def bump(self, key: str, k: int = 1) -> None:
        self.stats[key] = self.stats.get(key, 0) + k

    def text(self) -> str:
        lines = [f"suite {self.suite} (seed {self.seed}): {self.passed}/{self.cases} passed"]
        for key in sorted(self.stats):
            lines.append(f"  {key}: {self.stats[key]}")
        if self.first_failure is not None:
            lines.append(f"  first counterexample: {self.first_failure}")
        return "\n".join(lines) + "\n"

    def document(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "cases": self.cases,
            "passed": self.passed,
            "stats": dict(sorted(self.stats.items())),
            "first_failure": self.first_failure,
        }


# -- independent checks -------------------------------------------------------


def brute_holds(A, phi: HornFormula, asg: dict) -> bool:
    if not all(eval_atom(A, asg, a) for a in phi.negatives):
        return True
    return phi.positive is not None and eval_atom(A, asg, phi.positive)


def brute_valid(A: FiniteStructure, phi: HornFormula) -> bool:
    xs = phi.free_vars
    return all(brute_holds(A, phi, dict(zip(xs, vals))) for vals in product(range(A.size), repeat=len(xs)))


def brute_embedding(h, A: FiniteStructure, B) -> bool:
    """Injective, function-preserving, relation-preserving and -reflecting."""
    if len(set(h)) != len(h):
        return False
    for s in A.sig.functions:
        for args in product(range(A.size), repeat=s.arity):
            if h[A.apply(s.name, args)] != B.apply(s.name, [h[a] for a in args]):
                return False
    for s in A.sig.relations:
        for args in product(range(A.size), repeat=s.arity):
            if A.holds(s.name, args) != B.holds(s.name, [h[a] for a in args]):
                return False
    return True


def brute_hom(h, A: FiniteStructure, B) -> bool:
    for s in A.sig.functions:
        for args in product(range(A.size), repeat=s.arity):
            if h[A.apply(s.name, args)] != B.apply(s.name, [h[a] for a in args]):
                return False
    for s in A.sig.relations:
        for args in product(range(A.size), repeat=s.arity):
            if A.holds(s.name, args) and not B.holds(s.name, [h[a] for a in args]):
                return False
    return True


# -- suites -------------------------------------------------------------------


def _los_suite(res: SuiteResult, rng: random.Random, bounds: EnumerationBounds) -> None:
    for case in range(res.cases):
        factors = random_family(rng, RM)
        bad = None
        for F in all_proper_filters(len(factors)):
            report = los_audit(factors, F, bounds)
            res.bump("filters audited")
            res.bump("atomic checks", report.atomic_checks)
            res.bump("clause instances decided", report.horn_checks)
            if not report.ok:
                bad = f"case {case}, filter {F}: {report.violations[0]}"
                break
        _record(res, bad)


def _record(res: SuiteResult, failure: Optional[str]) -> None:
    if failure is None:
        res.passed += 1
    elif res.first_failure is None:
        res.first_failure = failure


def _superstructure(rng, A: FiniteStructure, extra: int):
    """A random structure with ``A`` on its first elements, shuffled; returns it and the placement."""
    n = A.size + extra
    perm = list(range(n))
    rng.shuffle(perm)
    fns = {}
    for s in A.sig.functions:
        table = []
        for args in product(range(n), repeat=s.arity):
            if all(a < A.size for a in args):
                table.append(A.apply(s.name, args))
            else:
                table.append(rng.randrange(n))
        fns[s.name] = table
    rels = {}
    for s in A.sig.relations:
        facts = set(A.relations[s.name])
        for args in product(range(n), repeat=s.arity):
            if not all(a < A.size for a in args) and rng.random() < 0.5:
                facts.add(args)
        rels[s.name] = facts
    # relabel element a as perm[a]
    inv = {perm[a]: a for a in range(n)}
    out_fns = {}
    for s in A.sig.functions:
        out_fns[s.name] = tuple(
            perm[fns[s.name][_flat([inv[b] for b in args], n)]] for args in product(range(n), repeat=s.arity)
        )
    out_rels = {s.name: frozenset(tuple(perm[a] for a in t) for t in rels[s.name]) for s in A.sig.relations}
    N = FiniteStructure(A.sig, n, out_fns, out_rels, "B")
    return N, tuple(perm[a] for a in range(A.size))


def _flat(args, n):
    k = 0
    for a in args:
        k = k * n + a
    return k


def _mutate(rng, B: FiniteStructure, A: FiniteStructure, place):
    """Break one diagram sentence of ``A`` in ``B``; returns the mutant and the targeted sentence."""
    sig = B.sig
    D = diagram(A, sig)
    options = []
    for atom in D.positive:
        if not isinstance(atom, Eq) or B.size > 1:
            options.append((atom, False))
    for atom in D.negative:
        if not isinstance(atom, Eq) or atom.left.args:
            options.append((atom, True))
    if not options:
        return None, None
    atom, negated = options[rng.randrange(len(options))]
    fns = dict(B.functions)
    rels = dict(B.relations)
    elem = sig.element_of
    args = tuple(B.apply(t.symbol, ()) for t in (atom.args if not isinstance(atom, Eq) else atom.left.args))
    if not isinstance(atom, Eq):
        facts = set(rels[atom.symbol])
        (facts.add if negated else facts.discard)(args)
        rels[atom.symbol] = frozenset(facts)
    else:
        f = atom.left.symbol
        table = list(fns[f])
        k = _flat(args, B.size)
        if negated:
            table[k] = place[elem[atom.right.symbol]]
        else:
            others = [v for v in range(B.size) if v != table[k]]
            outside = [v for v in others if v not in place]
            table[k] = rng.choice(outside or others)
        fns[f] = tuple(table)
    return FiniteStructure(sig, B.size, fns, rels, "B'"), format_sentence(atom, negated)


def _failing(A, B) -> list[str]:
    return [format_sentence(atom, neg) for atom, neg in diagram(A, B.sig).sentences() if eval_atom(B, {}, atom) == neg]


def _diagram_suite(res: SuiteResult, rng: random.Random) -> None:
    for case in range(res.cases):
        sig = SIGNATURES[case % len(SIGNATURES)]
        A = random_structure(rng, sig, rng.randint(1, 3), "A")
        N, place = _superstructure(rng, A, rng.randint(0, 2))
        esig = expand_signature(sig, A.size)
        B = expand_structure(N, esig, place)
        failure = None
        mutant = None
        try:
            h = embed_from_diagram(A, B)
            if h.map != place or not brute_embedding(h.map, A, N):
                failure = f"case {case}: wrong embedding {h.map}, expected {place}"
        except DiagramViolation as exc:
            failure = f"case {case}: unexpected violation {exc.sentence}"
        if failure is None:
            mutant, target = _mutate(rng, B, A, place)
        if mutant is not None:
            failing = _failing(A, mutant)
            expected = failing[0] if failing else None
            try:
                embed_from_diagram(A, mutant)
                failure = f"case {case}: mutant breaking {target} accepted"
            except DiagramViolation as exc:
                res.bump("mutants rejected")
                if failing == [target]:
                    res.bump("mutants violating only the targeted sentence")
                if target not in failing or exc.sentence != expected:
                    failure = f"case {case}: reported {exc.sentence}, first failing is {expected}"
        _record(res, failure)


def _quotient_suite(res: SuiteResult, rng: random.Random) -> None:
    for case in range(res.cases):
        sig = MAG if case % 2 else RM
        A = random_structure(rng, sig, rng.randint(1, 3), "A")
        esig = expand_signature(sig, A.size)
        failure = None
        if case % 4 < 2:
            # A × N with ȧ ↦ (a, n_a) always satisfies diag⁻(A) and projects onto A
            N = random_structure(rng, sig, rng.randint(1, 3), "N")
            P = direct_product([A, N], sig).carrier
            consts = [a * N.size + rng.randrange(N.size) for a in range(A.size)]
            B = expand_structure(P, esig, consts)
            kind = "product"
        else:
            N = random_structure(rng, sig, rng.randint(A.size, 4), "N")
            consts = rng.sample(range(N.size), A.size)
            B = expand_structure(N, esig, consts)
            kind = "random"
        try:
            q = quotient_from_negative_diagram(A, B)
            g = q.surjection.map
            ok = brute_hom(g, q.sub, A) and set(g) == set(range(A.size))
            ok = ok and brute_embedding(q.inclusion.map, q.sub, q.ambient)
            # each constant's element is sent to the element it names
            ok = ok and all(g[q.inclusion.map.index(B.apply(c, ()))] == a for a, c in enumerate(esig.constants))
            res.bump(f"{kind}: surjections verified")
            if not ok:
                failure = f"case {case}: surjection {g} does not verify"
        except QuotientConflict as exc:
            res.bump(f"{kind}: conflicts")
            if not _conflict_witnessed(exc, A, B):
                failure = f"case {case}: conflict {exc} not witnessed"
            elif kind == "product":
                failure = f"case {case}: conflict on a product instance"
        except DiagramViolation as exc:
            res.bump(f"{kind}: negative diagram fails")
            if kind == "product" or eval_atom(B, {}, exc.atom) is not True:
                failure = f"case {case}: bogus violation {exc.sentence}"
        _record(res, failure)


def _conflict_witnessed(exc: QuotientConflict, A, B) -> bool:
    """The atom holds in B while its A-reading (constants as their elements) fails."""
    if not eval_atom(B, {}, exc.atom):
        return False
    As = expand_structure(A, B.sig, list(range(A.size)))
    if isinstance(exc.atom, Eq):
        values = (eval_term(As, {}, exc.atom.left), eval_term(As, {}, exc.atom.right))
        return values[0] != values[1] and tuple(exc.values) == values
    return not eval_atom(As, {}, exc.atom)


def _check_refutation(r: Refuted, A, K) -> Optional[str]:
    phi = r.formula
    for M in K:
        if not brute_valid(M, phi):
            return f"{phi} fails in {M.name}"
    if brute_holds(A, phi, r.falsifying):
        return f"{phi} holds in A at {r.falsifying}"
    return None


def _planted_malcev(rng, sig):
    """A substructure of a reduced product of catalog members, with the catalog."""
    K = random_catalog(rng, sig, max_members=2, max_size=2)
    factors = [K.members[rng.randrange(len(K))] for _ in range(rng.randint(1, 3))]
    R = ReducedProductStructure(factors, random_filter(rng, len(factors)))
    C = R.carrier
    seed = rng.sample(range(C.size), min(C.size, rng.randint(1, 2)))
    return generated_substructure(C, seed, name="A").structure, K


def _planted_birkhoff(rng, sig):
    """A homomorphic image of a substructure of a product of catalog members."""
    K = random_catalog(rng, sig, max_members=2, max_size=2)
    factors = [K.members[rng.randrange(len(K))] for _ in range(rng.randint(1, 3))]
    P = direct_product(factors, sig).carrier
    seed = rng.sample(range(P.size), min(P.size, rng.randint(1, 2)))
    C = generated_substructure(P, seed).structure
    T = random_structure(rng, sig, rng.randint(1, 3), "T")
    h = find_morphism(C, T)
    if h is None:
        h = find_morphism(C, C)
    return image_structure(h).renamed("A"), K


def _witness_suite(res: SuiteResult, rng: random.Random, engine: Callable, planted: Callable) -> None:
    for case in range(res.cases):
        sig = SIGNATURES[case % len(SIGNATURES)]
        plant = case % 4 == 3
        if plant:
            A, K = planted(rng, sig)
        else:
            A = random_structure(rng, sig, rng.randint(1, 3), "A")
            K = random_catalog(rng, sig)
        failure = None
        try:
            r = engine(A, K)
            verify_witness(A, K, r)
        except ResourceCapError as exc:
            res.bump("resource caps")
            _record(res, f"case {case}: {exc}")
            continue
        if r.refuted:
            res.bump("refuted")
            failure = _check_refutation(r, A, K)
            if plant and failure is None:
                failure = f"case {case}: planted member refuted by {r.formula}"
        else:
            res.bump("embedded")
            if r.engine == "malcev":
                R = r.construction.reduct()
                if not brute_embedding(r.morphism.map, A, R):
                    failure = f"case {case}: embedding {r.morphism.map} does not verify"
            else:
                q = r.presentation
                if not (brute_embedding(q.inclusion.map, q.sub, q.ambient) and brute_hom(q.surjection.map, q.sub, A)):
                    failure = f"case {case}: presentation does not verify"
        if plant:
            res.bump("planted members")
        _record(res, failure if failure is None or failure.startswith("case") else f"case {case}: {failure}")


SUITES = ("los", "horn", "diagram", "quotient", "malcev", "birkhoff")


def run_suite(suite: str, seed: int, cases: int) -> SuiteResult:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    rng = random.Random(f"{suite}:{seed}")
    res = SuiteResult(suite, seed, cases)
    if suite == "los":
        _los_suite(res, rng, LOS_BOUNDS)
    elif suite == "horn":
        _los_suite(res, rng, HORN_BOUNDS)
    elif suite == "diagram":
        _diagram_suite(res, rng)
    elif suite == "quotient":
        _quotient_suite(res, rng)
    elif suite == "malcev":
        _witness_suite(res, rng, malcev_witness, _planted_malcev)
    else:
        _witness_suite(res, rng, birkhoff_witness, _planted_birkhoff)
    return res
