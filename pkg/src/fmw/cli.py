"""Command-line front end: ``fmw <subcommand> [FILE] [options]``.

Exit codes: 0 the property holds or the construction succeeded, 1 it fails
or the input is refuted (a witness is printed), 2 usage or input error,
3 a resource cap was hit.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import __version__
from .audits import los_audit, strictness_audit
from .constructions import (
    MAX_PRODUCT,
    FilterOnFiniteSet,
    diagram,
    direct_product,
    expand_structure,
    filter_from_generators,
    reduced_product,
)
from .dsl import Workspace, load, parse_formula, parse_int_list, parse_subsets, structure_to_dsl
from .enumeration import FORMULA_KINDS, HORN, EnumerationBounds, valid_formulas
from .errors import DiagramViolation, MorphismViolation, QuotientConflict, ResourceCapError, WorkbenchError, format_sentence, format_subset
from .morphisms import KINDS, MAX_SEARCH, HOM, check_morphism, embed_from_diagram, find_morphism, quotient_from_negative_diagram
from .report import dumps, format_assignment, structure_document, witness_document, witness_text
from .structures import MAX_ASSIGNMENTS, class_satisfies, satisfies, unit_structure
from .syntax import expand_signature, kind_label
from .verify import SUITES, run_suite
from .witness import birkhoff_witness, malcev_witness

OK, FAILS, USAGE, CAP = 0, 1, 2, 3


class Output:
    """Collects text lines or a JSON document and the exit code."""

    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.lines: list[str] = []
        self.doc: dict = {}
        self.code = OK

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def render(self) -> str:
        if self.as_json:
            return dumps(self.doc)
        return "".join(line + "\n" for line in self.lines)


def _names(text: str) -> list[str]:
    return [n.strip() for n in text.split(",") if n.strip()]


def _count(n: int, noun: str) -> str:
    return f"{n} {noun}" if n == 1 else f"{n} {noun}s"


def _bounds(args) -> EnumerationBounds:
    return EnumerationBounds(args.vars, args.depth, args.negatives)


def _core(text: str, n: int) -> int:
    masks = parse_subsets(text, n)
    if len(masks) != 1:
        raise WorkbenchError("--filter takes one braced subset, e.g. {1}")
    return masks[0]


def _factor_filter(args, n: int) -> FilterOnFiniteSet:
    if args.filter and args.gens:
        raise WorkbenchError("give either --filter or --gens, not both")
    if args.gens:
        return filter_from_generators(n, parse_subsets(args.gens, n))
    if args.filter:
        return FilterOnFiniteSet(n, _core(args.filter, n))
    return FilterOnFiniteSet.trivial(n)


# -- subcommands ---------------------------------------------------------------


def cmd_check(ws: Workspace, args, out: Output) -> None:
    A = ws.structure(args.structure)
    phi = _formula(ws, args, A.sig)
    res = satisfies(A, phi, args.max_assignments)
    out.doc = {"structure": A.name, "formula": str(phi), "kind": kind_label(phi), "holds": res.holds, "witness": res.witness}
    if res.holds:
        out.say(f"holds: {A.name} ⊨ {phi}")
    else:
        out.say(f"fails: {A.name} ⊭ {phi} at {format_assignment(res.witness)}")
        out.code = FAILS


def _formula(ws: Workspace, args, sig):
    if args.formula in ws.formulas:
        return ws.formula(args.formula).check(sig)
    return parse_formula(args.formula, sig)


def cmd_class_check(ws: Workspace, args, out: Output) -> None:
    K = ws.catalog(_names(args.cls))
    phi = _formula(ws, args, K.sig)
    res = class_satisfies(K, phi, args.max_assignments)
    out.doc = {"class": [M.name for M in K], "formula": str(phi), "holds": res.holds, "failing_member": res.failing_member, "witness": res.witness}
    if res.holds:
        out.say(f"holds in every member of {{{', '.join(M.name for M in K)}}}: {phi}")
    else:
        out.say(f"fails in {res.failing_member} at {format_assignment(res.witness)}: {phi}")
        out.code = FAILS


def cmd_unit(ws: Workspace, args, out: Output) -> None:
    U = unit_structure(ws.signature(args.signature))
    out.doc = structure_document(U)
    out.say(structure_to_dsl(U, "unit", args.signature))


def cmd_product(ws: Workspace, args, out: Output) -> None:
    factors = [ws.structure(n) for n in _names(args.factors)]
    P = direct_product(factors, max_product=args.max_product)
    C = P.materialize(args.max_product)
    out.doc = structure_document(C) | {"elements": [list(t) for t in P.elements()]}
    out.say(f"# elements: {', '.join(str(i) + '=' + str(t) for i, t in enumerate(P.elements()))}")
    out.say(structure_to_dsl(C, "product", C.sig.name or None))


def cmd_rprod(ws: Workspace, args, out: Output) -> None:
    factors = [ws.structure(n) for n in _names(args.factors)]
    F = _factor_filter(args, len(factors))
    R = reduced_product(factors, F, max_product=args.max_product)
    C = R.materialize(args.max_product)
    reps = R.class_reps()
    out.doc = structure_document(C) | {"filter": list(F.core_indices), "representatives": [list(t) for t in reps]}
    out.say(f"# filter {F}; representatives: {', '.join(str(i) + '=' + str(t) for i, t in enumerate(reps))}")
    out.say(structure_to_dsl(C, "reduced", C.sig.name or None))


def cmd_filter(ws, args, out: Output) -> None:
    F = filter_from_generators(args.n, parse_subsets(args.gens or "", args.n))
    members = sorted(F.members, key=lambda m: (bin(m).count("1"), m)) if args.n <= 16 else None
    out.doc = {"n": args.n, "core": list(F.core_indices), "members": [[i for i in range(args.n) if m >> i & 1] for m in members] if members else None}
    out.say(f"filter {F} over {args.n} indices")
    if members is not None:
        out.say("members: " + " ".join(format_subset(m, args.n) for m in members))


def cmd_diagram(ws: Workspace, args, out: Output) -> None:
    A = ws.structure(args.structure)
    D = diagram(A)
    pos = [str(a) for a in D.positive]
    neg = [format_sentence(a, True) for a in D.negative]
    out.doc = {"structure": A.name, "constants": list(D.expanded_sig.constants), "positive": pos, "negative": neg}
    out.say(f"diag⁺({A.name}): {_count(len(pos), 'sentence')}")
    out.lines += [f"  {s}" for s in pos]
    out.say(f"diag⁻({A.name}): {_count(len(neg), 'sentence')}")
    out.lines += [f"  {s}" for s in neg]


def cmd_hom(ws: Workspace, args, out: Output) -> None:
    A = ws.structure(args.source)
    B = ws.structure(args.target)
    if args.map is not None:
        h = parse_int_list(args.map)
        try:
            check_morphism(h, A, B, args.kind)
        except MorphismViolation as exc:
            out.doc = {"kind": args.kind, "map": h, "verified": False, "violation": str(exc)}
            out.say(f"not a {args.kind}: {exc}")
            out.code = FAILS
            return
        out.doc = {"kind": args.kind, "map": h, "verified": True}
        out.say(f"verified {args.kind} {A.name} → {B.name}: {h}")
        return
    m = find_morphism(A, B, args.kind, args.max_search)
    out.doc = {"kind": args.kind, "map": list(m.map) if m else None}
    if m is None:
        out.say(f"no {args.kind} {A.name} → {B.name}")
        out.code = FAILS
    else:
        out.say(f"least {args.kind} {A.name} → {B.name}: {list(m.map)}")


def _expanded_target(ws: Workspace, args):
    A = ws.structure(args.structure)
    N = ws.structure(args.target)
    consts = parse_int_list(args.constants) if args.constants else list(range(A.size))
    return A, expand_structure(N, expand_signature(A.sig, A.size), consts)


def cmd_embed(ws: Workspace, args, out: Output) -> None:
    A, B = _expanded_target(ws, args)
    try:
        h = embed_from_diagram(A, B)
    except DiagramViolation as exc:
        out.doc = {"embedded": False, "failing_sentence": exc.sentence}
        out.say(f"diagram sentence fails: {exc.sentence}")
        out.code = FAILS
        return
    out.doc = {"embedded": True, "map": list(h.map)}
    out.say(f"embedding {A.name} → {args.target}: {list(h.map)}")


def cmd_quotient(ws: Workspace, args, out: Output) -> None:
    A, B = _expanded_target(ws, args)
    try:
        q = quotient_from_negative_diagram(A, B, args.max_product)
    except QuotientConflict as exc:
        out.doc = {"quotient": False, "conflict": exc.sentence, "values": list(exc.values) if exc.values else None}
        out.say(str(exc))
        out.code = FAILS
        return
    except DiagramViolation as exc:
        out.doc = {"quotient": False, "failing_sentence": exc.sentence}
        out.say(f"negative diagram sentence fails: {exc.sentence}")
        out.code = FAILS
        return
    out.doc = {
        "quotient": True,
        "elements": list(q.inclusion.map),
        "surjection": list(q.surjection.map),
        "terms": [str(t) for t in q.terms],
    }
    out.say(f"substructure generated by the constants: {q.sub.size} elements")
    for e, a, t in zip(q.inclusion.map, q.surjection.map, q.terms):
        out.say(f"  {e} ↦ {a}  ({t})")


def cmd_axiomatize(ws: Workspace, args, out: Output) -> None:
    K = ws.catalog(_names(args.cls))
    phis = valid_formulas(K, _bounds(args), args.kind)
    out.doc = {"class": [M.name for M in K], "bounds": vars(_bounds(args)), "formulas": [str(p) for p in phis]}
    out.say(f"# {len(phis)} {args.kind} clauses valid in {{{', '.join(M.name for M in K)}}}")
    out.lines += [str(p) for p in phis]


def _witness(engine, ws: Workspace, args, out: Output, **kw) -> None:
    A = ws.structure(args.structure)
    K = ws.catalog(_names(args.cls))
    r = engine(A, K, max_search=args.max_search, **kw)
    out.doc = witness_document(A, K, r)
    out.lines.append(witness_text(A, K, r).rstrip("\n"))
    if r.refuted:
        out.code = FAILS


def cmd_malcev(ws, args, out):
    _witness(malcev_witness, ws, args, out, faithful=args.faithful)


def cmd_birkhoff(ws, args, out):
    _witness(birkhoff_witness, ws, args, out, max_product=args.max_product)


def cmd_los_audit(ws: Workspace, args, out: Output) -> None:
    factors = [ws.structure(n) for n in _names(args.factors)]
    F = _factor_filter(args, len(factors))
    rep = los_audit(factors, F, _bounds(args))
    out.doc = {
        "filter": list(F.core_indices),
        "atoms": rep.atoms,
        "parameter_tuples": rep.points,
        "atomic_checks": rep.atomic_checks,
        "violations": [str(v) for v in rep.violations],
    }
    out.say(f"filter {F}: {rep.atoms} atoms × {rep.points} parameter tuples")
    if rep.ok:
        out.say("no violations")
    else:
        out.lines += [f"violation: {v}" for v in rep.violations]
        out.code = FAILS


def cmd_strict_audit(ws: Workspace, args, out: Output) -> None:
    K = ws.catalog(_names(args.cls))
    rep = strictness_audit(K, _bounds(args), add_unit=not args.no_unit)
    out.doc = {"with_unit": rep.with_unit, "valid": rep.valid, "non_strict": [str(p) for p in rep.non_strict]}
    out.say(f"{rep.valid} valid clauses; {len(rep.non_strict)} non-strict" + (" (unit added)" if rep.with_unit else ""))
    out.lines += [f"  {p}" for p in rep.non_strict]
    if rep.with_unit and not rep.ok:
        out.code = FAILS


def cmd_verify(ws, args, out: Output) -> None:
    res = run_suite(args.suite, args.seed, args.cases)
    out.doc = res.document()
    out.lines.append(res.text().rstrip("\n"))
    if not res.ok:
        out.code = FAILS


COMMANDS = {
    "check": cmd_check,
    "class-check": cmd_class_check,
    "unit": cmd_unit,
    "product": cmd_product,
    "rprod": cmd_rprod,
    "filter": cmd_filter,
    "diagram": cmd_diagram,
    "hom": cmd_hom,
    "embed": cmd_embed,
    "quotient": cmd_quotient,
    "axiomatize": cmd_axiomatize,
    "malcev": cmd_malcev,
    "birkhoff": cmd_birkhoff,
    "los-audit": cmd_los_audit,
    "strict-audit": cmd_strict_audit,
    "verify": cmd_verify,
}
NO_FILE = {"filter", "verify"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--max-assignments", type=int, default=MAX_ASSIGNMENTS)
    common.add_argument("--max-product", type=int, default=MAX_PRODUCT)
    common.add_argument("--max-search", type=int, default=MAX_SEARCH)

    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--vars", type=int, default=2)
    bounds.add_argument("--depth", type=int, default=1)
    bounds.add_argument("--negatives", type=int, default=1)

    filt = argparse.ArgumentParser(add_help=False)
    filt.add_argument("--filter", help="filter core as a braced subset, e.g. {1}")
    filt.add_argument("--gens", help='generators, e.g. "{0,1};{1,2}"')

    parser = argparse.ArgumentParser(prog="fmw", description="Finite model theory workbench")
    parser.add_argument("--version", action="version", version=f"fmw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help, parents=()):
        p = sub.add_parser(name, help=help, parents=[common, *parents])
        if name not in NO_FILE:
            p.add_argument("file", help="DSL input file")
        return p

    p = add("check", "decide A ⊨ φ")
    p.add_argument("--structure", required=True)
    p.add_argument("--formula", required=True, help="formula name or clause text")
    p = add("class-check", "decide K ⊨ φ")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--formula", required=True)
    p = add("unit", "one-element structure with all relations full")
    p.add_argument("--signature", required=True)
    p = add("product", "direct product")
    p.add_argument("--factors", required=True)
    p = add("rprod", "reduced product modulo a filter", [filt])
    p.add_argument("--factors", required=True)
    p = add("filter", "filter generated by subsets of {0..n-1}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gens", default="")
    p = add("diagram", "flat positive and negative diagram")
    p.add_argument("--structure", required=True)
    p = add("hom", "search or check a morphism")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--kind", choices=KINDS, default=HOM)
    p.add_argument("--map", help="comma-separated images to check instead of searching")
    for name, text in (("embed", "embed A via its diagram"), ("quotient", "A as image of a generated substructure")):
        p = add(name, text)
        p.add_argument("--structure", required=True)
        p.add_argument("--target", required=True)
        p.add_argument("--constants", help="interpretation of ȧ0.. in the target (default 0..|A|-1)")
    p = add("axiomatize", "bounded valid Horn clauses of a class", [bounds])
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--kind", choices=FORMULA_KINDS, default=HORN)
    for name in ("malcev", "birkhoff"):
        p = add(name, f"{name} witness: construction or refuting formula")
        p.add_argument("--structure", required=True)
        p.add_argument("--class", dest="cls", required=True)
        if name == "malcev":
            p.add_argument("--faithful", action="store_true", help="index over subsets of diag⁺ and generate the filter")
    p = add("los-audit", "exhaustive reduced-product truth audit", [bounds, filt])
    p.add_argument("--factors", required=True)
    p = add("strict-audit", "strictness of valid clauses with a unit", [bounds])
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--no-unit", action="store_true")
    p = add("verify", "seeded property suites")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=100)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args.json)
    try:
        ws = load(args.file) if args.command not in NO_FILE else Workspace()
        COMMANDS[args.command](ws, args, out)
    except ResourceCapError as exc:
        print(f"fmw: resource cap: {exc}", file=sys.stderr)
        return CAP
    except (WorkbenchError, ValueError, OSError) as exc:
        print(f"fmw: {exc}", file=sys.stderr)
        return USAGE
    sys.stdout.write(out.render())
    return out.code


if __name__ == "__main__":
    sys.exit(main())
