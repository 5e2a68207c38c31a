"""Command-line interface.

Exit status: 0 positive judgment (derivable, satisfiable, valid), 1 negative,
2 usage or input error, 3 search budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import calculus, hardness, modelgen, refutation, semantics
from .syntax import (LanguageTag, ParseError, format_formulas, member_of, parse_formula,
                     parse_formulas)

EXIT_POSITIVE, EXIT_NEGATIVE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

_LOGICS = [t.value for t in LanguageTag]


class UsageError(Exception):
    pass


def _read_input(path: Optional[str]) -> tuple:
    if path is None or path == "-":
        return sys.stdin.read(), "<stdin>"
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read(), path
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def _load(args) -> list:
    text, source = _read_input(args.input)
    formulas = parse_formulas(text, source)
    logic = LanguageTag.parse(args.logic)
    for lineno, phi in _with_lines(text, formulas):
        if not member_of(phi, logic):
            raise ParseError(f"{phi} is not a formula of {logic.value}", lineno, 1, source)
    return formulas


def _with_lines(text: str, formulas: list):
    lines = [i for i, raw in enumerate(text.splitlines(), start=1)
             if raw.split("#", 1)[0].strip()]
    return zip(lines, formulas)


def _goal(args):
    if not args.goal:
        raise UsageError("--goal is required")
    goal = parse_formula(args.goal, source="--goal")
    logic = LanguageTag.parse(args.logic)
    if not member_of(goal, logic):
        raise ParseError(f"{goal} is not a formula of {logic.value}", 1, 1, "--goal")
    return goal


def _jobs(args) -> int:
    return 1 if getattr(args, "deterministic", False) else max(1, getattr(args, "jobs", 1) or 1)


def _oracle_cfg(args) -> semantics.OracleConfig:
    return semantics.OracleConfig(max_domain_size=args.max_size, jobs=_jobs(args))


def _emit(args, payload, text: str) -> None:
    if getattr(args, "json", False):
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def _structure_dict(st: semantics.Structure) -> dict:
    return {"domain": st.size, "extensions": {a: sorted(st.extension(a)) for a in st.atoms}}


# --- verbs ------------------------------------------------------------------

def cmd_parse(args) -> int:
    formulas = _load(args)
    _emit(args, [str(phi) for phi in formulas], format_formulas(formulas))
    return EXIT_POSITIVE


def cmd_saturate(args) -> int:
    formulas = _load(args)
    rules = calculus.rule_set(args.logic)
    engine = calculus.saturation(formulas, rules)
    facts = sorted(engine.formulas())
    _emit(args, {"formulas": [str(phi) for phi in facts], "absurdity": engine.inconsistent},
          format_formulas(facts))
    return EXIT_NEGATIVE if engine.inconsistent else EXIT_POSITIVE


def cmd_prove(args) -> int:
    formulas = _load(args)
    goal = _goal(args)
    logic = LanguageTag.parse(args.logic)
    if args.oracle:
        res = semantics.bounded_entails(formulas, goal, _oracle_cfg(args))
        if res.counter_model is not None:
            _emit(args, {"entailed": False, "counter_model": _structure_dict(res.counter_model)},
                  "counter-model:\n" + res.counter_model.to_text())
            return EXIT_NEGATIVE
        _emit(args, {"entailed": None, "bound": res.bound},
              f"no counter-model up to domain size {res.bound}\n")
        return EXIT_POSITIVE
    rules = calculus.rule_set(logic)
    if args.indirect:
        if logic not in (LanguageTag.HDAGGER, LanguageTag.HSTARDAGGER, LanguageTag.SDAGGER):
            raise UsageError("--indirect requires --logic hdagger or hstardagger")
        res = refutation.decide_indirect(formulas, goal, rules, budget=args.branch_budget)
        if isinstance(res, refutation.IndirectProof):
            _emit(args, {"derivable": True, "proof": res.tree.to_dict(),
                         "decisions": res.stats.decisions}, res.tree.render())
            return EXIT_POSITIVE
        _emit(args, {"derivable": False, "decisions": res.stats.decisions,
                     "complete_set": [str(phi) for phi in res.complete_set]},
              f"not derivable: found a consistent complete extension "
              f"({len(res.complete_set)} formulas)\n")
        return EXIT_NEGATIVE
    tree = calculus.decide_direct(formulas, goal, rules)
    if tree is None:
        _emit(args, {"derivable": False}, f"not derivable: {goal}\n")
        return EXIT_NEGATIVE
    _emit(args, {"derivable": True, "proof": tree.to_dict()}, tree.render())
    return EXIT_POSITIVE


def _build(args, formulas):
    """Returns (structure or None, construction or None, refutation tree or None)."""
    logic = LanguageTag.parse(args.logic)
    if args.oracle:
        st = semantics.bounded_model_search(formulas, _oracle_cfg(args))
        return st, None, None
    if logic in (LanguageTag.S, LanguageTag.H):
        c = modelgen.build_model_h(formulas)
        return c.structure, c, c.refutation
    rules = calculus.rule_set(logic)
    res = refutation.lindenbaum_extend(formulas, rules, budget=args.branch_budget)
    if isinstance(res, refutation.Refutation):
        return None, None, res.tree
    variant = modelgen.Variant.HSTARDAGGER if logic is LanguageTag.HSTARDAGGER \
        else modelgen.Variant.HDAGGER
    c = modelgen.build_model_dagger(res.complete_set, variant)
    return c.structure, c, None


def cmd_sat(args) -> int:
    formulas = _load(args)
    st, construction, proof = _build(args, formulas)
    if st is None:
        if args.oracle:
            bound = _oracle_cfg(args).bound_for(formulas)
            _emit(args, {"satisfiable": None, "bound": bound},
                  f"no model up to domain size {bound}\n")
        else:
            size = len(list(proof.nodes()))
            detail = proof.render() if args.explain else \
                f"# refutation with {size} distinct nodes; --explain prints it\n"
            _emit(args, {"satisfiable": False, "refutation": proof.to_dict()},
                  "unsatisfiable\n" + detail)
        return EXIT_NEGATIVE
    text = "satisfiable\n" + st.to_text()
    if args.explain and construction is not None:
        text += construction.explain()
    _emit(args, {"satisfiable": True, "model": _structure_dict(st)}, text)
    return EXIT_POSITIVE


def cmd_model(args) -> int:
    formulas = _load(args)
    st, construction, proof = _build(args, formulas)
    if st is None:
        sys.stderr.write("no model\n")
        return EXIT_NEGATIVE
    text = st.to_text()
    if args.explain and construction is not None:
        text += "".join("# " + line + "\n" for line in construction.explain().splitlines())
    _emit(args, _structure_dict(st), text)
    return EXIT_POSITIVE


def _write(directory: str, name: str, text: str) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_gamma(args) -> int:
    try:
        inst = hardness.gamma_family(args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = f"# goal: {inst.goal}\n" + format_formulas(inst.premises)
    _emit(args, {"premises": [str(p) for p in inst.premises], "goal": str(inst.goal)}, text)
    if args.emit_witnesses:
        hs = [args.h] if args.h else range(1, args.n - 1)
        for h in hs:
            for name, st in hardness.gamma_witnesses(args.n, h).items():
                _write(args.emit_witnesses, f"gamma{args.n}_h{h}_{name}.struct",
                       st.to_text(inst.atoms))
    return EXIT_POSITIVE


def cmd_encode3sat(args) -> int:
    path = args.dimacs or args.input
    text, source = _read_input(path)
    try:
        inst = hardness.parse_dimacs(text)
    except ValueError as exc:
        raise UsageError(f"{source}: {exc}") from None
    enc = hardness.encode_3sat(inst)
    formulas = enc.dagger if args.dagger else enc.star_dagger
    out = f"# model-bound: {enc.model_bound}\n" + format_formulas(formulas)
    _emit(args, {"formulas": [str(p) for p in formulas], "model_bound": enc.model_bound}, out)
    if args.emit_witnesses:
        for K in sorted(hardness.GADGET_TABLE, key=lambda k: (len(k), sorted(k))):
            name = "".join(str(k) for k in sorted(K))
            _write(args.emit_witnesses, f"gadget_{name}.struct", hardness.gadget_model(K).to_text())
        assignment = hardness.satisfying_assignment(inst)
        if assignment is not None:
            st = hardness.satisfying_model(inst, assignment, dagger=args.dagger)
            _write(args.emit_witnesses, "model.struct", st.to_text())
    return EXIT_POSITIVE


def _mutate(schema: calculus.RuleSchema) -> calculus.RuleSchema:
    c = schema.consequent
    return calculus.RuleSchema(schema.name, schema.antecedents,
                               calculus.Template(c.quantifier, c.predicate, c.subject))


def cmd_validate_rules(args) -> int:
    names = args.rules.split(",") if args.rules else list(calculus.RULE_SETS)
    sets = []
    for n in names:
        if n not in calculus.RULE_SETS:
            raise UsageError(f"unknown rule set {n!r}")
        rs = calculus.RULE_SETS[n]
        if args.mutate:
            try:
                rs = rs.replace(_mutate(rs.schema(args.mutate)))
            except KeyError:
                raise UsageError(f"{n} has no rule {args.mutate!r}") from None
        sets.append(rs)
    if args.dump:
        sys.stdout.write("".join(rs.dump(expanded=args.expanded) for rs in sets))
        return EXIT_POSITIVE
    cfg = semantics.OracleConfig(max_domain_size=args.max_size or 3)
    ok = True
    payload = []
    lines = []
    for rs in sets:
        rep = calculus.check_rule_validity(rs, cfg, allow_empty=args.allow_empty, jobs=_jobs(args))
        ok = ok and rep.ok
        status = "ok" if rep.ok else f"{len(rep.violations)} violation(s)"
        lines.append(f"{rs.name}: {rep.instances_checked} instances, "
                     f"{rep.structures_checked} structures, {status}")
        for v in rep.violations:
            lines.append(f"  {v.rule}: {' ; '.join(map(str, v.antecedents))} => {v.consequent}")
            lines.append("    witness: " + v.witness.to_text().strip().replace("\n", "; "))
        payload.append({"rule_set": rs.name, "ok": rep.ok, "instances": rep.instances_checked,
                        "violations": [{"rule": v.rule, "consequent": str(v.consequent),
                                        "witness": _structure_dict(v.witness)
                                        if v.witness.size else {"domain": 0}}
                                       for v in rep.violations]})
    _emit(args, payload, "\n".join(lines) + "\n")
    return EXIT_POSITIVE if ok else EXIT_NEGATIVE


# --- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hamsyl",
                                description="Syllogistic logics with quantified predicates.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, logic_default="h", needs_input=True):
        sp.add_argument("--logic", choices=_LOGICS, default=logic_default)
        if needs_input:
            sp.add_argument("input", nargs="?", help="formula file (default: stdin)")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--deterministic", action="store_true",
                        help="serial execution; byte-identical reports")

    def search(sp):
        sp.add_argument("--oracle", action="store_true", help="use the bounded model search")
        sp.add_argument("--max-size", type=int, default=None, help="oracle domain size bound")
        sp.add_argument("--branch-budget", type=int, default=refutation.DEFAULT_BRANCH_BUDGET)
        sp.add_argument("--explain", action="store_true",
                        help="show the model's worlds, or the full refutation")

    sp = sub.add_parser("parse", help="parse and print canonical formulas")
    common(sp, "hstardagger")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("saturate", help="print the direct closure")
    common(sp)
    sp.set_defaults(func=cmd_saturate)

    sp = sub.add_parser("prove", help="decide derivability of --goal")
    common(sp)
    search(sp)
    sp.add_argument("--goal", required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--direct", action="store_true", help="rules only (default)")
    g.add_argument("--indirect", action="store_true", help="with reductio")
    sp.set_defaults(func=cmd_prove)

    for verb, fn, hlp in (("sat", cmd_sat, "decide satisfiability"),
                          ("model", cmd_model, "print a model in structure format")):
        sp = sub.add_parser(verb, help=hlp)
        common(sp)
        search(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("gamma", help="emit the Gamma-n family")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--h", type=int, default=None, help="witness index (default: all)")
    sp.add_argument("--emit-witnesses", metavar="DIR")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_gamma)

    sp = sub.add_parser("encode3sat", help="encode a DIMACS 3SAT instance")
    sp.add_argument("input", nargs="?", help="DIMACS file (default: stdin)")
    sp.add_argument("--dimacs", metavar="FILE")
    sp.add_argument("--dagger", action="store_true", help="emit the H-dagger rewrite")
    sp.add_argument("--emit-witnesses", metavar="DIR")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_encode3sat)

    sp = sub.add_parser("validate-rules", help="check rule validity on small structures")
    sp.add_argument("--rules", help="comma-separated: sH,sHDagger,sHStarDagger")
    sp.add_argument("--max-size", type=int, default=3)
    sp.add_argument("--allow-empty", action="store_true", help="also check the empty domain")
    sp.add_argument("--mutate", metavar="RULE", help="swap the consequent's terms of RULE")
    sp.add_argument("--dump", action="store_true", help="print the rule tables")
    sp.add_argument("--expanded", action="store_true", help="with --dump: shape-ground rules")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--deterministic", action="store_true")
    sp.set_defaults(func=cmd_validate_rules)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_POSITIVE
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (UsageError, calculus.LanguageError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_POSITIVE
    except refutation.BranchBudgetExceeded as exc:
        sys.stderr.write(f"budget exceeded: {exc} ({exc.stats.decisions} decisions)\n")
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
