import random

import pytest
from hypothesis import given, settings

from conftest import ONE_Q_IS_O, formula_sets
from hamsyl.calculus import (SH, SH_DAGGER, SH_STAR_DAGGER, DerivationTree, LanguageError,
                             ProofError, RuleSchema, RuleSet, Sort, Template, check_proof,
                             check_rule_validity, decide_direct, expand_schema, rule_set,
                             saturate, saturation)
from hamsyl.semantics import OracleConfig, bounded_entails
from hamsyl.syntax import (LanguageTag, atoms_of, formulas_over, parse_formula, parse_formulas)

ALL_SETS = (SH, SH_DAGGER, SH_STAR_DAGGER)


def test_shipped_rule_counts():
    assert [len(rs.schemata) for rs in ALL_SETS] == [13, 12, 10]
    assert [len(rs.expand()) for rs in ALL_SETS] == [37, 170, 558]


@pytest.mark.parametrize("rules,name,count", [
    (SH, "D1", 4), (SH, "T", 1), (SH_DAGGER, "T", 2), (SH_STAR_DAGGER, "T", 6),
    (SH_STAR_DAGGER, "D", 216), (SH_STAR_DAGGER, "N", 6), (SH_DAGGER, "A", 24),
])
def test_schema_expansion_sizes(rules, name, count):
    assert len(expand_schema(rules.schema(name))) == count


def test_at_most_two_antecedents():
    assert max(len(s.antecedents) for rs in ALL_SETS for s in rs.schemata) == 2


def test_dump_format():
    lines = SH.dump().splitlines()
    assert lines[0] == "RULE I: exists(p, c) => exists(p, p)"
    assert "RULE HH4: forall(p, all q) ; exists(q, q) => forall(p, q)" in lines
    assert all(line.startswith("RULE ") for line in SH.dump(expanded=True).splitlines())


def test_rule_set_lookup():
    assert rule_set("h") is SH
    assert rule_set(LanguageTag.HSTARDAGGER) is SH_STAR_DAGGER
    assert rule_set("sHDagger") is SH_DAGGER
    with pytest.raises(ValueError):
        rule_set("nonsense")


def test_darii():
    fs = parse_formulas("exists(p, q)\nforall(q, o)")
    tree = decide_direct(fs, parse_formula("exists(p, o)"), SH)
    assert tree.rule == "D1" and tree.size == 3
    assert {c.rule for c in tree.children} == {"premise"}


def test_premise_is_its_own_derivation():
    fs = parse_formulas("forall(p, all q)")
    tree = decide_direct(fs, fs[0], SH)
    assert tree.rule == "premise" and not tree.children


def test_worked_derivation_uses_two_darii_steps():
    fs = parse_formulas("exists(p, q)\nforall(q, o)\nforall(o, non-r)")
    goal = parse_formula("exists(p, non-r)")
    tree = decide_direct(fs, goal, SH)
    internal = [t for t in tree.nodes() if t.children]
    assert [t.rule for t in internal] == ["D1", "D1"]
    assert internal[1].conclusion is parse_formula("exists(p, o)")
    assert check_proof(tree, fs, SH)


def test_single_q_rule():
    assert ONE_Q_IS_O[1] in saturate(ONE_Q_IS_O[0], SH)


def test_language_is_checked():
    with pytest.raises(LanguageError):
        saturate(parse_formulas("forall(non-p, q)"), SH)
    with pytest.raises(LanguageError):
        saturate(parse_formulas("exists(all p, all q)"), SH_DAGGER)


@pytest.mark.parametrize("rules", ALL_SETS, ids=lambda r: r.name)
def test_rules_valid_on_small_nonempty_structures(rules):
    report = check_rule_validity(rules, OracleConfig(max_domain_size=3))
    assert report.ok, report.violations[:3]


def test_rule_n_needs_nonempty_domains():
    report = check_rule_validity(SH_DAGGER, OracleConfig(max_domain_size=2), allow_empty=True)
    failing = {v.rule for v in report.violations}
    assert "N" in failing
    assert all(v.witness.size == 0 for v in report.violations)


def test_corrupted_rule_is_caught_with_two_element_witness():
    bad = RuleSet.from_text("bad", LanguageTag.H, "X: exists(p, q) => forall(p, q)",
                            {"p": Sort.ATOM, "q": Sort.ATOM})
    report = check_rule_validity(bad)
    assert not report.ok
    assert report.violations[0].witness.size == 2


def test_mutated_rule_is_reported():
    hh4 = SH.schema("HH4")
    c = hh4.consequent
    mutated = SH.replace(RuleSchema("HH4", hh4.antecedents,
                                    Template(c.quantifier, c.predicate, c.subject)))
    report = check_rule_validity(mutated)
    assert {v.rule for v in report.violations} == {"HH4"}
    assert check_rule_validity(SH).ok


def test_parallel_validity_matches_serial():
    cfg = OracleConfig(max_domain_size=2)
    assert check_rule_validity(SH, cfg, jobs=2).instances_checked == \
        check_rule_validity(SH, cfg).instances_checked


@pytest.mark.parametrize("rules", ALL_SETS, ids=lambda r: r.name)
def test_saturation_is_sound_on_random_sets(rules):
    rng = random.Random(7 + len(rules.name))
    cfg = OracleConfig(max_domain_size=4)
    for _ in range(200 if rules is SH else 60):
        atoms = [f"a{i}" for i in range(rng.randint(1, 3))]
        pool = formulas_over(atoms, rules.language)
        fs = rng.sample(pool, min(len(pool), rng.randint(1, 5)))
        eng = saturation(fs, rules)
        if eng.inconsistent:
            continue
        derived = sorted(eng.formulas() - set(fs))
        for theta in rng.sample(derived, min(4, len(derived))):
            assert not bounded_entails(fs, theta, cfg).refuted, (fs, theta)


@settings(max_examples=40, deadline=None)
@given(formula_sets(LanguageTag.H, max_size=4), formula_sets(LanguageTag.H, max_size=2))
def test_monotone_idempotent_and_confined(base, extra):
    small = saturate(base, SH)
    big = saturate(base + extra, SH)
    assert small <= big
    assert saturate(small, SH) == small
    assert {a for phi in small for a in phi.atoms} <= set(atoms_of(base))


@settings(max_examples=25, deadline=None)
@given(formula_sets(LanguageTag.HDAGGER, ("p", "q"), max_size=4))
def test_every_derived_fact_carries_a_checkable_proof(fs):
    eng = saturation(fs, SH_DAGGER)
    for phi in sorted(eng.formulas())[:15]:
        assert check_proof(eng.tree(phi), fs, SH_DAGGER)


def test_checker_rejects_a_wrong_rule_label():
    fs = parse_formulas("exists(p, q)\nforall(q, o)")
    tree = decide_direct(fs, parse_formula("exists(p, o)"), SH)
    forged = DerivationTree(tree.conclusion, "B", tree.children)
    with pytest.raises(ProofError):
        check_proof(forged, fs, SH)


def test_checker_rejects_unknown_premise():
    leaf = DerivationTree(parse_formula("forall(p, q)"), "premise")
    with pytest.raises(ProofError):
        check_proof(leaf, [], SH)


def test_checker_rejects_out_of_scope_assumption():
    leaf = DerivationTree(parse_formula("forall(p, q)"), "assumption", index=1)
    with pytest.raises(ProofError):
        check_proof(leaf, [], SH_DAGGER)


def test_tree_serialization():
    fs = parse_formulas("exists(p, q)\nforall(q, o)")
    tree = decide_direct(fs, parse_formula("exists(p, o)"), SH)
    d = tree.to_dict()
    assert d["conclusion"] == "exists(o, p)" and d["rule"] == "D1"
    assert len(d["children"]) == 2
    assert tree.render().splitlines()[0] == "exists(o, p)  [D1]"
