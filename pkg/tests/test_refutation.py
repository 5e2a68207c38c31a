import random

import pytest

from conftest import ONE_Q_IS_O, SINGLETON_DOMAIN, TWO_ELEMENT_DOMAIN
from hamsyl.calculus import SH, SH_DAGGER, SH_STAR_DAGGER, check_proof, saturation
from hamsyl.hardness import gamma_family
from hamsyl.modelgen import build_model_dagger
from hamsyl.refutation import (BranchBudgetExceeded, CompleteSet, ConsistentWitness,
                               IndirectProof, Refutation, complete_set_needs_no_branching,
                               decide_indirect, decision_pairs, lindenbaum_extend)
from hamsyl.semantics import OracleConfig, bounded_model_search
from hamsyl.syntax import (LanguageTag, Quantifier, atom, exists, forall, formulas_over, neg,
                           negate)


def assert_replays(res: IndirectProof, rules):
    assert res.tree.rule == "RAA" and res.tree.conclusion is res.goal
    assert res.tree.discharged is negate(res.goal)
    assert check_proof(res.tree, res.premises, rules)


@pytest.mark.parametrize("case", [SINGLETON_DOMAIN, TWO_ELEMENT_DOMAIN], ids=["one", "two"])
@pytest.mark.parametrize("rules", [SH_DAGGER, SH_STAR_DAGGER], ids=lambda r: r.name)
def test_small_domain_entailments_are_provable(case, rules):
    res = decide_indirect(case[0], case[1], rules)
    assert isinstance(res, IndirectProof)
    assert_replays(res, rules)


def test_single_q_entailment_is_provable():
    res = decide_indirect(ONE_Q_IS_O[0], ONE_Q_IS_O[1], SH_DAGGER)
    assert isinstance(res, IndirectProof)
    assert_replays(res, SH_DAGGER)


def test_gamma_three_is_provable_indirectly():
    inst = gamma_family(3)
    res = decide_indirect(inst.premises, inst.goal, SH_DAGGER)
    assert isinstance(res, IndirectProof)
    assert_replays(res, SH_DAGGER)


def test_consistent_case_returns_a_witness():
    fs = [exists(atom("p"), atom("q"))]
    res = decide_indirect(fs, forall(atom("p"), neg("q")), SH_DAGGER)
    assert isinstance(res, ConsistentWitness)
    assert exists(atom("p"), atom("q")) in res.complete_set


def test_direct_rules_are_rejected():
    with pytest.raises(ValueError):
        decide_indirect([], forall(atom("p"), atom("p")), SH)


def test_budget_is_a_distinct_outcome():
    fs, goal = TWO_ELEMENT_DOMAIN
    with pytest.raises(BranchBudgetExceeded) as info:
        decide_indirect(fs, goal, SH_STAR_DAGGER, budget=1)
    assert info.value.stats.decisions == 1


def test_decision_order_does_not_change_verdicts():
    rng = random.Random(11)
    for _ in range(40):
        atoms = ["a", "b"]
        pool = formulas_over(atoms, LanguageTag.HDAGGER)
        fs = rng.sample(pool, 3)
        goal = rng.choice(pool)
        a = decide_indirect(fs, goal, SH_DAGGER, order="emptiness")
        b = decide_indirect(fs, goal, SH_DAGGER, order="term")
        assert type(a) is type(b)


def test_decision_pairs_cover_each_universal_once():
    for order in ("term", "emptiness"):
        pairs = decision_pairs(("p", "q"), LanguageTag.HDAGGER, order)
        universals = {phi for pair in pairs for phi in pair if phi.quantifier is Quantifier.FORALL}
        expected = [phi for phi in formulas_over(("p", "q"), LanguageTag.HDAGGER)
                    if phi.quantifier is Quantifier.FORALL]
        assert len(pairs) == len(expected) == len(universals)


def test_lindenbaum_on_one_existential():
    res = lindenbaum_extend([exists(atom("p"), atom("q"))], SH_DAGGER)
    assert isinstance(res, ConsistentWitness)
    for phi in (exists(atom("p"), atom("q")), exists(atom("p"), atom("p")),
                exists(atom("q"), atom("q"))):
        assert phi in res.complete_set
    assert not saturation(sorted(res.complete_set.formulas), SH_DAGGER).inconsistent


def test_lindenbaum_refutes_a_contradiction():
    res = lindenbaum_extend([exists(atom("p"), atom("p")), forall(atom("p"), neg("p"))],
                            SH_DAGGER)
    assert isinstance(res, Refutation)
    assert res.stats.decisions == 0
    assert check_proof(res.tree, res.premises, SH_DAGGER)


def test_lindenbaum_refutes_gamma_three_with_negated_goal():
    inst = gamma_family(3)
    res = lindenbaum_extend([*inst.premises, negate(inst.goal)], SH_DAGGER)
    assert isinstance(res, Refutation)
    assert check_proof(res.tree, res.premises, SH_DAGGER)


def test_incomplete_sets_are_rejected():
    with pytest.raises(ValueError):
        CompleteSet([exists(atom("p"), atom("p"))], ["p"], LanguageTag.HDAGGER)


@pytest.mark.parametrize("rules", [SH_DAGGER, SH_STAR_DAGGER], ids=lambda r: r.name)
def test_complete_sets_need_no_branching(rules):
    rng = random.Random(5)
    for _ in range(15):
        atoms = ["a", "b"][: rng.randint(1, 2)]
        pool = formulas_over(atoms, rules.language)
        res = lindenbaum_extend(rng.sample(pool, min(3, len(pool))), rules)
        if isinstance(res, ConsistentWitness):
            assert complete_set_needs_no_branching(res.complete_set, rules)


def test_arbitrary_completions_of_an_unsatisfiable_set_are_directly_inconsistent():
    inst = gamma_family(3)
    base = [*inst.premises, negate(inst.goal)]
    atoms = inst.atoms
    pairs = decision_pairs(atoms, LanguageTag.HDAGGER)
    rng = random.Random(2)
    for _ in range(20):
        chosen = set(base)
        for phi, psi in pairs:
            if phi not in chosen and psi not in chosen:
                chosen.add(rng.choice((phi, psi)))
        eng = saturation(sorted(chosen), SH_DAGGER, atoms=atoms)
        assert eng.inconsistent


@pytest.mark.parametrize("rules,atoms,sizes", [(SH_DAGGER, 3, 6), (SH_STAR_DAGGER, 2, 4)],
                         ids=["dagger", "star"])
def test_agreement_with_model_search(rules, atoms, sizes):
    rng = random.Random(99)
    variant = "hdagger" if rules is SH_DAGGER else "hstardagger"
    for _ in range(100 if rules is SH_DAGGER else 40):
        names = [f"a{j}" for j in range(rng.randint(1, atoms))]
        pool = formulas_over(names, rules.language)
        fs = rng.sample(pool, rng.randint(1, min(sizes, len(pool))))
        goal = rng.choice(pool)
        res = decide_indirect(fs, goal, rules)
        rest = [*fs, negate(goal)]
        if isinstance(res, IndirectProof):
            assert_replays(res, rules)
            assert bounded_model_search(rest, OracleConfig(max_domain_size=5)) is None
        else:
            built = build_model_dagger(res.complete_set, variant)
            assert built.structure.models(rest)
