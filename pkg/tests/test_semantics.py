
import pytest
from hypothesis import given, settings

from conftest import ONE_Q_IS_O, SINGLETON_DOMAIN, TWO_ELEMENT_DOMAIN, formula_sets
from hamsyl.semantics import (OracleConfig, Structure, all_structures, bounded_entails,
                              bounded_model_search)
from hamsyl.syntax import (ETerm, Formula, LanguageTag, Quantifier, Shape, all_of, atom,
                           canonicalize, e_terms_over, exists, forall, formulas_over, neg,
                           negate, not_all_of)


def fol_value(e: ETerm, st: Structure, x: int) -> bool:
    """Direct first-order reading of membership, independent of the bitmask code."""
    def lit(y):
        held = y in st.extension(e.literal.atom)
        return held if e.literal.positive else not held
    if e.shape is Shape.LIT:
        return lit(x)
    every = all(x == y for y in st.domain if lit(y))
    return every if e.shape is Shape.ALL else not every


def fol_satisfies(st: Structure, phi) -> bool:
    e, f = phi.subject, phi.predicate
    if phi.quantifier is Quantifier.FORALL:
        return all(fol_value(f, st, x) for x in st.domain if fol_value(e, st, x))
    return any(fol_value(e, st, x) and fol_value(f, st, x) for x in st.domain)


def small_structures(atoms=("p", "q"), max_size=3):
    for n in range(1, max_size + 1):
        yield from all_structures(atoms, n)


def test_all_of_an_empty_literal_is_everything():
    st = Structure(2, {})
    assert st.eval(all_of("p")) == {0, 1}


def test_all_of_a_singleton():
    st = Structure(2, {"q": [0]})
    assert st.eval(all_of("q")) == {0}
    assert st.eval(all_of(neg("q"))) == {1}


def test_all_of_two_elements_is_empty():
    st = Structure(3, {"q": [0, 1]})
    assert st.eval(all_of("q")) == frozenset()
    assert st.eval(not_all_of("q")) == {0, 1, 2}


def test_empty_domain_is_rejected():
    with pytest.raises(ValueError):
        Structure(0, {})


def test_elements_out_of_range_are_rejected():
    with pytest.raises(ValueError):
        Structure(2, {"p": [2]})


def test_complement_partition():
    for st in small_structures():
        for e in e_terms_over(("p", "q")):
            assert st.eval(e.complement) == frozenset(st.domain) - st.eval(e)


def test_excluded_middle():
    fs = formulas_over(("p", "q"), LanguageTag.HSTARDAGGER)
    for st in small_structures():
        for phi in fs:
            assert st.satisfies(phi) != st.satisfies(negate(phi))


def test_agrees_with_first_order_reading():
    fs = formulas_over(("p", "q"), LanguageTag.HSTARDAGGER)
    for st in small_structures():
        for phi in fs:
            assert st.satisfies(phi) == fol_satisfies(st, phi), (phi, st)


def test_singleton_domain_satisfies_self_identity():
    st = Structure(1, {"p": [0], "q": [0]})
    assert st.satisfies(forall(atom("p"), all_of("p")))


def test_structure_text_round_trip():
    st = Structure(4, {"p": [0, 2], "q": [], "r": [3]})
    text = st.to_text()
    assert text.splitlines()[0] == "domain: 4"
    back = Structure.from_text(text)
    assert back.extension("p") == {0, 2} and back.extension("q") == frozenset()
    assert back.extension("r") == {3}


def test_disjoint_union_shifts_the_second_structure():
    a = Structure(2, {"p": [1]})
    b = Structure(1, {"p": [0], "q": [0]})
    u = a.disjoint_union(b)
    assert u.size == 3 and u.extension("p") == {1, 2} and u.extension("q") == {2}
    assert a.doubled().extension("p") == {1, 3}


def test_model_search_finds_a_one_element_model():
    st = bounded_model_search(ONE_Q_IS_O[0])
    assert st is not None and st.size == 1 and st.models(ONE_Q_IS_O[0])


def test_contradiction_has_no_model():
    fs = [exists(atom("p"), atom("p")), forall(atom("p"), neg("p"))]
    assert bounded_model_search(fs, OracleConfig(max_domain_size=6)) is None


def model_sizes(formulas, bound):
    sizes = []
    for n in range(1, bound + 1):
        cfg = OracleConfig(max_domain_size=n, min_domain_size=n)
        if bounded_model_search(formulas, cfg) is not None:
            sizes.append(n)
    return sizes


def test_singleton_domain_premises():
    assert model_sizes(SINGLETON_DOMAIN[0], 5) == [1]


def test_two_element_domain_premises():
    assert model_sizes(TWO_ELEMENT_DOMAIN[0], 5) == [2]


@pytest.mark.parametrize("case,bound", [(ONE_Q_IS_O, 4), (TWO_ELEMENT_DOMAIN, 5),
                                        (SINGLETON_DOMAIN, 5)])
def test_sample_entailments_have_no_small_counter_model(case, bound):
    res = bounded_entails(case[0], case[1], OracleConfig(max_domain_size=bound))
    assert res.no_counter_model_up_to_bound and res.bound == bound


def test_inclusion_is_not_symmetric():
    res = bounded_entails([forall(atom("p"), atom("q"))], forall(atom("q"), atom("p")))
    assert res.refuted
    cm = res.counter_model
    # the smallest counter-model: p empty, one q
    assert cm.size == 1 and cm.extension("p") == frozenset()
    assert cm.satisfies(forall(atom("p"), atom("q")))
    assert not cm.satisfies(forall(atom("q"), atom("p")))


def test_default_bound_is_atoms_plus_two():
    assert OracleConfig().bound_for([forall(atom("p"), atom("q"))]) == 4


def brute_force(formulas, atoms, bound):
    for n in range(1, bound + 1):
        for st in all_structures(atoms, n):
            if st.models(formulas):
                return n
    return None


@settings(max_examples=80, deadline=None)
@given(formula_sets(LanguageTag.HSTARDAGGER, ("p", "q"), max_size=4))
def test_search_backends_agree_with_brute_force(fs):
    expected = brute_force(fs, ("p", "q"), 3)
    for method in ("enumerate", "sat"):
        st = bounded_model_search(fs, OracleConfig(max_domain_size=3, method=method,
                                                   atom_universe=("p", "q")))
        got = None if st is None else st.size
        assert got == expected, method
        if st is not None:
            assert st.models(fs)


def test_parallel_search_agrees_with_serial():
    fs = TWO_ELEMENT_DOMAIN[0]
    serial = bounded_model_search(fs, OracleConfig(max_domain_size=4))
    parallel = bounded_model_search(fs, OracleConfig(max_domain_size=4, jobs=2))
    assert serial.size == parallel.size == 2
    assert parallel.models(fs)


def test_sat_backend_handles_many_atoms():
    atoms = [f"a{i}" for i in range(12)]
    fs = [forall(atom(a), all_of(b)) for a, b in zip(atoms, atoms[1:])]
    fs += [exists(atom(a), neg(b)) for a, b in zip(atoms[::2], atoms[1::2])]
    st = bounded_model_search(fs, OracleConfig(max_domain_size=5, method="sat"))
    assert st is not None and st.models(fs)


def test_canonical_forms_preserve_truth():
    terms = e_terms_over(("p", "q"))
    for st in small_structures():
        for qf in Quantifier:
            for e in terms:
                for f in terms:
                    raw = Formula(qf, e, f)
                    assert fol_satisfies(st, raw) == st.satisfies(canonicalize(raw))
