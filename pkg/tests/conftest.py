import random

import pytest
from hypothesis import strategies as st

from hamsyl.syntax import (ETerm, Formula, LanguageTag, Literal, Quantifier, Shape,
                           canonicalize, formulas_over)

ATOMS = ("p", "q", "r", "o")

literals = st.builds(Literal, st.sampled_from(ATOMS), st.booleans())
eterms = st.builds(ETerm, st.sampled_from(list(Shape)), literals)
raw_formulas = st.builds(Formula, st.sampled_from(list(Quantifier)), eterms, eterms)
formulas = raw_formulas.map(canonicalize)


def in_language(tag: LanguageTag, atoms=ATOMS[:3]):
    return st.sampled_from(formulas_over(atoms, tag))


def formula_sets(tag: LanguageTag, atoms=ATOMS[:3], max_size=5):
    return st.lists(in_language(tag, atoms), min_size=0, max_size=max_size, unique=True)


def random_h_set(rng: random.Random, max_atoms=4, max_formulas=8) -> list:
    atoms = [f"a{i}" for i in range(rng.randint(1, max_atoms))]
    pool = formulas_over(atoms, LanguageTag.H)
    return rng.sample(pool, min(len(pool), rng.randint(1, max_formulas)))


@pytest.fixture
def rng():
    return random.Random(20240607)


def _f(texts):
    from hamsyl.syntax import parse_formula
    return [parse_formula(t) for t in texts]


# sample entailments used across modules
ONE_Q_IS_O = (_f(["exists(p, all q)", "exists(q, o)"]), _f(["forall(q, o)"])[0])
SINGLETON_DOMAIN = (_f(["forall(p, all p)", "forall(non-p, p)", "exists(q1, q1)"]),
                    _f(["forall(q2, q1)"])[0])
TWO_ELEMENT_DOMAIN = (_f(["forall(p, all p)", "forall(non-p, all non-p)",
                          "exists(q1, non-q2)", "exists(q2, non-q3)"]),
                      _f(["forall(q3, q1)"])[0])
