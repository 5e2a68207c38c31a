"""Indirect derivation: reductio search over complete extensions.

The search keeps one saturation engine and a stack of decisions. Each
decision assumes the lesser undecided formula of a pair {psi, not-psi} and
saturates. When an absurdity appears, the deepest decision it depends on is
flipped: its negation is asserted, justified by an RAA node that discharges
the assumption, at the shallowest level where everything else the absurdity
depends on is still present. If the absurdity depends on no decision, the
whole search closes. Every asserted fact therefore carries a genuine proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .calculus import (DerivationTree, RuleSet, Saturation, check_language, rule_set)
from .syntax import (Formula, LanguageTag, Quantifier, atoms_of, canonicalize,
                     formulas_over, negate)

__all__ = [
    "DEFAULT_BRANCH_BUDGET",
    "BranchBudgetExceeded",
    "SearchStats",
    "CompleteSet",
    "IndirectProof",
    "ConsistentWitness",
    "Refutation",
    "decide_indirect",
    "lindenbaum_extend",
    "complete_set_needs_no_branching",
    "decision_pairs",
    "ORDERS",
    "search_stats",
]

DEFAULT_BRANCH_BUDGET = 10 ** 6


@dataclass
class SearchStats:
    decisions: int = 0
    conflicts: int = 0
    backjumps: int = 0
    max_depth: int = 0

    @property
    def branches(self) -> int:
        return self.decisions


class BranchBudgetExceeded(RuntimeError):
    def __init__(self, budget: int, stats: SearchStats):
        super().__init__(f"branch budget of {budget} decisions exceeded")
        self.budget = budget
        self.stats = stats


class CompleteSet:
    """A set containing exactly one of each pair {phi, not-phi} over an atom universe."""

    def __init__(self, formulas: Iterable[Formula], atom_universe: Iterable[str],
                 language: LanguageTag, validate: bool = True):
        self.formulas = frozenset(canonicalize(phi) for phi in formulas)
        self.atom_universe = tuple(sorted(set(atom_universe)))
        self.language = language
        if validate:
            self.validate()

    def validate(self) -> None:
        for phi, psi in decision_pairs(self.atom_universe, self.language):
            a, b = phi in self.formulas, psi in self.formulas
            if a == b:
                what = "both" if a else "neither"
                raise ValueError(f"not complete: {what} of {phi} and {psi}")

    def __contains__(self, phi: Formula) -> bool:
        return canonicalize(phi) in self.formulas

    def __iter__(self):
        return iter(sorted(self.formulas))

    def __len__(self):
        return len(self.formulas)

    def __repr__(self):
        return f"CompleteSet({len(self.formulas)} formulas over {list(self.atom_universe)})"


@dataclass
class IndirectProof:
    tree: DerivationTree
    goal: Formula
    premises: tuple
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass
class ConsistentWitness:
    complete_set: CompleteSet
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass
class Refutation:
    """A derivation of an absurdity from the input (no goal involved)."""

    tree: DerivationTree
    premises: tuple
    stats: SearchStats = field(default_factory=SearchStats)


_PAIR_CACHE: dict = {}

ORDERS = ("emptiness", "term")


def _emptiness_rank(pair) -> tuple:
    phi = pair[1]
    e, f = phi.subject, phi.predicate
    group = 0 if f is e.complement else (1 if e.is_literal and f.is_literal else 2)
    return (group, phi.key)


def decision_pairs(atoms: Iterable[str], language: LanguageTag,
                   order: str = "emptiness") -> list:
    """Decision pairs over the atoms; the first member of each pair is tried first.

    ``"term"``: formula order, the universal tried first. ``"emptiness"``
    (default): emptiness statements forall(e, not-e) first, then pairs between
    literals, then the rest; the existential member is tried first. The order
    affects only search time, never the verdict.
    """
    if order not in ORDERS:
        raise ValueError(f"unknown decision order {order!r}")
    key = (tuple(sorted(set(atoms))), language, order)
    pairs = _PAIR_CACHE.get(key)
    if pairs is None:
        pairs = [(phi, negate(phi)) for phi in formulas_over(key[0], language)
                 if phi.quantifier is Quantifier.FORALL]
        if order == "emptiness":
            pairs = [(psi, phi) for phi, psi in pairs]
            pairs.sort(key=_emptiness_rank)
        if len(_PAIR_CACHE) > 64:
            _PAIR_CACHE.clear()
        _PAIR_CACHE[key] = pairs
    return pairs


@dataclass
class _Frame:
    formula: Formula
    cursor: int


def _search(engine: Saturation, pairs: list, budget: int, stats: SearchStats):
    """Run the decision loop. Returns the closing absurdity record or None if a
    complete consistent extension was reached."""
    conflict = engine.run()
    frames: list = []
    cursor = 0
    facts = engine.facts
    n = len(pairs)
    while True:
        while conflict is not None:
            stats.conflicts += 1
            deps = conflict.deps
            j = len(frames) - 1
            while j >= 0 and not (deps >> (j + 1)) & 1:
                j -= 1
            if j < 0:
                return conflict
            frame = frames[j]
            aid = j + 1
            rest = deps & ~(1 << aid)
            target = 0
            for k in range(j - 1, -1, -1):
                if (rest >> (k + 1)) & 1:
                    target = k + 1
                    break
            if target < j:
                stats.backjumps += 1
            cursor = frames[target].cursor
            engine.pop_to(target)
            del frames[target:]
            engine.add(negate(frame.formula), "RAA", (conflict,), rest,
                       discharged=frame.formula, index=aid)
            conflict = engine.run()
        while cursor < n:
            phi, psi = pairs[cursor]
            if phi not in facts and psi not in facts:
                break
            cursor += 1
        if cursor == n:
            return None
        if stats.decisions >= budget:
            raise BranchBudgetExceeded(budget, stats)
        stats.decisions += 1
        phi = pairs[cursor][0]
        frames.append(_Frame(phi, cursor))
        stats.max_depth = max(stats.max_depth, len(frames))
        engine.push()
        aid = len(frames)
        engine.add(phi, "assumption", (), 1 << aid, index=aid)
        conflict = engine.run()


def _complete_rules(rules) -> RuleSet:
    rules = rule_set(rules)
    if rules.language not in (LanguageTag.HDAGGER, LanguageTag.HSTARDAGGER):
        raise ValueError(f"indirect search needs a complete rule set (sH-dagger or "
                         f"sH-star-dagger), not {rules.name}")
    return rules


def decide_indirect(formulas: Iterable[Formula], goal: Formula, rules,
                    budget: int = DEFAULT_BRANCH_BUDGET, check: bool = True,
                    order: str = "emptiness"):
    """Decide whether ``goal`` follows indirectly from ``formulas``.

    Returns an :class:`IndirectProof` (a tree ending in an RAA that discharges
    the negated goal) or a :class:`ConsistentWitness` holding a complete,
    directly consistent extension of the premises plus the negated goal.
    Raises :class:`BranchBudgetExceeded` when the decision budget runs out.
    """
    rules = _complete_rules(rules)
    premises = tuple(canonicalize(phi) for phi in formulas)
    goal = canonicalize(goal)
    if check:
        check_language((*premises, goal), rules.language)
    atoms = set(atoms_of(premises)) | goal.atoms
    engine = Saturation(rules, atoms, stop_on_absurdity=True)
    engine.add_premises(premises)
    counter = negate(goal)
    engine.add(counter, "assumption", (), 1, index=0)
    stats = SearchStats()
    conflict = _search(engine, decision_pairs(atoms, rules.language, order), budget, stats)
    if conflict is None:
        return ConsistentWitness(CompleteSet(engine.facts, atoms, rules.language), stats)
    tree = DerivationTree(goal, "RAA", (conflict.tree(),), counter, 0)
    return IndirectProof(tree, goal, premises, stats)


def lindenbaum_extend(formulas: Iterable[Formula], rules,
                      budget: int = DEFAULT_BRANCH_BUDGET, check: bool = True,
                      atoms: Iterable[str] | None = None, order: str = "emptiness"):
    """A complete, directly consistent extension over the atoms of the input,
    or a :class:`Refutation` when every extension is inconsistent."""
    rules = _complete_rules(rules)
    premises = tuple(canonicalize(phi) for phi in formulas)
    if check:
        check_language(premises, rules.language)
    universe = set(atoms_of(premises)) | set(atoms or ())
    engine = Saturation(rules, universe, stop_on_absurdity=True)
    engine.add_premises(premises)
    stats = SearchStats()
    conflict = _search(engine, decision_pairs(universe, rules.language, order), budget, stats)
    if conflict is None:
        return ConsistentWitness(CompleteSet(engine.facts, universe, rules.language), stats)
    return Refutation(conflict.tree(), premises, stats)


def search_stats(formulas: Iterable[Formula], rules, atoms=None) -> tuple:
    """(closed, stats) for the search started from ``formulas`` alone."""
    result = lindenbaum_extend(formulas, rules, atoms=atoms)
    return isinstance(result, Refutation), result.stats


def complete_set_needs_no_branching(complete: CompleteSet, rules) -> bool:
    """On a complete set the search must not branch, and it closes exactly
    when direct saturation already contains an absurdity."""
    rules = _complete_rules(rules)
    formulas = sorted(complete.formulas)
    closed, stats = search_stats(formulas, rules, complete.atom_universe)
    engine = Saturation(rules, complete.atom_universe)
    engine.add_premises(formulas)
    engine.run()
    return stats.decisions == 0 and closed == engine.inconsistent
