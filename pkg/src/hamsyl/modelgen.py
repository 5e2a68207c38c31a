"""Model construction from saturated sets.

Elements are built from "worlds": sets of terms closed under what the
saturation proves. A world is special when it contains ``all l`` for some l
that is provably inhabited; special worlds yield one element, every other
world yields two copies. An atom holds of an element iff the atom belongs to
its world. Every constructed structure is model-checked before it is returned.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .calculus import (SH, SH_DAGGER, SH_STAR_DAGGER, DerivationTree, Saturation,
                       check_language)
from .refutation import CompleteSet
from .semantics import Structure
from .syntax import (ETerm, Formula, LanguageTag, Literal, Shape, atoms_of,
                     canonicalize, exists)

__all__ = [
    "Variant",
    "World",
    "Construction",
    "ModelVerificationError",
    "close_term_set",
    "build_model_h",
    "build_model_dagger",
]


class Variant(enum.Enum):
    H = "h"
    HDAGGER = "hdagger"
    HSTARDAGGER = "hstardagger"


class ModelVerificationError(AssertionError):
    """The constructed structure failed to satisfy its input. Indicates a bug."""


@dataclass(frozen=True)
class World:
    terms: frozenset
    special_via: Optional[ETerm] = None

    @property
    def special(self) -> bool:
        return self.special_via is not None

    def sorted_terms(self) -> list:
        return sorted(self.terms)

    def __contains__(self, e: ETerm) -> bool:
        return e in self.terms

    def describe(self) -> str:
        mark = f"  special via {self.special_via}" if self.special else ""
        return "{" + ", ".join(str(t) for t in self.sorted_terms()) + "}" + mark


@dataclass
class Construction:
    """Result of a model construction: a structure, or a refutation when the
    input is inconsistent."""

    structure: Optional[Structure]
    worlds: list = field(default_factory=list)
    elements: list = field(default_factory=list)
    refutation: Optional[DerivationTree] = None

    @property
    def consistent(self) -> bool:
        return self.structure is not None

    def explain(self) -> str:
        if self.structure is None:
            return "inconsistent\n"
        lines = [f"worlds: {len(self.worlds)}"]
        for i, w in enumerate(self.worlds):
            lines.append(f"  w{i}: {w.describe()}")
        lines.append("elements: " + " ".join(f"<w{i},{c}>" for i, c in self.elements))
        return "\n".join(lines) + "\n"


# --- closure ----------------------------------------------------------------

def _inhabited(sat: Saturation, lit: Literal) -> bool:
    e = ETerm(Shape.LIT, lit)
    return canonicalize(exists(e, e)) in sat.facts


def close_term_set(terms: Iterable[ETerm], sat: Saturation, variant: Variant) -> frozenset:
    """Least superset of ``terms`` closed under the variant's closure conditions.

    H: an atom in the set brings every c-term it is provably included in, and
    ``all p`` brings p when p is provably inhabited. H-dagger: a literal brings
    everything it is provably included in, and any term brings the literals it
    is provably included in. H-star-dagger: any term brings everything it is
    provably included in.
    """
    out = set(terms)
    stack = list(out)
    while stack:
        t = stack.pop()
        new = []
        if variant is Variant.H:
            if t.is_atom:
                new = [c for c in sat.universal_successors(t) if c.is_c_term]
            elif t.shape is Shape.ALL and t.literal.positive and _inhabited(sat, t.literal):
                new = [ETerm(Shape.LIT, t.literal)]
        elif variant is Variant.HDAGGER:
            succ = sat.universal_successors(t)
            new = succ if t.is_literal else [c for c in succ if c.is_literal]
        else:
            new = sat.universal_successors(t)
        for c in new:
            if c not in out:
                out.add(c)
                stack.append(c)
    return frozenset(out)


def _consistent(terms: frozenset) -> bool:
    return all(t.complement not in terms for t in terms)


def _assemble(worlds: list, sat: Saturation, atoms: list, formulas: list,
              special_terms) -> Construction:
    marked = []
    for w in worlds:
        via = None
        for t in sorted(w):
            if t.shape is Shape.ALL and (special_terms is None or t.literal.positive) \
                    and _inhabited(sat, t.literal):
                via = t
                break
        marked.append(World(w, via))
    elements = []
    for i, w in enumerate(marked):
        elements.extend([(i, 0)] if w.special else [(i, -1), (i, 1)])
    masks = {a: 0 for a in atoms}
    for idx, (i, _) in enumerate(elements):
        for a in atoms:
            if ETerm(Shape.LIT, Literal(a, True)) in marked[i].terms:
                masks[a] |= 1 << idx
    st = Structure.from_masks(len(elements), masks)
    bad = st.failures(formulas)
    if bad:
        raise ModelVerificationError(f"constructed structure fails {bad[0]}")
    return Construction(st, marked, elements)


# --- H ----------------------------------------------------------------------

def build_model_h(formulas: Iterable[Formula], check: bool = True) -> Construction:
    """Saturate under sH and either return the absurdity or build a model."""
    formulas = [canonicalize(phi) for phi in formulas]
    if check:
        check_language(formulas, LanguageTag.H)
    atoms = atoms_of(formulas)
    sat = Saturation(SH, atoms)
    sat.add_premises(formulas)
    sat.run()
    if sat.conflict is not None:
        return Construction(None, refutation=sat.conflict.tree())
    if not any(phi.is_existential for phi in formulas):
        st = Structure(1)
        if st.failures(formulas):
            raise ModelVerificationError("empty structure fails a universal premise")
        return Construction(st, [World(frozenset())], [(0, 0)])
    worlds: list = []
    seen = set()

    def add(w):
        if w not in seen:
            seen.add(w)
            worlds.append(w)
            return True
        return False

    layer = []
    for phi in sorted(sat.facts):
        if not phi.is_existential:
            continue
        e, f = phi.subject, phi.predicate
        for s, p in ((e, f), (f, e)):
            if s.is_atom and p.is_c_term:
                w = close_term_set((s, p), sat, Variant.H)
                if add(w):
                    layer.append(w)
    singles: dict = {}
    while layer:
        nxt = []
        for w in layer:
            for t in sorted(w):
                if t.shape is Shape.NALL and t.literal.positive:
                    p = ETerm(Shape.LIT, t.literal)
                    if p not in singles:
                        singles[p] = close_term_set((p,), sat, Variant.H)
                    if add(singles[p]):
                        nxt.append(singles[p])
        layer = nxt
    return _assemble(worlds, sat, atoms, formulas, special_terms=True)


# --- dagger variants --------------------------------------------------------

def _extend(seed: frozenset, pairs: list, sat: Saturation, variant: Variant,
            first_only: bool, limit: int) -> list:
    """Consistent closed extensions of ``seed`` deciding every pair in ``pairs``.
    A pair with a third option (None) may also be left undecided."""
    out = []

    def go(w, i):
        if len(out) >= limit:
            return
        while i < len(pairs) and any(x is not None and x in w for x in pairs[i]):
            i += 1
        if i == len(pairs):
            out.append(w)
            return
        for choice in pairs[i]:
            if choice is None:
                go(w, i + 1)
            else:
                w2 = close_term_set(w | {choice}, sat, variant)
                if _consistent(w2):
                    go(w2, i + 1)
            if first_only and out:
                return

    go(seed, 0)
    return out


_ALL_WORLDS_MAX_ATOMS = 3


def build_model_dagger(complete: CompleteSet | Iterable[Formula], variant: Variant | str,
                       worlds: str = "auto", limit: int = 100000) -> Construction:
    """Build a model of a complete, directly consistent set.

    ``worlds="all"`` enumerates every closed consistent world that the
    enumeration can reach (all worlds over the atoms for the star variant; for
    H-dagger the optional quantified terms are branched three ways).
    ``worlds="seeded"`` keeps, for each existential of the input and for the
    empty seed, the closed seed plus its first complete extension. ``"auto"``
    uses "all" up to three atoms.
    """
    variant = Variant(variant) if not isinstance(variant, Variant) else variant
    if variant is Variant.H:
        raise ValueError("use build_model_h for H")
    formulas = sorted(complete.formulas if isinstance(complete, CompleteSet)
                      else {canonicalize(phi) for phi in complete})
    rules = SH_DAGGER if variant is Variant.HDAGGER else SH_STAR_DAGGER
    lang = rules.language
    check_language(formulas, lang)
    if isinstance(complete, CompleteSet):
        atoms = list(complete.atom_universe)
        complete.validate()
    else:
        atoms = atoms_of(formulas)
    sat = Saturation(rules, atoms)
    sat.add_premises(formulas)
    sat.run()
    if sat.conflict is not None:
        raise ValueError("input is not directly consistent")
    if worlds == "auto":
        worlds = "all" if len(atoms) <= _ALL_WORLDS_MAX_ATOMS else "seeded"
    lits = [(ETerm(Shape.LIT, Literal(a, True)), ETerm(Shape.LIT, Literal(a, False)))
            for a in atoms]
    quant = [(ETerm(s, Literal(a, pos)), ETerm(s, Literal(a, pos)).complement)
             for a in atoms for pos in (True, False) for s in (Shape.ALL,)]
    if variant is Variant.HSTARDAGGER:
        pairs = lits + quant
    elif worlds == "all":
        pairs = lits + [(x, y, None) for x, y in quant]
    else:
        pairs = lits
    pairs.sort(key=lambda pr: pr[0].key)
    seeds = [frozenset()]
    for phi in formulas:
        if not phi.is_existential:
            continue
        e, f = phi.subject, phi.predicate
        if variant is Variant.HDAGGER and not (e.is_literal or f.is_literal):
            continue
        seeds.append(frozenset((e, f)))
    found: list = []
    seen = set()
    for seed in seeds:
        w0 = close_term_set(seed, sat, variant)
        if not _consistent(w0):
            continue
        for w in _extend(w0, pairs, sat, variant, worlds != "all", limit):
            if w not in seen:
                seen.add(w)
                found.append(w)
        if worlds == "all":
            break
    found.sort(key=lambda w: sorted(t.key for t in w))
    if not found:
        raise ModelVerificationError("no world could be built")
    return _assemble(found, sat, atoms, formulas, special_terms=None)
