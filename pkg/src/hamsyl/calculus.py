"""Rule systems sH, sH-dagger and sH-star-dagger, forward-chaining saturation,
derivation trees, and an independent proof checker.

Rules are written as small templates over sorted metavariables. For the
engine each schema is expanded into shape-ground rules whose only
metavariables range over atoms; a shape-ground pattern is then matched
against a fact by comparing term kinds (shape and polarity) and binding atoms.
"""

from __future__ import annotations

import enum
import itertools
import re
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from . import syntax as sx
from .semantics import OracleConfig, Structure, all_structures
from .syntax import (ETerm, Formula, LanguageTag, Literal, Quantifier, Shape,
                     canonicalize, is_absurdity, member_of, negate)

__all__ = [
    "Sort",
    "Var",
    "Comp",
    "AllOf",
    "NotAllOf",
    "Template",
    "RuleSchema",
    "GroundRule",
    "RuleSet",
    "SH",
    "SH_DAGGER",
    "SH_STAR_DAGGER",
    "RULE_SETS",
    "rule_set",
    "LanguageError",
    "DerivationTree",
    "Saturation",
    "saturate",
    "decide_direct",
    "check_proof",
    "ProofError",
    "check_rule_validity",
    "ValidityReport",
    "Violation",
]


# --- templates --------------------------------------------------------------

class Sort(enum.IntEnum):
    ATOM = 0
    LITERAL = 1
    CTERM = 2
    ETERM = 3

    def admits(self, e: ETerm) -> bool:
        if self is Sort.ATOM:
            return e.is_atom
        if self is Sort.LITERAL:
            return e.is_literal
        if self is Sort.CTERM:
            return e.is_c_term
        return True


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Comp:
    arg: object

    def __str__(self):
        return f"non-{self.arg}"


@dataclass(frozen=True)
class AllOf:
    arg: object

    def __str__(self):
        return f"all {self.arg}"


@dataclass(frozen=True)
class NotAllOf:
    arg: object

    def __str__(self):
        return f"nall {self.arg}"


@dataclass(frozen=True)
class Template:
    quantifier: Quantifier
    subject: object
    predicate: object

    def __str__(self):
        return f"{self.quantifier.keyword}({self.subject}, {self.predicate})"

    def variables(self) -> list:
        return _vars(self.subject) + _vars(self.predicate)


def _vars(t) -> list:
    if isinstance(t, Var):
        return [t]
    return _vars(t.arg)


@dataclass(frozen=True)
class RuleSchema:
    name: str
    antecedents: tuple
    consequent: Template

    def __str__(self):
        ante = " ; ".join(str(a) for a in self.antecedents)
        return f"{ante} => {self.consequent}".strip()

    def dump(self) -> str:
        return f"RULE {self.name}: {self}"

    @property
    def variables(self) -> list:
        seen = {}
        for t in (*self.antecedents, self.consequent):
            for v in t.variables():
                seen.setdefault(v.name, v)
        return list(seen.values())


_TTERM_RE = re.compile(r"\s*(all\s+|nall\s+)?(non-)?([A-Za-z_][A-Za-z0-9_']*)\s*\Z")
_TFORM_RE = re.compile(r"\s*(forall|exists)\s*\((.*),(.*)\)\s*\Z")


def _parse_tterm(text: str, sorts: dict):
    m = _TTERM_RE.match(text)
    if not m:
        raise ValueError(f"bad template term {text!r}")
    t = Var(m.group(3), sorts[m.group(3)])
    if m.group(2):
        t = Comp(t)
    if m.group(1):
        t = AllOf(t) if m.group(1).strip() == "all" else NotAllOf(t)
    return t


def _parse_template(text: str, sorts: dict) -> Template:
    m = _TFORM_RE.match(text)
    if not m:
        raise ValueError(f"bad template {text!r}")
    q = Quantifier.FORALL if m.group(1) == "forall" else Quantifier.EXISTS
    return Template(q, _parse_tterm(m.group(2), sorts), _parse_tterm(m.group(3), sorts))


def _parse_rule(line: str, sorts: dict) -> RuleSchema:
    name, _, body = line.partition(":")
    ante, _, cons = body.partition("=>")
    ants = tuple(_parse_template(a, sorts) for a in ante.split(";") if a.strip())
    return RuleSchema(name.strip(), ants, _parse_template(cons, sorts))


# --- shape-ground expansion -------------------------------------------------

# complement on ETerm.kind codes: p<->non-p, all l<->nall l
COMP_KIND = (1, 0, 4, 5, 2, 3)

_SHAPES = {
    Sort.ATOM: ((0,),),
    Sort.LITERAL: ((0,), (1,)),
    Sort.CTERM: ((0,), (1,), (2,), (4,)),
    Sort.ETERM: ((0,), (1,), (2,), (3,), (4,), (5,)),
}


@dataclass(frozen=True)
class Pattern:
    """Shape-ground formula pattern: term kinds plus the atom variable of each side."""

    quantifier: Quantifier
    skind: int
    svar: str
    pkind: int
    pvar: str

    def __str__(self):
        return f"{self.quantifier.keyword}({_kind_str(self.skind, self.svar)}, " \
               f"{_kind_str(self.pkind, self.pvar)})"

    @property
    def flipped(self) -> "Pattern":
        """The other representative of the same identification class."""
        if self.quantifier is Quantifier.EXISTS:
            return Pattern(self.quantifier, self.pkind, self.pvar, self.skind, self.svar)
        return Pattern(self.quantifier, COMP_KIND[self.pkind], self.pvar,
                       COMP_KIND[self.skind], self.svar)


def _kind_str(kind: int, var: str) -> str:
    base = var if kind % 2 == 0 else f"non-{var}"
    return (base, f"all {base}", f"nall {base}")[kind // 2]


@dataclass(frozen=True)
class GroundRule:
    name: str
    antecedents: tuple
    consequent: Pattern

    @property
    def free_vars(self) -> tuple:
        bound = set()
        for a in self.antecedents:
            bound.update((a.svar, a.pvar))
        out = []
        for v in (self.consequent.svar, self.consequent.pvar):
            if v not in bound and v not in out:
                out.append(v)
        return tuple(out)

    @property
    def variables(self) -> tuple:
        out = []
        for p in (*self.antecedents, self.consequent):
            for v in (p.svar, p.pvar):
                if v not in out:
                    out.append(v)
        return tuple(out)

    def dump(self) -> str:
        ante = " ; ".join(str(a) for a in self.antecedents)
        return f"RULE {self.name}: {ante} => {self.consequent}"

    def instantiate(self, binding: dict) -> tuple:
        ants = tuple(_pattern_formula(a, binding) for a in self.antecedents)
        return ants, _pattern_formula(self.consequent, binding)


def _kind_term(kind: int, atom: str) -> ETerm:
    return ETerm(Shape(kind >> 1), Literal(atom, kind & 1 == 0))


def _pattern_formula(p: Pattern, binding: dict) -> Formula:
    return canonicalize(Formula(p.quantifier, _kind_term(p.skind, binding[p.svar]),
                                _kind_term(p.pkind, binding[p.pvar])))


def _ground_term(t, choice: dict) -> tuple:
    """Normalize a template term under a shape choice to (kind, atom var)."""
    if isinstance(t, Var):
        shape = choice[t.name]
        return shape, t.name
    kind, v = _ground_term(t.arg, choice)
    if isinstance(t, Comp):
        return COMP_KIND[kind], v
    if kind > 1:
        raise ValueError("all/nall applied to a non-literal")
    return (2 if isinstance(t, AllOf) else 4) + kind, v


def expand_schema(schema: RuleSchema) -> list:
    variables = schema.variables
    out = []
    for shapes in itertools.product(*(_SHAPES[v.sort] for v in variables)):
        choice = {v.name: s[0] for v, s in zip(variables, shapes)}

        def pat(t: Template) -> Pattern:
            sk, sv = _ground_term(t.subject, choice)
            pk, pv = _ground_term(t.predicate, choice)
            return Pattern(t.quantifier, sk, sv, pk, pv)

        out.append(GroundRule(schema.name, tuple(pat(a) for a in schema.antecedents),
                              pat(schema.consequent)))
    return out


# --- rule sets --------------------------------------------------------------

_SH_TEXT = """
I: exists(p, c) => exists(p, p)
T: => forall(p, p)
B: forall(p, q) ; forall(q, c) => forall(p, c)
D1: exists(p, q) ; forall(q, c) => exists(p, c)
D2: exists(p, c) ; forall(p, q) => exists(q, c)
D3: exists(p, c) ; forall(q, non-c) => exists(p, non-q)
H1: exists(p, all q) => forall(q, p)
H2: exists(p, all q) => forall(q, all q)
H3: exists(p, nall q) => exists(q, nall p)
HH1: exists(q, c) ; exists(p, all q) => forall(q, c)
HH2: exists(p, c) ; forall(p, all q) => forall(q, c)
HH3: forall(p, c) ; exists(p, all q) => forall(q, c)
HH4: forall(p, all q) ; exists(q, q) => forall(p, q)
"""

# c ranges over all e-terms here (see README: needed for terms like all non-p)
_SHD_TEXT = """
I: exists(l, c) => exists(l, l)
T: => forall(l, l)
A: forall(c, l) ; forall(c, non-l) => forall(c, m)
N: forall(l, non-l) => exists(non-l, non-l)
B1: forall(l, m) ; forall(m, c) => forall(l, c)
B2: forall(l, c) ; forall(c, m) => forall(l, m)
D1: exists(l, m) ; forall(m, c) => exists(l, c)
D2: exists(l, c) ; forall(c, m) => exists(l, m)
HH1: exists(l, c) ; exists(m, all l) => forall(l, c)
H2: exists(m, all l) => forall(l, all l)
H3: exists(l, nall m) => exists(m, nall l)
H4: exists(l, l) => forall(non-l, nall l)
"""

_SHSD_TEXT = """
I: exists(e, f) => exists(e, e)
T: => forall(e, e)
A: forall(e, non-e) => forall(f, non-e)
N: forall(e, non-e) => exists(non-e, non-e)
B: forall(e, f) ; forall(f, g) => forall(e, g)
D: exists(e, f) ; forall(f, g) => exists(e, g)
HH1: exists(l, e) ; exists(m, all l) => forall(l, e)
H2: exists(e, all l) => forall(l, all l)
H3: exists(l, nall m) => exists(m, nall l)
H4: exists(l, l) => forall(non-l, nall l)
"""


class RuleSet:
    def __init__(self, name: str, language: LanguageTag, schemata: Sequence[RuleSchema]):
        self.name = name
        self.language = language
        self.schemata = tuple(schemata)
        self._by_name = {s.name: s for s in self.schemata}
        self._expanded = None

    @classmethod
    def from_text(cls, name: str, language: LanguageTag, text: str, sorts: dict) -> "RuleSet":
        rules = [_parse_rule(line, sorts) for line in text.strip().splitlines() if line.strip()]
        return cls(name, language, rules)

    def schema(self, name: str) -> RuleSchema:
        return self._by_name[name]

    def expand(self) -> list:
        if self._expanded is None:
            self._expanded = [g for s in self.schemata for g in expand_schema(s)]
        return self._expanded

    def replace(self, schema: RuleSchema) -> "RuleSet":
        """Copy with one schema swapped out (by name), for mutation testing."""
        return RuleSet(self.name, self.language,
                       [schema if s.name == schema.name else s for s in self.schemata])

    def dump(self, expanded: bool = False) -> str:
        rules = self.expand() if expanded else self.schemata
        return "".join(r.dump() + "\n" for r in rules)

    def __repr__(self):
        return f"RuleSet({self.name})"


_A, _L, _C, _E = Sort.ATOM, Sort.LITERAL, Sort.CTERM, Sort.ETERM

SH = RuleSet.from_text("sH", LanguageTag.H, _SH_TEXT, {"o": _A, "p": _A, "q": _A, "c": _C})
SH_DAGGER = RuleSet.from_text("sHDagger", LanguageTag.HDAGGER, _SHD_TEXT,
                              {"l": _L, "m": _L, "c": _E})
SH_STAR_DAGGER = RuleSet.from_text("sHStarDagger", LanguageTag.HSTARDAGGER, _SHSD_TEXT,
                                   {"l": _L, "m": _L, "e": _E, "f": _E, "g": _E})

RULE_SETS = {"sH": SH, "sHDagger": SH_DAGGER, "sHStarDagger": SH_STAR_DAGGER}
_FOR_LOGIC = {LanguageTag.H: SH, LanguageTag.HDAGGER: SH_DAGGER,
              LanguageTag.HSTARDAGGER: SH_STAR_DAGGER,
              LanguageTag.S: SH, LanguageTag.SDAGGER: SH_DAGGER}


def rule_set(logic) -> RuleSet:
    """The rule set for a logic tag (S is handled by sH, S-dagger by sH-dagger)."""
    if isinstance(logic, RuleSet):
        return logic
    if isinstance(logic, str) and logic in RULE_SETS:
        return RULE_SETS[logic]
    if isinstance(logic, str):
        logic = LanguageTag.parse(logic)
    return _FOR_LOGIC[logic]


class LanguageError(ValueError):
    pass


def check_language(formulas: Iterable[Formula], language: LanguageTag) -> None:
    for phi in formulas:
        if not member_of(phi, language):
            raise LanguageError(f"{phi} is not a formula of {language.value}")


# --- derivation trees -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DerivationTree:
    """A derivation. ``rule`` is a schema name, ``"premise"``, ``"assumption"``
    (an undischarged-here hypothesis with ``index``) or ``"RAA"`` (discharging
    ``discharged`` with ``index``)."""

    conclusion: Formula
    rule: str
    children: tuple = ()
    discharged: Optional[Formula] = None
    index: Optional[int] = None

    def nodes(self) -> Iterator["DerivationTree"]:
        seen = set()
        stack = [self]
        while stack:
            t = stack.pop()
            if id(t) in seen:
                continue
            seen.add(id(t))
            yield t
            stack.extend(t.children)

    @property
    def size(self) -> int:
        """Number of distinct nodes (shared subtrees counted once)."""
        return sum(1 for _ in self.nodes())

    @property
    def depth(self) -> int:
        memo = {}

        def d(t):
            k = id(t)
            if k not in memo:
                memo[k] = 1 + max((d(c) for c in t.children), default=0)
            return memo[k]
        return d(self)

    def premises(self) -> set:
        return {t.conclusion for t in self.nodes() if t.rule == "premise"}

    def rules_used(self) -> set:
        return {t.rule for t in self.nodes()}

    def label(self) -> str:
        if self.rule == "premise":
            return "[premise]"
        if self.rule == "assumption":
            return f"[assumption #{self.index}]"
        if self.rule == "RAA":
            return f"[RAA#{self.index} discharges {self.discharged}]"
        return f"[{self.rule}]"

    def render(self, indent: str = "  ") -> str:
        lines = []

        def walk(t, depth):
            lines.append(f"{indent * depth}{t.conclusion}  {t.label()}")
            for c in t.children:
                walk(c, depth + 1)
        walk(self, 0)
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        d = {"conclusion": str(self.conclusion), "rule": self.rule}
        if self.discharged is not None:
            d["discharged"] = str(self.discharged)
        if self.index is not None:
            d["index"] = self.index
        d["children"] = [c.to_dict() for c in self.children]
        return d


class _Record:
    __slots__ = ("formula", "rule", "children", "deps", "level", "entries",
                 "discharged", "index", "_tree")

    def __init__(self, formula, rule, children, deps, level, discharged=None, index=None):
        self.formula = formula
        self.rule = rule
        self.children = children
        self.deps = deps
        self.level = level
        self.entries = None
        self.discharged = discharged
        self.index = index
        self._tree = None

    def tree(self) -> DerivationTree:
        # iterative post-order so deep derivations do not hit the recursion limit
        stack = [(self, False)]
        while stack:
            rec, done = stack.pop()
            if rec._tree is not None:
                continue
            if done:
                rec._tree = DerivationTree(rec.formula, rec.rule,
                                           tuple(c._tree for c in rec.children),
                                           rec.discharged, rec.index)
            else:
                stack.append((rec, True))
                stack.extend((c, False) for c in rec.children if c._tree is None)
        return self._tree


# --- saturation engine ------------------------------------------------------

class Saturation:
    """Incremental forward chaining for one rule set over a fixed atom universe.

    Facts are canonical formulas. Each fact is indexed under both of its
    (subject, predicate) readings. Facts are processed in insertion order and
    each newly processed fact is joined against the already processed ones,
    so every pair of facts meets exactly when the later of the two is processed.

    Levels support the refutation search: ``push`` opens a level, ``pop_to``
    discards every fact added above a level. Each fact carries a bitmask of the
    assumption indices it depends on.
    """

    def __init__(self, rules: RuleSet, atoms: Iterable[str], stop_on_absurdity: bool = False):
        self.rules = rules
        self.atoms = sorted(set(atoms))
        self.stop_on_absurdity = stop_on_absurdity
        self.facts: dict = {}
        self.trail: list = []
        self.marks: list = []
        self.queue: deque = deque()
        self.conflict: Optional[_Record] = None
        self.absurdities: list = []
        self._by_subject: dict = {}
        self._by_kind: dict = {}
        self._terms: dict = {}
        self._rule_index: dict = {}
        self._axioms = []
        for g in rules.expand():
            if not g.antecedents:
                self._axioms.append(g)
                continue
            for i, a in enumerate(g.antecedents):
                key = (a.quantifier, a.skind, a.pkind)
                self._rule_index.setdefault(key, []).append((g, i, self._join_plan(g, i)))
        for g in self._axioms:
            for binding in self._bindings(g.free_vars, {}):
                self._add(self._cons(g.consequent, binding), g.name, (), 0)

    @property
    def level(self) -> int:
        return len(self.marks)

    def _join_plan(self, g: GroundRule, i: int):
        if len(g.antecedents) == 1:
            return None
        a = g.antecedents[i]
        other = g.antecedents[1 - i]
        bound = {a.svar, a.pvar}
        if other.svar in bound:
            return ("subject", other)
        if other.pvar in bound:
            return ("subject", other.flipped)
        return ("scan", other)

    def _term(self, kind: int, atom: str) -> ETerm:
        k = (kind, atom)
        t = self._terms.get(k)
        if t is None:
            t = self._terms[k] = _kind_term(kind, atom)
        return t

    def _cons(self, p: Pattern, binding: dict) -> Formula:
        return canonicalize(Formula(p.quantifier, self._term(p.skind, binding[p.svar]),
                                    self._term(p.pkind, binding[p.pvar])))

    def _bindings(self, free: tuple, binding: dict):
        if not free:
            yield binding
            return
        for combo in itertools.product(self.atoms, repeat=len(free)):
            b = dict(binding)
            b.update(zip(free, combo))
            yield b

    # public API

    def add(self, formula: Formula, rule: str = "premise", children: tuple = (),
            deps: int = 0, discharged: Formula | None = None, index: int | None = None):
        """Insert a fact (if new) and return its record; call ``run`` to saturate."""
        formula = canonicalize(formula)
        rec = self.facts.get(formula)
        if rec is not None:
            return rec
        return self._add(formula, rule, children, deps, discharged, index)

    def add_premises(self, formulas: Iterable[Formula]) -> None:
        for phi in formulas:
            self.add(phi)

    def _add(self, formula, rule, children, deps, discharged=None, index=None):
        if formula in self.facts:
            return self.facts[formula]
        rec = _Record(formula, rule, children, deps, self.level, discharged, index)
        self.facts[formula] = rec
        self.trail.append(rec)
        self.queue.append(rec)
        if is_absurdity(formula):
            self.absurdities.append(rec)
            if self.conflict is None:
                self.conflict = rec
        return rec

    def run(self) -> Optional[_Record]:
        """Saturate. Returns the first absurdity record found, if any."""
        queue = self.queue
        while queue:
            if self.stop_on_absurdity and self.conflict is not None:
                break
            self._process(queue.popleft())
        return self.conflict

    def _process(self, rec: _Record) -> None:
        phi = rec.formula
        q = phi.quantifier
        e, f = phi.subject, phi.predicate
        reps = [(e, f)]
        other = (f, e) if q is Quantifier.EXISTS else (f.complement, e.complement)
        if other != (e, f):
            reps.append(other)
        entries = []
        for s, p in reps:
            lst = self._by_subject.setdefault((q, s), [])
            lst.append((p, rec))
            entries.append(lst)
            lst = self._by_kind.setdefault((q, s.kind, p.kind), [])
            lst.append((s, p, rec))
            entries.append(lst)
        rec.entries = entries
        stop = self.stop_on_absurdity
        for s, p in reps:
            plans = self._rule_index.get((q, s.kind, p.kind))
            if not plans:
                continue
            sa, pa = s.literal.atom, p.literal.atom
            for g, i, plan in plans:
                a = g.antecedents[i]
                if a.svar == a.pvar:
                    if sa != pa:
                        continue
                    binding = {a.svar: sa}
                else:
                    binding = {a.svar: sa, a.pvar: pa}
                if plan is None:
                    self._fire(g, binding, (rec,))
                else:
                    self._join(g, i, plan, binding, rec)
                if stop and self.conflict is not None:
                    return

    def _join(self, g, i, plan, binding, rec):
        how, pat = plan
        if how == "subject":
            term = self._term(pat.skind, binding[pat.svar])
            partners = self._by_subject.get((pat.quantifier, term))
            if not partners:
                return
            pk, pv = pat.pkind, pat.pvar
            fixed = binding.get(pv)
            for p, other in partners:
                if p.kind != pk:
                    continue
                if fixed is None:
                    b = dict(binding)
                    b[pv] = p.literal.atom
                elif fixed != p.literal.atom:
                    continue
                else:
                    b = binding
                self._fire(g, b, (rec, other) if i == 0 else (other, rec))
        else:
            partners = self._by_kind.get((pat.quantifier, pat.skind, pat.pkind))
            if not partners:
                return
            for s, p, other in partners:
                sa, pa = s.literal.atom, p.literal.atom
                if pat.svar == pat.pvar and sa != pa:
                    continue
                b = dict(binding)
                b[pat.svar] = sa
                b[pat.pvar] = pa
                self._fire(g, b, (rec, other) if i == 0 else (other, rec))

    def _fire(self, g: GroundRule, binding: dict, children: tuple) -> None:
        c = g.consequent
        deps = 0
        for ch in children:
            deps |= ch.deps
        if c.svar in binding and c.pvar in binding:
            phi = self._cons(c, binding)
            if phi not in self.facts:
                self._add(phi, g.name, children, deps)
            return
        free = [v for v in (c.svar, c.pvar) if v not in binding]
        for b in self._bindings(tuple(dict.fromkeys(free)), binding):
            phi = self._cons(c, b)
            if phi not in self.facts:
                self._add(phi, g.name, children, deps)

    def push(self) -> None:
        self.marks.append(len(self.trail))

    def pop_to(self, level: int) -> None:
        while len(self.marks) > level:
            mark = self.marks.pop()
            for rec in reversed(self.trail[mark:]):
                if rec.entries is not None:
                    for lst in reversed(rec.entries):
                        lst.pop()
                    rec.entries = None
                del self.facts[rec.formula]
            del self.trail[mark:]
        self.queue.clear()
        self.absurdities = [r for r in self.absurdities if r.formula in self.facts
                            and self.facts[r.formula] is r]
        self.conflict = self.absurdities[0] if self.absurdities else None

    # queries

    def __contains__(self, formula: Formula) -> bool:
        return canonicalize(formula) in self.facts

    def formulas(self) -> frozenset:
        return frozenset(self.facts)

    def record(self, formula: Formula):
        return self.facts.get(canonicalize(formula))

    def tree(self, formula: Formula) -> Optional[DerivationTree]:
        rec = self.record(formula)
        return None if rec is None else rec.tree()

    def universal_successors(self, e: ETerm) -> list:
        """Every f with forall(e, f) among the processed facts."""
        return [p for p, _ in self._by_subject.get((Quantifier.FORALL, e), ())]

    def existential_partners(self, e: ETerm) -> list:
        return [p for p, _ in self._by_subject.get((Quantifier.EXISTS, e), ())]

    @property
    def inconsistent(self) -> bool:
        return self.conflict is not None


def _prepare(formulas, rules, extra_atoms=(), check=True):
    formulas = [canonicalize(phi) for phi in formulas]
    if check:
        check_language(formulas, rules.language)
    atoms = set(sx.atoms_of(formulas)) | set(extra_atoms)
    return formulas, atoms


def saturate(formulas: Iterable[Formula], rules, atoms: Iterable[str] | None = None,
             check: bool = True) -> frozenset:
    """Least fixpoint of ``rules`` over the canonical formulas on the given atoms
    (default: the atoms of ``formulas``)."""
    rules = rule_set(rules)
    formulas, universe = _prepare(formulas, rules, atoms or (), check)
    engine = Saturation(rules, universe)
    engine.add_premises(formulas)
    engine.run()
    return engine.formulas()


def saturation(formulas: Iterable[Formula], rules, atoms: Iterable[str] | None = None,
               check: bool = True) -> Saturation:
    """Like :func:`saturate` but returns the engine (for trees and index queries)."""
    rules = rule_set(rules)
    formulas, universe = _prepare(formulas, rules, atoms or (), check)
    engine = Saturation(rules, universe)
    engine.add_premises(formulas)
    engine.run()
    return engine


def decide_direct(formulas: Iterable[Formula], goal: Formula, rules,
                  check: bool = True) -> Optional[DerivationTree]:
    """A derivation of ``goal`` from ``formulas`` by the rules alone, or None."""
    rules = rule_set(rules)
    goal = canonicalize(goal)
    if check:
        check_language([goal], rules.language)
    engine = saturation(formulas, rules, goal.atoms, check)
    return engine.tree(goal)


# --- independent proof checker ----------------------------------------------

class ProofError(ValueError):
    pass


def _match_term(t, e: ETerm, b: dict) -> Optional[dict]:
    if isinstance(t, Var):
        cur = b.get(t.name)
        if cur is not None:
            return b if cur is e else None
        if not t.sort.admits(e):
            return None
        b = dict(b)
        b[t.name] = e
        return b
    if isinstance(t, Comp):
        return _match_term(t.arg, e.complement, b)
    want = Shape.ALL if isinstance(t, AllOf) else Shape.NALL
    if e.shape is not want:
        return None
    return _match_term(t.arg, ETerm(Shape.LIT, e.literal), b)


def _match_formula(t: Template, phi: Formula, b: dict) -> Iterator[dict]:
    if t.quantifier is not phi.quantifier:
        return
    for e, f in sx.representatives(phi):
        b1 = _match_term(t.subject, e, b)
        if b1 is None:
            continue
        b2 = _match_term(t.predicate, f, b1)
        if b2 is not None:
            yield b2


def _schema_matches(schema: RuleSchema, premises: Sequence[Formula], conclusion: Formula) -> bool:
    if len(schema.antecedents) != len(premises):
        return False

    def go(i, b):
        if i == len(premises):
            return any(True for _ in _match_formula(schema.consequent, conclusion, b))
        return any(go(i + 1, b2) for b2 in _match_formula(schema.antecedents[i], premises[i], b))
    return go(0, {})


def check_proof(tree: DerivationTree, premises: Iterable[Formula], rules,
                open_assumptions: dict | None = None) -> bool:
    """Validate every node of ``tree``. Raises ProofError on the first bad node.

    Premise leaves must be in ``premises``; assumption leaves must be in scope
    (introduced by an enclosing RAA node or listed in ``open_assumptions``).
    """
    rules = rule_set(rules)
    prem = {canonicalize(p) for p in premises}
    checked = set()
    stack = [(tree, dict(open_assumptions or {}))]
    while stack:
        t, scope = stack.pop()
        key = (id(t), tuple(sorted((k, v.key) for k, v in scope.items())))
        if key in checked:
            continue
        checked.add(key)
        if t.conclusion is not canonicalize(t.conclusion):
            raise ProofError(f"non-canonical conclusion {t.conclusion}")
        if t.rule == "premise":
            if t.children or t.conclusion not in prem:
                raise ProofError(f"{t.conclusion} is not a premise")
        elif t.rule == "assumption":
            if t.children or scope.get(t.index) is not t.conclusion:
                raise ProofError(f"assumption #{t.index} ({t.conclusion}) is not in scope")
        elif t.rule == "RAA":
            if len(t.children) != 1 or t.discharged is None or t.index is None:
                raise ProofError("malformed RAA node")
            child = t.children[0]
            if not is_absurdity(child.conclusion):
                raise ProofError(f"RAA#{t.index} child concludes {child.conclusion}, "
                                 "not an absurdity")
            if t.conclusion is not negate(t.discharged):
                raise ProofError(f"RAA#{t.index} concludes {t.conclusion}, "
                                 f"not the negation of {t.discharged}")
            inner = dict(scope)
            inner[t.index] = canonicalize(t.discharged)
            stack.append((child, inner))
        else:
            try:
                schema = rules.schema(t.rule)
            except KeyError:
                raise ProofError(f"unknown rule {t.rule!r}") from None
            if not _schema_matches(schema, [c.conclusion for c in t.children], t.conclusion):
                raise ProofError(f"node {t.conclusion} is not an instance of {t.rule}")
            for c in t.children:
                stack.append((c, scope))
    return True


# --- rule validity ----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    rule: str
    antecedents: tuple
    consequent: Formula
    witness: Structure

    def __str__(self):
        ante = " ; ".join(str(a) for a in self.antecedents)
        return f"{self.rule}: {ante} => {self.consequent} fails in {self.witness}"


@dataclass
class ValidityReport:
    rule_set: str
    max_domain_size: int
    allow_empty: bool
    instances_checked: int = 0
    structures_checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


_VALIDITY_ATOMS = ("a", "b")


def _instances(rules: Sequence[GroundRule]) -> list:
    seen = set()
    out = []
    for g in rules:
        vs = g.variables
        for combo in itertools.product(_VALIDITY_ATOMS, repeat=len(vs)):
            ants, cons = g.instantiate(dict(zip(vs, combo)))
            key = (g.name, ants, cons)
            if key not in seen:
                seen.add(key)
                out.append(key)
    return out


def _check_instances(args):
    instances, structures = args
    bad = []
    for name, ants, cons in instances:
        for st in structures:
            if st.models(ants) and not st.satisfies(cons):
                bad.append(Violation(name, ants, cons, st))
                break
    return bad


def check_rule_validity(rules, cfg: OracleConfig | None = None, allow_empty: bool = False,
                        jobs: int = 1) -> ValidityReport:
    """Check every expanded rule, instantiated over two atoms in every way,
    against every structure up to the size bound (default 3). The reported
    witness for a violation is the first failing structure in size order."""
    rules = rule_set(rules)
    bound = cfg.max_domain_size if cfg and cfg.max_domain_size else 3
    structures = [Structure.empty()] if allow_empty else []
    for n in range(1, bound + 1):
        structures.extend(all_structures(_VALIDITY_ATOMS, n))
    instances = _instances(rules.expand())
    report = ValidityReport(rules.name, bound, allow_empty, len(instances), len(structures))
    jobs = jobs or (cfg.jobs if cfg else 1)
    if jobs > 1:
        chunks = [instances[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            found = [v for part in pool.map(_check_instances, [(c, structures) for c in chunks])
                     for v in part]
        order = {(n, a, c): i for i, (n, a, c) in enumerate(instances)}
        found.sort(key=lambda v: order[(v.rule, v.antecedents, v.consequent)])
    else:
        found = _check_instances((instances, structures))
    report.violations = found
    return report
