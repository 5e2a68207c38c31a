"""Atoms, literals, e-terms and formulas of syllogistic languages with quantified predicates.

Terms and formulas are interned: constructing the same value twice returns the
same object, so equality and hashing are identity based and cheap. All values
are immutable.

The textual grammar (one formula per line, ``#`` starts a comment)::

    formula := ("forall" | "exists") "(" eterm "," eterm ")"
    eterm   := lit | "all" lit | "nall" lit
    lit     := atom | "non-" atom
    atom    := [a-z][A-Za-z0-9_]*
"""

from __future__ import annotations

import enum
import itertools
import re
from typing import Iterable, Iterator

__all__ = [
    "RESERVED",
    "Shape",
    "Quantifier",
    "Literal",
    "ETerm",
    "Formula",
    "LanguageTag",
    "ParseError",
    "atom",
    "neg",
    "lit",
    "all_of",
    "not_all_of",
    "forall",
    "exists",
    "canonicalize",
    "negate",
    "is_absurdity",
    "member_of",
    "representatives",
    "atoms_of",
    "literals_over",
    "c_terms_over",
    "e_terms_over",
    "formulas_over",
    "parse_formula",
    "parse_eterm",
    "parse_formulas",
    "format_formulas",
]

RESERVED = frozenset({"forall", "exists", "all", "nall", "non"})
_ATOM_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


class Shape(enum.IntEnum):
    LIT = 0
    ALL = 1
    NALL = 2


class Quantifier(enum.IntEnum):
    FORALL = 0
    EXISTS = 1

    @property
    def keyword(self) -> str:
        return "forall" if self is Quantifier.FORALL else "exists"

    @property
    def dual(self) -> "Quantifier":
        return Quantifier.EXISTS if self is Quantifier.FORALL else Quantifier.FORALL


class _Interned:
    """Flyweight base: instances are unique per constructor arguments."""

    __slots__ = ()

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __delattr__(self, name):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __lt__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.key < other.key

    def __le__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.key <= other.key

    def __gt__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.key > other.key

    def __ge__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.key >= other.key


class Literal(_Interned):
    """An atom ``p`` (positive) or its noun-level negation ``non-p``."""

    __slots__ = ("atom", "positive", "key")
    _cache: dict = {}

    def __new__(cls, atom: str, positive: bool = True):
        ck = (atom, bool(positive))
        try:
            return cls._cache[ck]
        except KeyError:
            pass
        if not isinstance(atom, str) or not _ATOM_RE.match(atom):
            raise ValueError(f"invalid atom name {atom!r}")
        if atom in RESERVED:
            raise ValueError(f"reserved word {atom!r} cannot be used as an atom")
        self = object.__new__(cls)
        object.__setattr__(self, "atom", atom)
        object.__setattr__(self, "positive", bool(positive))
        object.__setattr__(self, "key", (atom, 0 if positive else 1))
        cls._cache[ck] = self
        return self

    def __reduce__(self):
        return (Literal, (self.atom, self.positive))

    @property
    def complement(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __str__(self):
        return self.atom if self.positive else f"non-{self.atom}"

    def __repr__(self):
        return f"Literal({str(self)!r})"


class ETerm(_Interned):
    """A literal, ``all l`` (identical to every l) or ``nall l`` (its complement).

    Global term order: shape rank (literal < all < nall), then literal.
    """

    __slots__ = ("shape", "literal", "key", "kind", "_complement")
    _cache: dict = {}

    def __new__(cls, shape: Shape, literal: Literal):
        ck = (shape, literal)
        try:
            return cls._cache[ck]
        except KeyError:
            pass
        if not isinstance(literal, Literal):
            raise TypeError("ETerm literal must be a Literal")
        shape = Shape(shape)
        self = object.__new__(cls)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "literal", literal)
        object.__setattr__(self, "key", (int(shape), literal.key))
        # shape and polarity packed into 0..5, used for pattern indexing
        object.__setattr__(self, "kind", 2 * int(shape) + (0 if literal.positive else 1))
        object.__setattr__(self, "_complement", None)
        cls._cache[ck] = self
        return self

    def __reduce__(self):
        return (ETerm, (int(self.shape), self.literal))

    @property
    def complement(self) -> "ETerm":
        c = self._complement
        if c is None:
            if self.shape is Shape.LIT:
                c = ETerm(Shape.LIT, self.literal.complement)
            elif self.shape is Shape.ALL:
                c = ETerm(Shape.NALL, self.literal)
            else:
                c = ETerm(Shape.ALL, self.literal)
            object.__setattr__(self, "_complement", c)
        return c

    @property
    def is_literal(self) -> bool:
        return self.shape is Shape.LIT

    @property
    def is_atom(self) -> bool:
        return self.shape is Shape.LIT and self.literal.positive

    @property
    def is_c_term(self) -> bool:
        return self.shape is Shape.LIT or self.literal.positive

    @property
    def atom(self) -> str:
        return self.literal.atom

    def __str__(self):
        if self.shape is Shape.LIT:
            return str(self.literal)
        return ("all " if self.shape is Shape.ALL else "nall ") + str(self.literal)

    def __repr__(self):
        return f"ETerm({str(self)!r})"


class Formula(_Interned):
    """``forall(e, f)`` or ``exists(e, f)``.

    The constructor does not canonicalize; use :func:`canonicalize` (or the
    :func:`forall` / :func:`exists` helpers, which do).
    """

    __slots__ = ("quantifier", "subject", "predicate", "key")
    _cache: dict = {}

    def __new__(cls, quantifier: Quantifier, subject: ETerm, predicate: ETerm):
        ck = (quantifier, subject, predicate)
        try:
            return cls._cache[ck]
        except KeyError:
            pass
        if not isinstance(subject, ETerm) or not isinstance(predicate, ETerm):
            raise TypeError("formula arguments must be ETerms")
        quantifier = Quantifier(quantifier)
        self = object.__new__(cls)
        object.__setattr__(self, "quantifier", quantifier)
        object.__setattr__(self, "subject", subject)
        object.__setattr__(self, "predicate", predicate)
        object.__setattr__(self, "key", (int(quantifier), subject.key, predicate.key))
        cls._cache[ck] = self
        return self

    def __reduce__(self):
        return (Formula, (int(self.quantifier), self.subject, self.predicate))

    @property
    def is_universal(self) -> bool:
        return self.quantifier is Quantifier.FORALL

    @property
    def is_existential(self) -> bool:
        return self.quantifier is Quantifier.EXISTS

    @property
    def canonical(self) -> bool:
        return canonicalize(self) is self

    @property
    def atoms(self) -> frozenset:
        return frozenset((self.subject.atom, self.predicate.atom))

    def __str__(self):
        return f"{self.quantifier.keyword}({self.subject}, {self.predicate})"

    def __repr__(self):
        return f"Formula({str(self)!r})"


# --- constructors -----------------------------------------------------------

def atom(name: str) -> ETerm:
    return ETerm(Shape.LIT, Literal(name, True))


def neg(name: str) -> ETerm:
    return ETerm(Shape.LIT, Literal(name, False))


def lit(name: str, positive: bool = True) -> ETerm:
    return ETerm(Shape.LIT, Literal(name, positive))


def _as_literal(x) -> Literal:
    if isinstance(x, Literal):
        return x
    if isinstance(x, ETerm) and x.shape is Shape.LIT:
        return x.literal
    if isinstance(x, str):
        return Literal(x, True)
    raise TypeError(f"expected a literal, got {x!r}")


def all_of(x) -> ETerm:
    return ETerm(Shape.ALL, _as_literal(x))


def not_all_of(x) -> ETerm:
    return ETerm(Shape.NALL, _as_literal(x))


def _as_eterm(x) -> ETerm:
    if isinstance(x, ETerm):
        return x
    if isinstance(x, Literal):
        return ETerm(Shape.LIT, x)
    if isinstance(x, str):
        return parse_eterm(x)
    raise TypeError(f"expected an e-term, got {x!r}")


def forall(subject, predicate) -> Formula:
    return canonicalize(Formula(Quantifier.FORALL, _as_eterm(subject), _as_eterm(predicate)))


def exists(subject, predicate) -> Formula:
    return canonicalize(Formula(Quantifier.EXISTS, _as_eterm(subject), _as_eterm(predicate)))


# --- identification, negation ----------------------------------------------

def representatives(phi: Formula) -> tuple:
    """Both (subject, predicate) readings of the identification class of ``phi``."""
    e, f = phi.subject, phi.predicate
    if phi.quantifier is Quantifier.EXISTS:
        return ((e, f), (f, e))
    return ((e, f), (f.complement, e.complement))


def canonicalize(phi: Formula) -> Formula:
    e, f = phi.subject, phi.predicate
    if phi.quantifier is Quantifier.EXISTS:
        if f.key < e.key:
            return Formula(Quantifier.EXISTS, f, e)
        return phi
    fc = f.complement
    if fc.key < e.key:
        return Formula(Quantifier.FORALL, fc, e.complement)
    return phi


def negate(phi: Formula) -> Formula:
    """The contradictory of ``phi``: forall(e,f) <-> exists(e, f-bar)."""
    return canonicalize(Formula(phi.quantifier.dual, phi.subject, phi.predicate.complement))


def is_absurdity(phi: Formula) -> bool:
    return phi.quantifier is Quantifier.EXISTS and phi.predicate is phi.subject.complement


# --- languages --------------------------------------------------------------

class LanguageTag(enum.Enum):
    S = "s"
    SDAGGER = "sdagger"
    H = "h"
    HDAGGER = "hdagger"
    HSTARDAGGER = "hstardagger"

    @classmethod
    def parse(cls, text: str) -> "LanguageTag":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown logic {text!r}; expected one of "
                             + ", ".join(t.value for t in cls)) from None


def _shape_ok(tag: LanguageTag, quantifier: Quantifier, e: ETerm, f: ETerm) -> bool:
    if tag is LanguageTag.HSTARDAGGER:
        return True
    if tag is LanguageTag.HDAGGER:
        return e.is_literal
    if tag is LanguageTag.H:
        return e.is_atom and f.is_c_term
    if tag is LanguageTag.SDAGGER:
        return e.is_literal and f.is_literal
    return e.is_atom and f.is_literal  # S


def member_of(phi: Formula, tag: LanguageTag) -> bool:
    """True iff some representative of the class of ``phi`` has a shape of ``tag``."""
    return any(_shape_ok(tag, phi.quantifier, e, f) for e, f in representatives(phi))


# --- universes ----------------------------------------------------------------

def atoms_of(formulas: Iterable[Formula]) -> list:
    found = set()
    for phi in formulas:
        found.add(phi.subject.atom)
        found.add(phi.predicate.atom)
    return sorted(found)


def literals_over(atoms: Iterable[str]) -> list:
    return sorted(ETerm(Shape.LIT, Literal(a, pos)) for a in atoms for pos in (True, False))


def c_terms_over(atoms: Iterable[str]) -> list:
    atoms = list(atoms)
    out = literals_over(atoms)
    out += [ETerm(s, Literal(a, True)) for a in atoms for s in (Shape.ALL, Shape.NALL)]
    return sorted(out)


def e_terms_over(atoms: Iterable[str]) -> list:
    return sorted(ETerm(s, Literal(a, pos))
                  for a in atoms for pos in (True, False) for s in Shape)


def formulas_over(atoms: Iterable[str], tag: LanguageTag = LanguageTag.HSTARDAGGER) -> list:
    """All canonical formulas of ``tag`` over ``atoms``, sorted."""
    terms = e_terms_over(atoms)
    out = set()
    for q in Quantifier:
        for e, f in itertools.product(terms, repeat=2):
            phi = canonicalize(Formula(q, e, f))
            if member_of(phi, tag):
                out.add(phi)
    return sorted(out)


# --- parsing ----------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1, source: str = "<string>"):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


_TOKEN_RE = re.compile(r"\s*(?:(non-)|([A-Za-z_][A-Za-z0-9_]*)|([(),])|(\S))")


def _tokenize(text: str) -> Iterator[tuple]:
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1):
            yield ("non-", m.group(1), m.start(1))
        elif m.group(2):
            yield ("word", m.group(2), m.start(2))
        elif m.group(3):
            yield (m.group(3), m.group(3), m.start(3))
        elif m.group(4):
            yield ("bad", m.group(4), m.start(4))
        pos = m.end()
    yield ("end", "", len(text.rstrip()) if text.strip() else 0)


class _Parser:
    def __init__(self, text: str, line: int, source: str):
        self.text = text
        self.line = line
        self.source = source
        self.tokens = list(_tokenize(text))
        self.i = 0

    def error(self, msg: str, offset: int):
        raise ParseError(msg, self.line, offset + 1, self.source)

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind: str, what: str):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            self.error(f"expected {what}, found {found}", tok[2])
        self.i += 1
        return tok

    def atom_name(self) -> str:
        tok = self.peek()
        if tok[0] != "word":
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            self.error(f"expected an atom, found {found}", tok[2])
        name = tok[1]
        if name in RESERVED:
            self.error(f"reserved word {name!r} cannot be used as an atom", tok[2])
        if not _ATOM_RE.match(name):
            self.error(f"invalid atom name {name!r}", tok[2])
        self.i += 1
        return name

    def literal(self) -> Literal:
        if self.peek()[0] == "non-":
            self.i += 1
            return Literal(self.atom_name(), False)
        return Literal(self.atom_name(), True)

    def eterm(self) -> ETerm:
        tok = self.peek()
        if tok[0] == "word" and tok[1] in ("all", "nall"):
            self.i += 1
            shape = Shape.ALL if tok[1] == "all" else Shape.NALL
            return ETerm(shape, self.literal())
        return ETerm(Shape.LIT, self.literal())

    def formula(self) -> Formula:
        tok = self.peek()
        if tok[0] != "word" or tok[1] not in ("forall", "exists"):
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            self.error(f"expected 'forall' or 'exists', found {found}", tok[2])
        self.i += 1
        q = Quantifier.FORALL if tok[1] == "forall" else Quantifier.EXISTS
        self.take("(", "'('")
        e = self.eterm()
        self.take(",", "','")
        f = self.eterm()
        self.take(")", "')'")
        return Formula(q, e, f)

    def finish(self):
        tok = self.peek()
        if tok[0] != "end":
            self.error(f"unexpected {tok[1]!r} after formula", tok[2])


def parse_formula(text: str, *, line: int = 1, source: str = "<string>") -> Formula:
    """Parse one formula and return its canonical form."""
    p = _Parser(text, line, source)
    phi = p.formula()
    p.finish()
    return canonicalize(phi)


def parse_eterm(text: str) -> ETerm:
    p = _Parser(text, 1, "<string>")
    e = p.eterm()
    p.finish()
    return e


def parse_formulas(text: str, source: str = "<string>") -> list:
    """Parse a formula file: one formula per line, blank lines and ``#`` comments ignored."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        out.append(parse_formula(body, line=lineno, source=source))
    return out


def format_formulas(formulas: Iterable[Formula]) -> str:
    return "".join(f"{phi}\n" for phi in formulas)
