"""Hard instances: the Gamma-n family (direct derivation misses an entailment)
and the reduction from 3SAT to satisfiability of H-star-dagger / H-dagger sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .semantics import Structure
from .syntax import (Formula, all_of, atom, exists, forall, neg, not_all_of)

__all__ = [
    "GammaInstance",
    "gamma_family",
    "gamma_minus",
    "gamma_witnesses",
    "gamma_separating_structures",
    "ThreeSatInstance",
    "Encoding",
    "encode_3sat",
    "gadget_model",
    "GADGET_TABLE",
    "letter_gadget",
    "satisfying_model",
    "parse_dimacs",
    "truth_table_satisfiable",
    "satisfying_assignment",
]


def _p(i: int) -> str:
    return f"p{i}"


@dataclass(frozen=True)
class GammaInstance:
    n: int
    premises: tuple
    goal: Formula

    @property
    def atoms(self) -> list:
        return [_p(i) for i in range(1, self.n + 1)]


def gamma_family(n: int) -> GammaInstance:
    """Premises: each p_i is distinct from some p_(i+1); p1 and pn are each
    identical to every member of the other; the reflexive universals; and
    no p1 is a p_(n-1). Goal: every p1 is a pn."""
    if n < 3:
        raise ValueError("the family is defined for n >= 3")
    prem = [forall(atom(_p(i)), not_all_of(_p(i + 1))) for i in range(1, n)]
    prem.append(forall(atom(_p(1)), all_of(_p(n))))
    prem.append(forall(atom(_p(n)), all_of(_p(1))))
    prem += [forall(atom(_p(i)), atom(_p(i))) for i in range(1, n + 1)]
    prem.append(forall(atom(_p(1)), neg(_p(n - 1))))
    return GammaInstance(n, tuple(prem), forall(atom(_p(1)), atom(_p(n))))


def gamma_minus(n: int, h: int) -> tuple:
    """The family with the link between p_h and p_(h+1) removed."""
    if not 1 <= h <= n - 2:
        raise ValueError("need 1 <= h <= n-2")
    drop = forall(atom(_p(h)), not_all_of(_p(h + 1)))
    return tuple(phi for phi in gamma_family(n).premises if phi is not drop)


def _structure(size: int, ext: dict) -> Structure:
    return Structure(size, ext)


def _chain(n: int) -> dict:
    # the chain structure over a1..a_(n-1) (element a_k is index k-1): p_k = {a_k}, p_n = {a1}
    ext = {_p(k): [k - 1] for k in range(1, n)}
    ext[_p(n)] = [0]
    return ext


def gamma_witnesses(n: int, h: int) -> dict:
    """The named structures separating the reduced family from the goal.

    ``A``: the chain; ``C``: the prefix a1..ah; ``D``: the suffix a_(h+1)..a_n;
    ``2C`` and ``2D``: two disjoint copies of each.
    """
    if n < 3 or not 1 <= h <= n - 2:
        raise ValueError("need n >= 3 and 1 <= h <= n-2")
    a = _structure(n - 1, _chain(n))
    c = _structure(h, {_p(k): [k - 1] for k in range(1, h + 1)})
    d = _structure(n - h, {_p(k): [k - h - 1] for k in range(h + 1, n + 1)})
    return {"A": a, "C": c, "D": d, "2C": c.doubled(), "2D": d.doubled()}


def gamma_separating_structures(n: int, h: int) -> dict:
    """All structures used to show that nothing outside the family follows from
    the reduced family: the basic witnesses plus the one-point variations."""
    out = dict(gamma_witnesses(n, h))
    for i in range(1, n):
        for j in range(i + 1, n):
            if (1 <= i < j <= n - 2) or (2 <= i < j <= n - 1):
                ext = _chain(n)  # a_i also realizes p_j
                ext[_p(j)] = [i - 1, j - 1]
                out[f"A_{i},{j}"] = _structure(n - 1, ext)
    for i in range(2, n - 1):
        ext = _chain(n)
        ext[_p(i)] = [0, i - 1]
        out[f"A_{i}"] = _structure(n - 1, ext)
    dext = {_p(k): [k - h - 1] for k in range(h + 1, n + 1)}
    dext[_p(n)] = sorted({n - h - 2, n - h - 1})
    out["D'"] = _structure(n - h, dext)
    for i in range(1, h + 1):
        for j in range(1, h + 1):
            if j != i + 1:
                ext = {_p(k): [k - 1] for k in range(1, h + 1)}
                ext[_p(i)] = sorted({i - 1, j - 1})
                out[f"C_{i},{j}"] = _structure(h, ext)
    for i in range(h + 1, n + 1):
        for j in range(h + 1, n + 1):
            if j != i + 1:
                ext = {_p(k): [k - h - 1] for k in range(h + 1, n + 1)}
                ext[_p(i)] = sorted({i - h - 1, j - h - 1})
                out[f"D_{i},{j}"] = _structure(n - h, ext)
    return out


# --- 3SAT -------------------------------------------------------------------

@dataclass(frozen=True)
class ThreeSatInstance:
    """Clauses are triples of non-zero signed variable indices (repeats allowed)."""

    variable_count: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple(c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for c in clauses:
            if len(c) != 3:
                raise ValueError(f"clause {c} does not have exactly 3 literals")
            for v in c:
                if v == 0 or abs(v) > self.variable_count:
                    raise ValueError(f"literal {v} out of range")

    @property
    def letters(self) -> list:
        """Variables that occur in some clause, ascending."""
        return sorted({abs(v) for c in self.clauses for v in c})


def truth_table_satisfiable(inst: ThreeSatInstance) -> bool:
    return satisfying_assignment(inst) is not None


def satisfying_assignment(inst: ThreeSatInstance) -> Optional[dict]:
    letters = inst.letters
    for bits in range(1 << len(letters)):
        val = {v: bool(bits >> i & 1) for i, v in enumerate(letters)}
        if all(any(val[abs(x)] == (x > 0) for x in c) for c in inst.clauses):
            return val
    return None


def _letter(v: int) -> str:
    return f"x{v}"


@dataclass
class Encoding:
    star_dagger: list
    dagger: list
    model_bound: int
    letter_atoms: dict = field(default_factory=dict)
    clause_atoms: list = field(default_factory=list)


def _names(inst: ThreeSatInstance, reserved: Iterable[str]):
    letters = {v: (f"{_letter(v)}_t", f"{_letter(v)}_f", f"q_{_letter(v)}") for v in inst.letters}
    clauses = [([f"s_{i}_{k}" for k in range(1, 5)], [f"p_{i}_{k}" for k in range(1, 4)])
               for i in range(1, len(inst.clauses) + 1)]
    used = [a for t in letters.values() for a in t]
    used += [a for s, p in clauses for a in s + p]
    clash = set(used) & set(reserved)
    if clash:
        raise ValueError(f"fresh atom names collide with {sorted(clash)}")
    return letters, clauses


def letter_formulas(t: str, f: str) -> list:
    return [forall(all_of(t), not_all_of(f)), forall(atom(t), all_of(f)), forall(atom(t), neg(f))]


def clause_formulas(s: Sequence[str], p: Sequence[str]) -> list:
    return [forall(atom(s[0]), all_of(p[0])), forall(atom(p[0]), atom(s[1])),
            forall(atom(s[1]), all_of(p[1])), forall(atom(p[1]), atom(s[2])),
            forall(atom(s[2]), all_of(p[2])), forall(atom(p[2]), atom(s[3])),
            exists(atom(s[0]), neg(s[3]))]


def encode_3sat(inst: ThreeSatInstance, reserved: Iterable[str] = ()) -> Encoding:
    """Formulas satisfiable iff the instance is.

    Each letter gets atoms for "true" and "false" (emptiness of the first means
    the letter is true); each clause gets a chain gadget that forces some
    p_k to be empty, and that emptiness is tied to the letter of slot k.
    The dagger variant splits the one formula per letter that is outside
    H-dagger into two, using a fresh atom.
    """
    letters, clauses = _names(inst, reserved)
    star, dagger = [], []
    for v in inst.letters:
        t, f, q = letters[v]
        phi = letter_formulas(t, f)
        star += phi
        dagger += [forall(atom(q), not_all_of(f)), forall(neg(q), not_all_of(t))] + phi[1:]
    for (s, p), clause in zip(clauses, inst.clauses):
        block = clause_formulas(s, p)
        for k, lit in enumerate(clause):
            t, f, _ = letters[abs(lit)]
            block.append(forall(atom(t if lit > 0 else f), not_all_of(p[k])))
        star += block
        dagger += block
    return Encoding(star, dagger, 2 * (len(inst.letters) + len(inst.clauses)),
                    {v: letters[v] for v in inst.letters}, clauses)


# atoms satisfied by the two elements a, b of the clause gadget, by the set K of
# slots whose p-atom is empty: ("s1", ...) on a, then on b
GADGET_TABLE = {
    frozenset({1}): (("s1",), ("p2", "p3", "s3", "s4")),
    frozenset({2}): (("p1", "s1", "s2"), ("p3", "s4")),
    frozenset({3}): (("p1", "p2", "s1", "s2", "s3"), ()),
    frozenset({2, 3}): (("p1", "s1", "s2"), ()),
    frozenset({1, 3}): (("p2", "s1", "s3"), ()),
    frozenset({1, 2}): (("s1",), ("p3", "s4")),
    frozenset({1, 2, 3}): (("s1",), ()),
}


def gadget_model(K: Iterable[int], s: Sequence[str] = ("s1", "s2", "s3", "s4"),
                 p: Sequence[str] = ("p1", "p2", "p3")) -> Structure:
    """The 2-element clause gadget in which exactly the p_k with k in K are empty."""
    K = frozenset(K)
    if not K:
        raise ValueError("K must be non-empty")
    if not K <= {1, 2, 3}:
        raise ValueError("K must be a subset of {1, 2, 3}")
    rename = {f"s{k}": s[k - 1] for k in range(1, 5)}
    rename.update({f"p{k}": p[k - 1] for k in range(1, 4)})
    on_a, on_b = GADGET_TABLE[K]
    ext = {}
    for name in on_a:
        ext.setdefault(rename[name], []).append(0)
    for name in on_b:
        ext.setdefault(rename[name], []).append(1)
    return Structure(2, ext)


def letter_gadget(value: bool, t: str = "t", f: str = "f") -> Structure:
    """2-element letter gadget: true means the t-atom is empty and the f-atom full."""
    return Structure(2, {f: [0, 1]} if value else {t: [0, 1]})


def satisfying_model(inst: ThreeSatInstance, assignment: dict, dagger: bool = False) -> Structure:
    """The disjoint union of letter and clause gadgets for a satisfying assignment."""
    enc = encode_3sat(inst)
    model = None
    for v in inst.letters:
        t, f, _ = enc.letter_atoms[v]
        g = letter_gadget(assignment[v], t, f)
        model = g if model is None else model.disjoint_union(g)
    for (s, p), clause in zip(enc.clause_atoms, inst.clauses):
        K = {k + 1 for k, lit in enumerate(clause) if assignment[abs(lit)] == (lit > 0)}
        g = gadget_model(K, s, p)
        model = g if model is None else model.disjoint_union(g)
    if dagger:
        masks = {a: model.mask(a) for a in model.atoms}
        for v in inst.letters:
            if assignment[v]:
                masks[enc.letter_atoms[v][2]] = model.full
        model = Structure.from_masks(model.size, masks)
    return model


def parse_dimacs(text: str) -> ThreeSatInstance:
    """Read DIMACS CNF. Clauses shorter than 3 are padded by repeating their
    last literal; longer or empty clauses are rejected."""
    header = None
    clauses = []
    current: list = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad header {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise ValueError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                v = int(tok)
            except ValueError:
                raise ValueError(f"line {lineno}: bad literal {tok!r}") from None
            if v == 0:
                if not current:
                    raise ValueError(f"line {lineno}: empty clause")
                if len(current) > 3:
                    raise ValueError(f"line {lineno}: clause with {len(current)} literals")
                while len(current) < 3:
                    current.append(current[-1])
                clauses.append(tuple(current))
                current = []
            else:
                if abs(v) > header[0]:
                    raise ValueError(f"line {lineno}: variable {abs(v)} exceeds header")
                current.append(v)
    if header is None:
        raise ValueError("missing 'p cnf' header")
    if current:
        raise ValueError("last clause not terminated by 0")
    return ThreeSatInstance(header[0], tuple(clauses))
