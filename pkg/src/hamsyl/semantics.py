"""Finite structures, satisfaction, and a bounded brute-force oracle.

Extensions are stored as bitmasks over the domain ``0..n-1`` so that
evaluating an e-term is a handful of integer operations.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .syntax import ETerm, Formula, Quantifier, Shape, atoms_of, negate

__all__ = [
    "Structure",
    "OracleConfig",
    "EntailmentResult",
    "eval_eterm",
    "satisfies",
    "bounded_model_search",
    "bounded_entails",
    "all_structures",
]


def _bits(mask: int) -> list:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _term_mask(kind: int, m: int, full: int) -> int:
    """Extension of an e-term given the mask of its atom; ``kind`` as in ``ETerm.kind``."""
    if kind & 1:
        m = full ^ m
    if kind < 2:
        return m
    if m == 0:
        v = full
    elif m & (m - 1) == 0:
        v = m
    else:
        v = 0
    return v if kind < 4 else full ^ v


class Structure:
    """A finite structure: domain ``0..n-1`` and an extension for each atom.

    Atoms missing from ``extensions`` have empty extension.
    """

    __slots__ = ("size", "_masks")

    def __init__(self, size: int, extensions: Mapping[str, Iterable[int]] | None = None):
        if size < 1:
            raise ValueError("domain must be non-empty")
        self._init(size, extensions or {})

    def _init(self, size, extensions):
        masks = {}
        for a, elems in extensions.items():
            m = 0
            for x in elems:
                if not 0 <= x < size:
                    raise ValueError(f"element {x} outside domain of size {size}")
                m |= 1 << x
            if m:
                masks[a] = m
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "_masks", masks)

    def __setattr__(self, name, value):
        raise AttributeError("Structure is immutable")

    def __reduce__(self):
        return (_rebuild, (self.size, dict(self._masks)))

    @classmethod
    def from_masks(cls, size: int, masks: Mapping[str, int]) -> "Structure":
        self = object.__new__(cls)
        if size < 1:
            raise ValueError("domain must be non-empty")
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "_masks", {a: m for a, m in masks.items() if m})
        return self

    @classmethod
    def empty(cls) -> "Structure":
        """The structure with empty domain. Only meaningful for checking rules
        that rely on non-empty domains; everything else rejects it."""
        self = object.__new__(cls)
        object.__setattr__(self, "size", 0)
        object.__setattr__(self, "_masks", {})
        return self

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    @property
    def domain(self) -> range:
        return range(self.size)

    def mask(self, atom: str) -> int:
        return self._masks.get(atom, 0)

    def extension(self, atom: str) -> frozenset:
        return frozenset(_bits(self._masks.get(atom, 0)))

    @property
    def atoms(self) -> list:
        return sorted(self._masks)

    def eval_mask(self, e: ETerm) -> int:
        return _term_mask(e.kind, self._masks.get(e.literal.atom, 0), self.full)

    def eval(self, e: ETerm) -> frozenset:
        return frozenset(_bits(self.eval_mask(e)))

    def satisfies(self, phi: Formula) -> bool:
        full = self.full
        e = _term_mask(phi.subject.kind, self._masks.get(phi.subject.literal.atom, 0), full)
        f = _term_mask(phi.predicate.kind, self._masks.get(phi.predicate.literal.atom, 0), full)
        if phi.quantifier is Quantifier.FORALL:
            return e & ~f == 0
        return e & f != 0

    def models(self, formulas: Iterable[Formula]) -> bool:
        return all(self.satisfies(phi) for phi in formulas)

    def failures(self, formulas: Iterable[Formula]) -> list:
        return [phi for phi in formulas if not self.satisfies(phi)]

    def disjoint_union(self, other: "Structure") -> "Structure":
        """Elements of ``other`` are shifted up by ``self.size``."""
        masks = dict(self._masks)
        for a, m in other._masks.items():
            masks[a] = masks.get(a, 0) | (m << self.size)
        return Structure.from_masks(self.size + other.size, masks)

    def doubled(self) -> "Structure":
        return self.disjoint_union(self)

    def restrict_atoms(self, atoms: Iterable[str]) -> "Structure":
        keep = set(atoms)
        return Structure.from_masks(self.size, {a: m for a, m in self._masks.items() if a in keep})

    def __eq__(self, other):
        return (isinstance(other, Structure) and self.size == other.size
                and self._masks == other._masks)

    def __hash__(self):
        return hash((self.size, frozenset(self._masks.items())))

    def __repr__(self):
        parts = ", ".join(f"{a}={set(_bits(m))}" for a, m in sorted(self._masks.items()))
        return f"Structure({self.size}; {parts})"

    # text format: "domain: n" then one "atom: i j k" line per atom
    def to_text(self, atoms: Iterable[str] | None = None) -> str:
        names = sorted(set(self._masks) | set(atoms or ()))
        lines = [f"domain: {self.size}"]
        for a in names:
            elems = " ".join(str(i) for i in _bits(self._masks.get(a, 0)))
            lines.append(f"{a}: {elems}".rstrip())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Structure":
        size = None
        ext = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            name, sep, rest = line.partition(":")
            if not sep:
                raise ValueError(f"line {lineno}: expected 'name: ...'")
            name = name.strip()
            if size is None:
                if name != "domain":
                    raise ValueError(f"line {lineno}: structure must start with 'domain: n'")
                size = int(rest)
                continue
            if name in ext:
                raise ValueError(f"line {lineno}: duplicate atom {name!r}")
            ext[name] = [int(tok) for tok in rest.split()]
        if size is None:
            raise ValueError("missing 'domain: n' line")
        return cls(size, ext)


def _rebuild(size: int, masks: dict) -> Structure:
    self = object.__new__(Structure)
    object.__setattr__(self, "size", size)
    object.__setattr__(self, "_masks", masks)
    return self


def eval_eterm(e: ETerm, structure: Structure) -> frozenset:
    return structure.eval(e)


def satisfies(structure: Structure, phi: Formula) -> bool:
    return structure.satisfies(phi)


def all_structures(atoms: Sequence[str], size: int):
    """Every structure over ``atoms`` with the given domain size (raw, no symmetry reduction)."""
    atoms = list(atoms)
    for masks in itertools.product(range(1 << size), repeat=len(atoms)):
        yield Structure.from_masks(size, dict(zip(atoms, masks)))


# --- oracle ----------------------------------------------------------------

@dataclass(frozen=True)
class OracleConfig:
    """Bounded search settings.

    ``method`` is ``"enumerate"`` (raw enumeration with pruning), ``"sat"``
    (CNF encoding handed to a SAT solver) or ``"auto"`` (enumerate when the
    raw space per size is small).
    """

    max_domain_size: Optional[int] = None
    atom_universe: Optional[tuple] = None
    method: str = "auto"
    jobs: int = 1
    min_domain_size: int = 1

    def __post_init__(self):
        if self.max_domain_size is not None and self.max_domain_size < 1:
            raise ValueError("max_domain_size must be at least 1")
        if self.method not in ("auto", "enumerate", "sat"):
            raise ValueError(f"unknown oracle method {self.method!r}")

    def bound_for(self, formulas: Iterable[Formula]) -> int:
        if self.max_domain_size is not None:
            return self.max_domain_size
        return len(atoms_of(formulas)) + 2


_ENUM_LIMIT_BITS = 18


def _compile(formulas):
    return [(phi.quantifier is Quantifier.FORALL, phi.subject.kind, phi.subject.literal.atom,
             phi.predicate.kind, phi.predicate.literal.atom) for phi in formulas]


def _holds(c, masks, full) -> bool:
    univ, sk, sa, pk, pa = c
    e = _term_mask(sk, masks[sa], full)
    f = _term_mask(pk, masks[pa], full)
    return (e & ~f == 0) if univ else (e & f != 0)


def _atom_order(formulas, atoms):
    """Greedy order: next atom completes the most formulas (ties lexicographic)."""
    remaining = list(atoms)
    order = []
    chosen = set()
    pending = [phi.atoms for phi in formulas]
    while remaining:
        def score(a):
            touching = [s for s in pending if a in s]
            return (sum(1 for s in touching if s <= chosen | {a}), len(touching),
                    [-ord(ch) for ch in a])
        best = max(remaining, key=score)
        order.append(best)
        chosen.add(best)
        remaining.remove(best)
    return order


def _enumerate_size(formulas, atoms, size, first_values=None):
    """DFS over atom extensions for one domain size; returns masks or None."""
    full = (1 << size) - 1
    order = _atom_order(formulas, atoms)
    compiled = _compile(formulas)
    pos = {a: i for i, a in enumerate(order)}
    checks = [[] for _ in order]
    for phi, c in zip(formulas, compiled):
        checks[max(pos[a] for a in phi.atoms)].append(c)
    masks = {}
    k = len(order)
    values = range(1 << size)

    def dfs(d):
        if d == k:
            return True
        a = order[d]
        cs = checks[d]
        vals = first_values if (d == 0 and first_values is not None) else values
        for m in vals:
            masks[a] = m
            if all(_holds(c, masks, full) for c in cs) and dfs(d + 1):
                return True
        del masks[a]
        return False

    if k == 0:
        return {}
    return dict(masks) if dfs(0) else None


def _enumerate_chunk(args):
    formulas, atoms, size, lo, hi = args
    return _enumerate_size(formulas, atoms, size, range(lo, hi))


class _CNF:
    def __init__(self):
        self.nv = 0
        self.clauses = []

    def var(self):
        self.nv += 1
        return self.nv


def _sat_size(formulas, atoms, size):
    """Encode 'some structure of this size satisfies all formulas' as CNF."""
    from pysat.solvers import Solver

    cnf = _CNF()
    x = {a: [cnf.var() for _ in range(size)] for a in atoms}
    all_cache = {}

    def lit_at(e: ETerm, i: int) -> int:
        v = x[e.literal.atom][i]
        return v if e.literal.positive else -v

    def all_at(e: ETerm, i: int) -> int:
        # variable true iff no element other than i falls under the literal of e
        key = (e.literal, i)
        t = all_cache.get(key)
        if t is None:
            t = cnf.var()
            others = [lit_at(ETerm(Shape.LIT, e.literal), j) for j in range(size) if j != i]
            for o in others:
                cnf.clauses.append([-t, -o])
            cnf.clauses.append([t] + others)
            all_cache[key] = t
        return t

    def member(e: ETerm, i: int) -> int:
        if e.shape is Shape.LIT:
            return lit_at(e, i)
        t = all_at(e, i)
        return t if e.shape is Shape.ALL else -t

    for phi in formulas:
        e, f = phi.subject, phi.predicate
        if phi.quantifier is Quantifier.FORALL:
            for i in range(size):
                cnf.clauses.append([-member(e, i), member(f, i)])
        else:
            zs = []
            for i in range(size):
                z = cnf.var()
                cnf.clauses.append([-z, member(e, i)])
                cnf.clauses.append([-z, member(f, i)])
                zs.append(z)
            cnf.clauses.append(zs)
    with Solver(name="cadical153", bootstrap_with=cnf.clauses) as s:
        if not s.solve():
            return None
        model = set(v for v in s.get_model() if v > 0)
    return {a: sum(1 << i for i, v in enumerate(vs) if v in model) for a, vs in x.items()}


def _search_size(formulas, atoms, size, method, jobs):
    if method == "auto":
        method = "enumerate" if size * len(atoms) <= _ENUM_LIMIT_BITS else "sat"
    if method == "sat":
        return _sat_size(formulas, atoms, size)
    if jobs > 1 and atoms and (1 << size) >= jobs:
        span = 1 << size
        cuts = [span * i // jobs for i in range(jobs + 1)]
        tasks = [(formulas, atoms, size, cuts[i], cuts[i + 1]) for i in range(jobs)]
        # chunks partition the first atom's values; an ordered scan keeps the result
        # identical to the serial one
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for res in pool.map(_enumerate_chunk, tasks):
                if res is not None:
                    return res
        return None
    return _enumerate_size(formulas, atoms, size)


def bounded_model_search(formulas: Iterable[Formula],
                         cfg: OracleConfig | None = None) -> Optional[Structure]:
    """A model of minimum domain size up to the bound, or None if there is none up to it.

    None is a statement about the bound only, not unsatisfiability.
    """
    cfg = cfg or OracleConfig()
    formulas = sorted(set(formulas))
    atoms = atoms_of(formulas)
    if cfg.atom_universe is not None:
        missing = set(atoms) - set(cfg.atom_universe)
        if missing:
            raise ValueError(f"atom universe does not cover {sorted(missing)}")
    bound = cfg.bound_for(formulas)
    for size in range(cfg.min_domain_size, bound + 1):
        masks = _search_size(formulas, atoms, size, cfg.method, cfg.jobs)
        if masks is not None:
            st = Structure.from_masks(size, masks)
            assert st.models(formulas)
            return st
    return None


@dataclass(frozen=True)
class EntailmentResult:
    """Outcome of a bounded entailment check; ``counter_model`` None means
    no counter-model exists up to ``bound`` (evidence, not proof)."""

    bound: int
    counter_model: Optional[Structure] = None

    @property
    def refuted(self) -> bool:
        return self.counter_model is not None

    @property
    def no_counter_model_up_to_bound(self) -> bool:
        return self.counter_model is None


def bounded_entails(formulas: Iterable[Formula], goal: Formula,
                    cfg: OracleConfig | None = None) -> EntailmentResult:
    cfg = cfg or OracleConfig()
    formulas = list(formulas)
    query = formulas + [negate(goal)]
    bound = cfg.bound_for(query)
    model = bounded_model_search(query, OracleConfig(bound, cfg.atom_universe, cfg.method,
                                                     cfg.jobs, cfg.min_domain_size))
    return EntailmentResult(bound, model)
