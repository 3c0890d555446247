"""Finite relational structures and the fixpoint-iteration evaluator.

``evaluate`` is the semantic reference for the rest of the package: it is a
direct reading of the semantics with naive Knaster-Tarski iteration and no
cleverness beyond memoising closed fixpoint relations inside one call.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Iterator, Mapping

from .logic import (
    Conj, Disj, ExistsGuarded, FixVarAtom, ForallGuarded, Formula, Gfp, Lfp,
    Neg, RelAtom, Signature, TruthConst, free_fixvars, free_vars,
)


class StructureError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


Fact = tuple[str, tuple[str, ...]]


@dataclass(frozen=True)
class Structure:
    sig: Signature
    universe: tuple[str, ...]
    tables: Mapping[str, frozenset[tuple[str, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.universe)) != len(self.universe):
            raise StructureError("duplicate element in universe")
        elems = set(self.universe)
        tables = {}
        for rel in self.sig.names():
            rows = frozenset(tuple(t) for t in self.tables.get(rel, ()))
            for t in rows:
                if len(t) != self.sig.arity(rel):
                    raise StructureError(f"arity mismatch in {rel}{t}")
                if not set(t) <= elems:
                    raise StructureError(f"{rel}{t} uses an element outside the universe")
            tables[rel] = rows
        for rel in self.tables:
            if rel not in self.sig:
                raise StructureError(f"unknown relation {rel}")
        object.__setattr__(self, "tables", tables)

    def __hash__(self):
        return hash((self.sig, self.universe, frozenset(self.facts())))

    def facts(self) -> list[Fact]:
        return sorted((rel, t) for rel, rows in self.tables.items() for t in rows)

    def holds(self, rel: str, args: tuple[str, ...]) -> bool:
        return args in self.tables[rel]

    def rename(self, mapping: Mapping[str, str]) -> "Structure":
        tables = {rel: {tuple(mapping[a] for a in t) for t in rows}
                  for rel, rows in self.tables.items()}
        return Structure(self.sig, tuple(mapping[a] for a in self.universe), tables)

    def to_text(self) -> str:
        lines = [f"sig {rel} {self.sig.arity(rel)}" for rel in self.sig.names()]
        lines += [f"elem {a}" for a in self.universe]
        lines += [f"atom {rel} {' '.join(t)}" for rel, t in self.facts()]
        return "\n".join(lines) + "\n"

    def __str__(self):
        atoms = ", ".join(f"{rel}({','.join(t)})" for rel, t in self.facts())
        return f"{{{', '.join(self.universe)} | {atoms}}}"


def make_structure(facts, universe=None, sig: Signature | None = None) -> Structure:
    """Build a structure from (rel, args) facts; convenience for tests and corpora."""
    facts = [(rel, tuple(args)) for rel, args in facts]
    if sig is None:
        sig = Signature({rel: len(args) for rel, args in facts})
    if universe is None:
        seen: dict[str, None] = {}
        for _, args in facts:
            for a in args:
                seen.setdefault(a, None)
        universe = tuple(seen)
    tables: dict[str, set] = {rel: set() for rel in sig.names()}
    for rel, args in facts:
        tables.setdefault(rel, set()).add(args)
    return Structure(sig, tuple(universe), tables)


def parse_structure(text: str) -> Structure:
    """Parse the line-oriented format (``sig``, ``elem``, ``atom``; ``;`` also separates)."""
    rels: dict[str, int] = {}
    universe: list[str] = []
    tables: dict[str, set] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        for stmt in raw.split("#", 1)[0].split(";"):
            parts = stmt.split()
            if not parts:
                continue
            kw, rest = parts[0], parts[1:]
            if kw == "sig":
                if len(rest) != 2 or not rest[1].isdigit() or int(rest[1]) < 1:
                    raise StructureError("expected 'sig NAME ARITY'", lineno)
                rels[rest[0]] = int(rest[1])
                tables.setdefault(rest[0], set())
            elif kw == "elem":
                if not rest:
                    raise StructureError("expected 'elem NAME'", lineno)
                for name in rest:
                    if name in universe:
                        raise StructureError(f"element {name} declared twice", lineno)
                    universe.append(name)
            elif kw == "atom":
                if not rest:
                    raise StructureError("expected 'atom REL e1 ...'", lineno)
                rel, args = rest[0], tuple(rest[1:])
                if rel not in rels:
                    raise StructureError(f"unknown relation {rel}", lineno)
                if len(args) != rels[rel]:
                    raise StructureError(
                        f"arity mismatch: {rel} has arity {rels[rel]}, got {len(args)}", lineno)
                for a in args:
                    if a not in universe:
                        raise StructureError(f"element {a} used before declaration", lineno)
                tables[rel].add(args)
            else:
                raise StructureError(f"unknown statement {kw!r}", lineno)
    if not universe:
        raise StructureError("empty universe")
    return Structure(Signature(rels), tuple(universe), tables)


# -- guarded sets and atomic types ------------------------------------------

def guarded_sets(s: Structure) -> set[frozenset[str]]:
    """Non-empty subsets of the component sets of single atoms."""
    out: set[frozenset[str]] = set()
    for _, args in s.facts():
        comps = sorted(set(args))
        for r in range(1, len(comps) + 1):
            out.update(frozenset(c) for c in combinations(comps, r))
    return out


def maximal_guarded_sets(s: Structure) -> set[frozenset[str]]:
    sets = guarded_sets(s)
    return {g for g in sets if not any(g < h for h in sets)}


def is_guarded(s: Structure, elems) -> bool:
    elems = frozenset(elems)
    return any(elems <= set(args) for _, args in s.facts())


@dataclass(frozen=True)
class AtomicType:
    """Positive atoms over a carrier; facts refer to carrier positions."""
    carrier: tuple[str, ...]
    facts: frozenset[tuple[str, tuple[int, ...]]]

    def __post_init__(self):
        if len(set(self.carrier)) != len(self.carrier):
            raise StructureError("duplicate element in carrier")
        for rel, pos in self.facts:
            if any(not 0 <= p < len(self.carrier) for p in pos):
                raise StructureError(f"fact {rel}{pos} outside the carrier")

    def named_facts(self) -> frozenset[Fact]:
        return frozenset((rel, tuple(self.carrier[p] for p in pos)) for rel, pos in self.facts)

    def rename(self, mapping: Mapping[str, str]) -> "AtomicType":
        return AtomicType(tuple(mapping[c] for c in self.carrier), self.facts)

    def restrict(self, names) -> frozenset[Fact]:
        """Named facts whose components all lie in ``names``."""
        names = set(names)
        return frozenset(f for f in self.named_facts() if set(f[1]) <= names)

    def same_facts(self, other: "AtomicType") -> bool:
        return len(self.carrier) == len(other.carrier) and self.facts == other.facts

    @classmethod
    def from_named(cls, carrier, facts) -> "AtomicType":
        carrier = tuple(carrier)
        where = {c: i for i, c in enumerate(carrier)}
        return cls(carrier, frozenset((rel, tuple(where[a] for a in args)) for rel, args in facts))


def atomic_type(s: Structure, carrier) -> AtomicType:
    carrier = tuple(carrier)
    if len(set(carrier)) != len(carrier):
        raise StructureError("duplicate element in carrier")
    inside = set(carrier)
    missing = inside - set(s.universe)
    if missing:
        raise StructureError(f"elements {sorted(missing)} not in the universe")
    facts = [(rel, t) for rel, t in s.facts() if set(t) <= inside]
    return AtomicType.from_named(carrier, facts)


def normalize_width(s: Structure, n: int) -> Structure:
    """Drop atoms with more than n distinct components."""
    tables = {rel: {t for t in rows if len(set(t)) <= n} for rel, rows in s.tables.items()}
    return Structure(s.sig, s.universe, tables)


def disjoint_union(a: Structure, b: Structure, tags=("0", "1")) -> tuple[Structure, dict, dict]:
    """A ⊎ B with elements renamed; returns the union and both embeddings."""
    left = {x: f"{x}.{tags[0]}" for x in a.universe}
    right = {x: f"{x}.{tags[1]}" for x in b.universe}
    rels = dict(a.sig.relations)
    rels.update(b.sig.relations)
    tables = {rel: set() for rel in rels}
    for rel, t in a.facts():
        tables[rel].add(tuple(left[x] for x in t))
    for rel, t in b.facts():
        tables[rel].add(tuple(right[x] for x in t))
    universe = tuple(left.values()) + tuple(right.values())
    return Structure(Signature(rels), universe, tables), left, right


# -- evaluation --------------------------------------------------------------

class EvaluationError(ValueError):
    pass


def evaluate(s: Structure, f: Formula, valuation: Mapping[str, str] | None = None) -> bool:
    """Truth of f in s under ``valuation`` (variables to elements)."""
    valuation = dict(valuation or {})
    missing = free_vars(f) - set(valuation)
    if missing:
        raise EvaluationError(f"incomplete valuation, missing {sorted(missing)}")
    return Evaluator(s).holds(f, valuation, {})


class Evaluator:
    """Evaluator that keeps fixpoint relations between calls on one structure."""

    def __init__(self, s: Structure):
        self.s = s
        self.cache: dict = {}
        self._free: dict = {}

    def truth(self, f: Formula, valuation: Mapping[str, str]) -> bool:
        return self.holds(f, dict(valuation), {})

    def holds(self, f, val, env) -> bool:
        if isinstance(f, RelAtom):
            return tuple(val[x] for x in f.args) in self.s.tables[f.rel]
        if isinstance(f, FixVarAtom):
            return tuple(val[x] for x in f.args) in env[f.var]
        if isinstance(f, TruthConst):
            return f.value
        if isinstance(f, Neg):
            return not self.holds(f.arg, val, env)
        if isinstance(f, Conj):
            return self.holds(f.left, val, env) and self.holds(f.right, val, env)
        if isinstance(f, Disj):
            return self.holds(f.left, val, env) or self.holds(f.right, val, env)
        if isinstance(f, (ExistsGuarded, ForallGuarded)):
            want = isinstance(f, ExistsGuarded)
            for inner in self._guard_instances(f, val, env):
                if self.holds(f.body, inner, env) == want:
                    return want
            return not want
        if isinstance(f, (Lfp, Gfp)):
            rel = self.fixpoint(f, val, env)
            return tuple(val[x] for x in f.args) in rel
        raise TypeError(f"not a formula: {f!r}")

    def _guard_instances(self, f, val, env):
        guard = f.guard
        bound = set(f.vars)
        rows = self.s.tables[guard.rel] if isinstance(guard, RelAtom) else env[guard.var]
        for row in rows:
            inner = {x: a for x, a in val.items() if x not in bound}
            fresh: dict[str, str] = {}
            for x, a in zip(guard.args, row):
                if x in bound:
                    if fresh.setdefault(x, a) != a:
                        break
                elif val[x] != a:
                    break
            else:
                inner.update(fresh)
                yield inner

    def fixpoint(self, f, val, env) -> frozenset:
        params = f.params
        info = self._free.get(id(f))
        if info is None:
            # f is stored too, so its id cannot be recycled while cached
            info = self._free[id(f)] = (f, sorted(free_vars(f.body) - set(params)),
                                       sorted(free_fixvars(f.body)))
        outer = {x: val[x] for x in info[1]}
        key = (id(f), tuple(outer.items()), tuple((z, env[z]) for z in info[2] if z in env))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        space = [tuple(t) for t in product(self.s.universe, repeat=len(params))]
        current = frozenset() if isinstance(f, Lfp) else frozenset(space)
        while True:
            inner_env = dict(env)
            inner_env[f.var] = current
            nxt = frozenset(t for t in space
                            if self.holds(f.body, {**outer, **dict(zip(params, t))}, inner_env))
            if nxt == current:
                break
            current = nxt
        self.cache[key] = current
        return current



# -- enumeration -------------------------------------------------------------

def possible_atoms(sig: Signature, universe) -> list[Fact]:
    return [(rel, tuple(t)) for rel in sig.names()
            for t in product(universe, repeat=sig.arity(rel))]


def _perm_tables(atoms: list[Fact], universe: tuple[str, ...]):
    """For each universe permutation, byte lookup tables mapping atom bitmasks."""
    index = {a: i for i, a in enumerate(atoms)}
    nbytes = (len(atoms) + 7) // 8
    tables = []
    for perm in permutations(range(len(universe))):
        ren = {universe[i]: universe[perm[i]] for i in range(len(universe))}
        img = [index[(rel, tuple(ren[x] for x in t))] for rel, t in atoms]
        per_byte = []
        for b in range(nbytes):
            row = []
            for value in range(256):
                out = 0
                for bit in range(8):
                    if value >> bit & 1 and 8 * b + bit < len(atoms):
                        out |= 1 << img[8 * b + bit]
                row.append(out)
            per_byte.append(row)
        tables.append(per_byte)
    return tables


def _apply(per_byte, mask: int) -> int:
    out = 0
    b = 0
    while mask:
        out |= per_byte[b][mask & 0xFF]
        mask >>= 8
        b += 1
    return out


def enumerate_structures(sig: Signature, size: int, up_to_iso: bool = True) -> Iterator[Structure]:
    """All structures on universes 1..k, k <= size, in a deterministic order.

    With ``up_to_iso`` only the representative with the least atom bitmask in
    its permutation orbit is produced.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    for k in range(1, size + 1):
        universe = tuple(str(i) for i in range(1, k + 1))
        atoms = possible_atoms(sig, universe)
        perms = _perm_tables(atoms, universe)[1:] if up_to_iso else []
        for mask in range(1 << len(atoms)):
            if any(_apply(p, mask) < mask for p in perms):
                continue
            chosen = [atoms[i] for i in range(len(atoms)) if mask >> i & 1]
            tables: dict[str, set] = {rel: set() for rel in sig.names()}
            for rel, t in chosen:
                tables[rel].add(t)
            yield Structure(sig, universe, tables)


def canonical_key(s: Structure):
    """Isomorphism-invariant key by exhaustive relabelling (small structures only)."""
    best = None
    for perm in permutations(range(len(s.universe))):
        ren = {a: str(perm[i]) for i, a in enumerate(s.universe)}
        key = tuple(sorted((rel, tuple(ren[x] for x in t)) for rel, t in s.facts()))
        if best is None or key < best:
            best = key
    return (len(s.universe), best)
