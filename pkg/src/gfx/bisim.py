"""Guarded bisimulation between structures, undirected bisimulation between graphs."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .graphs import LabelledGraph
from .structures import Structure, atomic_type, guarded_sets, is_guarded


class BisimError(ValueError):
    pass


@dataclass(frozen=True)
class PartialIso:
    pairs: frozenset  # of (a, b)

    @property
    def domain(self) -> frozenset:
        return frozenset(a for a, _ in self.pairs)

    @property
    def range(self) -> frozenset:
        return frozenset(b for _, b in self.pairs)

    def as_dict(self) -> dict:
        return dict(self.pairs)

    def inverse(self) -> "PartialIso":
        return PartialIso(frozenset((b, a) for a, b in self.pairs))

    def __str__(self):
        return "{" + ", ".join(f"{a}->{b}" for a, b in sorted(self.pairs)) + "}"


@dataclass(frozen=True)
class GBisim:
    maps: frozenset  # of PartialIso

    def __contains__(self, item) -> bool:
        return item in self.maps

    def __len__(self):
        return len(self.maps)

    def find(self, mapping: dict) -> PartialIso | None:
        iso = PartialIso(frozenset(mapping.items()))
        return iso if iso in self.maps else None


def _candidates(a: Structure, b: Structure) -> list[PartialIso]:
    """Bijections between equal-size guarded sets that preserve atomic types."""
    by_size: dict[int, list] = {}
    for g in guarded_sets(b):
        by_size.setdefault(len(g), []).append(g)
    out = []
    for src in sorted(guarded_sets(a), key=sorted):
        dom = tuple(sorted(src))
        tp = atomic_type(a, dom)
        for dst in sorted(by_size.get(len(dom), ()), key=sorted):
            for img in permutations(sorted(dst)):
                if atomic_type(b, img).facts == tp.facts:
                    out.append(PartialIso(frozenset(zip(dom, img))))
    return out


def _agree(alpha: dict, gamma: dict) -> bool:
    return all(gamma[x] == y for x, y in alpha.items() if x in gamma)


def max_guarded_bisim(a: Structure, b: Structure) -> GBisim:
    """Largest family of guarded partial isomorphisms closed under back and forth."""
    if dict(a.sig.relations) != dict(b.sig.relations):
        raise BisimError("structures have different signatures")
    gs_a = sorted(guarded_sets(a), key=sorted)
    gs_b = sorted(guarded_sets(b), key=sorted)
    alive = set(_candidates(a, b))
    fwd = {m: m.as_dict() for m in alive}
    back = {m: m.inverse().as_dict() for m in alive}
    by_dom: dict = {}
    by_rng: dict = {}
    for m in alive:
        by_dom.setdefault(m.domain, set()).add(m)
        by_rng.setdefault(m.range, set()).add(m)

    def extendable(alpha, targets, index, maps) -> bool:
        mine = maps[alpha]
        for target in targets:
            if not any(_agree(mine, maps[g]) for g in index.get(target, ())):
                return False
        return True

    changed = True
    while changed:
        changed = False
        for alpha in sorted(alive, key=str):
            if not (extendable(alpha, gs_a, by_dom, fwd) and extendable(alpha, gs_b, by_rng, back)):
                alive.discard(alpha)
                by_dom[alpha.domain].discard(alpha)
                by_rng[alpha.range].discard(alpha)
                changed = True
    return GBisim(frozenset(alive))


def guarded_bisimilar(a: Structure, tup_a, b: Structure, tup_b, bisim: GBisim | None = None) -> bool:
    tup_a, tup_b = tuple(tup_a), tuple(tup_b)
    if len(tup_a) != len(tup_b):
        raise BisimError("tuples differ in length")
    if not tup_a:
        raise BisimError("empty tuple")
    if not is_guarded(a, tup_a):
        raise BisimError(f"tuple {tup_a} is not guarded in the first structure")
    if not is_guarded(b, tup_b):
        raise BisimError(f"tuple {tup_b} is not guarded in the second structure")
    mapping: dict = {}
    inverse: dict = {}
    for x, y in zip(tup_a, tup_b):
        if mapping.setdefault(x, y) != y or inverse.setdefault(y, x) != x:
            return False
    if bisim is None:
        bisim = max_guarded_bisim(a, b)
    return bisim.find(mapping) is not None


def guarded_tuples(s: Structure, length: int | None = None) -> list[tuple]:
    """Guarded tuples without repetition, one per ordering of each guarded set."""
    out = []
    for g in sorted(guarded_sets(s), key=sorted):
        if length is None or len(g) == length:
            out.extend(permutations(sorted(g)))
    return out


# -- undirected bisimulation -------------------------------------------------

def bisimulation_classes(graphs: list[LabelledGraph], key=repr) -> dict:
    """Coarsest label-respecting partition stable under neighbour sets, over the
    disjoint union of ``graphs``; maps (graph index, node) to a block id."""
    nodes = [(i, v) for i, g in enumerate(graphs) for v in g.nodes]
    labels = {}
    block = {}
    for i, v in nodes:
        labels[(i, v)] = key(graphs[i].labels[v])
    ids: dict = {}
    for x in nodes:
        block[x] = ids.setdefault(labels[x], len(ids))
    while True:
        sig = {}
        for i, v in nodes:
            nb = frozenset(block[(i, w)] for w in graphs[i].neighbours(v))
            sig[(i, v)] = (block[(i, v)], nb)
        ids = {}
        new = {}
        for x in nodes:
            new[x] = ids.setdefault(sig[x], len(ids))
        if len(set(new.values())) == len(set(block.values())):
            return new
        block = new


def undirected_bisimilar(g0: LabelledGraph, v0, g1: LabelledGraph, v1, key=repr) -> bool:
    classes = bisimulation_classes([g0, g1], key)
    return classes[(0, v0)] == classes[(1, v1)]
