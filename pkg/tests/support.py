"""Generators and helpers shared by the test modules."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from gfx.corpus import FormulaGen, random_structure
from gfx.games import EXISTS, FORALL, ParityGame
from gfx.logic import (Conj, Disj, ExistsGuarded, FixVarAtom, ForallGuarded, Formula, Gfp, Lfp,
                       Neg, RelAtom, TruthConst, parse_formula, width)
from gfx.structures import Structure, maximal_guarded_sets, normalize_width


def all_games(n: int, max_rank: int):
    """Every game on positions 0..n-1 (all owners, ranks, edge sets)."""
    pos = tuple(range(n))
    slots = [(a, b) for a in pos for b in pos]
    for owners in itertools.product((EXISTS, FORALL), repeat=n):
        owner = dict(zip(pos, owners))
        for ranks in itertools.product(range(max_rank + 1), repeat=n):
            rank = dict(zip(pos, ranks))
            for mask in range(1 << len(slots)):
                edges = frozenset(s for i, s in enumerate(slots) if mask >> i & 1)
                yield ParityGame(pos, owner, rank, edges, 0)


def game_count(n: int, max_rank: int) -> int:
    return 2 ** n * (max_rank + 1) ** n * 2 ** (n * n)


def random_game(rng: random.Random, n: int, max_rank: int, density: float | None = None) -> ParityGame:
    pos = tuple(range(n))
    p = rng.uniform(0.15, 0.6) if density is None else density
    edges = frozenset((a, b) for a in pos for b in pos if rng.random() < p)
    return ParityGame(pos, {q: rng.choice((EXISTS, FORALL)) for q in pos},
                      {q: rng.randint(0, max_rank) for q in pos}, edges, 0)


@dataclass(frozen=True)
class PairGen:
    """(sentence, structure) pairs for the pipeline differential.  Structures
    without atoms after width normalisation are redrawn: they have no tabloid."""
    seed: int = 2024
    max_size: int = 4
    formula: FormulaGen = FormulaGen(max_size=25, max_width=2)

    def pairs(self, count: int):
        rng = random.Random(self.seed)
        made = 0
        while made < count:
            f = self.formula.sentence(rng)
            n = max(1, width(f))
            while True:
                a = random_structure(rng, max_size=self.max_size)
                if normalize_width(a, n).facts():
                    break
            made += 1
            yield f, a


def safe_cut(a: Structure) -> bool:
    """Every atom spans a maximal guarded set and those sets are pairwise
    disjoint; bounded unravellings of such models decode bisimilarly."""
    maxi = maximal_guarded_sets(a)
    if any(frozenset(args) not in maxi for _, args in a.facts()):
        return False
    sets = sorted(maxi, key=sorted)
    return all(not (x & y) for x, y in itertools.combinations(sets, 2))


def formula_of(f) -> Formula:
    return parse_formula(f) if isinstance(f, str) else f


def kt_eval(s: Structure, f: Formula, val: dict, env: dict | None = None) -> bool:
    """Definitional oracle: quantifiers range over all tuples of the universe,
    and fixpoints are computed literally by Knaster-Tarski (the lfp is the
    intersection of all pre-fixpoints, the gfp the union of all
    post-fixpoints).  Exponential; only for universes of two or three elements."""
    env = env or {}
    if isinstance(f, RelAtom):
        return tuple(val[x] for x in f.args) in s.tables[f.rel]
    if isinstance(f, FixVarAtom):
        return tuple(val[x] for x in f.args) in env[f.var]
    if isinstance(f, TruthConst):
        return f.value
    if isinstance(f, Neg):
        return not kt_eval(s, f.arg, val, env)
    if isinstance(f, Conj):
        return kt_eval(s, f.left, val, env) and kt_eval(s, f.right, val, env)
    if isinstance(f, Disj):
        return kt_eval(s, f.left, val, env) or kt_eval(s, f.right, val, env)
    if isinstance(f, (ExistsGuarded, ForallGuarded)):
        results = []
        for img in itertools.product(s.universe, repeat=len(f.vars)):
            inner = {**val, **dict(zip(f.vars, img))}
            if kt_eval(s, f.guard, inner, env):
                results.append(kt_eval(s, f.body, inner, env))
        return any(results) if isinstance(f, ExistsGuarded) else all(results)
    if isinstance(f, (Lfp, Gfp)):
        space = list(itertools.product(s.universe, repeat=len(f.params)))
        if len(space) > 9:
            raise ValueError("Knaster-Tarski oracle limited to 9 parameter tuples")

        def step(rel):
            inner_env = {**env, f.var: rel}
            return frozenset(t for t in space
                             if kt_eval(s, f.body, {**val, **dict(zip(f.params, t))}, inner_env))

        subsets = [frozenset(t for i, t in enumerate(space) if m >> i & 1)
                   for m in range(1 << len(space))]
        if isinstance(f, Lfp):
            rel = frozenset(space)
            for sub in subsets:
                if step(sub) <= sub:
                    rel &= sub
        else:
            rel = frozenset()
            for sub in subsets:
                if sub <= step(sub):
                    rel |= sub
        return tuple(val[x] for x in f.args) in rel
    raise TypeError(f"not a formula: {f!r}")


# criterion number -> "criterion N: PASS|FAIL (detail)"; printed by conftest
ACCEPTANCE: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> bool:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE[n] = line
    print(line)
    return ok
