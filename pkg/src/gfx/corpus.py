"""Test corpus: hand formulas, structures and automata, plus seeded generators."""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product

from .automata import MOVE, STAY, AlternatingAutomaton, make_automaton
from .games import EXISTS, FORALL
from .graphs import LabelledGraph
from .logic import (
    Conj, Disj, ExistsGuarded, FixVarAtom, ForallGuarded, Formula, Gfp, Lfp, Neg, RelAtom,
    Signature, TruthConst, free_vars, parse_formula, size, validate_guarded,
)
from .structures import Structure, make_structure

F_INF = ("exists x y . (E(x,y) & true) & forall x y . (E(x,y) -> "
         "([lfp Z(z) . forall v . (E(v,z) -> Z(v))](x) & exists w . (E(y,w) & true)))")
# F_INF without the well-foundedness conjunct: sinkless digraphs
F_SINKLESS = ("exists x y . (E(x,y) & true) & forall x y . (E(x,y) -> "
              "exists w . (E(y,w) & true))")

SENTENCES = {
    "edge": "exists x y . (E(x,y) & true)",
    "loop": "exists x . (E(x,x) & true)",
    "no-loop": "forall x . (E(x,x) -> false)",
    "symmetric": "forall x y . (E(x,y) -> E(y,x))",
    "sinkless": F_SINKLESS,
    "infinity": F_INF,
    "well-founded": "forall x y . (E(x,y) -> [lfp Z(z) . forall v . (E(v,z) -> Z(v))](x))",
    "infinite-path": "exists x y . (E(x,y) & [gfp Z(z) . exists v . (E(z,v) & Z(v))](x))",
    "reach-p": "forall x y . (E(x,y) -> [lfp Z(z) . (P(z) | exists w . (E(z,w) & Z(w)))](x))",
    "buchi-p": ("exists x . (P(x) & [gfp X(u) . exists w . (E(u,w) & "
                "[lfp Y(y) . ((P(y) & X(y)) | exists t . (E(y,t) & Y(t)))](w))](x))"),
    "p-sink": "exists x . (P(x) & forall y . (E(x,y) -> false))",
    "negated": "!(exists x y . (E(x,y) & !E(y,x)))",
    "ternary-free": "forall x . (P(x) -> exists y . (E(x,y) & (P(y) | E(y,y))))",
}

# open formulas keyed by their free variables, for invariance checks on tuples
OPEN_FORMULAS = {
    ("x",): [
        "exists y . (E(x,y) & true)",
        "exists y . (E(y,x) & P(y))",
        "[lfp Z(z) . forall v . (E(v,z) -> Z(v))](x)",
        "[gfp Z(z) . exists v . (E(z,v) & Z(v))](x)",
        "P(x) | exists y . (E(x,y) & !P(y))",
        "forall y . (E(x,y) -> exists w . (E(y,w) & E(w,y)))",
    ],
    ("x", "y"): [
        "E(x,y)",
        "E(y,x) & !E(x,x)",
        "exists w . (E(y,w) & true)",
        "[lfp Z(z) . forall v . (E(v,z) -> Z(v))](x) & P(y)",
        "[gfp Z(u,w) . (E(u,w) & exists s . (E(w,s) & Z(w,s)))](x,y)",
        "forall w . (E(x,w) -> (P(w) | E(w,w)))",
    ],
}

STRUCTURES = {
    "loop": [("E", ("a", "a"))],
    "edge": [("E", ("a", "b"))],
    "chain3": [("E", ("a", "b")), ("E", ("b", "c"))],
    "cycle2": [("E", ("a", "b")), ("E", ("b", "a"))],
    "cycle3": [("E", ("a", "b")), ("E", ("b", "c")), ("E", ("c", "a"))],
    "lasso": [("E", ("a", "b")), ("E", ("b", "c")), ("E", ("c", "b"))],
    "p-chain": [("E", ("a", "b")), ("E", ("b", "c")), ("P", ("c",))],
    "p-cycle": [("E", ("a", "b")), ("E", ("b", "a")), ("P", ("a",))],
    "star": [("E", ("a", "b")), ("E", ("a", "c")), ("E", ("a", "d")), ("P", ("b",))],
    "two-edges": [("E", ("a", "b")), ("E", ("c", "d"))],
}

SIG = Signature({"E": 2, "P": 1})


def nested_sentence(k: int) -> Formula:
    """k guarded steps along E, each checking P, as nested conjunctions (width 2
    for k >= 1; variables alternate so the width stays fixed)."""
    def body(i, v, w):
        if i == 0:
            return f"P({v})"
        return f"(P({v}) & exists {w} . (E({v},{w}) & {body(i - 1, w, v)}))"
    return parse_formula(f"exists x . (P(x) & {body(k, 'x', 'y')})")


def corpus_sentences() -> dict[str, Formula]:
    return {name: parse_formula(text) for name, text in SENTENCES.items()}


def corpus_structures(sig: Signature = SIG) -> dict[str, Structure]:
    return {name: make_structure(facts, sig=sig) for name, facts in STRUCTURES.items()}


# -- hand automata -----------------------------------------------------------

def stay_automaton() -> AlternatingAutomaton:
    """Accepts exactly the graphs whose start node is labelled 'a'."""
    return make_automaton({"q": (EXISTS, 0)}, "q", [("q", "a", STAY, "q")])


def move_automaton() -> AlternatingAutomaton:
    """Accepts iff the start node is labelled 'a' and has a neighbour."""
    return make_automaton({"q0": (EXISTS, 0), "q1": (FORALL, 0)}, "q0",
                          [("q0", "a", MOVE, "q1")])


def everywhere_automaton(letter: str = "a") -> AlternatingAutomaton:
    """Every node of the start component carries ``letter``."""
    return make_automaton({"q": (FORALL, 0), "chk": (EXISTS, 0), "ok": (EXISTS, 0)}, "q",
                          [("q", None, STAY, "chk"), ("q", None, MOVE, "q"),
                           ("chk", letter, STAY, "ok"), ("ok", None, STAY, "ok")])


def recurrence_automaton(letter: str = "b") -> AlternatingAutomaton:
    """Exists can walk forever seeing ``letter`` infinitely often."""
    return make_automaton({"walk": (EXISTS, 1), "seen": (EXISTS, 2)}, "walk",
                          [("walk", None, MOVE, "walk"), ("walk", letter, STAY, "seen"),
                           ("seen", None, MOVE, "walk")])


def infinity_automaton(check_well_founded: bool = True, check_forward: bool = True
                       ) -> AlternatingAutomaton:
    """Letters 0/1/2 as a colouring; edges point from colour c to colour c+1 (mod 3).

    Forall roams and may challenge: properness of the colouring, or an infinite
    backward walk (well-foundedness).  Exists must show an infinite forward
    walk from the start.  Only infinite graphs are accepted.
    """
    colours = ("0", "1", "2")
    states = {"start": (FORALL, 0), "roam": (FORALL, 0), "top": (EXISTS, 0),
              "wf": (FORALL, 1), "fwd": (EXISTS, 2)}
    trans = [("top", None, STAY, "top"), ("start", None, STAY, "roam"),
             ("roam", None, MOVE, "roam")]
    if check_forward:
        trans.append(("start", None, STAY, "fwd"))
    if check_well_founded:
        trans.append(("roam", None, STAY, "wf"))
    for c in colours:
        up = str((int(c) + 1) % 3)
        down = str((int(c) + 2) % 3)
        states[f"col{c}"] = (FORALL, 0)
        states[f"chk{c}"] = (EXISTS, 0)
        trans.append(("roam", c, STAY, f"col{c}"))
        trans.append((f"col{c}", None, MOVE, f"chk{c}"))
        trans += [(f"chk{c}", d, STAY, "top") for d in colours if d != c]
        # backward step: the next node must have the preceding colour
        states[f"back{c}"] = (FORALL, 1)
        trans.append(("wf", c, MOVE, f"back{c}"))
        trans.append((f"back{c}", down, STAY, "wf"))
        # forward step: the next node must have the following colour
        states[f"fw{c}"] = (EXISTS, 2)
        trans.append(("fwd", c, MOVE, f"fw{c}"))
        trans.append((f"fw{c}", up, STAY, "fwd"))
    return make_automaton(states, "start", trans, letters=colours)


def hand_automata() -> dict[str, tuple[AlternatingAutomaton, tuple[str, ...]]]:
    """Name -> (automaton, letters it is meant to read)."""
    return {
        "stay-a": (stay_automaton(), ("a", "b")),
        "move-a": (move_automaton(), ("a", "b")),
        "everywhere-a": (everywhere_automaton(), ("a", "b")),
        "recurrence-b": (recurrence_automaton(), ("a", "b")),
        "infinity": (infinity_automaton(), ("0", "1", "2")),
        "colouring-only": (infinity_automaton(False, False), ("0", "1", "2")),
    }


# -- generators --------------------------------------------------------------

@dataclass(frozen=True)
class FormulaGen:
    """Random strict guarded sentences over E/2 and P/1."""
    max_size: int = 25
    max_width: int = 2
    fixpoint_prob: float = 0.3

    def sentence(self, rng: random.Random) -> Formula:
        while True:
            try:
                f = self._gen(rng, (), 4, {}, 0)
            except _Retry:
                continue
            if (size(f) <= self.max_size and not free_vars(f)
                    and validate_guarded(f, strict=True).ok and _width(f) <= self.max_width):
                return f

    def _gen(self, rng, avail: tuple, depth: int, fixes: dict, counter: int) -> Formula:
        roll = rng.random()
        if depth <= 0 or (avail and roll < 0.25):
            return self._leaf(rng, avail, fixes)
        if roll < 0.45:
            kind = Conj if rng.random() < 0.5 else Disj
            return kind(self._gen(rng, avail, depth - 1, fixes, counter),
                        self._gen(rng, avail, depth - 1, fixes, counter + 7))
        if roll < 0.5 and not fixes:
            return Neg(self._gen(rng, avail, depth - 1, {}, counter))
        if roll < 0.5 + self.fixpoint_prob and avail and len(fixes) < 2:
            return self._fixpoint(rng, avail, depth, fixes, counter)
        return self._quantifier(rng, avail, depth, fixes, counter)

    def _leaf(self, rng, avail, fixes):
        options = ["const"]
        if avail:
            options = ["lit"] * 4 + ["const"]
            if fixes:
                options += ["fix"] * 2
        pick = rng.choice(options)
        if pick == "const":
            return TruthConst(rng.random() < 0.6)
        if pick == "fix":
            z = rng.choice(sorted(fixes))
            return FixVarAtom(z, tuple(rng.choice(avail) for _ in range(fixes[z])))
        atom = self._atom(rng, avail)
        return atom if rng.random() < 0.6 else Neg(atom)

    @staticmethod
    def _atom(rng, vars_):
        if rng.random() < 0.35:
            return RelAtom("P", (rng.choice(vars_),))
        return RelAtom("E", (rng.choice(vars_), rng.choice(vars_)))

    def _quantifier(self, rng, avail, depth, fixes, counter):
        keep = [x for x in avail if rng.random() < 0.6][: self.max_width - 1]
        fresh = [f"v{depth}{counter}{i}" for i in range(rng.choice((1, 1, 2)))]
        scope = tuple(keep + fresh)[: self.max_width]
        bound = tuple(x for x in scope if x not in keep)
        if not bound:
            raise _Retry
        guard = self._covering_atom(rng, scope)
        body = self._gen(rng, scope, depth - 1, fixes, counter + 1)
        kind = ExistsGuarded if rng.random() < 0.5 else ForallGuarded
        return kind(bound, guard, body)

    @staticmethod
    def _covering_atom(rng, scope):
        if len(scope) == 1:
            return RelAtom("P", scope) if rng.random() < 0.3 else RelAtom("E", scope * 2)
        a, b = scope
        return RelAtom("E", (a, b) if rng.random() < 0.5 else (b, a))

    def _fixpoint(self, rng, avail, depth, fixes, counter):
        arity = 1 if rng.random() < 0.75 or len(avail) < 2 else 2
        z = f"Z{len(fixes)}{counter}"
        params = tuple(f"p{len(fixes)}{counter}{i}" for i in range(arity))
        inner = dict(fixes)
        inner[z] = arity
        guard_body = self._gen(rng, params, depth - 1, inner, counter + 3)
        if rng.random() < 0.5:
            body = Conj(self._covering_atom(rng, params), guard_body)
        else:
            q = self._quantifier(rng, params, depth, inner, counter + 5)
            body = Disj(Conj(self._covering_atom(rng, params), guard_body), q) \
                if rng.random() < 0.4 else q
        args = tuple(rng.choice(avail) for _ in range(arity))
        kind = Lfp if rng.random() < 0.5 else Gfp
        return kind(z, params, body, args)


class _Retry(Exception):
    pass


def _width(f):
    from .logic import width
    return width(f)


def random_structure(rng: random.Random, sig: Signature = SIG, max_size: int = 4,
                     density: float | None = None) -> Structure:
    """At least one atom; universe 1..k with k <= max_size."""
    k = rng.randint(1, max_size)
    universe = tuple(str(i) for i in range(1, k + 1))
    p = density if density is not None else rng.uniform(0.1, 0.6)
    while True:
        facts = [(rel, args) for rel, ar in sorted(sig.relations.items())
                 for args in product(universe, repeat=ar) if rng.random() < p]
        if facts:
            return make_structure(facts, universe=universe, sig=sig)


def random_graph(rng: random.Random, n: int, letters, p: float = 0.5) -> LabelledGraph:
    labels = {i: rng.choice(letters) for i in range(n)}
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return LabelledGraph.build(labels, edges, 0)


def random_lift(rng: random.Random, g: LabelledGraph, k: int) -> tuple[LabelledGraph, dict]:
    """A k-fold covering graph: each edge is lifted along a random permutation.
    The projection (v, i) -> v is an undirected bisimulation."""
    labels = {(v, i): g.labels[v] for v in g.nodes for i in range(k)}
    edges = []
    for u, w in g.edge_pairs():
        perm = list(range(k))
        rng.shuffle(perm)
        edges += [((u, i), (w, perm[i])) for i in range(k)]
    lift = LabelledGraph.build(labels, edges)
    return lift, {x: x[0] for x in lift.nodes}


def directed_cycle(k: int, sig: Signature = SIG, marked=()) -> Structure:
    names = [f"c{i}" for i in range(k)]
    facts = [("E", (names[i], names[(i + 1) % k])) for i in range(k)]
    facts += [("P", (names[i],)) for i in marked]
    return make_structure(facts, universe=tuple(names), sig=sig)
