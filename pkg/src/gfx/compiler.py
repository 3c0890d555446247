"""Compile a guarded fixpoint sentence into an alternating parity automaton
reading phi-type labelled graphs.

States:
  init, audit, top, bot
  ev+ / ev- (index, eta): Exists (resp. Forall) claims that catalogue entry
      ``index`` holds (resp. fails) under the valuation ``eta`` into constants
  carry / check (sign, literal pair): a claimed literal fact survives every
      edge along which its constants survive

Rank layout (max-even convention): fixpoint unfoldings of nesting height h
get 2h+1 (lfp) or 2h+2 (gfp); Exists-side navigation gets 1; the rest 0.
The refuting game ev- is the dual: owners swapped, every rank plus one.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .automata import (ANY, MOVE, STAY, AlternatingAutomaton, Pattern, PhiAlphabet,
                       Transition)
from .games import EXISTS, FORALL, opponent
from .logic import (Conj, Disj, ExistsGuarded, FixVarAtom, Fixpoint, Formula, Lfp, Quantifier,
                    TruthConst, children, free_vars, relations, size, validate_guarded, walk)
from .tabloids import Catalog, PhiType

# Largest observed count / (|phi| * (2n+1)^n * L) over the nested family, rounded up.
STATE_CONSTANT = 1


class CompileError(ValueError):
    pass


def letter_check(catalog: Catalog, letter: PhiType) -> bool:
    """Local coherence of a letter: constants come from its literal part, the
    literal part is a complete consistent atomic type, and Boolean connectives
    and truth constants are closed pointwise."""
    pairs = letter.pairs
    lit = catalog.literal
    carrier = {c for i, eta in pairs if i in lit for _, c in eta}
    if any(c not in carrier for _, eta in pairs for _, c in eta):
        return False
    consts = sorted(carrier)
    facts: dict = {}
    for i, (rel, args, positive) in lit.items():
        names = catalog.free[i]
        for img in product(consts, repeat=len(names)):
            eta = tuple(zip(names, img))
            env = dict(eta)
            fact = (rel, tuple(env[x] for x in args))
            truth = ((i, eta) in pairs) == positive
            if facts.setdefault(fact, truth) != truth:
                return False
    for i, entry in enumerate(catalog.entries):
        if not catalog.closed[i] or i in lit:
            continue
        if isinstance(entry, TruthConst):
            if ((i, ()) in pairs) != entry.value:
                return False
        elif isinstance(entry, (Conj, Disj)):
            left, right = catalog.index[entry.left], catalog.index[entry.right]
            for eta in catalog.etas(i, consts):
                env = dict(eta)
                a = (left, tuple((x, env[x]) for x in catalog.free[left])) in pairs
                b = (right, tuple((x, env[x]) for x in catalog.free[right])) in pairs
                want = (a and b) if isinstance(entry, Conj) else (a or b)
                if ((i, eta) in pairs) != want:
                    return False
    return True


@dataclass(frozen=True, eq=False)
class CompiledAutomaton:
    automaton: AlternatingAutomaton
    catalog: Catalog
    source: Formula
    width: int
    pool: tuple
    state_count: int
    formula_size: int
    literal_count: int
    constant: int = STATE_CONSTANT

    @property
    def bound(self) -> int:
        return state_bound(self.formula_size, self.width, self.literal_count, self.constant)

    def to_text(self) -> str:
        return self.automaton.to_text()


def state_bound(formula_size: int, n: int, literal_count: int, constant: int = STATE_CONSTANT) -> int:
    return constant * formula_size * (2 * n + 1) ** n * literal_count


def signature_literals(rels, pool) -> int:
    """Number of signed atoms over the constant pool."""
    return 2 * sum(len(pool) ** ar for ar in rels.values())


def fixpoint_ranks(f: Formula) -> dict[str, int]:
    """Unfolding rank per fixpoint variable: 2h+1 for lfp, 2h+2 for gfp, where h
    is one more than the largest height of a binder nested in the body."""
    height: dict[str, int] = {}

    def visit(g) -> int:
        inner = max((visit(c) for c in children(g)), default=0)
        if isinstance(g, Fixpoint):
            height[g.var] = inner + 1
            return inner + 1
        return inner

    visit(f)
    kinds = {g.var: isinstance(g, Lfp) for g in walk(f) if isinstance(g, Fixpoint)}
    return {z: 2 * h + (1 if kinds[z] else 2) for z, h in height.items()}


def _restrict(eta_env: dict, names) -> tuple:
    return tuple((x, eta_env[x]) for x in names)


def compile(f: Formula) -> CompiledAutomaton:  # noqa: A001 - the operation's name
    report = validate_guarded(f, strict=True)
    if not report.ok:
        raise CompileError(f"formula is not a strict guarded sentence: {report}")
    if free_vars(f):
        raise CompileError(f"formula has free variables {sorted(free_vars(f))}")
    cat = Catalog(f)
    pool = cat.pool
    ranks = fixpoint_ranks(cat.formula)
    states: dict[str, tuple[str, int]] = {}
    trans: list[Transition] = []

    def add(q, owner, rank):
        states[q] = (owner, rank)

    def t(q, pattern, direction, p):
        trans.append(Transition(q, pattern, direction, p))

    add("init", FORALL, 0)
    add("audit", FORALL, 0)
    add("top", EXISTS, 0)
    add("bot", FORALL, 1)
    t("top", ANY, STAY, "top")
    t("bot", ANY, STAY, "bot")

    def ev(sign, pair):
        return f"ev{sign}{cat.render_pair(pair)}"

    def const_tokens(eta):
        return tuple(("const", c) for c in sorted({c for _, c in eta}))

    for sign in "+-":
        win, lose = ("top", "bot") if sign == "+" else ("bot", "top")

        def own(player):
            return player if sign == "+" else opponent(player)

        def rk(r):
            return r if sign == "+" else r + 1

        for i, entry in enumerate(cat.entries):
            names = cat.free[i]
            for img in product(pool, repeat=len(names)):
                eta = tuple(zip(names, img))
                env = dict(eta)
                q = ev(sign, (i, eta))
                if i in cat.literal:
                    add(q, own(EXISTS), rk(0))
                    t(q, Pattern((("has", (i, eta)),)), STAY, win)
                    t(q, Pattern((("lacks", (i, eta)),)), STAY, lose)
                elif isinstance(entry, TruthConst):
                    add(q, own(EXISTS), rk(0))
                    t(q, ANY, STAY, win if entry.value else lose)
                elif isinstance(entry, (Conj, Disj)):
                    add(q, own(FORALL if isinstance(entry, Conj) else EXISTS), rk(0))
                    for part in (entry.left, entry.right):
                        j = cat.index[part]
                        t(q, ANY, STAY, ev(sign, (j, _restrict(env, cat.free[j]))))
                elif isinstance(entry, Quantifier):
                    existential = isinstance(entry, ExistsGuarded)
                    add(q, own(EXISTS if existential else FORALL), rk(1 if existential else 0))
                    here = const_tokens(eta)
                    g = cat.index[entry.guard]
                    b = cat.index[entry.body]
                    bound = [x for x in dict.fromkeys(entry.guard.args) if x in set(entry.vars)]
                    for ext in product(pool, repeat=len(bound)):
                        inner = {**env, **dict(zip(bound, ext))}
                        guard_pair = (g, _restrict(inner, cat.free[g]))
                        t(q, Pattern(here + (("has", guard_pair),)), STAY,
                          ev(sign, (b, _restrict(inner, cat.free[b]))))
                    t(q, Pattern(here), MOVE, q)
                elif isinstance(entry, Fixpoint):
                    add(q, own(EXISTS), rk(0))
                    b = cat.index[entry.body]
                    inner = {z: env[x] for z, x in zip(entry.params, entry.args)}
                    t(q, ANY, STAY, ev(sign, (b, _restrict(inner, cat.free[b]))))
                elif isinstance(entry, FixVarAtom):
                    binder = cat.binders[entry.var]
                    add(q, own(EXISTS), rk(ranks[entry.var]))
                    b = cat.index[binder.body]
                    inner = {z: env[x] for z, x in zip(binder.params, entry.args)}
                    t(q, ANY, STAY, ev(sign, (b, _restrict(inner, cat.free[b]))))
                else:
                    raise CompileError(f"unexpected catalogue entry {entry!r}")

    root = (cat.root, ())
    t("init", Pattern((("has", root),)), STAY, ev("+", root))
    t("init", Pattern((("has", root),)), STAY, "audit")
    t("init", Pattern((("lacks", root),)), STAY, "bot")

    t("audit", Pattern((("incoherent",),)), STAY, "bot")
    for i in range(len(cat)):
        if not cat.closed[i]:
            continue
        for img in product(pool, repeat=len(cat.free[i])):
            eta = tuple(zip(cat.free[i], img))
            pair = (i, eta)
            t("audit", Pattern((("has", pair),)), STAY, ev("+", pair))
            t("audit", Pattern((("lacks", pair),) + const_tokens(eta)), STAY, ev("-", pair))
            if i in cat.literal and cat.literal[i][2]:
                for claimed in (True, False):
                    tag = ("+" if claimed else "-") + cat.render_pair(pair)
                    carry, check = f"carry{tag}", f"check{tag}"
                    add(carry, FORALL, 0)
                    add(check, EXISTS, 0)
                    need = ("has" if claimed else "lacks", pair)
                    t("audit", Pattern((need,) + (() if claimed else const_tokens(eta))),
                      STAY, carry)
                    t(carry, ANY, MOVE, check)
                    t(check, Pattern((need,)), STAY, "top")
                    for c in sorted({c for _, c in eta}):
                        t(check, Pattern((("noconst", c),)), STAY, "top")
    t("audit", ANY, MOVE, "audit")

    coherence: dict = {}

    def coherent(letter):
        hit = coherence.get(letter)
        if hit is None:
            hit = coherence[letter] = letter_check(cat, letter)
        return hit

    aut = AlternatingAutomaton(tuple(states), {q: o for q, (o, _) in states.items()},
                               {q: r for q, (_, r) in states.items()}, "init", tuple(trans),
                               PhiAlphabet(cat), coherent)
    rels = relations(cat.formula)
    return CompiledAutomaton(aut, cat, f, cat.width, pool, len(states), size(f),
                             signature_literals(rels, pool))
