"""Alternating parity automata on undirected node-labelled graphs.

A transition ``(q, pattern, direction, p)`` fires at a node whose letter
matches ``pattern``; ``stay`` keeps the node, ``move`` goes to any
neighbour.  Acceptance from v0 is an Exists win at (v0, q_I) in the product
parity game.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from .games import EXISTS, PLAYERS, ParityGame, solve
from .graphs import LabelledGraph, enumerate_graphs, rooted_representatives
from .tabloids import Catalog, PhiType

STAY, MOVE = "stay", "move"


class AutomatonError(ValueError):
    pass


class AlphabetError(AutomatonError):
    """A graph label is not a letter of the automaton."""


# -- letter patterns ---------------------------------------------------------

@dataclass(frozen=True)
class Pattern:
    """Conjunction of tokens.  Token kinds: ("letter", name), ("has", pair),
    ("lacks", pair), ("const", k), ("noconst", k), ("incoherent",).  The empty
    conjunction matches every letter."""
    tokens: tuple = ()

    def matches(self, letter, coherent=None) -> bool:
        for tok in self.tokens:
            kind = tok[0]
            if kind == "letter":
                if letter != tok[1]:
                    return False
            elif kind == "has":
                if tok[1] not in letter.pairs:
                    return False
            elif kind == "lacks":
                if tok[1] in letter.pairs:
                    return False
            elif kind == "const":
                if tok[1] not in letter.carrier:
                    return False
            elif kind == "noconst":
                if tok[1] in letter.carrier:
                    return False
            elif kind == "incoherent":
                if coherent is None or coherent(letter):
                    return False
            else:
                raise AutomatonError(f"unknown pattern token {tok!r}")
        return True

    def render(self, catalog: Catalog | None = None) -> str:
        if not self.tokens:
            return "*"
        out = []
        for tok in self.tokens:
            kind = tok[0]
            if kind == "letter":
                out.append(f"letter:{tok[1]}")
            elif kind in ("has", "lacks"):
                if catalog is None:
                    raise AutomatonError("structural pattern needs a catalogue to render")
                out.append(("+" if kind == "has" else "-") + catalog.render_pair(tok[1]))
            elif kind == "const":
                out.append(f"const:{tok[1]}")
            elif kind == "noconst":
                out.append(f"!const:{tok[1]}")
            else:
                out.append("incoherent")
        return "&".join(out)


ANY = Pattern()


def parse_pattern(text: str, catalog: Catalog | None = None) -> Pattern:
    if text == "*":
        return ANY
    tokens = []
    for item in text.split("&"):
        if item.startswith("letter:"):
            tokens.append(("letter", item[len("letter:"):]))
        elif item.startswith("!const:"):
            tokens.append(("noconst", item[len("!const:"):]))
        elif item.startswith("const:"):
            tokens.append(("const", item[len("const:"):]))
        elif item == "incoherent":
            tokens.append(("incoherent",))
        elif item[:1] in "+-" and len(item) > 1:
            if catalog is None:
                raise AutomatonError(f"pattern {item!r} needs a formula header")
            tokens.append(("has" if item[0] == "+" else "lacks", catalog.parse_pair(item[1:])))
        else:
            raise AutomatonError(f"bad pattern token {item!r}")
    return Pattern(tuple(tokens))


# -- alphabets ---------------------------------------------------------------

@dataclass(frozen=True)
class ExplicitAlphabet:
    letters: frozenset | None = None  # None: any plain letter name

    def check(self, label) -> None:
        if not isinstance(label, str) or (self.letters is not None and label not in self.letters):
            raise AlphabetError(f"label {label!r} is not in the alphabet")


@dataclass(frozen=True, eq=False)
class PhiAlphabet:
    catalog: Catalog

    def check(self, label) -> None:
        if not isinstance(label, PhiType):
            raise AlphabetError(f"label {label!r} is not a phi-type")
        if label.catalog is not self.catalog and (
                label.catalog is None or label.catalog.text() != self.catalog.text()):
            raise AlphabetError("phi-type belongs to a different formula")
        pool = set(self.catalog.pool)
        for i, eta in label.pairs:
            if i >= len(self.catalog) or tuple(x for x, _ in eta) != self.catalog.free[i]:
                raise AlphabetError(f"malformed phi-type item {(i, eta)}")
            if any(c not in pool for _, c in eta):
                raise AlphabetError("phi-type uses constants outside the pool")


# -- automata ----------------------------------------------------------------

@dataclass(frozen=True)
class Transition:
    state: Hashable
    pattern: Pattern
    direction: str
    target: Hashable


@dataclass(frozen=True, eq=False)
class AlternatingAutomaton:
    states: tuple
    owner: Mapping[Hashable, str]
    rank: Mapping[Hashable, int]
    initial: Hashable
    transitions: tuple
    alphabet: object = field(default_factory=ExplicitAlphabet)
    coherent: object = None  # letter predicate used by the "incoherent" token

    def __post_init__(self):
        members = set(self.states)
        if len(members) != len(self.states):
            raise AutomatonError("duplicate state")
        if self.initial not in members:
            raise AutomatonError(f"initial state {self.initial!r} is not a state")
        for q in self.states:
            if self.owner.get(q) not in PLAYERS:
                raise AutomatonError(f"state {q!r} is in neither partition class")
            r = self.rank.get(q)
            if not isinstance(r, int) or r < 0:
                raise AutomatonError(f"state {q!r} has no rank")
        index: dict = {q: [] for q in self.states}
        for t in self.transitions:
            if t.state not in members or t.target not in members:
                raise AutomatonError(f"transition {t} references an unknown state")
            if t.direction not in (STAY, MOVE):
                raise AutomatonError(f"bad direction {t.direction!r}")
            index[t.state].append(t)
        object.__setattr__(self, "_by_state", {q: tuple(ts) for q, ts in index.items()})

    def delta(self, state, letter) -> list[tuple[str, Hashable]]:
        return [(t.direction, t.target) for t in self._by_state[state]
                if t.pattern.matches(letter, self.coherent)]

    @property
    def catalog(self) -> Catalog | None:
        return self.alphabet.catalog if isinstance(self.alphabet, PhiAlphabet) else None

    def to_text(self) -> str:
        catalog = self.catalog
        ids = {q: _state_id(q) for q in self.states}
        if len(set(ids.values())) != len(ids):
            ids = {q: f"q{i}" for i, q in enumerate(self.states)}
        lines = []
        if catalog is not None:
            lines += catalog.header_lines()
        elif self.alphabet.letters is not None:
            lines.append("alphabet " + " ".join(sorted(self.alphabet.letters)))
        for q in self.states:
            flag = " initial" if q == self.initial else ""
            lines.append(f"state {ids[q]} {self.owner[q]} rank {self.rank[q]}{flag}")
        for t in self.transitions:
            lines.append(f"trans {ids[t.state]} {t.pattern.render(catalog)} {t.direction} {ids[t.target]}")
        return "\n".join(lines) + "\n"


def _state_id(q) -> str:
    text = q if isinstance(q, str) else ".".join(map(str, q)) if isinstance(q, tuple) else str(q)
    return "".join("_" if ch.isspace() else ch for ch in text)


def make_automaton(states: Mapping[Hashable, tuple[str, int]], initial, transitions: Iterable,
                   letters=None) -> AlternatingAutomaton:
    """Hand-written automata: ``states`` maps q -> (owner, rank); transitions are
    (q, letter-or-None, direction, p) with None matching every letter."""
    trans = []
    for q, letter, direction, p in transitions:
        pattern = ANY if letter is None else Pattern((("letter", letter),))
        trans.append(Transition(q, pattern, direction, p))
    return AlternatingAutomaton(
        tuple(states), {q: o for q, (o, _) in states.items()},
        {q: r for q, (_, r) in states.items()}, initial, tuple(trans),
        ExplicitAlphabet(frozenset(letters) if letters is not None else None))


def parse_automaton(text: str) -> AlternatingAutomaton:
    header: dict[str, list[str]] = {}
    states, owner, rank, initial = [], {}, {}, None
    raw_trans = []
    letters = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw, _, rest = line.partition(" ")
        parts = rest.split()
        if kw == "state" and len(parts) in (4, 5) and parts[2] == "rank":
            q = parts[0]
            if q in owner:
                raise AutomatonError(f"line {lineno}: state {q} declared twice")
            if parts[1] not in PLAYERS:
                raise AutomatonError(f"line {lineno}: owner must be exists or forall")
            if not parts[3].isdigit():
                raise AutomatonError(f"line {lineno}: rank must be a natural number")
            if len(parts) == 5:
                if parts[4] != "initial":
                    raise AutomatonError(f"line {lineno}: unexpected {parts[4]!r}")
                if initial is not None:
                    raise AutomatonError(f"line {lineno}: second initial state")
                initial = q
            states.append(q)
            owner[q] = parts[1]
            rank[q] = int(parts[3])
        elif kw == "trans" and len(parts) == 4:
            raw_trans.append((lineno, parts))
        elif kw == "alphabet":
            letters = frozenset(parts)
        elif kw in ("formula", "pool", "sub"):
            header.setdefault(kw, []).append(rest.strip())
        else:
            raise AutomatonError(f"line {lineno}: cannot parse {line!r}")
    if initial is None:
        raise AutomatonError("no initial state")
    catalog = Catalog.from_header(header) if "formula" in header else None
    if catalog is not None and "pool" in header and tuple(header["pool"][0].split()) != catalog.pool:
        raise AutomatonError("constant pool does not match the formula's width")
    trans = []
    for lineno, (q, pat, direction, p) in raw_trans:
        if q not in owner or p not in owner:
            raise AutomatonError(f"line {lineno}: unknown state")
        if direction not in (STAY, MOVE):
            raise AutomatonError(f"line {lineno}: direction must be stay or move")
        try:
            trans.append(Transition(q, parse_pattern(pat, catalog), direction, p))
        except ValueError as exc:
            raise AutomatonError(f"line {lineno}: {exc}") from None
    if catalog is not None:
        from .compiler import letter_check
        alphabet, coherent = PhiAlphabet(catalog), (lambda g: letter_check(catalog, g))
    else:
        alphabet, coherent = ExplicitAlphabet(letters), None
    return AlternatingAutomaton(tuple(states), owner, rank, initial, tuple(trans), alphabet, coherent)


# -- acceptance --------------------------------------------------------------

def acceptance_game(a: AlternatingAutomaton, g: LabelledGraph, v0=None,
                    reachable_only: bool = False, starts: Iterable | None = None) -> ParityGame:
    """Product arena nodes(g) x Q.  With ``reachable_only`` only positions
    reachable from (v, q_I) for v in ``starts`` (default: v0) are built."""
    if v0 is None:
        v0 = g.start if g.start is not None else (g.nodes[0] if g.nodes else None)
    if v0 not in set(g.nodes):
        raise AutomatonError(f"start node {v0!r} is not in the graph")
    labels = g.labels
    checked: set = set()

    def moves(v, q):
        if v not in checked:
            a.alphabet.check(labels[v])
            checked.add(v)
        out = []
        for direction, p in a.delta(q, labels[v]):
            if direction == STAY:
                out.append((v, p))
            else:
                out.extend((w, p) for w in g.neighbours(v))
        return out

    edges = []
    if reachable_only:
        roots = [v0] if starts is None else list(starts)
        seen = {(v, a.initial) for v in roots}
        todo = list(seen)
        while todo:
            pos = todo.pop()
            for nxt in moves(*pos):
                edges.append((pos, nxt))
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        positions = sorted(seen, key=repr)
    else:
        positions = [(v, q) for v in g.nodes for q in a.states]
        for pos in positions:
            edges.extend((pos, nxt) for nxt in moves(*pos))
    owner = {pos: a.owner[pos[1]] for pos in positions}
    rank = {pos: a.rank[pos[1]] for pos in positions}
    return ParityGame(tuple(positions), owner, rank, frozenset(edges), (v0, a.initial))


def accepting_nodes(a: AlternatingAutomaton, g: LabelledGraph, starts: Iterable | None = None) -> dict:
    """Start node -> accepted?, from one solve of the jointly reachable arena."""
    starts = list(g.nodes if starts is None else starts)
    if not starts:
        return {}
    game = acceptance_game(a, g, starts[0], reachable_only=True, starts=starts)
    winner = solve(game).winner
    return {v: winner[(v, a.initial)] == EXISTS for v in starts}


def accepts(a: AlternatingAutomaton, g: LabelledGraph, v0=None) -> bool:
    if v0 is None:
        v0 = g.start if g.start is not None else g.nodes[0]
    return accepting_nodes(a, g, [v0])[v0]


@dataclass(frozen=True)
class NonemptinessResult:
    witness: tuple | None  # (graph, start node)
    examined: int
    bound: int

    @property
    def found(self) -> bool:
        return self.witness is not None

    def __str__(self):
        if self.found:
            return f"accepted instance found ({len(self.witness[0].nodes)} nodes)"
        return f"none found up to {self.bound} nodes ({self.examined} rooted graphs examined)"


def bounded_nonemptiness(a: AlternatingAutomaton, max_nodes: int, letters) -> NonemptinessResult:
    """Search connected letter-labelled graphs up to isomorphism, every start
    orbit.  Acceptance only depends on the start node's component, so
    disconnected graphs add nothing."""
    examined = 0
    for g in enumerate_graphs(max_nodes, letters, connected=True):
        reps = rooted_representatives(g)
        verdict = accepting_nodes(a, g, reps)
        for v in reps:
            examined += 1
            if verdict[v]:
                return NonemptinessResult((LabelledGraph(g.nodes, g.edges, g.labels, v), v),
                                          examined, max_nodes)
    return NonemptinessResult(None, examined, max_nodes)
