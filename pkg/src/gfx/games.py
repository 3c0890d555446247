"""Parity games: Zielonka's recursive solver and an exhaustive oracle.

Conventions: an infinite play is won by Exists iff the largest rank seen
infinitely often is even; a player who must move from a dead end loses.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Hashable, Iterable, Mapping

EXISTS = "exists"
FORALL = "forall"
PLAYERS = (EXISTS, FORALL)


def opponent(player: str) -> str:
    return FORALL if player == EXISTS else EXISTS


class GameError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ParityGame:
    positions: tuple
    owner: Mapping[Hashable, str]
    rank: Mapping[Hashable, int]
    edges: frozenset
    initial: Hashable = None

    def __post_init__(self):
        pos = set(self.positions)
        if len(pos) != len(self.positions):
            raise GameError("duplicate position")
        for a, b in self.edges:
            if a not in pos or b not in pos:
                raise GameError(f"edge {a!r} -> {b!r} references a missing position")
        if self.initial is not None and self.initial not in pos:
            raise GameError(f"initial position {self.initial!r} does not exist")
        for p in self.positions:
            if self.owner.get(p) not in PLAYERS:
                raise GameError(f"position {p!r} has no owner")
            if not isinstance(self.rank.get(p), int) or self.rank[p] < 0:
                raise GameError(f"position {p!r} has no rank")

    @classmethod
    def build(cls, owner: Mapping, rank: Mapping, edges: Iterable, initial=None) -> "ParityGame":
        return cls(tuple(owner), dict(owner), dict(rank), frozenset(edges), initial)

    def successors(self) -> dict:
        succ = {p: [] for p in self.positions}
        for a, b in sorted(self.edges, key=repr):
            succ[a].append(b)
        return succ

    def shifted(self, delta: int) -> "ParityGame":
        return ParityGame(self.positions, self.owner,
                          {p: r + delta for p, r in self.rank.items()}, self.edges, self.initial)

    def to_text(self) -> str:
        ids = {p: i for i, p in enumerate(self.positions)}
        lines = [f"pos {ids[p]} {self.owner[p]} {self.rank[p]}" for p in self.positions]
        lines += [f"edge {a} {b}" for a, b in sorted((ids[a], ids[b]) for a, b in self.edges)]
        if self.initial is not None:
            lines.append(f"init {ids[self.initial]}")
        return "\n".join(lines) + "\n"


def parse_game(text: str) -> ParityGame:
    owner, rank, edges, initial = {}, {}, [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "pos" and len(parts) == 4:
                if parts[2] not in PLAYERS:
                    raise GameError(f"line {lineno}: owner must be exists or forall")
                owner[parts[1]] = parts[2]
                rank[parts[1]] = int(parts[3])
            elif parts[0] == "edge" and len(parts) == 3:
                edges.append((parts[1], parts[2]))
            elif parts[0] == "init" and len(parts) == 2:
                initial = parts[1]
            else:
                raise GameError(f"line {lineno}: cannot parse {raw.strip()!r}")
        except ValueError as exc:
            if isinstance(exc, GameError):
                raise
            raise GameError(f"line {lineno}: {exc}") from None
    return ParityGame.build(owner, rank, edges, initial)


@dataclass(frozen=True)
class Solution:
    winner: Mapping[Hashable, str]
    strategy: Mapping[Hashable, Hashable] = field(default_factory=dict)

    def region(self, player: str) -> set:
        return {p for p, w in self.winner.items() if w == player}


# -- Zielonka ----------------------------------------------------------------

class _Arena:
    """Integer-indexed view of a game; dead ends become losing self-loops."""

    def __init__(self, game: ParityGame):
        self.names = list(game.positions)
        index = {p: i for i, p in enumerate(self.names)}
        n = len(self.names)
        self.succ: list[list[int]] = [[] for _ in range(n)]
        self.pred: list[list[int]] = [[] for _ in range(n)]
        for a, b in game.edges:
            self.succ[index[a]].append(index[b])
            self.pred[index[b]].append(index[a])
        self.owner = [0 if game.owner[p] == EXISTS else 1 for p in self.names]
        self.rank = [game.rank[p] for p in self.names]
        self.dead = set()
        for i in range(n):
            if not self.succ[i]:
                self.dead.add(i)
                self.succ[i].append(i)
                self.pred[i].append(i)
                # Exists stuck: odd rank, Forall stuck: even rank
                self.rank[i] = 1 if self.owner[i] == 0 else 0


def _attractor(arena: _Arena, nodes: set, target: set, player: int, strategy: dict) -> set:
    attr = set(target)
    count = {}
    queue = deque(target)
    while queue:
        v = queue.popleft()
        for u in arena.pred[v]:
            if u not in nodes or u in attr:
                continue
            if arena.owner[u] == player:
                attr.add(u)
                strategy[u] = v
                queue.append(u)
            else:
                left = count.get(u)
                if left is None:
                    left = sum(1 for w in arena.succ[u] if w in nodes)
                left -= 1
                count[u] = left
                if left == 0:
                    attr.add(u)
                    queue.append(u)
    return attr


def _zielonka(arena: _Arena, nodes: set) -> tuple[list[set], dict]:
    # the second recursive call of the textbook version is a tail call; it is a loop here
    result: list[set] = [set(), set()]
    strategy: dict = {}
    while nodes:
        top = max(arena.rank[v] for v in nodes)
        p = top % 2
        q = 1 - p
        heads = {v for v in nodes if arena.rank[v] == top}
        attr_strategy: dict = {}
        attr = _attractor(arena, nodes, heads, p, attr_strategy)
        win, sub = _zielonka(arena, nodes - attr)
        if not win[q]:
            strategy.update(sub)
            strategy.update(attr_strategy)
            for v in heads:
                if arena.owner[v] == p:
                    strategy[v] = next(w for w in arena.succ[v] if w in nodes)
            result[p] |= nodes
            break
        back = _attractor(arena, nodes, win[q], q, strategy)
        for v in win[q]:
            if arena.owner[v] == q:
                strategy[v] = sub[v]
        result[q] |= back
        nodes = nodes - back
    return result, strategy


def solve(game: ParityGame) -> Solution:
    """Winning regions and positional winning strategies (Zielonka's algorithm)."""
    arena = _Arena(game)
    win, strat = _zielonka(arena, set(range(len(arena.names))))
    names = arena.names
    winner = {}
    for player, region in zip(PLAYERS, win):
        for v in region:
            winner[names[v]] = player
    strategy = {}
    for v, w in strat.items():
        if v in arena.dead:
            continue
        player = PLAYERS[arena.owner[v]]
        if winner[names[v]] == player:
            strategy[names[v]] = names[w]
    return Solution(winner, strategy)


# -- exhaustive oracle -------------------------------------------------------

BRUTE_LIMIT = 10


def _sccs(nodes: list, succ: Mapping) -> list[list]:
    """Tarjan's algorithm, iterative."""
    index, low, onstack, stack, out = {}, {}, set(), [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack.add(w)
                    work.append((w, iter(succ[w])))
                    break
                if w in onstack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        onstack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    out.append(comp)
    return out


def _reachable(start, succ) -> set:
    seen = {start}
    todo = [start]
    while todo:
        v = todo.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def _one_player_wins(game: ParityGame, succ: Mapping, player: str) -> set:
    """Positions from which ``player`` wins when every position is theirs to steer
    (the other player's choices are already fixed in ``succ``)."""
    want_even = player == EXISTS
    stuck_bad = [p for p in game.positions if not succ[p] and game.owner[p] != player]
    good_cycle: set = set()
    ranks = sorted(set(game.rank.values()))
    for r in ranks:
        if (r % 2 == 0) != want_even:
            continue
        sub = [p for p in game.positions if game.rank[p] <= r]
        keep = set(sub)
        sub_succ = {p: [w for w in succ[p] if w in keep] for p in sub}
        for comp in _sccs(sub, sub_succ):
            cyclic = len(comp) > 1 or comp[0] in sub_succ[comp[0]]
            if cyclic and any(game.rank[p] == r for p in comp):
                good_cycle.update(comp)
    targets = good_cycle | set(stuck_bad)
    return {p for p in game.positions if _reachable(p, succ) & targets}


def _strategies(game: ParityGame, succ: Mapping, player: str):
    mine = [p for p in game.positions if game.owner[p] == player and succ[p]]
    for choice in product(*(succ[p] for p in mine)):
        fixed = dict(succ)
        for p, w in zip(mine, choice):
            fixed[p] = [w]
        yield dict(zip(mine, choice)), _one_player_wins(game, fixed, opponent(player))


def brute_solve(game: ParityGame) -> Solution:
    """Try every positional strategy of each player against every opposing play
    (lasso analysis on the one-player game that remains)."""
    if len(game.positions) > BRUTE_LIMIT:
        raise GameError(f"brute_solve handles at most {BRUTE_LIMIT} positions")
    succ = game.successors()
    regions = {}
    for player in PLAYERS:
        won: set = set()
        for _, beaten in _strategies(game, succ, player):
            won |= set(game.positions) - beaten
        regions[player] = won
    winner = {}
    for p in game.positions:
        claims = [player for player in PLAYERS if p in regions[player]]
        if len(claims) != 1:
            raise GameError(f"determinacy violated at {p!r}: {claims}")
        winner[p] = claims[0]
    strategy = {}
    for player in PLAYERS:
        # one uniform strategy winning on the whole region exists for parity games
        for choice, beaten in _strategies(game, succ, player):
            if not beaten & regions[player]:
                strategy.update((p, w) for p, w in choice.items() if p in regions[player])
                break
        else:
            raise GameError(f"no uniform positional strategy for {player}")
    return Solution(winner, strategy)


def check_strategy(game: ParityGame, solution: Solution) -> list[str]:
    """Replay each player's strategy against every opponent choice; return problems."""
    problems = []
    succ = game.successors()
    for player in PLAYERS:
        region = solution.region(player)
        restricted = {}
        for p in game.positions:
            if game.owner[p] == player and p in region and succ[p]:
                w = solution.strategy.get(p)
                if w is None or w not in succ[p]:
                    problems.append(f"{player} has no strategy move at {p!r}")
                    restricted[p] = succ[p][:1]
                else:
                    restricted[p] = [w]
            else:
                restricted[p] = list(succ[p])
        for p in region:
            for w in restricted[p]:
                if w not in region:
                    problems.append(f"{player} can be pushed from {p!r} to {w!r}")
        beaten = _one_player_wins(game, restricted, opponent(player)) & region
        for p in sorted(beaten, key=repr):
            problems.append(f"{opponent(player)} beats {player}'s strategy from {p!r}")
    return problems
