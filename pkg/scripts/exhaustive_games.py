"""Zielonka vs brute force on every game up to a size, plus a cost estimate."""
import itertools
import time
from dataclasses import dataclass

from _config import emit, parse_config

from gfx.games import EXISTS, FORALL, ParityGame, brute_solve, check_strategy, solve


@dataclass
class Config:
    """Exhaustive parity-solver comparison."""
    max_positions: int = 3
    max_rank: int = 3


def games(n, max_rank):
    pos = tuple(range(n))
    slots = [(a, b) for a in pos for b in pos]
    for owners in itertools.product((EXISTS, FORALL), repeat=n):
        for ranks in itertools.product(range(max_rank + 1), repeat=n):
            for mask in range(1 << len(slots)):
                edges = frozenset(s for i, s in enumerate(slots) if mask >> i & 1)
                yield ParityGame(pos, dict(zip(pos, owners)), dict(zip(pos, ranks)), edges, 0)


def main(cfg: Config):
    rate = None
    for n in range(1, cfg.max_positions + 1):
        start = time.perf_counter()
        count = bad = 0
        for g in games(n, cfg.max_rank):
            s, b = solve(g), brute_solve(g)
            count += 1
            if s.winner != b.winner or check_strategy(g, s) or check_strategy(g, b):
                bad += 1
                emit(event="discrepancy", game=g.to_text())
        secs = time.perf_counter() - start
        rate = count / secs
        emit(positions=n, games=count, discrepancies=bad, seconds=round(secs, 1))
    for n in range(cfg.max_positions + 1, 6):
        total = 2 ** n * (cfg.max_rank + 1) ** n * 2 ** (n * n)
        emit(positions=n, games=total, estimated_hours=round(total / rate / 3600, 1))


if __name__ == "__main__":
    main(parse_config(Config))
