"""Compiled automaton vs model checker on generated (sentence, structure) pairs."""
import random
import time
from dataclasses import asdict, dataclass

from _config import emit, parse_config

from gfx.automata import accepting_nodes
from gfx.compiler import compile
from gfx.corpus import FormulaGen, random_structure
from gfx.logic import to_text, width
from gfx.structures import evaluate, normalize_width
from gfx.tabloids import model_graph


@dataclass
class Config:
    """Pipeline differential over random pairs."""
    pairs: int = 500
    seed: int = 2024
    max_structure: int = 4
    max_formula: int = 25
    max_width: int = 2
    fixpoint_prob: float = 0.3


def main(cfg: Config):
    rng = random.Random(cfg.seed)
    gen = FormulaGen(cfg.max_formula, cfg.max_width, cfg.fixpoint_prob)
    start = time.perf_counter()
    true_count = bad = 0
    for i in range(cfg.pairs):
        f = gen.sentence(rng)
        n = max(1, width(f))
        a = random_structure(rng, max_size=cfg.max_structure)
        while not normalize_width(a, n).facts():
            a = random_structure(rng, max_size=cfg.max_structure)
        c = compile(f)
        truth = evaluate(a, f, {})
        g, _ = model_graph(a, c.catalog)
        verdict = accepting_nodes(c.automaton, g)
        true_count += truth
        if any(v != truth for v in verdict.values()):
            bad += 1
            emit(event="disagreement", index=i, formula=to_text(f), structure=a.to_text())
    emit(event="summary", config=asdict(cfg), pairs=cfg.pairs, true=true_count,
         disagreements=bad, seconds=round(time.perf_counter() - start, 1))


if __name__ == "__main__":
    main(parse_config(Config))
