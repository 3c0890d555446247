"""Bounded searches around the infinity axiom and the 3-colouring automaton."""
import time
from dataclasses import dataclass

from _config import emit, parse_config

from gfx.automata import bounded_nonemptiness
from gfx.corpus import F_INF, F_SINKLESS, infinity_automaton
from gfx.finsat import MODES, finsat_bounded
from gfx.logic import parse_formula


@dataclass
class Config:
    """finsat on F_inf and its sinkless variant; non-emptiness of the colouring automata."""
    max_size: int = 4
    max_nodes: int = 4


def main(cfg: Config):
    for name, text in (("F_inf", F_INF), ("sinkless", F_SINKLESS)):
        for mode in MODES:
            v = finsat_bounded(parse_formula(text), cfg.max_size, mode)
            emit(formula=name, **v.as_dict())
    variants = {"full": infinity_automaton(),
                "no-well-foundedness": infinity_automaton(check_well_founded=False),
                "no-forward-walk": infinity_automaton(check_forward=False),
                "colouring-only": infinity_automaton(False, False)}
    for name, aut in variants.items():
        start = time.perf_counter()
        res = bounded_nonemptiness(aut, cfg.max_nodes, "012")
        emit(automaton=name, found=res.found, examined=res.examined,
             witness_nodes=len(res.witness[0].nodes) if res.found else None,
             seconds=round(time.perf_counter() - start, 2))


if __name__ == "__main__":
    main(parse_config(Config))
