"""State counts of compiled automata against |phi| * (2n+1)^n * L."""
from dataclasses import dataclass

from _config import emit, parse_config

from gfx.compiler import STATE_CONSTANT, compile
from gfx.corpus import SENTENCES, nested_sentence
from gfx.logic import parse_formula


@dataclass
class Config:
    """Measure the state-size constant C."""
    max_nesting: int = 8


def main(cfg: Config):
    rows = [(f"nested-{k}", compile(nested_sentence(k))) for k in range(cfg.max_nesting + 1)]
    rows += [(name, compile(parse_formula(text))) for name, text in SENTENCES.items()]
    worst = 0.0
    for name, c in rows:
        shape = c.formula_size * (2 * c.width + 1) ** c.width * c.literal_count
        worst = max(worst, c.state_count / shape)
        emit(name=name, size=c.formula_size, width=c.width, literals=c.literal_count,
             states=c.state_count, ratio=round(c.state_count / shape, 4))
    emit(event="summary", largest_ratio=round(worst, 4), recorded_constant=STATE_CONSTANT,
         holds=worst <= STATE_CONSTANT)


if __name__ == "__main__":
    main(parse_config(Config))
