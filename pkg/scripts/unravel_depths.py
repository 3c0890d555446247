"""Decode depth-d unravellings of model tabloids and test guarded bisimilarity
of every decoded guarded tuple with its image in the model."""
import time
from dataclasses import dataclass

from _config import emit, parse_config

from gfx.bisim import guarded_tuples, max_guarded_bisim
from gfx.corpus import corpus_structures
from gfx.tabloids import decode, tabloid_of_model, unravel


@dataclass
class Config:
    """Depth sweep over the structure corpus."""
    max_depth: int = 2
    width: int = 2


def main(cfg: Config):
    for name, a in sorted(corpus_structures().items()):
        g = tabloid_of_model(a, cfg.width)
        v = g.nodes[len(g.nodes) // 2]
        for d in range(1, cfg.max_depth + 1):
            start = time.perf_counter()
            tree, _ = unravel(g, v, d)
            b, elem = decode(tree, a.sig)
            h = {}
            for (w, c), e in elem.items():
                h[e] = {k: x for x, k in tree.injections[w].items()}[c]
            z = max_guarded_bisim(b, a)
            tuples = guarded_tuples(b)
            good = sum(z.find({x: h[x] for x in t}) is not None for t in tuples)
            emit(structure=name, depth=d, decoded_elements=len(b.universe), tuples=len(tuples),
                 bisimilar=good, seconds=round(time.perf_counter() - start, 2))


if __name__ == "__main__":
    main(parse_config(Config))
