"""Bounded finite-model search, directly or through the compiled automaton."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice

from .automata import accepts
from .compiler import CompiledAutomaton, compile
from .logic import Formula, Signature, free_vars, relations, validate_guarded
from .structures import Structure, enumerate_structures, evaluate, normalize_width
from .tabloids import model_graph

MODES = ("direct", "automaton")
MODEL_FOUND, NONE_UP_TO_BOUND = "model-found", "none-up-to-bound"


class FinSatError(ValueError):
    pass


@dataclass(frozen=True)
class FinSatVerdict:
    outcome: str
    model: Structure | None
    bound: int
    mode: str
    candidates: int
    elapsed: float

    @property
    def found(self) -> bool:
        return self.outcome == MODEL_FOUND

    def __str__(self):
        if self.found:
            return f"model found with {len(self.model.universe)} element(s)"
        return (f"no model with at most {self.bound} elements "
                "(bounded search only, not a proof of finite unsatisfiability)")

    def as_dict(self) -> dict:
        out = {"outcome": self.outcome, "bound": self.bound, "mode": self.mode,
               "candidates": self.candidates, "elapsed": round(self.elapsed, 3)}
        if self.model is not None:
            out["model"] = self.model.to_text()
        return out


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("GFX_THREADS", "1")))
    except ValueError:
        return 1


def automaton_check(compiled: CompiledAutomaton, a: Structure, f: Formula) -> bool:
    """Acceptance of G_phi(a) from its first vertex; atomless candidates have no
    tabloid and are evaluated directly."""
    a = normalize_width(a, compiled.width)
    if not a.facts():
        return evaluate(a, f, {})
    g, _ = model_graph(a, compiled.catalog, lazy=True)
    return accepts(compiled.automaton, g, g.nodes[0])


def finsat_bounded(f: Formula, max_size: int = 4, mode: str = "direct",
                   sig: Signature | None = None) -> FinSatVerdict:
    if mode not in MODES:
        raise FinSatError(f"mode must be one of {MODES}")
    if max_size < 1:
        raise FinSatError("max size must be at least 1")
    report = validate_guarded(f, strict=True)
    if not report.ok or free_vars(f):
        raise FinSatError(f"not a strict guarded sentence: {report}")
    sig = sig or Signature(relations(f))
    if mode == "direct":
        def check(a):
            return evaluate(a, f, {})
    else:
        compiled = compile(f)

        def check(a):
            return automaton_check(compiled, a, f)

    start = time.perf_counter()
    candidates = 0
    workers = worker_count()
    stream = enumerate_structures(sig, max_size)
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while True:
            chunk = list(islice(stream, 64 if pool else 1))
            if not chunk:
                break
            results = list(pool.map(check, chunk)) if pool else [check(chunk[0])]
            for a, ok in zip(chunk, results):
                candidates += 1
                if ok:
                    if not evaluate(a, f, {}):
                        raise FinSatError("internal error: accepted candidate is not a model")
                    return FinSatVerdict(MODEL_FOUND, a, max_size, mode, candidates,
                                         time.perf_counter() - start)
    finally:
        if pool:
            pool.shutdown()
    return FinSatVerdict(NONE_UP_TO_BOUND, None, max_size, mode, candidates,
                         time.perf_counter() - start)
