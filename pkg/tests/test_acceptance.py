"""Acceptance criteria 1-9.  Each test records one PASS/FAIL line, printed in
the terminal summary (and to stdout under ``-s``)."""
import random
import time

from support import PairGen, all_games, game_count, random_game, record

from gfx.automata import accepting_nodes, bounded_nonemptiness
from gfx.bisim import guarded_bisimilar, guarded_tuples, max_guarded_bisim
from gfx.compiler import STATE_CONSTANT, compile
from gfx.corpus import (F_INF, F_SINKLESS, OPEN_FORMULAS, SENTENCES, corpus_structures,
                        directed_cycle, hand_automata, infinity_automaton, nested_sentence,
                        random_graph, random_lift, random_structure)
from gfx.finsat import MODES, finsat_bounded
from gfx.games import brute_solve, check_strategy, solve
from gfx.logic import Signature, nnf, parse_formula, width
from gfx.structures import disjoint_union, evaluate, make_structure, normalize_width
from gfx.tabloids import decode, make_tabloid, model_graph, tabloid_of_model, validate_tabloid

STRUCTS = corpus_structures()
OPEN = {names: [parse_formula(t) for t in group] for names, group in OPEN_FORMULAS.items()}
CLOSED = [parse_formula(t) for t in SENTENCES.values()]


def test_criterion_1_pipeline_differential():
    start = time.perf_counter()
    pairs = disagreements = 0
    for f, a in PairGen(seed=2024).pairs(500):
        c = compile(f)
        truth = evaluate(a, f, {})
        g, _ = model_graph(a, c.catalog)
        verdict = accepting_nodes(c.automaton, g)
        pairs += 1
        disagreements += sum(v != truth for v in verdict.values()) > 0
    elapsed = time.perf_counter() - start
    ok = pairs >= 500 and disagreements == 0 and elapsed < 600
    assert record(1, ok, f"{pairs} pairs, every start node, {disagreements} disagreements, "
                         f"{elapsed:.0f}s")


def test_criterion_2_infinity_axiom():
    start = time.perf_counter()
    inf = [finsat_bounded(parse_formula(F_INF), 4, m) for m in MODES]
    sinkless = [finsat_bounded(parse_formula(F_SINKLESS), 4, m) for m in MODES]
    elapsed = time.perf_counter() - start
    ok = (all(v.outcome == "none-up-to-bound" and v.bound == 4 for v in inf)
          and all(v.found and len(v.model.universe) == 1 for v in sinkless)
          and elapsed < 60)
    assert record(2, ok, f"F_inf none up to 4 in both modes, sinkless 1-element model, "
                         f"{elapsed:.1f}s")


def test_criterion_3_infinity_automaton():
    start = time.perf_counter()
    res = bounded_nonemptiness(infinity_automaton(), 4, "012")
    elapsed = time.perf_counter() - start
    ok = not res.found and res.examined > 0 and elapsed < 300
    assert record(3, ok, f"{res}, {elapsed:.1f}s")


def _agree(g):
    s, b = solve(g), brute_solve(g)
    return s.winner == b.winner and not check_strategy(g, s) and not check_strategy(g, b)


def test_criterion_4_parity_solver_oracle():
    start = time.perf_counter()
    exhaustive = bad = 0
    for n in (1, 2, 3):
        for g in all_games(n, 3):
            exhaustive += 1
            bad += not _agree(g)
    sampled = 0
    rng = random.Random(4)
    for n in (4, 5):
        for _ in range(20000):
            sampled += 1
            bad += not _agree(random_game(rng, n, 3))
    missing = sum(game_count(n, 3) for n in (4, 5))
    elapsed = time.perf_counter() - start
    # the criterion asks for every game with up to five positions; four and
    # five positions (about 1e12 games) are only sampled
    ok = bad == 0 and missing == 0
    assert record(4, ok, f"{exhaustive} games exhaustive (n <= 3), {sampled} sampled (n = 4, 5), "
                         f"{bad} discrepancies, {missing:.2e} games with 4-5 positions not "
                         f"enumerated, {elapsed:.0f}s")


def _invariance_pairs():
    """(A, tuple, B, tuple) from disjoint-union duplication and hand pairs."""
    for a in STRUCTS.values():
        u, left, right = disjoint_union(a, a)
        for t in guarded_tuples(a):
            if len(t) <= 2:
                yield a, t, u, tuple(left[x] for x in t)
                yield a, t, u, tuple(right[x] for x in t)
    hand = [(STRUCTS["cycle3"], directed_cycle(6)), (directed_cycle(6), directed_cycle(9)),
            (STRUCTS["edge"], STRUCTS["two-edges"]),
            (directed_cycle(3, marked=(0,)), directed_cycle(6, marked=(0, 3)))]
    for a, b in hand:
        z = max_guarded_bisim(a, b)
        for m in z.maps:
            d = m.as_dict()
            t = tuple(sorted(d))
            if len(t) <= 2:
                yield a, t, b, tuple(d[x] for x in t)


def test_criterion_5_guarded_bisimulation_invariance():
    pairs = checks = bad = 0
    for a, ta, b, tb in _invariance_pairs():
        assert guarded_bisimilar(a, ta, b, tb)
        pairs += 1
        for f in CLOSED:
            checks += 1
            bad += evaluate(a, f, {}) != evaluate(b, f, {})
        arg_lists = [(ta, tb)] + ([(ta * 2, tb * 2)] if len(ta) == 1 else [])
        for sa, sb in arg_lists:
            names = ("x",) if len(sa) == 1 else ("x", "y")
            for f in OPEN[names]:
                checks += 1
                bad += (evaluate(a, f, dict(zip(names, sa)))
                        != evaluate(b, f, dict(zip(names, sb))))
    ok = pairs >= 200 and bad == 0
    assert record(5, ok, f"{pairs} bisimilar tuple pairs, {checks} evaluations, {bad} disagreements")


def test_criterion_6_undirected_bisimulation_invariance():
    rng = random.Random(6)
    pairs = bad = 0
    for name, (aut, letters) in sorted(hand_automata().items()):
        for _ in range(25):
            base = random_graph(rng, rng.randint(1, 5), letters, 0.5)
            lift, proj = random_lift(rng, base, rng.randint(2, 3))
            bv, lv = accepting_nodes(aut, base), accepting_nodes(aut, lift)
            pairs += 1
            bad += any(lv[x] != bv[proj[x]] for x in lift.nodes)
    for text in (SENTENCES["edge"], SENTENCES["sinkless"]):
        c = compile(parse_formula(text))
        for a in (STRUCTS["chain3"], STRUCTS["cycle2"], STRUCTS["lasso"]):
            g, _ = model_graph(a, c.catalog)
            lift, proj = random_lift(rng, g, 2)
            bv, lv = accepting_nodes(c.automaton, g), accepting_nodes(c.automaton, lift)
            pairs += 1
            bad += any(lv[x] != bv[proj[x]] for x in lift.nodes)
    ok = pairs >= 100 and bad == 0
    assert record(6, ok, f"{pairs} graph/lift pairs over all start nodes, {bad} disagreements")


def test_criterion_7_state_size_shape():
    family = [compile(nested_sentence(k)) for k in range(0, 9)]
    family += [compile(parse_formula(t)) for t in SENTENCES.values()]
    ratios = [c.state_count / (c.formula_size * (2 * c.width + 1) ** c.width * c.literal_count)
              for c in family]
    ok = all(c.constant == STATE_CONSTANT for c in family) and max(ratios) <= STATE_CONSTANT
    assert record(7, ok, f"C = {STATE_CONSTANT}, {len(family)} sentences, largest ratio "
                         f"{max(ratios):.3f}")


def test_criterion_8_tabloid_construction():
    t = tabloid_of_model(make_structure([("E", ("a", "b"))]), 2)
    one, _ = decode(make_tabloid({"v": ({"k1", "k2"}, [("E", ("k1", "k2"))])}, root="v"))
    two, _ = decode(make_tabloid({"v": ({"k1", "k2"}, [("E", ("k1", "k2"))]),
                                  "w": ({"k2", "k3"}, [("E", ("k2", "k3"))])},
                                 [("v", "w")], root="v"))
    ok = (len(t.nodes) == 20 and validate_tabloid(t).ok
          and one.universe == ("e1", "e2") and one.facts() == [("E", ("e1", "e2"))]
          and two.universe == ("e1", "e2", "e3")
          and two.facts() == [("E", ("e1", "e2")), ("E", ("e2", "e3"))])
    assert record(8, ok, f"{len(t.nodes)} vertices, valid, single-node and path decodings exact")


def test_criterion_9_oracle_cross_checks():
    nnf_bad = checks = 0
    for a in STRUCTS.values():
        for f in CLOSED:
            checks += 1
            nnf_bad += evaluate(a, nnf(f), {}) != evaluate(a, f, {})
        for names, group in OPEN.items():
            for f in group:
                for e in a.universe:
                    val = {x: e for x in names}
                    checks += 1
                    nnf_bad += evaluate(a, nnf(f), val) != evaluate(a, f, val)
    sig = Signature({"E": 2, "P": 1, "R": 3})
    rng = random.Random(9)
    norm_bad = norm_checks = 0
    for _ in range(60):
        s = random_structure(rng, sig, max_size=3, density=0.3)
        for f in CLOSED:
            norm_checks += 1
            norm_bad += evaluate(normalize_width(s, width(f)), f, {}) != evaluate(s, f, {})
    mode_bad = 0
    for f in CLOSED:
        d, m = (finsat_bounded(f, 3, mode) for mode in MODES)
        mode_bad += d.outcome != m.outcome
    ok = nnf_bad == norm_bad == mode_bad == 0
    assert record(9, ok, f"nnf {checks} checks, normalize_width {norm_checks} checks, finsat "
                         f"modes on {len(CLOSED)} sentences up to size 3; "
                         f"{nnf_bad + norm_bad + mode_bad} disagreements")
