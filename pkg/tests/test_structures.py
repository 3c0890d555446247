import itertools
import random

import pytest
from hypothesis import given, strategies as st
from support import kt_eval

from gfx.corpus import (F_INF, FormulaGen, OPEN_FORMULAS, SENTENCES, SIG, corpus_structures,
                        random_structure)
from gfx.logic import Fixpoint, Neg, Signature, free_vars, nnf, parse_formula, walk, width
from gfx.structures import (
    AtomicType, Evaluator, EvaluationError, StructureError, atomic_type, canonical_key,
    disjoint_union, enumerate_structures, evaluate, guarded_sets, is_guarded, make_structure,
    maximal_guarded_sets, normalize_width, parse_structure,
)

E2 = Signature({"E": 2})
STRUCTS = corpus_structures()
seeds = st.integers(min_value=0, max_value=10 ** 9)


def fs(*sets):
    return {frozenset(s) for s in sets}


def test_parse_example():
    s = parse_structure("sig E 2; elem a; elem b; atom E a b")
    assert s.universe == ("a", "b") and s.facts() == [("E", ("a", "b"))]


def test_parse_empty_atom_section():
    s = parse_structure("sig E 2\nsig P 1\nelem a\n")
    assert s.facts() == [] and s.tables == {"E": frozenset(), "P": frozenset()}


@pytest.mark.parametrize("text, match", [
    ("sig E 2\nelem a\natom E a c", "before declaration"),
    ("sig E 2\n", "empty universe"),
    ("sig E 2\nelem a\natom E a", "arity"),
    ("sig E 2\nelem a\natom R a a", "unknown relation"),
    ("sig E 2\nelem a a", "twice"),
    ("sig E x", "sig NAME ARITY"),
    ("frobnicate", "unknown statement"),
])
def test_parse_errors(text, match):
    with pytest.raises(StructureError, match=match):
        parse_structure(text)


def test_parse_error_reports_line():
    with pytest.raises(StructureError) as info:
        parse_structure("sig E 2\nelem a\n\natom E a zz\n")
    assert "4" in str(info.value)


@pytest.mark.parametrize("name", sorted(STRUCTS))
def test_print_parse_roundtrip(name):
    s = STRUCTS[name]
    t = parse_structure(s.to_text())
    assert t.universe == s.universe and t.facts() == s.facts() and t.sig == s.sig


def test_guarded_sets_examples():
    assert guarded_sets(make_structure([("E", ("a", "b"))])) == fs("a", "b", "ab")
    assert guarded_sets(make_structure([("E", ("a", "a"))])) == fs("a")
    chain = make_structure([("E", ("a", "b")), ("E", ("b", "c"))])
    assert guarded_sets(chain) == fs("a", "b", "c", "ab", "bc")
    assert not is_guarded(chain, "ac")
    assert maximal_guarded_sets(chain) == fs("ab", "bc")


def test_isolated_elements_are_not_guarded():
    s = make_structure([("E", ("a", "b"))], universe=("a", "b", "c"))
    assert frozenset("c") not in guarded_sets(s)


def test_atomic_type_examples():
    s = make_structure([("E", ("a", "b"))])
    assert atomic_type(s, ("a", "b")).facts == {("E", (0, 1))}
    assert atomic_type(s, ("b", "a")).facts == {("E", (1, 0))}
    assert atomic_type(s, ("a",)).facts == frozenset()
    with pytest.raises(StructureError):
        atomic_type(s, ("a", "a"))


def test_atomic_type_named_roundtrip():
    t = AtomicType.from_named(("k1", "k2"), [("E", ("k2", "k1"))])
    assert t.named_facts() == {("E", ("k2", "k1"))}
    assert t.restrict({"k1"}) == frozenset()


def test_evaluate_examples():
    loop = make_structure([("E", ("a", "a"))])
    assert evaluate(loop, parse_formula("exists x y . (E(x,y) & true)"), {})
    assert not evaluate(loop, parse_formula(F_INF), {})
    chain = make_structure([("E", ("a", "b"))])
    wf = parse_formula("[lfp Z(z) . forall v . (E(v,z) -> Z(v))](x)")
    assert evaluate(chain, wf, {"x": "a"}) and evaluate(chain, wf, {"x": "b"})
    assert not evaluate(loop, wf, {"x": "a"})


def test_evaluate_needs_total_valuation():
    with pytest.raises(EvaluationError):
        evaluate(make_structure([("E", ("a", "b"))]), parse_formula("E(x,y)"), {"x": "a"})


def test_normalize_width_examples():
    sig = Signature({"E": 2, "R": 3})
    binary = make_structure([("E", ("a", "b"))], sig=sig)
    assert normalize_width(binary, 2).facts() == binary.facts()
    wide = make_structure([("R", ("a", "b", "c")), ("R", ("a", "a", "b"))], sig=sig)
    assert normalize_width(wide, 2).facts() == [("R", ("a", "a", "b"))]


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_structures(E2, 1)) == 2
    by_size = [sum(1 for s in enumerate_structures(E2, 2) if len(s.universe) == k) for k in (1, 2)]
    assert by_size == [2, 10]          # Burnside: (16 + 4) / 2 on two elements
    assert sum(1 for _ in enumerate_structures(E2, 2, up_to_iso=False)) == 2 + 16


def test_enumeration_size_three_matches_canonical_keys():
    reps = list(enumerate_structures(E2, 3))
    keys = {canonical_key(s) for s in reps}
    assert len(keys) == len(reps) == 2 + 10 + 104
    every = {canonical_key(s) for s in enumerate_structures(E2, 3, up_to_iso=False)}
    assert keys == every


def test_enumeration_unary_and_binary():
    reps = list(enumerate_structures(Signature({"E": 2, "P": 1}), 2))
    assert len({canonical_key(s) for s in reps}) == len(reps)


def _corpus_cases():
    for name, s in STRUCTS.items():
        for text in SENTENCES.values():
            yield s, parse_formula(text), {}
        for names, group in OPEN_FORMULAS.items():
            for text in group:
                f = parse_formula(text)
                for img in itertools.product(s.universe, repeat=len(names)):
                    yield s, f, dict(zip(names, img))


CASES = list(_corpus_cases())


def test_isomorphism_invariance_on_corpus():
    rng = random.Random(7)
    for s, f, val in CASES:
        perm = list(s.universe)
        rng.shuffle(perm)
        ren = dict(zip(s.universe, perm))
        assert evaluate(s, f, val) == evaluate(s.rename(ren), f, {x: ren[a] for x, a in val.items()})


@given(seeds)
def test_isomorphism_invariance_generated(seed):
    rng = random.Random(seed)
    f = FormulaGen().sentence(rng)
    s = random_structure(rng, max_size=4)
    perm = list(s.universe)
    rng.shuffle(perm)
    assert evaluate(s, f) == evaluate(s.rename(dict(zip(s.universe, perm))), f)


def test_nnf_preserves_truth_on_corpus():
    for s, f, val in CASES:
        assert evaluate(s, nnf(f), val) == evaluate(s, f, val)


def test_duality_on_corpus():
    for s, f, val in CASES:
        if any(isinstance(g, Fixpoint) for g in walk(f)):
            assert evaluate(s, nnf(Neg(f)), val) == (not evaluate(s, f, val))


@given(seeds)
def test_duality_generated(seed):
    rng = random.Random(seed)
    f = FormulaGen(fixpoint_prob=0.6).sentence(rng)
    s = random_structure(rng, max_size=3)
    assert evaluate(s, nnf(Neg(f))) == (not evaluate(s, f))


def test_width_normalisation_preserves_truth():
    sig = Signature({"E": 2, "R": 3})
    formulas = [parse_formula(t, sig) for t in (
        "exists x y . (E(x,y) & !E(y,x))",
        "forall x y . (E(x,y) -> exists z . (E(y,z) & !E(z,y)))",
        "exists x . (R(x,x,x) & true)",
        "forall x y . (R(x,x,y) -> E(x,y))",
        "exists x . (E(x,x) & [lfp Z(z) . exists v . (E(z,v) & (R(v,v,v) | Z(v)))](x))",
    )]
    rng = random.Random(11)
    for _ in range(200):
        s = random_structure(rng, sig, max_size=3, density=0.3)
        for f in formulas:
            n = width(f)
            assert evaluate(normalize_width(s, n), f) == evaluate(s, f)


@given(seeds)
def test_evaluator_matches_definitional_oracle(seed):
    rng = random.Random(seed)
    f = FormulaGen(max_size=18, fixpoint_prob=0.5).sentence(rng)
    binary = any(isinstance(g, Fixpoint) and len(g.params) > 1 for g in walk(f))
    s = random_structure(rng, max_size=2 if binary else 3)
    assert evaluate(s, f) == kt_eval(s, f, {})


def test_evaluator_matches_oracle_on_corpus():
    small = [(s, f, v) for s, f, v in CASES if len(s.universe) <= 3]
    for s, f, val in small:
        assert evaluate(s, f, val) == kt_eval(s, f, val)


def _positive_bodies():
    texts = [t for t in SENTENCES.values()] + [t for g in OPEN_FORMULAS.values() for t in g]
    for t in texts:
        for g in walk(parse_formula(t)):
            if isinstance(g, Fixpoint) and not (free_vars(g.body) - set(g.params)):
                yield g


@pytest.mark.parametrize("fix", list(_positive_bodies()), ids=lambda g: g.var + str(g.params))
def test_one_step_operator_is_monotone(fix):
    rng = random.Random(3)
    ev = Evaluator(STRUCTS["lasso"])
    s = ev.s
    space = list(itertools.product(s.universe, repeat=len(fix.params)))

    def step(rel):
        return {t for t in space if ev.holds(fix.body, dict(zip(fix.params, t)), {fix.var: rel})}

    for _ in range(40):
        small = frozenset(t for t in space if rng.random() < 0.4)
        big = small | frozenset(t for t in space if rng.random() < 0.4)
        assert step(small) <= step(big)


def test_disjoint_union_embeddings():
    a = STRUCTS["edge"]
    u, left, right = disjoint_union(a, a)
    assert len(u.universe) == 4 and len(u.facts()) == 2
    assert u.holds("E", (left["a"], left["b"])) and u.holds("E", (right["a"], right["b"]))


def test_structure_rejects_bad_tables():
    with pytest.raises(StructureError):
        make_structure([("E", ("a", "b"))], universe=("a",), sig=E2)
    with pytest.raises(StructureError):
        make_structure([("E", ("a",))], sig=E2)


def test_signature_of_corpus():
    assert all(s.sig == SIG for s in STRUCTS.values())
