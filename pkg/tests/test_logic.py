import random

import pytest
from hypothesis import given, strategies as st

from gfx.corpus import F_INF, FormulaGen, OPEN_FORMULAS, SENTENCES
from gfx.logic import (
    TRUE, Conj, Disj, ExistsGuarded, FixVarAtom, Fixpoint, ForallGuarded, FormulaError, Gfp,
    Lfp, Neg, RelAtom, Signature, TruthConst, free_vars, is_nnf, is_sentence, load_formula,
    nnf, parse_formula, rename_fixvars_apart, subformulas, to_text, validate_guarded, variables,
    walk, width,
)

E2 = Signature({"E": 2})
CORPUS = list(SENTENCES.values()) + [t for group in OPEN_FORMULAS.values() for t in group]

seeds = st.integers(min_value=0, max_value=10 ** 9)
sentences = seeds.map(lambda s: FormulaGen(fixpoint_prob=0.4).sentence(random.Random(s)))

VARS = st.sampled_from(["x", "y", "z"])
leaves = st.one_of(
    st.builds(lambda a, b: RelAtom("E", (a, b)), VARS, VARS),
    st.builds(lambda a: RelAtom("P", (a,)), VARS),
    st.booleans().map(TruthConst),
)


def _extend(inner):
    guard = st.builds(lambda a, b: RelAtom("E", (a, b)), VARS, VARS)
    bound = st.lists(VARS, min_size=1, max_size=2, unique=True).map(tuple)
    return st.one_of(
        st.builds(Conj, inner, inner), st.builds(Disj, inner, inner), st.builds(Neg, inner),
        st.builds(ExistsGuarded, bound, guard, inner), st.builds(ForallGuarded, bound, guard, inner),
    )


asts = st.recursive(leaves, _extend, max_leaves=12)


def test_parse_guarded_existence():
    assert parse_formula("exists x y . (E(x,y) & true)") == ExistsGuarded(
        ("x", "y"), RelAtom("E", ("x", "y")), TRUE)


def test_infinity_axiom_has_one_lfp():
    f = parse_formula(F_INF)
    assert sum(isinstance(g, Lfp) for g in walk(f)) == 1
    assert not any(isinstance(g, Gfp) for g in walk(f))


def test_arity_mismatch_against_signature():
    with pytest.raises(FormulaError, match="arity"):
        parse_formula("E(x)", E2)


def test_unknown_relation_against_signature():
    with pytest.raises(FormulaError, match="unknown relation"):
        parse_formula("exists x . (R(x) & true)", E2)


def test_syntax_error_position():
    with pytest.raises(FormulaError) as info:
        parse_formula("exists x . (E(x,x) &\n   ?)")
    assert (info.value.line, info.value.column) == (2, 4)


@pytest.mark.parametrize("text", ["x = y", "E(x,y) = E(y,x)", "exists x . (E(x,x) & x = x)"])
def test_equality_rejected(text):
    with pytest.raises(FormulaError, match="equality"):
        parse_formula(text)


def test_unbound_fixpoint_arity_checked():
    with pytest.raises(FormulaError, match="parameters"):
        parse_formula("[lfp Z(z) . P(z) & Z(z,z)](x)")


def test_comments_and_sig_header():
    f, sig = load_formula("# axiom\nsig E 2\nsig P 1\nexists x . (E(x,x) & true)  # loop\n")
    assert sig == Signature({"E": 2, "P": 1})
    assert to_text(f) == "exists x . (E(x,x) & true)"


def test_validate_accepts_infinity_axiom():
    assert validate_guarded(parse_formula(F_INF)).ok


@pytest.mark.parametrize("text, kind", [
    ("[lfp Z(z) . P(z) & exists x . (Z(x) & true)](u)", "fixpoint-guard"),
    ("[lfp Z(z) . P(z) & !Z(z)](x)", "positivity"),
    ("exists x . (P(x) & E(x,y))", "unguarded-var"),
])
def test_validate_seeded_violations(text, kind):
    report = validate_guarded(parse_formula(text))
    assert not report.ok and report.verdict == "failed"
    assert kind in report.kinds()


def test_strict_mode_needs_explicit_parameter_guards():
    f = parse_formula("[lfp Z(z) . exists v . (E(v,z) & Z(v))](x)")
    assert validate_guarded(f, strict=True).ok
    g = parse_formula("[lfp Z(z) . P(z) | Z(z)](x)")
    assert "unguarded-params" in validate_guarded(g, strict=True).kinds()
    assert validate_guarded(g, strict=False).ok


def test_report_ok_iff_no_diagnostics():
    for text in CORPUS:
        r = validate_guarded(parse_formula(text), strict=False)
        assert r.ok == (not r.diagnostics)


@pytest.mark.parametrize("text, n", [
    ("exists x y . (E(x,y) & true)", 2),
    (F_INF, 2),
    ("exists x y z . (R(x,y,z) & true)", 3),
    ("true", 0),
])
def test_width_examples(text, n):
    assert width(parse_formula(text)) == n


def test_nnf_quantifier_duality():
    f = parse_formula("!(exists x y . (E(x,y) & P(x)))")
    assert nnf(f) == parse_formula("forall x y . (E(x,y) -> !P(x))")


def test_nnf_fixpoint_duality():
    f = parse_formula("!([lfp Z(z) . P(z) | exists v . (E(z,v) & Z(v))](x))")
    want = parse_formula("[gfp Z(z) . !P(z) & forall v . (E(z,v) -> Z(v))](x)")
    assert nnf(f) == want


@pytest.mark.parametrize("text", CORPUS)
def test_nnf_idempotent_and_width_preserving(text):
    f = parse_formula(text)
    g = nnf(f)
    assert is_nnf(g) and nnf(g) == g
    assert width(g) == width(f)


@given(sentences)
def test_nnf_on_generated(f):
    g = nnf(f)
    assert is_nnf(g) and nnf(g) == g and width(g) == width(f)
    # dualising (E & psi) leaves a disjunct !E without a positive guard, so
    # explicit guardedness of parameters is not kept; the rest is
    assert validate_guarded(g, strict=False).ok


def test_subformulas_of_true():
    assert subformulas(TRUE) == [TRUE]


def test_subformulas_contain_literals():
    f = parse_formula("exists x y . (E(x,y) & true)")
    subs = subformulas(f)
    assert f in subs and TRUE in subs and RelAtom("E", ("x", "y")) in subs
    for a in ("x", "y"):
        for b in ("x", "y"):
            assert RelAtom("E", (a, b)) in subs and Neg(RelAtom("E", (a, b))) in subs
    assert len(subs) == len(set(subs))


def test_subformula_count_of_infinity_axiom_is_stable():
    # golden value, hand count: 12 distinct syntactic subformulas (3 of them
    # E-atoms) plus 2 * 5^2 signed E-literals over x, y, z, v, w
    f = parse_formula(F_INF)
    syntactic = list(dict.fromkeys(walk(f)))
    assert len(syntactic) == 12 and len(variables(f)) == 5
    assert len(subformulas(f)) == 12 + 2 * 25 - 3 == 59


def test_free_vars():
    assert free_vars(parse_formula("E(x,y)")) == {"x", "y"}
    assert free_vars(parse_formula(F_INF)) == frozenset()
    f = parse_formula("[lfp Z(z) . E(z,y) & exists v . (E(v,z) & Z(v))](x)")
    assert free_vars(f) == {"x", "y"}


@given(sentences)
def test_generated_sentences_are_closed(f):
    assert is_sentence(f) and validate_guarded(f, strict=True).ok and width(f) <= 2


@given(sentences)
def test_roundtrip_generated(f):
    assert parse_formula(to_text(f)) == f


@given(asts)
def test_roundtrip_arbitrary_ast(f):
    assert parse_formula(to_text(f)) == f


@pytest.mark.parametrize("text", CORPUS)
def test_roundtrip_corpus(text):
    f = parse_formula(text)
    assert parse_formula(to_text(f)) == f


@given(sentences)
def test_rename_apart_gives_distinct_binders(f):
    g = rename_fixvars_apart(nnf(f))
    names = [h.var for h in walk(g) if isinstance(h, Fixpoint)]
    assert len(names) == len(set(names))
    for h in walk(g):
        if isinstance(h, Fixpoint):
            used = {a.var for a in walk(h.body) if isinstance(a, FixVarAtom)}
            assert used <= set(names)
