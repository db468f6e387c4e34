from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppcem import generate as gen
from ppcem.syntax import parse, show
from ppcem.terms import (
    FAIL,
    WAIT,
    App,
    Case,
    Matchable,
    Matching,
    Name,
    Subst,
    Var,
    alpha_equiv,
    bot,
    canonicalize,
    chain_depth,
    disjoint_union,
    free_matchables,
    free_names,
    free_variables,
    is_canonical,
    multiset_less,
    names,
    size,
    substitute,
    using_bot,
)

x, y, z, w, b, c = names("x", "y", "z", "w", "b", "c")
seeds = st.integers(min_value=0, max_value=10**6)


def fv(src):
    return {str(n) for n in free_variables(parse(src))}


def fm(src):
    return {str(n) for n in free_matchables(parse(src))}


# -- names -----------------------------------------------------------------


def test_names_are_ordered_by_base_then_tag():
    assert Name("a", 3) < Name("b", 0)
    assert Name("x", 0) < Name("x", 1)
    assert {Name("x"), Name("x", 0)} == {Name("x")}


def test_tagged_name_prints_and_reads_back():
    t = Var(Name("x", 4))
    assert show(t) == "x_4"
    assert parse("x_4") == t
    assert parse("x") == Var(Name("x", 0))


def test_duplicate_binders_rejected():
    with pytest.raises(ValueError):
        Case((x, x), Matchable(x), Var(x))


# -- free names --------------------------------------------------------------


def test_fv_case_pattern_and_body():
    assert fv("[x] y ^x -> x") == {"y"}


def test_fv_of_matchable_is_empty():
    assert fv("^x") == set()


def test_fv_matching_collects_body_match_and_pairs():
    assert fv("(x y)[x; {x := z}; (w ~ ^x)]") == {"y", "z", "w"}


def test_fm_pattern_matchables_bound_by_case():
    assert fm("[x] x ^x -> y") == set()


def test_fm_structural_application():
    assert fm("^c @ ^x") == {"c", "x"}


def test_fm_matching_pattern_side_bound():
    assert fm("b[x; {}; (^c ~ ^x)]") == {"c"}


def test_free_names_closed_and_open():
    # the pattern variable and the body matchable stay free
    assert free_names(parse("[x] x ^x -> x ^x")) == frozenset({x})
    assert free_names(parse("[x] ^x -> x")) == frozenset()
    assert {str(n) for n in free_names(parse("y ^x"))} == {"y", "x"}
    assert free_names(bot()) == frozenset()


def test_fv_counts_bindings_even_when_unused():
    assert fv("b[x; {x := u}; ]") == {"b", "u"}


# -- substitution -----------------------------------------------------------


def test_substitute_simple():
    assert substitute(parse("x ^y"), {x: parse("^c")}) == parse("^c ^y")


def test_substitute_renames_capturing_binder():
    out = substitute(parse("[x] ^x -> x y"), {y: Var(x)})
    assert alpha_equiv(out, parse("[x_1] ^x_1 -> x_1 x"))
    assert out.binders == (Name("x", 1),)


def test_substitute_into_matching_pattern_variable():
    out = substitute(parse("b[x; {}; (^c ~ x)]"), {x: parse("^c")})
    assert out == parse("b[x_1; {}; (^c ~ ^c)]")


def test_substitute_leaves_matchables():
    t = parse("[y] ^x ^y -> y")
    assert substitute(t, {x: parse("^c")}) is t


def test_substitute_propagates_into_match_and_pairs():
    out = substitute(parse("b[k; {k := u}; (u ~ ^k)]"), {Name("u"): parse("^d")})
    assert out == parse("b[k; {k := ^d}; (^d ~ ^k)]")


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_substitution_free_names(seed):
    t = gen.em_term(seed)
    sigma = Subst.of({n: Var(Name("fresh", 0)) for n in sorted(free_variables(t))[:2]})
    out = substitute(t, sigma)
    hit = free_variables(t) & sigma.domain()
    expected = (free_names(t) - sigma.domain()) | ({Name("fresh")} if hit else set())
    assert free_names(out) == expected
    assert is_canonical(out)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_substitute_respects_alpha(seed):
    t = gen.em_term(seed)
    renamed = canonicalize(t, avoid=[n for n in free_names(t)] + [Name(v, k) for v in "xyzk" for k in range(20)])
    assert alpha_equiv(t, renamed)
    sigma = {n: parse("^c u") for n in free_variables(t)}
    assert alpha_equiv(substitute(t, sigma), substitute(renamed, sigma))


# -- alpha equivalence --------------------------------------------------------


def test_alpha_binding_example():
    assert alpha_equiv(parse("[x] x ^x -> x ^x"), parse("[y] x ^y -> y ^x"))


def test_alpha_free_vs_bound():
    assert not alpha_equiv(parse("[x] ^x -> x"), parse("[x] ^x -> y"))


def test_alpha_pairs_are_a_multiset():
    t1 = parse("b[x, y; {}; (^c ~ ^x), (^d ~ ^y)]")
    t2 = parse("b[x, y; {}; (^d ~ ^y), (^c ~ ^x)]")
    assert alpha_equiv(t1, t2)
    assert not alpha_equiv(t1, t2, ordered=True)


@settings(max_examples=200, deadline=None)
@given(seeds, seeds)
def test_alpha_is_an_equivalence(s1, s2):
    t1, t2 = gen.em_term(s1), gen.em_term(s2)
    assert alpha_equiv(t1, t1)
    assert alpha_equiv(t1, t2) == alpha_equiv(t2, t1)
    t3 = canonicalize(t1, avoid=list(free_names(t1)) + [Name("x", 99)])
    assert alpha_equiv(t1, t3) and (alpha_equiv(t3, t2) == alpha_equiv(t1, t2))


# -- disjoint union -----------------------------------------------------------


def test_disjoint_union_rules():
    assert disjoint_union(FAIL, WAIT) is FAIL
    assert disjoint_union(WAIT, FAIL) is FAIL
    assert disjoint_union(WAIT, Subst()) is WAIT
    assert disjoint_union(Subst.of({x: Var(y)}), Subst.of({x: Var(z)})) is FAIL
    assert disjoint_union(Subst(), Subst()) == Subst()
    assert disjoint_union(Subst.of({x: Var(y)}), Subst.of({z: Var(w)})) == Subst.of({x: Var(y), z: Var(w)})


def _outcome(k):
    if k == "fail":
        return FAIL
    if k == "wait":
        return WAIT
    return Subst.of({Name(ch): Matchable(c) for ch in k})


@given(st.lists(st.sampled_from(["fail", "wait", "x", "y", "xy", ""]), min_size=2, max_size=2))
def test_disjoint_union_commutative(kinds):
    r1, r2 = map(_outcome, kinds)
    assert disjoint_union(r1, r2) == disjoint_union(r2, r1)


@given(st.lists(st.sampled_from(["fail", "x", "y", "xy", ""]), min_size=3, max_size=3))
def test_disjoint_union_associative_on_decided(kinds):
    r1, r2, r3 = map(_outcome, kinds)
    assert disjoint_union(disjoint_union(r1, r2), r3) == disjoint_union(r1, disjoint_union(r2, r3))
    assert disjoint_union(r1, r2) is not WAIT


def test_disjoint_union_not_associative_with_wait():
    once = Subst.of({x: Matchable(c)})
    assert disjoint_union(disjoint_union(WAIT, once), once) is WAIT
    assert disjoint_union(WAIT, disjoint_union(once, once)) is FAIL


# -- bottom ----------------------------------------------------------------------


def test_default_bottom():
    assert bot() == parse("[x] ^x -> x")
    assert size(bot()) == 2


def test_bottom_override_must_be_closed():
    with using_bot(parse("[x, y] ^x ^y -> y")):
        assert size(bot()) == 5
    assert size(bot()) == 2
    with pytest.raises(ValueError):
        with using_bot(parse("^c")):
            pass


# -- measures --------------------------------------------------------------------


def test_size_clauses():
    assert size(parse("x")) == 1
    assert size(parse("x y")) == 4
    assert size(parse("x @ y")) == 3
    assert size(parse("[x] ^x -> x")) == 2


def test_size_of_matching_weights_pairs():
    # |b| + |bot| + |mu values| + sum over pairs
    t = parse("b[x; {x := ^c}; (^d ~ ^x), (^d ~ ^x)]")
    assert size(t) == 1 + 2 + 1 + 2 * 2


CHAIN = "(^c[; {}; (x ~ ^c), (x ~ ^c)])[x; {x := y[y; {}; (^c ~ ^y)]}; ]"


def test_chain_depth_worked_example():
    assert chain_depth(parse(CHAIN)) == Counter({3: 1})


def test_chain_depth_after_resolution():
    t = parse("^c[; {}; (y[y; {}; (^c ~ ^y)] ~ ^c), (y_1[y_1; {}; (^c ~ ^y_1)] ~ ^c)]")
    assert chain_depth(t) == Counter({2: 2})


def test_chain_depth_matching_free():
    assert chain_depth(parse("([x] ^x -> x) ^c")) == Counter()


def test_multiset_order():
    assert multiset_less(Counter({2: 2}), Counter({3: 1}))
    assert not multiset_less(Counter({3: 1}), Counter({2: 2}))
    assert multiset_less(Counter(), Counter({1: 1}))
    assert not multiset_less(Counter({1: 1}), Counter({1: 1}))


def test_canonicalize_separates_binders():
    t = App(Case((x,), Matchable(x), Var(x)), Case((x,), Matchable(x), Var(x)))
    out = canonicalize(t)
    assert is_canonical(out) and alpha_equiv(out, t)
    assert canonicalize(out) == out


def test_matching_binders_checked():
    with pytest.raises(ValueError):
        Matching(Var(b), (x, x), Subst(), ())
