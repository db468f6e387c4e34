import random
from collections import deque

import pytest

from ppcem import generate as gen
from ppcem.explicit import em_redexes, em_step
from ppcem.parallel import ParallelOverflow, diamond_closes, parallel_derivable, parallel_reducts
from ppcem.syntax import parse
from ppcem.terms import Name, Subst, alpha_key, canonicalize, free_variables, size, substitute

P = parse


def small_terms(n, max_size=10, start=0):
    """Random explicit terms and reducts of pure terms, each with a redex."""
    out, seed = [], start
    while len(out) < n:
        rng = random.Random(seed)
        t = gen.em_term(rng, 2, 10) if seed % 2 else gen.reduced_term(rng, 3, 9, 3)
        seed += 1
        if size(t) <= max_size and em_redexes(t):
            out.append(t)
    return out


def em_reachable(t, u, depth=6, limit=5000):
    goal = alpha_key(canonicalize(u))
    seen = {alpha_key(t)}
    todo = deque([(t, 0)])
    while todo:
        s, d = todo.popleft()
        if alpha_key(s) == goal:
            return True
        if d == depth:
            continue
        for r in em_redexes(s):
            v = em_step(s, r)
            k = alpha_key(v)
            if k not in seen and len(seen) < limit:
                seen.add(k)
                todo.append((v, d + 1))
    return False


def test_identity_is_a_parallel_step():
    t = P("([x] ^c ^x -> x) (^c t)")
    assert parallel_derivable(t, t)


def test_init_with_reduced_components():
    t = P("([x] ^c ^x -> x) (^c t)")
    assert parallel_derivable(t, P("x[x; {}; (^c @ t ~ ^c @ ^x)]"))
    assert parallel_derivable(t, P("x[x; {}; (^c t ~ ^c ^x)]"))


def test_two_steps_in_one_when_disjoint():
    t = P("(^c ^d) (^e u)")
    both = P("(^c @ ^d) (^e @ u)")
    assert parallel_derivable(t, both)
    assert all(alpha_key(em_step(t, r)) != alpha_key(both) for r in em_redexes(t))


def test_budget_overflow_is_signalled():
    t = P(" ".join(["(^c ^d)"] * 14))
    with pytest.raises(ParallelOverflow):
        parallel_reducts(t, budget=50)


@pytest.mark.parametrize("t", small_terms(150), ids=lambda t: "")
def test_single_steps_are_parallel(t):
    rs = parallel_reducts(t, budget=20000)
    keys = {alpha_key(r) for r in rs}
    for r in em_redexes(t):
        assert alpha_key(canonicalize(em_step(t, r))) in keys


def test_parallel_reducts_are_reachable():
    total = 0
    for t in small_terms(400, max_size=10, start=7000):
        for u in parallel_reducts(t, budget=20000):
            assert em_reachable(t, u), (t, u)
            total += 1
    assert total > 800


def test_substitution_lemma():
    rng = random.Random(11)
    checked = 0
    for t in small_terms(300, max_size=8, start=3000):
        fvs = sorted(free_variables(t))
        if not fvs:
            continue
        s = gen.em_term(rng.randrange(10**6), 1, 3)
        if size(s) > 4:
            continue
        x: Name = fvs[0]
        t2 = rng.choice(parallel_reducts(t, budget=20000))
        s2 = rng.choice(parallel_reducts(s, budget=20000))
        lhs = substitute(t, Subst.of({x: s}))
        rhs = substitute(t2, Subst.of({x: s2}))
        assert parallel_derivable(lhs, rhs, budget=50000), (t, s, t2, s2)
        checked += 1
    assert checked > 40


def test_small_diamond():
    for t in small_terms(60, max_size=10, start=500):
        ok, _, bad = diamond_closes(t, budget=20000)
        assert ok, bad
