"""The implicit pattern calculus: compound matching, the check, one rule."""

from __future__ import annotations

from ppcem.terms import (
    FAIL,
    WAIT,
    App,
    Case,
    Matchable,
    Outcome,
    Redex,
    Subst,
    Term,
    bot,
    canonicalize,
    disjoint_union,
    is_pure,
    positions,
    replace_at,
    subterm,
    substitute,
)

BETA_M = "BetaM"


def is_ppc_data_structure(t: Term) -> bool:
    while isinstance(t, App):
        t = t.fun
    return isinstance(t, Matchable)


def is_ppc_matchable_form(t: Term) -> bool:
    return isinstance(t, Case) or is_ppc_data_structure(t)


def compound_match(a: Term, p: Term, theta) -> Outcome:
    """Compound matching of argument ``a`` against pattern ``p``.

    The equations are tried in order; binding a matching variable wins over
    matching a constructor against itself.
    """
    theta = frozenset(theta)
    if isinstance(p, Matchable) and p.name in theta:
        return Subst(((p.name, a),))
    if isinstance(a, Matchable) and a == p:
        return Subst()
    both = is_ppc_matchable_form(a) and is_ppc_matchable_form(p)
    if both and isinstance(a, App) and isinstance(p, App):
        return disjoint_union(compound_match(a.fun, p.fun, theta), compound_match(a.arg, p.arg, theta))
    if both:
        return FAIL
    return WAIT


def checked_match(a: Term, p: Term, theta) -> Outcome:
    r = compound_match(a, p, theta)
    if isinstance(r, Subst) and r.domain() != frozenset(theta):
        return FAIL
    return r


def _redex_outcome(t: Term) -> Outcome | None:
    if isinstance(t, App) and isinstance(t.fun, Case):
        c = t.fun
        return checked_match(t.arg, c.pattern, c.binders)
    return None


def ppc_redexes(t: Term) -> list[Redex]:
    """Enabled redexes, leftmost-outermost first. A waiting match is not a redex."""
    out = []
    for path, s in positions(t):
        r = _redex_outcome(s)
        if r is not None and r is not WAIT:
            out.append(Redex(path, BETA_M))
    return out


def ppc_step(t: Term, r: Redex | tuple[int, ...]) -> Term:
    path = r.path if isinstance(r, Redex) else tuple(r)
    node = subterm(t, path)
    outcome = _redex_outcome(node)
    if outcome is None or outcome is WAIT:
        raise ValueError(f"no enabled redex at {list(path)}")
    new = bot() if outcome is FAIL else substitute(node.fun.body, outcome)
    return canonicalize(replace_at(t, path, new))


def ppc_run(t: Term, max_steps: int = 1000):
    """Leftmost-outermost reduction. Returns (term, [(redex, term)], normal?)."""
    if not is_pure(t):
        raise ValueError("the implicit calculus only handles pure terms")
    t = canonicalize(t)
    trace = []
    for _ in range(max_steps):
        rs = ppc_redexes(t)
        if not rs:
            return t, trace, True
        t = ppc_step(t, rs[0])
        trace.append((rs[0], t))
    return t, trace, not ppc_redexes(t)
