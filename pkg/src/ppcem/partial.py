"""Partial-substitution variant.

A matching carries the list of binders already used instead of a
substitution; each binding is pushed into the body as soon as it is found.
Initialisation, structural application and the non-binding matching rules are
shared with the explicit engine.
"""

from __future__ import annotations

from collections import deque

from ppcem.explicit import Engine, Rule, em_contract, pair_rule
from ppcem.terms import (
    FAIL,
    App,
    Case,
    Matchable,
    Matching,
    SApp,
    Subst,
    Term,
    Used,
    Var,
    alpha_key,
    bot,
    canonicalize,
    free_names,
    substitute,
)

FAIL_NON_LINEAR = "FailNonLinear"


def ps_root_rules(t: Term) -> list:
    if isinstance(t, App):
        match t.fun:
            case Case():
                return [(Rule.INIT_B, None)]
            case Matchable():
                return [(Rule.STRUCT_HAT, None)]
            case SApp():
                return [(Rule.STRUCT_BULLET, None)]
        return []
    if not isinstance(t, Matching):
        return []
    theta = frozenset(t.binders)
    tau = t.match
    out: list = []
    if tau is FAIL:
        out.append((Rule.RESOLVE_FAIL, None))
    elif not t.pending:
        if tau.domain() == theta:
            out.append((Rule.RESOLVE_SUBST, None))
        else:
            out.append((Rule.RESOLVE_DOM_MISMATCH, None))
    for i, (a, p) in enumerate(t.pending):
        if isinstance(p, Matchable) and p.name in theta:
            if not isinstance(tau, Used):
                continue
            if p.name in tau.names:
                out.append((FAIL_NON_LINEAR, i))
            elif not free_names(a) & theta:
                out.append((Rule.MATCH_BIND, i))
            continue
        r = pair_rule(theta, a, p)
        if r is not None:
            out.append((r, i))
    return out


def ps_contract(t: Term, rule, pair, decompose: str = "splice") -> Term:
    match rule:
        case Rule.INIT_B:
            c = t.fun
            return Matching(c.body, c.binders, Used(), ((t.arg, c.pattern),))
        case Rule.RESOLVE_SUBST:
            return t.body
        case Rule.MATCH_BIND:
            a, p = t.pending[pair]
            rest = t.pending[:pair] + t.pending[pair + 1 :]
            body = substitute(t.body, Subst(((p.name, a),)))
            return Matching(body, t.binders, Used.of(t.match.names + (p.name,)), rest)
        case "FailNonLinear":
            return Matching(t.body, t.binders, FAIL, t.pending[:pair] + t.pending[pair + 1 :])
    return em_contract(t, rule, pair, decompose)


PARTIAL = Engine("partial", ps_root_rules, ps_contract)


def ps_redexes(t: Term):
    return PARTIAL.redexes(t)


def ps_step(t: Term, r, decompose: str = "splice") -> Term:
    return PARTIAL.step(t, r, decompose)


def translate(t: Term) -> Term:
    """Push every recorded substitution into its body, keeping its domain."""
    match t:
        case Var() | Matchable():
            return t
        case App(f, a):
            return App(translate(f), translate(a))
        case SApp(h, a):
            return SApp(translate(h), translate(a))
        case Case(theta, p, b):
            return Case(theta, translate(p), translate(b))
        case Matching(b, theta, mu, delta):
            delta = tuple((translate(a), translate(p)) for a, p in delta)
            b = translate(b)
            if isinstance(mu, Subst):
                sigma = Subst(tuple((n, translate(v)) for n, v in mu.bindings))
                return canonicalize(Matching(substitute(b, sigma), theta, Used.of(sigma.domain()), delta))
            return Matching(b, theta, mu, delta)
    raise TypeError(t)


def collapse(t: Term) -> Term:
    """Replace every failed matching by the bottom term.

    A failed matching resolves to bottom whatever its body, so two terms
    that differ only inside failed bodies have the same future.
    """
    match t:
        case Var() | Matchable():
            return t
        case App(f, a):
            return App(collapse(f), collapse(a))
        case SApp(h, a):
            return SApp(collapse(h), collapse(a))
        case Case(theta, p, b):
            return Case(theta, collapse(p), collapse(b))
        case Matching(b, theta, mu, delta):
            if mu is FAIL:
                return bot()
            if isinstance(mu, Subst):
                mu = Subst(tuple((n, collapse(v)) for n, v in mu.bindings))
            return Matching(collapse(b), theta, mu, tuple((collapse(a), collapse(p)) for a, p in delta))
    raise TypeError(t)


def collapse_key(t: Term):
    return alpha_key(canonicalize(collapse(t)))


def ps_reaches(start: Term, target: Term, max_depth: int = 8, max_states: int = 20_000) -> bool | None:
    """Breadth-first search for ``target`` (modulo failed-matching collapse).

    Returns True when found, False when the search space was exhausted and
    None when a cap was hit first.
    """
    goal = collapse_key(target)
    start = canonicalize(start)
    if collapse_key(start) == goal:
        return True
    seen = {alpha_key(start)}
    frontier = deque([(start, 0)])
    capped = False
    while frontier:
        t, d = frontier.popleft()
        if d >= max_depth:
            capped = True
            continue
        for r in ps_redexes(t):
            u = ps_step(t, r)
            k = alpha_key(u)
            if k in seen:
                continue
            if collapse_key(u) == goal:
                return True
            seen.add(k)
            if len(seen) > max_states:
                return None
            frontier.append((u, d + 1))
    return None if capped else False


def simulates(t: Term, em_result: Term, **caps) -> bool | None:
    """One-way simulation of a single explicit step ``t -> em_result``."""
    return ps_reaches(translate(t), translate(em_result), **caps)


def extra_redexes(t: Term, em_redexes) -> list:
    """Variant redexes of ``translate(t)`` when ``t`` itself is normal for the
    explicit engine: reductions the explicit calculus cannot follow."""
    if em_redexes(t):
        return []
    return ps_redexes(translate(t))

