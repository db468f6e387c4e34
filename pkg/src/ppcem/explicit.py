"""Explicit matching: the rule table, the forgetful map, purification and
the matching semantics."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

from ppcem.ppc import compound_match
from ppcem.terms import (
    FAIL,
    App,
    Case,
    Matchable,
    Matching,
    Outcome,
    Redex,
    SApp,
    Subst,
    Term,
    Used,
    Var,
    bot,
    canonicalize,
    disjoint_union,
    free_names,
    is_pure,
    positions,
    replace_at,
    subterm,
    substitute,
    union_all,
)


class Rule(str, enum.Enum):
    INIT_B = "InitB"
    STRUCT_HAT = "StructHat"
    STRUCT_BULLET = "StructBullet"
    MATCH_BIND = "MatchBind"
    MATCH_CONST = "MatchConst"
    MATCH_DECOMPOSE = "MatchDecompose"
    FAIL_CONST_MISMATCH = "FailConstMismatch"
    FAIL_SAPP_VS_CONST = "FailSAppVsConst"
    FAIL_CASE_VS_CONST = "FailCaseVsConst"
    FAIL_CONST_VS_SAPP = "FailConstVsSApp"
    FAIL_CASE_VS_SAPP = "FailCaseVsSApp"
    FAIL_CASE_PATTERN = "FailCasePattern"
    RESOLVE_SUBST = "ResolveSubst"
    RESOLVE_DOM_MISMATCH = "ResolveDomMismatch"
    RESOLVE_FAIL = "ResolveFail"

    def __str__(self):
        return self.value


STRUCT_RULES = frozenset({Rule.STRUCT_HAT, Rule.STRUCT_BULLET})
FAIL_RULES = frozenset(
    {
        Rule.FAIL_CONST_MISMATCH,
        Rule.FAIL_SAPP_VS_CONST,
        Rule.FAIL_CASE_VS_CONST,
        Rule.FAIL_CONST_VS_SAPP,
        Rule.FAIL_CASE_VS_SAPP,
        Rule.FAIL_CASE_PATTERN,
    }
)
MATCH_RULES = frozenset({Rule.MATCH_BIND, Rule.MATCH_CONST, Rule.MATCH_DECOMPOSE}) | FAIL_RULES
RESOLVE_RULES = frozenset({Rule.RESOLVE_SUBST, Rule.RESOLVE_DOM_MISMATCH, Rule.RESOLVE_FAIL})
P_RULES = STRUCT_RULES | MATCH_RULES | RESOLVE_RULES


def is_data_structure(t: Term) -> bool:
    return isinstance(t, (Matchable, SApp))


def is_matchable_form(t: Term) -> bool:
    return isinstance(t, (Matchable, SApp, Case))


def pair_rule(theta, a: Term, p: Term) -> Rule | None:
    """The matching rule for pending pair (a, p), ignoring the match state."""
    if isinstance(p, Matchable):
        x = p.name
        if x in theta:
            return None if free_names(a).intersection(theta) else Rule.MATCH_BIND
        if isinstance(a, Matchable):
            return Rule.MATCH_CONST if a.name == x else Rule.FAIL_CONST_MISMATCH
        if isinstance(a, SApp):
            return Rule.FAIL_SAPP_VS_CONST
        if isinstance(a, Case):
            return Rule.FAIL_CASE_VS_CONST
        return None
    if isinstance(p, SApp):
        if isinstance(a, Matchable):
            return Rule.FAIL_CONST_VS_SAPP
        if isinstance(a, SApp):
            return Rule.MATCH_DECOMPOSE
        if isinstance(a, Case):
            return Rule.FAIL_CASE_VS_SAPP
        return None
    if isinstance(p, Case) and is_matchable_form(a):
        return Rule.FAIL_CASE_PATTERN
    return None


def _app_rule(t: App) -> Rule | None:
    match t.fun:
        case Case():
            return Rule.INIT_B
        case Matchable():
            return Rule.STRUCT_HAT
        case SApp():
            return Rule.STRUCT_BULLET
    return None


def em_root_rules(t: Term) -> list[tuple[Rule, int | None]]:
    """Rules whose left-hand side matches ``t`` itself."""
    if isinstance(t, App):
        r = _app_rule(t)
        return [(r, None)] if r else []
    if not isinstance(t, Matching):
        return []
    out: list[tuple[Rule, int | None]] = []
    theta = frozenset(t.binders)
    if t.match is FAIL:
        out.append((Rule.RESOLVE_FAIL, None))
    elif not t.pending:
        if t.match.domain() == theta:
            out.append((Rule.RESOLVE_SUBST, None))
        else:
            out.append((Rule.RESOLVE_DOM_MISMATCH, None))
    for i, (a, p) in enumerate(t.pending):
        r = pair_rule(theta, a, p)
        if r is not None:
            out.append((r, i))
    return out


def _drop(delta, i):
    return delta[:i] + delta[i + 1 :]


def em_contract(t: Term, rule: Rule, pair: int | None, decompose: str = "splice") -> Term:
    """Contractum of ``rule`` at the root of ``t``. Applicability is not checked."""
    match rule:
        case Rule.INIT_B:
            c = t.fun
            return Matching(c.body, c.binders, Subst(), ((t.arg, c.pattern),))
        case Rule.STRUCT_HAT | Rule.STRUCT_BULLET:
            return SApp(t.fun, t.arg)
        case Rule.RESOLVE_SUBST:
            return substitute(t.body, t.match)
        case Rule.RESOLVE_DOM_MISMATCH | Rule.RESOLVE_FAIL:
            return bot()
    a, p = t.pending[pair]
    rest = _drop(t.pending, pair)
    match rule:
        case Rule.MATCH_BIND:
            mu = disjoint_union(t.match, Subst(((p.name, a),)))
            return Matching(t.body, t.binders, mu, rest)
        case Rule.MATCH_CONST:
            return Matching(t.body, t.binders, t.match, rest)
        case Rule.MATCH_DECOMPOSE:
            new = ((a.head, p.head), (a.arg, p.arg))
            if decompose == "append":
                delta = rest + new
            else:
                delta = t.pending[:pair] + new + t.pending[pair + 1 :]
            return Matching(t.body, t.binders, t.match, delta)
    if rule in FAIL_RULES:
        return Matching(t.body, t.binders, FAIL, rest)
    raise ValueError(f"unknown rule {rule}")


class InvalidRedex(ValueError):
    pass


@dataclass(frozen=True)
class Engine:
    """A rule table: root-rule detection plus contraction."""

    name: str
    root_rules: Callable[[Term], list]
    contract: Callable[..., Term]

    def redexes(self, t: Term, rules=None) -> list[Redex]:
        out = []
        for path, s in positions(t):
            for rule, pair in self.root_rules(s):
                if rules is None or rule in rules:
                    out.append(Redex(path, rule, pair))
        return out

    def first_redex(self, t: Term, rules=None) -> Redex | None:
        for path, s in positions(t):
            for rule, pair in self.root_rules(s):
                if rules is None or rule in rules:
                    return Redex(path, rule, pair)
        return None

    def step(self, t: Term, r: Redex, decompose: str = "splice") -> Term:
        try:
            node = subterm(t, r.path)
        except (IndexError, TypeError):
            raise InvalidRedex(f"no subterm at {list(r.path)}") from None
        if (r.rule, r.pair) not in self.root_rules(node):
            raise InvalidRedex(f"{r.rule} does not apply at {list(r.path)}")
        new = self.contract(node, r.rule, r.pair, decompose)
        return canonicalize(replace_at(t, r.path, new))


EM = Engine("em", em_root_rules, em_contract)


def em_redexes(t: Term) -> list[Redex]:
    return EM.redexes(t)


def em_step(t: Term, r: Redex, decompose: str = "splice") -> Term:
    return EM.step(t, r, decompose)


def p_redexes(t: Term) -> list[Redex]:
    return EM.redexes(t, P_RULES)


# -- forgetful map and well-formedness --------------------------------------


def forget(t: Term) -> Term:
    match t:
        case Var() | Matchable():
            return t
        case SApp(h, a) | App(h, a):
            return App(forget(h), forget(a))
        case Case(theta, p, b):
            return Case(theta, forget(p), forget(b))
        case Matching(b, theta, mu, delta):
            return Matching(forget(b), theta, forget_match(mu), tuple((forget(a), forget(p)) for a, p in delta))
    raise TypeError(t)


def forget_match(mu):
    if isinstance(mu, Subst):
        return Subst(tuple((n, forget(v)) for n, v in mu.bindings))
    return mu


def is_well_formed(t: Term) -> bool:
    """Every structural application is headed by a matchable or another
    structural application, i.e. ``forget(t)`` rebuilds ``t`` by structural
    steps alone."""
    for _, s in positions(t):
        if isinstance(s, SApp) and not isinstance(s.head, (Matchable, SApp)):
            return False
    return True


def struct_closure(t: Term, limit: int = 100_000) -> set[Term]:
    """All terms reachable from ``t`` by structural steps (brute force)."""
    seen = {t}
    todo = [t]
    while todo:
        u = todo.pop()
        for r in EM.redexes(u, STRUCT_RULES):
            v = em_step(u, r)
            if v not in seen:
                seen.add(v)
                todo.append(v)
                if len(seen) > limit:
                    raise OverflowError("structural closure too large")
    return seen


# -- normalisation ---------------------------------------------------------


def normalize_p(t: Term, on_step=None, max_steps: int | None = None) -> Term:
    """Normal form for structural, matching and resolution steps.

    ``on_step(before, redex, after)`` is called after each step.
    """
    t = canonicalize(t)
    n = 0
    while True:
        r = EM.first_redex(t, P_RULES)
        if r is None:
            return t
        u = em_step(t, r)
        if on_step is not None:
            on_step(t, r, u)
        t = u
        n += 1
        if max_steps is not None and n >= max_steps:
            raise RuntimeError(f"no normal form within {max_steps} steps")


@dataclass(frozen=True)
class Purified:
    term: Term
    pure: bool


def purify(t: Term, on_step=None) -> Purified:
    u = forget(normalize_p(t, on_step))
    return Purified(u, is_pure(u))


# -- matching semantics ----------------------------------------------------


def matching_semantics(theta, mu, delta) -> Outcome:
    for v in (mu.values() if isinstance(mu, Subst) else ()):
        _no_matching(v)
    for a, p in delta:
        _no_matching(a)
        _no_matching(p)
    if isinstance(mu, Used):
        raise TypeError("semantics is defined for decided matches only")
    return disjoint_union(
        forget_match(mu), union_all(compound_match(forget(a), forget(p), theta) for a, p in delta)
    )


def _no_matching(t: Term):
    if any(isinstance(s, Matching) for _, s in positions(t)):
        raise ValueError("semantics is defined for components without explicit matchings")


# -- diagnostics -----------------------------------------------------------


@dataclass(frozen=True)
class Stuck:
    path: tuple[int, ...]
    reasons: tuple[str, ...] = field(default=())


def stuck_matchings(t: Term, root_rules=em_root_rules) -> list[Stuck]:
    """Matchings with pending pairs but no applicable rule at their root."""
    out = []
    for path, s in positions(t):
        if not isinstance(s, Matching) or not s.pending or root_rules(s):
            continue
        theta = frozenset(s.binders)
        reasons = []
        for i, (a, p) in enumerate(s.pending):
            if isinstance(p, Matchable) and p.name in theta:
                clash = sorted(str(n) for n in free_names(a) & theta)
                reasons.append(f"pair {i}: binding blocked, argument mentions bound names {clash}")
            elif not is_matchable_form(p):
                reasons.append(f"pair {i}: pattern is not a matchable form")
            else:
                reasons.append(f"pair {i}: argument is not a matchable form")
        out.append(Stuck(path, tuple(reasons)))
    return out
