"""Parallel reduction: enumerate every one-step parallel reduct of a term.

The reduct set grows exponentially with the term, so every enumeration takes
a budget and raises ParallelOverflow instead of silently truncating.
"""

from __future__ import annotations

import itertools
from math import prod

from ppcem.explicit import FAIL_RULES, Rule, pair_rule
from ppcem.terms import (
    FAIL,
    App,
    Case,
    Matchable,
    Matching,
    SApp,
    Subst,
    Term,
    Var,
    alpha_key,
    bot,
    canonicalize,
    disjoint_union,
    substitute,
)


class ParallelOverflow(RuntimeError):
    pass


def _dedupe(terms) -> list[Term]:
    seen = {}
    for t in terms:
        seen.setdefault(alpha_key(t), t)
    return list(seen.values())


class _Enumerator:
    def __init__(self, budget):
        self.budget = budget
        self.memo: dict[Term, list[Term]] = {}

    def check(self, n):
        if n > self.budget:
            raise ParallelOverflow(f"more than {self.budget} parallel reducts")

    def product(self, *choices):
        self.check(prod(len(c) for c in choices))
        return itertools.product(*choices)

    def terms(self, t: Term) -> list[Term]:
        if t in self.memo:
            return self.memo[t]
        out = self._terms(t)
        self.check(len(out))
        self.memo[t] = out
        return out

    def matches(self, mu) -> list:
        if not isinstance(mu, Subst):
            return [mu]
        names = [n for n, _ in mu.bindings]
        vals = [self.terms(v) for v in mu.values()]
        return [Subst(tuple(zip(names, combo))) for combo in self.product(*vals)]

    def pairs(self, delta) -> list[tuple]:
        opts = [list(self.product(self.terms(a), self.terms(p))) for a, p in delta]
        return [tuple(c) for c in self.product(*opts)]

    def _terms(self, t: Term) -> list[Term]:
        match t:
            case Var() | Matchable():
                return [t]
            case SApp(h, a):
                return _dedupe(SApp(h2, a2) for h2, a2 in self.product(self.terms(h), self.terms(a)))
            case Case(theta, p, b):
                return _dedupe(Case(theta, p2, b2) for p2, b2 in self.product(self.terms(p), self.terms(b)))
            case App(f, a):
                return self._app(t, f, a)
            case Matching():
                return self._matching(t)
        raise TypeError(t)

    def _app(self, t, f, a):
        args = self.terms(a)
        out = [App(f2, a2) for f2, a2 in self.product(self.terms(f), args)]
        match f:
            case Case(theta, p, b):
                out += [
                    Matching(b2, theta, Subst(), ((a2, p2),))
                    for p2, b2, a2 in self.product(self.terms(p), self.terms(b), args)
                ]
            case Matchable():
                out += [SApp(f, a2) for a2 in args]
            case SApp(t1, t2):
                out += [
                    SApp(SApp(x1, x2), a2) for x1, x2, a2 in self.product(self.terms(t1), self.terms(t2), args)
                ]
        return _dedupe(out)

    def _matching(self, t: Matching):
        b, theta, mu, delta = t.body, t.binders, t.match, t.pending
        bodies = self.terms(b)
        mus = self.matches(mu)
        out = [Matching(b2, theta, m2, d2) for b2, m2, d2 in self.product(bodies, mus, self.pairs(delta))]
        theta_set = frozenset(theta)
        for i, (a, p) in enumerate(delta):
            rule = pair_rule(theta_set, a, p)
            if rule is None:
                continue
            rest = self.pairs(delta[:i] + delta[i + 1 :])
            if rule is Rule.MATCH_BIND:
                out += [
                    Matching(b2, theta, disjoint_union(m2, Subst(((p.name, a2),))), r2)
                    for b2, m2, a2, r2 in self.product(bodies, mus, self.terms(a), rest)
                ]
            elif rule is Rule.MATCH_CONST:
                out += [Matching(b2, theta, m2, r2) for b2, m2, r2 in self.product(bodies, mus, rest)]
            elif rule is Rule.MATCH_DECOMPOSE:
                sub = self.pairs(((a.head, p.head), (a.arg, p.arg)))
                out += [
                    Matching(b2, theta, m2, r2[:i] + s2 + r2[i:])
                    for b2, m2, s2, r2 in self.product(bodies, mus, sub, rest)
                ]
            elif rule in FAIL_RULES:
                out += [Matching(b2, theta, FAIL, r2) for b2, r2 in self.product(bodies, rest)]
        if mu is FAIL:
            out.append(bot())
        elif not delta:
            if mu.domain() == theta_set:
                out += [substitute(b2, m2) for b2, m2 in self.product(bodies, mus)]
            else:
                out.append(bot())
        return _dedupe(out)


def parallel_reducts(t: Term, budget: int = 5000) -> list[Term]:
    """Every ``t'`` with ``t => t'``, one representative per alpha class."""
    t = canonicalize(t)
    return _dedupe(canonicalize(u) for u in _Enumerator(budget).terms(t))


def parallel_derivable(t: Term, u: Term, budget: int = 5000) -> bool:
    key = alpha_key(canonicalize(u))
    return any(alpha_key(r) == key for r in parallel_reducts(t, budget))


def diamond_closes(t: Term, budget: int = 5000):
    """Check that every pair of parallel reducts of ``t`` has a common
    parallel reduct. Returns (ok, reducts, first failing pair or None)."""
    reducts = parallel_reducts(t, budget)
    keysets = [frozenset(alpha_key(r) for r in parallel_reducts(u, budget)) for u in reducts]
    for i, j in itertools.combinations(range(len(reducts)), 2):
        if not keysets[i] & keysets[j]:
            return False, reducts, (reducts[i], reducts[j])
    return True, reducts, None
