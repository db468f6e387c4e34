"""Seeded random terms for the property suites."""

from __future__ import annotations

import random
from dataclasses import dataclass

from ppcem.explicit import EM, Engine
from ppcem.ppc import ppc_redexes
from ppcem.terms import (
    FAIL,
    App,
    Case,
    Matchable,
    Matching,
    Name,
    SApp,
    Subst,
    Term,
    Var,
    canonicalize,
    free_variables,
    has_matching,
)

CONSTRUCTORS = ("c", "d", "e")
FREE_VARS = ("u", "v", "w")
BINDERS = ("x", "y", "z", "k")


@dataclass
class Knobs:
    """Relative weights of node kinds."""

    matchable: float = 1.0
    app: float = 1.0
    case: float = 0.6
    sapp: float = 0.3
    matching: float = 0.3
    redex: float = 0.5
    mutate: float = 0.15
    nonlinear: float = 0.05
    dynamic_pattern: float = 0.1


class Gen:
    def __init__(self, seed_or_rng, knobs: Knobs | None = None):
        self.rng = as_rng(seed_or_rng)
        self.k = knobs or Knobs()
        self.counter = 0

    def chance(self, p: float) -> bool:
        return self.rng.random() < p

    def binders(self, n: int | None = None) -> tuple[Name, ...]:
        n = self.rng.choice((0, 1, 1, 1, 2, 2, 3)) if n is None else n
        out = []
        for _ in range(n):
            self.counter += 1
            out.append(Name(self.rng.choice(BINDERS), self.counter))
        return tuple(out)

    def leaf(self, scope) -> Term:
        if scope and self.chance(0.6):
            return Var(self.rng.choice(scope))
        if self.chance(self.k.matchable / (self.k.matchable + 0.5)):
            return Matchable(Name(self.rng.choice(CONSTRUCTORS)))
        return Var(Name(self.rng.choice(FREE_VARS)))

    # -- pure terms --------------------------------------------------------

    def pure(self, size: int, scope=()) -> Term:
        if size <= 1:
            return self.leaf(scope)
        k = self.k
        kinds = ["app", "case", "redex", "data"]
        weights = [k.app, k.case, k.redex, k.matchable]
        kind = self.rng.choices(kinds, weights)[0]
        if kind == "app":
            left = self.rng.randint(1, size - 1)
            return App(self.pure(left, scope), self.pure(size - left, scope))
        if kind == "data":
            return self.data(size, scope)
        if kind == "case":
            return self.case(size, scope)
        return self.redex(size, scope)

    def data(self, size: int, scope=()) -> Term:
        t: Term = Matchable(Name(self.rng.choice(CONSTRUCTORS)))
        budget = size - 1
        while budget > 0:
            n = self.rng.randint(1, budget)
            t = App(t, self.pure(n, scope))
            budget -= n + 1
        return t

    def case(self, size: int, scope=()) -> Term:
        theta = self.binders()
        psize = max(1, size // 3)
        p = self.pattern(psize, theta, scope)
        b = self.pure(max(1, size - psize - 1), tuple(scope) + theta)
        return Case(theta, p, b)

    def pattern(self, size: int, theta, scope=()) -> Term:
        """Mostly data-structure patterns over ``theta``."""
        unused = list(theta)
        self.rng.shuffle(unused)

        def go(n):
            if n <= 1 or self.chance(0.25):
                if unused and self.chance(0.7):
                    return Matchable(unused.pop())
                if theta and self.chance(self.k.nonlinear):
                    return Matchable(self.rng.choice(theta))
                if scope and self.chance(self.k.dynamic_pattern):
                    return Var(self.rng.choice(scope))
                if self.chance(0.03):
                    return self.case(3, scope)
                return Matchable(Name(self.rng.choice(CONSTRUCTORS)))
            t: Term = Matchable(Name(self.rng.choice(CONSTRUCTORS)))
            if scope and self.chance(self.k.dynamic_pattern):
                t = Var(self.rng.choice(scope))
            left = n - 1
            while left > 0:
                m = self.rng.randint(1, left)
                t = App(t, go(m))
                left -= m + 1
            return t

        p = go(size)
        while unused:
            p = App(p, Matchable(unused.pop()))
        return p

    def instance(self, p: Term, theta, scope=()) -> Term:
        """An argument that probably matches ``p``."""
        if self.chance(self.k.mutate / 3):
            return self.pure(self.rng.randint(1, 3), scope)
        match p:
            case Matchable(x) if x in theta:
                if self.chance(self.k.redex / 4):
                    return self.redex(self.rng.randint(3, 6), scope)
                return self.pure(self.rng.randint(1, 3), scope)
            case Matchable(x):
                if self.chance(self.k.mutate):
                    return Matchable(Name(self.rng.choice(CONSTRUCTORS)))
                return p
            case App(f, a):
                return App(self.instance(f, theta, scope), self.instance(a, theta, scope))
        return self.pure(self.rng.randint(1, 3), scope)

    def redex(self, size: int, scope=()) -> Term:
        c = self.case(max(3, size - 2), scope)
        return App(c, self.instance(c.pattern, frozenset(c.binders), scope))

    # -- explicit terms ------------------------------------------------------

    def em(self, size: int, scope=()) -> Term:
        if size <= 1:
            return self.leaf(scope)
        k = self.k
        kinds = ["pure", "sapp", "matching", "app"]
        kind = self.rng.choices(kinds, [k.app + k.case + k.redex, k.sapp, k.matching, k.app])[0]
        if kind == "pure":
            return self.pure(size, scope)
        if kind == "app":
            left = self.rng.randint(1, size - 1)
            return App(self.em(left, scope), self.em(size - left, scope))
        if kind == "sapp":
            head: Term = Matchable(Name(self.rng.choice(CONSTRUCTORS)))
            if self.chance(0.1):
                head = self.em(2, scope)
            while size > 3 and self.chance(0.4):
                head = SApp(head, self.em(1, scope))
                size -= 2
            return SApp(head, self.em(max(1, size - 2), scope))
        return self.matching(size, scope)

    def matching(self, size: int, scope=(), nested: bool = True) -> Term:
        theta = self.binders(self.rng.choice((0, 1, 1, 2, 2)))
        inner = self.em if nested else self.pure_bullets
        parts = max(1, size // 3)
        body = inner(parts, tuple(scope) + theta)
        bound = [x for x in theta if self.chance(0.3)]
        if self.chance(0.08):
            mu = FAIL
        else:
            mu = Subst.of({x: inner(self.rng.randint(1, 2), scope) for x in bound})
        rest = [x for x in theta if x not in bound]
        delta = []
        npairs = self.rng.choice((0, 1, 1, 2))
        for i in range(npairs):
            mine = rest if i == npairs - 1 else rest[: len(rest) // 2]
            rest = [x for x in rest if x not in mine]
            p = self.pattern(max(1, parts // 2), tuple(mine), scope)
            if self.chance(0.3):
                p = self.bulletize(p)
            a = self.instance(p, frozenset(theta), scope)
            if nested and self.chance(0.2):
                a = self.em(2, scope)
            elif self.chance(0.3):
                a = self.bulletize(a)
            delta.append((a, p))
        return Matching(body, theta, mu, tuple(delta))

    def pure_bullets(self, size: int, scope=()) -> Term:
        t = self.pure(size, scope)
        return self.bulletize(t) if self.chance(0.3) else t

    def bulletize(self, t: Term) -> Term:
        """Turn some data-structure spines into structural applications."""
        match t:
            case App(f, a):
                f2, a2 = self.bulletize(f), self.bulletize(a)
                if isinstance(f2, (Matchable, SApp)) and self.chance(0.6):
                    return SApp(f2, a2)
                return App(f2, a2)
            case Case(theta, p, b):
                return Case(theta, self.bulletize(p), self.bulletize(b))
        return t


def _size(rng: random.Random, lo: int, hi: int) -> int:
    return rng.randint(lo, hi)


def pure_term(seed, lo: int = 4, hi: int = 14, closed: bool = False, knobs: Knobs | None = None) -> Term:
    g = Gen(seed, knobs)
    t = g.pure(_size(g.rng, lo, hi))
    if closed:
        t = close(t)
    return canonicalize(t)


def close(t: Term) -> Term:
    """Bind leftover free variables under an outer case."""
    fv = tuple(sorted(free_variables(t)))
    if not fv:
        return t
    return Case(fv, Matchable(Name("c")), t)


def pure_with_redex(seed, lo: int = 4, hi: int = 14, tries: int = 1000) -> Term:
    g = Gen(seed)
    for _ in range(tries):
        t = canonicalize(g.pure(_size(g.rng, lo, hi)))
        if ppc_redexes(t):
            return t
    raise RuntimeError("generator produced no redex")


def em_term(seed, lo: int = 3, hi: int = 12, knobs: Knobs | None = None) -> Term:
    g = Gen(seed, knobs)
    return canonicalize(g.em(_size(g.rng, lo, hi)))


def flat_matching(seed, lo: int = 4, hi: int = 12) -> Matching:
    """A matching whose components contain no explicit matching."""
    g = Gen(seed)
    while True:
        t = canonicalize(g.matching(_size(g.rng, lo, hi), nested=False))
        if t.pending and not any(has_matching(x) for pair in t.pending for x in pair):
            return t


def as_rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def reduct(seed, t: Term, steps: int, engine: Engine = EM) -> Term:
    """Apply up to ``steps`` uniformly chosen redexes."""
    rng = as_rng(seed)
    for _ in range(steps):
        rs = engine.redexes(t)
        if not rs:
            break
        t = engine.step(t, rng.choice(rs))
    return t


def reduced_term(seed, lo: int = 4, hi: int = 14, max_steps: int = 6) -> Term:
    """A term reachable from a pure term: well-formed by construction."""
    rng = as_rng(seed)
    t = pure_term(rng, lo, hi)
    return reduct(rng, t, rng.randint(0, max_steps))
