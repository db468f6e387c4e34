"""Term language shared by every engine.

Terms are immutable. Names carry a freshness tag so that renaming never has
to invent new identifiers: a clash is resolved by bumping the tag.
"""

from __future__ import annotations

import contextlib
import contextvars
from collections import Counter
from dataclasses import dataclass, fields
from typing import Iterable, Iterator, Union


@dataclass(frozen=True, order=True)
class Name:
    base: str
    tag: int = 0

    def __str__(self):
        return self.base if self.tag == 0 else f"{self.base}_{self.tag}"

    def __repr__(self):
        return f"Name({str(self)!r})"


def names(*bases: str) -> tuple[Name, ...]:
    return tuple(Name(b) for b in bases)


class Term:
    """Base class. Equality is structural; hashes are computed once."""

    def _parts(self):
        return tuple(getattr(self, f.name) for f in fields(self))

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._parts() == other._parts()

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + self._parts())
            self.__dict__["_hash"] = h
        return h

    def __repr__(self):
        from ppcem.syntax import show

        return f"<{show(self)}>"


@dataclass(frozen=True, eq=False, repr=False)
class Var(Term):
    name: Name


@dataclass(frozen=True, eq=False, repr=False)
class Matchable(Term):
    name: Name


@dataclass(frozen=True, eq=False, repr=False)
class App(Term):
    fun: Term
    arg: Term


@dataclass(frozen=True, eq=False, repr=False)
class SApp(Term):
    """Structural application ``head • arg``."""

    head: Term
    arg: Term


@dataclass(frozen=True, eq=False, repr=False)
class Case(Term):
    binders: tuple[Name, ...]
    pattern: Term
    body: Term

    def __post_init__(self):
        if len(set(self.binders)) != len(self.binders):
            raise ValueError(f"duplicate binder in {self.binders}")


@dataclass(frozen=True, eq=False, repr=False)
class Matching(Term):
    """Ongoing matching ``body<binders; match; pending>``.

    ``match`` is a Subst or FAIL in the explicit calculus and a Used or FAIL
    in the partial-substitution variant. ``pending`` is kept as a tuple of
    (argument, pattern) pairs; its multiset reading ignores the order.
    """

    body: Term
    binders: tuple[Name, ...]
    match: "Match"
    pending: tuple[tuple[Term, Term], ...] = ()

    def __post_init__(self):
        if len(set(self.binders)) != len(self.binders):
            raise ValueError(f"duplicate binder in {self.binders}")


@dataclass(frozen=True)
class Redex:
    """A rule applicable at ``path``; ``pair`` picks the pending pair for
    matching rules."""

    path: tuple[int, ...]
    rule: str
    pair: int | None = None


# -- matches ---------------------------------------------------------------


class _Fail:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FAIL"

    def __reduce__(self):
        return (_Fail, ())


class _Wait:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "WAIT"

    def __reduce__(self):
        return (_Wait, ())


FAIL = _Fail()
WAIT = _Wait()


@dataclass(frozen=True)
class Subst:
    """Finite substitution, bindings sorted by name."""

    bindings: tuple[tuple[Name, Term], ...] = ()

    @classmethod
    def of(cls, mapping=None, **kw) -> Subst:
        items = dict(mapping or {})
        items.update({Name(k): v for k, v in kw.items()})
        return cls(tuple(sorted(items.items(), key=lambda kv: kv[0])))

    def domain(self) -> frozenset[Name]:
        return frozenset(n for n, _ in self.bindings)

    def values(self) -> tuple[Term, ...]:
        return tuple(v for _, v in self.bindings)

    def as_dict(self) -> dict[Name, Term]:
        return dict(self.bindings)

    def get(self, name, default=None):
        for n, v in self.bindings:
            if n == name:
                return v
        return default

    def __len__(self):
        return len(self.bindings)

    def __repr__(self):
        inner = ", ".join(f"{n} := {v!r}" for n, v in self.bindings)
        return "{" + inner + "}"


@dataclass(frozen=True)
class Used:
    """Used-variable list of the partial-substitution variant."""

    names: tuple[Name, ...] = ()

    @classmethod
    def of(cls, ns: Iterable[Name]) -> Used:
        return cls(tuple(sorted(set(ns))))

    def domain(self) -> frozenset[Name]:
        return frozenset(self.names)


Match = Union[Subst, _Fail, Used]
Outcome = Union[Subst, _Fail, _Wait]


def disjoint_union(r1: Outcome, r2: Outcome) -> Outcome:
    if r1 is FAIL or r2 is FAIL:
        return FAIL
    if r1 is WAIT or r2 is WAIT:
        return WAIT
    if r1.domain() & r2.domain():
        return FAIL
    return Subst.of({**r1.as_dict(), **r2.as_dict()})


def union_all(outcomes: Iterable[Outcome]) -> Outcome:
    acc: Outcome = Subst()
    for r in outcomes:
        acc = disjoint_union(acc, r)
    return acc


# -- bottom ----------------------------------------------------------------

DEFAULT_BOT = Case((Name("x"),), Matchable(Name("x")), Var(Name("x")))
_bot = contextvars.ContextVar("ppcem_bot", default=DEFAULT_BOT)


def bot() -> Term:
    """The fixed closed normal term standing for a failed match."""
    return _bot.get()


@contextlib.contextmanager
def using_bot(term: Term):
    if not is_pure(term) or free_names(term):
        raise ValueError("the failure term must be closed and pure")
    token = _bot.set(term)
    try:
        yield term
    finally:
        _bot.reset(token)


# -- traversal -------------------------------------------------------------


def children(t: Term) -> tuple[Term, ...]:
    match t:
        case App(f, a):
            return (f, a)
        case SApp(h, a):
            return (h, a)
        case Case(_, p, b):
            return (p, b)
        case Matching(b, _, mu, delta):
            vals = mu.values() if isinstance(mu, Subst) else ()
            return (b, *vals, *(x for pair in delta for x in pair))
    return ()


def rebuild(t: Term, kids: tuple[Term, ...]) -> Term:
    match t:
        case App():
            return App(*kids)
        case SApp():
            return SApp(*kids)
        case Case(theta, _, _):
            return Case(theta, *kids)
        case Matching(_, theta, mu, delta):
            k = len(mu) if isinstance(mu, Subst) else 0
            if k:
                mu = Subst(tuple((n, v) for (n, _), v in zip(mu.bindings, kids[1 : 1 + k])))
            rest = kids[1 + k :]
            pending = tuple((rest[2 * i], rest[2 * i + 1]) for i in range(len(delta)))
            return Matching(kids[0], theta, mu, pending)
    return t


def pair_index(t: Matching, i: int) -> tuple[int, int]:
    """Child indices of the argument and pattern of pending pair ``i``."""
    k = len(t.match) if isinstance(t.match, Subst) else 0
    return 1 + k + 2 * i, 2 + k + 2 * i


def subterm(t: Term, path: Iterable[int]) -> Term:
    for i in path:
        t = children(t)[i]
    return t


def replace_at(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    kids = list(children(t))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return rebuild(t, tuple(kids))


def positions(t: Term, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Term]]:
    """Pre-order walk yielding (path, subterm)."""
    stack = [(path, t)]
    while stack:
        p, s = stack.pop()
        yield p, s
        kids = children(s)
        for i in range(len(kids) - 1, -1, -1):
            stack.append((p + (i,), kids[i]))


def is_pure(t: Term) -> bool:
    return not any(isinstance(s, (SApp, Matching)) for _, s in positions(t))


def has_matching(t: Term) -> bool:
    return _cached(t, "_has_m", _has_matching)


def _has_matching(t: Term) -> bool:
    return isinstance(t, Matching) or any(has_matching(c) for c in children(t))


# -- free names ------------------------------------------------------------


def _cached(t: Term, key: str, compute):
    d = t.__dict__
    r = d.get(key)
    if r is None:
        r = d[key] = compute(t)
    return r


def free_variables(t: Term) -> frozenset[Name]:
    return _cached(t, "_fv", _fv)


def free_matchables(t: Term) -> frozenset[Name]:
    return _cached(t, "_fm", _fm)


def free_names(t: Term) -> frozenset[Name]:
    return free_variables(t) | free_matchables(t)


def _fv(t: Term) -> frozenset[Name]:
    match t:
        case Var(x):
            return frozenset((x,))
        case Matchable():
            return frozenset()
        case App(f, a) | SApp(f, a):
            return free_variables(f) | free_variables(a)
        case Case(theta, p, b):
            return free_variables(p) | (free_variables(b) - set(theta))
        case Matching(b, theta, mu, delta):
            acc = free_variables(b) - set(theta)
            if isinstance(mu, Subst):
                for v in mu.values():
                    acc |= free_variables(v)
            for a, p in delta:
                acc |= free_variables(a) | free_variables(p)
            return acc
    raise TypeError(t)


def _fm(t: Term) -> frozenset[Name]:
    match t:
        case Var():
            return frozenset()
        case Matchable(x):
            return frozenset((x,))
        case App(f, a) | SApp(f, a):
            return free_matchables(f) | free_matchables(a)
        case Case(theta, p, b):
            return (free_matchables(p) - set(theta)) | free_matchables(b)
        case Matching(b, theta, mu, delta):
            acc = free_matchables(b)
            if isinstance(mu, Subst):
                for v in mu.values():
                    acc |= free_matchables(v)
            pats = frozenset()
            for a, p in delta:
                acc |= free_matchables(a)
                pats |= free_matchables(p)
            return acc | (pats - set(theta))
    raise TypeError(t)


def subst_free_names(sigma: Subst) -> frozenset[Name]:
    acc = frozenset()
    for v in sigma.values():
        acc |= free_names(v)
    return acc


def all_names(t: Term) -> Iterator[Name]:
    for _, s in positions(t):
        match s:
            case Var(x) | Matchable(x):
                yield x
            case Case(theta, _, _):
                yield from theta
            case Matching(_, theta, mu, _):
                yield from theta
                if isinstance(mu, (Subst, Used)):
                    yield from mu.domain()


def binder_lists(t: Term) -> Iterator[tuple[Name, ...]]:
    for _, s in positions(t):
        if isinstance(s, (Case, Matching)):
            yield s.binders


def is_canonical(t: Term) -> bool:
    """All binders pairwise distinct and disjoint from the free names."""
    seen: set[Name] = set()
    for theta in binder_lists(t):
        for n in theta:
            if n in seen:
                return False
            seen.add(n)
    return not (seen & free_names(t))


# -- renaming and substitution ----------------------------------------------


class _Fresh:
    def __init__(self, taken: Iterable[Name]):
        self.top: dict[str, int] = {}
        for n in taken:
            if n.tag > self.top.get(n.base, -1):
                self.top[n.base] = n.tag

    def __call__(self, base: str) -> Name:
        tag = self.top.get(base, 0) + 1
        self.top[base] = tag
        return Name(base, tag)


def canonicalize(t: Term, avoid: Iterable[Name] = ()) -> Term:
    """Rename binders so they are pairwise distinct, disjoint from the free
    names of ``t`` and from ``avoid``. Renaming bumps name tags."""
    avoid = frozenset(avoid)
    if not avoid and is_canonical(t):
        return t
    used = set(free_names(t)) | avoid
    fresh = _Fresh(list(all_names(t)) + list(avoid))

    def bind(theta):
        new = []
        for n in theta:
            m = fresh(n.base) if n in used else n
            used.add(m)
            new.append(m)
        return tuple(new), dict(zip(theta, new))

    def go(t, venv, menv):
        match t:
            case Var(x):
                y = venv.get(x, x)
                return t if y == x else Var(y)
            case Matchable(x):
                y = menv.get(x, x)
                return t if y == x else Matchable(y)
            case App(f, a):
                return App(go(f, venv, menv), go(a, venv, menv))
            case SApp(f, a):
                return SApp(go(f, venv, menv), go(a, venv, menv))
            case Case(theta, p, b):
                theta2, ren = bind(theta)
                return Case(theta2, go(p, venv, {**menv, **ren}), go(b, {**venv, **ren}, menv))
            case Matching(b, theta, mu, delta):
                theta2, ren = bind(theta)
                if isinstance(mu, Subst):
                    mu = Subst.of({ren.get(n, n): go(v, venv, menv) for n, v in mu.bindings})
                elif isinstance(mu, Used):
                    mu = Used.of(ren.get(n, n) for n in mu.names)
                menv2 = {**menv, **ren}
                delta = tuple((go(a, venv, menv), go(p, venv, menv2)) for a, p in delta)
                return Matching(go(b, {**venv, **ren}, menv), theta2, mu, delta)
        raise TypeError(t)

    return go(t, {}, {})


def _apply(t: Term, sigma: dict[Name, Term]) -> Term:
    # binders are already disjoint from dom(sigma) and fn(sigma)
    match t:
        case Var(x):
            return sigma.get(x, t)
        case Matchable():
            return t
        case App(f, a):
            return App(_apply(f, sigma), _apply(a, sigma))
        case SApp(f, a):
            return SApp(_apply(f, sigma), _apply(a, sigma))
        case Case(theta, p, b):
            return Case(theta, _apply(p, sigma), _apply(b, sigma))
        case Matching(b, theta, mu, delta):
            if isinstance(mu, Subst):
                mu = Subst(tuple((n, _apply(v, sigma)) for n, v in mu.bindings))
            delta = tuple((_apply(a, sigma), _apply(p, sigma)) for a, p in delta)
            return Matching(_apply(b, sigma), theta, mu, delta)
    raise TypeError(t)


def substitute(t: Term, sigma: Subst | dict) -> Term:
    """Capture-avoiding substitution of variables; matchables are untouched.

    Binders meeting dom(sigma) or fn(sigma) are renamed first, so the
    operation is total, and the result is canonical.
    """
    if isinstance(sigma, dict):
        sigma = Subst.of(sigma)
    if not (free_variables(t) & sigma.domain()):
        return t
    avoid = sigma.domain() | subst_free_names(sigma)
    t = canonicalize(t, avoid)
    return canonicalize(_apply(t, sigma.as_dict()))


# -- alpha equivalence -----------------------------------------------------


def alpha_key(t: Term, ordered: bool = False):
    """Hashable key identifying ``t`` up to renaming of bound names.

    With ``ordered=False`` pending pairs are compared as a multiset.
    """
    if not ordered:
        k = t.__dict__.get("_akey")
        if k is None:
            k = t.__dict__["_akey"] = _key(t, {}, {}, 0, False)
        return k
    return _key(t, {}, {}, 0, True)


def _key(t, venv, menv, depth, ordered):
    match t:
        case Var(x):
            return ("v", venv[x]) if x in venv else ("V", x.base, x.tag)
        case Matchable(x):
            return ("m", menv[x]) if x in menv else ("M", x.base, x.tag)
        case App(f, a):
            return ("@", _key(f, venv, menv, depth, ordered), _key(a, venv, menv, depth, ordered))
        case SApp(f, a):
            return ("*", _key(f, venv, menv, depth, ordered), _key(a, venv, menv, depth, ordered))
        case Case(theta, p, b):
            lv = {n: depth + i for i, n in enumerate(theta)}
            d2 = depth + len(theta)
            return (
                "C",
                len(theta),
                _key(p, venv, {**menv, **lv}, d2, ordered),
                _key(b, {**venv, **lv}, menv, d2, ordered),
            )
        case Matching(b, theta, mu, delta):
            lv = {n: depth + i for i, n in enumerate(theta)}
            d2 = depth + len(theta)

            def dom_key(n):
                return ("b", lv[n]) if n in lv else ("F", n.base, n.tag)

            if mu is FAIL:
                mk = ("fail",)
            elif isinstance(mu, Used):
                mk = ("used", tuple(sorted(dom_key(n) for n in mu.names)))
            else:
                mk = (
                    "subst",
                    tuple(sorted((dom_key(n), _key(v, venv, menv, depth, ordered)) for n, v in mu.bindings)),
                )
            menv2 = {**menv, **lv}
            pairs = [
                (_key(a, venv, menv, depth, ordered), _key(p, venv, menv2, d2, ordered)) for a, p in delta
            ]
            if not ordered:
                pairs.sort()
            return ("X", len(theta), _key(b, {**venv, **lv}, menv, d2, ordered), mk, tuple(pairs))
    raise TypeError(t)


def alpha_equiv(t1: Term, t2: Term, ordered: bool = False) -> bool:
    return alpha_key(t1, ordered) == alpha_key(t2, ordered)


def same_outcome(r1: Outcome, r2: Outcome) -> bool:
    """Equality of match outcomes, comparing bound values up to alpha."""
    if r1 is FAIL or r1 is WAIT or r2 is FAIL or r2 is WAIT:
        return r1 is r2
    if r1.domain() != r2.domain():
        return False
    return all(alpha_equiv(v, r2.get(n)) for n, v in r1.bindings)


# -- measures --------------------------------------------------------------


def size(t: Term) -> int:
    match t:
        case Var() | Matchable():
            return 1
        case App(f, a):
            return size(f) + size(a) + 2
        case SApp(f, a):
            return size(f) + size(a) + 1
        case Case(_, p, b):
            return size(p) + size(b)
        case Matching(b, _, mu, delta):
            n = size(b) + size(bot())
            if isinstance(mu, Subst):
                n += sum(size(v) for v in mu.values())
            # repeated list entries account for multiplicities
            return n + sum(size(a) + size(p) for a, p in delta)
    raise TypeError(t)


def chain_depth(t: Term) -> Counter:
    """Multiset of lengths of the maximal potentially nested chains.

    Matching ``j`` follows matching ``i`` when ``j`` sits inside the pending
    pairs or substitution codomain of ``i`` (nesting) or when one of ``j``'s
    binders occurs free there (potential nesting).
    """
    return Counter(_cached(t, "_chain", _chain_depth))


def _chain_depth(t: Term) -> Counter:
    if not has_matching(t):
        return Counter()
    nodes = {p: s for p, s in positions(t) if isinstance(s, Matching)}
    succ: dict[tuple, set] = {p: set() for p in nodes}
    for p, m in nodes.items():
        n = len(p)
        # nested: below any child but the body
        succ[p].update(q for q in nodes if len(q) > n and q[:n] == p and q[n] >= 1)
        fv: frozenset[Name] = frozenset()
        for c in children(m)[1:]:
            fv |= free_variables(c)
        for q, other in nodes.items():
            if q != p and fv.intersection(other.binders):
                succ[p].add(q)
    preds = Counter(q for s in succ.values() for q in s)

    memo: dict[tuple, Counter] = {}
    active: set[tuple] = set()

    def lengths(p) -> Counter:
        if p in memo:
            return memo[p]
        if p in active:
            raise ValueError("cyclic chain: term does not follow the binder convention")
        active.add(p)
        if not succ[p]:
            out = Counter({1: 1})
        else:
            out = Counter()
            for q in succ[p]:
                for n, k in lengths(q).items():
                    out[n + 1] += k
        active.discard(p)
        memo[p] = out
        return out

    total = Counter()
    for p in nodes:
        if preds[p] == 0:
            total.update(lengths(p))
    if nodes and not total:
        raise ValueError("cyclic chain: term does not follow the binder convention")
    return total


def multiset_less(m1: Counter, m2: Counter) -> bool:
    """Multiset extension of the order on naturals (Dershowitz-Manna)."""
    m1, m2 = Counter(m1), Counter(m2)
    if m1 == m2:
        return False
    extra = m1 - m2
    missing = m2 - m1
    return all(any(y > x for y in missing) for x in extra)


def measure_decreases(before: Term, after: Term) -> bool:
    """Lexicographic (chain depth, size) decrease."""
    d0, d1 = chain_depth(before), chain_depth(after)
    if multiset_less(d1, d0):
        return True
    return Counter(d1) == Counter(d0) and size(after) < size(before)
