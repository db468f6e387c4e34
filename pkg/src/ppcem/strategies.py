"""Redex-selection policies and the reduction runner."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ppcem.explicit import EM, Engine, InvalidRedex, Rule
from ppcem.terms import FAIL, App, Matchable, Matching, Redex, SApp, Term, pair_index, positions, subterm

NORMAL = "normal-form"
EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class Strategy:
    name: str
    admissible: Callable[[Term, Engine], list[Redex]]
    decompose: str = "splice"

    def select(self, t: Term, engine: Engine = EM) -> Redex | None:
        rs = self.admissible(t, engine)
        return rs[0] if rs else None


def full_redexes(t: Term, engine: Engine = EM) -> list[Redex]:
    return engine.redexes(t)


def head_pair_redexes(t: Term, engine: Engine = EM) -> list[Redex]:
    """Every redex, except that matching rules only act on the head pair."""
    out = []
    for path, s in positions(t):
        for rule, pair in engine.root_rules(s):
            if pair is None or pair == 0:
                out.append(Redex(path, rule, pair))
    return out


def md_redexes(t: Term, engine: Engine = EM, fail_first: bool = True) -> list[Redex]:
    """Redexes authorised by the matching-driven context rules.

    Reduction happens at the root, left of an application, in the head
    pair's pattern, and in the head pair's argument when the pattern is a
    free matchable or a structural application. With ``fail_first`` a failed
    matching only offers its resolution, which makes the choice unique.
    """
    out: list[Redex] = []
    _md(t, (), engine, fail_first, out)
    return out


def _md(t: Term, path, engine, fail_first, out):
    roots = [(r, i) for r, i in engine.root_rules(t) if i is None or i == 0]
    if fail_first and isinstance(t, Matching) and t.match is FAIL:
        roots = [(r, i) for r, i in roots if r is Rule.RESOLVE_FAIL]
        out.extend(Redex(path, r, i) for r, i in roots)
        return
    out.extend(Redex(path, r, i) for r, i in roots)
    if isinstance(t, App):
        _md(t.fun, path + (0,), engine, fail_first, out)
    elif isinstance(t, Matching) and t.pending:
        a, p = t.pending[0]
        ai, pi = pair_index(t, 0)
        _md(p, path + (pi,), engine, fail_first, out)
        if isinstance(p, SApp) or (isinstance(p, Matchable) and p.name not in t.binders):
            _md(a, path + (ai,), engine, fail_first, out)


def df_lr_select(t: Term, engine: Engine = EM) -> Redex | None:
    return DF_LR.select(t, engine)


def df_reordered_select(t: Term, engine: Engine = EM) -> Redex | None:
    return DF_REORDERED.select(t, engine)


def matching_driven_select(t: Term, engine: Engine = EM) -> Redex | None:
    return MATCHING_DRIVEN.select(t, engine)


FULL = Strategy("full", full_redexes)
DF_LR = Strategy("df-lr", head_pair_redexes)
DF_REORDERED = Strategy("df-reordered", head_pair_redexes, decompose="append")
MATCHING_DRIVEN = Strategy("matching-driven", md_redexes)

STRATEGIES = {s.name: s for s in (FULL, DF_LR, DF_REORDERED, MATCHING_DRIVEN)}


@dataclass(frozen=True)
class Step:
    path: tuple[int, ...]
    rule: str
    pair: int | None
    term: Term


@dataclass
class Run:
    term: Term
    trace: list[Step] = field(default_factory=list)
    verdict: str = NORMAL


def run(t: Term, strategy: Strategy = FULL, max_steps: int = 1000, engine: Engine = EM) -> Run:
    """Reduce until no redex is selected or the step budget runs out."""
    result = Run(t)
    for _ in range(max_steps):
        r = strategy.select(result.term, engine)
        if r is None:
            return result
        result.term = engine.step(result.term, r, strategy.decompose)
        result.trace.append(Step(r.path, str(r.rule), r.pair, result.term))
    if strategy.select(result.term, engine) is not None:
        result.verdict = EXHAUSTED
    return result


def replay(t: Term, trace, strategy: Strategy = FULL, engine: Engine = EM) -> Term:
    """Re-apply a recorded (path, rule, pair) sequence."""
    for s in trace:
        rule = next((r for r, i in engine.root_rules(subterm(t, s.path)) if str(r) == s.rule and i == s.pair), None)
        if rule is None:
            raise InvalidRedex(f"{s.rule} does not apply at {list(s.path)}")
        t = engine.step(t, Redex(s.path, rule, s.pair), strategy.decompose)
    return t

