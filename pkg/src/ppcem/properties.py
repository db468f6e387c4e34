"""Property suites over seeded random terms.

Every suite returns a Tally of pass / fail / inconclusive verdicts, keeping
a few failing witnesses for diagnosis.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ppcem import generate as gen
from ppcem.explicit import (
    EM,
    MATCH_RULES,
    STRUCT_RULES,
    Engine,
    Rule,
    forget,
    forget_match,
    is_well_formed,
    matching_semantics,
    normalize_p,
)
from ppcem.parallel import ParallelOverflow, diamond_closes
from ppcem.partial import PARTIAL, extra_redexes, simulates, translate
from ppcem.ppc import compound_match, ppc_redexes, ppc_step
from ppcem.strategies import md_redexes
from ppcem.syntax import parse, show
from ppcem.terms import (
    FAIL,
    App,
    Matchable,
    Matching,
    Redex,
    SApp,
    Term,
    alpha_equiv,
    alpha_key,
    is_pure,
    measure_decreases,
    pair_index,
    same_outcome,
    size,
    subterm,
)

PASS, FAIL_, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class Tally:
    name: str
    passed: int = 0
    failed: int = 0
    inconclusive: int = 0
    witnesses: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def add(self, verdict: str, witness=None):
        if verdict == PASS:
            self.passed += 1
        elif verdict == FAIL_:
            self.failed += 1
            if witness is not None and len(self.witnesses) < 5:
                self.witnesses.append(witness)
        else:
            self.inconclusive += 1

    @property
    def total(self) -> int:
        return self.passed + self.failed + self.inconclusive

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def bump(self, key: str, n: int = 1):
        self.stats[key] = self.stats.get(key, 0) + n

    def summary(self) -> str:
        extra = "".join(f" {k}={v}" for k, v in sorted(self.stats.items()))
        return f"{self.name}: {self.passed} passed, {self.failed} failed, {self.inconclusive} inconclusive{extra}"


def _rng(seed, i):
    return random.Random(f"{seed}:{i}")


# -- termination -----------------------------------------------------------


class MeasureMonitor:
    """Checks the (chain depth, size) decrease on every observed step."""

    def __init__(self):
        self.steps = 0
        self.violations: list = []

    def __call__(self, before: Term, r: Redex, after: Term):
        self.steps += 1
        if not measure_decreases(before, after):
            self.violations.append((show(before), str(r.rule), show(after)))


def termination(seed: int = 0, count: int = 1000, monitor: MeasureMonitor | None = None) -> Tally:
    """Normalise random terms and some of their reducts, checking the measure."""
    tally = Tally("termination")
    monitor = monitor or MeasureMonitor()
    for i in range(count):
        rng = _rng(seed, i)
        t = gen.em_term(rng, 3, 14) if i % 2 else gen.reduced_term(rng, 4, 16, 4)
        before = len(monitor.violations)
        try:
            normalize_p(t, monitor, max_steps=100_000)
            for k in (2, 5):
                normalize_p(gen.reduct(rng, t, k), monitor, max_steps=100_000)
        except RuntimeError:
            tally.add(FAIL_, show(t))
            continue
        if len(monitor.violations) > before:
            tally.add(FAIL_, monitor.violations[-1])
        else:
            tally.add(PASS)
    tally.stats["p_steps"] = monitor.steps
    return tally


# -- simulation of the implicit calculus -----------------------------------


def _spine_struct(t: Term, path) -> tuple | None:
    """Innermost structural-step position on the application spine of ``t``."""
    while isinstance(t, App):
        if isinstance(t.fun, (Matchable, SApp)):
            return path
        t, path = t.fun, path + (0,)
    return None


def _drive(t: Term, path, on_step=None) -> tuple[Term, list]:
    """Solve the matching at ``path`` with structural and matching steps
    and resolve it. Returns the final term and the rules used."""
    rules = []

    def step(r):
        nonlocal t
        u = EM.step(t, r)
        if on_step is not None:
            on_step(t, r, u)
        t = u
        rules.append(r.rule)

    while True:
        m = subterm(t, path)
        if not isinstance(m, Matching):
            raise RuntimeError("matching vanished")
        theta = frozenset(m.binders)
        if m.match is FAIL:
            step(Redex(path, Rule.RESOLVE_FAIL))
            return t, rules
        if not m.pending:
            r = Rule.RESOLVE_SUBST if m.match.domain() == theta else Rule.RESOLVE_DOM_MISMATCH
            step(Redex(path, r))
            return t, rules
        for i, (a, p) in enumerate(m.pending):
            ai, pi = pair_index(m, i)
            if isinstance(p, Matchable) and p.name in theta:
                r = Redex(path, Rule.MATCH_BIND, i)
            elif (q := _spine_struct(p, path + (pi,))) is not None:
                r = Redex(q, Rule.STRUCT_HAT if isinstance(subterm(t, q).fun, Matchable) else Rule.STRUCT_BULLET)
            elif (q := _spine_struct(a, path + (ai,))) is not None:
                r = Redex(q, Rule.STRUCT_HAT if isinstance(subterm(t, q).fun, Matchable) else Rule.STRUCT_BULLET)
            else:
                found = [rule for rule, j in EM.root_rules(m) if j == i]
                if not found:
                    continue
                r = Redex(path, found[0], i)
            break
        else:
            raise RuntimeError(f"matching stuck at {list(path)}")
        step(r)


def simulate_ppc_step(t: Term, r: Redex, on_step=None):
    """Explicit reduction for one implicit step at ``r.path``.

    Returns (explicit result, rules used, final match before resolution
    agrees with compound matching).
    """
    node = subterm(t, r.path)
    expected = compound_match(node.arg, node.fun.pattern, node.fun.binders)
    u = EM.step(t, Redex(r.path, Rule.INIT_B))
    m_seen = {}

    def watch(before, red, after):
        if red.rule in (Rule.RESOLVE_SUBST, Rule.RESOLVE_DOM_MISMATCH, Rule.RESOLVE_FAIL):
            m_seen["match"] = subterm(before, red.path).match
        if on_step is not None:
            on_step(before, red, after)

    u, rules = _drive(u, r.path, watch)
    lemma = same_outcome(forget_match(m_seen["match"]), expected)
    return u, [Rule.INIT_B] + rules, lemma


def simulation(seed: int = 0, count: int = 1000, monitor: MeasureMonitor | None = None) -> Tally:
    tally = Tally("simulation")
    for i in range(count):
        t = gen.pure_with_redex(_rng(seed, i))
        for r in ppc_redexes(t):
            expected = ppc_step(t, r)
            try:
                u, _, lemma = simulate_ppc_step(t, r, monitor)
            except RuntimeError as e:
                tally.add(FAIL_, (show(t), list(r.path), str(e)))
                continue
            if alpha_equiv(forget(u), expected) and is_well_formed(u) and lemma:
                tally.add(PASS)
                if alpha_equiv(u, expected):
                    tally.bump("exact")
            else:
                tally.add(FAIL_, (show(t), list(r.path), show(u), show(expected)))
    return tally


# -- projection ------------------------------------------------------------


def purification(t: Term, monitor=None) -> Term:
    return forget(normalize_p(t, monitor))


def ppc_reachable(t: Term, u: Term, max_steps: int) -> int | None:
    """Least number of implicit steps (up to ``max_steps``) from t to u."""
    goal = alpha_key(u)
    frontier = {alpha_key(t): t}
    for d in range(max_steps + 1):
        if goal in frontier:
            return d
        nxt = {}
        for s in frontier.values():
            for r in ppc_redexes(s):
                v = ppc_step(s, r)
                nxt.setdefault(alpha_key(v), v)
        if len(nxt) > 5000:
            return None
        frontier = nxt
    return None


def projection(seed: int = 0, count: int = 1000, monitor: MeasureMonitor | None = None) -> Tally:
    """Each explicit step projects to at most one implicit step between
    purifications. The number of witnesses needing more steps is recorded."""
    tally = Tally("projection")
    i = 0
    while tally.total < count:
        rng = _rng(seed, i)
        i += 1
        t = gen.reduced_term(rng, 4, 14, 6)
        if not is_well_formed(t):
            tally.add(FAIL_, ("not well-formed", show(t)))
            continue
        down = purification(t, monitor)
        if not is_pure(down):
            tally.bump("skipped_impure")
            continue
        verdict = PASS
        for r in EM.redexes(t):
            u = EM.step(t, r)
            down2 = purification(u, monitor)
            if not is_pure(down2):
                continue
            tally.bump("steps")
            if alpha_equiv(down, down2):
                continue
            if any(alpha_equiv(ppc_step(down, q), down2) for q in ppc_redexes(down)):
                tally.bump("one_step")
                continue
            n = ppc_reachable(down, down2, 6)
            tally.bump("multi_step" if n else "unreached")
            verdict = FAIL_
            tally.add(FAIL_, (show(t), str(r.rule), list(r.path), show(down), show(down2), n))
            break
        if verdict == PASS:
            tally.add(PASS)
    return tally


# -- confluence ------------------------------------------------------------


def walk(rng, t, n, engine):
    for _ in range(n):
        rs = engine.redexes(t)
        if not rs:
            break
        t = engine.step(t, rng.choice(rs))
    return t


def join(u1: Term, u2: Term, engine: Engine = EM, depth: int = 8, max_states: int = 20_000) -> str:
    """Search a common reduct of ``u1`` and ``u2``.

    A failure is only reported when both reachable sets were exhausted
    within the depth without meeting; hitting a cap is inconclusive.
    """
    seen = [{alpha_key(u1): u1}, {alpha_key(u2): u2}]
    if seen[0].keys() & seen[1].keys():
        return PASS
    # cheap attempt: first-redex reduction on both sides
    for side, start in enumerate((u1, u2)):
        t = start
        for _ in range(depth):
            r = engine.first_redex(t)
            if r is None:
                break
            t = engine.step(t, r)
            seen[side].setdefault(alpha_key(t), t)
    if seen[0].keys() & seen[1].keys():
        return PASS
    seen = [{alpha_key(u1): u1}, {alpha_key(u2): u2}]
    frontiers = [[u1], [u2]]
    complete = True
    for _ in range(depth):
        for side in (0, 1):
            nxt = []
            for t in frontiers[side]:
                for r in engine.redexes(t):
                    v = engine.step(t, r)
                    k = alpha_key(v)
                    if k in seen[side]:
                        continue
                    seen[side][k] = v
                    if k in seen[1 - side]:
                        return PASS
                    nxt.append(v)
            frontiers[side] = nxt
            if len(seen[0]) + len(seen[1]) > max_states:
                return INCONCLUSIVE
        if not frontiers[0] and not frontiers[1]:
            break
    else:
        complete = not frontiers[0] and not frontiers[1]
    return FAIL_ if complete else INCONCLUSIVE


def confluence(
    seed: int = 0, count: int = 1000, engine: Engine = EM, length: int = 4, depth: int = 8, max_states: int = 20_000
) -> Tally:
    tally = Tally(f"confluence[{engine.name}]")
    for i in range(count):
        rng = _rng(seed, i)
        t = gen.em_term(rng, 3, 12)
        if engine is PARTIAL:
            t = translate(t)
        u1 = walk(rng, t, rng.randint(1, length), engine)
        u2 = walk(rng, t, rng.randint(1, length), engine)
        v = join(u1, u2, engine, depth, max_states)
        tally.add(v, (show(t), show(u1), show(u2)))
    return tally


# -- parallel reduction ------------------------------------------------------


def diamond(seed: int = 0, count: int = 500, max_size: int = 10, budget: int = 20_000) -> Tally:
    tally = Tally("diamond")
    i = 0
    while tally.total < count:
        rng = _rng(seed, i)
        i += 1
        t = gen.em_term(rng, 2, 8)
        if size(t) > max_size or not EM.redexes(t):
            continue
        try:
            ok, reducts, bad = diamond_closes(t, budget)
        except ParallelOverflow:
            tally.add(INCONCLUSIVE)
            continue
        tally.bump("reducts", len(reducts))
        tally.add(PASS if ok else FAIL_, (show(t), bad and tuple(map(show, bad))))
    return tally


# -- matching semantics ------------------------------------------------------


def _semantics(m: Matching):
    return matching_semantics(m.binders, m.match, m.pending)


def _local_steps(m: Matching) -> list[Redex]:
    """Structural and matching steps that keep ``m`` a matching and stay
    out of its body."""
    out = []
    for r in EM.redexes(m):
        if r.rule in MATCH_RULES and r.path == ():
            out.append(r)
        elif r.rule in STRUCT_RULES and r.path and r.path[0] != 0:
            out.append(r)
    return out


def semantics(seed: int = 0, count: int = 1000) -> Tally:
    tally = Tally("semantics")
    for i in range(count):
        rng = _rng(seed, i)
        m = gen.flat_matching(rng)
        verdict = PASS
        for _ in range(50):
            steps = _local_steps(m)
            if not steps:
                break
            before = _semantics(m)
            for r in steps:
                tally.bump("steps")
                after = _semantics(EM.step(m, r))
                if not same_outcome(before, after):
                    verdict = FAIL_
                    tally.add(FAIL_, (show(m), str(r.rule), r.pair))
                    break
            if verdict == FAIL_:
                break
            m = EM.step(m, rng.choice(steps))
        if verdict == PASS:
            tally.add(PASS)
    return tally


# -- strategy determinism ----------------------------------------------------


def determinism(seed: int = 0, count: int = 1000, max_steps: int = 30, fail_first: bool = True) -> Tally:
    """At most one matching-driven redex at every state of a run."""
    tally = Tally("determinism")
    for i in range(count):
        t = gen.em_term(_rng(seed, i), 3, 14)
        verdict = PASS
        for _ in range(max_steps):
            rs = md_redexes(t, EM, fail_first)
            tally.bump("states")
            if len(rs) > 1:
                verdict = FAIL_
                tally.add(FAIL_, (show(t), [(r.path, str(r.rule), r.pair) for r in rs]))
                break
            if not rs:
                break
            t = EM.step(t, rs[0])
        if verdict == PASS:
            tally.add(PASS)
    return tally


# -- partial substitution ------------------------------------------------------

STUCK_EXAMPLE = "([x] ^x z -> (([] x -> b) ^c)) (^c t)"
STUCK_EM_NORMAL = "(b[; {}; (^c ~ x)])[x; {x := ^c}; (t ~ z)]"


def partial(seed: int = 0, count: int = 1000, depth: int = 8) -> Tally:
    """One-way simulation through ``translate`` for every explicit step."""
    tally = Tally("partial")
    for i in range(count):
        rng = _rng(seed, i)
        t = gen.em_term(rng, 3, 12) if i % 2 else gen.reduced_term(rng, 4, 12, 5)
        verdict = PASS
        for r in EM.redexes(t):
            u = EM.step(t, r)
            v = simulates(t, u, max_depth=depth)
            tally.bump("steps")
            if v is None:
                verdict = INCONCLUSIVE
            elif not v:
                verdict = FAIL_
                tally.add(FAIL_, (show(t), str(r.rule), list(r.path)))
                break
        if verdict != FAIL_:
            tally.add(verdict)
    t = parse(STUCK_EM_NORMAL)
    extra = extra_redexes(t, EM.redexes)
    tally.stats["reverse_counterexamples"] = 1 if extra else 0
    return tally


# -- concrete syntax -----------------------------------------------------------


def roundtrip(seed: int = 0, count: int = 1000) -> Tally:
    tally = Tally("roundtrip")
    for i in range(count):
        rng = _rng(seed, i)
        t = gen.em_term(rng, 1, 20)
        partial_form = i % 4 == 0
        if partial_form:
            t = translate(t)
        text = show(t)
        try:
            back = parse(text, partial=partial_form)
        except Exception as e:  # noqa: BLE001 - reported as a failure
            tally.add(FAIL_, (text, str(e)))
            continue
        tally.add(PASS if alpha_equiv(back, t) and show(back) == text else FAIL_, text)
    return tally


SUITES = {
    "termination": termination,
    "confluence": confluence,
    "confluence-partial": lambda seed=0, count=1000: confluence(seed, count, PARTIAL),
    "simulation": simulation,
    "projection": projection,
    "semantics": semantics,
    "determinism": determinism,
    "partial": partial,
    "diamond": diamond,
    "roundtrip": roundtrip,
}
