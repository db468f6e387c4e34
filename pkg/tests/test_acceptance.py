"""Acceptance checks at full scale. Each test is one criterion."""

import time
from collections import Counter

import pytest

from ppcem.explicit import EM
from ppcem.partial import PARTIAL
from ppcem.ppc import ppc_redexes, ppc_step
from ppcem.properties import (
    MeasureMonitor,
    confluence,
    determinism,
    diamond,
    partial,
    projection,
    roundtrip,
    semantics,
    simulation,
    termination,
)
from ppcem.syntax import parse
from ppcem.terms import alpha_equiv, bot, chain_depth

SEED = 1
# every p-step taken by the termination, simulation and projection runs
MONITOR = MeasureMonitor()


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


@pytest.mark.criterion("implicit calculus: the four worked judgments")
def test_worked_judgments():
    start = time.perf_counter()
    cases = [
        ("([x] ^c ^x -> x) (^c t)", parse("t")),
        ("([x, y] ^c ^x -> x y) (^c t)", bot()),
        ("([x] ^c ^x -> x) ^c", bot()),
    ]
    for src, want in cases:
        t = parse(src)
        (r,) = ppc_redexes(t)
        assert r.path == ()
        assert alpha_equiv(ppc_step(t, r), want)
    assert ppc_redexes(parse("([x] y ^x -> x) (^c t)")) == []
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion("simulation of implicit steps, 5000 terms")
def test_simulation():
    tally, secs = timed(simulation, SEED, 5000, MONITOR)
    print(tally.summary(), f"{secs:.1f}s")
    assert tally.failed == 0, tally.witnesses
    assert tally.total >= 5000
    assert secs < 120


@pytest.mark.criterion("projection of explicit steps, 5000 terms")
def test_projection():
    tally, secs = timed(projection, SEED, 5000, MONITOR)
    print(tally.summary(), f"{secs:.1f}s")
    assert tally.total == 5000
    assert secs < 120
    assert tally.failed == 0, tally.witnesses


@pytest.mark.criterion("chain depth of the worked termination example")
def test_chain_depth_example():
    before = parse("(^c[; {}; (x ~ ^c), (x ~ ^c)])[x; {x := y[y; {}; (^c ~ ^y)]}; ]")
    after = parse("^c[; {}; (y[y; {}; (^c ~ ^y)] ~ ^c), (y_1[y_1; {}; (^c ~ ^y_1)] ~ ^c)]")
    assert chain_depth(before) == Counter({3: 1})
    assert chain_depth(after) == Counter({2: 2})
    assert alpha_equiv(EM.step(before, EM.redexes(before)[0]), after)


@pytest.mark.criterion("bounded confluence, 2000 terms")
def test_bounded_confluence():
    tally = confluence(SEED, 2000, EM, length=4, depth=8)
    rate = tally.inconclusive / tally.total
    print(tally.summary(), f"inconclusive rate {rate:.2%}")
    assert tally.total == 2000
    assert tally.failed == 0, tally.witnesses
    assert rate <= 0.05


@pytest.mark.criterion("diamond property of parallel reduction, 500 terms")
def test_diamond():
    tally = diamond(SEED, 500, max_size=10)
    print(tally.summary())
    assert tally.passed == 500 and tally.failed == 0, tally.witnesses


@pytest.mark.criterion("matching semantics stable under matching steps, 2000 matchings")
def test_semantics_stability():
    tally = semantics(SEED, 2000)
    print(tally.summary())
    assert tally.passed == 2000, tally.witnesses


@pytest.mark.criterion("matching-driven strategy is deterministic, 10000 terms")
def test_determinism():
    tally = determinism(SEED, 10000)
    print(tally.summary())
    assert tally.passed == 10000, tally.witnesses


@pytest.mark.criterion("partial substitution: trace, one-way simulation, reverse counterexample")
def test_partial_substitution():
    from ppcem.partial import ps_redexes, ps_step
    from ppcem.properties import STUCK_EXAMPLE

    t = parse(STUCK_EXAMPLE, partial=True)
    first = [r for r in ps_redexes(t) if r.path and r.rule.value == "InitB"]
    t = ps_step(t, first[0])
    rules = ["InitB", "StructHat", "StructHat", "MatchDecompose", "MatchBind", "MatchConst", "ResolveSubst"]
    for name in rules:
        t = ps_step(t, next(r for r in ps_redexes(t) if str(r.rule) == name))
    assert alpha_equiv(t, parse("b[x; {x}; (t ~ z)]", partial=True))

    tally = partial(SEED, 2000)
    print(tally.summary())
    assert tally.total == 2000 and tally.failed == 0, tally.witnesses
    assert tally.stats["reverse_counterexamples"] >= 1
    assert PARTIAL.redexes(t) == []


@pytest.mark.criterion("parser round trip, 10000 terms")
def test_round_trip():
    tally = roundtrip(SEED, 10000)
    print(tally.summary())
    assert tally.passed == 10000, tally.witnesses


@pytest.mark.criterion("termination measure decreases on every p-step")
def test_termination():
    own = MeasureMonitor()
    tally = termination(SEED, 10000, own)
    print(tally.summary(), f"shared monitor: {MONITOR.steps} steps")
    assert tally.passed == 10000, tally.witnesses
    assert own.steps >= 100_000
    assert own.violations == [] and MONITOR.violations == []
