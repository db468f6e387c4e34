"""Command-line front end: ``ppcem reduce | compare | check | parse``."""

from __future__ import annotations

import argparse
import json
import sys
import time

from ppcem.explicit import EM, Rule, forget, stuck_matchings
from ppcem.partial import PARTIAL, ps_root_rules
from ppcem.ppc import ppc_redexes, ppc_step
from ppcem.properties import SUITES, MeasureMonitor, purification, simulate_ppc_step
from ppcem.strategies import EXHAUSTED, NORMAL, STRATEGIES, run
from ppcem.syntax import ParseError, parse, show
from ppcem.terms import Redex, alpha_equiv, canonicalize, is_pure, using_bot

EXIT_OK, EXIT_PROPERTY, EXIT_BUDGET, EXIT_PARSE = 0, 1, 2, 3
ENGINES = {"em": EM, "partial": PARTIAL}


def _source(text: str) -> str:
    return sys.stdin.read() if text == "-" else text


def _emit(args, payload: dict, lines: list[str]):
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(lines))


def _trace_entry(i, path, rule, term) -> dict:
    return {"step": i, "path": list(path), "rule": str(rule), "term": show(term)}


def cmd_reduce(args) -> int:
    t = parse(_source(args.term), partial=args.engine == "partial")
    if args.engine == "ppc":
        return _reduce_ppc(args, t)
    engine = ENGINES[args.engine]
    result = run(t, STRATEGIES[args.strategy], args.max_steps, engine)
    trace = [_trace_entry(i, s.path, s.rule, s.term) for i, s in enumerate(result.trace, 1)]
    roots = ps_root_rules if engine is PARTIAL else EM.root_rules
    stuck = [{"path": list(s.path), "reasons": list(s.reasons)} for s in stuck_matchings(result.term, roots)]
    return _report(args, result.term, trace, result.verdict, stuck)


def _reduce_ppc(args, t) -> int:
    if not is_pure(t):
        print("error: the implicit engine only accepts pure terms", file=sys.stderr)
        return EXIT_PARSE
    t = canonicalize(t)
    trace = []
    verdict = NORMAL
    for i in range(1, args.max_steps + 2):
        rs = ppc_redexes(t)
        if not rs:
            break
        if i > args.max_steps:
            verdict = EXHAUSTED
            break
        t = ppc_step(t, rs[0])
        trace.append(_trace_entry(i, rs[0].path, rs[0].rule, t))
    return _report(args, t, trace, verdict, [])


def _report(args, term, trace, verdict, stuck) -> int:
    payload = {"result": show(term), "verdict": verdict, "steps": len(trace), "stuck": stuck}
    lines = []
    if args.trace:
        payload["trace"] = trace
        lines += [f"{e['step']:>4}  {e['rule']:<18} {e['path']}  {e['term']}" for e in trace]
    lines += [f"result: {show(term)}", f"verdict: {verdict}", f"steps: {len(trace)}"]
    lines += [f"stuck matching at {s['path']}: {'; '.join(s['reasons'])}" for s in stuck]
    _emit(args, payload, lines)
    return EXIT_BUDGET if verdict == EXHAUSTED else EXIT_OK


def cmd_compare(args) -> int:
    """Align implicit steps with explicit sequences and check projections."""
    t = parse(_source(args.term))
    if not is_pure(t):
        print("error: compare starts from a pure term", file=sys.stderr)
        return EXIT_PARSE
    t = canonicalize(t)
    rows, mismatches = [], 0
    verdict = NORMAL
    for i in range(1, args.max_steps + 2):
        rs = ppc_redexes(t)
        if not rs:
            break
        if i > args.max_steps:
            verdict = EXHAUSTED
            break
        expected = ppc_step(t, rs[0])
        steps = [(t, EM.step(t, Redex(rs[0].path, Rule.INIT_B)))]
        u, rules, lemma = simulate_ppc_step(t, rs[0], lambda a, _, b: steps.append((a, b)))
        projected = all(_projects(a, b) for a, b in steps)
        ok = alpha_equiv(forget(u), expected) and lemma and projected
        mismatches += not ok
        rows.append(
            {
                "step": i,
                "path": list(rs[0].path),
                "em_rules": [str(r) for r in rules],
                "term": show(expected),
                "agree": ok,
            }
        )
        t = expected
    payload = {"result": show(t), "verdict": verdict, "alignment": rows, "mismatches": mismatches}
    lines = [
        f"{r['step']:>4}  {'ok ' if r['agree'] else 'BAD'} {r['path']}  {' '.join(r['em_rules'])}  =>  {r['term']}"
        for r in rows
    ]
    lines += [f"result: {show(t)}", f"verdict: {verdict}", f"mismatches: {mismatches}"]
    _emit(args, payload, lines)
    if mismatches:
        return EXIT_PROPERTY
    return EXIT_BUDGET if verdict == EXHAUSTED else EXIT_OK


def _projects(before, after) -> bool:
    """An explicit step projects to at most one implicit step between
    purifications."""
    d0, d1 = purification(before), purification(after)
    if not (is_pure(d0) and is_pure(d1)) or alpha_equiv(d0, d1):
        return True
    return any(alpha_equiv(ppc_step(d0, q), d1) for q in ppc_redexes(d0))


def cmd_check(args) -> int:
    suite = SUITES[args.suite]
    kwargs = {"seed": args.seed, "count": args.count}
    monitor = None
    if args.suite in ("termination", "simulation", "projection"):
        monitor = kwargs["monitor"] = MeasureMonitor()
    start = time.perf_counter()
    tally = suite(**kwargs)
    elapsed = time.perf_counter() - start
    payload = {
        "suite": args.suite,
        "passed": tally.passed,
        "failed": tally.failed,
        "inconclusive": tally.inconclusive,
        "stats": tally.stats,
        "seconds": round(elapsed, 3),
        "witnesses": [str(w) for w in tally.witnesses],
    }
    lines = [f"{tally.summary()} ({elapsed:.1f}s)"]
    if monitor is not None:
        payload["measure_steps"] = monitor.steps
        payload["measure_violations"] = len(monitor.violations)
        lines.append(f"measure: {monitor.steps} steps, {len(monitor.violations)} violations")
    lines += [f"  witness: {w}" for w in tally.witnesses]
    _emit(args, payload, lines)
    bad = tally.failed or (monitor is not None and monitor.violations)
    return EXIT_PROPERTY if bad else EXIT_OK


def cmd_parse(args) -> int:
    t = parse(_source(args.term), partial=args.partial)
    _emit(args, {"term": show(t)}, [show(t)])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bot", metavar="EXPR", help="closed pure term used as the failure result")
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = argparse.ArgumentParser(prog="ppcem", description="Pattern calculus with explicit matching.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", parents=[common], help="reduce a term")
    r.add_argument("term", help="term text, or - for stdin")
    r.add_argument("--engine", choices=("ppc", "em", "partial"), default="em")
    r.add_argument("--strategy", choices=sorted(STRATEGIES), default="full")
    r.add_argument("--max-steps", type=int, default=1000)
    r.add_argument("--trace", action="store_true")
    r.set_defaults(func=cmd_reduce)

    c = sub.add_parser("compare", parents=[common], help="run the implicit and explicit engines side by side")
    c.add_argument("term")
    c.add_argument("--max-steps", type=int, default=100)
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("check", parents=[common], help="run a property suite")
    k.add_argument("suite", choices=sorted(SUITES))
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--count", type=int, default=100)
    k.set_defaults(func=cmd_check)

    s = sub.add_parser("parse", parents=[common], help="parse and print a term")
    s.add_argument("term")
    s.add_argument("--partial", action="store_true", help="read {} as an empty used-name list")
    s.set_defaults(func=cmd_parse)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.bot:
            with using_bot(parse(args.bot)):
                return args.func(args)
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
