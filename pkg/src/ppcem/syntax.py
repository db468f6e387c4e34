"""Concrete syntax.

    term  ::= lam | app
    lam   ::= '[' names ']' term '->' term
    app   ::= app atom | app '@' atom | atom
    atom  ::= name | '^' name | '#bot' | '(' term ')'
            | atom '[' names ';' match ';' delta ']'
    match ::= '#fail' | '{' (name ':=' term (',' name ':=' term)*)? '}'
            | '{' name (',' name)* '}'          -- used-name list (partial engine)
    delta ::= ε | '(' term '~' term ')' (',' '(' term '~' term ')')*

Juxtaposition is functional application, ``@`` is structural application.
A name written ``base_N`` (N > 0) carries freshness tag N, so printed terms
read back to the same names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

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
    Used,
    Var,
    bot,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<assign>:=)
  | (?P<kw>\#bot|\#fail)
  | (?P<name>[a-z][a-zA-Z0-9_]*)
  | (?P<punct>[\[\](){},;~@^])
    """,
    re.VERBOSE,
)
_TAGGED = re.compile(r"^(.*[^_])_([1-9][0-9]*)$")


class ParseError(Exception):
    def __init__(self, message, line, column, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{detail}")


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(src: str) -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        text = m.group()
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(text if kind in ("punct", "arrow", "assign", "kw") else kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


def read_name(text: str) -> Name:
    m = _TAGGED.match(text)
    if m:
        return Name(m.group(1), int(m.group(2)))
    return Name(text)


_ATOM_START = ("name", "^", "(", "#bot")


class _Parser:
    def __init__(self, src, partial):
        self.toks = tokenize(src)
        self.i = 0
        self.partial = partial

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, expected, what=None):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(what or f"unexpected {found}", t.line, t.column, expected)

    def expect(self, kind):
        if self.tok.kind != kind:
            self.fail([kind])
        t = self.tok
        self.i += 1
        return t

    def accept(self, kind):
        if self.tok.kind == kind:
            self.i += 1
            return True
        return False

    def parse(self):
        t = self.term()
        if self.tok.kind != "eof":
            self.fail(["eof", "@", *_ATOM_START, "["])
        return t

    def term(self):
        if self.tok.kind == "[":
            return self.lam()
        return self.app()

    def lam(self):
        self.expect("[")
        theta = self.names("]")
        self.expect("]")
        p = self.term()
        self.expect("->")
        b = self.term()
        return Case(theta, p, b)

    def names(self, stop):
        out = []
        if self.tok.kind == stop:
            return ()
        start = self.tok
        out.append(read_name(self.expect("name").text))
        while self.accept(","):
            out.append(read_name(self.expect("name").text))
        if len(set(out)) != len(out):
            raise ParseError("duplicate name in binder list", start.line, start.column)
        return tuple(out)

    def app(self):
        t = self.atom()
        while True:
            if self.tok.kind == "@":
                self.i += 1
                t = SApp(t, self.atom())
            elif self.tok.kind in _ATOM_START:
                t = App(t, self.atom())
            else:
                return t

    def atom(self):
        tok = self.tok
        if tok.kind == "name":
            self.i += 1
            t = Var(read_name(tok.text))
        elif tok.kind == "^":
            self.i += 1
            t = Matchable(read_name(self.expect("name").text))
        elif tok.kind == "#bot":
            self.i += 1
            t = bot()
        elif tok.kind == "(":
            self.i += 1
            t = self.term()
            self.expect(")")
        else:
            self.fail(list(_ATOM_START))
        while self.tok.kind == "[":
            t = self.matching(t)
        return t

    def matching(self, body):
        self.expect("[")
        theta = self.names(";")
        self.expect(";")
        mu = self.match()
        self.expect(";")
        delta = []
        if self.tok.kind == "(":
            delta.append(self.pair())
            while self.accept(","):
                delta.append(self.pair())
        self.expect("]")
        return Matching(body, theta, mu, tuple(delta))

    def match(self):
        if self.accept("#fail"):
            return FAIL
        self.expect("{")
        if self.accept("}"):
            return Used() if self.partial else Subst()
        first = read_name(self.expect("name").text)
        if self.tok.kind == ":=":
            binds = {}
            while True:
                self.expect(":=")
                if first in binds:
                    self.fail([], "name bound twice in substitution")
                binds[first] = self.term()
                if not self.accept(","):
                    break
                first = read_name(self.expect("name").text)
            self.expect("}")
            return Subst.of(binds)
        used = [first]
        while self.accept(","):
            used.append(read_name(self.expect("name").text))
        self.expect("}")
        return Used.of(used)

    def pair(self):
        self.expect("(")
        a = self.term()
        self.expect("~")
        p = self.term()
        self.expect(")")
        return (a, p)


def parse(src: str, partial: bool = False) -> Term:
    """Parse concrete syntax. ``partial`` reads ``{}`` as an empty used list."""
    return _Parser(src, partial).parse()


# -- printing --------------------------------------------------------------


def show(t: Term) -> str:
    return _term(t)


def _names(theta):
    return ", ".join(str(n) for n in theta)


def _term(t):
    if isinstance(t, Case):
        p = _term(t.pattern)
        if isinstance(t.pattern, Case):
            p = f"({p})"
        return f"[{_names(t.binders)}] {p} -> {_term(t.body)}"
    return _app(t)


def _app(t):
    match t:
        case App(f, a):
            return f"{_app(f)} {_atom(a)}"
        case SApp(f, a):
            return f"{_app(f)} @ {_atom(a)}"
    return _atom(t)


def _atom(t):
    match t:
        case Var(x):
            return str(x)
        case Matchable(x):
            return f"^{x}"
        case Matching(b, theta, mu, delta):
            if mu is FAIL:
                m = "#fail"
            elif isinstance(mu, Used):
                m = "{" + _names(mu.names) + "}"
            else:
                m = "{" + ", ".join(f"{n} := {_term(v)}" for n, v in mu.bindings) + "}"
            d = ", ".join(f"({_term(a)} ~ {_term(p)})" for a, p in delta)
            return f"{_atom(b)}[{_names(theta)}; {m}; {d}]"
    return f"({_term(t)})"
