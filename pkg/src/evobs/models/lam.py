"""Untyped lambda terms: syntax, alpha-equivalence and normal-order reduction.

Named terms are what users read and write. Reduction works on a nameless
form (de Bruijn indices, nested tuples) so alpha-equal terms are literally
equal and hashable:

    ("v", k)        bound variable, k binders out (0 = innermost)
    ("f", name)     free variable
    ("l", body)     abstraction
    ("a", fn, arg)  application
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Abs:
    var: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


Term = Union[Var, Abs, App]


class LambdaSyntaxError(ValueError):
    def __init__(self, message, pos):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


class UnboundVariableError(ValueError):
    pass


# --- parsing --------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[\\λ.()]))")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def peek(self):
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            rest = self.text[self.pos:]
            if rest.strip():
                raise LambdaSyntaxError(f"unexpected character {rest.strip()[0]!r}",
                                        len(self.text) - len(rest.lstrip()))
            return None, None, len(self.text)
        kind = "ident" if m.group("ident") else m.group("sym")
        if kind == "λ":
            kind = "\\"
        return kind, m.group("ident") or m.group("sym"), m.end()

    def take(self, expected=None):
        kind, value, end = self.peek()
        if expected is not None and kind != expected:
            what = repr(value) if kind else "end of input"
            raise LambdaSyntaxError(f"expected {expected!r}, found {what}", self._at())
        self.pos = end
        return kind, value

    def _at(self):
        return len(self.text) - len(self.text[self.pos:].lstrip())

    def term(self):
        kind, value, _ = self.peek()
        if kind == "ident":
            self.take()
            return Var(value)
        if kind == "\\":
            self.take()
            _, name = self.take("ident")
            self.take(".")
            return Abs(name, self.term())
        if kind == "(":
            first = self.group()
            # "(t)(u)(v)..." chains apply left to right
            while self.peek()[0] == "(":
                first = App(first, self.group())
            return first
        what = repr(value) if kind else "end of input"
        raise LambdaSyntaxError(f"expected a term, found {what}", self._at())

    def group(self):
        self.take("(")
        t = self.term()
        # "(t u)" form
        while self.peek()[0] not in (")", None):
            t = App(t, self.term())
        self.take(")")
        return t


def parse(text: str, allow_free: bool = True) -> Term:
    p = _Parser(text)
    t = p.term()
    kind, value, _ = p.peek()
    if kind is not None:
        raise LambdaSyntaxError(f"trailing input {value!r}", p._at())
    if not allow_free:
        free = free_vars(t)
        if free:
            raise UnboundVariableError(f"unbound variable(s): {', '.join(sorted(free))}")
    return t


def free_vars(t: Term) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Abs):
        return free_vars(t.body) - {t.var}
    return free_vars(t.fn) | free_vars(t.arg)


# --- nameless form --------------------------------------------------------


def to_db(t: Term, scope: tuple = ()) -> tuple:
    if isinstance(t, Var):
        for k, name in enumerate(reversed(scope)):
            if name == t.name:
                return ("v", k)
        return ("f", t.name)
    if isinstance(t, Abs):
        return ("l", to_db(t.body, scope + (t.var,)))
    return ("a", to_db(t.fn, scope), to_db(t.arg, scope))


def from_db(d: tuple, depth: int = 0) -> Term:
    """Named term with binders called x1, x2, ... by nesting depth."""
    tag = d[0]
    if tag == "v":
        return Var(f"x{depth - d[1]}")
    if tag == "f":
        return Var(d[1])
    if tag == "l":
        return Abs(f"x{depth + 1}", from_db(d[1], depth + 1))
    return App(from_db(d[1], depth), from_db(d[2], depth))


def alpha_eq(a: Term, b: Term) -> bool:
    return to_db(a) == to_db(b)


def to_str(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        return f"\\{t.var}.{to_str(t.body)}"
    return f"({to_str(t.fn)})({to_str(t.arg)})"


def canonical(t: Term | tuple) -> str:
    """Alpha-invariant printed form."""
    d = t if isinstance(t, tuple) else to_db(t)
    return to_str(from_db(d))


def size(t: Term | tuple) -> int:
    """2 per abstraction plus 1 per variable occurrence."""
    if isinstance(t, tuple):
        tag = t[0]
        if tag in ("v", "f"):
            return 1
        if tag == "l":
            return 2 + size(t[1])
        return size(t[1]) + size(t[2])
    if isinstance(t, Var):
        return 1
    if isinstance(t, Abs):
        return 2 + size(t.body)
    return size(t.fn) + size(t.arg)


# --- reduction ------------------------------------------------------------


def _shift(d, by, cutoff=0):
    tag = d[0]
    if tag == "v":
        return ("v", d[1] + by) if d[1] >= cutoff else d
    if tag == "f":
        return d
    if tag == "l":
        return ("l", _shift(d[1], by, cutoff + 1))
    return ("a", _shift(d[1], by, cutoff), _shift(d[2], by, cutoff))


def _subst(d, j, s):
    tag = d[0]
    if tag == "v":
        return s if d[1] == j else d
    if tag == "f":
        return d
    if tag == "l":
        return ("l", _subst(d[1], j + 1, _shift(s, 1)))
    return ("a", _subst(d[1], j, s), _subst(d[2], j, s))


def beta(body, arg):
    """Contract (\\.body) arg."""
    return _shift(_subst(body, 0, _shift(arg, 1)), -1)


def step(d):
    """One leftmost-outermost step, or None when d is in normal form."""
    tag = d[0]
    if tag == "a":
        fn = d[1]
        if fn[0] == "l":
            return beta(fn[1], d[2])
        r = step(fn)
        if r is not None:
            return ("a", r, d[2])
        r = step(d[2])
        return None if r is None else ("a", fn, r)
    if tag == "l":
        r = step(d[1])
        return None if r is None else ("l", r)
    return None


NORMAL = "normal"
CYCLE = "cycle"
EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class Reduction:
    kind: str  # normal | cycle | exhausted
    term: tuple | None
    steps: int


def reduce(d, max_steps: int = 100, max_size: int = 200) -> Reduction:
    """Normal-order reduction under a step and size budget.

    A term met twice on the reduction path is a cycle; that term is returned
    as the representative of its own non-terminating reduction.
    """
    if not isinstance(d, tuple):
        d = to_db(d)
    seen = {d}
    for n in range(max_steps):
        nxt = step(d)
        if nxt is None:
            return Reduction(NORMAL, d, n)
        if nxt in seen:
            return Reduction(CYCLE, nxt, n + 1)
        if size(nxt) > max_size:
            return Reduction(EXHAUSTED, None, n + 1)
        seen.add(nxt)
        d = nxt
    if step(d) is None:
        return Reduction(NORMAL, d, max_steps)
    return Reduction(EXHAUSTED, None, max_steps)


# --- random terms ---------------------------------------------------------


def random_term(rng: random.Random, depth: int = 5, weights=(1.0, 1.0, 1.0), allow_free: bool = False,
                _scope: int = 0) -> tuple:
    """Closed (unless allow_free) nameless term of bounded depth.

    ``weights`` are the relative odds of (abstraction, application,
    variable) at each node.
    """
    w_abs, w_app, w_var = weights
    can_var = _scope > 0 or allow_free
    if depth <= 1:
        w_abs, w_app = (0.0, 0.0) if can_var else (1.0, 0.0)
    if not can_var:
        w_var = 0.0
    if depth <= 0:
        if _scope:
            return ("v", rng.randrange(_scope))
        return ("f", "z") if allow_free else ("l", ("v", 0))
    r = rng.random() * (w_abs + w_app + w_var)
    if r < w_abs:
        return ("l", random_term(rng, depth - 1, weights, allow_free, _scope + 1))
    if r < w_abs + w_app:
        return ("a", random_term(rng, depth - 1, weights, allow_free, _scope),
                random_term(rng, depth - 1, weights, allow_free, _scope))
    if _scope and (not allow_free or rng.random() < 0.9):
        return ("v", rng.randrange(_scope))
    return ("f", "z")
