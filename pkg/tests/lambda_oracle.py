"""Applicative-order reducer over named terms.

Shares nothing with the library's nameless normal-order reducer beyond the
AST classes: substitution renames binders to dodge capture.
"""

import itertools

from evobs.models.lam import Abs, App, Var, free_vars

_fresh = itertools.count()


def subst(t, x, s):
    if isinstance(t, Var):
        return s if t.name == x else t
    if isinstance(t, App):
        return App(subst(t.fn, x, s), subst(t.arg, x, s))
    if t.var == x:
        return t
    if t.var in free_vars(s):
        new = f"_v{next(_fresh)}"
        body = subst(t.body, t.var, Var(new))
        return Abs(new, subst(body, x, s))
    return Abs(t.var, subst(t.body, x, s))


def step(t):
    """Leftmost-innermost step, or None in normal form."""
    if isinstance(t, Var):
        return None
    if isinstance(t, Abs):
        b = step(t.body)
        return None if b is None else Abs(t.var, b)
    f = step(t.fn)
    if f is not None:
        return App(f, t.arg)
    a = step(t.arg)
    if a is not None:
        return App(t.fn, a)
    if isinstance(t.fn, Abs):
        return subst(t.fn.body, t.fn.var, t.arg)
    return None


def normalize(t, max_steps=500, max_size=400):
    from evobs.models.lam import size
    for _ in range(max_steps):
        nxt = step(t)
        if nxt is None:
            return t
        if size(nxt) > max_size:
            return None
        t = nxt
    return None
