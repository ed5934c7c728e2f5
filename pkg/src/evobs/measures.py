"""Distance measures over characteristic vectors.

A measure maps two char vectors to a per-dimension difference vector whose
components are non-negative numbers with 0 meaning "no observable change".
Measures also know how to bucket entities for the reproductive bound check:
``delta_blocker`` returns a key function and a flag saying whether equal keys
already guarantee the bound (so no pairwise diff is needed inside a bucket).
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

from .trace import CharSpaceSchema, EntitySnapshot


class UnknownMeasureError(KeyError):
    def __str__(self) -> str:
        return f"unknown distance measure {self.args[0]!r}"


class ArityError(ValueError):
    pass


def _free(bound) -> bool:
    return bound is None or bound == math.inf


class Measure:
    """Base measure: one difference per dimension."""

    name = "?"

    def diff_arity(self, schema: CharSpaceSchema) -> int:
        return len(schema)

    def diff_ordered(self, schema: CharSpaceSchema) -> list[bool]:
        return [d.ordered for d in schema.dimensions]

    def diff_chars(self, schema: CharSpaceSchema, a: tuple, b: tuple) -> tuple:
        raise NotImplementedError

    # values whose diff is zero under this dimension's bound 0
    def dim_key(self, schema: CharSpaceSchema, i: int, value):
        return value

    def dim_binary(self, schema: CharSpaceSchema, i: int) -> bool:
        """True when the dimension's diff only takes the values 0 and 1."""
        return False

    def delta_blocker(self, schema: CharSpaceSchema, bound: Sequence) -> tuple[Callable, bool]:
        ordered = self.diff_ordered(schema)
        keyed = []
        exact = True
        for i, (is_ordered, b) in enumerate(zip(ordered, bound)):
            if not is_ordered or _free(b):
                continue
            if b == 0:
                keyed.append(i)
            elif self.dim_binary(schema, i) and b >= 1:
                continue
            else:
                exact = False

        def key(chars):
            return tuple(self.dim_key(schema, i, chars[i]) for i in keyed)

        return key, exact

    def within(self, schema: CharSpaceSchema, diff: Sequence, bound: Sequence) -> bool:
        """Reproductive bound check: ordered components only."""
        for is_ordered, d, b in zip(self.diff_ordered(schema), diff, bound):
            if is_ordered and not _free(b) and d > b:
                return False
        return True


class XorMeasure(Measure):
    """Per-position XOR of bit vectors."""

    name = "xor"

    def diff_chars(self, schema, a, b):
        return tuple(int(x) ^ int(y) for x, y in zip(a, b))

    def dim_binary(self, schema, i):
        return True


class HammingMeasure(Measure):
    """Number of differing positions, collapsed to a single component."""

    name = "hamming"

    def diff_arity(self, schema):
        return 1

    def diff_ordered(self, schema):
        return [any(d.ordered for d in schema.dimensions)]

    def diff_chars(self, schema, a, b):
        return (sum(1 for x, y in zip(a, b) if x != y),)

    def delta_blocker(self, schema, bound):
        b = bound[0]
        if not self.diff_ordered(schema)[0] or _free(b) or b >= len(schema):
            return (lambda chars: ()), True
        if b == 0:
            return (lambda chars: tuple(chars)), True
        return (lambda chars: ()), False


class AbsDiffMeasure(Measure):
    """Absolute numeric difference per dimension, 0/1 for unordered ones."""

    name = "absdiff"

    def diff_chars(self, schema, a, b):
        out = []
        for dim, x, y in zip(schema.dimensions, a, b):
            if dim.order == "total":
                out.append(abs(y - x))
            else:
                out.append(0 if x == y else 1)
        return tuple(out)

    def dim_binary(self, schema, i):
        return schema.dimensions[i].order != "total"


class EqualityMeasure(Measure):
    """0 when values are equal, 1 otherwise."""

    name = "equality"

    def diff_chars(self, schema, a, b):
        return tuple(0 if x == y else 1 for x, y in zip(a, b))

    def dim_binary(self, schema, i):
        return True


class LangtonMeasure(Measure):
    """[d_g, d_p]: geometry up to translation, then pivot equality.

    Expects chars ``(shape, pivot)`` where ``shape`` is the pivot-relative
    rendering produced by the Langton observer.
    """

    name = "langton"
    rotations = False

    def _shape_key(self, shape):
        return canonical_rotation(shape) if self.rotations else shape

    def diff_chars(self, schema, a, b):
        d_g = 0 if self._shape_key(a[0]) == self._shape_key(b[0]) else 1
        d_p = 0 if tuple(a[1]) == tuple(b[1]) else 1
        return (d_g, d_p)

    def dim_key(self, schema, i, value):
        return self._shape_key(value) if i == 0 else value

    def dim_binary(self, schema, i):
        return True


class LangtonRotMeasure(LangtonMeasure):
    """Like ``langton`` but geometry also matches under quarter turns."""

    name = "langton-rot"
    rotations = True


def rotate_shape(shape: str) -> str:
    """Rotate a '/'-separated shape rendering a quarter turn clockwise."""
    rows = shape.split("/")
    h, w = len(rows), len(rows[0]) if rows else 0
    return "/".join("".join(rows[h - 1 - r][c] for r in range(h)) for c in range(w))


def canonical_rotation(shape: str) -> str:
    forms = [shape]
    for _ in range(3):
        forms.append(rotate_shape(forms[-1]))
    return min(forms)


class AlchemyMeasure(Measure):
    """[term, tag] differences for the lambda chemistry.

    Term: 0 iff canonical (alpha-normal) forms agree. Tag: 0 iff the second
    tag continues the first across a step (same size and rank, multiplicity
    up by one) or the tags are identical.
    """

    name = "alchemy"

    def diff_chars(self, schema, a, b):
        d_term = 0 if a[0] == b[0] else 1
        ta, tb = tuple(a[1]), tuple(b[1])
        follows = ta[:2] == tb[:2] and tb[2] == ta[2] + 1
        d_tag = 0 if (follows or ta == tb) else 1
        return (d_term, d_tag)

    def dim_binary(self, schema, i):
        return True


MEASURES: dict[str, Measure] = {
    m.name: m
    for m in (
        XorMeasure(), HammingMeasure(), AbsDiffMeasure(), EqualityMeasure(),
        LangtonMeasure(), LangtonRotMeasure(), AlchemyMeasure(),
    )
}


def get_measure(name: str) -> Measure:
    try:
        return MEASURES[name]
    except KeyError:
        raise UnknownMeasureError(name) from None


def diff(schema: CharSpaceSchema, measure: str, a: EntitySnapshot, b: EntitySnapshot) -> tuple:
    m = get_measure(measure)
    n = len(schema)
    for s in (a, b):
        if len(s.chars) != n:
            raise ArityError(f"{s.ref} has {len(s.chars)} chars, schema has {n}")
    return m.diff_chars(schema, a.chars, b.chars)


def is_zero(d: Sequence) -> bool:
    return all(x == 0 for x in d)


def within(d: Sequence, bound: Sequence) -> bool:
    """Component-wise ``d <= bound`` (used for the in-place mutation bound)."""
    return all(_free(b) or x <= b for x, b in zip(d, bound))
