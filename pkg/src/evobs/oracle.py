"""Brute-force reference for AncestorOf and Parent.

Deliberately naive: explicit pair sets, composition iterated to a fixpoint,
the reproductive bound evaluated pair by pair. Only fit for small traces;
it exists to cross-check the bitset implementation.
"""

from __future__ import annotations

from .config import ObserverConfig
from .measures import get_measure
from .relations import CausalRelation, RecognitionMap
from .trace import Trace


def transitive_closure(pairs: set) -> set:
    closure = set(pairs)
    while True:
        extra = {(a, d) for (a, b) in closure for (c, d) in closure if b == c} - closure
        if not extra:
            return closure
        closure |= extra


def delta_pairs(trace: Trace, config: ObserverConfig, candidates) -> set:
    measure = get_measure(config.measure)
    schema = trace.schema
    ordered = measure.diff_ordered(schema)
    out = set()
    for a, b in candidates:
        d = measure.diff_chars(schema, trace.snapshot(a).chars, trace.snapshot(b).chars)
        if all(not o or d_i <= bound for o, d_i, bound in zip(ordered, d, config.delta_rep_mut)):
            out.add((a, b))
    return out


def oracle_ancestry(trace: Trace, config: ObserverConfig, recognition: RecognitionMap,
                    causal: CausalRelation) -> tuple[set, set]:
    """Return (ancestor, parent) straight from the defining formulas."""
    base = set(recognition.items()) | set(causal.edges)
    inner = transitive_closure(base)
    ancestor = transitive_closure(delta_pairs(trace, config, inner))
    parent = {
        (p, c) for (p, c) in ancestor
        if not any((p, e) in ancestor and (e, c) in ancestor for (_, e) in ancestor)
    }
    return ancestor, parent
