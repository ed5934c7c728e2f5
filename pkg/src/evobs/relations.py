"""Recognition, causality, the reproductive bound and ancestry.

Entities are indexed in state order so every relation edge points from a
lower index to a higher one. Reachability and the outer closure are then
computed bit-parallel with Python ints as bitsets, one backwards sweep each.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from . import verdict as V
from .config import ObserverConfig
from .measures import get_measure, within
from .trace import EntityRef, Trace, UnknownEntityError


class UnknownRecognizerError(KeyError):
    def __str__(self) -> str:
        return f"unknown recognizer {self.args[0]!r}"


class SchemaMismatchError(ValueError):
    pass


RecognitionMap = dict  # EntityRef -> EntityRef


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# --- recognition ----------------------------------------------------------


def _match_next(trace: Trace, key: Callable, next_key: Callable) -> RecognitionMap:
    """Map e in S_k to the entity of S_k+1 whose key equals next_key(e)."""
    out = {}
    for prev, cur in zip(trace.states, trace.states[1:]):
        index = {}
        for snap in cur.entities:
            index.setdefault(key(snap), []).append(snap.ref)
        for snap in prev.entities:
            hits = index.get(next_key(snap), ())
            if len(hits) == 1:
                out[snap.ref] = hits[0]
    return out


def recognize_by_tag(trace, config):
    return _match_next(trace, lambda s: s.tag, lambda s: s.tag)


def recognize_by_pivot(trace, config):
    return _match_next(trace, lambda s: s.chars[1], lambda s: s.chars[1])


def recognize_by_alchemy_tag(trace, config):
    def bumped(s):
        size, lex, mul = s.tag
        return (size, lex, mul + 1)

    return _match_next(trace, lambda s: s.tag, bumped)


def recognize_by_diff(trace, config):
    """Pair entities one step apart whose diff is within delta_mut, keeping
    only pairs that are each other's unique candidate."""
    measure = get_measure(config.measure)
    schema = trace.schema
    out = {}
    for prev, cur in zip(trace.states, trace.states[1:]):
        fwd, back = defaultdict(list), defaultdict(list)
        for a in prev.entities:
            for b in cur.entities:
                if within(measure.diff_chars(schema, a.chars, b.chars), config.delta_mut):
                    fwd[a.ref].append(b.ref)
                    back[b.ref].append(a.ref)
        for a, bs in fwd.items():
            if len(bs) == 1 and len(back[bs[0]]) == 1:
                out[a] = bs[0]
    return out


RECOGNIZERS = {
    "tag": (recognize_by_tag, None),
    "langton-pivot": (recognize_by_pivot, {"langton"}),
    "alchemy-tag": (recognize_by_alchemy_tag, {"alchemy"}),
    "diff": (recognize_by_diff, None),
}


def check_arity(trace: Trace, config: ObserverConfig) -> None:
    measure = get_measure(config.measure)
    n = measure.diff_arity(trace.schema)
    for name in ("delta_mut", "delta_rep_mut"):
        if len(getattr(config, name)) != n:
            raise SchemaMismatchError(
                f"{name} has {len(getattr(config, name))} components, "
                f"measure {config.measure!r} yields {n} on this schema")


def build_recognition(trace: Trace, config: ObserverConfig, recognizer: str | None = None) -> RecognitionMap:
    name = recognizer or config.recognizer
    try:
        fn, models = RECOGNIZERS[name]
    except KeyError:
        raise UnknownRecognizerError(name) from None
    if models is not None and trace.model not in models:
        raise SchemaMismatchError(f"recognizer {name!r} does not apply to model {trace.model!r}")
    check_arity(trace, config)
    return fn(trace, config)


def validate_recognition(rmap: RecognitionMap, trace: Trace, config: ObserverConfig) -> dict[str, V.Verdict]:
    """Verdicts for the step, injectivity and mutation-bound axioms."""
    measure = get_measure(config.measure)
    schema = trace.schema
    bad_step, bad_bound = [], []
    targets: dict[EntityRef, EntityRef] = {}
    shared = []
    for src, dst in sorted(rmap.items()):
        if dst.state_index != src.state_index + 1:
            bad_step.append((src, dst))
        if dst in targets:
            shared.append((targets[dst], src, dst))
        else:
            targets[dst] = src
        a, b = trace.snapshot(src), trace.snapshot(dst)
        d = measure.diff_chars(schema, a.chars, b.chars)
        if not within(d, config.delta_mut):
            bad_bound.append((src, dst, d))
    n = len(rmap)

    def verdict(bad, what):
        if bad:
            return V.violated(f"{len(bad)} recognition edges {what}", counterexamples=bad[:10], count=len(bad))
        return V.satisfied(f"all {n} recognition edges checked", edges=n)

    return {
        "axiom1": verdict(bad_step, "skip or reverse a step"),
        "axiom2": verdict(shared, "share a target"),
        "axiom3": verdict(bad_bound, "exceed delta_mut"),
    }


# --- causality ------------------------------------------------------------


@dataclass
class CausalRelation:
    edges: list[tuple[EntityRef, EntityRef]]
    dropped: list[tuple[tuple[EntityRef, EntityRef], str]] = field(default_factory=list)

    def __contains__(self, edge) -> bool:
        return edge in set(self.edges)

    def __len__(self) -> int:
        return len(self.edges)


def build_causal(trace: Trace, recognition: RecognitionMap) -> CausalRelation:
    """Keep the model's causal events that the causality axiom admits.

    An event (p, c) is rejected when c is the recognition image of some
    entity in p's state: the observer would then be mistaking a continuing
    entity for a newborn one.
    """
    recognized_from = {dst: src for src, dst in recognition.items()}
    kept, dropped = [], []
    seen = set()
    for parent, child in trace.causal_events:
        for ref in (parent, child):
            if ref not in trace:
                raise UnknownEntityError(ref)
        event = (parent, child)
        if event in seen:
            continue
        seen.add(event)
        if child.state_index != parent.state_index + 1:
            dropped.append((event, "non-successive"))
            continue
        src = recognized_from.get(child)
        if src is not None and src.state_index == parent.state_index:
            dropped.append((event, f"child is the recognition target of {src}"))
            continue
        kept.append(event)
    return CausalRelation(kept, dropped)


def check_causality(trace: Trace, recognition: RecognitionMap, causal: CausalRelation) -> V.Verdict:
    """Re-scan retained causal edges against the causality axiom."""
    recognized_from = {dst: src for src, dst in recognition.items()}
    bad = []
    for parent, child in causal.edges:
        src = recognized_from.get(child)
        if child.state_index != parent.state_index + 1 or (
                src is not None and src.state_index == parent.state_index):
            bad.append((parent, child))
    if bad:
        return V.violated(f"{len(bad)} causal edges conflict with recognition", counterexamples=bad[:10])
    return V.satisfied(f"all {len(causal.edges)} causal edges checked",
                       edges=len(causal.edges), dropped=len(causal.dropped))


# --- the reproductive bound -------------------------------------------------


class EntityIndex:
    """Dense numbering of a trace's entities in state order."""

    def __init__(self, trace: Trace):
        self.refs: list[EntityRef] = [s.ref for s in trace.entities()]
        self.snaps = list(trace.entities())
        self.pos = {r: i for i, r in enumerate(self.refs)}

    def __len__(self) -> int:
        return len(self.refs)

    def __getitem__(self, ref: EntityRef) -> int:
        try:
            return self.pos[ref]
        except KeyError:
            raise UnknownEntityError(ref) from None

    def refs_of(self, mask: int) -> list[EntityRef]:
        return [self.refs[i] for i in _bits(mask)]


class DeltaRelation:
    """Pairs whose ordered differences stay within delta_rep_mut.

    Held implicitly: membership is decided per pair, and ``row`` narrows a
    candidate bitset to its members using the measure's bucketing.
    """

    def __init__(self, trace: Trace, config: ObserverConfig, index: EntityIndex | None = None):
        check_arity(trace, config)
        self.trace = trace
        self.schema = trace.schema
        self.measure = get_measure(config.measure)
        self.bound = config.delta_rep_mut
        self.index = index or EntityIndex(trace)
        self._key, self.exact = self.measure.delta_blocker(self.schema, self.bound)
        self._keys = [self._key(s.chars) for s in self.index.snaps]
        blocks: dict = defaultdict(int)
        for i, k in enumerate(self._keys):
            blocks[k] |= 1 << i
        self._blocks = dict(blocks)

    def holds(self, i: int, j: int) -> bool:
        a, b = self.index.snaps[i], self.index.snaps[j]
        d = self.measure.diff_chars(self.schema, a.chars, b.chars)
        return self.measure.within(self.schema, d, self.bound)

    def __contains__(self, pair) -> bool:
        a, b = pair
        return self.holds(self.index[a], self.index[b])

    def row(self, i: int, candidates: int) -> int:
        """Members j of ``candidates`` with (i, j) in the relation."""
        hits = candidates & self._blocks[self._keys[i]]
        if self.exact:
            return hits
        out = 0
        for j in _bits(hits):
            if self.holds(i, j):
                out |= 1 << j
        return out

    def pairs(self) -> Iterator[tuple[EntityRef, EntityRef]]:
        n = len(self.index)
        everyone = (1 << n) - 1
        for i in range(n):
            for j in _bits(self.row(i, everyone)):
                yield self.index.refs[i], self.index.refs[j]


def build_delta(trace: Trace, config: ObserverConfig) -> DeltaRelation:
    return DeltaRelation(trace, config)


# --- ancestry ---------------------------------------------------------------


@dataclass
class Lineage:
    ancestors: set
    descendants: set
    children: set


class AncestryGraph:
    """AncestorOf and its covering Parent relation, stored as bitsets."""

    def __init__(self, index: EntityIndex, anc: list[int], parent: list[int]):
        self.index = index
        self.anc = anc
        self.par = parent

    @property
    def ancestor(self) -> set[tuple[EntityRef, EntityRef]]:
        return set(self.ancestor_pairs())

    @property
    def parent(self) -> set[tuple[EntityRef, EntityRef]]:
        return set(self.parent_edges())

    def ancestor_pairs(self) -> Iterator[tuple[EntityRef, EntityRef]]:
        refs = self.index.refs
        for i, mask in enumerate(self.anc):
            for j in _bits(mask):
                yield refs[i], refs[j]

    def parent_edges(self) -> list[tuple[EntityRef, EntityRef]]:
        refs = self.index.refs
        return [(refs[i], refs[j]) for i, mask in enumerate(self.par) for j in _bits(mask)]

    def is_ancestor(self, a: EntityRef, b: EntityRef) -> bool:
        return bool(self.anc[self.index[a]] >> self.index[b] & 1)

    def is_parent(self, a: EntityRef, b: EntityRef) -> bool:
        return bool(self.par[self.index[a]] >> self.index[b] & 1)

    def children(self, e: EntityRef) -> list[EntityRef]:
        return self.index.refs_of(self.par[self.index[e]])

    def descendants(self, e: EntityRef) -> list[EntityRef]:
        return self.index.refs_of(self.anc[self.index[e]])

    def ancestors(self, e: EntityRef) -> list[EntityRef]:
        bit = 1 << self.index[e]
        return [self.index.refs[i] for i, m in enumerate(self.anc) if m & bit]

    def __len__(self) -> int:
        return sum(m.bit_count() for m in self.anc)

    @property
    def parent_count(self) -> int:
        return sum(m.bit_count() for m in self.par)


def _successor_masks(index: EntityIndex, edges: Iterable[tuple[EntityRef, EntityRef]]) -> list[int]:
    succ = [0] * len(index)
    for a, b in edges:
        i, j = index[a], index[b]
        if j <= i:
            raise ValueError(f"edge {a} -> {b} does not point forward in time")
        succ[i] |= 1 << j
    return succ


def ancestor_of(recognition: RecognitionMap, causal: CausalRelation, delta: DeltaRelation) -> AncestryGraph:
    index = delta.index
    n = len(index)
    succ = _successor_masks(index, list(recognition.items()) + list(causal.edges))
    reach = [0] * n
    for i in range(n - 1, -1, -1):
        r = 0
        for j in _bits(succ[i]):
            r |= (1 << j) | reach[j]
        reach[i] = r
    anc = [0] * n
    par = [0] * n
    for i in range(n - 1, -1, -1):
        m = delta.row(i, reach[i])
        covered = 0
        rem = m
        while rem:
            low = rem & -rem
            covered |= anc[low.bit_length() - 1]
            rem &= ~(covered | low)
        anc[i] = m | covered
        par[i] = m & ~covered
    return AncestryGraph(index, anc, par)


def lineage_query(graph: AncestryGraph, e: EntityRef) -> Lineage:
    return Lineage(set(graph.ancestors(e)), set(graph.descendants(e)), set(graph.children(e)))


# --- recognition lineages -------------------------------------------------


def lineage_roots(trace: Trace, recognition: RecognitionMap) -> dict[EntityRef, EntityRef]:
    """First entity of each entity's recognition chain."""
    back = {dst: src for src, dst in recognition.items()}
    root = {}
    for snap in trace.entities():
        src = back.get(snap.ref)
        root[snap.ref] = root.get(src, src) if src is not None else snap.ref
    return root


def reproductive_edges(graph: AncestryGraph, roots: dict) -> list[tuple[EntityRef, EntityRef]]:
    """Parent edges that join different recognition lineages.

    An unchanged entity recognised across steps is its own ancestor under
    the closure; such edges are persistence, not reproduction.
    """
    return [(p, c) for p, c in graph.parent_edges() if roots[p] != roots[c]]


# --- bundle and export ----------------------------------------------------


@dataclass
class RelationSet:
    recognition: RecognitionMap
    causal: CausalRelation
    delta: DeltaRelation
    graph: AncestryGraph
    roots: dict
    recognition_verdicts: dict
    causality_verdict: V.Verdict

    @property
    def reproductive(self) -> list[tuple[EntityRef, EntityRef]]:
        if not hasattr(self, "_repro"):
            self._repro = reproductive_edges(self.graph, self.roots)
        return self._repro


def build_relations(trace: Trace, config: ObserverConfig) -> RelationSet:
    recognition = build_recognition(trace, config)
    verdicts = validate_recognition(recognition, trace, config)
    causal = build_causal(trace, recognition)
    delta = DeltaRelation(trace, config)
    graph = ancestor_of(recognition, causal, delta)
    roots = lineage_roots(trace, recognition)
    return RelationSet(recognition, causal, delta, graph, roots, verdicts,
                       check_causality(trace, recognition, causal))


def export_edges(relations: dict[str, Iterable[tuple[EntityRef, EntityRef]]]) -> str:
    lines = []
    for name, edges in relations.items():
        for a, b in sorted(edges):
            lines.append(f"{a.state_index} {a.local_id} {b.state_index} {b.local_id} {name}")
    return "\n".join(lines) + ("\n" if lines else "")
