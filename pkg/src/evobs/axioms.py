"""Population-level axioms over a trace and its relations.

Verdicts are three-valued: a finite trace can witness or refute some
axioms, and for others (infinite quantifiers, "statistically large"
populations) it may do neither.

Reproduction is read off the reproductive parent edges, i.e. parent edges
between different recognition lineages. Parent edges inside one lineage
only say that an entity persisted unchanged.
"""

from __future__ import annotations

import bisect
import math
from collections import defaultdict
from dataclasses import dataclass

from scipy import stats

from . import verdict as V
from .config import ObserverConfig, SelectionThresholds
from .measures import get_measure
from .relations import RelationSet
from .trace import EntityRef, Trace

AXIOMS = (
    "axiom1", "axiom2", "axiom3", "causality",
    "reproduction", "fecundity", "preservation", "heredity",
    "timescale", "sorting", "variation", "correlation",
)


class Lineages:
    """Recognition lineages and the reproductive children hanging off them."""

    def __init__(self, trace: Trace, rel: RelationSet):
        self.roots = rel.roots
        self.members: dict[EntityRef, list[EntityRef]] = defaultdict(list)
        self.pos: dict[EntityRef, int] = {}
        for snap in trace.entities():
            m = self.members[self.roots[snap.ref]]
            self.pos[snap.ref] = len(m)
            m.append(snap.ref)
        self.births: dict[EntityRef, list[tuple[int, EntityRef]]] = defaultdict(list)
        for p, c in rel.reproductive:
            self.births[self.roots[p]].append((p.state_index, c))
        for v in self.births.values():
            v.sort()

    def children(self, e: EntityRef, until: int | None = None) -> list[EntityRef]:
        """Reproductive children of e's lineage born to instances at or after
        e and, if given, before state ``until``.

        A developing child is related to each stage of its parent's lineage
        it comes to resemble, so children are counted once per lineage: the
        earliest instance reached stands for the child.
        """
        births = self.births.get(self.roots[e], [])
        lo = bisect.bisect_left(births, (e.state_index,))
        hi = len(births) if until is None else bisect.bisect_left(births, (until,))
        first: dict[EntityRef, EntityRef] = {}
        for _, c in births[lo:hi]:
            root = self.roots[c]
            if root not in first or c < first[root]:
                first[root] = c
        return sorted(first.values())

    def after(self, e: EntityRef) -> list[EntityRef]:
        """e and its later recognition-lineage instances."""
        return self.members[self.roots[e]][self.pos[e]:]


@dataclass
class Analysis:
    """Everything the axiom checks share for one trace and observer."""

    trace: Trace
    config: ObserverConfig
    rel: RelationSet

    def __post_init__(self):
        self.measure = get_measure(self.config.measure)
        self.schema = self.trace.schema
        self.ordered = self.measure.diff_ordered(self.schema)
        self.lineages = Lineages(self.trace, self.rel)
        n = len(self.trace)
        self.window = self.config.window or (0, max(n - 1, 0))
        if n:
            self.window = (min(self.window[0], n - 1), min(self.window[1], n - 1))

    @property
    def thresholds(self) -> SelectionThresholds:
        return self.config.thresholds

    def diff(self, a: EntityRef, b: EntityRef) -> tuple:
        return self.measure.diff_chars(self.schema, self.trace.snapshot(a).chars, self.trace.snapshot(b).chars)

    def mutated(self, d) -> bool:
        return any(o and x != 0 for o, x in zip(self.ordered, d))

    def in_window(self, e: EntityRef) -> bool:
        return self.window[0] <= e.state_index <= self.window[1]

    @property
    def window_len(self) -> int:
        return self.window[1] - self.window[0] + 1 if len(self.trace) else 0


# --- reproduction and fecundity ---------------------------------------------


def check_reproduction(a: Analysis) -> V.Verdict:
    edges = a.rel.reproductive
    if edges:
        return V.satisfied(f"{len(edges)} reproductive parent edges", witness=edges[0], count=len(edges))
    return V.violated("no parent edge joins two recognition lineages",
                      parent_edges=a.rel.graph.parent_count, entities=a.trace.entity_count)


def founders_of(a: Analysis) -> list[EntityRef]:
    if a.config.founders == "initial":
        return [s.ref for s in a.trace.states[0].entities] if len(a.trace) else []
    raise ValueError(f"unknown founder rule {a.config.founders!r}")


def generations(a: Analysis, founders) -> list[list[EntityRef]]:
    """G_1 = founders; G_i+1 = unassigned reproductive children of G_i."""
    for f in founders:
        a.trace.snapshot(f)
    assigned = set(founders)
    gens = [sorted(set(founders))] if founders else []
    while gens:
        nxt = []
        for e in gens[-1]:
            for c in a.lineages.children(e):
                if c not in assigned:
                    assigned.add(c)
                    nxt.append(c)
        if not nxt:
            break
        gens.append(sorted(nxt))
    return gens


def check_fecundity(partition, thresholds: SelectionThresholds = None, tail: int = 1) -> V.Verdict:
    sizes = [len(g) for g in partition]
    if len(sizes) < 2:
        return V.undetermined(f"{len(sizes)} generation(s) observed; need at least 2", sizes=sizes)
    checked = range(max(len(sizes) - tail, 1))
    failing = [i for i in checked if not any(sizes[j] >= sizes[i] for j in range(i + 1, len(sizes)))]
    if failing:
        i = failing[0]
        return V.violated(f"generation {i + 1} (size {sizes[i]}) is never matched later in the trace",
                          sizes=sizes, generation=i + 1)
    return V.satisfied("every checked generation is matched by a later one (within trace)", sizes=sizes)


# --- mutation and heredity --------------------------------------------------


def mutant_edges(a: Analysis) -> list[tuple[EntityRef, EntityRef]]:
    return [(p, c) for p, c in a.rel.reproductive if a.mutated(a.diff(p, c))]


def check_preservation(a: Analysis) -> V.Verdict:
    mutants = mutant_edges(a)
    if not mutants:
        return V.undetermined("no mutant children observed")
    for p, c in mutants:
        kids = a.lineages.children(c)
        if kids:
            return V.satisfied("a mutant child reproduces", witness=(p, c, kids[0]), mutants=len(mutants))
    return V.violated("no mutant child reproduces within the trace", mutants=len(mutants),
                      example=mutants[0])


def window_edges(a: Analysis) -> list[tuple[EntityRef, EntityRef]]:
    return [(p, c) for p, c in a.rel.reproductive if a.in_window(p) and a.in_window(c)]


def heredity_ratio(a: Analysis, dim: int) -> tuple[float | None, V.Verdict]:
    """|Parent in window| / |pairs in window inheriting ``dim`` unchanged|."""
    t = a.thresholds
    if a.window_len < t.min_window_len:
        return None, V.undetermined(f"window of {a.window_len} states is shorter than {t.min_window_len}")
    edges = window_edges(a)
    inherited = sum(1 for p, c in edges if a.diff(p, c)[dim] == 0)
    if not inherited:
        return None, V.undetermined("no pair in the window inherits this characteristic", parents=len(edges))
    ratio = len(edges) / inherited
    ev = dict(ratio=ratio, parents=len(edges), inherited=inherited)
    if 1 <= ratio <= t.heredity_ratio_tol:
        return ratio, V.satisfied(f"ratio {ratio:.4f} within [1, {t.heredity_ratio_tol}]", **ev)
    return ratio, V.violated(f"ratio {ratio:.4f} exceeds {t.heredity_ratio_tol}", **ev)


def check_heredity(a: Analysis) -> tuple[dict, V.Verdict]:
    """Heredity over every ordered characteristic.

    Only meaningful once mutants exist and reproduce; without reproductive
    mutants the ratio is trivially 1 and says nothing.
    """
    ratios = {}
    verdicts = {}
    for i, o in enumerate(a.ordered):
        if o:
            ratios[i], verdicts[i] = heredity_ratio(a, i)
    if not mutant_edges(a):
        return ratios, V.undetermined("no reproductive mutants, heredity is not observable", ratios=ratios)
    good = [i for i, v in verdicts.items() if v.satisfied]
    if good:
        return ratios, V.satisfied(f"{len(good)} characteristic(s) inherited", dims=good, ratios=ratios)
    if any(v.violated for v in verdicts.values()):
        return ratios, V.violated("no characteristic has a ratio near 1", ratios=ratios)
    return ratios, V.undetermined("no heredity ratio could be computed", ratios=ratios)


# --- selection --------------------------------------------------------------


def reproducing_set(a: Analysis) -> tuple[dict[int, list[EntityRef]], V.Verdict]:
    """SR(S_j) per state in the window, and the time-scale verdict.

    The population Lambda counts different reproducing entities, so each
    recognition lineage enters it once, through its earliest reproducing
    instance in the window.
    """
    sr: dict[int, set] = defaultdict(set)
    for p, _ in a.rel.reproductive:
        if a.in_window(p):
            sr[p.state_index].add(p)
    sr = {k: sorted(v) for k, v in sorted(sr.items())}
    lam = len(lambda_set(a, sr))
    t = a.thresholds
    if not lam:
        return sr, V.undetermined("no reproducing entities in the window", size=0)
    if a.window_len < t.min_window_len:
        return sr, V.undetermined(f"window of {a.window_len} states is shorter than {t.min_window_len}", size=lam)
    if lam >= t.min_reproducers:
        return sr, V.satisfied(f"{lam} reproducing entities over {a.window_len} states", size=lam)
    return sr, V.violated(f"only {lam} reproducing entities (need {t.min_reproducers})", size=lam)


def lambda_set(a: Analysis, sr: dict) -> list[EntityRef]:
    first = {}
    for members in sr.values():
        for e in members:
            first.setdefault(a.lineages.roots[e], e)
    return sorted(first.values())


def rate_rep(a: Analysis, e: EntityRef) -> int:
    """Children produced by e's recognition lineage before it changes.

    The lineage is followed step by step; the count stops at the first step
    with a nonzero difference in any characteristic.
    """
    a.trace.snapshot(e)
    until = None
    chain = a.lineages.after(e)
    for prev, inst in zip(chain, chain[1:]):
        if a.trace.snapshot(prev).chars == a.trace.snapshot(inst).chars:
            continue
        if any(x != 0 for x in a.diff(prev, inst)):
            until = inst.state_index
            break
    return len(a.lineages.children(e, until))


def _ordered_chars(a: Analysis, e: EntityRef) -> tuple:
    chars = a.trace.snapshot(e).chars
    return tuple(v for d, v in zip(a.schema.dimensions, chars) if d.ordered)


def check_sorting(a: Analysis, lam: list[EntityRef], rates: dict) -> V.Verdict:
    t = a.thresholds
    if len(lam) < t.min_reproducers:
        return V.undetermined(f"{len(lam)} reproducers, below {t.min_reproducers}", size=len(lam))
    variants = {_ordered_chars(a, e) for e in lam}
    distinct = sorted(set(rates[e] for e in lam))
    ev = dict(char_variants=len(variants), rate_values=distinct[:20])
    if len(variants) >= 2 and len(distinct) >= 2:
        return V.satisfied("reproducers differ and reproduce at different rates", **ev)
    return V.violated("no differential reproduction among differing reproducers", **ev)


def heritable_variation(a: Analysis, lam_size: int) -> tuple[list, list, V.Verdict]:
    child_mut = sorted({c for p, c in mutant_edges(a) if a.in_window(c)})
    reps = {}
    for c in child_mut:
        reps.setdefault(_ordered_chars(a, c), c)
    var = sorted(reps.values())
    t = a.thresholds
    ev = dict(child_mut=len(child_mut), var_child_mut=len(var))
    if len(var) >= t.min_variant_children:
        return child_mut, var, V.satisfied(f"{len(var)} distinct heritable variants", **ev)
    if lam_size < t.min_reproducers:
        return child_mut, var, V.undetermined(
            f"{lam_size} reproducers, below {t.min_reproducers}", **ev)
    return child_mut, var, V.violated(f"{len(var)} distinct variants (need {t.min_variant_children})", **ev)


def check_correlation(a: Analysis, var: list, rates: dict) -> V.Verdict:
    """Variant pairs differ in a characteristic exactly when their rates differ."""
    if not var:
        return V.undetermined("no heritable variants")
    dims = [i for i, d in enumerate(a.schema.dimensions) if d.ordered]
    chars = {e: a.trace.snapshot(e).chars for e in var}
    passing, failures, spearman = [], {}, {}
    for i in dims:
        dim = a.schema.dimensions[i]
        bad = None
        for x in range(len(var)):
            for y in range(x + 1, len(var)):
                e, f = var[x], var[y]
                u, w = chars[e][i], chars[f][i]
                comparable_diff = dim.lt(u, w) or dim.lt(w, u)
                same_rate = rates[e] == rates[f]
                if comparable_diff != (not same_rate) or (u == w) != same_rate:
                    bad = (e, f)
                    break
            if bad:
                break
        name = dim.name
        if bad:
            failures[name] = bad
        else:
            passing.append(name)
        if dim.order == "total" and len(var) >= 3:
            xs = [chars[e][i] for e in var]
            ys = [rates[e] for e in var]
            if len(set(xs)) > 1 and len(set(ys)) > 1:
                rho = stats.spearmanr(xs, ys).statistic
                spearman[name] = None if math.isnan(rho) else round(float(rho), 6)
    ev = dict(spearman=spearman, variants=len(var))
    if passing:
        return V.satisfied(f"characteristic(s) {', '.join(passing)} track the reproduction rate",
                           dims=passing, **ev)
    if not dims:
        return V.undetermined("no ordered characteristic", **ev)
    return V.violated("every characteristic has a pair breaking the correspondence",
                      counterexamples=failures, **ev)
