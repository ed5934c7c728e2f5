"""Planted traces with known ground truth.

Two plan kinds:

selection
    Founders (value 0) bear mutant children carrying values 1..V, several
    copies each. Each mutant then bears ``rate`` unmutated children, one per
    step. In ``monotone`` mode rate equals the value; in ``neutral`` mode the
    same multiset of rates is shuffled across all mutants.

lineage
    Explicit generation sizes; generation i+1 is born one step after
    generation i, its members spread round-robin over generation i. With
    ``mutation_prob`` > 0 a child's value may be its parent's plus one.

Every entity persists to the end of the trace under a fixed tag.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .config import ConfigError, digest
from .trace import CharSpaceSchema, Dimension, EntityRef, EntitySnapshot, State, Trace

SCHEMA = CharSpaceSchema((Dimension("value", "integer", "total", 0),))


@dataclass
class Plan:
    kind: str = "selection"
    mode: str = "monotone"  # selection: monotone | neutral
    values: int = 10  # selection: mutant values 1..values
    copies: int = 10  # selection: mutants per value
    founders: int = 2  # selection
    sizes: list = field(default_factory=lambda: [1, 2, 4])  # lineage
    mutation_prob: float = 0.0  # lineage
    tail: int = 1  # extra quiet states appended at the end

    def __post_init__(self):
        if self.kind not in ("selection", "lineage"):
            raise ConfigError(f"unknown plan kind {self.kind!r}")
        if self.mode not in ("monotone", "neutral"):
            raise ConfigError(f"unknown selection mode {self.mode!r}")
        if self.values < 1 or self.copies < 1 or self.founders < 1:
            raise ConfigError("values, copies and founders must be positive")
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ConfigError("generation sizes must be positive")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigError("mutation_prob must lie in [0, 1]")
        if self.tail < 0:
            raise ConfigError("tail must be non-negative")

    @classmethod
    def from_mapping(cls, data: dict) -> "Plan":
        bad = set(data) - set(cls.__dataclass_fields__)
        if bad:
            raise ConfigError(f"unknown plan keys: {', '.join(sorted(bad))}")
        return cls(**data)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


class _Builder:
    """Births scheduled by state; everything born stays alive."""

    def __init__(self):
        self.born: dict[int, list] = {}  # state -> [(serial, value, parent serial | None)]
        self.serial = 0

    def add(self, state: int, value: int, parent: int | None = None) -> int:
        self.serial += 1
        self.born.setdefault(state, []).append((self.serial, value, parent))
        return self.serial

    def trace(self, last: int, seed, cfg_digest) -> Trace:
        alive = []
        states, events = [], []
        for k in range(last + 1):
            for serial, value, parent in self.born.get(k, []):
                alive.append((serial, value))
                if parent is not None:
                    events.append((EntityRef(k - 1, str(parent)), EntityRef(k, str(serial))))
            states.append(State(k, tuple(
                EntitySnapshot(EntityRef(k, str(s)), (s,), (v,)) for s, v in alive)))
        return Trace(states, events, "synth", SCHEMA, seed, cfg_digest)


@dataclass
class Planted:
    trace: Trace
    truth: dict


def synth_trace(plan: Plan, seed: int = 0) -> Planted:
    rng = random.Random(seed)
    b = _Builder()
    truth: dict = {}
    if plan.kind == "selection":
        founders = [b.add(0, 0) for _ in range(plan.founders)]
        mutants = []
        for v in range(1, plan.values + 1):
            for c in range(plan.copies):
                parent = founders[len(mutants) % len(founders)]
                mutants.append((b.add(1, v, parent), v))
        rates = [v for _, v in mutants]
        if plan.mode == "neutral":
            rng.shuffle(rates)
        for (serial, v), rate in zip(mutants, rates):
            for k in range(rate):
                b.add(2 + k, v, serial)
        last = 1 + max(rates) + plan.tail
        # one representative per value: the mutant with the smallest entity
        # reference, which is how the observer picks variant representatives
        rep_rate = {}
        for (serial, v), rate in sorted(zip(mutants, rates), key=lambda m: str(m[0][0])):
            rep_rate.setdefault(v, rate)
        rep_rate = dict(sorted(rep_rate.items()))
        collide = len(set(rep_rate.values())) < len(rep_rate)
        truth = {
            "correlation": "Violated" if collide else "Satisfied",
            "child_mut": len(mutants),
            "var_child_mut": plan.values,
            "rates": rep_rate,
        }
    else:
        gens = [[(b.add(0, 0), 0) for _ in range(plan.sizes[0])]]
        mutants = 0
        for g, size in enumerate(plan.sizes[1:], start=1):
            prev = gens[-1]
            cur = []
            for i in range(size):
                parent, pv = prev[i % len(prev)]
                value = pv + 1 if rng.random() < plan.mutation_prob else pv
                mutants += value != pv
                cur.append((b.add(g, value, parent), value))
            gens.append(cur)
        last = len(plan.sizes) - 1 + plan.tail
        sizes = plan.sizes
        tailed = sizes[:max(len(sizes) - 1, 1)]
        if len(sizes) < 2:
            fec = "Undetermined"
        elif all(any(sizes[j] >= sizes[i] for j in range(i + 1, len(sizes))) for i in range(len(tailed))):
            fec = "Satisfied"
        else:
            fec = "Violated"
        truth = {"fecundity": fec, "generation_sizes": list(sizes), "child_mut": mutants}
    return Planted(b.trace(last, seed, digest({**plan.as_dict(), "seed": seed})), truth)
