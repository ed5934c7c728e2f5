"""Chemistry of binary strings.

Fixed-length bit strings. Each step a few randomly chosen strings are copied;
a copy may flip bits at the positions in the error mask. Copying leaves the
parent in place, and tags persist across steps, so an unchanged survivor is
recognised by its tag.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..config import ConfigError, digest
from ..trace import CharSpaceSchema, Dimension, EntityRef, EntitySnapshot, State, Trace

POLICIES = ("constant", "growing")


@dataclass
class CbsConfig:
    n: int = 8
    population: int = 20
    copy_count: int = 2
    error_prob: float = 0.1
    error_mask: list | None = None  # 1-based positions; None = even positions
    policy: str = "constant"
    seed: int = 0
    steps: int = 100
    init: list | None = None  # explicit bit strings, overrides population

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.error_mask is None:
            self.error_mask = list(range(2, self.n + 1, 2))
        self.error_mask = sorted(set(int(p) for p in self.error_mask))
        if any(not 1 <= p <= self.n for p in self.error_mask):
            raise ConfigError(f"error_mask positions must lie in 1..{self.n}")
        if not 0.0 <= self.error_prob <= 1.0:
            raise ConfigError("error_prob must lie in [0, 1]")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {', '.join(POLICIES)}")
        if self.copy_count < 0 or self.population < 0 or self.steps < 0:
            raise ConfigError("counts must be non-negative")
        if self.init is not None:
            for s in self.init:
                if len(s) != self.n or set(s) - {"0", "1"}:
                    raise ConfigError(f"initial string {s!r} is not {self.n} bits")
            self.population = len(self.init)

    @classmethod
    def from_mapping(cls, data: dict) -> "CbsConfig":
        known = set(cls.__dataclass_fields__)
        bad = set(data) - known
        if bad:
            raise ConfigError(f"unknown cbs config keys: {', '.join(sorted(bad))}")
        return cls(**data)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class CbsEntity:
    bits: tuple
    tag: int

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


@dataclass
class Soup:
    entities: list = field(default_factory=list)
    next_tag: int = 1


def schema_for(n: int) -> CharSpaceSchema:
    return CharSpaceSchema(tuple(Dimension(f"bit{i}", "bit", "total", 0) for i in range(1, n + 1)))


def cbs_init(config: CbsConfig, rng: random.Random) -> Soup:
    if config.init is not None:
        strings = [tuple(int(c) for c in s) for s in config.init]
    else:
        strings = [tuple(rng.randint(0, 1) for _ in range(config.n)) for _ in range(config.population)]
    ents = [CbsEntity(bits, tag) for tag, bits in enumerate(strings, start=1)]
    return Soup(ents, len(ents) + 1)


def mutate(bits: tuple, config: CbsConfig, rng: random.Random) -> tuple:
    out = list(bits)
    for pos in config.error_mask:
        if rng.random() < config.error_prob:
            out[pos - 1] ^= 1
    return tuple(out)


def cbs_step(soup: Soup, config: CbsConfig, rng: random.Random):
    """Advance one step; return (next soup, [(parent tag, child tag)])."""
    ents = list(soup.entities)
    next_tag = soup.next_tag
    events = []
    if ents and config.copy_count:
        parents = [rng.choice(ents) for _ in range(config.copy_count)]
        children = []
        for p in parents:
            child = CbsEntity(mutate(p.bits, config, rng), next_tag)
            next_tag += 1
            children.append(child)
            events.append((p.tag, child.tag))
        if config.policy == "constant":
            protected = {p.tag for p in parents}
            removable = [e for e in ents if e.tag not in protected]
            k = min(len(children), len(removable))
            doomed = {e.tag for e in rng.sample(removable, k)}
            ents = [e for e in ents if e.tag not in doomed]
        ents.extend(children)
    return Soup(ents, next_tag), events


def _state(index: int, soup: Soup) -> State:
    return State(index, tuple(
        EntitySnapshot(EntityRef(index, str(e.tag)), (e.tag,), e.bits) for e in soup.entities))


def cbs_run(config: CbsConfig, steps: int | None = None) -> Trace:
    steps = config.steps if steps is None else steps
    rng = random.Random(config.seed)
    soup = cbs_init(config, rng)
    states = [_state(0, soup)]
    events = []
    for k in range(1, steps + 1):
        soup, step_events = cbs_step(soup, config, rng)
        states.append(_state(k, soup))
        events.extend((EntityRef(k - 1, str(p)), EntityRef(k, str(c))) for p, c in step_events)
    return Trace(states, events, "cbs", schema_for(config.n), config.seed, digest(config.as_dict()))


def render_state(state: State) -> list[str]:
    return [f"[{''.join(map(str, s.chars))}]_{s.tag[0]}" for s in state.entities]
