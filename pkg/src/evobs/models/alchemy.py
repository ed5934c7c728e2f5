"""Lambda-calculus chemistry.

A soup of closed lambda terms. Each collision applies one molecule to
another and reduces the result; a product that normalises (or settles into
a reduction cycle) within budget joins the soup and pushes out a random
bystander. Molecules are tagged <size, lex, mul>: size of the term, rank of
its canonical form among same-size forms, and a multiplicity counter that
every survivor bumps each step, so a newly made molecule is the only one
with mul = 1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import networkx as nx

from ..config import ConfigError, digest
from ..trace import CharSpaceSchema, Dimension, EntityRef, EntitySnapshot, State, Trace
from . import lam


@dataclass
class AlchemyConfig:
    population: int = 50
    max_steps: int = 100  # reduction steps per collision
    max_size: int = 200  # largest admissible intermediate or product
    collisions: int = 200
    init: list | None = None  # explicit terms; None = random
    depth: int = 5  # random init: term depth
    weights: list = field(default_factory=lambda: [1.0, 1.0, 1.0])  # abs, app, var
    allow_free: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.max_steps < 1 or self.max_size < 1:
            raise ConfigError("max_steps and max_size must be positive")
        if self.collisions < 0:
            raise ConfigError("collisions must be non-negative")
        if self.init is not None:
            self.population = len(self.init)
        if self.population < 2:
            raise ConfigError("population must be at least 2")
        if len(self.weights) != 3 or any(w < 0 for w in self.weights) or not sum(self.weights):
            raise ConfigError("weights must be three non-negative numbers, not all zero")

    @classmethod
    def from_mapping(cls, data: dict) -> "AlchemyConfig":
        bad = set(data) - set(cls.__dataclass_fields__)
        if bad:
            raise ConfigError(f"unknown alchemy config keys: {', '.join(sorted(bad))}")
        return cls(**data)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class Molecule:
    term: tuple  # nameless form
    form: str  # canonical printed form
    size: int
    lex: int
    mul: int
    serial: int

    @property
    def tag(self) -> tuple:
        return (self.size, self.lex, self.mul)


class LexRanks:
    """Rank of each canonical form within its size class.

    The initial population is ranked in sorted order; forms first seen later
    take the next free rank of their size. Ranks never move afterwards.
    """

    def __init__(self):
        self.ranks: dict[int, dict[str, int]] = {}

    def seed(self, forms) -> None:
        for form, sz in sorted(set(forms), key=lambda p: (p[1], p[0])):
            self.rank(form, sz)

    def rank(self, form: str, sz: int) -> int:
        group = self.ranks.setdefault(sz, {})
        if form not in group:
            group[form] = len(group) + 1
        return group[form]


@dataclass
class Soup:
    molecules: list
    ranks: LexRanks
    next_serial: int


def make_molecule(term: tuple, ranks: LexRanks, mul: int, serial: int) -> Molecule:
    form = lam.canonical(term)
    sz = lam.size(term)
    return Molecule(term, form, sz, ranks.rank(form, sz), mul, serial)


def alchemy_init(config: AlchemyConfig, rng: random.Random) -> Soup:
    if config.init is not None:
        terms = [lam.to_db(lam.parse(text, allow_free=config.allow_free)) for text in config.init]
    else:
        terms = [lam.random_term(rng, config.depth, tuple(config.weights), config.allow_free)
                 for _ in range(config.population)]
    ranks = LexRanks()
    ranks.seed((lam.canonical(t), lam.size(t)) for t in terms)
    copies: dict[str, int] = {}
    mols = []
    for serial, t in enumerate(terms):
        form = lam.canonical(t)
        copies[form] = copies.get(form, 0) + 1
        mols.append(make_molecule(t, ranks, copies[form], serial))
    return Soup(mols, ranks, len(mols))


def react(a: tuple, b: tuple, config: AlchemyConfig):
    """Product of applying ``a`` to ``b``, or None for an elastic collision.

    A reduction that loops back on a self-application (N)(N) yields N: the
    collision reproduces the molecule that keeps copying itself.
    """
    res = lam.reduce(("a", a, b), config.max_steps, config.max_size)
    if res.kind == lam.EXHAUSTED:
        return None
    product = res.term
    if res.kind == lam.CYCLE and product[0] == "a" and product[1] == product[2]:
        product = product[1]
    if lam.size(product) > config.max_size:
        return None
    return product


def alchemy_step(soup: Soup, config: AlchemyConfig, rng: random.Random):
    """One collision. Returns (next soup, [(reactant serial, product serial)])."""
    mols = soup.molecules
    i, j = rng.sample(range(len(mols)), 2)
    a, b = mols[i], mols[j]
    product = react(a.term, b.term, config)
    survivors = list(mols)
    events = []
    serial = soup.next_serial
    new = None
    if product is not None:
        new = make_molecule(product, soup.ranks, 1, serial)
        serial += 1
        bystanders = [k for k in range(len(mols)) if k not in (i, j)]
        if bystanders:
            doomed = rng.choice(bystanders)
            survivors = [m for k, m in enumerate(mols) if k != doomed]
        events = [(a.serial, new.serial), (b.serial, new.serial)]
    nxt = [Molecule(m.term, m.form, m.size, m.lex, m.mul + 1, m.serial) for m in survivors]
    if new is not None:
        nxt.append(new)
    return Soup(nxt, soup.ranks, serial), events


SCHEMA = CharSpaceSchema((
    Dimension("term", "lambda term up to alpha renaming", "discrete", ""),
    Dimension("tag", "size, lex rank, multiplicity", "none", (0, 0, 0)),
))


def _state(index: int, soup: Soup) -> State:
    return State(index, tuple(
        EntitySnapshot(EntityRef(index, str(m.serial)), m.tag, (m.form, m.tag)) for m in soup.molecules))


def alchemy_run(config: AlchemyConfig, collisions: int | None = None) -> Trace:
    collisions = config.collisions if collisions is None else collisions
    rng = random.Random(config.seed)
    soup = alchemy_init(config, rng)
    states = [_state(0, soup)]
    events = []
    for k in range(1, collisions + 1):
        soup, step_events = alchemy_step(soup, config, rng)
        states.append(_state(k, soup))
        events.extend((EntityRef(k - 1, str(p)), EntityRef(k, str(c))) for p, c in step_events)
    return Trace(states, events, "alchemy", SCHEMA, config.seed, digest(config.as_dict()))


def render_state(state: State) -> list[str]:
    return [f"<{s.tag[0]},{s.tag[1]},{s.tag[2]}> {s.chars[0]}" for s in state.entities]


# --- level-0 organisation -------------------------------------------------


@dataclass
class Level0:
    self_copiers: list  # canonical forms
    hypercycles: list  # sorted lists of canonical forms
    production: nx.DiGraph


def detect_level0(trace: Trace, relations) -> Level0:
    """Self-copying classes and mutually reproducing cycles of classes.

    ``relations`` is a :class:`evobs.relations.RelationSet` built with the
    alchemy observer.
    """
    form = {s.ref: s.chars[0] for s in trace.entities()}
    copiers = sorted({form[p] for p, c in relations.reproductive if form[p] == form[c]})
    # a class reproduces when one of its members is an ancestor of another
    # member from a different recognition lineage
    roots = relations.roots
    reproduced = {form[a] for a, b in relations.graph.ancestor_pairs()
                  if form[a] == form[b] and roots[a] != roots[b]}
    g = nx.DiGraph()
    for p, c in relations.causal.edges:
        g.add_edge(form[p], form[c])
    sub = g.subgraph(reproduced)
    cycles = sorted(sorted(comp) for comp in nx.strongly_connected_components(sub) if len(comp) >= 2)
    return Level0(copiers, cycles, g)
