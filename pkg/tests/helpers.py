"""Hand-built traces and random trace generators for the tests."""

import math
import random

from evobs.config import ObserverConfig, SelectionThresholds
from evobs.trace import CharSpaceSchema, Dimension, EntityRef, EntitySnapshot, State, Trace

VALUE = CharSpaceSchema((Dimension("value", "integer", "total", 0),))
PAIR = CharSpaceSchema((
    Dimension("a", "integer", "total", 0),
    Dimension("b", "label", "none", 0),
))

LOOSE = SelectionThresholds(min_reproducers=1, min_variant_children=1, min_window_len=1)


def ref(state, local_id):
    return EntityRef(state, str(local_id))


def make_trace(states, events=(), schema=VALUE, model="synth"):
    """``states``: list of lists of (id, tag, chars); ids double as tags when
    tag is None. ``events``: ((ps, pid), (cs, cid)) pairs."""
    out = []
    for k, ents in enumerate(states):
        snaps = []
        for item in ents:
            local_id, tag, chars = item
            tag = (local_id,) if tag is None else tag
            snaps.append(EntitySnapshot(ref(k, local_id), tag, chars))
        out.append(State(k, tuple(snaps)))
    evs = [(ref(*p), ref(*c)) for p, c in events]
    return Trace(out, evs, model, schema)


def observer(delta_mut=(math.inf,), delta_rep_mut=(math.inf,), measure="absdiff", recognizer="tag",
             thresholds=LOOSE, **kw):
    return ObserverConfig(measure, recognizer, delta_mut, delta_rep_mut, thresholds, **kw)


def random_trace(rng: random.Random, max_states=6, max_entities=8):
    """A small trace plus an observer config, drawn at random.

    Tags persist with some probability, so tag recognition gives an
    injective one-step map; causal events join random entities of
    successive states. The measure and bounds are random too, covering both
    bucketed and pairwise reproductive-bound checks.
    """
    n_states = rng.randint(1, max_states)
    kind = rng.choice(["absdiff", "absdiff2", "equality", "xor"])
    if kind == "absdiff2":
        schema, measure = PAIR, "absdiff"
    elif kind == "xor":
        schema = CharSpaceSchema(tuple(Dimension(f"bit{i}", "bit", "total", 0) for i in range(3)))
        measure = "xor"
    else:
        schema, measure = VALUE, kind
    arity = len(schema)

    def chars():
        if kind == "xor":
            return tuple(rng.randint(0, 1) for _ in range(arity))
        if kind == "absdiff2":
            return (rng.randint(0, 3), rng.randint(0, 1))
        return (rng.randint(0, 3),)

    states, events = [], []
    next_tag = 0
    prev = []
    for k in range(n_states):
        ents = []
        for tag, c in prev:
            if rng.random() < 0.6 and len(ents) < max_entities:
                # survivor, possibly changed
                ents.append((tag, c if rng.random() < 0.7 else chars()))
        for _ in range(rng.randint(0 if ents else 1, max(0, max_entities - len(ents)))):
            ents.append((next_tag, chars()))
            next_tag += 1
            if len(ents) >= max_entities:
                break
        if k:
            for _ in range(rng.randint(0, 4)):
                p = rng.choice(prev)[0]
                c = rng.choice(ents)[0]
                events.append(((k - 1, p), (k, c)))
        states.append([(tag, (tag,), c) for tag, c in ents])
        prev = ents
    bound_choices = [0, 1, 2, math.inf]
    delta_rep = tuple(rng.choice(bound_choices) for _ in range(arity))
    config = ObserverConfig(measure, "tag", (math.inf,) * arity, delta_rep, LOOSE)
    return make_trace(states, events, schema), config
