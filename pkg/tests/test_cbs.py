import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from evobs.config import ConfigError, default_observer
from evobs.measures import diff
from evobs.models import cbs
from evobs.relations import build_delta, build_recognition, validate_recognition
from evobs.report import full_report
from evobs.trace import write_trace, validate_trace

from helpers import make_trace, ref


def test_explicit_init_tags():
    cfg = cbs.CbsConfig(n=5, init=["00101", "00101", "10101", "01000"])
    soup = cbs.cbs_init(cfg, random.Random(0))
    assert [(str(e), e.tag) for e in soup.entities] == [
        ("00101", 1), ("00101", 2), ("10101", 3), ("01000", 4)]
    state = cbs._state(0, soup)
    assert cbs.render_state(state)[:3] == ["[00101]_1", "[00101]_2", "[10101]_3"]


def test_empty_population():
    tr = cbs.cbs_run(cbs.CbsConfig(population=0, steps=3))
    assert [len(s.entities) for s in tr.states] == [0, 0, 0, 0]
    assert tr.causal_events == []


def dump(tr):
    buf = io.StringIO()
    write_trace(tr, buf)
    return buf.getvalue()


def test_seeded_run_is_byte_identical():
    cfg = cbs.CbsConfig(steps=25, seed=99)
    assert dump(cbs.cbs_run(cfg)) == dump(cbs.cbs_run(cfg))
    assert dump(cbs.cbs_run(cfg)) != dump(cbs.cbs_run(cbs.CbsConfig(steps=25, seed=100)))


def test_zero_error_children_are_copies():
    tr = cbs.cbs_run(cbs.CbsConfig(error_prob=0.0, steps=20, seed=1))
    assert tr.causal_events
    for p, c in tr.causal_events:
        assert tr.snapshot(p).chars == tr.snapshot(c).chars


def test_flip_at_even_position_stays_in_delta():
    schema = cbs.schema_for(5)
    parent = (0, 0, 1, 0, 1)
    cfg = cbs.CbsConfig(n=5, error_mask=[2], error_prob=1.0)
    child = cbs.mutate(parent, cfg, random.Random(0))
    assert child == (0, 1, 1, 0, 1)
    tr = make_trace([[("p", None, parent)], [("p", None, parent), ("c", None, child)]],
                    [((0, "p"), (1, "c"))], schema=schema, model="cbs")
    d = build_delta(tr, default_observer("cbs", 5))
    assert (ref(0, "p"), ref(1, "c")) in d


def test_zero_copies_freezes_state():
    tr = cbs.cbs_run(cbs.CbsConfig(copy_count=0, steps=5, seed=3))
    rows = [[(e.ref.local_id, e.tag, e.chars) for e in s.entities] for s in tr.states]
    assert all(row == rows[0] for row in rows)
    assert tr.causal_events == []


def test_zero_steps_single_state():
    tr = cbs.cbs_run(cbs.CbsConfig(steps=0))
    assert len(tr) == 1


def test_ten_step_run_reproduces():
    tr = cbs.cbs_run(cbs.CbsConfig(steps=10, seed=7))
    assert full_report(tr, default_observer("cbs", 8)).verdicts["reproduction"].satisfied


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["constant", "growing"]))
def test_run_invariants(seed, policy):
    cfg = cbs.CbsConfig(n=6, population=6, steps=15, seed=seed, policy=policy, error_prob=0.5)
    tr = cbs.cbs_run(cfg)
    assert validate_trace(tr) == []
    mask = set(cfg.error_mask)
    for p, c in tr.causal_events:
        d = diff(tr.schema, "xor", tr.snapshot(p), tr.snapshot(c))
        assert all(x == 0 or (i + 1) in mask for i, x in enumerate(d))
        # parents survive their copy step
        assert any(s.tag == tr.snapshot(p).tag for s in tr.states[c.state_index].entities)
    if policy == "constant":
        assert {len(s.entities) for s in tr.states} == {6}
    else:
        assert [len(s.entities) for s in tr.states] == [6 + 2 * k for k in range(16)]
    obs = default_observer("cbs", 6)
    rmap = build_recognition(tr, obs)
    assert all(v.satisfied for v in validate_recognition(rmap, tr, obs).values())
    for src, dst in rmap.items():
        assert tr.snapshot(src).tag == tr.snapshot(dst).tag


def test_config_validation():
    with pytest.raises(ConfigError):
        cbs.CbsConfig(n=0)
    with pytest.raises(ConfigError):
        cbs.CbsConfig(n=4, error_mask=[5])
    with pytest.raises(ConfigError):
        cbs.CbsConfig(error_prob=1.5)
    with pytest.raises(ConfigError):
        cbs.CbsConfig.from_mapping({"bogus": 1})
    assert cbs.CbsConfig(n=5).error_mask == [2, 4]
