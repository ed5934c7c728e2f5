"""Command-line front end."""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import report as R
from .config import ConfigError, default_observer, load_toml, observer_from_mapping
from .models import alchemy, cbs, langton
from .relations import build_relations, export_edges
from .trace import TraceFormatError, load_trace, save_trace, validate_trace

MODELS = ("cbs", "langton", "alchemy", "synth")


class CliError(Exception):
    pass


def _write_trace(trace, path):
    """Write atomically; nothing is left behind if writing fails."""
    tmp = f"{path}.partial"
    try:
        save_trace(trace, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def build_run(args):
    data = load_toml(args.config) if args.config else {}
    if args.model == "cbs":
        if args.seed is not None:
            data["seed"] = args.seed
        cfg = cbs.CbsConfig.from_mapping(data)
        return cbs.cbs_run(cfg, args.steps)
    if args.model == "langton":
        for key in ("table", "seed_file", "snapshot_interval", "snapshot_dir"):
            if getattr(args, key) is not None:
                data[key] = getattr(args, key)
        if args.seed is not None:
            data["seed"] = args.seed
        cfg = langton.LangtonConfig.from_mapping(data)
        return langton.langton_run(cfg, args.steps)
    if args.model == "alchemy":
        if args.seed is not None:
            data["seed"] = args.seed
        cfg = alchemy.AlchemyConfig.from_mapping(data)
        return alchemy.alchemy_run(cfg, args.collisions if args.collisions is not None else args.steps)
    from .synth import Plan, synth_trace
    seed = args.seed if args.seed is not None else data.pop("seed", 0)
    return synth_trace(Plan.from_mapping(data), seed).trace


def cmd_run(args) -> int:
    start = time.perf_counter()
    trace = build_run(args)
    problems = validate_trace(trace)
    if problems:
        raise CliError("generated trace is malformed: " + "; ".join(map(str, problems[:5])))
    _write_trace(trace, args.out)
    print(f"wrote {args.out}: {len(trace)} states, {trace.entity_count} entities, "
          f"{len(trace.causal_events)} causal events ({time.perf_counter() - start:.2f}s)")
    return 0


def cmd_synth(args) -> int:
    from .synth import Plan, synth_trace
    data = load_toml(args.plan) if args.plan else {}
    data.pop("seed", None)
    planted = synth_trace(Plan.from_mapping(data), args.seed)
    _write_trace(planted.trace, args.out)
    truth = " ".join(f"{k}={v}" for k, v in sorted(planted.truth.items()))
    print(f"wrote {args.out}: {len(planted.trace)} states; planted {truth}")
    return 0


def observer_for(trace, path):
    arity = len(trace.schema)
    base = default_observer(trace.model, arity)
    if path:
        base = observer_from_mapping(load_toml(path), base)
    return base


def _load(path):
    try:
        return load_trace(path)
    except OSError as exc:
        raise CliError(f"cannot read trace {path}: {exc.strerror}") from None


def cmd_observe(args) -> int:
    trace = _load(args.trace)
    config = observer_for(trace, args.observer_config)
    names = [n.strip() for n in args.axioms.split(",") if n.strip()] if args.axioms else None
    rep = R.full_report(trace, config, names)
    text = R.render_machine(rep) if args.format == "machine" else R.render_human(rep)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.edges:
        rel = build_relations(trace, config)
        text = export_edges({
            "recognition": rel.recognition.items(),
            "causal": rel.causal.edges,
            "parent": rel.graph.parent_edges(),
        })
        with open(args.edges, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 1 if rep.violated() else 0


def cmd_dump(args) -> int:
    trace = _load(args.trace)
    if not 0 <= args.state < len(trace):
        raise CliError(f"state {args.state} out of range (trace has {len(trace)} states)")
    state = trace.states[args.state]
    if trace.model == "langton":
        text = langton.render_state(state)
        lines = [text] if text else []
    elif trace.model == "alchemy":
        lines = alchemy.render_state(state)
    elif trace.model == "cbs":
        lines = cbs.render_state(state)
    else:
        lines = [f"{s.ref.local_id} {list(s.tag)} {list(s.chars)}" for s in state.entities]
    if lines:
        print("\n".join(lines))
    return 0


def cmd_oracle_check(args) -> int:
    from .oracle import oracle_ancestry
    trace = _load(args.trace)
    if trace.entity_count > args.max_entities:
        raise CliError(f"trace has {trace.entity_count} entities; the brute-force oracle is "
                       f"limited to {args.max_entities} (raise --max-entities to force)")
    config = observer_for(trace, args.observer_config)
    rel = build_relations(trace, config)
    ancestor, parent = oracle_ancestry(trace, config, rel.recognition, rel.causal)
    fast_anc, fast_par = rel.graph.ancestor, rel.graph.parent
    ok = ancestor == fast_anc and parent == fast_par
    print(f"ancestor pairs: fast {len(fast_anc)}, oracle {len(ancestor)}")
    print(f"parent edges:   fast {len(fast_par)}, oracle {len(parent)}")
    if not ok:
        for name, a, b in (("ancestor", fast_anc, ancestor), ("parent", fast_par, parent)):
            for e in sorted(a - b)[:5]:
                print(f"  {name} only in fast path: {e[0]} -> {e[1]}")
            for e in sorted(b - a)[:5]:
                print(f"  {name} only in oracle: {e[0]} -> {e[1]}")
    print("match" if ok else "MISMATCH")
    return 0 if ok else 1


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="evobs", allow_abbrev=False,
        description="Run artificial-life models and check evolutionary axioms on their observation traces.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", allow_abbrev=False, help="run a model and write its trace")
    run.add_argument("model", choices=MODELS)
    run.add_argument("--config", help="TOML file with model settings")
    run.add_argument("--steps", type=int, help="number of steps (collisions for alchemy)")
    run.add_argument("--collisions", type=int, help="number of collisions (alchemy)")
    run.add_argument("--out", required=True, help="trace file to write")
    run.add_argument("--seed", type=int, help="override the configured RNG seed")
    run.add_argument("--table", help="langton: rule file (default: vendored standard table)")
    run.add_argument("--seed-file", dest="seed_file", help="langton: seed pattern file")
    run.add_argument("--snapshot-interval", dest="snapshot_interval", type=int,
                     help="langton: dump the grid every N steps")
    run.add_argument("--snapshot-dir", dest="snapshot_dir", help="langton: directory for grid dumps")
    run.set_defaults(func=cmd_run)

    obs = sub.add_parser("observe", allow_abbrev=False, help="check axioms on a trace")
    obs.add_argument("trace")
    obs.add_argument("--observer-config", dest="observer_config", help="TOML observer settings")
    obs.add_argument("--format", choices=("human", "machine"), default="human")
    obs.add_argument("--axioms", help="comma-separated subset of axioms to report")
    obs.add_argument("--out", help="write the report here instead of stdout")
    obs.add_argument("--edges", help="also export recognition/causal/parent edges to this file")
    obs.set_defaults(func=cmd_observe)

    dump = sub.add_parser("dump", allow_abbrev=False, help="render one state of a trace")
    dump.add_argument("trace")
    dump.add_argument("--state", type=int, default=0)
    dump.set_defaults(func=cmd_dump)

    syn = sub.add_parser("synth", allow_abbrev=False, help="write a planted trace")
    syn.add_argument("--plan", help="TOML plan (default: monotone selection plan)")
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--out", required=True)
    syn.set_defaults(func=cmd_synth)

    orc = sub.add_parser("oracle-check", allow_abbrev=False, help="compare fast ancestry with the brute-force formula")
    orc.add_argument("trace")
    orc.add_argument("--observer-config", dest="observer_config")
    orc.add_argument("--max-entities", dest="max_entities", type=int, default=400)
    orc.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, TraceFormatError, R.UnknownAxiomError) as exc:
        print(f"evobs: error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, RuntimeError) as exc:
        print(f"evobs: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
