"""Run the whole observation pipeline and render its report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import axioms as A
from . import verdict as V
from .config import ObserverConfig
from .relations import build_relations
from .trace import EntityRef, Trace


class UnknownAxiomError(ValueError):
    pass


@dataclass
class Report:
    verdicts: dict  # axiom name -> Verdict, in AXIOMS order
    info: dict = field(default_factory=dict)
    config: ObserverConfig | None = None
    trace_digest: str = ""

    def violated(self, names=None) -> list[str]:
        names = names or list(self.verdicts)
        return [n for n in names if self.verdicts[n].violated]


def select_axioms(names) -> list[str]:
    if not names:
        return list(A.AXIOMS)
    unknown = [n for n in names if n not in A.AXIOMS]
    if unknown:
        raise UnknownAxiomError(f"unknown axiom(s): {', '.join(unknown)}; choose from {', '.join(A.AXIOMS)}")
    return [n for n in A.AXIOMS if n in names]


def full_report(trace: Trace, config: ObserverConfig, axioms=None) -> Report:
    names = select_axioms(axioms)
    if not trace.entity_count:
        why = "empty trace" if not len(trace) else "trace holds no entities"
        return Report({n: V.undetermined(why) for n in names},
                      {"states": len(trace), "entities": 0}, config, trace.config_digest)
    try:
        rel = build_relations(trace, config)
    except (KeyError, ValueError) as exc:
        raise type(exc)(f"building relations: {exc}") from exc
    a = A.Analysis(trace, config, rel)
    v: dict = {}
    v.update(rel.recognition_verdicts)
    v["causality"] = rel.causality_verdict
    v["reproduction"] = A.check_reproduction(a)
    gens = A.generations(a, A.founders_of(a))
    v["fecundity"] = A.check_fecundity(gens, config.thresholds, config.fecundity_tail)
    v["preservation"] = A.check_preservation(a)
    ratios, v["heredity"] = A.check_heredity(a)
    sr, v["timescale"] = A.reproducing_set(a)
    lam = A.lambda_set(a, sr)
    rates = {e: A.rate_rep(a, e) for e in lam}
    v["sorting"] = A.check_sorting(a, lam, rates)
    child_mut, var, v["variation"] = A.heritable_variation(a, len(lam))
    var_rates = {e: rates[e] if e in rates else A.rate_rep(a, e) for e in var}
    v["correlation"] = A.check_correlation(a, var, var_rates)
    info = {
        "states": len(trace),
        "entities": trace.entity_count,
        "window": list(a.window),
        "recognition_edges": len(rel.recognition),
        "causal_events": len(trace.causal_events),
        "causal_edges": len(rel.causal.edges),
        "causal_dropped": len(rel.causal.dropped),
        "ancestor_pairs": len(rel.graph),
        "parent_edges": rel.graph.parent_count,
        "reproductive_edges": len(rel.reproductive),
        "generation_sizes": [len(g) for g in gens],
        "reproducers": len(lam),
        "child_mut": len(child_mut),
        "var_child_mut": len(var),
        "heredity_ratios": {a.schema.names[i] if len(a.ordered) == len(a.schema) else str(i): r
                            for i, r in ratios.items()},
    }
    if trace.model == "alchemy":
        from .models.alchemy import detect_level0
        lv = detect_level0(trace, rel)
        info["self_copiers"] = lv.self_copiers
        info["hypercycles"] = lv.hypercycles
    return Report({n: v[n] for n in names}, info, config, trace.config_digest)


def _plain(value):
    if isinstance(value, EntityRef):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _plain(x) for k, x in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(x) for x in value]
    if isinstance(value, float):
        return round(value, 9)
    return value


def _value(value) -> str:
    return json.dumps(_plain(value), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def render_machine(report: Report) -> str:
    """Stable ``key=value`` lines; values are compact JSON."""
    lines = [
        f"trace.config_digest={_value(report.trace_digest)}",
        f"observer.digest={_value(report.config.digest if report.config else '')}",
    ]
    if report.config:
        for k, x in sorted(report.config.as_dict().items()):
            lines.append(f"observer.{k}={_value(x)}")
    for k, x in sorted(report.info.items()):
        lines.append(f"info.{k}={_value(x)}")
    for name, verdict in report.verdicts.items():
        lines.append(f"axiom.{name}.status={verdict.status}")
        lines.append(f"axiom.{name}.reason={_value(verdict.reason)}")
        lines.append(f"axiom.{name}.evidence={_value(verdict.evidence)}")
    return "\n".join(lines) + "\n"


def render_human(report: Report) -> str:
    out = []
    info = report.info
    out.append(f"states {info.get('states', 0)}, entities {info.get('entities', 0)}")
    for key in ("recognition_edges", "causal_edges", "causal_dropped", "parent_edges", "reproductive_edges"):
        if key in info:
            out.append(f"  {key.replace('_', ' ')}: {info[key]}")
    if "generation_sizes" in info:
        out.append(f"  generation sizes: {info['generation_sizes']}")
    for key in ("self_copiers", "hypercycles"):
        if key in info:
            out.append(f"  {key.replace('_', ' ')}: {info[key] or 'none'}")
    out.append("")
    width = max((len(n) for n in report.verdicts), default=0)
    for name, verdict in report.verdicts.items():
        out.append(f"{name:<{width}}  {verdict.status!s:<12}  {verdict.reason}")
    out.append("")
    out.append("fecundity is judged within the trace only; an infinite run cannot be checked")
    return "\n".join(out) + "\n"
