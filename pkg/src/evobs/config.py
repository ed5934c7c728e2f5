"""Observer configuration: measure, recognizer, bounds and thresholds."""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in sorted(value.items())}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def digest(data) -> str:
    """Short stable digest of a config mapping."""
    text = json.dumps(_jsonable(data), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SelectionThresholds:
    min_reproducers: int = 20
    min_variant_children: int = 10
    heredity_ratio_tol: float = 1.05
    min_window_len: int = 100

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ConfigError(f"threshold {f.name} must be positive")
        if self.heredity_ratio_tol <= 1:
            raise ConfigError("heredity_ratio_tol must exceed 1")


@dataclass(frozen=True)
class ObserverConfig:
    measure: str
    recognizer: str
    delta_mut: tuple
    delta_rep_mut: tuple
    thresholds: SelectionThresholds = field(default_factory=SelectionThresholds)
    window: tuple | None = None  # inclusive (start, end); None = whole trace
    fecundity_tail: int = 1
    founders: str = "initial"  # "initial" = every entity of state 0

    def __post_init__(self):
        object.__setattr__(self, "delta_mut", tuple(self.delta_mut))
        object.__setattr__(self, "delta_rep_mut", tuple(self.delta_rep_mut))
        if self.window is not None:
            start, end = self.window
            if not 0 <= start <= end:
                raise ConfigError(f"bad analysis window {self.window}")
            object.__setattr__(self, "window", (int(start), int(end)))
        if self.fecundity_tail < 0:
            raise ConfigError("fecundity_tail must be non-negative")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window) if self.window else None
        return d

    @property
    def digest(self) -> str:
        return digest(self.as_dict())

    def replace(self, **changes) -> "ObserverConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return ObserverConfig(**d)


def default_observer(model: str, arity: int) -> ObserverConfig:
    """The observer each bundled model is analysed with by default."""
    if model == "cbs":
        mask = [1 if (i + 1) % 2 == 0 else 0 for i in range(arity)]
        return ObserverConfig("xor", "tag", [0] * arity, mask)
    if model == "langton":
        return ObserverConfig("langton", "langton-pivot", [1, 0], [0, 1])
    if model == "alchemy":
        return ObserverConfig("alchemy", "alchemy-tag", [0, 0], [0, 1])
    if model == "synth":
        return ObserverConfig("absdiff", "tag", [0] * arity, [math.inf] * arity)
    raise ConfigError(f"no default observer for model {model!r}")


def observer_from_mapping(data: dict, base: ObserverConfig) -> ObserverConfig:
    """Overlay a parsed observer config file onto ``base``."""
    known = {f.name for f in fields(ObserverConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown observer config keys: {', '.join(sorted(unknown))}")
    changes = dict(data)
    if "thresholds" in changes:
        tdata = changes["thresholds"]
        tknown = {f.name for f in fields(SelectionThresholds)}
        bad = set(tdata) - tknown
        if bad:
            raise ConfigError(f"unknown threshold keys: {', '.join(sorted(bad))}")
        changes["thresholds"] = SelectionThresholds(**{**asdict(base.thresholds), **tdata})
    if "window" in changes and changes["window"] is not None:
        changes["window"] = tuple(changes["window"])
    try:
        return base.replace(**changes)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
