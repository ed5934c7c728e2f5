"""Langton's self-reproducing loop and its observer.

The engine is an 8-state, von Neumann neighbourhood CA on an unbounded grid.
Cells live in a dense numpy window that grows when activity reaches its
edge; a rule table is compiled into a lookup array indexed by the base-8
number CTRBL. Coordinates have y pointing up, so array row r sits at
y = top - r.

The observer treats every 4-connected set of non-quiescent cells as an
entity, tagged by its pivot (leftmost column, topmost row of the set).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy import ndimage

from ..config import ConfigError, digest
from ..trace import CharSpaceSchema, Dimension, EntityRef, EntitySnapshot, State, Trace

N_STATES = 8


class RuleFileError(ValueError):
    pass


class MissingRuleError(RuntimeError):
    def __init__(self, key):
        self.key = key
        super().__init__("no rule for neighbourhood (C,T,R,B,L) = (%s)" % ",".join(map(str, key)))


def rotations(key: tuple) -> list[tuple]:
    """The four quarter-turn variants of a CTRBL key, starting with ``key``."""
    c, *ring = key
    out = []
    for k in range(4):
        out.append((c, *ring[4 - k:], *ring[:4 - k]) if k else tuple(key))
    return out


@dataclass
class RuleTable:
    rules: dict
    rotate: bool = False
    _lut: np.ndarray = field(default=None, repr=False)

    def __getitem__(self, key):
        return self.rules[tuple(key)]

    def get(self, key, default=None):
        return self.rules.get(tuple(key), default)

    def __len__(self) -> int:
        return len(self.rules)

    @property
    def lut(self) -> np.ndarray:
        if self._lut is None:
            lut = np.full(N_STATES ** 5, -1, dtype=np.int16)
            for (c, t, r, b, l), v in self.rules.items():
                lut[(((c * 8 + t) * 8 + r) * 8 + b) * 8 + l] = v
            if lut[0] < 0:
                lut[0] = 0  # vacuum stays vacuum
            self._lut = lut
        return self._lut


_RULE_LINE = re.compile(r"^([0-7])([0-7])([0-7])([0-7])([0-7])\s*->\s*([0-7])$")


def load_rule_table(source) -> RuleTable:
    """Parse rule-file text (an iterable of lines or one string)."""
    if isinstance(source, str):
        source = source.splitlines()
    rotate = False
    entries = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            if line == "@rotate":
                rotate = True
                continue
            raise RuleFileError(f"line {lineno}: unknown directive {line!r}")
        m = _RULE_LINE.match(line)
        if not m:
            raise RuleFileError(f"line {lineno}: malformed rule {line!r}")
        digits = tuple(int(g) for g in m.groups())
        entries.append((digits[:5], digits[5], lineno))
    rules, origin = {}, {}
    for key, value, lineno in entries:
        variants = rotations(key) if rotate else [key]
        for k in variants:
            if k in rules and rules[k] != value:
                raise RuleFileError(
                    f"line {lineno} conflicts with line {origin[k]}: "
                    f"{''.join(map(str, k))} maps to both {rules[k]} and {value}")
            rules.setdefault(k, value)
            origin.setdefault(k, lineno)
    return RuleTable(rules, rotate)


def read_rule_file(path) -> RuleTable:
    with open(path, encoding="utf-8") as fh:
        return load_rule_table(fh)


def standard_table() -> RuleTable:
    text = resources.files("evobs.data").joinpath("langton.rule").read_text(encoding="utf-8")
    return load_rule_table(text)


# --- grid -----------------------------------------------------------------


class Grid:
    """Non-quiescent cells of an unbounded plane.

    ``cells`` holds a dense window; ``left``/``top`` give the (x, y) of
    ``cells[0, 0]``.
    """

    def __init__(self, cells: np.ndarray | None = None, left: int = 0, top: int = 0):
        self.cells = np.zeros((0, 0), dtype=np.int8) if cells is None else np.asarray(cells, dtype=np.int8)
        self.left = int(left)
        self.top = int(top)

    @classmethod
    def from_cells(cls, mapping: dict) -> "Grid":
        live = {p: s for p, s in mapping.items() if s}
        if not live:
            return cls()
        xs = [x for x, _ in live]
        ys = [y for _, y in live]
        left, top = min(xs), max(ys)
        arr = np.zeros((top - min(ys) + 1, max(xs) - left + 1), dtype=np.int8)
        for (x, y), s in live.items():
            arr[top - y, x - left] = s
        return cls(arr, left, top)

    def to_cells(self) -> dict:
        rows, cols = np.nonzero(self.cells)
        return {(int(self.left + c), int(self.top - r)): int(self.cells[r, c]) for r, c in zip(rows, cols)}

    def __len__(self) -> int:
        return int(np.count_nonzero(self.cells))

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and self.to_cells() == other.to_cells()

    def render(self) -> str:
        """Text art: digits for live cells, spaces for quiescent ones."""
        cells = self.to_cells()
        if not cells:
            return ""
        return render_cells(cells)


def render_cells(cells: dict) -> str:
    xs = [x for x, _ in cells]
    ys = [y for _, y in cells]
    lines = []
    for y in range(max(ys), min(ys) - 1, -1):
        row = "".join(str(cells[(x, y)]) if (x, y) in cells else " " for x in range(min(xs), max(xs) + 1))
        lines.append(row.rstrip())
    return "\n".join(lines)


def _padded(grid: Grid) -> Grid:
    """Ensure a quiescent ring of width 2 around all live cells."""
    a = grid.cells
    if a.size == 0 or not a.any():
        return Grid()
    rows = np.flatnonzero(a.any(axis=1))
    cols = np.flatnonzero(a.any(axis=0))
    r0, r1, c0, c1 = rows[0], rows[-1], cols[0], cols[-1]
    h, w = a.shape
    if r0 >= 1 and c0 >= 1 and r1 <= h - 2 and c1 <= w - 2:
        return grid
    pad = 8
    out = np.zeros((r1 - r0 + 1 + 2 * pad, c1 - c0 + 1 + 2 * pad), dtype=np.int8)
    out[pad:pad + r1 - r0 + 1, pad:pad + c1 - c0 + 1] = a[r0:r1 + 1, c0:c1 + 1]
    return Grid(out, int(grid.left + c0 - pad), int(grid.top - r0 + pad))


def ca_step(grid: Grid, table: RuleTable) -> Grid:
    """One synchronous update of every cell."""
    g = _padded(grid)
    a = g.cells
    if a.size == 0:
        return Grid()
    p = np.pad(a, 1).astype(np.int32)
    c = p[1:-1, 1:-1]
    t = p[:-2, 1:-1]
    r = p[1:-1, 2:]
    b = p[2:, 1:-1]
    l = p[1:-1, :-2]
    idx = (((c * 8 + t) * 8 + r) * 8 + b) * 8 + l
    nxt = table.lut[idx]
    if (nxt < 0).any():
        rr, cc = np.argwhere(nxt < 0)[0]
        raise MissingRuleError(tuple(int(v[rr, cc]) for v in (c, t, r, b, l)))
    return Grid(nxt.astype(np.int8), g.left, g.top)


# --- seed files -----------------------------------------------------------


def load_seed(source) -> Grid:
    """Digit rows, top row first, with an optional ``@origin x y`` header
    giving the coordinate of the first character of the first row."""
    if isinstance(source, str):
        source = source.splitlines()
    ox, oy = 0, 0
    rows = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.startswith("@origin"):
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError(f"seed line {lineno}: expected '@origin X Y'")
            try:
                ox, oy = int(parts[1]), int(parts[2])
            except ValueError:
                raise ConfigError(f"seed line {lineno}: bad origin {line!r}") from None
            continue
        if not re.fullmatch(r"[0-7. ]+", line):
            raise ConfigError(f"seed line {lineno}: rows may only contain digits 0-7, '.' or spaces")
        rows.append(line)
    cells = {}
    for r, row in enumerate(rows):
        for c, ch in enumerate(row):
            if ch not in ". 0":
                cells[(ox + c, oy - r)] = int(ch)
    return Grid.from_cells(cells)


def read_seed_file(path) -> Grid:
    with open(path, encoding="utf-8") as fh:
        return load_seed(fh)


def standard_seed() -> Grid:
    text = resources.files("evobs.data").joinpath("langton_loop.seed").read_text(encoding="utf-8")
    return load_seed(text)


# --- observer -------------------------------------------------------------


@dataclass(frozen=True)
class Loop:
    pivot: tuple  # (x, y)
    shape: str  # bbox rows top to bottom, '.' off the component, '/' between rows
    xspan: tuple  # (min x, max x)
    yspan: tuple  # (min y, max y)
    size: int

    def cells(self) -> dict:
        return shape_cells(self.shape, self.pivot)


def shape_cells(shape: str, pivot) -> dict:
    px, py = pivot
    out = {}
    for r, row in enumerate(shape.split("/")):
        for c, ch in enumerate(row):
            if ch != ".":
                out[(px + c, py - r)] = int(ch)
    return out


def extract_entities(grid: Grid) -> list[Loop]:
    """4-connected components of live cells, ordered by pivot."""
    a = grid.cells
    if a.size == 0:
        return []
    labels, count = ndimage.label(a > 0)
    loops = []
    for k, box in enumerate(ndimage.find_objects(labels), start=1):
        rs, cs = box
        mask = labels[box] == k
        sub = np.where(mask, a[box], -1)
        shape = "/".join("".join("." if v < 0 else str(v) for v in row) for row in sub.tolist())
        x0 = grid.left + cs.start
        x1 = grid.left + cs.stop - 1
        y1 = grid.top - rs.start
        y0 = grid.top - (rs.stop - 1)
        loops.append(Loop((x0, y1), shape, (x0, x1), (y0, y1), int(mask.sum())))
    loops.sort(key=lambda lp: (lp.pivot[0], -lp.pivot[1]))
    return loops


def loop_diff(a: Loop, b: Loop) -> tuple:
    """[d_g, d_p] for two loops."""
    return (0 if a.shape == b.shape else 1, 0 if a.pivot == b.pivot else 1)


def _inside(inner: tuple, outer: tuple, strict: bool) -> bool:
    contained = outer[0] <= inner[0] and inner[1] <= outer[1]
    return contained and (not strict or inner != outer)


def split_events(prev: list[Loop], cur: list[Loop], strict: bool = False) -> list[tuple[Loop, Loop]]:
    """Pairs (parent, child) meeting the breaking-off conditions.

    The child's pivot differs from the parent's and its row and column
    ranges lie within the parent's. With ``strict`` both ranges must be
    proper subsets.
    """
    out = []
    for p in prev:
        for c in cur:
            if c.pivot == p.pivot:
                continue
            if _inside(c.xspan, p.xspan, strict) and _inside(c.yspan, p.yspan, strict):
                out.append((p, c))
    return out


SCHEMA = CharSpaceSchema((
    Dimension("geometry", "cell pattern up to translation", "discrete", ""),
    Dimension("pivot", "coordinate", "none", (0, 0)),
))


def _local_id(loop: Loop) -> str:
    return f"{loop.pivot[0]},{loop.pivot[1]}"


def _state(index: int, loops: list[Loop]) -> State:
    return State(index, tuple(
        EntitySnapshot(EntityRef(index, _local_id(lp)), lp.pivot, (lp.shape, lp.pivot)) for lp in loops))


@dataclass
class LangtonConfig:
    steps: int = 200
    table: str | None = None  # path; None = vendored standard table
    seed_file: str | None = None  # path; None = vendored 86-cell loop
    strict_projections: bool = False
    snapshot_interval: int = 0
    snapshot_dir: str | None = None
    seed: int = 0  # the CA is deterministic; recorded for the trace header only

    def __post_init__(self):
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        if self.snapshot_interval < 0:
            raise ConfigError("snapshot_interval must be non-negative")

    @classmethod
    def from_mapping(cls, data: dict) -> "LangtonConfig":
        bad = set(data) - set(cls.__dataclass_fields__)
        if bad:
            raise ConfigError(f"unknown langton config keys: {', '.join(sorted(bad))}")
        return cls(**data)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        # snapshots do not affect the trace
        d.pop("snapshot_interval")
        d.pop("snapshot_dir")
        return d


class LangtonObserver:
    """Turns successive grids into trace states and split events."""

    def __init__(self, strict: bool = False):
        self.strict = strict
        self.states: list[State] = []
        self.events: list = []
        self._prev: list[Loop] | None = None

    def observe(self, grid: Grid) -> list[Loop]:
        k = len(self.states)
        loops = extract_entities(grid)
        self.states.append(_state(k, loops))
        if self._prev is not None:
            for p, c in split_events(self._prev, loops, self.strict):
                self.events.append((EntityRef(k - 1, _local_id(p)), EntityRef(k, _local_id(c))))
        self._prev = loops
        return loops


def langton_observe(grids, strict: bool = False, seed: int = 0, config_digest: str = "") -> Trace:
    obs = LangtonObserver(strict)
    for g in grids:
        obs.observe(g)
    return Trace(obs.states, obs.events, "langton", SCHEMA, seed, config_digest)


def run_grids(seed: Grid, table: RuleTable, steps: int):
    g = seed
    yield g
    for _ in range(steps):
        g = ca_step(g, table)
        yield g


def langton_run(config: LangtonConfig, steps: int | None = None) -> Trace:
    steps = config.steps if steps is None else steps
    table = read_rule_file(config.table) if config.table else standard_table()
    seed = read_seed_file(config.seed_file) if config.seed_file else standard_seed()
    table_digest = digest(sorted((list(k), v) for k, v in table.rules.items()))
    seed_digest = digest(sorted([list(p), s] for p, s in seed.to_cells().items()))
    cfg_digest = digest({**config.as_dict(), "table": table_digest, "seed_file": seed_digest})
    obs = LangtonObserver(config.strict_projections)
    for k, grid in enumerate(run_grids(seed, table, steps)):
        obs.observe(grid)
        if config.snapshot_interval and config.snapshot_dir and k % config.snapshot_interval == 0:
            os.makedirs(config.snapshot_dir, exist_ok=True)
            with open(os.path.join(config.snapshot_dir, f"state_{k:06d}.txt"), "w", encoding="utf-8") as fh:
                fh.write(grid.render() + "\n")
    return Trace(obs.states, obs.events, "langton", SCHEMA, config.seed, cfg_digest)


def render_state(state: State) -> str:
    cells = {}
    for snap in state.entities:
        cells.update(shape_cells(snap.chars[0], snap.chars[1]))
    return render_cells(cells) if cells else ""
