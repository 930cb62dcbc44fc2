"""Domain types for MCMM timing reports and the per corner/mode report database.

All times are picoseconds, resistances ohms, capacitances femtofarads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Mapping

TOLERANCE_PS = 0.01


class ReportError(Exception):
    """Base class for report database errors."""


class KindAbsent(ReportError):
    def __init__(self, kind: ReportKind | str):
        self.kind = ReportKind(kind) if not isinstance(kind, ReportKind) else kind
        super().__init__(f"report kind {self.kind.value!r} not loaded")


class PathNotFound(ReportError):
    def __init__(self, path_id: int):
        self.path_id = path_id
        super().__init__(f"path {path_id} not found")


class ReportKind(str, Enum):
    MAX = "max"
    MIN = "min"
    XTALK_MAX = "xtalk_max"
    XTALK_MIN = "xtalk_min"
    CLK = "clk"
    FREQ = "freq"
    LC = "lc"
    WIRE = "wire"

    @property
    def order(self) -> int:
        return _KIND_ORDER[self]

    @property
    def is_path_report(self) -> bool:
        return self in (ReportKind.MAX, ReportKind.MIN)

    @property
    def is_xtalk_report(self) -> bool:
        return self in (ReportKind.XTALK_MAX, ReportKind.XTALK_MIN)

    def __str__(self) -> str:
        return self.value


_KIND_ORDER = {k: i for i, k in enumerate(ReportKind)}
ALL_KINDS: tuple[ReportKind, ...] = tuple(ReportKind)


@dataclass(frozen=True, order=True)
class CornerMode:
    corner: str
    mode: str

    def __post_init__(self) -> None:
        if not self.corner or not self.mode:
            raise ValueError("corner and mode must be non-empty")
        if "_" in self.mode or any(c.isspace() for c in self.corner + self.mode):
            raise ValueError(f"invalid corner/mode {self.corner!r}/{self.mode!r}")

    def __str__(self) -> str:
        return f"{self.corner}_{self.mode}"

    @classmethod
    def parse(cls, text: str) -> CornerMode:
        corner, sep, mode = text.rpartition("_")
        if not sep:
            raise ValueError(f"expected <CORNER>_<mode>, got {text!r}")
        return cls(corner, mode)


@dataclass(frozen=True)
class PathSummary:
    path_id: int
    startpoint: str
    endpoint: str
    slack: float
    constraint: float
    arrival: float
    path_group: str
    internal_external: str  # "internal" | "external"


@dataclass(frozen=True)
class ArcInfo:
    role: str  # "data" | "clock"
    pbsa_adjustment: float
    arrival_time: float
    launch_clock: str
    capture_clock: str
    clock_edge: str  # "rise" | "fall" | "missing"


@dataclass(frozen=True)
class Stage:
    index: int
    point: str
    net: str
    cell: str
    edge: str  # "rise" | "fall"
    delay: float
    slew: float
    xtalk_delta: float
    cumulative: float


@dataclass(frozen=True)
class TimingPath:
    summary: PathSummary
    data_info: ArcInfo
    clock_info: ArcInfo
    data_stages: tuple[Stage, ...]
    clock_stages: tuple[Stage, ...]

    @property
    def path_id(self) -> int:
        return self.summary.path_id


@dataclass(frozen=True)
class Aggressor:
    net: str
    delta: float


@dataclass(frozen=True)
class XtalkEntry:
    path_id: int
    victim: str
    aggressors: tuple[Aggressor, ...]

    @property
    def worst_aggressor(self) -> str:
        # first occurrence wins ties
        best = self.aggressors[0]
        for aggr in self.aggressors[1:]:
            if aggr.delta > best.delta:
                best = aggr
        return best.net


@dataclass(frozen=True)
class WireNet:
    net: str
    worst_r: float
    worst_c: float
    worst_rc: float


@dataclass(frozen=True)
class LcEntry:
    net: str
    constraint_kind: str
    value: str
    # Ground-truth flag; never set by the parser or stored in report files.
    unusual: bool | None = None


@dataclass(frozen=True)
class ClkReportEntry:
    clock: str
    net: str
    rise_arrival: float | None
    fall_arrival: float | None

    @property
    def missing_edges(self) -> tuple[str, ...]:
        out = []
        if self.rise_arrival is None:
            out.append("rise")
        if self.fall_arrival is None:
            out.append("fall")
        return tuple(out)

    @property
    def incomplete(self) -> bool:
        return bool(self.missing_edges)


Payload = Any  # per-kind shape documented on ReportDb


@dataclass(frozen=True)
class ReportDb:
    corner_mode: CornerMode
    tables: Mapping[ReportKind, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key in self.tables:
            if not isinstance(key, ReportKind):
                raise TypeError(f"table key {key!r} is not a ReportKind")

    @property
    def kinds(self) -> list[ReportKind]:
        return sorted(self.tables, key=lambda k: k.order)

    def lookup(self, kind: ReportKind | str) -> Any:
        kind = ReportKind(kind)
        try:
            return self.tables[kind]
        except KeyError:
            raise KindAbsent(kind) from None

    @cached_property
    def _path_index(self) -> dict[ReportKind, dict[int, TimingPath]]:
        index: dict[ReportKind, dict[int, TimingPath]] = {}
        for kind in (ReportKind.MAX, ReportKind.MIN):
            if kind in self.tables:
                index[kind] = {p.summary.path_id: p for p in self.tables[kind]}
        return index

    def path_by_id(self, kind: ReportKind | str, path_id: int) -> TimingPath:
        kind = ReportKind(kind)
        if not kind.is_path_report:
            raise ValueError(f"path_by_id needs max or min, got {kind.value}")
        if kind not in self.tables:
            raise KindAbsent(kind)
        try:
            return self._path_index[kind][path_id]
        except KeyError:
            raise PathNotFound(path_id) from None


def lookup(db: ReportDb, kind: ReportKind | str) -> Any:
    return db.lookup(kind)


def path_by_id(db: ReportDb, kind: ReportKind | str, path_id: int) -> TimingPath:
    return db.path_by_id(kind, path_id)


@dataclass
class Corpus:
    databases: dict[CornerMode, ReportDb]
    manifest: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.databases:
            raise ValueError("corpus must contain at least one corner/mode")
        self.databases = dict(sorted(self.databases.items()))

    @property
    def corner_modes(self) -> list[CornerMode]:
        return list(self.databases)

    def db(self, cm: CornerMode | str) -> ReportDb:
        if isinstance(cm, str):
            cm = CornerMode.parse(cm)
        return self.databases[cm]


# --- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: ReportKind
    where: str
    invariant: str

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.where}: {self.invariant}"


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def _check_stages(
    kind: ReportKind, pid: int, table: str, stages: Iterable[Stage]
) -> list[Violation]:
    out = []
    prev = None
    for pos, st in enumerate(stages):
        where = f"path {pid} {table} stage {st.index}"
        if st.index != pos:
            out.append(Violation(kind, where, f"stage index {st.index} != position {pos}"))
        if not _finite(st.delay, st.slew, st.xtalk_delta, st.cumulative):
            out.append(Violation(kind, where, "non-finite value"))
            continue
        if st.delay < 0:
            out.append(Violation(kind, where, "delay < 0"))
        if st.slew <= 0:
            out.append(Violation(kind, where, "slew <= 0"))
        if st.edge not in ("rise", "fall"):
            out.append(Violation(kind, where, f"edge {st.edge!r} not rise/fall"))
        if prev is not None and st.cumulative < prev:
            out.append(Violation(kind, where, "cumulative decreases"))
        prev = st.cumulative
    return out


def _validate_paths(kind: ReportKind, paths: list[TimingPath]) -> list[Violation]:
    out: list[Violation] = []
    seen: set[int] = set()
    for p in paths:
        s = p.summary
        pid = s.path_id
        if pid < 0:
            out.append(Violation(kind, f"path {pid}", "path_id < 0"))
        if pid in seen:
            out.append(Violation(kind, f"path {pid}", "duplicate path_id"))
        seen.add(pid)
        if abs(s.slack - (s.constraint - s.arrival)) > TOLERANCE_PS:
            out.append(Violation(kind, f"path {pid}", "slack != constraint - arrival"))
        if s.internal_external not in ("internal", "external"):
            out.append(Violation(kind, f"path {pid}", "internal_external not internal/external"))
        for info, role in ((p.data_info, "data"), (p.clock_info, "clock")):
            if info.role != role:
                out.append(Violation(kind, f"path {pid} {role}_info", f"role {info.role!r} != {role}"))
            if info.clock_edge not in ("rise", "fall", "missing"):
                out.append(Violation(kind, f"path {pid} {role}_info", "bad clock_edge"))
        out += _check_stages(kind, pid, "data_stages", p.data_stages)
        out += _check_stages(kind, pid, "clock_stages", p.clock_stages)
        if p.data_stages and abs(p.data_stages[-1].cumulative - s.arrival) > TOLERANCE_PS:
            out.append(Violation(kind, f"path {pid}", "last data cumulative != arrival"))
    return out


def validate(db: ReportDb) -> list[Violation]:
    """Return every broken type invariant in ``db``; empty means clean."""
    out: list[Violation] = []
    for kind in db.kinds:
        payload = db.tables[kind]
        if kind.is_path_report:
            out += _validate_paths(kind, payload)
        elif kind.is_xtalk_report:
            for i, e in enumerate(payload):
                if not e.aggressors:
                    out.append(Violation(kind, f"victim {e.victim}", "no aggressors"))
                elif any(a.delta < 0 for a in e.aggressors):
                    out.append(Violation(kind, f"victim {e.victim}", "negative coupling delta"))
        elif kind is ReportKind.WIRE:
            for w in payload:
                if min(w.worst_r, w.worst_c, w.worst_rc) < 0:
                    out.append(Violation(kind, f"net {w.net}", "negative wire value"))
        elif kind is ReportKind.LC:
            for e in payload:
                if not e.net:
                    out.append(Violation(kind, "entry", "empty net"))
        elif kind is ReportKind.CLK:
            for e in payload:
                if not e.clock or not e.net:
                    out.append(Violation(kind, f"net {e.net}", "empty clock or net"))
        elif kind is ReportKind.FREQ:
            for clock, mhz in payload.items():
                if not (mhz > 0):
                    out.append(Violation(kind, f"clock {clock}", "frequency <= 0"))
    return out
