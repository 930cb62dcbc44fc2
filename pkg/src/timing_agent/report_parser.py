"""Line-oriented timing report grammar: parse into payloads and serialize back.

The grammar is documented in ``docs/report_grammar.md``. Every file starts with

    # KIND <kind> CORNER <corner> MODE <mode> UNIT ps

Blank lines and other ``#`` lines are comments. Errors inside a path block (or
a row / xtalk entry for tabular kinds) drop only that block and produce an
error diagnostic; only a malformed header aborts the file.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

from .model import (
    Aggressor,
    ArcInfo,
    ClkReportEntry,
    Corpus,
    CornerMode,
    LcEntry,
    PathSummary,
    ReportDb,
    ReportKind,
    Stage,
    TimingPath,
    WireNet,
    XtalkEntry,
)

log = logging.getLogger(__name__)

STAGE_COLUMNS = ("index", "point", "net", "cell", "edge", "delay", "slew", "xtalk_delta", "cumulative")
SUMMARY_KEYS = ("startpoint", "endpoint", "slack", "constraint", "arrival", "path_group", "internal_external")
INFO_KEYS = ("pbsa_adjustment", "arrival_time", "launch_clock", "capture_clock", "clock_edge")
SECTIONS = ("Summary:", "DataInfo:", "ClockInfo:", "DataStages:", "ClockStages:")
MISSING = "-"


@dataclass(frozen=True)
class ParseDiagnostic:
    file: str
    line: int
    severity: str  # "warning" | "error"
    message: str

    def __str__(self) -> str:
        return f"{self.file}:{self.line}: {self.severity}: {self.message}"


class MalformedHeader(Exception):
    def __init__(self, file: str, line: int, message: str):
        self.file = file
        self.line = line
        super().__init__(f"{file}:{line}: malformed header: {message}")


class EmptyCorpus(Exception):
    pass


class _BlockError(Exception):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(message)


@dataclass(frozen=True)
class ReportHeader:
    kind: ReportKind
    corner_mode: CornerMode
    unit: str


# --- numbers ----------------------------------------------------------------


def fmt_num(x: float) -> str:
    """Shortest readable decimal that parses back to exactly ``x``."""
    s = f"{x:.3f}"
    if float(s) == x:
        return s
    return repr(float(x))


def _num(tok: str, line: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise _BlockError(line, f"{what}: not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise _BlockError(line, f"{what}: non-finite value {tok!r}")
    return v


def _int(tok: str, line: int, what: str) -> int:
    if not tok.isdigit():
        raise _BlockError(line, f"{what}: expected non-negative integer, got {tok!r}")
    return int(tok)


# --- header -----------------------------------------------------------------


def parse_header(line: str, lineno: int = 1, source: str = "<string>") -> ReportHeader:
    toks = line.split()
    if len(toks) != 9 or toks[0] != "#" or toks[1::2][:4] != ["KIND", "CORNER", "MODE", "UNIT"]:
        raise MalformedHeader(source, lineno, "expected '# KIND <kind> CORNER <c> MODE <m> UNIT ps'")
    try:
        kind = ReportKind(toks[2])
    except ValueError:
        raise MalformedHeader(source, lineno, f"unknown report kind {toks[2]!r}") from None
    try:
        cm = CornerMode(toks[4], toks[6])
    except ValueError as exc:
        raise MalformedHeader(source, lineno, str(exc)) from None
    if toks[8] != "ps":
        raise MalformedHeader(source, lineno, f"unsupported unit {toks[8]!r}")
    return ReportHeader(kind, cm, toks[8])


# --- block parsers ------------------------------------------------------------


def _kv_section(line: str, lineno: int, tag: str, keys: tuple[str, ...]) -> dict[str, str]:
    toks = line.split()
    if not toks or toks[0] != tag:
        raise _BlockError(lineno, f"expected {tag!r} section")
    out: dict[str, str] = {}
    for tok in toks[1:]:
        key, eq, value = tok.partition("=")
        if not eq or not value:
            raise _BlockError(lineno, f"{tag} expected key=value, got {tok!r}")
        if key not in keys:
            raise _BlockError(lineno, f"{tag} unknown key {key!r}")
        if key in out:
            raise _BlockError(lineno, f"{tag} duplicate key {key!r}")
        out[key] = value
    missing = [k for k in keys if k not in out]
    if missing:
        raise _BlockError(lineno, f"{tag} missing keys {missing}")
    return out


def _arc_info(kv: dict[str, str], role: str, lineno: int) -> ArcInfo:
    edge = kv["clock_edge"]
    if edge not in ("rise", "fall", "missing"):
        raise _BlockError(lineno, f"clock_edge must be rise/fall/missing, got {edge!r}")
    return ArcInfo(
        role=role,
        pbsa_adjustment=_num(kv["pbsa_adjustment"], lineno, "pbsa_adjustment"),
        arrival_time=_num(kv["arrival_time"], lineno, "arrival_time"),
        launch_clock=kv["launch_clock"],
        capture_clock=kv["capture_clock"],
        clock_edge=edge,
    )


def _stage_row(line: str, lineno: int) -> Stage:
    toks = line.split()
    if len(toks) != len(STAGE_COLUMNS):
        raise _BlockError(lineno, f"stage row has {len(toks)} columns, expected {len(STAGE_COLUMNS)}")
    if toks[4] not in ("rise", "fall"):
        raise _BlockError(lineno, f"stage edge must be rise/fall, got {toks[4]!r}")
    return Stage(
        index=_int(toks[0], lineno, "index"),
        point=toks[1],
        net=toks[2],
        cell=toks[3],
        edge=toks[4],
        delay=_num(toks[5], lineno, "delay"),
        slew=_num(toks[6], lineno, "slew"),
        xtalk_delta=_num(toks[7], lineno, "xtalk_delta"),
        cumulative=_num(toks[8], lineno, "cumulative"),
    )


def _parse_path_block(block: list[tuple[int, str]]) -> TimingPath:
    head_no, head = block[0]
    toks = head.split()
    if len(toks) != 2:
        raise _BlockError(head_no, "expected 'Path <id>'")
    path_id = _int(toks[1], head_no, "path id")
    body = block[1:]
    pos = 0

    def take(tag: str) -> tuple[int, str]:
        nonlocal pos
        if pos >= len(body):
            raise _BlockError(block[-1][0], f"missing {tag!r} section")
        item = body[pos]
        pos += 1
        return item

    n, line = take("Summary:")
    kv = _kv_section(line, n, "Summary:", SUMMARY_KEYS)
    if kv["internal_external"] not in ("internal", "external"):
        raise _BlockError(n, "internal_external must be internal or external")
    summary = PathSummary(
        path_id=path_id,
        startpoint=kv["startpoint"],
        endpoint=kv["endpoint"],
        slack=_num(kv["slack"], n, "slack"),
        constraint=_num(kv["constraint"], n, "constraint"),
        arrival=_num(kv["arrival"], n, "arrival"),
        path_group=kv["path_group"],
        internal_external=kv["internal_external"],
    )
    n, line = take("DataInfo:")
    data_info = _arc_info(_kv_section(line, n, "DataInfo:", INFO_KEYS), "data", n)
    n, line = take("ClockInfo:")
    clock_info = _arc_info(_kv_section(line, n, "ClockInfo:", INFO_KEYS), "clock", n)

    tables: dict[str, list[Stage]] = {}
    for tag in ("DataStages:", "ClockStages:"):
        n, line = take(tag)
        if line.strip() != tag:
            raise _BlockError(n, f"expected {tag!r}")
        n, line = take(f"{tag} column header")
        if tuple(line.split()) != STAGE_COLUMNS:
            raise _BlockError(n, f"expected column header {' '.join(STAGE_COLUMNS)!r}")
        rows = []
        while pos < len(body) and body[pos][1].split()[0] not in SECTIONS:
            n, line = body[pos]
            pos += 1
            rows.append(_stage_row(line, n))
        tables[tag] = rows
    if pos != len(body):
        raise _BlockError(body[pos][0], "unexpected content after ClockStages")
    return TimingPath(summary, data_info, clock_info, tuple(tables["DataStages:"]), tuple(tables["ClockStages:"]))


def _parse_victim(block: list[tuple[int, str]]) -> XtalkEntry:
    n, head = block[0]
    toks = head.split()
    if len(toks) != 4 or toks[2] != "path":
        raise _BlockError(n, "expected 'Victim <net> path <id>'")
    path_id = _int(toks[3], n, "path id")
    if len(block) == 1:
        raise _BlockError(n, f"victim {toks[1]} has no aggressors")
    aggrs = []
    for an, aline in block[1:]:
        at = aline.split()
        if len(at) != 4 or at[0] != "Aggr" or at[2] != "delta":
            raise _BlockError(an, "expected 'Aggr <net> delta <ps>'")
        aggrs.append(Aggressor(at[1], _num(at[3], an, "delta")))
    return XtalkEntry(path_id, toks[1], tuple(aggrs))


def _opt_num(tok: str, line: int, what: str) -> float | None:
    return None if tok == MISSING else _num(tok, line, what)


def _parse_row(kind: ReportKind, n: int, line: str) -> Any:
    if kind is ReportKind.WIRE:
        toks = line.split()
        if len(toks) != 4:
            raise _BlockError(n, f"wire row has {len(toks)} columns, expected 4")
        return WireNet(toks[0], _num(toks[1], n, "worst_r"), _num(toks[2], n, "worst_c"), _num(toks[3], n, "worst_rc"))
    if kind is ReportKind.CLK:
        toks = line.split()
        if len(toks) != 6 or toks[2] != "rise" or toks[4] != "fall":
            raise _BlockError(n, "expected '<clock> <net> rise <ps|-> fall <ps|->'")
        return ClkReportEntry(toks[0], toks[1], _opt_num(toks[3], n, "rise"), _opt_num(toks[5], n, "fall"))
    if kind is ReportKind.LC:
        toks = line.split(None, 2)
        if len(toks) != 3:
            raise _BlockError(n, "expected '<net> <constraint_kind> <value>'")
        return LcEntry(toks[0], toks[1], toks[2].strip())
    if kind is ReportKind.FREQ:
        toks = line.split()
        if len(toks) != 2:
            raise _BlockError(n, "expected '<clock> <mhz>'")
        return (toks[0], _num(toks[1], n, "frequency"))
    raise AssertionError(kind)


# --- streaming reader ---------------------------------------------------------


class ReportReader:
    """Iterate payload items from report lines without holding the whole file.

    Diagnostics accumulate in ``self.diagnostics`` as iteration proceeds.
    ``MalformedHeader`` is raised on the first ``next()`` if the header is bad.
    """

    def __init__(self, lines: Iterable[str], kind: ReportKind | str, source: str = "<string>"):
        self.kind = ReportKind(kind)
        self.source = source
        self.diagnostics: list[ParseDiagnostic] = []
        self.header: ReportHeader | None = None
        self._lines = lines

    def _error(self, line: int, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(self.source, line, "error", message))

    def _numbered(self) -> Iterator[tuple[int, str]]:
        """Yield (lineno, line) for content lines after the header."""
        it = iter(self._lines)
        lineno = 0
        for raw in it:
            lineno += 1
            if raw.strip():
                break
        else:
            raise MalformedHeader(self.source, max(lineno, 1), "empty report")
        self.header = parse_header(raw, lineno, self.source)
        if self.header.kind is not self.kind:
            raise MalformedHeader(
                self.source, lineno, f"header kind {self.header.kind.value!r} != expected {self.kind.value!r}"
            )
        for raw in it:
            lineno += 1
            line = raw.rstrip("\r\n")
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            yield lineno, line

    def __iter__(self) -> Iterator[Any]:
        if self.kind.is_path_report:
            return self._iter_paths()
        if self.kind.is_xtalk_report:
            return self._iter_xtalk()
        return self._iter_rows()

    def _iter_paths(self) -> Iterator[TimingPath]:
        seen: set[int] = set()
        block: list[tuple[int, str]] = []

        def finish(block: list[tuple[int, str]]) -> TimingPath | None:
            try:
                path = _parse_path_block(block)
            except _BlockError as exc:
                self._error(exc.line, str(exc))
                return None
            if path.summary.path_id in seen:
                self._error(block[0][0], f"duplicate path id {path.summary.path_id}")
                return None
            seen.add(path.summary.path_id)
            return path

        for n, line in self._numbered():
            head = line.split()[0]
            if head == "Path":
                if block:
                    self._error(block[-1][0], "path block not terminated by EndPath")
                block = [(n, line)]
            elif head == "EndPath":
                if not block:
                    self._error(n, "EndPath outside a path block")
                    continue
                if len(line.split()) != 1:
                    self._error(n, "unexpected tokens after EndPath")
                    block = []
                    continue
                path = finish(block)
                block = []
                if path is not None:
                    yield path
            elif block:
                block.append((n, line))
            else:
                self._error(n, "content outside a path block")
        if block:
            self._error(block[-1][0], "path block not terminated by EndPath")

    def _iter_xtalk(self) -> Iterator[XtalkEntry]:
        block: list[tuple[int, str]] = []

        def finish(block: list[tuple[int, str]]) -> XtalkEntry | None:
            try:
                return _parse_victim(block)
            except _BlockError as exc:
                self._error(exc.line, str(exc))
                return None

        for n, line in self._numbered():
            head = line.split()[0]
            if head == "Victim":
                if block and (entry := finish(block)) is not None:
                    yield entry
                block = [(n, line)]
            elif block:
                block.append((n, line))
            else:
                self._error(n, "content outside a Victim entry")
        if block and (entry := finish(block)) is not None:
            yield entry

    def _iter_rows(self) -> Iterator[Any]:
        for n, line in self._numbered():
            try:
                yield _parse_row(self.kind, n, line)
            except _BlockError as exc:
                self._error(exc.line, str(exc))


def _collect(reader: ReportReader) -> Any:
    if reader.kind is ReportKind.FREQ:
        freq: dict[str, float] = {}
        for clock, mhz in reader:
            if clock in freq:
                reader.diagnostics.append(
                    ParseDiagnostic(reader.source, 0, "warning", f"duplicate clock {clock}; last value kept")
                )
            freq[clock] = mhz
        return freq
    return list(reader)


def parse_report(
    text: str, kind: ReportKind | str, source: str = "<string>"
) -> tuple[Any, list[ParseDiagnostic]]:
    reader = ReportReader(text.splitlines(), kind, source)
    payload = _collect(reader)
    return payload, reader.diagnostics


def parse_report_file(path: Path | str, kind: ReportKind | str | None = None) -> tuple[Any, list[ParseDiagnostic], ReportHeader]:
    path = Path(path)
    kind = ReportKind(kind if kind is not None else path.stem)
    with path.open(encoding="utf-8", errors="replace") as fh:
        reader = ReportReader(fh, kind, str(path))
        payload = _collect(reader)
    assert reader.header is not None
    return payload, reader.diagnostics, reader.header


def iter_report_file(path: Path | str, kind: ReportKind | str | None = None) -> Iterator[Any]:
    """Stream payload items from a file; memory stays at one block."""
    path = Path(path)
    kind = ReportKind(kind if kind is not None else path.stem)
    with path.open(encoding="utf-8", errors="replace") as fh:
        yield from ReportReader(fh, kind, str(path))


def parse_corpus(root: Path | str) -> Corpus:
    """Load every ``<CORNER>_<mode>/<kind>.rpt`` under ``root``."""
    root = Path(root)
    databases: dict[CornerMode, ReportDb] = {}
    manifest: dict[str, Any] = {"source": str(root), "unit": "ps", "loaded": {}, "missing": {}, "diagnostics": [], "ignored": []}
    kind_names = {k.value for k in ReportKind}
    for sub in sorted(p for p in root.iterdir() if p.is_dir()) if root.is_dir() else []:
        try:
            cm = CornerMode.parse(sub.name)
        except ValueError:
            continue
        files = sorted(sub.glob("*.rpt"))
        if not files:
            continue
        tables: dict[ReportKind, Any] = {}
        for f in files:
            if f.stem not in kind_names:
                manifest["ignored"].append(str(f))
                continue
            try:
                payload, diags, header = parse_report_file(f, f.stem)
            except MalformedHeader as exc:
                manifest["diagnostics"].append(str(exc))
                log.warning("%s", exc)
                continue
            if header.corner_mode != cm:
                manifest["diagnostics"].append(f"{f}: header corner/mode {header.corner_mode} != directory {cm}; skipped")
                continue
            manifest["diagnostics"].extend(str(d) for d in diags)
            tables[ReportKind(f.stem)] = payload
        if not tables:
            continue
        databases[cm] = ReportDb(cm, tables)
        manifest["loaded"][str(cm)] = [k.value for k in sorted(tables, key=lambda k: k.order)]
        manifest["missing"][str(cm)] = [k.value for k in ReportKind if k not in tables]
    if not databases:
        raise EmptyCorpus(f"no <CORNER>_<mode> report directories under {root}")
    return Corpus(databases, manifest)


# --- serializer -------------------------------------------------------------


def _stage_table(stages: Iterable[Stage]) -> list[str]:
    rows = [list(STAGE_COLUMNS)]
    for s in stages:
        rows.append([
            str(s.index), s.point, s.net, s.cell, s.edge,
            fmt_num(s.delay), fmt_num(s.slew), fmt_num(s.xtalk_delta), fmt_num(s.cumulative),
        ])
    widths = [max(len(r[i]) for r in rows) for i in range(len(STAGE_COLUMNS))]
    return ["    " + "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


def _info_line(tag: str, a: ArcInfo) -> str:
    return (
        f"  {tag} pbsa_adjustment={fmt_num(a.pbsa_adjustment)} arrival_time={fmt_num(a.arrival_time)}"
        f" launch_clock={a.launch_clock} capture_clock={a.capture_clock} clock_edge={a.clock_edge}"
    )


def serialize_path(p: TimingPath) -> str:
    s = p.summary
    lines = [
        f"Path {s.path_id}",
        f"  Summary: startpoint={s.startpoint} endpoint={s.endpoint} slack={fmt_num(s.slack)}"
        f" constraint={fmt_num(s.constraint)} arrival={fmt_num(s.arrival)}"
        f" path_group={s.path_group} internal_external={s.internal_external}",
        _info_line("DataInfo:", p.data_info),
        _info_line("ClockInfo:", p.clock_info),
        "  DataStages:",
        *_stage_table(p.data_stages),
        "  ClockStages:",
        *_stage_table(p.clock_stages),
        "EndPath",
    ]
    return "\n".join(lines)


def _opt(v: float | None) -> str:
    return MISSING if v is None else fmt_num(v)


def iter_serialized(payload: Any, kind: ReportKind | str, corner_mode: CornerMode | None = None) -> Iterator[str]:
    """Yield the report text chunk by chunk (header first)."""
    kind = ReportKind(kind)
    cm = corner_mode or CornerMode("UNSET", "unset")
    yield f"# KIND {kind.value} CORNER {cm.corner} MODE {cm.mode} UNIT ps\n"
    if kind.is_path_report:
        for p in payload:
            yield "\n" + serialize_path(p) + "\n"
    elif kind.is_xtalk_report:
        for e in payload:
            yield f"Victim {e.victim} path {e.path_id}\n"
            for a in e.aggressors:
                yield f"  Aggr {a.net} delta {fmt_num(a.delta)}\n"
    elif kind is ReportKind.WIRE:
        yield "# net worst_r(ohm) worst_c(fF) worst_rc(ps)\n"
        for w in payload:
            yield f"{w.net} {fmt_num(w.worst_r)} {fmt_num(w.worst_c)} {fmt_num(w.worst_rc)}\n"
    elif kind is ReportKind.CLK:
        yield "# clock net rise <ps|-> fall <ps|->\n"
        for e in payload:
            yield f"{e.clock} {e.net} rise {_opt(e.rise_arrival)} fall {_opt(e.fall_arrival)}\n"
    elif kind is ReportKind.LC:
        yield "# net constraint_kind value\n"
        for e in payload:
            yield f"{e.net} {e.constraint_kind} {e.value}\n"
    else:
        yield "# clock mhz\n"
        for clock, mhz in payload.items():
            yield f"{clock} {fmt_num(mhz)}\n"


def serialize(payload: Any, kind: ReportKind | str, corner_mode: CornerMode | None = None) -> str:
    return "".join(iter_serialized(payload, kind, corner_mode))


def write_report(path: Path | str, payload: Any, kind: ReportKind | str, corner_mode: CornerMode | None = None) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for chunk in iter_serialized(payload, kind, corner_mode):
            fh.write(chunk)
