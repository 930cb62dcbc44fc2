"""Canonical JSON form of report payloads.

One document per (corner/mode, kind)::

    {"corner_mode": "TT_read", "kind": "max", "unit": "ps", "payload": [...]}

Field names mirror the dataclasses in :mod:`timing_agent.model`. The only
derived field is ``worst_aggressor`` on xtalk entries, which is emitted for
readers and ignored on load.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .model import (
    Aggressor,
    ArcInfo,
    ClkReportEntry,
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

SCHEMA_VERSION = 1


def _stage_json(s: Stage) -> dict[str, Any]:
    return {
        "index": s.index,
        "point": s.point,
        "net": s.net,
        "cell": s.cell,
        "edge": s.edge,
        "delay": s.delay,
        "slew": s.slew,
        "xtalk_delta": s.xtalk_delta,
        "cumulative": s.cumulative,
    }


def _info_json(a: ArcInfo) -> dict[str, Any]:
    return {
        "role": a.role,
        "pbsa_adjustment": a.pbsa_adjustment,
        "arrival_time": a.arrival_time,
        "launch_clock": a.launch_clock,
        "capture_clock": a.capture_clock,
        "clock_edge": a.clock_edge,
    }


def path_to_json(p: TimingPath) -> dict[str, Any]:
    s = p.summary
    return {
        "summary": {
            "path_id": s.path_id,
            "startpoint": s.startpoint,
            "endpoint": s.endpoint,
            "slack": s.slack,
            "constraint": s.constraint,
            "arrival": s.arrival,
            "path_group": s.path_group,
            "internal_external": s.internal_external,
        },
        "data_info": _info_json(p.data_info),
        "clock_info": _info_json(p.clock_info),
        "data_stages": [_stage_json(st) for st in p.data_stages],
        "clock_stages": [_stage_json(st) for st in p.clock_stages],
    }


def xtalk_to_json(e: XtalkEntry) -> dict[str, Any]:
    return {
        "path_id": e.path_id,
        "victim": e.victim,
        "aggressors": [{"net": a.net, "delta": a.delta} for a in e.aggressors],
        "worst_aggressor": e.worst_aggressor,
    }


def payload_to_json(kind: ReportKind, payload: Any) -> Any:
    kind = ReportKind(kind)
    if kind.is_path_report:
        return [path_to_json(p) for p in payload]
    if kind.is_xtalk_report:
        return [xtalk_to_json(e) for e in payload]
    if kind is ReportKind.WIRE:
        return [
            {"net": w.net, "worst_r": w.worst_r, "worst_c": w.worst_c, "worst_rc": w.worst_rc}
            for w in payload
        ]
    if kind is ReportKind.LC:
        return [
            {"net": e.net, "constraint_kind": e.constraint_kind, "value": e.value, "unusual": e.unusual}
            for e in payload
        ]
    if kind is ReportKind.CLK:
        return [
            {"clock": e.clock, "net": e.net, "rise_arrival": e.rise_arrival, "fall_arrival": e.fall_arrival}
            for e in payload
        ]
    return {clock: mhz for clock, mhz in payload.items()}


def _stage(d: dict[str, Any]) -> Stage:
    return Stage(
        index=int(d["index"]),
        point=d["point"],
        net=d["net"],
        cell=d["cell"],
        edge=d["edge"],
        delay=float(d["delay"]),
        slew=float(d["slew"]),
        xtalk_delta=float(d["xtalk_delta"]),
        cumulative=float(d["cumulative"]),
    )


def _info(d: dict[str, Any]) -> ArcInfo:
    return ArcInfo(
        role=d["role"],
        pbsa_adjustment=float(d["pbsa_adjustment"]),
        arrival_time=float(d["arrival_time"]),
        launch_clock=d["launch_clock"],
        capture_clock=d["capture_clock"],
        clock_edge=d["clock_edge"],
    )


def path_from_json(d: dict[str, Any]) -> TimingPath:
    s = d["summary"]
    return TimingPath(
        summary=PathSummary(
            path_id=int(s["path_id"]),
            startpoint=s["startpoint"],
            endpoint=s["endpoint"],
            slack=float(s["slack"]),
            constraint=float(s["constraint"]),
            arrival=float(s["arrival"]),
            path_group=s["path_group"],
            internal_external=s["internal_external"],
        ),
        data_info=_info(d["data_info"]),
        clock_info=_info(d["clock_info"]),
        data_stages=tuple(_stage(x) for x in d["data_stages"]),
        clock_stages=tuple(_stage(x) for x in d["clock_stages"]),
    )


def _opt_float(v: Any) -> float | None:
    return None if v is None else float(v)


def payload_from_json(kind: ReportKind, data: Any) -> Any:
    kind = ReportKind(kind)
    if kind.is_path_report:
        return [path_from_json(d) for d in data]
    if kind.is_xtalk_report:
        return [
            XtalkEntry(
                path_id=int(d["path_id"]),
                victim=d["victim"],
                aggressors=tuple(Aggressor(a["net"], float(a["delta"])) for a in d["aggressors"]),
            )
            for d in data
        ]
    if kind is ReportKind.WIRE:
        return [
            WireNet(d["net"], float(d["worst_r"]), float(d["worst_c"]), float(d["worst_rc"]))
            for d in data
        ]
    if kind is ReportKind.LC:
        return [LcEntry(d["net"], d["constraint_kind"], d["value"], d.get("unusual")) for d in data]
    if kind is ReportKind.CLK:
        return [
            ClkReportEntry(d["clock"], d["net"], _opt_float(d["rise_arrival"]), _opt_float(d["fall_arrival"]))
            for d in data
        ]
    return {str(k): float(v) for k, v in data.items()}


def report_document(cm: CornerMode, kind: ReportKind, payload: Any) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "corner_mode": str(cm),
        "kind": ReportKind(kind).value,
        "unit": "ps",
        "payload": payload_to_json(kind, payload),
    }


def dumps_report(cm: CornerMode, kind: ReportKind, payload: Any) -> str:
    return json.dumps(report_document(cm, kind, payload), indent=1, sort_keys=False) + "\n"


def loads_report(text: str) -> tuple[CornerMode, ReportKind, Any]:
    doc = json.loads(text)
    kind = ReportKind(doc["kind"])
    return CornerMode.parse(doc["corner_mode"]), kind, payload_from_json(kind, doc["payload"])


def write_db_json(db: ReportDb, out_dir: Path) -> list[Path]:
    """Write ``<out_dir>/<CM>/<kind>.json`` for every loaded kind."""
    target = Path(out_dir) / str(db.corner_mode)
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in db.kinds:
        path = target / f"{kind.value}.json"
        path.write_text(dumps_report(db.corner_mode, kind, db.tables[kind]), encoding="utf-8")
        written.append(path)
    return written


def read_db_json(directory: Path) -> ReportDb:
    directory = Path(directory)
    cm = CornerMode.parse(directory.name)
    tables = {}
    for path in sorted(directory.glob("*.json")):
        doc_cm, kind, payload = loads_report(path.read_text(encoding="utf-8"))
        if doc_cm != cm:
            raise ValueError(f"{path}: corner_mode {doc_cm} does not match directory {cm}")
        tables[kind] = payload
    return ReportDb(cm, tables)
