"""Golden answers computed by plain scans over report dataclasses.

Nothing here touches the query engine or any agent code: goldens must stay
independent of the system under test. ``truth_golden`` re-derives the same
answers from the generator's GroundTruth manifest where it records them;
``soundness`` checks that both routes agree.
"""

from __future__ import annotations

from typing import Any, Mapping

from ..corpus_gen import CmTruth, GroundTruth
from ..model import Corpus, CornerMode, ReportDb, ReportKind, TimingPath

K = ReportKind


class InsufficientData(ValueError):
    pass


def _paths(db: ReportDb) -> list[TimingPath]:
    return list(db.tables[K.MAX])


def _path(db: ReportDb, pid: int) -> TimingPath:
    for p in _paths(db):
        if p.summary.path_id == pid:
            return p
    raise InsufficientData(f"path {pid} not in {db.corner_mode}")


def worst_slack_path(db: ReportDb) -> int:
    best = None
    for p in _paths(db):
        if best is None or p.summary.slack < best.summary.slack:
            best = p
    if best is None:
        raise InsufficientData(f"no paths in {db.corner_mode}")
    return best.summary.path_id


def _target(db: ReportDb, params: Mapping[str, Any]) -> TimingPath:
    pid = params.get("path_id")
    return _path(db, int(pid) if pid is not None else worst_slack_path(db))


def _rc(db: ReportDb) -> dict[str, float]:
    out = {}
    for w in db.tables[K.WIRE]:
        out[w.net] = w.worst_rc
    return out


def _worst_aggressor(entry: Any) -> str:
    best = entry.aggressors[0]
    for a in entry.aggressors:
        if a.delta > best.delta:
            best = a
    return best.net


def _first_max(items: list[Any], key: Any) -> Any:
    best = None
    for x in items:
        if best is None or key(x) > key(best):
            best = x
    return best


# --- single-report categories ---------------------------------------------------

WORST_ATTRIBUTE_SIGN = {"slack": -1, "arrival": 1, "constraint": -1}
WORST_COLUMN_SIGN = {"delay": 1, "slew": 1, "xtalk_delta": 1}


def scan_single(category: str, db: ReportDb, params: Mapping[str, Any]) -> Any:
    if category == "path_violation":
        return _path(db, params["path_id"]).summary.slack < 0
    if category == "worst_attribute":
        name = params["attribute"]
        values = [getattr(p.summary, name) for p in _paths(db)]
        return max(values) if WORST_ATTRIBUTE_SIGN[name] > 0 else min(values)
    if category == "worst_column":
        name = params["column"]
        values = [getattr(s, name) for p in _paths(db) for s in p.data_stages]
        return max(values) if WORST_COLUMN_SIGN[name] > 0 else min(values)
    p = _path(db, params["path_id"]) if "path_id" in params else None
    assert p is not None
    if category == "internal_external":
        return p.summary.internal_external
    if category == "slowest_stage":
        return _first_max(list(p.data_stages), lambda s: s.delay).point
    if category == "max_xtalk_net":
        return _first_max(list(p.data_stages), lambda s: s.xtalk_delta).net
    if category == "net_slew":
        hits = [s.slew for s in p.data_stages if s.net == params["net"]]
        if len(hits) != 1:
            raise InsufficientData(f"net {params['net']} is not a unique stage of path {p.summary.path_id}")
        return hits[0]
    if category == "path_through_net":
        return any(s.net == params["net"] for s in p.data_stages)
    if category == "data_arc_clock_rise":
        return p.data_info.launch_clock == params["clock"] and p.data_info.clock_edge == "rise"
    raise ValueError(f"unknown single-report category {category!r}")


def truth_single(category: str, truth: CmTruth, db: ReportDb, params: Mapping[str, Any]) -> Any:
    """Single-report goldens that GroundTruth records directly, else None."""
    if category == "path_violation":
        return params["path_id"] in truth.violating_paths
    if category == "worst_attribute" and params["attribute"] == "slack":
        return _path(db, truth.worst_slack_path).summary.slack
    if category == "max_xtalk_net":
        return truth.worst_xtalk_net[params["path_id"]]
    return None


# --- multi-report tasks, one corner/mode ------------------------------------------


def _scan_m1(db: ReportDb, params: Mapping[str, Any]) -> list[list[str]]:
    p = _target(db, params)
    nets = {s.net for s in p.clock_stages}
    found = set()
    for e in db.tables[K.CLK]:
        if e.net in nets and (e.rise_arrival is None or e.fall_arrival is None):
            found.add((e.clock, e.net))
    return [list(x) for x in sorted(found)]


def _rc_pairs(nets: list[str], rc: Mapping[str, float], threshold: float, positions: Any = None) -> list[list[str]]:
    out = []
    for i in range(len(nets) - 1):
        if positions is not None and i not in positions:
            continue
        a, b = nets[i], nets[i + 1]
        if a in rc and b in rc and abs(rc[a] - rc[b]) > threshold:
            out.append([a, b])
    return out


def _scan_m2(db: ReportDb, params: Mapping[str, Any], threshold: float) -> list[list[str]]:
    p = _target(db, params)
    return sorted(_rc_pairs([s.net for s in p.data_stages], _rc(db), threshold))


def _xtalk_of(db: ReportDb, pid: int) -> list[Any]:
    return [e for e in db.tables[K.XTALK_MAX] if e.path_id == pid]


def _unusual(db: ReportDb, nets: set[str], deny: tuple[str, ...]) -> list[str]:
    return sorted({e.net for e in db.tables[K.LC] if e.net in nets and e.constraint_kind in deny})


def _scan_m3(db: ReportDb, params: Mapping[str, Any], deny: tuple[str, ...]) -> list[str]:
    p = _target(db, params)
    nets = set()
    for e in _xtalk_of(db, p.summary.path_id):
        nets |= {e.victim, _worst_aggressor(e)}
    return _unusual(db, nets, deny)


def _scan_m4(db: ReportDb, params: Mapping[str, Any], threshold: float) -> list[list[str]]:
    p = _target(db, params)
    rc = _rc(db)
    out = []
    for e in _xtalk_of(db, p.summary.path_id):
        v, a = e.victim, _worst_aggressor(e)
        if v in rc and a in rc and abs(rc[v] - rc[a]) > threshold:
            out.append([v, a])
    return sorted(out)


def _scan_m5(db: ReportDb, params: Mapping[str, Any]) -> dict[str, Any]:
    p = _target(db, params)
    rc = _rc(db)
    stages = list(p.data_stages)
    # three slowest, earlier stage first on equal delay
    ranked = sorted(range(len(stages)), key=lambda i: (-stages[i].delay, i))[:3]
    best = None
    for i in sorted(ranked):
        net = stages[i].net
        if net in rc and (best is None or rc[net] > rc[best]):
            best = net
    if best is None:
        raise InsufficientData("no wire data on the slowest stages")
    cons = sorted([e.constraint_kind, e.value] for e in db.tables[K.LC] if e.net == best)
    return {"net": best, "constraints": cons}


def _scan_m6(db: ReportDb, params: Mapping[str, Any]) -> dict[str, Any]:
    p = _target(db, params)
    out = {}
    for table, stages, info in (("data", p.data_stages, p.data_info), ("clock", p.clock_stages, p.clock_info)):
        if not stages:
            raise InsufficientData(f"path {p.summary.path_id} has no {table} stages")
        last = stages[-1]
        out[table] = {
            "stages": len(stages),
            "last_point": last.point,
            "mismatch": round(info.arrival_time - last.cumulative, 3),
        }
    return out


def _scan_m7(db: ReportDb, params: Mapping[str, Any], threshold: float, deny: tuple[str, ...]) -> dict[str, Any]:
    rc = _rc(db)
    pairs: list[list[str]] = []
    nets: set[str] = set()
    for t in params["targets"]:
        p = _path(db, int(t["path_id"]))
        stages = {int(i) for i in t["stages"]}
        data_nets = [s.net for s in p.data_stages]
        pairs += _rc_pairs(data_nets, rc, threshold, stages)
        for e in _xtalk_of(db, p.summary.path_id):
            if e.victim in data_nets and data_nets.index(e.victim) in stages:
                nets |= {e.victim, _worst_aggressor(e)}
    return {"rc_pairs": sorted(pairs), "unusual_lc_nets": _unusual(db, nets, deny)}


def scan_base(category: str, db: ReportDb, params: Mapping[str, Any], threshold: float, deny: tuple[str, ...]) -> Any:
    if category == "M1":
        return _scan_m1(db, params)
    if category == "M2":
        return _scan_m2(db, params, threshold)
    if category == "M3":
        return _scan_m3(db, params, deny)
    if category == "M4":
        return _scan_m4(db, params, threshold)
    if category == "M5":
        return _scan_m5(db, params)
    if category == "M6":
        return _scan_m6(db, params)
    if category == "M7":
        return _scan_m7(db, params, threshold, deny)
    raise ValueError(f"not a per corner/mode task: {category!r}")


def _truth_target(truth: CmTruth, params: Mapping[str, Any]) -> int:
    pid = params.get("path_id")
    return int(pid) if pid is not None else truth.worst_slack_path


def truth_base(category: str, truth: CmTruth, params: Mapping[str, Any]) -> Any:
    """Per corner/mode golden from GroundTruth records; None when not recorded."""
    if category == "M7":
        want = {(int(t["path_id"]), int(i)) for t in params["targets"] for i in t["stages"]}
        pairs = sorted([r["net_a"], r["net_b"]] for r in truth.rc_mismatch_pairs if (r["path_id"], r["stage_index"]) in want)
        nets = sorted({r["net"] for r in truth.unusual_lc if (r["path_id"], r["stage_index"]) in want})
        return {"rc_pairs": pairs, "unusual_lc_nets": nets}
    pid = _truth_target(truth, params)
    if category == "M1":
        return [list(x) for x in sorted({(r["clock"], r["net"]) for r in truth.missing_clk if r["path_id"] == pid})]
    if category == "M2":
        return sorted([r["net_a"], r["net_b"]] for r in truth.rc_mismatch_pairs if r["path_id"] == pid)
    if category == "M3":
        return sorted({r["net"] for r in truth.unusual_lc if r["path_id"] == pid})
    if category == "M4":
        return sorted([r["victim"], r["aggressor"]] for r in truth.dominant_aggressors if r["path_id"] == pid)
    if category == "M5":
        rec = truth.slowest_high_rc.get(pid)
        if rec is None:
            return None
        return {"net": rec["net"], "constraints": sorted(list(c) for c in rec["constraints"])}
    return None


# --- whole-task goldens ----------------------------------------------------------

COMBINED_KEYS = {"M2": "rc_pairs", "M3": "unusual_lc_nets"}
CROSS_MODE_BASE = {"M8": ("M1",), "M9": ("M3",), "M10": ("M2", "M3")}


def _tag(cm: CornerMode, items: list[Any]) -> list[list[Any]]:
    return [[str(cm), *(x if isinstance(x, list) else [x])] for x in items]


def _cross_mode(category: str, cms: list[CornerMode], per_cm: Any) -> Any:
    bases = CROSS_MODE_BASE[category]
    if len(bases) == 1:
        out: list[Any] = []
        for cm in cms:
            out += _tag(cm, per_cm(bases[0], cm))
        return sorted(out)
    merged: dict[str, list[Any]] = {}
    for base in bases:
        items: list[Any] = []
        for cm in cms:
            items += _tag(cm, per_cm(base, cm))
        merged[COMBINED_KEYS[base]] = sorted(items)
    return dict(sorted(merged.items()))


def scan_golden(category: str, corpus: Corpus, cms: list[CornerMode], params: Mapping[str, Any], threshold: float, deny: tuple[str, ...]) -> Any:
    if category in CROSS_MODE_BASE:
        return _cross_mode(category, cms, lambda base, cm: scan_base(base, corpus.db(cm), {}, threshold, deny))
    if category.startswith("M"):
        return scan_base(category, corpus.db(cms[0]), params, threshold, deny)
    return scan_single(category, corpus.db(cms[0]), params)


def truth_golden(category: str, truth: GroundTruth, corpus: Corpus, cms: list[CornerMode], params: Mapping[str, Any]) -> Any:
    if category in CROSS_MODE_BASE:
        for base in CROSS_MODE_BASE[category]:
            for cm in cms:
                if truth_base(base, truth[cm], {}) is None:
                    return None
        return _cross_mode(category, cms, lambda base, cm: truth_base(base, truth[cm], {}))
    if category.startswith("M"):
        return truth_base(category, truth[cms[0]], params)
    return truth_single(category, truth[cms[0]], corpus.db(cms[0]), params)
