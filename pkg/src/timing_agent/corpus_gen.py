"""Seeded MCMM corpus generator with manifest-recorded injected anomalies.

Clean data is built to stay well inside every detection threshold (RC
neighbour mismatch <= threshold/2, complete clock entries, benign logic
constraints only); injected anomalies exceed thresholds by at least 2x. Every
injection is recorded in :class:`GroundTruth`, which is enough to grade all
benchmark tasks without re-scanning the reports.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

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
from .report_parser import write_report

DEFAULT_DENY_SET = ("case_value", "disable_arc")
BENIGN_LC = (("dont_touch", "true"), ("size_only", "true"), ("max_fanout", "16"))
CELLS = ("BUFX2", "BUFX4", "INVX1", "INVX2", "NAND2X1", "NOR2X1", "AOI21X1", "OAI21X2", "MUX2X1", "XOR2X1")
CLOCK_MHZ = {"clk_core": 1000.0, "clk_io": 400.0, "clk_mem": 800.0}
PATH_GROUPS = (("reg2reg", "internal"), ("in2reg", "external"), ("reg2out", "external"))
INJECTION_KINDS = ("missing_clk_edge", "high_rc_mismatch_pair", "unusual_lc", "dominant_aggressor", "violating_path")


class SpecInfeasible(ValueError):
    pass


def _default_injections() -> dict[str, int]:
    return {
        "missing_clk_edge": 2,
        "high_rc_mismatch_pair": 2,
        "unusual_lc": 3,
        "dominant_aggressor": 2,
        "violating_path": 3,
    }


@dataclass(frozen=True)
class GenSpec:
    seed: int = 7
    corners: tuple[str, ...] = ("FF", "SS", "TT")
    modes: tuple[str, ...] = ("read", "write")
    paths_per_report: int = 200
    injections: Mapping[str, int] = field(default_factory=_default_injections)
    rc_threshold: float = 50.0
    deny_set: tuple[str, ...] = DEFAULT_DENY_SET
    clocks: tuple[str, ...] = ("clk_core", "clk_io", "clk_mem")
    min_stages: int = 4
    max_stages: int = 9
    kinds: tuple[str, ...] = tuple(k.value for k in ReportKind)

    def count(self, name: str) -> int:
        return int(self.injections.get(name, 0))

    def check(self) -> None:
        if not self.corners or not self.modes:
            raise SpecInfeasible("need at least one corner and one mode")
        if self.paths_per_report < 1:
            raise SpecInfeasible("paths_per_report must be >= 1")
        for name, n in self.injections.items():
            if name not in INJECTION_KINDS:
                raise SpecInfeasible(f"unknown injection kind {name!r}")
            if n < 0 or n > self.paths_per_report:
                raise SpecInfeasible(f"{name}={n} outside [0, paths_per_report]")
        if self.min_stages < 3 or self.max_stages < self.min_stages:
            raise SpecInfeasible("need 3 <= min_stages <= max_stages")
        if self.rc_threshold <= 0:
            raise SpecInfeasible("rc_threshold must be positive")
        if not set(self.deny_set).isdisjoint(k for k, _ in BENIGN_LC):
            raise SpecInfeasible("deny set overlaps benign constraint kinds")

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["injections"] = dict(self.injections)
        return d


@dataclass
class CmTruth:
    """Ground truth for one corner/mode (max report side)."""

    worst_slack_path: int
    violating_paths: list[int]
    path_counts: dict[str, int]
    worst_xtalk_net: dict[int, str]
    rc_mismatch_pairs: list[dict[str, Any]] = field(default_factory=list)
    dominant_aggressors: list[dict[str, Any]] = field(default_factory=list)
    unusual_lc: list[dict[str, Any]] = field(default_factory=list)
    missing_clk: list[dict[str, Any]] = field(default_factory=list)
    slowest_high_rc: dict[int, dict[str, Any]] = field(default_factory=dict)

    def holders(self) -> list[int]:
        """Paths carrying injected anomalies, worst-slack path first."""
        ids = [self.worst_slack_path]
        for group in (self.violating_paths, *[
            [r["path_id"] for r in recs]
            for recs in (self.rc_mismatch_pairs, self.dominant_aggressors, self.unusual_lc, self.missing_clk)
        ]):
            for pid in group:
                if pid not in ids:
                    ids.append(pid)
        return ids


@dataclass
class GroundTruth:
    seed: int
    rc_threshold: float
    deny_set: tuple[str, ...]
    corner_modes: dict[CornerMode, CmTruth]

    def __getitem__(self, cm: CornerMode | str) -> CmTruth:
        if isinstance(cm, str):
            cm = CornerMode.parse(cm)
        return self.corner_modes[cm]

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "seed": self.seed,
            "rc_threshold": self.rc_threshold,
            "deny_set": list(self.deny_set),
            "unit": "ps",
            "corner_modes": {},
        }
        for cm, t in self.corner_modes.items():
            d = asdict(t)
            d["worst_xtalk_net"] = {str(k): v for k, v in t.worst_xtalk_net.items()}
            d["slowest_high_rc"] = {str(k): v for k, v in t.slowest_high_rc.items()}
            out["corner_modes"][str(cm)] = d
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> GroundTruth:
        cms = {}
        for name, d in data["corner_modes"].items():
            d = dict(d)
            d["worst_xtalk_net"] = {int(k): v for k, v in d["worst_xtalk_net"].items()}
            d["slowest_high_rc"] = {int(k): v for k, v in d["slowest_high_rc"].items()}
            cms[CornerMode.parse(name)] = CmTruth(**d)
        return cls(int(data["seed"]), float(data["rc_threshold"]), tuple(data["deny_set"]), cms)


def _r3(x: float) -> float:
    return round(x, 3)


def _assign(
    count: int,
    holders: Sequence[int],
    base: int,
    place: Callable[[int], bool],
    what: str,
) -> None:
    """Round-robin ``count`` injections over the first ``base`` holders.

    ``place(holder)`` returns False when the holder has no room left; the pool
    then widens to later holders.
    """
    placed = 0
    pool = max(1, min(base, len(holders)))
    i = 0
    fails = 0
    while placed < count:
        if pool > len(holders):
            raise SpecInfeasible(f"cannot place {count} {what} injections")
        if place(holders[i % pool]):
            placed += 1
            fails = 0
        else:
            fails += 1
        i += 1
        if fails >= pool:
            pool += 1
            fails = 0
            i = pool - 1


def _wire_entry(net: str, rc: float, rng: random.Random) -> WireNet:
    c = _r3(rng.uniform(5.0, 40.0))
    rc = _r3(rc)
    return WireNet(net, _r3(rc * 1000.0 / c), c, rc)


def inject_rc_mismatch(
    wire: Sequence[WireNet],
    paths: Mapping[int, Sequence[str]],
    count: int,
    threshold: float,
    rng: random.Random,
    base: int | None = None,
) -> tuple[list[WireNet], list[dict[str, Any]]]:
    """Create ``count`` high-RC-mismatch neighbour pairs on the given paths.

    ``paths`` maps path id to its ordered data nets (the neighbour structure);
    iteration order is the holder priority. Each injection level-shifts the RC
    of every net after the chosen position, so only that one neighbour pair
    changes. Mismatch is recorded as worst_rc(a) - worst_rc(b).
    """
    if count == 0:
        return list(wire), []
    capacity = sum(max(0, len(nets) - 1) for nets in paths.values())
    if capacity < count:
        raise SpecInfeasible(f"only {capacity} neighbour pairs available for {count} RC injections")
    index = {w.net: i for i, w in enumerate(wire)}
    table = list(wire)
    used: dict[int, set[int]] = {pid: set() for pid in paths}
    chosen: list[tuple[int, int]] = []

    def place(pid: int) -> bool:
        nets = paths[pid]
        free = [i for i in range(len(nets) - 1) if i not in used[pid]]
        if not free:
            return False
        pos = rng.choice(free)
        used[pid].add(pos)
        chosen.append((pid, pos))
        offset = rng.uniform(2.5, 3.5) * threshold
        for net in nets[pos + 1:]:
            w = table[index[net]]
            table[index[net]] = WireNet(net, _r3((w.worst_rc + offset) * 1000.0 / w.worst_c), w.worst_c, _r3(w.worst_rc + offset))
        return True

    holders = list(paths)
    _assign(count, holders, base if base is not None else len(holders), place, "high_rc_mismatch_pair")
    records = []
    for pid, pos in chosen:
        a, b = paths[pid][pos], paths[pid][pos + 1]
        records.append({
            "path_id": pid,
            "stage_index": pos,
            "net_a": a,
            "net_b": b,
            "mismatch": _r3(table[index[a]].worst_rc - table[index[b]].worst_rc),
        })
    records.sort(key=lambda r: (holders.index(r["path_id"]), r["stage_index"]))
    return table, records


class _CmBuilder:
    def __init__(self, spec: GenSpec, cm: CornerMode):
        self.spec = spec
        self.cm = cm
        self.rng = random.Random(f"{spec.seed}/{cm}")
        self.net_counter = 0
        self.aggr_counter = 0
        self.leaf_counter = 0
        self.clk_entries: dict[str, ClkReportEntry] = {}

    def _net(self, block: int) -> str:
        self.net_counter += 1
        return f"u_top/u_blk{block}/net{self.net_counter}"

    def _clock_stages(self, clock: str) -> tuple[list[Stage], float]:
        rng = self.rng
        self.leaf_counter += 1
        root = f"u_top/u_clkgen/{clock}_root"
        leaf = f"u_top/u_clkgen/{clock}_leaf{self.leaf_counter}"
        d0 = _r3(rng.uniform(15.0, 25.0))
        d1 = _r3(rng.uniform(10.0, 20.0))
        c0 = d0
        c1 = _r3(c0 + d1)
        stages = [
            Stage(0, f"{root}/Z", root, "CLKBUFX8", "rise", d0, _r3(rng.uniform(5.0, 12.0)), 0.0, c0),
            Stage(1, f"{leaf}/Z", leaf, "CLKBUFX4", "rise", d1, _r3(rng.uniform(5.0, 12.0)), 0.0, c1),
        ]
        for net, arr in ((root, c0), (leaf, c1)):
            if net not in self.clk_entries:
                self.clk_entries[net] = ClkReportEntry(clock, net, arr, _r3(arr + rng.uniform(1.0, 5.0)))
        return stages, c1

    def build_path(self, pid: int, slack: float) -> TimingPath:
        rng = self.rng
        spec = self.spec
        n = rng.randint(spec.min_stages, spec.max_stages)
        block = rng.randrange(8)
        launch = rng.choice(spec.clocks)
        capture = launch if rng.random() < 0.8 else rng.choice(spec.clocks)
        clock_stages, clock_arrival = self._clock_stages(capture)
        launch_latency = _r3(rng.uniform(20.0, 40.0))
        victims = set(rng.sample(range(1, n), k=min(n - 1, rng.randint(2, 3))))
        stages = []
        cum = launch_latency
        for i in range(n):
            delay = _r3(rng.uniform(5.0, 80.0))
            cum = _r3(cum + delay)
            net = self._net(block)
            if i == 0:
                point = f"u_top/u_blk{block}/reg{self.net_counter}/Q"
                cell = "DFFQX1"
            elif i == n - 1:
                point = f"u_top/u_blk{block}/reg{self.net_counter}/D"
                cell = "DFFQX1"
            else:
                point = f"u_top/u_blk{block}/U{self.net_counter}/Z"
                cell = rng.choice(CELLS)
            xt = _r3(rng.uniform(1.0, 15.0)) if i in victims else 0.0
            stages.append(Stage(i, point, net, cell, rng.choice(("rise", "fall")), delay, _r3(rng.uniform(5.0, 60.0)), xt, cum))
        arrival = cum
        slack = _r3(slack)
        constraint = _r3(arrival + slack)
        group, ie = rng.choice(PATH_GROUPS)
        summary = PathSummary(pid, stages[0].point, stages[-1].point, slack, constraint, arrival, group, ie)
        data_info = ArcInfo("data", _r3(rng.uniform(-5.0, 5.0)), arrival, launch, capture, rng.choice(("rise", "fall")))
        clock_info = ArcInfo("clock", _r3(rng.uniform(-2.0, 2.0)), clock_arrival, capture, capture, "rise")
        return TimingPath(summary, data_info, clock_info, tuple(stages), tuple(clock_stages))

    def build_paths(self, count: int, violating: int) -> tuple[list[TimingPath], int, list[int]]:
        rng = self.rng
        ids = rng.sample(range(100_000, 1_000_000), count)
        viol_pos = sorted(rng.sample(range(count), violating))
        slacks = [rng.uniform(20.0, 300.0) for _ in range(count)]
        for pos in viol_pos:
            slacks[pos] = rng.uniform(-150.0, -5.0)
        if viol_pos:
            worst_pos = rng.choice(viol_pos)
            others = [slacks[p] for p in viol_pos if p != worst_pos]
            floor = min(others) if others else -5.0
            slacks[worst_pos] = min(slacks[worst_pos], floor - rng.uniform(10.0, 30.0))
        else:
            worst_pos = rng.randrange(count)
            slacks[worst_pos] = rng.uniform(2.0, 10.0)
        paths = [self.build_path(pid, s) for pid, s in zip(ids, slacks)]
        violating_ids = sorted((ids[p] for p in viol_pos), key=lambda pid: (paths[ids.index(pid)].summary.slack, pid))
        return paths, ids[worst_pos], violating_ids

    def xtalk_for(self, paths: Sequence[TimingPath]) -> list[XtalkEntry]:
        rng = self.rng
        out = []
        for p in paths:
            block = p.data_stages[0].net.split("/")[1]
            for st in p.data_stages:
                if st.xtalk_delta <= 0:
                    continue
                k = rng.randint(1, 3)
                weights = [rng.uniform(0.2, 1.0) for _ in range(k)]
                total = sum(weights)
                aggrs = []
                for w in weights:
                    self.aggr_counter += 1
                    aggrs.append(Aggressor(f"u_top/{block}/agg{self.aggr_counter}", _r3(st.xtalk_delta * w / total)))
                out.append(XtalkEntry(p.summary.path_id, st.net, tuple(aggrs)))
        return out


def _path_nets(p: TimingPath) -> list[str]:
    return [s.net for s in p.data_stages]


def slowest_high_rc_net(path: TimingPath, rc: Mapping[str, float], top: int = 3) -> str:
    """Net with the highest worst_rc among the ``top`` slowest data stages."""
    order = sorted(range(len(path.data_stages)), key=lambda i: -path.data_stages[i].delay)[:top]
    order.sort()
    best = None
    for i in order:
        net = path.data_stages[i].net
        if best is None or rc[net] > rc[best]:
            best = net
    assert best is not None
    return best


def _generate_cm(spec: GenSpec, cm: CornerMode) -> tuple[ReportDb, CmTruth]:
    b = _CmBuilder(spec, cm)
    rng = b.rng
    n = spec.paths_per_report
    threshold = spec.rc_threshold
    max_paths, worst, violating = b.build_paths(n, spec.count("violating_path"))
    min_paths, _, _ = b.build_paths(n, 0)
    by_id = {p.summary.path_id: p for p in max_paths}
    report_order = [p.summary.path_id for p in max_paths]
    holders = [worst] + [v for v in violating if v != worst] + [pid for pid in report_order if pid != worst and pid not in violating]
    base = max(1, len(violating))

    # missing clock edges: one path-private leaf net per holder
    missing: list[dict[str, Any]] = []
    missing_done: set[int] = set()

    def place_missing(pid: int) -> bool:
        if pid in missing_done:
            return False
        missing_done.add(pid)
        leaf = by_id[pid].clock_stages[-1].net
        e = b.clk_entries[leaf]
        which = rng.choice((("rise",), ("fall",), ("rise", "fall")))
        b.clk_entries[leaf] = ClkReportEntry(
            e.clock, e.net,
            None if "rise" in which else e.rise_arrival,
            None if "fall" in which else e.fall_arrival,
        )
        p = by_id[pid]
        by_id[pid] = TimingPath(p.summary, p.data_info, _with_edge(p.clock_info, "missing"), p.data_stages, p.clock_stages)
        missing.append({"path_id": pid, "clock": e.clock, "net": leaf, "missing": list(which)})
        return True

    _assign(spec.count("missing_clk_edge"), holders, base, place_missing, "missing_clk_edge")
    max_paths = [by_id[pid] for pid in report_order]

    # crosstalk, with dominant aggressors on holder victims
    xt_max = b.xtalk_for(max_paths)
    xt_min = b.xtalk_for(min_paths)
    entries_by_path: dict[int, list[int]] = {}
    for i, e in enumerate(xt_max):
        entries_by_path.setdefault(e.path_id, []).append(i)
    dominant: list[dict[str, Any]] = []
    dominated: set[int] = set()

    def place_dominant(pid: int) -> bool:
        free = [i for i in entries_by_path.get(pid, []) if i not in dominated]
        if not free:
            return False
        i = rng.choice(free)
        dominated.add(i)
        e = xt_max[i]
        victim_stage = next(s for s in by_id[pid].data_stages if s.net == e.victim)
        total = victim_stage.xtalk_delta
        k = len(e.aggressors)
        j = rng.randrange(k)
        aggrs = []
        for idx, a in enumerate(e.aggressors):
            share = 0.8 if idx == j else 0.2 / max(1, k - 1)
            aggrs.append(Aggressor(a.net, _r3(total * share)))
        xt_max[i] = XtalkEntry(e.path_id, e.victim, tuple(aggrs))
        dominant.append({"path_id": pid, "victim": e.victim, "aggressor": e.aggressors[j].net, "stage_index": victim_stage.index})
        return True

    _assign(spec.count("dominant_aggressor"), holders, base, place_dominant, "dominant_aggressor")

    # wire: clean data nets, then level-shift injections, then aggressors
    wire: list[WireNet] = []
    for p in (*max_paths, *min_paths):
        base_rc = rng.uniform(20.0, 60.0)
        for net in _path_nets(p):
            wire.append(_wire_entry(net, base_rc + rng.uniform(-10.0, 10.0), rng))
    wire, rc_pairs = inject_rc_mismatch(
        wire, {pid: _path_nets(by_id[pid]) for pid in holders}, spec.count("high_rc_mismatch_pair"), threshold, rng, base
    )
    rc = {w.net: w.worst_rc for w in wire}
    dominant_pairs = {(d["victim"], d["aggressor"]) for d in dominant}
    for e in (*xt_max, *xt_min):
        for a in e.aggressors:
            if (e.victim, a.net) in dominant_pairs:
                value = rc[e.victim] + rng.uniform(2.5, 3.5) * threshold
            else:
                value = max(1.0, rc[e.victim] + rng.uniform(-10.0, 10.0))
            w = _wire_entry(a.net, value, rng)
            wire.append(w)
            rc[a.net] = w.worst_rc
    for d in dominant:
        d["mismatch"] = _r3(rc[d["victim"]] - rc[d["aggressor"]])

    # logic constraints: benign background plus deny-set injections
    lc: list[LcEntry] = []
    for w in wire:
        if rng.random() < 0.12:
            kind, value = rng.choice(BENIGN_LC)
            lc.append(LcEntry(w.net, kind, value))
    unusual: list[dict[str, Any]] = []
    unusual_nets: set[str] = set()

    def place_unusual(pid: int) -> bool:
        cands = []
        for i in entries_by_path.get(pid, []):
            e = xt_max[i]
            for net in (e.victim, e.worst_aggressor):
                if net not in unusual_nets:
                    cands.append((e, net))
        if not cands:
            return False
        e, net = rng.choice(cands)
        unusual_nets.add(net)
        kind = rng.choice(spec.deny_set)
        value = rng.choice(("0", "1")) if kind == "case_value" else "A->Z"
        lc.append(LcEntry(net, kind, value))
        stage = next(s for s in by_id[pid].data_stages if s.net == e.victim)
        unusual.append({
            "path_id": pid, "net": net, "constraint_kind": kind, "value": value,
            "victim": e.victim, "stage_index": stage.index,
        })
        return True

    _assign(spec.count("unusual_lc"), holders, base, place_unusual, "unusual_lc")

    slowest: dict[int, dict[str, Any]] = {}
    lc_nets = {e.net for e in lc}
    for pid in dict.fromkeys(holders[:base] + [r["path_id"] for r in (*rc_pairs, *dominant, *unusual, *missing)]):
        net = slowest_high_rc_net(by_id[pid], rc)
        if net not in lc_nets:
            lc.append(LcEntry(net, "size_only", "true"))
            lc_nets.add(net)
        slowest[pid] = {"net": net}
    rng.shuffle(lc)
    for pid, rec in slowest.items():
        rec["constraints"] = [[e.constraint_kind, e.value] for e in lc if e.net == rec["net"]]

    worst_xtalk = {}
    for p in max_paths:
        best = None
        for s in p.data_stages:
            if best is None or s.xtalk_delta > best.xtalk_delta:
                best = s
        worst_xtalk[p.summary.path_id] = best.net

    clocks_used = sorted({e.clock for e in b.clk_entries.values()})
    tables: dict[ReportKind, Any] = {
        ReportKind.MAX: max_paths,
        ReportKind.MIN: min_paths,
        ReportKind.XTALK_MAX: xt_max,
        ReportKind.XTALK_MIN: xt_min,
        ReportKind.CLK: list(b.clk_entries.values()),
        ReportKind.FREQ: {c: CLOCK_MHZ.get(c, 500.0) for c in clocks_used},
        ReportKind.LC: lc,
        ReportKind.WIRE: wire,
    }
    wanted = {ReportKind(k) for k in spec.kinds}
    tables = {k: v for k, v in tables.items() if k in wanted}
    truth = CmTruth(
        worst_slack_path=worst,
        violating_paths=violating,
        path_counts={"max": len(max_paths), "min": len(min_paths)},
        worst_xtalk_net=worst_xtalk,
        rc_mismatch_pairs=rc_pairs,
        dominant_aggressors=dominant,
        unusual_lc=unusual,
        missing_clk=missing,
        slowest_high_rc=slowest,
    )
    return ReportDb(cm, tables), truth


def _with_edge(info: ArcInfo, edge: str) -> ArcInfo:
    return ArcInfo(info.role, info.pbsa_adjustment, info.arrival_time, info.launch_clock, info.capture_clock, edge)


def generate(spec: GenSpec) -> tuple[Corpus, GroundTruth]:
    spec.check()
    dbs: dict[CornerMode, ReportDb] = {}
    truths: dict[CornerMode, CmTruth] = {}
    for corner in spec.corners:
        for mode in spec.modes:
            cm = CornerMode(corner, mode)
            if cm in dbs:
                raise SpecInfeasible(f"duplicate corner/mode {cm}")
            dbs[cm], truths[cm] = _generate_cm(spec, cm)
    manifest = {
        "generator": "timing_agent.corpus_gen",
        "seed": spec.seed,
        "spec": spec.to_json(),
        "unit": "ps",
        "corner_modes": [str(cm) for cm in sorted(dbs)],
        "path_counts": {str(cm): {"max": truths[cm].path_counts["max"], "min": truths[cm].path_counts["min"]} for cm in sorted(dbs)},
        "injected_worst_slack_paths": {str(cm): truths[cm].worst_slack_path for cm in sorted(dbs)},
    }
    truth = GroundTruth(spec.seed, spec.rc_threshold, tuple(spec.deny_set), dict(sorted(truths.items())))
    return Corpus(dbs, manifest), truth


def write_corpus(corpus: Corpus, truth: GroundTruth | None, out: Path | str) -> Path:
    """Write ``<out>/<CM>/<kind>.rpt`` plus manifest.json and ground_truth.json."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for cm, db in corpus.databases.items():
        d = out / str(cm)
        d.mkdir(exist_ok=True)
        for kind in db.kinds:
            write_report(d / f"{kind.value}.rpt", db.tables[kind], kind, cm)
    (out / "manifest.json").write_text(json.dumps(corpus.manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    if truth is not None:
        (out / "ground_truth.json").write_text(json.dumps(truth.to_json(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return out


def load_ground_truth(path: Path | str) -> GroundTruth:
    return GroundTruth.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
