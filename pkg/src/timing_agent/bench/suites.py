"""Benchmark suites: seeded single-report cases and the M1-M10 multi-report set."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from ..agents.tasks import MULTI_CATEGORIES, SINGLE_CATEGORIES, Scope, Task
from ..corpus_gen import GroundTruth
from ..model import Corpus, CornerMode, ReportKind
from .goldens import InsufficientData, scan_golden

K = ReportKind

CASES_PER_CATEGORY = 10
RULES = ("exact", "set", "numeric")


@dataclass(frozen=True)
class BenchCase:
    id: str
    category: str
    task: Task
    golden: Any
    rule: str  # exact | set | numeric

    def __post_init__(self) -> None:
        if self.rule not in RULES:
            raise ValueError(f"unknown grading rule {self.rule!r}")

    def to_json(self) -> dict[str, Any]:
        return {"id": self.id, "category": self.category, "task": self.task.to_json(), "golden": self.golden, "rule": self.rule}


def _need(corpus: Corpus, kinds: set[ReportKind]) -> None:
    for cm in corpus.corner_modes:
        missing = [k.value for k in kinds if k not in corpus.db(cm).tables]
        if missing:
            raise InsufficientData(f"{cm} lacks {', '.join(sorted(missing))} reports")


def _single_params(category: str, i: int, rng: random.Random, paths: list[Any]) -> tuple[dict[str, Any], str]:
    p = rng.choice(paths)
    pid = p.summary.path_id
    if category == "path_violation":
        violating = [x for x in paths if x.summary.slack < 0]
        clean = [x for x in paths if x.summary.slack >= 0]
        pool = violating if (i % 2 == 0 and violating) or not clean else clean
        pid = rng.choice(pool).summary.path_id
        return {"path_id": pid}, f"Check path {pid} for violation"
    if category == "worst_attribute":
        name = ("slack", "arrival", "constraint")[i % 3]
        return {"attribute": name}, f"Find worst case {name} across paths"
    if category == "worst_column":
        name = ("delay", "slew", "xtalk_delta")[i % 3]
        return {"column": name}, f"Find worst case {name} across paths"
    if category == "internal_external":
        return {"path_id": pid}, f"Is path {pid} internal or external"
    if category == "slowest_stage":
        return {"path_id": pid}, f"Find the slowest stage of path {pid}"
    if category == "max_xtalk_net":
        return {"path_id": pid}, f"Net with the largest crosstalk delta in path {pid}"
    if category == "net_slew":
        nets = [s.net for s in p.data_stages]
        unique = [n for n in nets if nets.count(n) == 1]
        if not unique:
            raise InsufficientData(f"path {pid} has no uniquely named data net")
        net = rng.choice(unique)
        return {"path_id": pid, "net": net}, f"Slew on the net {net} in path {pid}"
    if category == "path_through_net":
        own = {s.net for s in p.data_stages}
        if i % 2 == 0:
            net = rng.choice(sorted(own))
        else:
            others = sorted({s.net for x in paths for s in x.data_stages} - own)
            if not others:
                raise InsufficientData("every data net lies on every path")
            net = rng.choice(others)
        return {"path_id": pid, "net": net}, f"Does path {pid} go through net {net}?"
    if category == "data_arc_clock_rise":
        rising = [x for x in paths if x.data_info.clock_edge == "rise"]
        if i % 2 == 0 and rising:
            p = rng.choice(rising)
            pid = p.summary.path_id
        clocks = sorted({x.data_info.launch_clock for x in paths})
        if i % 4 < 2:
            clock = p.data_info.launch_clock
        else:
            clock = rng.choice(clocks)
        return {"path_id": pid, "clock": clock}, f"Does the data arc of path {pid} launch on {clock} rising?"
    raise ValueError(f"unknown single-report category {category!r}")


SINGLE_RULES = {
    "path_violation": "exact",
    "worst_attribute": "numeric",
    "worst_column": "numeric",
    "internal_external": "exact",
    "slowest_stage": "exact",
    "max_xtalk_net": "exact",
    "net_slew": "numeric",
    "path_through_net": "exact",
    "data_arc_clock_rise": "exact",
}


def build_single_suite(corpus: Corpus, truth: GroundTruth | None = None, *, seed: int = 7) -> list[BenchCase]:
    """Ten seeded cases per single-report category, spread over corner/modes."""
    _need(corpus, {K.MAX, K.XTALK_MAX})
    cms = corpus.corner_modes
    cases = []
    for category in SINGLE_CATEGORIES:
        rng = random.Random(f"{seed}:{category}")
        for i in range(CASES_PER_CATEGORY):
            cm = cms[i % len(cms)]
            paths = list(corpus.db(cm).tables[K.MAX])
            if len(paths) < 2:
                raise InsufficientData(f"{cm} has fewer than 2 max paths")
            params, text = _single_params(category, i, rng, paths)
            task = Task(f"{category}-{i:02d}", text, Scope("single", corner_mode=str(cm)), category, params)
            golden = scan_golden(category, corpus, [cm], params, 0.0, ())
            cases.append(BenchCase(f"single/{category}/{i:02d}", category, task, golden, SINGLE_RULES[category]))
    return cases


MULTI_TEXT = {
    "M1": "List clock nets of the worst path whose clk entries lack rise or fall arrival",
    "M2": "Find neighbouring data nets of the worst path whose worst RC differs by more than the threshold",
    "M3": "Find deny-listed logic constraints on crosstalk victims and worst aggressors of the worst path",
    "M4": "Find victim and worst-aggressor pairs of the worst path with a large worst RC difference",
    "M5": "Report logic constraints on the highest-RC net among the three slowest stages of the worst path",
    "M6": "Compare data and clock tables of the worst path: stage count, last point and arrival mismatch",
    "M7": "Run the RC neighbour check and the crosstalk constraint check on selected stages of selected paths",
    "M8": "Run the missing clock edge check on the worst path of every mode",
    "M9": "Run the crosstalk constraint check on the worst path of every mode",
    "M10": "Run the RC neighbour check and the crosstalk constraint check on the worst path of every mode",
}

MULTI_RULES = {cat: "set" for cat in MULTI_CATEGORIES} | {"M5": "exact", "M6": "exact"}


def default_corner_mode(corpus: Corpus) -> CornerMode:
    want = CornerMode("TT", "read")
    return want if want in corpus.corner_modes else corpus.corner_modes[0]


def m7_targets(truth: GroundTruth, cm: CornerMode, limit: int = 3) -> list[dict[str, Any]]:
    """Paths and stage indices carrying injected anomalies, plus stage 0."""
    t = truth[cm]
    stages: dict[int, set[int]] = {}
    for rec in (*t.rc_mismatch_pairs, *t.unusual_lc):
        stages.setdefault(rec["path_id"], {0}).add(rec["stage_index"])
    if not stages:
        raise InsufficientData(f"{cm} has no injected anomalies to target")
    return [{"path_id": pid, "stages": sorted(s)} for pid, s in list(stages.items())[:limit]]


def build_multi_suite(corpus: Corpus, truth: GroundTruth, *, corner_mode: CornerMode | None = None) -> list[BenchCase]:
    _need(corpus, {K.MAX, K.XTALK_MAX, K.CLK, K.WIRE, K.LC})
    cm = corner_mode or default_corner_mode(corpus)
    modes = [x for x in corpus.corner_modes if x.corner == cm.corner]
    cases = []
    for category in MULTI_CATEGORIES:
        params: dict[str, Any] = {"rc_threshold": truth.rc_threshold, "deny_set": list(truth.deny_set)}
        if category == "M7":
            params["targets"] = m7_targets(truth, cm)
        if category in ("M8", "M9", "M10"):
            scope = Scope("all_modes", corner=cm.corner)
            cms = modes
        else:
            scope = Scope("single", corner_mode=str(cm))
            cms = [cm]
        task = Task(category, MULTI_TEXT[category], scope, category, params)
        golden = scan_golden(category, corpus, cms, params, truth.rc_threshold, tuple(truth.deny_set))
        cases.append(BenchCase(f"multi/{category}", category, task, golden, MULTI_RULES[category]))
    return cases
