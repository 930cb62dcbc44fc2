"""Grading, bench reports, the TDRG sensitivity sweep and golden soundness."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from ..agents import AgentBackend, Task, TaskRun, solve
from ..agents.backend import ChatFn
from ..corpus_gen import GroundTruth
from ..model import Corpus, CornerMode
from ..tdrg import Profile, default_graph
from .goldens import truth_golden
from .suites import BenchCase

TOLERANCE_PS = 0.01

Solver = Callable[[Task], TaskRun]


# --- grading -----------------------------------------------------------------------


def _num(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _close(got: Any, want: Any) -> bool:
    """Deep equality with numeric leaves compared at the ps tolerance."""
    if _num(got) and _num(want):
        return math.isfinite(got) and abs(got - want) <= TOLERANCE_PS + 1e-9
    if isinstance(want, dict):
        return isinstance(got, dict) and got.keys() == want.keys() and all(_close(got[k], want[k]) for k in want)
    if isinstance(want, (list, tuple)):
        return isinstance(got, (list, tuple)) and len(got) == len(want) and all(_close(a, b) for a, b in zip(got, want))
    return type(got) is type(want) and got == want


def _key(item: Any) -> str:
    return json.dumps(item, sort_keys=True)


def _set_diff(got: Any, want: Any) -> dict[str, Any] | None:
    if isinstance(want, dict):
        if not isinstance(got, dict) or got.keys() != want.keys():
            return {"expected": want, "got": got}
        out = {}
        for k in sorted(want):
            d = _set_diff(got[k], want[k])
            if d:
                out[k] = d
        return out or None
    if not isinstance(got, list):
        return {"expected": want, "got": got}
    g, w = {_key(x) for x in got}, {_key(x) for x in want}
    if g == w:
        return None
    return {
        "missing": [json.loads(x) for x in sorted(w - g)],
        "extra": [json.loads(x) for x in sorted(g - w)],
    }


def grade(rule: str, got: Any, want: Any) -> tuple[bool, Any]:
    """Return (passed, diff); diff is None on a pass."""
    if rule == "set":
        d = _set_diff(got, want)
        return d is None, d
    if rule == "numeric":
        ok = _num(got) and _num(want) and _close(got, want)
        return ok, None if ok else {"expected": want, "got": got, "tolerance": TOLERANCE_PS}
    if rule == "exact":
        ok = _close(got, want)
        return ok, None if ok else {"expected": want, "got": got}
    raise ValueError(f"unknown grading rule {rule!r}")


# --- reports -----------------------------------------------------------------------


@dataclass
class CaseVerdict:
    id: str
    category: str
    rule: str
    golden: Any
    runs: list[dict[str, Any]] = field(default_factory=list)
    multi_kind: bool = False

    @property
    def score(self) -> float:
        """Fraction of runs that passed (1 run for deterministic backends)."""
        if not self.runs:
            return 0.0
        return sum(1 for r in self.runs if r["passed"]) / len(self.runs)

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "category": self.category,
            "rule": self.rule,
            "golden": self.golden,
            "passed": self.score == 1.0,
            "score": round(self.score, 4),
            "multi_kind": self.multi_kind,
            "runs": self.runs,
        }


def _rate(passed: float, total: int) -> float:
    return round(100.0 * passed / total, 2) if total else 0.0


@dataclass
class BenchReport:
    suite: str
    meta: dict[str, Any]
    cases: list[CaseVerdict]

    def _tally(self, cases: Iterable[CaseVerdict]) -> dict[str, Any]:
        cases = list(cases)
        passed = round(sum(c.score for c in cases), 4)
        return {"passed": passed, "total": len(cases), "pass_rate": _rate(passed, len(cases))}

    @property
    def categories(self) -> dict[str, dict[str, Any]]:
        order: dict[str, list[CaseVerdict]] = {}
        for c in self.cases:
            order.setdefault(c.category, []).append(c)
        return {cat: self._tally(cs) for cat, cs in order.items()}

    @property
    def overall(self) -> dict[str, Any]:
        return self._tally(self.cases)

    @property
    def pass_rate(self) -> float:
        return self.overall["pass_rate"]

    def to_json(self) -> dict[str, Any]:
        out = {
            "suite": self.suite,
            "meta": self.meta,
            "categories": self.categories,
            "overall": self.overall,
            "cases": [c.to_json() for c in sorted(self.cases, key=lambda c: c.id)],
        }
        multi = [c for c in self.cases if c.multi_kind]
        if multi and len(multi) != len(self.cases):
            out["multi_kind"] = self._tally(multi)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["category", "tasks", "passed", "pass_rate"])
        for cat, t in self.categories.items():
            w.writerow([cat, t["total"], t["passed"], t["pass_rate"]])
        o = self.overall
        w.writerow(["average", o["total"], o["passed"], o["pass_rate"]])
        return buf.getvalue()


def make_solver(
    corpus: Corpus,
    backend: AgentBackend | None = None,
    *,
    profile: Profile | str = Profile.PROPOSED,
    with_examples: bool = False,
    chat: ChatFn | None = None,
) -> Solver:
    profile = Profile.parse(profile) if isinstance(profile, str) else profile
    graph = default_graph(profile)

    def run(task: Task) -> TaskRun:
        return solve(task, corpus, backend, profile=profile, graph=graph, chat=chat, with_examples=with_examples)

    return run


def run_bench(suite: list[BenchCase], solver: Solver, *, name: str = "", runs: int = 1, meta: dict[str, Any] | None = None) -> BenchReport:
    """Grade ``solver`` on every case, ``runs`` times each.

    Failed task runs are graded as wrong with the failure reason kept.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    verdicts = []
    for case in suite:
        v = CaseVerdict(case.id, case.category, case.rule, case.golden, multi_kind=len(case.task.required()) > 1)
        for _ in range(runs):
            run = solver(case.task)
            if run.status == "answered":
                ok, diff = grade(case.rule, run.answer, case.golden)
            else:
                ok, diff = False, {"expected": case.golden, "got": None}
            v.runs.append({"answer": run.answer, "passed": ok, "status": run.status, "reason": run.reason, "diff": diff})
        verdicts.append(v)
    return BenchReport(name, dict(meta or {}, runs=runs), verdicts)


def default_runs(backend: AgentBackend | None) -> int:
    """Deterministic backends run once, stochastic ones three times (mean reported)."""
    return 1 if backend is None or backend.scripted else 3


SWEEP_TASKS = ("M1", "M2", "M3", "M4", "M5")


def sensitivity_sweep(
    suite: list[BenchCase],
    corpus: Corpus,
    backend: AgentBackend | None = None,
    *,
    profiles: Iterable[Profile] = tuple(Profile),
    chat: ChatFn | None = None,
    runs: int = 1,
) -> dict[str, Any]:
    """Pass-rate matrix over TDRG profiles, with and without plan examples."""
    cases = [c for c in suite if c.category in SWEEP_TASKS]
    matrix: dict[str, dict[str, float]] = {}
    for profile in profiles:
        row = {}
        for examples in (False, True):
            solver = make_solver(corpus, backend, profile=profile, with_examples=examples, chat=chat)
            rep = run_bench(cases, solver, runs=runs)
            row["with_examples" if examples else "without_examples"] = rep.pass_rate
        matrix[profile.value] = row
    return {"tasks": list(SWEEP_TASKS), "matrix": matrix, "runs": runs}


def soundness(suite: list[BenchCase], corpus: Corpus, truth: GroundTruth) -> list[dict[str, Any]]:
    """Compare each case's scan golden with the GroundTruth route.

    Returns one row per case: category, whether GroundTruth records the
    answer, and whether grading against either golden gives the same result.
    """
    rows = []
    for case in suite:
        t = case.task
        if t.scope.kind == "single":
            cms = [CornerMode.parse(t.scope.corner_mode or "")]
        else:
            cms = [cm for cm in corpus.corner_modes if t.scope.kind == "all" or cm.corner == t.scope.corner]
        tg = truth_golden(case.category, truth, corpus, cms, t.params)
        if tg is None:
            rows.append({"id": case.id, "category": case.category, "recorded": False, "agree": True})
            continue
        ok, diff = grade(case.rule, tg, case.golden)
        rows.append({"id": case.id, "category": case.category, "recorded": True, "agree": ok, "diff": diff})
    return rows
