from __future__ import annotations

import ast
import csv
import io
import json
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

import timing_agent.agents.expert as expert_mod
import timing_agent.query.engine as engine_mod
import timing_agent.query.oracle as oracle_mod
from timing_agent.agents import SINGLE_CATEGORIES, TaskRun
from timing_agent.bench import (
    InsufficientData,
    build_multi_suite,
    build_single_suite,
    grade,
    make_solver,
    run_bench,
    sensitivity_sweep,
    soundness,
)
from timing_agent.corpus_gen import GenSpec, generate
from timing_agent.tdrg import Profile

BENCH = Path(__file__).resolve().parents[1] / "src" / "timing_agent" / "bench"


@pytest.fixture(scope="module")
def single(corpus, truth):
    return build_single_suite(corpus, truth)


@pytest.fixture(scope="module")
def multi(corpus, truth):
    return build_multi_suite(corpus, truth)


def test_suite_sizes(single, multi):
    assert len(single) == 90 and len({c.id for c in single}) == 90
    assert [c.category for c in single[::10]] == list(SINGLE_CATEGORIES)
    assert [c.id for c in multi] == [f"multi/M{i}" for i in range(1, 11)]


def test_suites_are_seeded(corpus, truth, single):
    again = build_single_suite(corpus, truth)
    assert [c.to_json() for c in again] == [c.to_json() for c in single]
    other = build_single_suite(corpus, truth, seed=8)
    assert [c.to_json() for c in other] != [c.to_json() for c in single]


def test_boolean_goldens_are_balanced(single):
    for cat in ("path_violation", "path_through_net", "data_arc_clock_rise"):
        values = [c.golden for c in single if c.category == cat]
        assert 3 <= sum(values) <= 7, cat


def test_golden_modules_do_not_import_the_engine():
    for name in ("goldens.py", "suites.py"):
        tree = ast.parse((BENCH / name).read_text())
        mods = [n.module or "" for n in ast.walk(tree) if isinstance(n, ast.ImportFrom)]
        assert not any("query" in m for m in mods), name
        assert all(m in ("__future__", "typing", "dataclasses", "random", "corpus_gen", "model", "goldens", "agents.tasks") for m in mods), mods


def test_goldens_never_run_queries(monkeypatch, corpus, truth, single, multi):
    def boom(*a, **k):
        raise AssertionError("goldens must not run queries")

    for mod, name in ((engine_mod, "execute"), (oracle_mod, "oracle_execute"), (expert_mod, "execute")):
        monkeypatch.setattr(mod, name, boom)
    assert [c.to_json() for c in build_single_suite(corpus, truth)] == [c.to_json() for c in single]
    assert [c.to_json() for c in build_multi_suite(corpus, truth)] == [c.to_json() for c in multi]


def test_goldens_agree_with_ground_truth(corpus, truth, single, multi):
    rows = soundness(single + multi, corpus, truth)
    recorded = [r for r in rows if r["recorded"]]
    assert len(recorded) >= 30
    assert all(r["agree"] for r in rows), [r for r in rows if not r["agree"]]
    assert {r["category"] for r in recorded} >= {"M1", "M2", "M3", "M4", "M5", "M7", "M8", "M9", "M10"}


# --- grading ----------------------------------------------------------------------

json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-5, 5) | st.floats(-100, 100) | st.text(max_size=3),
    lambda inner: st.lists(inner, max_size=3) | st.dictionaries(st.text(max_size=2), inner, max_size=3),
    max_leaves=8,
)


@given(json_values)
def test_grade_reflexive(x):
    for rule in ("exact", "set"):
        if rule == "set" and not isinstance(x, list):
            continue
        assert grade(rule, x, x)[0]


@given(st.lists(st.text(max_size=3), max_size=5), st.lists(st.text(max_size=3), max_size=5))
def test_set_grade_symmetric(a, b):
    assert grade("set", a, b)[0] == grade("set", b, a)[0] == (set(a) == set(b))


@given(st.floats(-1e4, 1e4), st.floats(-0.02, 0.02))
def test_numeric_tolerance(x, d):
    ok, _ = grade("numeric", x + d, x)
    if abs(d) <= 0.0099:
        assert ok
    if abs(d) >= 0.0101:
        assert not ok


def test_grade_details():
    assert not grade("exact", 1, True)[0]
    assert not grade("numeric", "1.0", 1.0)[0]
    ok, diff = grade("set", {"a": [1, 2]}, {"a": [2, 3]})
    assert not ok and diff["a"] == {"missing": [3], "extra": [1]}
    with pytest.raises(ValueError):
        grade("fuzzy", 1, 1)


# --- runs and reports ----------------------------------------------------------------


def test_scripted_backend_passes_single(corpus, single):
    rep = run_bench(single, make_solver(corpus), name="single")
    assert rep.pass_rate == 100.0
    assert all(t["pass_rate"] == 100.0 for t in rep.categories.values())


def test_scripted_backend_passes_multi(corpus, multi):
    rep = run_bench(multi, make_solver(corpus), name="multi")
    assert rep.overall["passed"] == 10
    assert "multi_kind" in rep.to_json()


def test_set1_multi_kind_tasks_fail(corpus, multi):
    rep = run_bench(multi, make_solver(corpus, profile=Profile.SET1), name="multi")
    data = rep.to_json()
    assert data["multi_kind"]["pass_rate"] == 0.0
    passed = [c["id"] for c in data["cases"] if c["passed"]]
    assert passed == ["multi/M6"]
    assert all("NoValidPlan" in c["runs"][0]["reason"] for c in data["cases"] if not c["passed"])


def test_empty_solver_scores_zero(corpus, multi):
    def nothing(task):
        return TaskRun(task, {"mode": "none"}, "proposed", status="failed", reason="no answer")

    rep = run_bench(multi, nothing, runs=3)
    assert rep.pass_rate == 0.0 and rep.meta["runs"] == 3
    assert all(len(c.runs) == 3 for c in rep.cases)


def test_mean_over_runs(corpus, multi):
    answers = iter([True, False, False] * 10)
    good = make_solver(corpus)

    def flaky(task):
        run = good(task)
        if not next(answers):
            run.answer = "wrong"
        return run

    rep = run_bench(multi[:1], flaky, runs=3)
    assert rep.cases[0].score == pytest.approx(1 / 3)
    assert rep.overall["pass_rate"] == pytest.approx(33.33)


def test_report_json_and_csv(corpus, multi):
    rep = run_bench(multi, make_solver(corpus), name="multi")
    assert json.loads(rep.dumps())["overall"]["total"] == 10
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["category", "tasks", "passed", "pass_rate"]
    assert rows[-1][0] == "average" and float(rows[-1][3]) == 100.0
    assert len(rows) == 12


def test_sensitivity_is_monotone(corpus, multi):
    out = sensitivity_sweep(multi, corpus, profiles=(Profile.SET1, Profile.SET4, Profile.PROPOSED))
    m = out["matrix"]
    assert m["set1"]["without_examples"] == 0.0
    assert m["set1"]["without_examples"] <= m["set4"]["without_examples"] <= m["proposed"]["without_examples"] == 100.0


def test_insufficient_data():
    corpus, truth = generate(GenSpec(seed=1, corners=("TT",), modes=("read",), paths_per_report=10, kinds=("max", "clk")))
    with pytest.raises(InsufficientData):
        build_single_suite(corpus, truth)
    with pytest.raises(InsufficientData):
        build_multi_suite(corpus, truth)
