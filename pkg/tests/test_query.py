from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from timing_agent.model import ClkReportEntry, CornerMode, KindAbsent, ReportDb, ReportKind, WireNet
from timing_agent.query import (
    BudgetExceeded,
    EmptyInput,
    QuerySyntaxError,
    QueryTypeError,
    SandboxBudget,
    execute,
    oracle_execute,
    parse_query,
)
from timing_agent.query.fuzz import random_programs

CM = CornerMode("TT", "read")


def run(text, db):
    return execute(parse_query(text), db)


def both(text, db):
    """Outcome of both interpreters: (value, rows) or the error class name."""
    prog = parse_query(text)
    out = []
    for fn in (execute, oracle_execute):
        try:
            r = fn(prog, db)
            out.append((r.value, r.provenance.rows))
        except Exception as exc:  # noqa: BLE001
            out.append(type(exc).__name__)
    return out


@pytest.fixture
def clk_db():
    rows = [
        ClkReportEntry("CLK", "c0", 10.0, 12.0),
        ClkReportEntry("CLK", "c1", None, 11.0),
        ClkReportEntry("CLK", "c2", 30.0, None),
        ClkReportEntry("SCLK", "c3", 30.0, 5.0),
    ]
    return ReportDb(CM, {ReportKind.CLK: rows})


@pytest.fixture
def wire_db():
    rows = [WireNet("a", 1, 1, 5.0), WireNet("b", 1, 1, 9.0), WireNet("c", 1, 1, 9.0), WireNet("d", 1, 1, 2.0)]
    return ReportDb(CM, {ReportKind.WIRE: rows})


# --- syntax and types --------------------------------------------------------------


def test_trailing_pipe_is_syntax_error():
    with pytest.raises(QuerySyntaxError) as exc:
        parse_query("from max |")
    assert exc.value.position == 9
    assert "filter" in exc.value.expected


@pytest.mark.parametrize("text", ["", "max", "from nope", "from max | top(", "from max | filter(slack <)", "from max | bogus(1)"])
def test_syntax_errors(text):
    with pytest.raises(QuerySyntaxError):
        parse_query(text)


@pytest.mark.parametrize(
    "text,stage",
    [
        ("from max | filter(summary.slack < 'x')", 1),
        ("from max | filter(summary.startpoint + 1 > 0)", 1),
        ("from max | map(data_stages.delay)", 1),
        ("from max | min_by(summary.slack) | top(1)", 2),
        ("from max | filter(summary.nope = 1)", 1),
        ("from wire | aggregate(count) | get(net)", 2),
        ("from max | filter(summary.slack prefix 'a')", 1),
    ],
)
def test_type_errors_name_the_stage(text, stage):
    with pytest.raises(QueryTypeError) as exc:
        parse_query(text)
    assert exc.value.stage == stage


# --- behaviour on the generated corpus --------------------------------------------


def test_min_slack_query(tt_read, truth):
    r = run("from max | min_by(summary.slack) | get(summary.path_id)", tt_read)
    assert r.value == truth[CM].worst_slack_path
    (row,) = r.provenance.rows
    assert tt_read.lookup("max")[int(row[4:-1])].summary.path_id == r.value


def test_violating_paths(tt_read, truth):
    r = run("from max | filter(summary.slack < 0) | get(summary.path_id)", tt_read)
    assert sorted(r.value) == sorted(truth[CM].violating_paths)
    assert len(r.provenance.rows) == len(r.value)


def test_slowest_stages_query(tt_read):
    pid = tt_read.lookup("max")[0].summary.path_id
    r = run(
        f"from max | filter(summary.path_id = {pid}) | get(data_stages) | sort_by(delay, desc) | top(3) | get(net)",
        tt_read,
    )
    stages = sorted(tt_read.path_by_id("max", pid).data_stages, key=lambda s: -s.delay)
    assert r.value == [s.net for s in stages[:3]]
    assert all(x.startswith("max[0].data_stages[") for x in r.provenance.rows)


def test_absent_kind_raises():
    with pytest.raises(KindAbsent):
        run("from wire | aggregate(count)", ReportDb(CM, {}))


# --- null and tie semantics -------------------------------------------------------


def test_null_comparisons(clk_db):
    assert run("from clk | filter(rise_arrival = null) | get(net)", clk_db).value == ["c1"]
    assert run("from clk | filter(rise_arrival > 0) | get(net)", clk_db).value == ["c0", "c2", "c3"]
    assert run("from clk | filter(not rise_arrival > 0) | get(net)", clk_db).value == ["c1"]


def test_null_propagation(clk_db):
    r = run("from clk | map(net, d: rise_arrival - fall_arrival)", clk_db)
    assert [x["d"] for x in r.value] == [-2.0, None, None, 25.0]


def test_sort_nulls_last(clk_db):
    assert run("from clk | sort_by(rise_arrival) | get(net)", clk_db).value == ["c0", "c2", "c3", "c1"]
    assert run("from clk | sort_by(rise_arrival, desc) | get(net)", clk_db).value == ["c2", "c3", "c0", "c1"]


def test_aggregates_skip_nulls(clk_db):
    assert run("from clk | aggregate(count, rise_arrival)", clk_db).value == 3
    assert run("from clk | aggregate(sum, rise_arrival)", clk_db).value == 70.0
    assert run("from clk | aggregate(count)", clk_db).value == 4


def test_empty_inputs(clk_db):
    r = run("from clk | filter(net = 'zz') | aggregate(count)", clk_db)
    assert r.value == 0 and r.provenance.rows == ()
    assert run("from clk | filter(net = 'zz') | aggregate(sum, fall_arrival)", clk_db).value == 0
    with pytest.raises(EmptyInput):
        run("from clk | filter(net = 'zz') | aggregate(max, fall_arrival)", clk_db)
    with pytest.raises(EmptyInput):
        run("from clk | filter(rise_arrival = null) | min_by(rise_arrival)", clk_db)


def test_ties_first_wins(wire_db):
    r = run("from wire | max_by(worst_rc)", wire_db)
    assert r.value["net"] == "b" and r.provenance.rows == ("wire[1]",)
    assert run("from wire | sort_by(worst_rc, desc) | get(net)", wire_db).value == ["b", "c", "a", "d"]


def test_group_by(wire_db):
    r = run("from wire | group_by(worst_rc) | map(key, n: count(rows.net))", wire_db)
    assert r.value == [{"key": 5.0, "n": 1}, {"key": 9.0, "n": 2}, {"key": 2.0, "n": 1}]


def test_string_operators(wire_db):
    assert run("from wire | filter(net glob '[ab]') | get(net)", wire_db).value == ["a", "b"]
    assert run("from wire | filter(net glob 'A') | get(net)", wire_db).value == []
    assert run("from wire | filter(net in ['c', 'd']) | get(net)", wire_db).value == ["c", "d"]


def test_budget(tt_read):
    prog = parse_query("from max | get(data_stages) | get(net)")
    with pytest.raises(BudgetExceeded):
        execute(prog, tt_read, SandboxBudget(max_steps=50))
    with pytest.raises(BudgetExceeded):
        execute(prog, tt_read, SandboxBudget(max_result_rows=10))


# --- differential against the reference interpreter -------------------------------


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_random_programs_agree(small, seed):
    db = small[0].db(CM)
    for text in random_programs(seed, db, 150):
        a, b = both(text, db)
        assert a == b, text


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**31))
def test_random_programs_agree_any_seed(small, seed):
    db = small[0].db(CM)
    for text in random_programs(seed, db, 8):
        a, b = both(text, db)
        assert a == b, text


@pytest.mark.parametrize(
    "text",
    [
        "from clk | sort_by(fall_arrival) | top(2)",
        "from clk | group_by(clock) | map(key, s: sum(rows.rise_arrival))",
        "from clk | aggregate(avg, fall_arrival)",
        "from clk | filter(rise_arrival = null or fall_arrival = null) | get(net)",
    ],
)
def test_handwritten_agree(clk_db, text):
    a, b = both(text, clk_db)
    assert a == b
