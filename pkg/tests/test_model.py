from __future__ import annotations

import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from timing_agent.corpus_gen import GenSpec, generate
from timing_agent.model import (
    Corpus,
    CornerMode,
    KindAbsent,
    PathNotFound,
    ReportDb,
    ReportKind,
    validate,
)


def test_corner_mode_renders_and_parses():
    cm = CornerMode("TT", "read")
    assert str(cm) == "TT_read"
    assert CornerMode.parse("TT_read") == cm
    assert CornerMode.parse("SS_0P72V_scan") == CornerMode("SS_0P72V", "scan")
    with pytest.raises(ValueError):
        CornerMode("", "read")
    with pytest.raises(ValueError):
        CornerMode.parse("TTread")


def test_report_kind_is_closed():
    assert [k.value for k in ReportKind] == ["max", "min", "xtalk_max", "xtalk_min", "clk", "freq", "lc", "wire"]
    with pytest.raises(ValueError):
        ReportKind("timing")


def test_lookup_returns_paths_in_file_order(tt_read):
    paths = tt_read.lookup("max")
    assert paths is tt_read.tables[ReportKind.MAX]
    assert tt_read.lookup(ReportKind.MAX) is paths


def test_lookup_absent_kind():
    db = ReportDb(CornerMode("TT", "read"), {ReportKind.FREQ: {"clk": 500.0}})
    with pytest.raises(KindAbsent) as exc:
        db.lookup("wire")
    assert exc.value.kind is ReportKind.WIRE


def test_lookup_length_matches_manifest(corpus):
    counts = corpus.manifest["path_counts"]
    for cm in corpus.corner_modes:
        assert len(corpus.db(cm).lookup("max")) == counts[str(cm)]["max"]


def test_path_by_id(tt_read, truth):
    pid = truth["TT_read"].worst_slack_path
    p = tt_read.path_by_id("max", pid)
    assert p.summary.path_id == pid
    assert p.summary.slack == min(x.summary.slack for x in tt_read.lookup("max"))
    with pytest.raises(PathNotFound):
        tt_read.path_by_id("max", -1)
    with pytest.raises(ValueError):
        tt_read.path_by_id("wire", pid)


def test_generated_corpus_validates(corpus):
    for cm in corpus.corner_modes:
        assert validate(corpus.db(cm)) == []


def _replace_stage(path, which, i, **changes):
    stages = list(getattr(path, which))
    stages[i] = dataclasses.replace(stages[i], **changes)
    return dataclasses.replace(path, **{which: tuple(stages)})


def test_validate_flags_decreasing_cumulative(tt_read):
    p = tt_read.lookup("max")[0]
    bad = _replace_stage(p, "data_stages", 3, cumulative=p.data_stages[2].cumulative - 1.0)
    db = ReportDb(tt_read.corner_mode, {ReportKind.MAX: [bad]})
    found = validate(db)
    assert len(found) == 1
    assert "stage 3" in found[0].where and "cumulative" in found[0].invariant


def test_validate_flags_slack_mismatch(tt_read):
    p = tt_read.lookup("max")[0]
    bad = dataclasses.replace(p, summary=dataclasses.replace(p.summary, slack=p.summary.slack + 1.0))
    found = validate(ReportDb(tt_read.corner_mode, {ReportKind.MAX: [bad]}))
    assert [v.invariant for v in found] == ["slack != constraint - arrival"]


def test_corpus_needs_databases():
    with pytest.raises(ValueError):
        Corpus({})


def test_xtalk_worst_aggressor_first_on_ties(tt_read):
    from timing_agent.model import Aggressor, XtalkEntry

    e = XtalkEntry(1, "v", (Aggressor("a", 2.0), Aggressor("b", 3.0), Aggressor("c", 3.0)))
    assert e.worst_aggressor == "b"


@settings(max_examples=8, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_generated_invariants_hold_for_any_seed(seed):
    corpus, _ = generate(GenSpec(seed=seed, corners=("TT",), modes=("read",), paths_per_report=15))
    db = corpus.db("TT_read")
    assert validate(db) == []
    for p in db.lookup("max"):
        s = p.summary
        assert abs(s.slack - (s.constraint - s.arrival)) <= 0.01
        cum = [x.cumulative for x in p.data_stages]
        assert cum == sorted(cum)
        assert [x.index for x in p.data_stages] == list(range(len(p.data_stages)))
    assert db.lookup("max") is db.lookup("max")
