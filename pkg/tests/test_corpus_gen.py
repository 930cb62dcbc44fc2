from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from timing_agent.corpus_gen import (
    DEFAULT_DENY_SET,
    GenSpec,
    GroundTruth,
    SpecInfeasible,
    generate,
    inject_rc_mismatch,
    load_ground_truth,
    write_corpus,
)
from timing_agent.model import ReportKind, WireNet


def _files(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_no_violations_when_none_injected():
    spec = GenSpec(seed=7, paths_per_report=50, injections={"violating_path": 0})
    corpus, truth = generate(spec)
    for cm in corpus.corner_modes:
        assert all(p.summary.slack > 0 for p in corpus.db(cm).lookup("max"))
        assert truth[cm].violating_paths == []


def test_seed7_has_three_violating_paths(corpus, truth):
    for cm in corpus.corner_modes:
        found = sorted(p.summary.path_id for p in corpus.db(cm).lookup("max") if p.summary.slack < 0)
        assert len(found) == 3
        assert found == sorted(truth[cm].violating_paths)
        assert truth[cm].worst_slack_path in found


def test_same_spec_gives_identical_bytes(tmp_path):
    spec = GenSpec(seed=11, paths_per_report=20)
    write_corpus(*generate(spec), tmp_path / "a")
    write_corpus(*generate(spec), tmp_path / "b")
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert a == b and "ground_truth.json" in a and "TT_read/max.rpt" in a


def test_different_seeds_differ():
    a, _ = generate(GenSpec(seed=1, paths_per_report=10))
    b, _ = generate(GenSpec(seed=2, paths_per_report=10))
    assert a.db("TT_read").lookup("max") != b.db("TT_read").lookup("max")


def test_ground_truth_json_round_trip(tmp_path, truth):
    write_corpus(generate(GenSpec(seed=7, paths_per_report=5))[0], truth, tmp_path)
    again = load_ground_truth(tmp_path / "ground_truth.json")
    assert isinstance(again, GroundTruth)
    assert again.to_json() == truth.to_json()


def _wire(n: int, rc: float = 30.0) -> list[WireNet]:
    return [WireNet(f"n{i}", rc * 100, 10.0, rc + (i % 3)) for i in range(n)]


def test_inject_zero_leaves_table_unchanged():
    table = _wire(6)
    out, recs = inject_rc_mismatch(table, {1: ["n0", "n1", "n2"]}, 0, 50.0, random.Random(0))
    assert out == table and recs == []


def test_inject_two_pairs_scan_oracle():
    table = _wire(12)
    paths = {1: [f"n{i}" for i in range(6)], 2: [f"n{i}" for i in range(6, 12)]}
    out, recs = inject_rc_mismatch(table, paths, 2, 50.0, random.Random(5))
    rc = {w.net: w.worst_rc for w in out}
    assert len(recs) == 2
    flagged = set()
    for nets in paths.values():
        for a, b in zip(nets, nets[1:]):
            d = abs(rc[a] - rc[b])
            if d > 50.0:
                flagged.add((a, b))
            else:
                assert d <= 25.0
    assert flagged == {(r["net_a"], r["net_b"]) for r in recs}
    for r in recs:
        assert abs(r["mismatch"] - (rc[r["net_a"]] - rc[r["net_b"]])) <= 0.01


def test_inject_over_capacity():
    with pytest.raises(SpecInfeasible):
        inject_rc_mismatch(_wire(3), {1: ["n0", "n1", "n2"]}, 3, 50.0, random.Random(0))


@pytest.mark.parametrize(
    "spec",
    [
        GenSpec(paths_per_report=0),
        GenSpec(paths_per_report=5, injections={"violating_path": 6}),
        GenSpec(injections={"bogus": 1}),
        GenSpec(corners=()),
        GenSpec(rc_threshold=0),
        GenSpec(deny_set=("dont_touch",)),
    ],
)
def test_infeasible_specs(spec):
    with pytest.raises(SpecInfeasible):
        generate(spec)


def test_injections_recorded_exactly_once(corpus, truth):
    spec = GenSpec()
    for cm in corpus.corner_modes:
        t = truth[cm]
        assert len(t.missing_clk) == spec.count("missing_clk_edge")
        assert len(t.rc_mismatch_pairs) == spec.count("high_rc_mismatch_pair")
        assert len(t.unusual_lc) == spec.count("unusual_lc")
        assert len(t.dominant_aggressors) == spec.count("dominant_aggressor")
        assert len({(r["net_a"], r["net_b"]) for r in t.rc_mismatch_pairs}) == len(t.rc_mismatch_pairs)
        assert len({r["net"] for r in t.unusual_lc}) == len(t.unusual_lc)


def test_clean_data_is_anomaly_free(corpus, truth):
    for cm in corpus.corner_modes:
        db, t = corpus.db(cm), truth[cm]
        incomplete = {(e.clock, e.net) for e in db.lookup("clk") if e.incomplete}
        assert incomplete == {(r["clock"], r["net"]) for r in t.missing_clk}
        deny = {e.net for e in db.lookup("lc") if e.constraint_kind in DEFAULT_DENY_SET}
        assert deny == {r["net"] for r in t.unusual_lc}


def test_separation_margin(corpus, truth):
    thr = truth.rc_threshold
    for cm in corpus.corner_modes:
        db, t = corpus.db(cm), truth[cm]
        rc = {w.net: w.worst_rc for w in db.lookup("wire")}
        injected = {(r["net_a"], r["net_b"]) for r in t.rc_mismatch_pairs}
        for p in db.lookup("max"):
            nets = [s.net for s in p.data_stages]
            for a, b in zip(nets, nets[1:]):
                d = abs(rc[a] - rc[b])
                assert d >= 2 * thr if (a, b) in injected else d <= thr / 2
        dominant = {(d["victim"], d["aggressor"]) for d in t.dominant_aggressors}
        for e in db.lookup("xtalk_max"):
            d = abs(rc[e.victim] - rc[e.worst_aggressor])
            assert d >= 2 * thr if (e.victim, e.worst_aggressor) in dominant else d <= thr / 2


def test_kinds_subset():
    corpus, _ = generate(GenSpec(paths_per_report=5, kinds=("max", "clk")))
    assert corpus.db("TT_read").kinds == [ReportKind.MAX, ReportKind.CLK]


@settings(max_examples=6, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_truth_matches_scan_for_any_seed(seed):
    corpus, truth = generate(GenSpec(seed=seed, corners=("TT",), modes=("read", "write"), paths_per_report=20))
    for cm in corpus.corner_modes:
        paths = corpus.db(cm).lookup("max")
        worst = min(paths, key=lambda p: p.summary.slack)
        assert truth[cm].worst_slack_path == worst.summary.path_id
        for p in paths:
            best = max(p.data_stages, key=lambda s: s.xtalk_delta)
            assert truth[cm].worst_xtalk_net[p.summary.path_id] == best.net
