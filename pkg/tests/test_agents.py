from __future__ import annotations

import json
import re

import httpx
import pytest

from timing_agent.agents import (
    API_KEY_ENV,
    AgentBackend,
    ChatClient,
    ChatError,
    NoTemplate,
    RetriesExhausted,
    Scope,
    ScopeUnresolvable,
    Task,
    check_traceable,
    expert_query,
    scripted_mcmm,
    scripted_query,
    solve,
    traverse,
)
from timing_agent.bench.goldens import truth_base
from timing_agent.corpus_gen import GenSpec, generate
from timing_agent.model import CornerMode, KindAbsent, ReportDb, ReportKind as K
from timing_agent.query import QueryError
from timing_agent.tdrg import Profile, default_graph, shortest_route

TT = CornerMode("TT", "read")


def task(category, params=None, scope=None, text="task"):
    return Task(category, text, scope or Scope("single", corner_mode="TT_read"), category, params or {})


class ReplayChat:
    """A stand-in model that answers with the scripted templates.

    Planner requests get the shortest route, MCMM requests list every loaded
    corner/mode, and expert requests get the scripted query for the goal.
    """

    def __init__(self, broken: int = 0):
        self.broken = broken  # first N expert replies are garbage
        self.calls: list[str] = []

    def __call__(self, messages):
        user = messages[1]["content"]
        if "Loaded corner/modes:" in user:
            self.calls.append("mcmm")
            names = user.split("Loaded corner/modes:")[1].strip().split(", ")
            return json.dumps({"corner_modes": names})
        if "Required reports:" in user:
            self.calls.append("plan")
            kinds = {K(x) for x in user.split("Required reports:")[1].split("\n")[0].strip().split(", ")}
            return " -> ".join(k.value for k in shortest_route(kinds, default_graph()))
        self.calls.append("expert")
        if self.broken:
            self.broken -= 1
            return "from max | filter(("
        kind = K(re.search(r"Report kind: (\w+)", user).group(1))
        goal = user.rsplit("Goal: ", 1)[1].strip()
        return f"```\n{scripted_query(goal, kind)}\n```"


# --- expert -------------------------------------------------------------------


def test_expert_min_slack(tt_read, truth):
    r = expert_query("path ID with the smallest slack", "max", tt_read)
    assert r.result.value == truth[TT].worst_slack_path
    assert r.query.startswith("from max")


def test_expert_checks_any_path(tt_read):
    p = tt_read.lookup("max")[17]
    r = expert_query(f"Check path {p.summary.path_id}", K.MAX, tt_read)
    assert r.result.value == [p.summary.slack]


def test_expert_no_template(tt_read):
    with pytest.raises(NoTemplate):
        expert_query("write me a poem", K.MAX, tt_read)


def test_expert_absent_kind():
    with pytest.raises(KindAbsent):
        expert_query("path ID with the smallest slack", K.MAX, ReportDb(TT, {}))


def test_expert_repair_loop(tt_read, truth):
    chat = ReplayChat(broken=2)
    r = expert_query("path ID with the smallest slack", K.MAX, tt_read, chat, max_retries=3)
    assert r.result.value == truth[TT].worst_slack_path
    assert len(r.attempts) == 2 and all("error" in a for a in r.attempts)


def test_expert_retries_exhausted(tt_read):
    with pytest.raises(RetriesExhausted) as exc:
        expert_query("path ID with the smallest slack", K.MAX, tt_read, ReplayChat(broken=5), max_retries=3)
    assert exc.value.attempts == 3


def test_expert_rejects_wrong_kind(tt_read):
    with pytest.raises(RetriesExhausted):
        expert_query("anything", K.WIRE, tt_read, lambda m: "from max | aggregate(count)", max_retries=2)


# --- chat client -----------------------------------------------------------------


def _backend(**kw):
    return AgentBackend("llm", endpoint="http://model.test/v1", model="m", **kw)


def test_chat_client_sends_key_in_header_only(monkeypatch):
    monkeypatch.setenv(API_KEY_ENV, "sekret-123")
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["url"] = str(request.url)
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    b = _backend(temperature=0.1)
    client = ChatClient(b, httpx.MockTransport(handler))
    assert client([{"role": "user", "content": "hi"}]) == "ok"
    assert seen["url"] == "http://model.test/v1/chat/completions"
    assert seen["auth"] == "Bearer sekret-123"
    assert seen["body"]["temperature"] == 0.1
    assert "sekret" not in json.dumps(b.describe())


@pytest.mark.parametrize(
    "response",
    [httpx.Response(500), httpx.Response(200, text="not json"), httpx.Response(200, json={"choices": []})],
)
def test_chat_client_errors(response):
    client = ChatClient(_backend(), httpx.MockTransport(lambda r: response))
    with pytest.raises(ChatError):
        client([{"role": "user", "content": "hi"}])


def test_backend_validation():
    with pytest.raises(ValueError):
        AgentBackend("llm")
    with pytest.raises(ValueError):
        AgentBackend("magic")


# --- traversal ------------------------------------------------------------------


@pytest.mark.parametrize("category", ["M1", "M2", "M3", "M4", "M5"])
def test_traverse_matches_ground_truth(category, tt_read, truth):
    tr = traverse(task(category), (category,), tt_read, default_graph())
    assert tr.status == "answered", tr.reason
    assert tr.answer == truth_base(category, truth[TT], {})


def test_traverse_single_task_uses_one_query(tt_read):
    pid = tt_read.lookup("max")[3].summary.path_id
    tr = traverse(task("internal_external", {"path_id": pid}), ("internal_external",), tt_read, default_graph())
    assert tr.status == "answered"
    assert sum(len(s.queries) for s in tr.steps) == 1
    assert tr.answer == tt_read.path_by_id("max", pid).summary.internal_external


def test_traverse_plan_follows_tdrg(tt_read):
    tr = traverse(task("M3"), ("M3",), tt_read, default_graph())
    assert tr.plan.kinds == [K.MAX, K.XTALK_MAX, K.LC]
    assert [s.kind for s in tr.steps] == tr.plan.kinds


def test_traverse_fails_without_edges(tt_read):
    tr = traverse(task("M2"), ("M2",), tt_read, default_graph(Profile.SET1))
    assert tr.status == "failed" and "NoValidPlan" in tr.reason and tr.answer is None


def test_traverse_missing_report_fails_step():
    corpus, _ = generate(GenSpec(seed=3, corners=("TT",), modes=("read",), paths_per_report=20, kinds=("max", "xtalk_max")))
    tr = traverse(task("M3"), ("M3",), corpus.db(TT), default_graph())
    assert tr.status == "failed" and "KindAbsent" in tr.reason


# --- planner -----------------------------------------------------------------------


def test_scripted_mcmm(corpus):
    assert [str(c) for c in scripted_mcmm(Scope("all_modes", corner="SS"), corpus.corner_modes)] == ["SS_read", "SS_write"]
    assert len(scripted_mcmm(Scope("all"), corpus.corner_modes)) == 6
    with pytest.raises(ScopeUnresolvable):
        scripted_mcmm(Scope("single", corner_mode="XX_read"), corpus.corner_modes)


def test_solve_scope_unresolvable(corpus):
    run = solve(task("M1", scope=Scope("all_modes", corner="XX")), corpus)
    assert run.status == "failed" and run.reason.startswith("ScopeUnresolvable")


def test_solve_is_deterministic(corpus):
    t = task("M10", scope=Scope("all_modes", corner="TT"))
    assert solve(t, corpus).dumps() == solve(t, corpus).dumps()


def test_solve_cross_mode(corpus, truth):
    run = solve(task("M10", scope=Scope("all_modes", corner="TT")), corpus)
    assert run.status == "answered" and run.mcmm_plan == ["TT_read", "TT_write"]
    assert len(run.transcripts) == 2
    for key, cat in (("rc_pairs", "M2"), ("unusual_lc_nets", "M3")):
        want = []
        for cm in ("TT_read", "TT_write"):
            for item in truth_base(cat, truth[CornerMode.parse(cm)], {}):
                want.append([cm, *(item if isinstance(item, list) else [item])])
        assert run.answer[key] == sorted(want)


def test_solve_three_modes():
    corpus, truth = generate(GenSpec(seed=5, corners=("FF",), modes=("a", "b", "c"), paths_per_report=30))
    run = solve(task("M8", scope=Scope("all_modes", corner="FF")), corpus)
    assert run.status == "answered" and len(run.transcripts) == 3
    want = sorted([cm, *x] for cm in ("FF_a", "FF_b", "FF_c") for x in truth_base("M1", truth[CornerMode.parse(cm)], {}))
    assert run.answer == want


def test_solve_answer_is_traceable(corpus):
    run = solve(task("M3"), corpus)
    assert check_traceable(run) == []
    assert run.to_json()["answer"]["citations"]


def test_traceability_flags_invented_values(corpus):
    run = solve(task("M3"), corpus)
    run.answer = ["u_top/not_a_net"]
    assert any("not found" in p for p in check_traceable(run))
    run.transcripts = []
    assert "answer has no citations" in check_traceable(run)


def test_solve_with_replay_chat_matches_scripted(corpus):
    t = task("M3")
    chat = ReplayChat()
    run = solve(t, corpus, _backend(), chat=chat)
    assert run.status == "answered"
    assert run.answer == solve(t, corpus).answer
    assert chat.calls[:2] == ["mcmm", "plan"] and "expert" in chat.calls
    assert run.backend["mode"] == "llm"


def test_solve_fails_closed_on_bad_model_output(corpus):
    run = solve(task("M3"), corpus, _backend(), chat=lambda m: "I cannot help with that")
    assert run.status == "failed" and run.answer is None


def test_solve_fails_closed_on_chat_error(corpus):
    def down(messages):
        raise ChatError("endpoint unreachable")

    run = solve(task("M1"), corpus, _backend(), chat=down)
    assert run.status == "failed" and "ChatError" in run.reason
