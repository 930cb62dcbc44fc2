from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from timing_agent.model import ReportKind as K
from timing_agent.tdrg import (
    Detail,
    NoValidPlan,
    Profile,
    Tdrg,
    TdrgEdge,
    default_graph,
    parse_plan_text,
    plan_route,
    shortest_route,
    validate_plan,
    word_counts,
)

# word-count targets for shipped descriptions (limited nodes/edges, detailed nodes/edges)
LIMITED = (12.5, 8.0)
DETAILED = (42.5, 20.0)


def test_profile_parse():
    assert Profile.parse(" Set3 ") is Profile.SET3
    with pytest.raises(ValueError):
        Profile.parse("set9")


@pytest.mark.parametrize("profile", list(Profile))
def test_profiles_have_all_nodes(profile):
    g = default_graph(profile)
    assert [n.kind for n in g.nodes] == list(K)


def test_edgeless_profiles():
    for p in (Profile.SET1, Profile.SET2):
        assert default_graph(p).edges == ()
    assert all(n.description == "" for n in default_graph(Profile.SET1).nodes)
    assert all(n.description for n in default_graph(Profile.SET2).nodes)


def test_set1_cannot_plan_multi_kind():
    with pytest.raises(NoValidPlan):
        plan_route({K.MAX, K.WIRE}, "t", default_graph(Profile.SET1))
    assert plan_route({K.MAX}, "t", default_graph(Profile.SET1)).kinds == [K.MAX]


@pytest.mark.parametrize(
    "required,route",
    [
        ({K.MAX, K.CLK}, [K.MAX, K.CLK]),
        ({K.MAX, K.WIRE}, [K.MAX, K.WIRE]),
        ({K.MAX, K.XTALK_MAX, K.LC}, [K.MAX, K.XTALK_MAX, K.LC]),
        ({K.MAX, K.XTALK_MAX, K.WIRE, K.LC}, [K.MAX, K.XTALK_MAX, K.WIRE, K.LC]),
        ({K.MAX}, [K.MAX]),
    ],
)
def test_scripted_plans(required, route):
    plan = plan_route(required, "task", default_graph())
    assert plan.kinds == route
    assert validate_plan(plan, default_graph(), required)
    assert plan.steps[0].inputs == () and all(s.inputs == (i,) for i, s in enumerate(plan.steps[1:]))


def _brute_route(required, graph, limit=10):
    """Shortest edge walk covering ``required`` by exhaustive enumeration."""
    start = K.MAX if K.MAX in required else min(required, key=lambda k: k.order)
    walks = [[start]]
    for _ in range(limit):
        done = [w for w in walks if required <= set(w)]
        if done:
            return min(done, key=lambda w: [k.order for k in w])
        walks = [w + [n] for w in walks for n in graph.successors(w[-1])]
    return None


@given(st.sets(st.sampled_from([k for k in K if k is not K.FREQ]), min_size=1, max_size=4))
def test_shortest_route_matches_brute_force(required):
    g = default_graph()
    assert shortest_route(required, g) == _brute_route(required, g)


@pytest.mark.parametrize("profile,target", [(Profile.SET4, LIMITED), (Profile.PROPOSED, DETAILED)])
def test_word_budgets(profile, target):
    got = word_counts(profile)
    assert abs(got["nodes"] - target[0]) <= 2
    assert abs(got["edges"] - target[1]) <= 2


def test_graph_json_round_trip():
    g = default_graph()
    assert Tdrg.from_json(json.loads(json.dumps(g.to_json()))) == g


def test_invalid_graphs():
    with pytest.raises(ValueError):
        TdrgEdge(K.MAX, K.MAX, "", Detail.NONE)
    e = TdrgEdge(K.MAX, K.WIRE, "", Detail.NONE)
    with pytest.raises(ValueError):
        Tdrg((), (e, e))


def test_validate_plan_reports_problems():
    v = validate_plan([K.MAX, K.LC], default_graph(), {K.MAX, K.LC, K.WIRE})
    assert not v and (K.MAX, K.LC) in v.missing_edges and v.missing_kinds == (K.WIRE,)
    assert "missing" in v.describe()


def test_parse_plan_text():
    assert parse_plan_text('{"steps": [{"kind": "max"}, {"kind": "wire"}]}') == [K.MAX, K.WIRE]
    assert parse_plan_text("Plan:\nmax -> xtalk_max -> lc") == [K.MAX, K.XTALK_MAX, K.LC]
    with pytest.raises(ValueError):
        parse_plan_text("I do not know")


class FakeChat:
    def __init__(self, replies):
        self.replies = list(replies)
        self.calls = []

    def __call__(self, messages):
        self.calls.append(messages)
        return self.replies.pop(0)


def test_llm_plan_repaired_after_feedback():
    chat = FakeChat(["max -> lc", "nonsense", "max -> xtalk_max -> lc"])
    plan = plan_route({K.MAX, K.XTALK_MAX, K.LC}, "t", default_graph(), chat=chat, max_retries=3)
    assert plan.kinds == [K.MAX, K.XTALK_MAX, K.LC]
    assert len(chat.calls) == 3
    assert "invalid" in chat.calls[1][-1]["content"]


def test_llm_plan_retries_exhausted():
    chat = FakeChat(["max -> lc"] * 3)
    with pytest.raises(NoValidPlan):
        plan_route({K.MAX, K.LC}, "t", default_graph(), chat=chat, max_retries=3)
    assert len(chat.calls) == 3


def test_examples_only_when_asked():
    chat = FakeChat(["max -> wire", "max -> wire"])
    plan_route({K.MAX, K.WIRE}, "t", default_graph(), chat=chat)
    plan_route({K.MAX, K.WIRE}, "t", default_graph(), chat=chat, with_examples=True)
    assert "Example plans" not in chat.calls[0][1]["content"]
    assert "Example plans" in chat.calls[1][1]["content"]
