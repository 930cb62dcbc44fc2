"""Timing debug relation graph: report-kind nodes, debug-relation edges, route planning.

Nodes are the eight report kinds; directed edges carry the debugging relation
an engineer follows from one report to the next. Description detail per node
and per edge is selected by a profile (Set1 .. Set6, Proposed). An edge exists
in a profile only when the profile carries edge information at all.

The full default texts are listed in ``docs/tdrg_defaults.md``.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Any, Callable, Iterable, Mapping, Sequence

from .model import ReportKind


class Detail(str, Enum):
    NONE = "none"
    LIMITED = "limited"
    DETAILED = "detailed"


class Profile(str, Enum):
    SET1 = "set1"
    SET2 = "set2"
    SET3 = "set3"
    SET4 = "set4"
    SET5 = "set5"
    SET6 = "set6"
    PROPOSED = "proposed"

    @classmethod
    def parse(cls, text: str | Profile) -> Profile:
        if isinstance(text, Profile):
            return text
        try:
            return cls(text.strip().lower())
        except ValueError:
            names = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown TDRG profile {text!r} (expected one of {names})") from None


# profile -> (node detail, edge detail)
PROFILE_DETAIL: dict[Profile, tuple[Detail, Detail]] = {
    Profile.SET1: (Detail.NONE, Detail.NONE),
    Profile.SET2: (Detail.LIMITED, Detail.NONE),
    Profile.SET3: (Detail.NONE, Detail.LIMITED),
    Profile.SET4: (Detail.LIMITED, Detail.LIMITED),
    Profile.SET5: (Detail.DETAILED, Detail.LIMITED),
    Profile.SET6: (Detail.LIMITED, Detail.DETAILED),
    Profile.PROPOSED: (Detail.DETAILED, Detail.DETAILED),
}

NODE_TEXT: dict[ReportKind, tuple[str, str]] = {
    ReportKind("max"): (
        "Setup timing paths with slack, arrival, clock info and per-stage delay tables.",
        "Setup timing report. Each path has a Summary with path_id, startpoint, endpoint, slack, constraint and arrival; Data Info and Clock Info with PBSA adjustment, arrival time and clocks; Data Stages and Clock Stages listing point, net, cell, delay, slew, crosstalk delta, cumulative time.",
    ),
    ReportKind("min"): (
        "Hold timing paths with the same summary, info and stage table layout.",
        "Hold timing report with the same layout as the max report: Summary, Data Info, Clock Info, Data Stages and Clock Stages for every path. Negative slack means a hold violation. Use it for hold checks and comparing early and late arrivals.",
    ),
    ReportKind("xtalk_max"): (
        "Crosstalk on setup paths: victim nets with aggressor nets and coupling delta delays.",
        "Crosstalk report for setup paths. Each entry names the path_id and victim net, then every aggressor net with its coupling delta delay in picoseconds. The worst aggressor has the largest delta. Use it to pair victims with aggressors before checking RC or constraints.",
    ),
    ReportKind("xtalk_min"): (
        "Crosstalk on hold paths: victim nets listed with their aggressors and delta delays.",
        "Crosstalk report for hold paths. Each entry gives the path_id of a hold path and a victim net together with its aggressor nets and their coupling delta delays. The worst aggressor has the largest delta. It mirrors xtalk_max for hold tasks.",
    ),
    ReportKind("clk"): (
        "Clock network nets with rise and fall arrival times; missing edges show as dashes.",
        "Clock report listing every clock network net with its clock name and the rise and fall arrival times at that net. A dash instead of a number means that edge is missing, a broken or unpropagated clock. Cross-reference it with path clock stages.",
    ),
    ReportKind("freq"): (
        "Frequency in MHz for every clock defined in this corner and mode.",
        "Frequency report giving the operating frequency in MHz of each clock in the current corner and mode. The clock period in picoseconds is one million divided by the frequency. It rarely matters for debugging but helps explain path constraints.",
    ),
    ReportKind("lc"): (
        "Logic constraints per net, such as case values, disabled arcs and size rules.",
        "Logic constraint report. Each row gives a net, a constraint kind and its value, for example case_value pinning a net to 0 or 1, disable_arc removing an arc, or dont_touch. Case values or disabled arcs on an active victim or aggressor are unusual.",
    ),
    ReportKind("wire"): (
        "Per-net parasitics: worst resistance, capacitance and Worst_RC used for RC mismatch checks.",
        "Wire report giving each net its worst resistance in ohms, worst capacitance in fF and Worst_RC delay in picoseconds. RC mismatch between two nets is the difference of their Worst_RC values; large mismatch between neighbouring path nets or victim and aggressor is suspicious.",
    ),
}

# (from, to, limited relation, detailed relation)
EDGE_TEXT: tuple[tuple[ReportKind, ReportKind, str, str], ...] = (
    (
        ReportKind("max"), ReportKind("clk"),
        "Check clock stage nets against the clock report.",
        "Take the clock stage nets of the path and look up their rise and fall arrivals in the clock report.",
    ),
    (
        ReportKind("clk"), ReportKind("max"),
        "Find max paths clocked through this clock net.",
        "Given a clock net with a missing edge, find the max paths whose clock stages pass through that net.",
    ),
    (
        ReportKind("max"), ReportKind("wire"),
        "Get Worst_RC of every data net on path.",
        "Look up the Worst_RC of each data net of the path and subtract neighbouring values to get RC mismatch.",
    ),
    (
        ReportKind("wire"), ReportKind("max"),
        "Find paths and stages containing high RC nets.",
        "Given nets with high Worst_RC or a large mismatch, find the max paths and stages whose data nets use them.",
    ),
    (
        ReportKind("max"), ReportKind("xtalk_max"),
        "Find victim and aggressor nets of the path.",
        "Use the path_id to fetch crosstalk entries of the path, giving each victim net and its worst aggressor by delta.",
    ),
    (
        ReportKind("xtalk_max"), ReportKind("max"),
        "Find the path stage where the victim sits.",
        "Given a victim net from the crosstalk report, locate its stage on the max path and read its delay contribution.",
    ),
    (
        ReportKind("xtalk_max"), ReportKind("lc"),
        "look up logic constraints placed on victim and aggressor nets",
        "Look up the logic constraints placed on victim and aggressor nets, then flag case values or disabled arcs as unusual.",
    ),
    (
        ReportKind("lc"), ReportKind("xtalk_max"),
        "Find crosstalk entries that involve the constrained net.",
        "Given a constrained net, find every crosstalk entry where it appears as the victim or an aggressor net.",
    ),
    (
        ReportKind("xtalk_max"), ReportKind("wire"),
        "Get Worst_RC of the victim and its aggressors.",
        "Look up the Worst_RC of the victim and its worst aggressor, then subtract them to get their RC mismatch.",
    ),
    (
        ReportKind("wire"), ReportKind("xtalk_max"),
        "Check whether high RC nets couple with others.",
        "Given nets with unusual Worst_RC values, check whether they appear as victim or aggressor nets in the crosstalk report.",
    ),
    (
        ReportKind("wire"), ReportKind("lc"),
        "Find logic constraints on the high RC nets.",
        "Find the logic constraints set on nets selected by their Worst_RC, such as the net of the slowest high RC stage.",
    ),
    (
        ReportKind("min"), ReportKind("xtalk_min"),
        "Find victim and aggressor nets of hold path.",
        "Use the hold path_id to fetch its hold crosstalk entries, giving each victim net and its worst aggressor.",
    ),
    (
        ReportKind("xtalk_min"), ReportKind("min"),
        "Find the hold path stage of the victim.",
        "Given a victim net from the hold crosstalk report, locate its stage on the hold path and read its delay.",
    ),
    (
        ReportKind("min"), ReportKind("clk"),
        "Check hold path clock nets against clock report.",
        "Take the clock stage nets of the hold path and look up their rise and fall arrivals in the clock report.",
    ),
    (
        ReportKind("clk"), ReportKind("freq"),
        "Get the frequency of this net's clock.",
        "Given a clock name from the clock report, read its frequency in MHz to derive the clock period in picoseconds.",
    ),
    (
        ReportKind("max"), ReportKind("min"),
        "Compare setup and hold timing of shared endpoints.",
        "Compare setup and hold reports for the same startpoint and endpoint to see whether one fix breaks the other.",
    ),
)


def _text(pair: tuple[str, str], detail: Detail) -> str:
    if detail is Detail.NONE:
        return ""
    return pair[0] if detail is Detail.LIMITED else pair[1]


class NoValidPlan(Exception):
    def __init__(self, required: Iterable[ReportKind], reason: str):
        self.required = tuple(sorted(set(required), key=lambda k: k.order))
        self.reason = reason
        kinds = ", ".join(k.value for k in self.required)
        super().__init__(f"no valid retrieval plan for {{{kinds}}}: {reason}")


@dataclass(frozen=True)
class TdrgNode:
    kind: ReportKind
    description: str
    detail: Detail


@dataclass(frozen=True)
class TdrgEdge:
    source: ReportKind
    target: ReportKind
    relation: str
    detail: Detail

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ValueError(f"self-loop on {self.source.value}")


@dataclass(frozen=True)
class Tdrg:
    nodes: tuple[TdrgNode, ...]
    edges: tuple[TdrgEdge, ...]
    profile: Profile | None = None

    def __post_init__(self) -> None:
        seen = set()
        for e in self.edges:
            key = (e.source, e.target)
            if key in seen:
                raise ValueError(f"duplicate edge {e.source.value}->{e.target.value}")
            seen.add(key)

    def node(self, kind: ReportKind) -> TdrgNode:
        for n in self.nodes:
            if n.kind is kind:
                return n
        raise KeyError(kind)

    def edge(self, source: ReportKind, target: ReportKind) -> TdrgEdge | None:
        for e in self.edges:
            if e.source is source and e.target is target:
                return e
        return None

    def successors(self, kind: ReportKind) -> list[ReportKind]:
        return sorted((e.target for e in self.edges if e.source is kind), key=lambda k: k.order)

    def to_json(self) -> dict[str, Any]:
        return {
            "profile": self.profile.value if self.profile else None,
            "nodes": [
                {"kind": n.kind.value, "description": n.description, "detail": n.detail.value}
                for n in self.nodes
            ],
            "edges": [
                {"from": e.source.value, "to": e.target.value, "relation": e.relation, "detail": e.detail.value}
                for e in self.edges
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> Tdrg:
        nodes = tuple(
            TdrgNode(ReportKind(n["kind"]), n.get("description", ""), Detail(n.get("detail", "none")))
            for n in data["nodes"]
        )
        edges = tuple(
            TdrgEdge(ReportKind(e["from"]), ReportKind(e["to"]), e.get("relation", ""), Detail(e.get("detail", "none")))
            for e in data.get("edges", [])
        )
        profile = Profile.parse(data["profile"]) if data.get("profile") else None
        return cls(nodes, edges, profile)


def default_graph(profile: Profile | str = Profile.PROPOSED) -> Tdrg:
    profile = Profile.parse(profile)
    node_detail, edge_detail = PROFILE_DETAIL[profile]
    nodes = tuple(TdrgNode(kind, _text(NODE_TEXT[kind], node_detail), node_detail) for kind in ReportKind)
    edges: tuple[TdrgEdge, ...] = ()
    if edge_detail is not Detail.NONE:
        edges = tuple(
            TdrgEdge(a, b, limited if edge_detail is Detail.LIMITED else detailed, edge_detail)
            for a, b, limited, detailed in EDGE_TEXT
        )
    return Tdrg(nodes, edges, profile)


# --- plans -------------------------------------------------------------------


@dataclass(frozen=True)
class PlanStep:
    kind: ReportKind
    goal: str
    inputs: tuple[int, ...] = ()


@dataclass(frozen=True)
class RetrievalPlan:
    steps: tuple[PlanStep, ...]
    task_id: str = ""

    @property
    def kinds(self) -> list[ReportKind]:
        return [s.kind for s in self.steps]

    def to_json(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "steps": [
                {"kind": s.kind.value, "goal": s.goal, "inputs": list(s.inputs)} for s in self.steps
            ],
        }


@dataclass(frozen=True)
class PlanVerdict:
    valid: bool
    missing_edges: tuple[tuple[ReportKind, ReportKind], ...] = ()
    missing_kinds: tuple[ReportKind, ...] = ()

    def __bool__(self) -> bool:
        return self.valid

    def describe(self) -> str:
        if self.valid:
            return "valid"
        parts = []
        if self.missing_edges:
            parts.append("missing edges " + ", ".join(f"{a.value}->{b.value}" for a, b in self.missing_edges))
        if self.missing_kinds:
            parts.append("missing kinds " + ", ".join(k.value for k in self.missing_kinds))
        if not parts:
            parts.append("empty plan")
        return "; ".join(parts)


def validate_plan(plan: RetrievalPlan | Sequence[ReportKind], graph: Tdrg, required: Iterable[ReportKind]) -> PlanVerdict:
    """Every consecutive pair must be a graph edge and every required kind visited."""
    kinds = plan.kinds if isinstance(plan, RetrievalPlan) else [ReportKind(k) for k in plan]
    missing_edges = tuple(
        (a, b) for a, b in zip(kinds, kinds[1:]) if graph.edge(a, b) is None
    )
    visited = set(kinds)
    missing_kinds = tuple(sorted((k for k in set(required) if k not in visited), key=lambda k: k.order))
    valid = bool(kinds) and not missing_edges and not missing_kinds
    return PlanVerdict(valid, missing_edges, missing_kinds)


def _step_goals(kinds: Sequence[ReportKind], graph: Tdrg, task_text: str) -> tuple[PlanStep, ...]:
    steps = [PlanStep(kinds[0], task_text, ())]
    for i in range(1, len(kinds)):
        edge = graph.edge(kinds[i - 1], kinds[i])
        goal = edge.relation if edge is not None and edge.relation else f"retrieve from {kinds[i].value}"
        steps.append(PlanStep(kinds[i], goal, (i - 1,)))
    return tuple(steps)


def shortest_route(required: Iterable[ReportKind], graph: Tdrg) -> list[ReportKind] | None:
    """Shortest walk over graph edges visiting every required kind.

    Starts at max when required, otherwise at the lowest required kind in enum
    order. Breadth-first search expands successors in enum order, so among
    equally short walks the lexicographically smallest one wins.
    """
    req = sorted(set(required), key=lambda k: k.order)
    if not req:
        return None
    start = ReportKind.MAX if ReportKind.MAX in req else req[0]
    bit = {k: 1 << i for i, k in enumerate(req)}
    full = (1 << len(req)) - 1
    first = (start, bit[start])
    if first[1] == full:
        return [start]
    parent: dict[tuple[ReportKind, int], tuple[ReportKind, int] | None] = {first: None}
    queue = deque([first])
    while queue:
        state = queue.popleft()
        node, mask = state
        for nxt in graph.successors(node):
            st = (nxt, mask | bit.get(nxt, 0))
            if st in parent:
                continue
            parent[st] = state
            if st[1] == full:
                walk = []
                cur: tuple[ReportKind, int] | None = st
                while cur is not None:
                    walk.append(cur[0])
                    cur = parent[cur]
                return walk[::-1]
            queue.append(st)
    return None


ChatFn = Callable[[list[dict[str, str]]], str]


def _asset(name: str) -> str:
    return resources.files("timing_agent.prompts").joinpath(name).read_text(encoding="utf-8")


def plan_examples() -> str:
    return _asset("plan_examples.txt")


def graph_prompt(graph: Tdrg) -> str:
    lines = ["Reports:"]
    for n in graph.nodes:
        lines.append(f"- {n.kind.value}: {n.description}" if n.description else f"- {n.kind.value}")
    lines.append("Relations (from -> to):")
    if not graph.edges:
        lines.append("(none)")
    for e in graph.edges:
        lines.append(f"- {e.source.value} -> {e.target.value}: {e.relation}")
    return "\n".join(lines)


_KIND_RE = re.compile(r"\b(" + "|".join(sorted((k.value for k in ReportKind), key=len, reverse=True)) + r")\b", re.I)


def parse_plan_text(text: str) -> list[ReportKind]:
    """Read a plan from model output: JSON ``{"steps": [...]}`` or an arrow list."""
    m = re.search(r"\{.*\}", text, re.S)
    if m:
        try:
            data = json.loads(m.group())
            steps = data.get("steps", []) if isinstance(data, dict) else []
            out = []
            for s in steps:
                name = s.get("kind") if isinstance(s, dict) else s
                out.append(ReportKind(str(name).strip().lower()))
            if out:
                return out
        except (ValueError, AttributeError):
            pass
    for line in text.splitlines():
        if "->" in line:
            kinds = [ReportKind(t.lower()) for t in _KIND_RE.findall(line)]
            if kinds:
                return kinds
    raise ValueError("no plan found in model output")


def plan_route(
    required: Iterable[ReportKind],
    task_text: str,
    graph: Tdrg,
    *,
    task_id: str = "",
    chat: ChatFn | None = None,
    max_retries: int = 3,
    with_examples: bool = False,
) -> RetrievalPlan:
    """Plan a retrieval route covering ``required``.

    Without ``chat`` the route is the deterministic shortest walk. With a chat
    function the model proposes the route, which is validated and, on failure,
    fed back for up to ``max_retries`` attempts in total.
    """
    req = {ReportKind(k) for k in required}
    if not req:
        raise ValueError("requirement must name at least one report kind")
    if chat is None:
        walk = shortest_route(req, graph)
        if walk is None:
            raise NoValidPlan(req, "graph does not connect the required reports")
        return RetrievalPlan(_step_goals(walk, graph, task_text), task_id)
    system = _asset("planner_system.txt")
    user = f"{graph_prompt(graph)}\n\nTask: {task_text}\nRequired reports: {', '.join(sorted(k.value for k in req))}"
    if with_examples:
        user += "\n\nExample plans:\n" + plan_examples()
    messages = [{"role": "system", "content": system}, {"role": "user", "content": user}]
    last = "no attempt"
    for _ in range(max(1, max_retries)):
        reply = chat(messages)
        try:
            kinds = parse_plan_text(reply)
        except ValueError as exc:
            last = str(exc)
        else:
            verdict = validate_plan(kinds, graph, req)
            if verdict:
                return RetrievalPlan(_step_goals(kinds, graph, task_text), task_id)
            last = verdict.describe()
        messages = messages + [
            {"role": "assistant", "content": reply},
            {"role": "user", "content": f"That plan is invalid: {last}. Reply with a corrected plan."},
        ]
    raise NoValidPlan(req, f"planner retries exhausted ({last})")


def word_counts(graph_profile: Profile = Profile.PROPOSED) -> dict[str, float]:
    """Average description length in words for the profile's nodes and edges."""
    g = default_graph(graph_profile)
    nodes = [len(n.description.split()) for n in g.nodes]
    edges = [len(e.relation.split()) for e in g.edges]
    return {
        "nodes": sum(nodes) / len(nodes) if nodes else 0.0,
        "edges": sum(edges) / len(edges) if edges else 0.0,
    }


def defaults_markdown() -> str:
    """Render every shipped node and edge text as Markdown (docs/tdrg_defaults.md)."""
    out = [
        "# Default relation graph texts",
        "",
        "Generated from `timing_agent.tdrg`; `tests/test_docs.py` keeps this file in sync.",
        "",
        "## Profiles",
        "",
        "| profile | node detail | edge detail | avg node words | avg edge words |",
        "|---|---|---|---|---|",
    ]
    for p in Profile:
        nd, ed = PROFILE_DETAIL[p]
        wc = word_counts(p)
        out.append(f"| {p.value} | {nd.value} | {ed.value} | {wc['nodes']:.3f} | {wc['edges']:.3f} |")
    out += ["", "## Nodes", ""]
    for kind, (limited, detailed) in NODE_TEXT.items():
        out += [f"### {kind.value}", "", f"- limited: {limited}", f"- detailed: {detailed}", ""]
    out += ["## Edges", ""]
    for src, dst, limited, detailed in EDGE_TEXT:
        out += [f"### {src.value} -> {dst.value}", "", f"- limited: {limited}", f"- detailed: {detailed}", ""]
    return "\n".join(out).rstrip("\n") + "\n"
