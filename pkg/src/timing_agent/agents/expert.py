"""Level-3 expert report agent: one goal, one report kind, one query.

Scripted mode maps goal text onto canned query templates. Chat mode asks the
model for a query, then parses, type-checks and runs it, feeding any
diagnostic back for a bounded number of repair rounds.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable

from ..model import ReportDb, ReportKind
from ..query import QueryError, QueryResult, execute, parse_query
from ..query.ast import ROW_TYPES, ListT, Rec, Scalar, Type
from ..tdrg import Tdrg, default_graph
from .backend import ChatFn
from .tasks import WORST_ATTRIBUTE, WORST_COLUMN


class ExpertError(Exception):
    pass


class NoTemplate(ExpertError):
    def __init__(self, goal: str, kind: ReportKind):
        super().__init__(f"no query template for goal {goal!r} on {kind.value}")


class RetriesExhausted(ExpertError):
    def __init__(self, last: str, attempts: int):
        self.last = last
        self.attempts = attempts
        super().__init__(f"no valid query after {attempts} attempts: {last}")


@dataclass(frozen=True)
class ExpertResult:
    goal: str
    kind: ReportKind
    query: str
    result: QueryResult
    summary: str
    attempts: tuple[dict[str, str], ...] = field(default_factory=tuple)

    def to_json(self) -> dict[str, Any]:
        return {
            "goal": self.goal,
            "kind": self.kind.value,
            "query": self.query,
            "result": self.result.to_json(),
            "summary": self.summary,
            "failed_attempts": list(self.attempts),
        }


def q(text: str) -> str:
    """Quote a string literal for the query language."""
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def net_list(nets: list[str]) -> str:
    return ", ".join(nets)


def _split_nets(text: str) -> list[str]:
    return [n.strip() for n in text.split(",") if n.strip()]


def _in_list(nets: list[str]) -> str:
    return "[" + ", ".join(q(n) for n in nets) + "]"


Builder = Callable[[re.Match[str], ReportKind], str]


def _path(m: re.Match[str], kind: ReportKind, group: int = 1) -> str:
    return f"from {kind.value} | filter(summary.path_id = {int(m.group(group))})"


def _worst(m: re.Match[str], kind: ReportKind) -> str:
    name = m.group(1).lower()
    if name in WORST_ATTRIBUTE:
        return f"from {kind.value} | aggregate({WORST_ATTRIBUTE[name]}, summary.{name})"
    return f"from {kind.value} | get(data_stages) | aggregate({WORST_COLUMN[name]}, {name})"


_PATH_KINDS = (ReportKind.MAX, ReportKind.MIN)
_XTALK_KINDS = (ReportKind.XTALK_MAX, ReportKind.XTALK_MIN)
_names = "|".join([*WORST_ATTRIBUTE, *WORST_COLUMN])

# (pattern, kinds the template applies to, builder)
TEMPLATES: list[tuple[re.Pattern[str], tuple[ReportKind, ...], Builder]] = [
    (re.compile(r"path id (?:of|with) the (?:minimum|smallest|worst) slack", re.I), _PATH_KINDS,
     lambda m, k: f"from {k.value} | min_by(summary.slack) | get(summary.path_id)"),
    (re.compile(r"count violating paths", re.I), _PATH_KINDS,
     lambda m, k: f"from {k.value} | filter(summary.slack < 0) | aggregate(count)"),
    (re.compile(r"(?:check path|slack of path) (\d+)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k)} | get(summary.slack)"),
    (re.compile(rf"worst case ({_names}) across paths", re.I), _PATH_KINDS, _worst),
    (re.compile(r"is path (\d+) (?:internal or external|external or internal)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k)} | get(summary.internal_external)"),
    (re.compile(r"slowest stage (?:in|of) path (\d+)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k)} | get(data_stages) | max_by(delay) | get(point)"),
    (re.compile(r"net with the (?:largest|max) crosstalk delta in path (\d+)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k)} | get(data_stages) | max_by(xtalk_delta) | get(net)"),
    (re.compile(r"slew on (?:the )?net (\S+) in path (\d+)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k, 2)} | get(data_stages) | filter(net = {q(m.group(1))}) | get(slew)"),
    (re.compile(r"does path (\d+) go through net (\S+?)\??$", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k)} | get(data_stages) | filter(net = {q(m.group(2))}) | aggregate(count)"),
    (re.compile(r"launch clock and edge of path (\d+)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k)} | map(clock: data_info.launch_clock, edge: data_info.clock_edge)"),
    (re.compile(r"clock stage nets of path (\d+)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k)} | get(clock_stages.net)"),
    (re.compile(r"data stage nets of path (\d+)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k)} | get(data_stages) | map(index, net)"),
    (re.compile(r"(\d+) slowest data stages of path (\d+)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k, 2)} | get(data_stages) | sort_by(delay, desc) | top({int(m.group(1))}) | map(index, net, delay)"),
    (re.compile(r"table summary of path (\d+)", re.I), _PATH_KINDS,
     lambda m, k: (
         f"{_path(m, k)} | map(data_stages: count(data_stages), clock_stages: count(clock_stages), "
         "data_arrival: data_info.arrival_time, clock_arrival: clock_info.arrival_time)"
     )),
    (re.compile(r"last (data|clock) stage of path (\d+)", re.I), _PATH_KINDS,
     lambda m, k: f"{_path(m, k, 2)} | get({m.group(1).lower()}_stages) | max_by(index)"),
    (re.compile(r"clock arrivals of nets: (.+)$", re.I), (ReportKind.CLK,),
     lambda m, k: f"from clk | filter(net in {_in_list(_split_nets(m.group(1)))}) | map(clock, net, rise_arrival, fall_arrival)"),
    (re.compile(r"worst rc of nets: (.+)$", re.I), (ReportKind.WIRE,),
     lambda m, k: f"from wire | filter(net in {_in_list(_split_nets(m.group(1)))}) | map(net, worst_rc)"),
    (re.compile(r"crosstalk victims of path (\d+)", re.I), _XTALK_KINDS,
     lambda m, k: f"from {k.value} | filter(path_id = {int(m.group(1))}) | map(victim, worst_aggressor)"),
    (re.compile(r"logic constraints on nets: (.+)$", re.I), (ReportKind.LC,),
     lambda m, k: f"from lc | filter(net in {_in_list(_split_nets(m.group(1)))}) | map(net, constraint_kind, value)"),
]


def scripted_query(goal: str, kind: ReportKind | str) -> str:
    kind = ReportKind(kind)
    for pattern, kinds, build in TEMPLATES:
        m = pattern.search(goal.strip())
        if m and kind in kinds:
            return build(m, kind)
    raise NoTemplate(goal, kind)


def _describe_fields(t: Type, prefix: str = "") -> list[str]:
    out = []
    if isinstance(t, Rec):
        for name, ft in t.fields:
            out += _describe_fields(ft, f"{prefix}{name}")
    elif isinstance(t, ListT):
        out.append(f"{prefix} (list)")
        out += _describe_fields(t.elem, f"{prefix}.")
    elif isinstance(t, Scalar):
        out.append(f"{prefix} ({t})")
    return out


def _fix_prefixes(lines: list[str]) -> list[str]:
    return [line.replace("..", ".") for line in lines]


def row_fields(kind: ReportKind) -> str:
    t = ROW_TYPES[kind]
    lines = []
    for name, ft in t.fields:
        if isinstance(ft, Rec):
            lines += [f"{name}.{x}" for x in _describe_fields(ft)]
        elif isinstance(ft, ListT):
            lines.append(f"{name} (list of records)")
            lines += [f"{name}.{x}" for x in _describe_fields(ft.elem)]
        else:
            lines.append(f"{name} ({ft})")
    return "\n".join(_fix_prefixes(lines))


def expert_system_prompt() -> str:
    return resources.files("timing_agent.prompts").joinpath("expert_system.txt").read_text(encoding="utf-8")


def extract_query(reply: str) -> str:
    text = re.sub(r"```[a-zA-Z]*", "", reply)
    for line in text.splitlines():
        line = line.strip().strip("`")
        if line.lower().startswith("from "):
            return line
    raise ValueError("reply contains no line starting with 'from'")


def summarize(kind: ReportKind, value: Any, rows: int) -> str:
    text = json.dumps(value, sort_keys=True)
    if len(text) > 160:
        text = text[:157] + "..."
    return f"{kind.value}: {text} [{rows} cited rows]"


def _run(goal: str, kind: ReportKind, db: ReportDb, text: str, attempts: tuple[dict[str, str], ...]) -> ExpertResult:
    program = parse_query(text)
    if program.kind is not kind:
        raise ExpertError(f"query reads {program.kind.value}, expected {kind.value}")
    result = execute(program, db)
    return ExpertResult(goal, kind, text, result, summarize(kind, result.value, len(result.provenance.rows)), attempts)


def expert_query(
    goal: str,
    kind: ReportKind | str,
    db: ReportDb,
    chat: ChatFn | None = None,
    *,
    graph: Tdrg | None = None,
    max_retries: int = 3,
) -> ExpertResult:
    """Answer ``goal`` from the ``kind`` report of ``db`` with one query.

    Raises KindAbsent when the report is not loaded, NoTemplate (scripted) or
    RetriesExhausted (chat) when no query could be produced, and query errors
    from a scripted template unchanged.
    """
    kind = ReportKind(kind)
    db.lookup(kind)
    if chat is None:
        return _run(goal, kind, db, scripted_query(goal, kind), ())
    graph = graph or default_graph()
    node = graph.node(kind)
    user = (
        f"Report kind: {kind.value}\n"
        + (f"Report description: {node.description}\n" if node.description else "")
        + f"Row fields:\n{row_fields(kind)}\n\nGoal: {goal}"
    )
    messages = [{"role": "system", "content": expert_system_prompt()}, {"role": "user", "content": user}]
    failures: list[dict[str, str]] = []
    last = "no attempt"
    for _ in range(max(1, max_retries)):
        reply = chat(messages)
        text = ""
        try:
            text = extract_query(reply)
            return _run(goal, kind, db, text, tuple(failures))
        except (ValueError, QueryError, ExpertError) as exc:
            last = f"{type(exc).__name__}: {exc}"
        failures.append({"query": text or reply[:200], "error": last})
        messages = messages + [
            {"role": "assistant", "content": reply},
            {"role": "user", "content": f"The query failed with {last}. Reply with a corrected query only."},
        ]
    raise RetriesExhausted(last, len(failures))
