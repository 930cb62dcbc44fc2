"""Level-2 traversal agent: walk a retrieval plan for one corner/mode.

Each task category has a handler: one step function per report kind plus a
``finish`` that turns collected step outputs into the structured answer.
Step functions only talk to the expert agent for their own report kind;
everything that crosses report kinds goes through ``ctx.data``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable

from ..model import ReportDb, ReportKind
from ..tdrg import NoValidPlan, RetrievalPlan, Tdrg, plan_route
from .backend import ChatFn
from .expert import ExpertResult, expert_query, net_list
from .tasks import WORST_ATTRIBUTE, WORST_COLUMN, Task, required_kinds

K = ReportKind

DEFAULT_RC_THRESHOLD = 50.0
DEFAULT_DENY_SET = ("case_value", "disable_arc")


class StepFailed(Exception):
    def __init__(self, step: int, kind: ReportKind | None, cause: str):
        self.step = step
        self.kind = kind
        self.cause = cause
        where = f"step {step} ({kind.value})" if kind is not None else f"step {step}"
        super().__init__(f"{where}: {cause}")


@dataclass
class StepRecord:
    kind: ReportKind
    goal: str
    inputs: tuple[int, ...]
    queries: list[ExpertResult] = field(default_factory=list)
    summary: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "goal": self.goal,
            "inputs": list(self.inputs),
            "queries": [x.to_json() for x in self.queries],
            "summary": self.summary,
        }


@dataclass
class CmTranscript:
    corner_mode: str
    categories: tuple[str, ...]
    plan: RetrievalPlan | None = None
    steps: list[StepRecord] = field(default_factory=list)
    answer: Any = None
    summary: str = ""
    status: str = "answered"
    reason: str = ""

    @property
    def citations(self) -> list[dict[str, Any]]:
        out = []
        for step in self.steps:
            for x in step.queries:
                if x.result.provenance.rows:
                    out.append(x.result.provenance.to_json())
        return out

    def to_json(self) -> dict[str, Any]:
        return {
            "corner_mode": self.corner_mode,
            "categories": list(self.categories),
            "plan": self.plan.to_json() if self.plan else None,
            "steps": [s.to_json() for s in self.steps],
            "answer": self.answer,
            "citations": self.citations,
            "summary": self.summary,
            "status": self.status,
            "reason": self.reason,
        }


class Ctx:
    def __init__(self, task: Task, db: ReportDb, graph: Tdrg, chat: ChatFn | None, max_retries: int):
        self.task = task
        self.params = task.params
        self.db = db
        self.graph = graph
        self.chat = chat
        self.max_retries = max_retries
        self.data: dict[str, Any] = {}
        self.step: StepRecord | None = None

    def ask(self, goal: str, kind: ReportKind) -> Any:
        res = expert_query(goal, kind, self.db, self.chat, graph=self.graph, max_retries=self.max_retries)
        assert self.step is not None
        self.step.queries.append(res)
        return res.result.value

    def need(self, key: str) -> Any:
        if key not in self.data:
            raise LookupError(f"input {key!r} not produced by an earlier step")
        return self.data[key]

    # shared lookups --------------------------------------------------------------

    def target_path(self) -> int:
        if "path_id" not in self.data:
            pid = self.params.get("path_id")
            if pid is None:
                pid = self.ask("path ID with the smallest slack", K.MAX)
            self.data["path_id"] = int(pid)
        return self.data["path_id"]

    @property
    def threshold(self) -> float:
        return float(self.params.get("rc_threshold", DEFAULT_RC_THRESHOLD))

    @property
    def deny_set(self) -> tuple[str, ...]:
        return tuple(self.params.get("deny_set", DEFAULT_DENY_SET))


StepFn = Callable[[Ctx], None]


@dataclass
class Handler:
    steps: dict[ReportKind, list[StepFn]]
    finish: Callable[[Ctx], Any]


def _one(values: list[Any], what: str) -> Any:
    if len(values) != 1:
        raise LookupError(f"expected exactly one {what}, found {len(values)}")
    return values[0]


# --- single-report categories ----------------------------------------------------


def _single(goal: Callable[[Ctx], str], answer: Callable[[Ctx, Any], Any]) -> Handler:
    def step(ctx: Ctx) -> None:
        ctx.data["value"] = ctx.ask(goal(ctx), K.MAX)

    return Handler({K.MAX: [step]}, lambda ctx: answer(ctx, ctx.need("value")))


def _pid(ctx: Ctx) -> int:
    return int(ctx.params["path_id"])


def _worst_value(ctx: Ctx, v: Any) -> Any:
    return v


SINGLE_HANDLERS: dict[str, Callable[[], Handler]] = {
    "path_violation": lambda: _single(
        lambda c: f"Check path {_pid(c)} for violation",
        lambda c, v: _one(v, "path") < 0,
    ),
    "worst_attribute": lambda: _single(
        lambda c: f"Find worst case {c.params['attribute']} across paths", _worst_value
    ),
    "worst_column": lambda: _single(
        lambda c: f"Find worst case {c.params['column']} across paths", _worst_value
    ),
    "internal_external": lambda: _single(
        lambda c: f"Is path {_pid(c)} internal or external", lambda c, v: _one(v, "path")
    ),
    "slowest_stage": lambda: _single(
        lambda c: f"Find the slowest stage of path {_pid(c)}", lambda c, v: v
    ),
    "max_xtalk_net": lambda: _single(
        lambda c: f"Net with the largest crosstalk delta in path {_pid(c)}", lambda c, v: v
    ),
    "net_slew": lambda: _single(
        lambda c: f"Slew on the net {c.params['net']} in path {_pid(c)}", lambda c, v: _one(v, "stage on that net")
    ),
    "path_through_net": lambda: _single(
        lambda c: f"Does path {_pid(c)} go through net {c.params['net']}?", lambda c, v: v > 0
    ),
    "data_arc_clock_rise": lambda: _single(
        lambda c: f"Launch clock and edge of path {_pid(c)}",
        lambda c, v: _one(v, "path")["clock"] == c.params["clock"] and _one(v, "path")["edge"] == "rise",
    ),
}


def _free() -> Handler:
    def step(ctx: Ctx) -> None:
        ctx.data["value"] = ctx.ask(ctx.task.text, ReportKind(ctx.params.get("kind", "max")))

    # keyed on max here; traverse re-keys it to the task's report kind
    return Handler({K.MAX: [step]}, lambda ctx: ctx.need("value"))


# --- multi-report categories ------------------------------------------------------


def _m1() -> Handler:
    def max_step(ctx: Ctx) -> None:
        pid = ctx.target_path()
        nets = ctx.ask(f"clock stage nets of path {pid}", K.MAX)
        ctx.data["clock_nets"] = list(dict.fromkeys(nets))

    def clk_step(ctx: Ctx) -> None:
        nets = ctx.need("clock_nets")
        rows = ctx.ask(f"clock arrivals of nets: {net_list(nets)}", K.CLK) if nets else []
        ctx.data["clk_rows"] = rows

    def finish(ctx: Ctx) -> Any:
        rows = ctx.need("clk_rows")
        found = {(r["clock"], r["net"]) for r in rows if r["rise_arrival"] is None or r["fall_arrival"] is None}
        return [list(x) for x in sorted(found)]

    return Handler({K.MAX: [max_step], K.CLK: [clk_step]}, finish)


def _data_nets(ctx: Ctx) -> None:
    pid = ctx.target_path()
    if "data_nets" not in ctx.data:
        rows = ctx.ask(f"data stage nets of path {pid}", K.MAX)
        ctx.data["data_nets"] = [r["net"] for r in sorted(rows, key=lambda r: r["index"])]


def _rc_lookup(ctx: Ctx, nets: list[str]) -> dict[str, float]:
    cache = ctx.data.setdefault("rc", {})
    todo = [n for n in dict.fromkeys(nets) if n not in cache]
    if todo:
        for r in ctx.ask(f"worst rc of nets: {net_list(todo)}", K.WIRE):
            cache[r["net"]] = r["worst_rc"]
    return cache


def _m2() -> Handler:
    def wire_step(ctx: Ctx) -> None:
        nets = ctx.need("data_nets")
        rc = _rc_lookup(ctx, nets)
        pairs = []
        for a, b in zip(nets, nets[1:]):
            if a in rc and b in rc and abs(rc[a] - rc[b]) > ctx.threshold:
                pairs.append([a, b])
        ctx.data["rc_pairs"] = pairs

    return Handler({K.MAX: [_data_nets], K.WIRE: [wire_step]}, lambda ctx: ctx.need("rc_pairs"))


def _victims(ctx: Ctx) -> None:
    if "xtalk" not in ctx.data:
        pid = ctx.target_path()
        ctx.data["xtalk"] = ctx.ask(f"crosstalk victims of path {pid}", K.XTALK_MAX)


def _target(ctx: Ctx) -> None:
    ctx.target_path()


def _unusual_nets(ctx: Ctx, nets: list[str]) -> list[str]:
    if not nets:
        return []
    rows = ctx.ask(f"logic constraints on nets: {net_list(nets)}", K.LC)
    return sorted({r["net"] for r in rows if r["constraint_kind"] in ctx.deny_set})


def _m3() -> Handler:
    def lc_step(ctx: Ctx) -> None:
        nets = []
        for e in ctx.need("xtalk"):
            nets += [e["victim"], e["worst_aggressor"]]
        ctx.data["unusual_lc_nets"] = _unusual_nets(ctx, list(dict.fromkeys(nets)))

    return Handler(
        {K.MAX: [_target], K.XTALK_MAX: [_victims], K.LC: [lc_step]},
        lambda ctx: ctx.need("unusual_lc_nets"),
    )


def _m4() -> Handler:
    def wire_step(ctx: Ctx) -> None:
        entries = ctx.need("xtalk")
        rc = _rc_lookup(ctx, [n for e in entries for n in (e["victim"], e["worst_aggressor"])])
        flagged = []
        for e in entries:
            v, a = e["victim"], e["worst_aggressor"]
            if v in rc and a in rc and abs(rc[v] - rc[a]) > ctx.threshold:
                flagged.append([v, a])
        ctx.data["rc_victim_pairs"] = sorted(flagged)

    def lc_step(ctx: Ctx) -> None:
        nets = list(dict.fromkeys(n for pair in ctx.need("rc_victim_pairs") for n in pair))
        if nets:
            rows = ctx.ask(f"logic constraints on nets: {net_list(nets)}", K.LC)
            ctx.data["constraints"] = rows

    return Handler(
        {K.MAX: [_target], K.XTALK_MAX: [_victims], K.WIRE: [wire_step], K.LC: [lc_step]},
        lambda ctx: ctx.need("rc_victim_pairs"),
    )


def _m5() -> Handler:
    def max_step(ctx: Ctx) -> None:
        pid = ctx.target_path()
        ctx.data["slow"] = sorted(ctx.ask(f"3 slowest data stages of path {pid}", K.MAX), key=lambda r: r["index"])

    def wire_step(ctx: Ctx) -> None:
        slow = ctx.need("slow")
        rc = _rc_lookup(ctx, [r["net"] for r in slow])
        best = None
        for r in slow:
            if r["net"] in rc and (best is None or rc[r["net"]] > rc[best]):
                best = r["net"]
        if best is None:
            raise LookupError("no wire data for the slowest stages")
        ctx.data["slow_net"] = best

    def lc_step(ctx: Ctx) -> None:
        net = ctx.need("slow_net")
        rows = ctx.ask(f"logic constraints on nets: {net}", K.LC)
        ctx.data["slow_constraints"] = sorted([r["constraint_kind"], r["value"]] for r in rows)

    return Handler(
        {K.MAX: [max_step], K.XTALK_MAX: [_victims], K.WIRE: [wire_step], K.LC: [lc_step]},
        lambda ctx: {"net": ctx.need("slow_net"), "constraints": ctx.need("slow_constraints")},
    )


def _m6() -> Handler:
    def max_step(ctx: Ctx) -> None:
        pid = ctx.target_path()
        summary = _one(ctx.ask(f"table summary of path {pid}", K.MAX), "path")
        tables = {}
        for table in ("data", "clock"):
            last = ctx.ask(f"last {table} stage of path {pid}", K.MAX)
            tables[table] = {
                "stages": summary[f"{table}_stages"],
                "last_point": last["point"],
                "mismatch": round(summary[f"{table}_arrival"] - last["cumulative"], 3),
            }
        ctx.data["tables"] = tables

    return Handler({K.MAX: [max_step]}, lambda ctx: ctx.need("tables"))


def _m7() -> Handler:
    def targets(ctx: Ctx) -> list[tuple[int, set[int]]]:
        return [(int(t["path_id"]), {int(i) for i in t["stages"]}) for t in ctx.params["targets"]]

    def max_step(ctx: Ctx) -> None:
        nets = {}
        for pid, _ in targets(ctx):
            rows = ctx.ask(f"data stage nets of path {pid}", K.MAX)
            nets[pid] = {r["index"]: r["net"] for r in rows}
        ctx.data["stage_nets"] = nets

    def xtalk_step(ctx: Ctx) -> None:
        stage_nets = ctx.need("stage_nets")
        kept = []
        for pid, stages in targets(ctx):
            index_of = {net: i for i, net in stage_nets[pid].items()}
            for e in ctx.ask(f"crosstalk victims of path {pid}", K.XTALK_MAX):
                if index_of.get(e["victim"]) in stages:
                    kept.append(e)
        ctx.data["xtalk"] = kept

    def wire_step(ctx: Ctx) -> None:
        stage_nets = ctx.need("stage_nets")
        pairs = []
        for pid, stages in targets(ctx):
            by_index = stage_nets[pid]
            for i in sorted(stages):
                if i in by_index and i + 1 in by_index:
                    pairs.append((by_index[i], by_index[i + 1]))
        rc = _rc_lookup(ctx, [n for p in pairs for n in p]) if pairs else {}
        ctx.data["rc_pairs"] = sorted(
            [a, b] for a, b in pairs if a in rc and b in rc and abs(rc[a] - rc[b]) > ctx.threshold
        )

    def lc_step(ctx: Ctx) -> None:
        nets = list(dict.fromkeys(n for e in ctx.need("xtalk") for n in (e["victim"], e["worst_aggressor"])))
        ctx.data["unusual_lc_nets"] = _unusual_nets(ctx, nets)

    return Handler(
        {K.MAX: [max_step], K.XTALK_MAX: [xtalk_step], K.WIRE: [wire_step], K.LC: [lc_step]},
        lambda ctx: {"rc_pairs": ctx.need("rc_pairs"), "unusual_lc_nets": ctx.need("unusual_lc_nets")},
    )


MULTI_HANDLERS: dict[str, Callable[[], Handler]] = {
    "M1": _m1,
    "M2": _m2,
    "M3": _m3,
    "M4": _m4,
    "M5": _m5,
    "M6": _m6,
    "M7": _m7,
}

# keys used when several base tasks share one corner/mode transcript
COMBINED_KEYS = {"M2": "rc_pairs", "M3": "unusual_lc_nets"}


def handler_for(categories: tuple[str, ...]) -> Handler:
    parts = []
    for cat in categories:
        if cat in MULTI_HANDLERS:
            parts.append(MULTI_HANDLERS[cat]())
        elif cat in SINGLE_HANDLERS:
            parts.append(SINGLE_HANDLERS[cat]())
        elif cat == "free":
            parts.append(_free())
        else:
            raise ValueError(f"unknown task category {cat!r}")
    if len(parts) == 1:
        return parts[0]
    steps: dict[ReportKind, list[StepFn]] = {}
    for h in parts:
        for kind, fns in h.steps.items():
            steps.setdefault(kind, []).extend(fns)

    def finish(ctx: Ctx) -> Any:
        return {COMBINED_KEYS.get(cat, cat): h.finish(ctx) for cat, h in zip(categories, parts)}

    return Handler(steps, finish)


def traverse(
    task: Task,
    categories: tuple[str, ...],
    db: ReportDb,
    graph: Tdrg,
    chat: ChatFn | None = None,
    *,
    max_retries: int = 3,
    plan_chat: ChatFn | None = None,
    with_examples: bool = False,
) -> CmTranscript:
    """Plan and execute the retrieval route for one corner/mode.

    Failures never escape: the transcript carries status ``failed`` and the
    deepest cause.
    """
    tr = CmTranscript(str(db.corner_mode), categories)
    try:
        handler = handler_for(categories)
        if categories == ("free",):
            kind = ReportKind(task.params.get("kind", "max"))
            handler = Handler({kind: handler.steps[K.MAX]}, handler.finish)
        required: set[ReportKind] = set(handler.steps)
        for cat in categories:
            if cat != "free":
                required |= required_kinds(cat, task.params)
        text = task.text or " and ".join(categories)
        tr.plan = plan_route(
            required, text, graph, task_id=task.id, chat=plan_chat, max_retries=max_retries, with_examples=with_examples
        )
    except NoValidPlan as exc:
        tr.status, tr.reason = "failed", f"NoValidPlan: {exc.reason}"
        return tr
    except Exception as exc:  # noqa: BLE001 - planner errors become a failed status
        tr.status, tr.reason = "failed", f"{type(exc).__name__}: {exc}"
        return tr
    ctx = Ctx(task, db, graph, chat, max_retries)
    done: set[ReportKind] = set()
    for i, ps in enumerate(tr.plan.steps):
        rec = StepRecord(ps.kind, ps.goal, ps.inputs)
        tr.steps.append(rec)
        ctx.step = rec
        fns = handler.steps.get(ps.kind, []) if ps.kind not in done else []
        try:
            for fn in fns:
                fn(ctx)
        except Exception as exc:  # noqa: BLE001 - recorded as a failed step
            err = StepFailed(i, ps.kind, f"{type(exc).__name__}: {exc}")
            tr.status, tr.reason = "failed", str(err)
            return tr
        done.add(ps.kind)
        rec.summary = "; ".join(x.summary for x in rec.queries) or f"{ps.kind.value}: no retrieval needed"
    try:
        tr.answer = handler.finish(ctx)
    except Exception as exc:  # noqa: BLE001
        tr.status, tr.reason = "failed", f"finish: {type(exc).__name__}: {exc}"
        return tr
    tr.summary = f"{tr.corner_mode}: {_short(tr.answer)}"
    return tr


def _short(value: Any) -> str:
    text = json.dumps(value, sort_keys=True)
    return text if len(text) <= 200 else text[:197] + "..."
