"""Level-1 MCMM planner: pick corner/modes, run one traversal each, merge.

The run fails closed: if any corner/mode fails, the task status is
``failed`` with the first cause, and no partial answer is reported as final.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterable

from ..model import Corpus, CornerMode
from ..tdrg import Profile, Tdrg, default_graph
from .backend import AgentBackend, ChatFn, make_chat
from .tasks import CROSS_MODE_BASE, Scope, ScopeUnresolvable, Task
from .traverse import CmTranscript, traverse


def scripted_mcmm(scope: Scope, available: Iterable[CornerMode]) -> list[CornerMode]:
    """Enumerate corner/modes for a scope, in sorted order."""
    cms = sorted(set(available), key=str)
    if scope.kind == "single":
        want = CornerMode.parse(scope.corner_mode) if scope.corner_mode else None
        picked = [cm for cm in cms if cm == want]
    elif scope.kind == "all_modes":
        picked = [cm for cm in cms if cm.corner == scope.corner]
    else:
        picked = cms
    if not picked:
        raise ScopeUnresolvable(f"no loaded corner/mode matches scope {scope.to_json()}")
    return picked


def _mcmm_prompt() -> str:
    return resources.files("timing_agent.prompts").joinpath("mcmm_system.txt").read_text(encoding="utf-8")


def llm_mcmm(task: Task, available: Iterable[CornerMode], chat: ChatFn) -> list[CornerMode]:
    """Ask the model which corner/modes the task needs.

    The reply is filtered to loaded corner/modes inside the declared scope; an
    unusable reply falls back to scripted enumeration.
    """
    allowed = scripted_mcmm(task.scope, available)
    user = (
        f"Task: {task.text}\nScope: {json.dumps(task.scope.to_json())}\n"
        f"Loaded corner/modes: {', '.join(str(cm) for cm in sorted(available, key=str))}"
    )
    try:
        reply = chat([{"role": "system", "content": _mcmm_prompt()}, {"role": "user", "content": user}])
        m = re.search(r"\{.*\}", reply, re.S)
        names = json.loads(m.group(0))["corner_modes"] if m else []
        proposed = [CornerMode.parse(str(n)) for n in names]
    except Exception:  # noqa: BLE001 - any bad reply means fallback
        return allowed
    picked = [cm for cm in allowed if cm in proposed]
    # a single-scope or cross-mode task needs every allowed pair
    if not picked or len(picked) < len(allowed):
        return allowed
    return picked


@dataclass
class TaskRun:
    task: Task
    backend: dict[str, Any]
    tdrg_profile: str
    mcmm_plan: list[str] = field(default_factory=list)
    transcripts: list[CmTranscript] = field(default_factory=list)
    answer: Any = None
    prose: str = ""
    status: str = "answered"
    reason: str = ""

    @property
    def citations(self) -> list[dict[str, Any]]:
        return [c for t in self.transcripts for c in t.citations]

    def to_json(self) -> dict[str, Any]:
        return {
            "task": self.task.to_json(),
            "backend": self.backend,
            "tdrg_profile": self.tdrg_profile,
            "mcmm_plan": list(self.mcmm_plan),
            "transcripts": [t.to_json() for t in self.transcripts],
            "answer": {"value": self.answer, "prose": self.prose, "citations": self.citations},
            "status": self.status,
            "reason": self.reason,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _merge(task: Task, transcripts: list[CmTranscript]) -> Any:
    if task.category not in CROSS_MODE_BASE:
        return transcripts[0].answer
    tagged: Any
    if len(task.base_categories) == 1:
        tagged = []
        for t in transcripts:
            for item in t.answer:
                tagged.append([t.corner_mode, *(item if isinstance(item, list) else [item])])
        return sorted(tagged)
    out: dict[str, list[Any]] = {}
    for t in transcripts:
        for key, items in t.answer.items():
            for item in items:
                out.setdefault(key, []).append([t.corner_mode, *(item if isinstance(item, list) else [item])])
    return {k: sorted(v) for k, v in sorted(out.items())}


def _prose(task: Task, answer: Any, transcripts: list[CmTranscript]) -> str:
    lines = [f"{task.id}: {task.text}".rstrip(": ")]
    lines += [t.summary for t in transcripts]
    if len(transcripts) > 1:
        lines.append("merged: " + json.dumps(answer, sort_keys=True)[:400])
    return "\n".join(lines)


def solve(
    task: Task,
    corpus: Corpus,
    backend: AgentBackend | None = None,
    *,
    profile: Profile | str = Profile.PROPOSED,
    graph: Tdrg | None = None,
    chat: ChatFn | None = None,
    with_examples: bool = False,
) -> TaskRun:
    backend = backend or AgentBackend()
    profile = Profile.parse(profile) if isinstance(profile, str) else profile
    graph = graph or default_graph(profile)
    if chat is None:
        chat = make_chat(backend)
    run = TaskRun(task, backend.describe(), profile.value)
    try:
        cms = llm_mcmm(task, corpus.corner_modes, chat) if chat else scripted_mcmm(task.scope, corpus.corner_modes)
    except ScopeUnresolvable as exc:
        run.status, run.reason = "failed", f"ScopeUnresolvable: {exc}"
        return run
    run.mcmm_plan = [str(cm) for cm in cms]
    for cm in cms:
        tr = traverse(
            task,
            task.base_categories,
            corpus.db(cm),
            graph,
            chat,
            max_retries=backend.max_retries,
            plan_chat=chat,
            with_examples=with_examples,
        )
        run.transcripts.append(tr)
        if tr.status != "answered":
            run.status, run.reason = "failed", f"{tr.corner_mode}: {tr.reason}"
            return run
    run.answer = _merge(task, run.transcripts)
    run.prose = _prose(task, run.answer, run.transcripts)
    problems = check_traceable(run)
    if problems:
        run.status, run.reason = "failed", "untraceable answer: " + "; ".join(problems[:3])
    return run


def _leaves(value: Any) -> Iterable[Any]:
    if isinstance(value, dict):
        for v in value.values():
            yield from _leaves(v)
    elif isinstance(value, (list, tuple)):
        for v in value:
            yield from _leaves(v)
    else:
        yield value


def check_traceable(run: TaskRun) -> list[str]:
    """Every string in the final answer must come from some query result.

    Corner/mode tags are allowed as they name the transcript itself.
    Non-empty answers must carry at least one citation.
    """
    seen: set[str] = set(run.mcmm_plan)
    for t in run.transcripts:
        for step in t.steps:
            for x in step.queries:
                seen.update(v for v in _leaves(x.result.value) if isinstance(v, str))
    problems = [f"{v!r} not found in any query result" for v in _leaves(run.answer) if isinstance(v, str) and v not in seen]
    if not _is_empty(run.answer) and not run.citations:
        problems.append("answer has no citations")
    return problems


def _is_empty(value: Any) -> bool:
    return value is None or value is False or (not isinstance(value, bool) and value in (0, "", [], {}))
