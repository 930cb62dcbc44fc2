"""Three-level agent: MCMM planner, report traversal, per-report expert."""

from .backend import API_KEY_ENV, AgentBackend, ChatClient, ChatError, make_chat
from .expert import ExpertResult, NoTemplate, RetriesExhausted, expert_query, scripted_query
from .planner import TaskRun, check_traceable, scripted_mcmm, solve
from .tasks import MULTI_CATEGORIES, SINGLE_CATEGORIES, Scope, ScopeUnresolvable, Task
from .traverse import CmTranscript, StepFailed, StepRecord, traverse

__all__ = [
    "API_KEY_ENV",
    "AgentBackend",
    "ChatClient",
    "ChatError",
    "CmTranscript",
    "ExpertResult",
    "MULTI_CATEGORIES",
    "NoTemplate",
    "RetriesExhausted",
    "SINGLE_CATEGORIES",
    "Scope",
    "ScopeUnresolvable",
    "StepFailed",
    "StepRecord",
    "Task",
    "TaskRun",
    "check_traceable",
    "expert_query",
    "make_chat",
    "scripted_mcmm",
    "scripted_query",
    "solve",
    "traverse",
]
