"""Task descriptions, scopes and per-category report requirements."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from ..model import ReportKind

K = ReportKind

SINGLE_CATEGORIES = (
    "path_violation",
    "worst_attribute",
    "worst_column",
    "internal_external",
    "slowest_stage",
    "max_xtalk_net",
    "net_slew",
    "path_through_net",
    "data_arc_clock_rise",
)

MULTI_CATEGORIES = tuple(f"M{i}" for i in range(1, 11))

# what each multi-report task needs; xtalk means the setup-side crosstalk report
REQUIRED_KINDS: dict[str, frozenset[ReportKind]] = {
    "M1": frozenset({K.MAX, K.CLK}),
    "M2": frozenset({K.MAX, K.WIRE}),
    "M3": frozenset({K.MAX, K.XTALK_MAX, K.LC}),
    "M4": frozenset({K.MAX, K.WIRE, K.XTALK_MAX, K.LC}),
    "M5": frozenset({K.MAX, K.WIRE, K.XTALK_MAX, K.LC}),
    "M6": frozenset({K.MAX}),
    "M7": frozenset({K.MAX, K.WIRE, K.XTALK_MAX, K.LC}),
    "M8": frozenset({K.MAX, K.CLK}),
    "M9": frozenset({K.MAX, K.XTALK_MAX, K.LC}),
    "M10": frozenset({K.MAX, K.WIRE, K.XTALK_MAX, K.LC}),
}

# cross-mode tasks and the per corner/mode task they repeat
CROSS_MODE_BASE: dict[str, tuple[str, ...]] = {
    "M8": ("M1",),
    "M9": ("M3",),
    "M10": ("M2", "M3"),
}

# worst-case direction for summary attributes and stage columns
WORST_ATTRIBUTE = {"slack": "min", "arrival": "max", "constraint": "min"}
WORST_COLUMN = {"delay": "max", "slew": "max", "xtalk_delta": "max"}


def required_kinds(category: str, params: Mapping[str, Any] | None = None) -> frozenset[ReportKind]:
    if category in REQUIRED_KINDS:
        return REQUIRED_KINDS[category]
    if category in SINGLE_CATEGORIES:
        return frozenset({K.MAX})
    kind = (params or {}).get("kind", "max")
    return frozenset({ReportKind(kind)})


class ScopeUnresolvable(ValueError):
    pass


@dataclass(frozen=True)
class Scope:
    """Which corner/mode pairs a task covers.

    ``kind`` is ``single`` (needs ``corner_mode``), ``all_modes`` (needs
    ``corner``) or ``all``.
    """

    kind: str = "single"
    corner_mode: str | None = None
    corner: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("single", "all_modes", "all"):
            raise ValueError(f"unknown scope {self.kind!r}")
        if self.kind == "single" and not self.corner_mode:
            raise ValueError("single scope needs corner_mode")
        if self.kind == "all_modes" and not self.corner:
            raise ValueError("all_modes scope needs corner")

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.corner_mode:
            out["corner_mode"] = self.corner_mode
        if self.corner:
            out["corner"] = self.corner
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> Scope:
        return cls(data.get("kind", "single"), data.get("corner_mode"), data.get("corner"))


@dataclass(frozen=True)
class Task:
    id: str
    text: str
    scope: Scope
    category: str = "free"
    params: Mapping[str, Any] = field(default_factory=dict)

    @property
    def is_multi(self) -> bool:
        return self.category in MULTI_CATEGORIES

    @property
    def base_categories(self) -> tuple[str, ...]:
        return CROSS_MODE_BASE.get(self.category, (self.category,))

    def required(self) -> frozenset[ReportKind]:
        kinds: set[ReportKind] = set()
        for cat in self.base_categories:
            kinds |= required_kinds(cat, self.params)
        return frozenset(kinds)

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "text": self.text,
            "scope": self.scope.to_json(),
            "category": self.category,
            "params": _jsonable(self.params),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> Task:
        return cls(
            id=str(data["id"]),
            text=str(data.get("text", "")),
            scope=Scope.from_json(data.get("scope", {})),
            category=str(data.get("category", "free")),
            params=dict(data.get("params", {})),
        )


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value
