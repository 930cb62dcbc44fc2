"""Query AST, static types and per-kind row schemas."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..model import ReportKind

# --- types ------------------------------------------------------------------


@dataclass(frozen=True)
class Scalar:
    name: str  # "num" | "str" | "null"
    nullable: bool = False

    def __str__(self) -> str:
        return self.name + ("?" if self.nullable else "")


@dataclass(frozen=True)
class Rec:
    name: str
    fields: tuple[tuple[str, "Type"], ...]

    def get(self, name: str) -> Type | None:
        for key, typ in self.fields:
            if key == name:
                return typ
        return None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.fields)

    def __str__(self) -> str:
        return f"record<{self.name}>"


@dataclass(frozen=True)
class ListT:
    elem: "Type"

    def __str__(self) -> str:
        return f"list<{self.elem}>"


Type = Union[Scalar, Rec, ListT]

NUM = Scalar("num")
OPT_NUM = Scalar("num", nullable=True)
STR = Scalar("str")
NULL = Scalar("null", nullable=True)


def _rec(name: str, **fields: Type) -> Rec:
    return Rec(name, tuple(fields.items()))


STAGE = _rec(
    "stage", index=NUM, point=STR, net=STR, cell=STR, edge=STR,
    delay=NUM, slew=NUM, xtalk_delta=NUM, cumulative=NUM,
)
SUMMARY = _rec(
    "summary", path_id=NUM, startpoint=STR, endpoint=STR, slack=NUM, constraint=NUM,
    arrival=NUM, path_group=STR, internal_external=STR,
)
ARC_INFO = _rec(
    "arc_info", role=STR, pbsa_adjustment=NUM, arrival_time=NUM,
    launch_clock=STR, capture_clock=STR, clock_edge=STR,
)
PATH = _rec(
    "path", summary=SUMMARY, data_info=ARC_INFO, clock_info=ARC_INFO,
    data_stages=ListT(STAGE), clock_stages=ListT(STAGE),
)
AGGRESSOR = _rec("aggressor", net=STR, delta=NUM)
XTALK = _rec("xtalk", path_id=NUM, victim=STR, aggressors=ListT(AGGRESSOR), worst_aggressor=STR)
WIRE = _rec("wire", net=STR, worst_r=NUM, worst_c=NUM, worst_rc=NUM)
LC = _rec("lc", net=STR, constraint_kind=STR, value=STR)
CLK = _rec("clk", clock=STR, net=STR, rise_arrival=OPT_NUM, fall_arrival=OPT_NUM)
FREQ = _rec("freq", clock=STR, mhz=NUM)

ROW_TYPES: dict[ReportKind, Rec] = {
    ReportKind.MAX: PATH,
    ReportKind.MIN: PATH,
    ReportKind.XTALK_MAX: XTALK,
    ReportKind.XTALK_MIN: XTALK,
    ReportKind.WIRE: WIRE,
    ReportKind.LC: LC,
    ReportKind.CLK: CLK,
    ReportKind.FREQ: FREQ,
}


@dataclass(frozen=True)
class Shape:
    """Stage output shape: a stream of rows or a single value."""

    stream: bool
    type: Type

    def __str__(self) -> str:
        return f"{'stream' if self.stream else 'one'}<{self.type}>"


# --- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: object  # float | int | str | None


@dataclass(frozen=True)
class Field:
    path: tuple[str, ...]  # () means the row itself ("it")


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # "+" | "-" | "*"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str  # abs | count | sum | min | max | avg
    arg: "Expr"


Expr = Union[Lit, Field, Neg, Bin, Call]

LIST_FUNCS = ("count", "sum", "min", "max", "avg")
SCALAR_FUNCS = ("abs",)


@dataclass(frozen=True)
class Cmp:
    op: str  # = != < <= > >=
    left: Expr
    right: Expr


@dataclass(frozen=True)
class In:
    operand: Expr
    options: tuple[object, ...]


@dataclass(frozen=True)
class StrOp:
    op: str  # prefix | suffix | contains | glob
    operand: Expr
    pattern: str


@dataclass(frozen=True)
class And:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class Or:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class Not:
    operand: "Pred"


Pred = Union[Cmp, In, StrOp, And, Or, Not]

CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
STR_OPS = ("prefix", "suffix", "contains", "glob")
AGG_OPS = ("min", "max", "avg", "sum", "count")

# --- stages -----------------------------------------------------------------


@dataclass(frozen=True)
class Source:
    kind: ReportKind


@dataclass(frozen=True)
class Filter:
    pred: Pred


@dataclass(frozen=True)
class Projection:
    name: str
    expr: Expr


@dataclass(frozen=True)
class Map:
    projections: tuple[Projection, ...]


@dataclass(frozen=True)
class SortBy:
    key: Expr
    descending: bool = False


@dataclass(frozen=True)
class Top:
    k: int


@dataclass(frozen=True)
class MinBy:
    key: Expr


@dataclass(frozen=True)
class MaxBy:
    key: Expr


@dataclass(frozen=True)
class Aggregate:
    op: str
    expr: Expr | None = None


@dataclass(frozen=True)
class Get:
    path: tuple[str, ...]


@dataclass(frozen=True)
class GroupBy:
    key: Expr


Stage = Union[Filter, Map, SortBy, Top, MinBy, MaxBy, Aggregate, Get, GroupBy]


@dataclass(frozen=True)
class QueryProgram:
    source: Source
    stages: tuple[Stage, ...]
    text: str = ""
    # shapes[i] is the output shape of stage i (shapes[0] is the source)
    shapes: tuple[Shape, ...] = ()

    @property
    def kind(self) -> ReportKind:
        return self.source.kind

    @property
    def result_shape(self) -> Shape:
        return self.shapes[-1]

    def __len__(self) -> int:
        return 1 + len(self.stages)


def group_type(key: Type, row: Type) -> Rec:
    return Rec("group", (("key", key), ("rows", ListT(row))))
