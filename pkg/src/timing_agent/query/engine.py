"""Streaming query interpreter over a :class:`ReportDb`.

Rows flow through the pipeline as ``(value, ids)`` pairs, where ``ids`` is the
tuple of report row ids the value was derived from. Expressions are compiled
to closures once per execution; ``sort_by`` directly followed by ``top`` is
fused into a heap selection.
"""

from __future__ import annotations

import fnmatch
import heapq
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator

from ..model import ReportDb, ReportKind
from .ast import (
    Aggregate,
    And,
    Bin,
    Call,
    Cmp,
    Expr,
    Field,
    Filter,
    Get,
    GroupBy,
    In,
    ListT,
    Lit,
    Map,
    MaxBy,
    MinBy,
    Neg,
    Not,
    Or,
    Pred,
    QueryProgram,
    Rec,
    Scalar,
    SortBy,
    StrOp,
    Top,
    Type,
)
from .parser import QueryError


class EmptyInput(QueryError):
    def __init__(self, stage: int, op: str):
        self.stage = stage
        self.op = op
        super().__init__(f"stage {stage}: {op} over an empty input")


class BudgetExceeded(QueryError):
    def __init__(self, what: str, limit: int):
        self.what = what
        self.limit = limit
        super().__init__(f"sandbox budget exceeded: {what} > {limit}")


@dataclass(frozen=True)
class SandboxBudget:
    max_steps: int = 10**7
    max_result_rows: int = 10**5


@dataclass(frozen=True)
class Provenance:
    corner_mode: str
    kind: str
    rows: tuple[str, ...]

    def to_json(self) -> dict[str, Any]:
        return {"corner_mode": self.corner_mode, "kind": self.kind, "rows": list(self.rows)}


@dataclass(frozen=True)
class QueryResult:
    value: Any
    provenance: Provenance
    stream: bool = False

    def to_json(self) -> dict[str, Any]:
        return {"value": self.value, "provenance": self.provenance.to_json()}


@dataclass(frozen=True)
class FreqRow:
    clock: str
    mhz: float


@dataclass(frozen=True)
class Group:
    key: Any
    rows: tuple[Any, ...]


Item = tuple[Any, tuple[str, ...]]


def _attr(x: Any, name: str) -> Any:
    return x[name] if type(x) is dict else getattr(x, name)


def _getter(path: tuple[str, ...]) -> Callable[[Any], Any]:
    if not path:
        return lambda x: x
    if len(path) == 1:
        (a,) = path
        return lambda x: _attr(x, a)
    if len(path) == 2:
        a, b = path
        return lambda x: _attr(_attr(x, a), b)

    def get(x: Any) -> Any:
        for seg in path:
            x = _attr(x, seg)
        return x

    return get


def _leaves(x: Any, path: tuple[str, ...], i: int = 0) -> Iterator[Any]:
    if isinstance(x, (tuple, list)):
        for y in x:
            yield from _leaves(y, path, i)
    elif i == len(path):
        yield x
    else:
        yield from _leaves(_attr(x, path[i]), path, i + 1)


def _compile(e: Expr) -> Callable[[Any], Any]:
    if isinstance(e, Lit):
        v = e.value
        return lambda _: v
    if isinstance(e, Field):
        return _getter(e.path)
    if isinstance(e, Neg):
        f = _compile(e.operand)

        def neg(x: Any) -> Any:
            v = f(x)
            return None if v is None else -v

        return neg
    if isinstance(e, Bin):
        lf, rf = _compile(e.left), _compile(e.right)
        op = e.op

        def binop(x: Any) -> Any:
            a = lf(x)
            if a is None:
                return None
            b = rf(x)
            if b is None:
                return None
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            return a * b

        return binop
    if isinstance(e, Call):
        if e.fn == "abs":
            f = _compile(e.arg)

            def absf(x: Any) -> Any:
                v = f(x)
                return None if v is None else abs(v)

            return absf
        assert isinstance(e.arg, Field)
        path = e.arg.path
        fn = e.fn

        def listf(x: Any) -> Any:
            vals = [v for v in _leaves(x, path) if v is not None]
            if fn == "count":
                return len(vals)
            if fn == "sum":
                return sum(vals)
            if not vals:
                return None
            if fn == "min":
                return min(vals)
            if fn == "max":
                return max(vals)
            return sum(vals) / len(vals)

        return listf
    raise AssertionError(e)


def _compile_pred(p: Pred) -> Callable[[Any], bool]:
    if isinstance(p, And):
        l, r = _compile_pred(p.left), _compile_pred(p.right)
        return lambda x: l(x) and r(x)
    if isinstance(p, Or):
        l, r = _compile_pred(p.left), _compile_pred(p.right)
        return lambda x: l(x) or r(x)
    if isinstance(p, Not):
        f = _compile_pred(p.operand)
        return lambda x: not f(x)
    if isinstance(p, Cmp):
        lf, rf = _compile(p.left), _compile(p.right)
        op = p.op
        if op == "=":
            return lambda x: lf(x) == rf(x)
        if op == "!=":
            return lambda x: lf(x) != rf(x)

        def order(x: Any) -> bool:
            a, b = lf(x), rf(x)
            if a is None or b is None:
                return False
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            return a >= b

        return order
    if isinstance(p, In):
        f = _compile(p.operand)
        options = p.options
        return lambda x: (v := f(x)) is not None and v in options
    if isinstance(p, StrOp):
        f = _compile(p.operand)
        pat = p.pattern
        test: Callable[[str], bool] = {
            "prefix": lambda s: s.startswith(pat),
            "suffix": lambda s: s.endswith(pat),
            "contains": lambda s: pat in s,
            "glob": lambda s: fnmatch.fnmatchcase(s, pat),
        }[p.op]
        return lambda x: (v := f(x)) is not None and test(v)
    raise AssertionError(p)


def source_rows(db: ReportDb, kind: ReportKind) -> list[Any]:
    payload = db.lookup(kind)
    if kind is ReportKind.FREQ:
        return [FreqRow(c, m) for c, m in payload.items()]
    return list(payload)


def _unique(ids: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(ids))


def _flatten_ids(items: Iterable[Item]) -> tuple[str, ...]:
    return _unique(i for _, ids in items for i in ids)


def to_plain(value: Any, typ: Type) -> Any:
    """Convert an engine value to its canonical JSON form, guided by ``typ``."""
    if value is None or isinstance(typ, Scalar):
        return value
    if isinstance(typ, ListT):
        return [to_plain(v, typ.elem) for v in value]
    assert isinstance(typ, Rec)
    return {name: to_plain(_attr(value, name), t) for name, t in typ.fields}


class _Run:
    def __init__(self, program: QueryProgram, db: ReportDb, budget: SandboxBudget):
        self.program = program
        self.db = db
        self.budget = budget
        self.steps = 0

    def tick(self, n: int = 1) -> None:
        self.steps += n
        if self.steps > self.budget.max_steps:
            raise BudgetExceeded("steps", self.budget.max_steps)

    def counted(self, items: Iterable[Item]) -> Iterator[Item]:
        for it in items:
            self.tick()
            yield it

    def run(self) -> QueryResult:
        prog = self.program
        kind = prog.kind
        rows = source_rows(self.db, kind)
        label = kind.value
        cur: Any = self.counted([(r, (f"{label}[{i}]",)) for i, r in enumerate(rows)])
        stream = True
        stages = prog.stages
        i = 0
        while i < len(stages):
            st = stages[i]
            n = i + 1
            if isinstance(st, SortBy) and i + 1 < len(stages) and isinstance(stages[i + 1], Top):
                cur = self.counted(self.sort_top(cur, st, stages[i + 1].k))
                i += 2
                continue
            if isinstance(st, Filter):
                cur = self.counted(_filter(cur, _compile_pred(st.pred)))
            elif isinstance(st, Map):
                cur = self.counted(_map(cur, [(p.name, _compile(p.expr)) for p in st.projections]))
            elif isinstance(st, SortBy):
                cur = self.counted(self.sort_top(cur, st, None))
            elif isinstance(st, Top):
                cur = self.counted(_take(cur, st.k))
            elif isinstance(st, (MinBy, MaxBy)):
                cur = self.extreme(cur, st, n)
                stream = False
            elif isinstance(st, Aggregate):
                cur = self.aggregate(cur, st, n)
                stream = False
            elif isinstance(st, GroupBy):
                cur = self.counted(self.group(cur, st))
            elif isinstance(st, Get):
                shape = prog.shapes[n]
                if stream:
                    cur = self.counted(self.get_stream(cur, st.path))
                elif shape.stream:
                    cur = self.counted(self.get_stream([cur], st.path))
                    stream = True
                else:
                    v, ids = cur
                    cur = (_getter(st.path)(v), ids)
            else:
                raise AssertionError(st)
            i += 1
        out_type = prog.result_shape.type
        cm, kv = str(self.db.corner_mode), kind.value
        if stream:
            items = []
            for it in cur:
                items.append(it)
                if len(items) > self.budget.max_result_rows:
                    raise BudgetExceeded("result rows", self.budget.max_result_rows)
            return QueryResult(
                [to_plain(v, out_type) for v, _ in items],
                Provenance(cm, kv, _flatten_ids(items)),
                stream=True,
            )
        v, ids = cur
        return QueryResult(to_plain(v, out_type), Provenance(cm, kv, _unique(ids)))

    @staticmethod
    def sort_top(items: Iterable[Item], st: SortBy, k: int | None) -> list[Item]:
        keyf = _compile(st.key)
        keyed = []
        nulls = []
        for it in items:
            key = keyf(it[0])
            if key is None:
                nulls.append(it)
            else:
                keyed.append((key, it))
        if k is None:
            keyed.sort(key=lambda p: p[0], reverse=st.descending)
            return [it for _, it in keyed] + nulls
        pick = heapq.nlargest if st.descending else heapq.nsmallest
        best = [it for _, it in pick(k, keyed, key=lambda p: p[0])]
        return best + nulls[: max(0, k - len(best))]

    @staticmethod
    def extreme(items: Iterable[Item], st: MinBy | MaxBy, n: int) -> Item:
        keyf = _compile(st.key)
        want_min = isinstance(st, MinBy)
        best = None
        best_key = None
        for it in items:
            key = keyf(it[0])
            if key is None:
                continue
            if best is None or (key < best_key if want_min else key > best_key):
                best, best_key = it, key
        if best is None:
            raise EmptyInput(n, "min_by" if want_min else "max_by")
        return best

    @staticmethod
    def aggregate(items: Iterable[Item], st: Aggregate, n: int) -> Item:
        if st.expr is None:
            seen = list(items)
            return len(seen), _flatten_ids(seen)
        f = _compile(st.expr)
        vals = []
        for v, ids in items:
            x = f(v)
            if x is not None:
                vals.append((x, ids))
        op = st.op
        if op == "count":
            return len(vals), _flatten_ids(vals)
        if op == "sum":
            return sum(x for x, _ in vals), _flatten_ids(vals)
        if not vals:
            raise EmptyInput(n, f"aggregate({op})")
        if op == "avg":
            return sum(x for x, _ in vals) / len(vals), _flatten_ids(vals)
        best = vals[0]
        for cand in vals[1:]:
            if (cand[0] < best[0]) if op == "min" else (cand[0] > best[0]):
                best = cand
        return best

    @staticmethod
    def group(items: Iterable[Item], st: GroupBy) -> list[Item]:
        keyf = _compile(st.key)
        groups: dict[Any, list[Item]] = {}
        for it in items:
            groups.setdefault(keyf(it[0]), []).append(it)
        return [
            (Group(key, tuple(v for v, _ in members)), _flatten_ids(members))
            for key, members in groups.items()
        ]

    @staticmethod
    def get_stream(items: Iterable[Item], path: tuple[str, ...]) -> Iterator[Item]:
        for v, ids in items:
            x = v
            for pos, seg in enumerate(path):
                x = _attr(x, seg)
                if isinstance(x, (tuple, list)):
                    rest = path[pos + 1:]
                    prefix = ".".join(path[: pos + 1])
                    for j, child in enumerate(x):
                        cids = (f"{ids[0]}.{prefix}[{j}]",) if len(ids) == 1 else ids
                        yield _getter(rest)(child), cids
                    break
            else:
                yield x, ids


def _filter(items: Iterable[Item], pred: Callable[[Any], bool]) -> Iterator[Item]:
    for it in items:
        if pred(it[0]):
            yield it


def _map(items: Iterable[Item], fs: list[tuple[str, Callable[[Any], Any]]]) -> Iterator[Item]:
    for v, ids in items:
        yield {name: f(v) for name, f in fs}, ids


def _take(items: Iterable[Item], k: int) -> Iterator[Item]:
    if k <= 0:
        return
    for n, it in enumerate(items, start=1):
        yield it
        if n >= k:
            return


def execute(program: QueryProgram, db: ReportDb, budget: SandboxBudget | None = None) -> QueryResult:
    """Run a type-checked program against ``db``.

    Raises KindAbsent, EmptyInput or BudgetExceeded.
    """
    return _Run(program, db, budget or SandboxBudget()).run()
