"""Reference interpreter used as a test oracle for :mod:`.engine`.

Deliberately naive: rows are canonical JSON dicts (the interchange form from
:mod:`timing_agent.schema`), every stage fully materializes its output, the
AST is walked recursively on each evaluation, and sorting is a hand-written
stable insertion sort. It shares no evaluation code with the engine.
"""

from __future__ import annotations

import fnmatch
from typing import Any

from ..model import ReportDb, ReportKind
from ..schema import payload_to_json
from .ast import (
    ROW_TYPES,
    Aggregate,
    And,
    Bin,
    Call,
    Cmp,
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
    QueryProgram,
    Rec,
    SortBy,
    StrOp,
    Top,
    Type,
)
from .engine import BudgetExceeded, EmptyInput, Provenance, QueryResult, SandboxBudget


def _project(value: Any, typ: Type) -> Any:
    if isinstance(typ, Rec):
        return {name: _project(value[name], t) for name, t in typ.fields}
    if isinstance(typ, ListT):
        return [_project(v, typ.elem) for v in value]
    return value


def canonical_rows(db: ReportDb, kind: ReportKind) -> list[dict[str, Any]]:
    data = payload_to_json(kind, db.lookup(kind))
    if kind is ReportKind.FREQ:
        data = [{"clock": c, "mhz": m} for c, m in data.items()]
    return [_project(row, ROW_TYPES[kind]) for row in data]


def _walk(value: Any, path: tuple[str, ...]) -> list[Any]:
    """All values reached by ``path``, expanding every list on the way."""
    current = [value]
    for seg in path:
        nxt = []
        for v in current:
            if isinstance(v, list):
                for w in v:
                    nxt.append(w[seg])
            else:
                nxt.append(v[seg])
        current = nxt
    out = []
    for v in current:
        if isinstance(v, list):
            out.extend(v)
        else:
            out.append(v)
    return out


def _eval(e: Any, row: Any) -> Any:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Field):
        v = row
        for seg in e.path:
            v = v[seg]
        return v
    if isinstance(e, Neg):
        v = _eval(e.operand, row)
        return None if v is None else -v
    if isinstance(e, Bin):
        a = _eval(e.left, row)
        b = _eval(e.right, row)
        if a is None or b is None:
            return None
        return {"+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b}[e.op]()
    if isinstance(e, Call):
        if e.fn == "abs":
            v = _eval(e.arg, row)
            return None if v is None else abs(v)
        vals = [v for v in _walk(row, e.arg.path) if v is not None]
        if e.fn == "count":
            return len(vals)
        if e.fn == "sum":
            total = 0
            for v in vals:
                total = total + v
            return total
        if len(vals) == 0:
            return None
        if e.fn == "avg":
            total = 0
            for v in vals:
                total = total + v
            return total / len(vals)
        best = vals[0]
        for v in vals[1:]:
            if (v < best) if e.fn == "min" else (v > best):
                best = v
        return best
    raise AssertionError(e)


def _test(p: Any, row: Any) -> bool:
    if isinstance(p, And):
        return _test(p.left, row) and _test(p.right, row)
    if isinstance(p, Or):
        return _test(p.left, row) or _test(p.right, row)
    if isinstance(p, Not):
        return not _test(p.operand, row)
    if isinstance(p, Cmp):
        a = _eval(p.left, row)
        b = _eval(p.right, row)
        if p.op == "=":
            return a == b
        if p.op == "!=":
            return not (a == b)
        if a is None or b is None:
            return False
        if p.op == "<":
            return a < b
        if p.op == ">":
            return b < a
        if p.op == "<=":
            return not (b < a)
        return not (a < b)
    if isinstance(p, In):
        v = _eval(p.operand, row)
        if v is None:
            return False
        return any(v == o for o in p.options)
    if isinstance(p, StrOp):
        v = _eval(p.operand, row)
        if v is None:
            return False
        if p.op == "prefix":
            return v[: len(p.pattern)] == p.pattern
        if p.op == "suffix":
            return len(p.pattern) == 0 or v[-len(p.pattern):] == p.pattern
        if p.op == "contains":
            return v.find(p.pattern) >= 0
        return fnmatch.fnmatchcase(v, p.pattern)
    raise AssertionError(p)


def _union(id_lists: list[list[str]]) -> list[str]:
    out: list[str] = []
    for ids in id_lists:
        for i in ids:
            if i not in out:
                out.append(i)
    return out


def _insertion_sort(rows: list[tuple[Any, Any]], descending: bool) -> list[tuple[Any, Any]]:
    """Stable sort of (key, item) pairs; keys are never None here."""
    out: list[tuple[Any, Any]] = []
    for pair in rows:
        pos = len(out)
        while pos > 0:
            prev = out[pos - 1][0]
            before = pair[0] > prev if descending else pair[0] < prev
            if not before:
                break
            pos -= 1
        out.insert(pos, pair)
    return out


def oracle_execute(program: QueryProgram, db: ReportDb, budget: SandboxBudget | None = None) -> QueryResult:
    budget = budget or SandboxBudget()
    kind = program.kind
    rows = canonical_rows(db, kind)
    # current: list of [value, ids] when streaming, or a single [value, ids]
    items: list[list[Any]] = [[r, [f"{kind.value}[{i}]"]] for i, r in enumerate(rows)]
    single: list[Any] | None = None
    for n, st in enumerate(program.stages, start=1):
        if isinstance(st, Filter):
            items = [it for it in items if _test(st.pred, it[0])]
        elif isinstance(st, Map):
            items = [[{p.name: _eval(p.expr, it[0]) for p in st.projections}, it[1]] for it in items]
        elif isinstance(st, SortBy):
            keyed = []
            nulls = []
            for it in items:
                k = _eval(st.key, it[0])
                if k is None:
                    nulls.append(it)
                else:
                    keyed.append((k, it))
            items = [it for _, it in _insertion_sort(keyed, st.descending)] + nulls
        elif isinstance(st, Top):
            items = items[: st.k] if st.k > 0 else []
        elif isinstance(st, (MinBy, MaxBy)):
            best = None
            best_key = None
            for it in items:
                k = _eval(st.key, it[0])
                if k is None:
                    continue
                if best is None:
                    best, best_key = it, k
                elif isinstance(st, MinBy) and k < best_key:
                    best, best_key = it, k
                elif isinstance(st, MaxBy) and best_key < k:
                    best, best_key = it, k
            if best is None:
                raise EmptyInput(n, "min_by" if isinstance(st, MinBy) else "max_by")
            single = best
            items = []
        elif isinstance(st, Aggregate):
            if st.expr is None:
                single = [len(items), _union([it[1] for it in items])]
            else:
                vals = [[_eval(st.expr, it[0]), it[1]] for it in items]
                vals = [v for v in vals if v[0] is not None]
                if st.op == "count":
                    single = [len(vals), _union([v[1] for v in vals])]
                elif st.op == "sum":
                    total = 0
                    for v in vals:
                        total = total + v[0]
                    single = [total, _union([v[1] for v in vals])]
                elif not vals:
                    raise EmptyInput(n, f"aggregate({st.op})")
                elif st.op == "avg":
                    total = 0
                    for v in vals:
                        total = total + v[0]
                    single = [total / len(vals), _union([v[1] for v in vals])]
                else:
                    best = vals[0]
                    for v in vals:
                        if (v[0] < best[0]) if st.op == "min" else (best[0] < v[0]):
                            best = v
                    single = best
            items = []
        elif isinstance(st, GroupBy):
            keys: list[Any] = []
            members: list[list[list[Any]]] = []
            for it in items:
                k = _eval(st.key, it[0])
                for gi, existing in enumerate(keys):
                    if existing == k and (existing is None) == (k is None):
                        members[gi].append(it)
                        break
                else:
                    keys.append(k)
                    members.append([it])
            items = [
                [{"key": k, "rows": [m[0] for m in ms]}, _union([m[1] for m in ms])]
                for k, ms in zip(keys, members)
            ]
        elif isinstance(st, Get):
            sources = items if single is None else [single]
            out_stream = program.shapes[n].stream
            produced = []
            for value, ids in sources:
                produced.extend(_get_children(value, ids, st.path))
            if out_stream:
                items = produced
                single = None
            else:
                single = produced[0]
        else:
            raise AssertionError(st)
    cm = str(db.corner_mode)
    if single is not None:
        return QueryResult(single[0], Provenance(cm, kind.value, tuple(_union([single[1]]))))
    if len(items) > budget.max_result_rows:
        raise BudgetExceeded("result rows", budget.max_result_rows)
    return QueryResult(
        [it[0] for it in items],
        Provenance(cm, kind.value, tuple(_union([it[1] for it in items]))),
        stream=True,
    )


def _get_children(value: Any, ids: list[str], path: tuple[str, ...]) -> list[list[Any]]:
    v = value
    for pos in range(len(path)):
        v = v[path[pos]]
        if isinstance(v, list):
            prefix = ".".join(path[: pos + 1])
            out = []
            for j in range(len(v)):
                child = v[j]
                for seg in path[pos + 1:]:
                    child = child[seg]
                child_ids = [ids[0] + "." + prefix + "[" + str(j) + "]"] if len(ids) == 1 else list(ids)
                out.append([child, child_ids])
            return out
    return [[v, list(ids)]]
