"""Random well-typed query programs for differential testing.

Programs are produced as source text so the tokenizer, parser and type checker
are exercised too. Literals are drawn from values that actually occur in the
target report, which keeps filters from being trivially empty or full.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Iterator

from ..model import ReportDb, ReportKind
from .ast import AGG_OPS, CMP_OPS, ROW_TYPES, ListT, Rec, Scalar, Type
from .oracle import canonical_rows
from .parser import parse_query


@dataclass(frozen=True)
class PathInfo:
    path: tuple[str, ...]
    type: Type
    plural: bool  # crosses a list


def iter_paths(row: Type, depth: int = 3) -> Iterator[PathInfo]:
    """Every field path of ``row`` up to ``depth`` segments, one list crossing max."""

    def walk(t: Type, prefix: tuple[str, ...], plural: bool) -> Iterator[PathInfo]:
        if len(prefix) >= depth:
            return
        if isinstance(t, ListT):
            if plural:
                return
            t, plural = t.elem, True
        if not isinstance(t, Rec):
            return
        for name, ft in t.fields:
            p = prefix + (name,)
            yield PathInfo(p, ft, plural)
            yield from walk(ft, p, plural)

    if isinstance(row, Scalar):
        yield PathInfo((), row, False)
        return
    yield from walk(row, (), False)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fmt(x: float) -> str:
    if isinstance(x, int) or float(x).is_integer():
        text = str(int(x))
    else:
        text = repr(round(float(x), 3))
    return text


@dataclass
class _Pools:
    nums: list[float] = field(default_factory=list)
    strs: list[str] = field(default_factory=list)


def _collect(value: Any, pools: _Pools) -> None:
    if isinstance(value, dict):
        for v in value.values():
            _collect(v, pools)
    elif isinstance(value, list):
        for v in value:
            _collect(v, pools)
    elif isinstance(value, str):
        pools.strs.append(value)
    elif isinstance(value, (int, float)):
        pools.nums.append(value)


class ProgramGenerator:
    def __init__(self, rng: random.Random, db: ReportDb, kinds: tuple[ReportKind, ...] | None = None):
        self.rng = rng
        self.kinds = tuple(kinds or db.kinds)
        self.pools: dict[ReportKind, _Pools] = {}
        for kind in self.kinds:
            pools = _Pools()
            rows = canonical_rows(db, kind)
            for row in rows[:60]:
                _collect(row, pools)
            pools.nums = sorted(set(pools.nums)) or [0.0, 1.0]
            pools.strs = sorted(set(pools.strs)) or ["x"]
            self.pools[kind] = pools
        self.kind = self.kinds[0]

    # literals --------------------------------------------------------------------

    def num(self) -> str:
        rng = self.rng
        r = rng.random()
        if r < 0.7:
            x = rng.choice(self.pools[self.kind].nums)
        elif r < 0.85:
            x = rng.randint(-5, 200)
        else:
            x = round(rng.uniform(-300, 300), 2)
        return _fmt(x) if x >= 0 else "-" + _fmt(-x)

    def string(self) -> str:
        return self.rng.choice(self.pools[self.kind].strs)

    # expressions -----------------------------------------------------------------

    def scalar_paths(self, row: Type, name: str | None = None, nullable: bool = True) -> list[PathInfo]:
        out = []
        for p in iter_paths(row):
            if p.plural or not isinstance(p.type, Scalar):
                continue
            if name is not None and p.type.name != name:
                continue
            if not nullable and p.type.nullable:
                continue
            out.append(p)
        return out

    def list_paths(self, row: Type, elem: str | None) -> list[PathInfo]:
        out = []
        for p in iter_paths(row):
            if p.plural and isinstance(p.type, Scalar) and (elem is None or p.type.name == elem):
                out.append(p)
            elif not p.plural and isinstance(p.type, ListT) and elem is None:
                out.append(p)
        return out

    @staticmethod
    def ref(p: PathInfo) -> str:
        return ".".join(p.path) if p.path else "it"

    def num_expr(self, row: Type, depth: int = 2) -> str:
        rng = self.rng
        fields = self.scalar_paths(row, "num")
        lists = self.list_paths(row, "num")
        choices = ["lit"]
        if fields:
            choices += ["field"] * 4
        if lists:
            choices += ["list"]
        if depth > 0 and fields:
            choices += ["bin", "bin", "neg", "abs"]
        any_lists = self.list_paths(row, None)
        if any_lists:
            choices.append("count")
        c = rng.choice(choices)
        if c == "lit":
            return self.num()
        if c == "field":
            return self.ref(rng.choice(fields))
        if c == "list":
            return f"{rng.choice(['sum', 'min', 'max', 'avg'])}({self.ref(rng.choice(lists))})"
        if c == "count":
            return f"count({self.ref(rng.choice(any_lists))})"
        if c == "neg":
            return f"-({self.num_expr(row, depth - 1)})"
        if c == "abs":
            return f"abs({self.num_expr(row, depth - 1)})"
        op = rng.choice(["+", "-", "*"])
        left = self.num_expr(row, depth - 1)
        right = self.num() if op == "*" else self.num_expr(row, depth - 1)
        return f"({left} {op} {right})"

    def str_expr(self, row: Type) -> str | None:
        fields = self.scalar_paths(row, "str")
        lists = self.list_paths(row, "str")
        if not fields and not lists:
            return None
        if lists and (not fields or self.rng.random() < 0.15):
            return f"{self.rng.choice(['min', 'max'])}({self.ref(self.rng.choice(lists))})"
        return self.ref(self.rng.choice(fields))

    def key_expr(self, row: Type) -> str:
        if self.rng.random() < 0.35:
            s = self.str_expr(row)
            if s is not None:
                return s
        if not self.scalar_paths(row, "num") and not self.list_paths(row, None):
            s = self.str_expr(row)
            if s is not None:
                return s
        return self.num_expr(row)

    def pred(self, row: Type, depth: int = 2) -> str:
        rng = self.rng
        r = rng.random()
        if depth > 0 and r < 0.25:
            op = rng.choice(["and", "or"])
            return f"({self.pred(row, depth - 1)} {op} {self.pred(row, depth - 1)})"
        if depth > 0 and r < 0.32:
            return f"not {self.pred(row, depth - 1)}"
        return self.atom(row)

    def atom(self, row: Type) -> str:
        rng = self.rng
        strs = self.str_expr(row)
        nullable = [p for p in self.scalar_paths(row) if p.type.nullable]
        c = rng.random()
        if nullable and c < 0.1:
            return f"{self.ref(rng.choice(nullable))} {rng.choice(['=', '!='])} null"
        if strs is not None and c < 0.5:
            s = self.string()
            k = rng.random()
            if k < 0.3:
                return f"{strs} {rng.choice(['=', '!='])} {_quote(s)}"
            if k < 0.45:
                opts = ", ".join(_quote(self.string()) for _ in range(rng.randint(1, 3)))
                return f"{strs} in [{opts}]"
            if k < 0.6:
                return f"{strs} prefix {_quote(s[: rng.randint(0, len(s))])}"
            if k < 0.7:
                return f"{strs} suffix {_quote(s[len(s) - rng.randint(0, len(s)):])}"
            if k < 0.85:
                a = rng.randint(0, len(s))
                return f"{strs} contains {_quote(s[a: a + rng.randint(0, 6)])}"
            chars = list(s)
            for _ in range(rng.randint(1, 3)):
                if chars:
                    chars[rng.randrange(len(chars))] = rng.choice(["*", "?"])
            return f"{strs} glob {_quote(''.join(chars))}"
        left = self.num_expr(row)
        if rng.random() < 0.15:
            opts = ", ".join(self.num() for _ in range(rng.randint(1, 3)))
            return f"{left} in [{opts}]"
        right = self.num() if rng.random() < 0.7 else self.num_expr(row, 1)
        return f"{left} {rng.choice(CMP_OPS)} {right}"

    # stages ----------------------------------------------------------------------

    def program(self, max_stages: int = 5) -> str:
        rng = self.rng
        self.kind = rng.choice(self.kinds)
        parts = [f"from {self.kind.value}"]
        text = parts[0]
        shape = parse_query(text).result_shape
        for _ in range(rng.randint(0, max_stages)):
            if not shape.stream and isinstance(shape.type, Scalar):
                break
            stage = self.stage(shape)
            if stage is None:
                break
            candidate = f"{text} | {stage}"
            shape = parse_query(candidate).result_shape
            text = candidate
        return text

    def stage(self, shape: Any) -> str | None:
        rng = self.rng
        row = shape.type
        if not shape.stream:
            gets = [p for p in iter_paths(row) if _gettable(p)]
            return f"get({self.ref(rng.choice(gets))})" if gets else None
        ops = ["filter"] * 4 + ["map"] * 2 + ["sort_by"] * 2 + ["top"] * 2 + ["min_by", "max_by", "aggregate", "group_by"]
        if isinstance(row, Rec):
            ops += ["get"] * 2
        op = rng.choice(ops)
        if op == "filter":
            return f"filter({self.pred(row)})"
        if op == "map":
            projs = []
            used: set[str] = set()
            for i in range(rng.randint(1, 3)):
                name = f"c{i}"
                if rng.random() < 0.5:
                    e = self.key_expr(row)
                else:
                    cands = [p for p in iter_paths(row) if not p.plural]
                    e = self.ref(rng.choice(cands)) if cands else self.key_expr(row)
                if name not in used:
                    used.add(name)
                    projs.append(f"{name}: {e}")
            return f"map({', '.join(projs)})"
        if op == "sort_by":
            direction = rng.choice(["", ", asc", ", desc"])
            return f"sort_by({self.key_expr(row)}{direction})"
        if op == "top":
            return f"top({rng.choice([0, 1, 2, 3, 5, 10, 1000])})"
        if op in ("min_by", "max_by", "group_by"):
            return f"{op}({self.key_expr(row)})"
        if op == "aggregate":
            agg = rng.choice(AGG_OPS)
            if agg == "count" and rng.random() < 0.5:
                return "aggregate(count)"
            if agg in ("sum", "avg"):
                return f"aggregate({agg}, {self.num_expr(row)})"
            return f"aggregate({agg}, {self.key_expr(row)})"
        gets = [p for p in iter_paths(row) if _gettable(p)]
        return f"get({self.ref(rng.choice(gets))})" if gets else None


def _gettable(p: PathInfo) -> bool:
    if not p.path:
        return False
    if p.plural and isinstance(p.type, ListT):
        return False
    if isinstance(p.type, ListT) and isinstance(p.type.elem, ListT):
        return False
    return True


def random_programs(seed: int, db: ReportDb, count: int, max_stages: int = 5) -> list[str]:
    gen = ProgramGenerator(random.Random(seed), db)
    return [gen.program(max_stages) for _ in range(count)]
