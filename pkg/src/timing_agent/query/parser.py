"""Tokenizer, recursive-descent parser and static type checker for queries.

Grammar (EBNF, see docs/query_semantics.md)::

    program    = "from" KIND { "|" stage } ;
    stage      = "filter" "(" pred ")"
               | "map" "(" projection { "," projection } ")"
               | "sort_by" "(" expr [ "," ( "asc" | "desc" ) ] ")"
               | "top" "(" INT ")"
               | ( "min_by" | "max_by" | "group_by" ) "(" expr ")"
               | "aggregate" "(" AGG [ "," expr ] ")"
               | "get" "(" path ")" ;
    projection = [ IDENT ":" ] expr ;
    pred       = conj { "or" conj } ;
    conj       = neg { "and" neg } ;
    neg        = "not" neg | "(" pred ")" | cmp ;
    cmp        = expr ( CMPOP expr | "in" "[" lit { "," lit } "]" | STROP STRING ) ;
    expr       = term { ( "+" | "-" ) term } ;
    term       = unary { "*" unary } ;
    unary      = "-" unary | NUMBER | STRING | "null" | FUNC "(" expr ")" | path | "(" expr ")" ;
    path       = IDENT { "." IDENT } ;
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..model import ReportKind
from .ast import (
    AGG_OPS,
    CMP_OPS,
    LIST_FUNCS,
    NULL,
    NUM,
    OPT_NUM,
    ROW_TYPES,
    SCALAR_FUNCS,
    STR,
    STR_OPS,
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
    Projection,
    QueryProgram,
    Rec,
    Scalar,
    Shape,
    SortBy,
    Source,
    Stage,
    StrOp,
    Top,
    Type,
    group_type,
)


class QueryError(Exception):
    """Base class for query language errors."""


class QuerySyntaxError(QueryError):
    def __init__(self, position: int, expected: tuple[str, ...], message: str = ""):
        self.position = position
        self.expected = tuple(expected)
        text = message or f"expected one of {', '.join(self.expected)}"
        super().__init__(f"syntax error at {position}: {text}")


class QueryTypeError(QueryError):
    def __init__(self, stage: int, found: str, expected: str, message: str):
        self.stage = stage
        self.found = found
        self.expected = expected
        super().__init__(f"type error in stage {stage}: {message} (found {found}, expected {expected})")


STAGE_NAMES = ("filter", "map", "sort_by", "top", "min_by", "max_by", "aggregate", "get", "group_by")
KEYWORDS = {"from", "and", "or", "not", "in", "null"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<str>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>!=|<=|>=|≠|[|(),:.\[\]=<>+\-*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | str | ident | op | eof
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(pos, ("token",), f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "op" and tok == "≠":
                tok = "!="
            out.append(Token(kind, tok, pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


def _unquote(s: str) -> str:
    body = s[1:-1]
    return re.sub(r"\\(.)", r"\1", body)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, expected: tuple[str, ...], message: str = "", pos: int | None = None) -> QuerySyntaxError:
        got = self.tok.text or "end of input"
        return QuerySyntaxError(self.tok.pos if pos is None else pos, expected, message or f"expected one of {', '.join(expected)}, got {got!r}")

    def is_op(self, *ops: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def is_word(self, *words: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text in words

    def expect_op(self, op: str) -> Token:
        if not self.is_op(op):
            raise self.error((repr(op),))
        tok = self.tok
        self.i += 1
        return tok

    def expect_ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident" or self.tok.text in KEYWORDS:
            raise self.error((what,))
        tok = self.tok
        self.i += 1
        return tok.text

    # program ---------------------------------------------------------------

    def program(self) -> tuple[Source, tuple[Stage, ...]]:
        if not self.is_word("from"):
            raise self.error(("'from'",))
        self.i += 1
        kinds = tuple(k.value for k in ReportKind)
        if self.tok.kind != "ident" or self.tok.text not in kinds:
            raise self.error(kinds, f"unknown report kind {self.tok.text!r}" if self.tok.kind == "ident" else "")
        source = Source(ReportKind(self.tok.text))
        self.i += 1
        stages = []
        while self.is_op("|"):
            pipe = self.tok
            self.i += 1
            if self.tok.kind == "eof":
                raise self.error(STAGE_NAMES, "trailing '|' without a stage", pos=pipe.pos)
            stages.append(self.stage())
        if self.tok.kind != "eof":
            raise self.error(("'|'", "end of input"))
        return source, tuple(stages)

    def stage(self) -> Stage:
        if not self.is_word(*STAGE_NAMES):
            raise self.error(STAGE_NAMES)
        name = self.tok.text
        self.i += 1
        self.expect_op("(")
        if name == "filter":
            node: Stage = Filter(self.pred())
        elif name == "map":
            projs = [self.projection()]
            while self.is_op(","):
                self.i += 1
                projs.append(self.projection())
            node = Map(tuple(projs))
        elif name == "sort_by":
            key = self.expr()
            desc = False
            if self.is_op(","):
                self.i += 1
                if not self.is_word("asc", "desc"):
                    raise self.error(("asc", "desc"))
                desc = self.tok.text == "desc"
                self.i += 1
            node = SortBy(key, desc)
        elif name == "top":
            if self.tok.kind != "num" or not self.tok.text.isdigit():
                raise self.error(("non-negative integer",))
            node = Top(int(self.tok.text))
            self.i += 1
        elif name in ("min_by", "max_by", "group_by"):
            key = self.expr()
            node = {"min_by": MinBy, "max_by": MaxBy, "group_by": GroupBy}[name](key)
        elif name == "aggregate":
            if not self.is_word(*AGG_OPS):
                raise self.error(AGG_OPS)
            op = self.tok.text
            self.i += 1
            arg = None
            if self.is_op(","):
                self.i += 1
                arg = self.expr()
            node = Aggregate(op, arg)
        else:
            node = Get(self.path())
        self.expect_op(")")
        return node

    def projection(self) -> Projection:
        if self.tok.kind == "ident" and self.toks[self.i + 1].text == ":" and self.toks[self.i + 1].kind == "op":
            name = self.expect_ident("projection name")
            self.i += 1
            return Projection(name, self.expr())
        start = self.tok.pos
        expr = self.expr()
        if isinstance(expr, Field):
            return Projection(expr.path[-1] if expr.path else "it", expr)
        raise QuerySyntaxError(start, ("name ':'",), "computed projection needs a name, e.g. map(total: a + b)")

    def path(self) -> tuple[str, ...]:
        parts = [self.expect_ident("field name")]
        while self.is_op("."):
            self.i += 1
            parts.append(self.expect_ident("field name"))
        return tuple(parts)

    # predicates --------------------------------------------------------------

    def pred(self) -> Pred:
        node = self.conj()
        while self.is_word("or"):
            self.i += 1
            node = Or(node, self.conj())
        return node

    def conj(self) -> Pred:
        node = self.neg()
        while self.is_word("and"):
            self.i += 1
            node = And(node, self.neg())
        return node

    def neg(self) -> Pred:
        if self.is_word("not"):
            self.i += 1
            return Not(self.neg())
        if self.is_op("("):
            save = self.i
            try:
                self.i += 1
                inner = self.pred()
                self.expect_op(")")
                if not (self.is_op(*CMP_OPS) or self.is_word("in", *STR_OPS) or self.is_op("+", "-", "*")):
                    return inner
            except QuerySyntaxError:
                pass
            self.i = save
        return self.cmp()

    def cmp(self) -> Pred:
        left = self.expr()
        if self.is_op(*CMP_OPS):
            op = self.tok.text
            self.i += 1
            return Cmp(op, left, self.expr())
        if self.is_word("in"):
            self.i += 1
            self.expect_op("[")
            opts = [self.literal()]
            while self.is_op(","):
                self.i += 1
                opts.append(self.literal())
            self.expect_op("]")
            return In(left, tuple(opts))
        if self.is_word(*STR_OPS):
            op = self.tok.text
            self.i += 1
            if self.tok.kind != "str":
                raise self.error(("string literal",))
            pat = _unquote(self.tok.text)
            self.i += 1
            return StrOp(op, left, pat)
        raise self.error(CMP_OPS + ("in",) + STR_OPS)

    def literal(self) -> object:
        neg = False
        if self.is_op("-"):
            neg = True
            self.i += 1
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            v = _number(tok.text)
            return -v if neg else v
        if tok.kind == "str" and not neg:
            self.i += 1
            return _unquote(tok.text)
        raise self.error(("number", "string"))

    # expressions ---------------------------------------------------------------

    def expr(self) -> Expr:
        node = self.term()
        while self.is_op("+", "-"):
            op = self.tok.text
            self.i += 1
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.is_op("*"):
            self.i += 1
            node = Bin("*", node, self.unary())
        return node

    def unary(self) -> Expr:
        tok = self.tok
        if self.is_op("-"):
            self.i += 1
            inner = self.unary()
            if isinstance(inner, Lit) and isinstance(inner.value, (int, float)):
                return Lit(-inner.value)
            return Neg(inner)
        if tok.kind == "num":
            self.i += 1
            return Lit(_number(tok.text))
        if tok.kind == "str":
            self.i += 1
            return Lit(_unquote(tok.text))
        if self.is_word("null"):
            self.i += 1
            return Lit(None)
        if tok.kind == "ident" and tok.text in LIST_FUNCS + SCALAR_FUNCS and self.toks[self.i + 1].text == "(":
            self.i += 2
            arg = self.expr()
            self.expect_op(")")
            return Call(tok.text, arg)
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            parts = self.path()
            if parts[0] == "it":
                parts = parts[1:]
            return Field(parts)
        if self.is_op("("):
            self.i += 1
            node = self.expr()
            self.expect_op(")")
            return node
        raise self.error(("number", "string", "null", "field", "'('"))


def _number(text: str) -> int | float:
    if text.isdigit():
        return int(text)
    return float(text)


# --- type checking -------------------------------------------------------------


class _Checker:
    def __init__(self, stage: int):
        self.stage = stage

    def fail(self, found: object, expected: str, message: str) -> QueryTypeError:
        return QueryTypeError(self.stage, str(found), expected, message)

    def resolve(self, row: Type, path: tuple[str, ...]) -> tuple[Type, bool]:
        t = row
        plural = False
        for seg in path:
            if isinstance(t, ListT):
                t = t.elem
                plural = True
            if not isinstance(t, Rec):
                raise self.fail(t, "record", f"cannot access field {seg!r} on {t}")
            ft = t.get(seg)
            if ft is None:
                raise self.fail(t, f"one of {', '.join(t.names)}", f"{t.name} rows have no field {seg!r}")
            t = ft
        return t, plural

    def expr(self, e: Expr, row: Type, allow_compound: bool = False) -> Type:
        if isinstance(e, Lit):
            if e.value is None:
                return NULL
            return STR if isinstance(e.value, str) else NUM
        if isinstance(e, Field):
            t, plural = self.resolve(row, e.path)
            if plural:
                raise self.fail(t, "scalar", f"path {'.'.join(e.path)} crosses a list; use count/sum/min/max/avg")
            if not allow_compound and not isinstance(t, Scalar):
                raise self.fail(t, "scalar", f"field {'.'.join(e.path) or 'it'} is not a scalar")
            return t
        if isinstance(e, Neg):
            t = self.expr(e.operand, row)
            self.numeric(t, "unary minus")
            return t
        if isinstance(e, Bin):
            lt = self.expr(e.left, row)
            rt = self.expr(e.right, row)
            self.numeric(lt, e.op)
            self.numeric(rt, e.op)
            return OPT_NUM if (lt.nullable or rt.nullable) else NUM
        if isinstance(e, Call):
            if e.fn == "abs":
                t = self.expr(e.arg, row)
                self.numeric(t, "abs")
                return t
            if not isinstance(e.arg, Field):
                raise self.fail("expression", "list path", f"{e.fn}() takes a field path over a list")
            t, plural = self.resolve(row, e.arg.path)
            if plural:
                if isinstance(t, ListT):
                    raise self.fail(t, "scalar elements", f"{e.fn}() over nested lists")
                elem = t
            elif isinstance(t, ListT):
                elem = t.elem
            else:
                raise self.fail(t, "list", f"{e.fn}() needs a path that reaches a list")
            if e.fn == "count":
                return NUM
            if not isinstance(elem, Scalar):
                raise self.fail(elem, "scalar elements", f"{e.fn}() over records")
            if e.fn in ("sum", "avg"):
                self.numeric(elem, e.fn)
                return NUM if e.fn == "sum" else OPT_NUM
            return Scalar(elem.name, nullable=True)
        raise AssertionError(e)

    def numeric(self, t: Type, what: str) -> None:
        if not (isinstance(t, Scalar) and t.name == "num"):
            raise self.fail(t, "num", f"{what} needs numeric operands")

    def scalar_key(self, e: Expr, row: Type, what: str) -> Scalar:
        t = self.expr(e, row)
        if not isinstance(t, Scalar) or t.name == "null":
            raise self.fail(t, "num or str", f"{what} key must be a number or string")
        return t

    def pred(self, p: Pred, row: Type) -> None:
        if isinstance(p, (And, Or)):
            self.pred(p.left, row)
            self.pred(p.right, row)
        elif isinstance(p, Not):
            self.pred(p.operand, row)
        elif isinstance(p, Cmp):
            lt = self.expr(p.left, row)
            rt = self.expr(p.right, row)
            if lt.name == "null" or rt.name == "null":
                if p.op not in ("=", "!="):
                    raise self.fail("null", "= or !=", "null only compares with = or !=")
                return
            if lt.name != rt.name:
                raise self.fail(f"{lt} {p.op} {rt}", "matching types", "comparison between different types")
        elif isinstance(p, In):
            t = self.expr(p.operand, row)
            want = "str" if isinstance(p.options[0], str) else "num"
            if any(isinstance(o, str) != (want == "str") for o in p.options):
                raise self.fail("mixed list", want, "in-list literals must share one type")
            if t.name != want:
                raise self.fail(t, want, "in-list type differs from operand")
        elif isinstance(p, StrOp):
            t = self.expr(p.operand, row)
            if t.name != "str":
                raise self.fail(t, "str", f"{p.op} needs a string operand")
        else:
            raise AssertionError(p)


def _stream_of(shape: Shape, ck: _Checker, stage: str) -> Type:
    if not shape.stream:
        raise ck.fail(shape, "stream", f"{stage} needs a stream input")
    return shape.type


def check(source: Source, stages: tuple[Stage, ...]) -> tuple[Shape, ...]:
    """Return output shapes per stage or raise QueryTypeError."""
    shapes = [Shape(True, ROW_TYPES[source.kind])]
    for i, st in enumerate(stages, start=1):
        ck = _Checker(i)
        cur = shapes[-1]
        if isinstance(st, Filter):
            row = _stream_of(cur, ck, "filter")
            ck.pred(st.pred, row)
            out = cur
        elif isinstance(st, Map):
            row = _stream_of(cur, ck, "map")
            fields = []
            for proj in st.projections:
                if proj.name in (n for n, _ in fields):
                    raise ck.fail(proj.name, "unique names", f"duplicate projection {proj.name!r}")
                t = ck.expr(proj.expr, row, allow_compound=isinstance(proj.expr, Field))
                if isinstance(t, Scalar) and t.name == "null":
                    raise ck.fail(t, "typed value", "cannot project a bare null")
                fields.append((proj.name, t))
            out = Shape(True, Rec("projection", tuple(fields)))
        elif isinstance(st, SortBy):
            row = _stream_of(cur, ck, "sort_by")
            ck.scalar_key(st.key, row, "sort_by")
            out = cur
        elif isinstance(st, Top):
            _stream_of(cur, ck, "top")
            out = cur
        elif isinstance(st, (MinBy, MaxBy)):
            row = _stream_of(cur, ck, "min_by/max_by")
            ck.scalar_key(st.key, row, "min_by/max_by")
            out = Shape(False, row)
        elif isinstance(st, Aggregate):
            row = _stream_of(cur, ck, "aggregate")
            if st.expr is None:
                if st.op != "count":
                    raise ck.fail(st.op, "expression", f"aggregate({st.op}) needs an expression")
                out = Shape(False, NUM)
            else:
                t = ck.scalar_key(st.expr, row, "aggregate")
                if st.op in ("sum", "avg"):
                    ck.numeric(t, f"aggregate({st.op})")
                out = Shape(False, NUM if st.op in ("count", "sum", "avg") else Scalar(t.name))
        elif isinstance(st, Get):
            if not isinstance(cur.type, Rec):
                raise ck.fail(cur, "record or stream of records", "get needs records")
            t, plural = ck.resolve(cur.type, st.path)
            if plural or isinstance(t, ListT):
                elem = t.elem if isinstance(t, ListT) else t
                if isinstance(elem, ListT):
                    raise ck.fail(t, "single list level", "get across nested lists")
                out = Shape(True, elem)
            else:
                out = Shape(cur.stream, t)
        elif isinstance(st, GroupBy):
            row = _stream_of(cur, ck, "group_by")
            key = ck.scalar_key(st.key, row, "group_by")
            out = Shape(True, group_type(key, row))
        else:
            raise AssertionError(st)
        shapes.append(out)
    return tuple(shapes)


def parse_query(text: str) -> QueryProgram:
    """Parse and type-check ``text``.

    Raises QuerySyntaxError (with character position and expected set) or
    QueryTypeError (with stage index and found/expected shape).
    """
    source, stages = _Parser(text).program()
    shapes = check(source, stages)
    return QueryProgram(source, stages, text, shapes)
