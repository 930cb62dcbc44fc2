from __future__ import annotations

import re
from pathlib import Path

from timing_agent.model import ReportKind
from timing_agent.query.parser import STAGE_NAMES
from timing_agent.report_parser import INFO_KEYS, SECTIONS, STAGE_COLUMNS, SUMMARY_KEYS
from timing_agent.tdrg import defaults_markdown

DOCS = Path(__file__).resolve().parents[1] / "docs"


def test_tdrg_defaults_doc_in_sync():
    assert (DOCS / "tdrg_defaults.md").read_text(encoding="utf-8") == defaults_markdown()


def test_query_doc_lists_every_stage_and_kind():
    text = (DOCS / "query_semantics.md").read_text(encoding="utf-8")
    grammar = text[text.index("```ebnf"):]
    for name in STAGE_NAMES:
        assert f'"{name}"' in grammar, name
    kinds = re.search(r"KIND\s*=\s*(.*?);", grammar).group(1)
    assert re.findall(r'"(\w+)"', kinds) == [k.value for k in ReportKind]


def test_report_grammar_doc_names_every_field():
    text = (DOCS / "report_grammar.md").read_text(encoding="utf-8")
    for word in (*SECTIONS, *STAGE_COLUMNS, *SUMMARY_KEYS, *INFO_KEYS):
        assert word in text, word


def test_schema_doc_covers_every_kind():
    text = (DOCS / "schema.md").read_text(encoding="utf-8")
    for kind in ReportKind:
        assert f"`{kind.value}`" in text, kind
