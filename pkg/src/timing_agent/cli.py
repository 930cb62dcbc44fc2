"""Command-line entry point: ``timing-agent <subcommand> ...``.

Exit status: 0 success, 1 task/bench failure or data error, 2 usage error.
Machine output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .agents import AgentBackend, Task, solve
from .bench import (
    InsufficientData,
    build_multi_suite,
    build_single_suite,
    default_runs,
    make_solver,
    run_bench,
    sensitivity_sweep,
)
from .corpus_gen import GenSpec, SpecInfeasible, generate, load_ground_truth, write_corpus
from .model import Corpus, CornerMode, ReportDb, ReportError
from .query import QueryError, execute, parse_query
from .report_parser import EmptyCorpus, MalformedHeader, parse_corpus
from .schema import read_db_json, write_db_json
from .tdrg import Profile, default_graph, word_counts

log = logging.getLogger("timing_agent")

ENV_PREFIX = "TIMING_AGENT_"

# settings that may come from flags, env, config file or defaults
DEFAULTS: dict[str, Any] = {
    "backend": "scripted",
    "endpoint": None,
    "model": "",
    "temperature": 0.3,
    "top_p": 1.0,
    "max_retries": 3,
    "max_in_flight": 4,
    "tdrg_profile": "proposed",
    "seed": 7,
}
_CASTS = {"temperature": float, "top_p": float, "max_retries": int, "max_in_flight": int, "seed": int}


class UsageError(Exception):
    pass


@dataclass
class Settings:
    values: dict[str, Any]
    sources: dict[str, str]

    def __getitem__(self, key: str) -> Any:
        return self.values[key]


def resolve_settings(args: argparse.Namespace, env: dict[str, str] | None = None) -> Settings:
    """Merge defaults < config file < env < flags."""
    env = dict(os.environ) if env is None else env
    values = dict(DEFAULTS)
    sources = {k: "default" for k in DEFAULTS}
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            with open(cfg_path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise UsageError(f"--config: cannot read {cfg_path}: {exc.strerror}") from None
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"--config: {cfg_path}: {exc}") from None
        data = data.get("timing_agent", data)
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"--config: unknown key {key!r}")
            values[key], sources[key] = value, "file"
    for key in DEFAULTS:
        name = ENV_PREFIX + key.upper()
        if name in env:
            values[key], sources[key] = env[name], "env"
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key], sources[key] = flag, "flag"
    for key, cast in _CASTS.items():
        if values[key] is not None:
            try:
                values[key] = cast(values[key])
            except (TypeError, ValueError):
                raise UsageError(f"{key}: expected {cast.__name__}, got {values[key]!r} (from {sources[key]})") from None
    if values["backend"] not in ("scripted", "llm"):
        raise UsageError(f"--backend must be scripted or llm, got {values['backend']!r}")
    if values["backend"] == "llm" and not values["endpoint"]:
        raise UsageError("--endpoint is required with --backend llm")
    try:
        Profile.parse(str(values["tdrg_profile"]))
    except ValueError as exc:
        raise UsageError(f"--tdrg-profile: {exc}") from None
    return Settings(values, sources)


def backend_from(settings: Settings) -> AgentBackend:
    s = settings.values
    return AgentBackend(
        mode=s["backend"],
        endpoint=s["endpoint"],
        model=s["model"],
        temperature=s["temperature"],
        top_p=s["top_p"],
        max_retries=s["max_retries"],
        max_in_flight=s["max_in_flight"],
    )


def load_corpus(path: str | Path) -> Corpus:
    """Load a corpus from ``.rpt`` report directories or ingested JSON."""
    root = Path(path)
    if not root.is_dir():
        raise UsageError(f"--db: {root} is not a directory")
    subdirs = sorted(p for p in root.iterdir() if p.is_dir())
    if any(any(p.glob("*.rpt")) for p in subdirs):
        return parse_corpus(root)
    dbs: dict[CornerMode, ReportDb] = {}
    for sub in subdirs:
        if any(sub.glob("*.json")):
            db = read_db_json(sub)
            dbs[db.corner_mode] = db
    if not dbs:
        raise EmptyCorpus(f"no report directories under {root}")
    return Corpus(dbs, {"source": str(root)})


def _emit(obj: Any, as_json: bool, human: str) -> None:
    if as_json:
        sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(human.rstrip("\n") + "\n")


def _csv_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


# --- subcommands -------------------------------------------------------------------


def cmd_gen_corpus(args: argparse.Namespace, settings: Settings) -> int:
    spec = GenSpec(
        seed=settings["seed"],
        corners=_csv_list(args.corners),
        modes=_csv_list(args.modes),
        paths_per_report=args.paths,
    )
    corpus, truth = generate(spec)
    out = write_corpus(corpus, truth, args.out)
    info = {"out": str(out), "corner_modes": [str(cm) for cm in corpus.corner_modes], "seed": spec.seed}
    _emit(info, args.json, f"wrote {len(corpus.corner_modes)} corner/modes to {out}")
    return 0


def cmd_ingest(args: argparse.Namespace, settings: Settings) -> int:
    corpus = parse_corpus(args.reports)
    written = []
    if args.out:
        for db in corpus.databases.values():
            written += [str(p) for p in write_db_json(db, Path(args.out))]
    info = dict(corpus.manifest, written=written)
    for d in corpus.manifest.get("diagnostics", []):
        print(d, file=sys.stderr)
    _emit(info, args.json, f"loaded {', '.join(str(cm) for cm in corpus.corner_modes)}; wrote {len(written)} files")
    return 0


def cmd_query(args: argparse.Namespace, settings: Settings) -> int:
    corpus = load_corpus(args.db)
    try:
        db = corpus.db(args.cm)
    except (KeyError, ValueError):
        raise UsageError(f"--cm: {args.cm!r} not in corpus ({', '.join(map(str, corpus.corner_modes))})") from None
    program = parse_query(args.program)
    result = execute(program, db)
    out = result.to_json()
    _emit(out, args.json, json.dumps(out, sort_keys=True, indent=2))
    return 0


def _read_task(path: str) -> Task:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"--task-file: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"--task-file: invalid JSON: {exc}") from None
    try:
        return Task.from_json(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"--task-file: {exc}") from None


def cmd_ask(args: argparse.Namespace, settings: Settings) -> int:
    task = _read_task(args.task_file)
    corpus = load_corpus(args.db)
    run = solve(task, corpus, backend_from(settings), profile=settings["tdrg_profile"], with_examples=args.with_examples)
    sys.stdout.write(run.dumps() + "\n")
    if not args.json:
        print(f"[{run.status}] {run.prose or run.reason}", file=sys.stderr)
    return 0 if run.status == "answered" else 1


def _bench_inputs(args: argparse.Namespace, settings: Settings) -> tuple[Corpus, Any]:
    if args.db:
        corpus = load_corpus(args.db)
        gt = Path(args.db) / "ground_truth.json"
        truth = load_ground_truth(gt) if gt.exists() else None
        return corpus, truth
    spec = GenSpec(seed=settings["seed"], paths_per_report=args.paths)
    return generate(spec)


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    corpus, truth = _bench_inputs(args, settings)
    backend = backend_from(settings)
    runs = args.runs or default_runs(backend)
    profile = Profile.parse(settings["tdrg_profile"])
    meta = {"seed": settings["seed"], "backend": backend.describe(), "tdrg_profile": profile.value}
    if args.suite in ("multi", "sensitivity") and truth is None:
        raise InsufficientData("multi-report suites need ground_truth.json next to the reports")
    if args.suite == "single":
        suite = build_single_suite(corpus, truth, seed=settings["seed"])
    else:
        suite = build_multi_suite(corpus, truth)
    if args.suite == "sensitivity":
        result = sensitivity_sweep(suite, corpus, backend, runs=runs)
        result["meta"] = meta
        text = json.dumps(result, sort_keys=True, indent=2) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        rows = [f"{p:>9}  {r['without_examples']:6.1f}  {r['with_examples']:6.1f}" for p, r in result["matrix"].items()]
        _emit(result, args.json, "profile   no-ex   ex\n" + "\n".join(rows))
        return 0
    report = run_bench(suite, make_solver(corpus, backend, profile=profile), name=args.suite, runs=runs, meta=meta)
    if args.out:
        Path(args.out).write_text(report.dumps(), encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    body = report.to_json()
    lines = [f"{cat:>22}  {t['passed']:>5}/{t['total']:<3} {t['pass_rate']:6.1f}%" for cat, t in report.categories.items()]
    lines.append(f"overall pass_rate {report.pass_rate:.1f}%")
    if "multi_kind" in body:
        lines.append(f"multi-kind pass_rate {body['multi_kind']['pass_rate']:.1f}%")
    _emit(body if not args.out else {k: body[k] for k in ("suite", "categories", "overall", "meta")}, args.json, "\n".join(lines))
    if args.min_pass_rate is not None and report.pass_rate < args.min_pass_rate:
        return 1
    return 0


def cmd_tdrg(args: argparse.Namespace, settings: Settings) -> int:
    profile = Profile.parse(args.profile or settings["tdrg_profile"])
    graph = default_graph(profile)
    doc = graph.to_json()
    counts = word_counts(profile)
    lines = [f"profile {profile.value}: {len(graph.nodes)} nodes, {len(graph.edges)} edges"]
    for e in graph.edges:
        lines.append(f"  {e.source.value} -> {e.target.value}: {e.relation}")
    lines.append("average words: " + json.dumps(counts, sort_keys=True))
    _emit(doc, args.json, "\n".join(lines))
    return 0


# --- parser ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
    common.add_argument("--config", help="TOML config file")
    common.add_argument("-v", "--verbose", action="store_true")

    agent = argparse.ArgumentParser(add_help=False)
    agent.add_argument("--backend", choices=["scripted", "llm"])
    agent.add_argument("--endpoint", help="chat-completions endpoint URL")
    agent.add_argument("--model")
    agent.add_argument("--temperature", type=float)
    agent.add_argument("--top-p", dest="top_p", type=float)
    agent.add_argument("--max-retries", dest="max_retries", type=int)
    agent.add_argument("--max-in-flight", dest="max_in_flight", type=int)
    agent.add_argument("--tdrg-profile", dest="tdrg_profile")

    p = _Parser(prog="timing-agent", description="Timing report analysis agent")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen-corpus", parents=[common], help="generate a seeded synthetic corpus")
    g.add_argument("--seed", type=int)
    g.add_argument("--corners", default="FF,SS,TT")
    g.add_argument("--modes", default="read,write")
    g.add_argument("--paths", type=int, default=200)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_corpus)

    i = sub.add_parser("ingest", parents=[common], help="parse .rpt files into canonical JSON")
    i.add_argument("--reports", required=True)
    i.add_argument("--out")
    i.set_defaults(func=cmd_ingest)

    q = sub.add_parser("query", parents=[common], help="run one query program")
    q.add_argument("--db", required=True)
    q.add_argument("--cm", required=True, help="corner/mode, e.g. TT_read")
    q.add_argument("program")
    q.set_defaults(func=cmd_query)

    a = sub.add_parser("ask", parents=[common, agent], help="solve a task file")
    a.add_argument("--db", required=True)
    a.add_argument("--task-file", required=True)
    a.add_argument("--with-examples", action="store_true", help="show example plans to the planner")
    a.set_defaults(func=cmd_ask)

    b = sub.add_parser("bench", parents=[common, agent], help="run a benchmark suite")
    b.add_argument("--suite", choices=["single", "multi", "sensitivity"], required=True)
    b.add_argument("--seed", type=int)
    b.add_argument("--db", help="corpus directory (default: generate from --seed)")
    b.add_argument("--paths", type=int, default=200, help="paths per report when generating")
    b.add_argument("--runs", type=int, help="runs per case (default 1 scripted, 3 llm)")
    b.add_argument("--out")
    b.add_argument("--csv")
    b.add_argument("--min-pass-rate", type=float, help="exit 1 when the overall pass rate is lower")
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("tdrg", help="inspect the report relation graph")
    tsub = t.add_subparsers(dest="tdrg_command", parser_class=_Parser)
    ts = tsub.add_parser("show", parents=[common])
    ts.add_argument("--profile")
    ts.set_defaults(func=cmd_tdrg)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_usage(sys.stderr)
            raise UsageError("missing subcommand")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
        settings = resolve_settings(args)
        if args.func is cmd_bench and args.runs is not None and args.runs < 1:
            raise UsageError("--runs must be >= 1")
        return args.func(args, settings)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (QueryError, ReportError, EmptyCorpus, MalformedHeader, SpecInfeasible, InsufficientData, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
