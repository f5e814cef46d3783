"""Command line driver for the pipeline: adapt, ingest, extract, query, serve.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors. Every
failure prints a single line starting with ``error:`` to stderr so scripts
can grep for it.
"""

from __future__ import annotations

import argparse
import json
import sys

from ._version import __version__
from .adapters import AdapterError, AdapterReport, adapt_issue_export, adapt_vcs_log
from .corpus import CorpusFormatError, parse_revisions, parse_tasks
from .extract import (
    EXTRACTION_ORDER,
    ExtractionDependencyError,
    ExtractionReport,
    run_extraction,
)
from .identity import IdentityMap, load_identity_map
from .matching import MatchConfig
from .query import EntityNotFoundError, FOCUS_KINDS, QueryConfig, context_for
from .store import ContextStore, RelationKind, StoreError, load_snapshot

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2

_RUNTIME_ERRORS = (
    AdapterError,
    CorpusFormatError,
    StoreError,
    ExtractionDependencyError,
    EntityNotFoundError,
    ValueError,
    OSError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _load_file_config(args) -> dict:
    if not args.config:
        return {}
    with open(args.config, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ValueError(f"config file {args.config} must hold a JSON object")
    return obj


def _add_match_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("matching options")
    g.add_argument(
        "--case-sensitive",
        dest="case_sensitive",
        action="store_const",
        const=True,
        default=None,
        help="match names exactly (default)",
    )
    g.add_argument(
        "--case-insensitive",
        dest="case_sensitive",
        action="store_const",
        const=False,
        help="ignore case when matching names and id patterns",
    )
    g.add_argument("--min-class-name-length", type=int, default=None, metavar="N")
    g.add_argument(
        "--id-pattern",
        action="append",
        default=None,
        metavar="TPL",
        help='id pattern template with an <id> placeholder, e.g. "bug <id>";'
        " repeat to set several (replaces the default list)",
    )
    g.add_argument("--bare-id-min-digits", type=int, default=None, metavar="N")
    g.add_argument("--max-changeset-size", type=int, default=None, metavar="N")
    g.add_argument("--cochange-min-weight", type=int, default=None, metavar="N")
    g.add_argument(
        "--source-extension",
        action="append",
        default=None,
        metavar="EXT",
        help="extension (without dot) treated as source code; repeatable",
    )
    g.add_argument(
        "--source-root-marker",
        action="append",
        default=None,
        metavar="PATH",
        help='package root marker such as "src/main/java"; repeatable',
    )


def _match_config(args, file_cfg: dict) -> MatchConfig:
    obj = MatchConfig().to_obj()
    overlay = file_cfg.get("match", {})
    if not isinstance(overlay, dict):
        raise ValueError('config key "match" must be an object')
    obj.update(overlay)
    flags = {
        "case_sensitive": getattr(args, "case_sensitive", None),
        "min_class_name_length": getattr(args, "min_class_name_length", None),
        "id_patterns": getattr(args, "id_pattern", None),
        "bare_id_min_digits": getattr(args, "bare_id_min_digits", None),
        "max_changeset_size": getattr(args, "max_changeset_size", None),
        "cochange_min_weight": getattr(args, "cochange_min_weight", None),
        "source_extensions": getattr(args, "source_extension", None),
        "source_root_markers": getattr(args, "source_root_marker", None),
    }
    for key, value in flags.items():
        if value is not None:
            obj[key] = value
    return MatchConfig.from_obj(obj)


def _query_config(file_cfg: dict) -> QueryConfig:
    overlay = file_cfg.get("query", {})
    if not isinstance(overlay, dict):
        raise ValueError('config key "query" must be an object')
    return QueryConfig.from_obj(overlay)


def _print_adapter_report(report: AdapterReport) -> None:
    print(
        f"emitted {report.records_emitted} records,"
        f" dropped {report.records_dropped},"
        f" skipped {report.paths_skipped} paths",
        file=sys.stderr,
    )
    for message in report.warnings:
        print(f"warning: {message}", file=sys.stderr)


def cmd_adapt(args) -> int:
    source = args.vcs_log or args.issue_xml
    with open(source, "r", encoding="utf-8") as fh:
        if args.vcs_log:
            jsonl, report = adapt_vcs_log(fh)
        else:
            jsonl, report = adapt_issue_export(fh)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(jsonl)
    _print_adapter_report(report)
    return EXIT_OK


def cmd_ingest(args) -> int:
    if not args.revisions and not args.tasks:
        args.parser.error("at least one of --revisions or --tasks is required")
    file_cfg = _load_file_config(args)
    cfg = _match_config(args, file_cfg)

    revisions = []
    if args.revisions:
        with open(args.revisions, "r", encoding="utf-8") as fh:
            try:
                revisions = parse_revisions(fh)
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{args.revisions}: {exc}") from exc
    tasks = []
    if args.tasks:
        with open(args.tasks, "r", encoding="utf-8") as fh:
            try:
                tasks = parse_tasks(fh)
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{args.tasks}: {exc}") from exc
    identity = load_identity_map(args.identity) if args.identity else IdentityMap()

    store = ContextStore()
    report = store.put_entities(revisions, tasks, identity, cfg)
    store.save_snapshot(args.out)
    _say(
        args,
        f"ingested {report.revisions} revisions, {report.tasks} tasks,"
        f" {report.developers} developers, {report.resources} resources"
        f" -> {args.out}",
    )
    return EXIT_OK


def _report_rows(report: ExtractionReport) -> list[tuple[str, int]]:
    obj = report.to_obj()
    return [(kind.value, obj[kind.value]) for kind in EXTRACTION_ORDER]


def _print_count_table(rows: list[tuple[str, int]], left: str, right: str) -> None:
    width = max(len(left), *(len(name) for name, _ in rows))
    print(f"{left:<{width}}  {right:>7}")
    print(f"{'-' * width}  {'-' * 7}")
    for name, count in rows:
        print(f"{name:<{width}}  {count:>7}")


def cmd_extract(args) -> int:
    file_cfg = _load_file_config(args)
    cfg = _match_config(args, file_cfg)
    algorithms = None
    if args.algorithms and args.algorithms != "all":
        names = [part.strip() for part in args.algorithms.split(",") if part.strip()]
        valid = {kind.value: kind for kind in EXTRACTION_ORDER}
        unknown = [name for name in names if name not in valid]
        if unknown:
            choices = ", ".join(valid)
            raise ValueError(
                f"unknown algorithm(s) {', '.join(unknown)}; choose from {choices} or all"
            )
        algorithms = {valid[name] for name in names}

    store = load_snapshot(args.snapshot)
    report = run_extraction(store, cfg, algorithms)
    store.save_snapshot(args.snapshot)
    if args.format == "json":
        print(json.dumps(report.to_obj(), indent=2, sort_keys=True))
    elif not args.quiet:
        _print_count_table(_report_rows(report), "relation", "count")
        print(f"config {report.config_hash}")
    return EXIT_OK


def _print_view_table(view) -> None:
    print(f"context of {view.focus_kind} {view.focus_id} (top {view.k})")
    for section_name, entries in (
        ("developers", view.developers),
        ("resources", view.resources),
        ("tasks", view.tasks),
    ):
        print(f"{section_name}:")
        if not entries:
            print("  (none)")
            continue
        for entry in entries:
            label = entry.label
            if label == entry.entity_id:
                label = ""
            line = f"  {entry.score:>8.1f}  {entry.entity_id}"
            if label:
                line += f"  {label}"
            if len(line) > 100:
                line = line[:97] + "..."
            print(line)


def cmd_query(args) -> int:
    file_cfg = _load_file_config(args)
    qcfg = _query_config(file_cfg)
    store = load_snapshot(args.snapshot)
    view = context_for(store, args.kind, args.id, args.k, qcfg)
    if args.format == "json":
        print(json.dumps(view.to_obj(), indent=2, sort_keys=True))
    else:
        _print_view_table(view)
    return EXIT_OK


def cmd_stats(args) -> int:
    store = load_snapshot(args.snapshot)
    extraction = ExtractionReport.from_store(store)
    if args.format == "json":
        obj = {
            "entities": store.entity_counts(),
            "relations": store.relation_counts(),
            "extraction": extraction.to_obj(),
        }
        print(json.dumps(obj, indent=2, sort_keys=True))
        return EXIT_OK
    entity_rows = sorted(store.entity_counts().items())
    _print_count_table(entity_rows, "entities", "count")
    print()
    relation_counts = store.relation_counts()
    relation_rows = [(kind.value, relation_counts[kind.value]) for kind in RelationKind]
    _print_count_table(relation_rows, "relation", "count")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    file_cfg = _load_file_config(args)
    qcfg = _query_config(file_cfg)
    _say(args, f"serving {args.snapshot} on http://{args.bind}:{args.port}")
    serve(
        args.snapshot,
        bind=args.bind,
        port=args.port,
        enable_cors=not args.no_cors,
        ui_dir=args.ui,
        qcfg=qcfg,
        quiet=args.quiet,
    )
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="devcontext", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", metavar="FILE", help="JSON config file")
    parser.add_argument("--quiet", action="store_true", help="suppress chatter")
    # The same globals are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering values already parsed at the root.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", default=argparse.SUPPRESS)
    common.add_argument(
        "--quiet", action="store_true", default=argparse.SUPPRESS
    )
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add_parser(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, parents=[common])

    p = add_parser("adapt", "convert raw exports to canonical JSONL")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--vcs-log", metavar="FILE")
    src.add_argument("--issue-xml", metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=cmd_adapt, parser=p)

    p = add_parser("ingest", "load canonical JSONL into a snapshot")
    p.add_argument("--revisions", metavar="FILE")
    p.add_argument("--tasks", metavar="FILE")
    p.add_argument("--identity", metavar="FILE", help="developer identity map JSON")
    p.add_argument("--out", required=True, metavar="FILE", help="snapshot to write")
    _add_match_flags(p)
    p.set_defaults(func=cmd_ingest, parser=p)

    p = add_parser("extract", "compute relations into a snapshot")
    p.add_argument("--snapshot", required=True, metavar="FILE")
    p.add_argument(
        "--algorithms",
        default="all",
        metavar="CSV",
        help="comma-separated algorithm names, or all (default)",
    )
    p.add_argument("--format", choices=("table", "json"), default="table")
    _add_match_flags(p)
    p.set_defaults(func=cmd_extract, parser=p)

    p = add_parser("query", "show the context of one entity")
    p.add_argument("kind", choices=FOCUS_KINDS)
    p.add_argument("id")
    p.add_argument("--snapshot", required=True, metavar="FILE")
    p.add_argument("--k", type=int, default=10, help="entries per section")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_query, parser=p)

    p = add_parser("serve", "serve a snapshot over HTTP")
    p.add_argument("--snapshot", required=True, metavar="FILE")
    p.add_argument("--port", type=int, default=7878)
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--no-cors", action="store_true", help="disable CORS headers")
    p.add_argument("--ui", metavar="DIR", help="also serve a static UI build from DIR")
    p.set_defaults(func=cmd_serve, parser=p)

    p = add_parser("stats", "print entity and relation counts")
    p.add_argument("--snapshot", required=True, metavar="FILE")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_stats, parser=p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
