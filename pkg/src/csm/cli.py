"""Command-line front end: parse, validate, classify, simulate, render.

Exit codes: 0 success, 1 model-level failures (error diagnostics, strict
simulation failures), 2 usage errors or unreadable files. Diagnostics go to
stderr; machine-readable payloads go to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classifier, dsl, render, simulator, validator
from .diagnostics import Severity
from .model import Model, ModelError


def _read_file(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


class _CliError(Exception):
    def __init__(self, message: str, code: int = 2) -> None:
        super().__init__(message)
        self.code = code


def _load_model(path: str) -> Model:
    try:
        text = _read_file(path)
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc}", 2) from exc
    if path.endswith(".json"):
        result = dsl.parse_json(text, file_label=path)
    else:
        result = dsl.parse_text(text, file_label=path)
    if result.model is None:
        for d in result.diagnostics:
            print(d.render(), file=sys.stderr)
        raise _CliError(f"{path}: model has errors", 1)
    return result.model


def _load_json(path: str, what: str):
    try:
        return json.loads(_read_file(path))
    except OSError as exc:
        raise _CliError(f"cannot read {what} file {path}: {exc}", 2) from exc
    except json.JSONDecodeError as exc:
        raise _CliError(f"malformed {what} file {path}: {exc}", 2) from exc


def _load_seed(path: str) -> list[tuple[str, str]]:
    doc = _load_json(path, "seed")
    if not isinstance(doc, list):
        raise _CliError(f"seed file {path} must be a JSON array", 2)
    seed = []
    for entry in doc:
        try:
            seed.append((str(entry["object"]), str(entry["class"])))
        except (TypeError, KeyError) as exc:
            raise _CliError(
                f"seed entries need 'object' and 'class' keys: {entry!r}", 2
            ) from exc
    return seed


def _load_script(path: str) -> list[tuple[str, str]]:
    doc = _load_json(path, "script")
    if not isinstance(doc, list):
        raise _CliError(f"script file {path} must be a JSON array", 2)
    script = []
    for entry in doc:
        try:
            script.append((str(entry["process"]), str(entry["object"])))
        except (TypeError, KeyError) as exc:
            raise _CliError(
                f"script entries need 'process' and 'object' keys: {entry!r}", 2
            ) from exc
    return script


def _write_output(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_validate(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    diags = validator.validate(model)
    for d in diags:
        print(json.dumps(d.to_dict(), sort_keys=True))
    return 1 if any(d.severity is Severity.ERROR for d in diags) else 0


def _cmd_classify(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    try:
        report = classifier.classify_all(model)
    except validator.InvalidModel as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        sys.stdout.write(report.to_table())
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    seed = _load_seed(args.seed)
    script = _load_script(args.script)
    try:
        events = simulator.run_script(model, seed, script)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for e in events:
        print(json.dumps(e.to_dict(), sort_keys=True))
    failed = any(e.outcome is not simulator.Outcome.FIRED for e in events)
    return 1 if args.strict and failed else 0


def _cmd_explore(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    seed = _load_seed(args.seed)
    queries = []
    if args.query:
        doc = _load_json(args.query, "query")
        if not isinstance(doc, list):
            raise _CliError(f"query file {args.query} must be a JSON array", 2)
        queries = doc
    try:
        summary = simulator.explore(
            model, seed, max_steps=args.max_steps, max_objects=args.max_objects,
            queries=queries,
        )
    except (ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    try:
        if args.format == "dot":
            text = render.to_dot(model, show_privileges=args.show_privileges)
        else:
            text = render.to_mermaid(model)
    except validator.InvalidModel as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_output(text, args.output)
    return 0


def _cmd_fmt(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    sys.stdout.write(dsl.emit_text(model))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csm", description="Collaborative service model toolkit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model against the rule catalog")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("classify", help="infer collaboration levels per role pair")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("simulate", help="run a scripted token trace")
    p.add_argument("file")
    p.add_argument("--seed", required=True, help="JSON array of {object, class}")
    p.add_argument("--script", required=True, help="JSON array of {process, object}")
    p.add_argument(
        "--strict", action="store_true", help="exit 1 when any step fails to fire"
    )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("explore", help="enumerate reachable states and run queries")
    p.add_argument("file")
    p.add_argument("--seed", required=True)
    p.add_argument("--query", help="JSON array of reachability queries")
    p.add_argument("--max-steps", type=int, default=8)
    p.add_argument("--max-objects", type=int, default=2)
    p.set_defaults(func=_cmd_explore)

    p = sub.add_parser("render", help="emit a DOT or Mermaid diagram")
    p.add_argument("file")
    p.add_argument("--format", choices=("dot", "mermaid"), required=True)
    p.add_argument("-o", "--output", help="write to a file instead of stdout")
    p.add_argument("--show-privileges", action="store_true")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("fmt", help="pretty-print the canonical model text")
    p.add_argument("file")
    p.set_defaults(func=_cmd_fmt)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


def entry() -> None:
    raise SystemExit(main())
