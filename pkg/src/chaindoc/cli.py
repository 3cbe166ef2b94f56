"""Command-line entry point.

Exit status: 0 on success, 1 when input is rejected (netlist, config,
template, dataflow or expression errors), 2 on runtime failures (singular
systems, store and I/O errors). Diagnostics go to stderr as one line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import mathexpr
from .errors import ChainDocError, ConfigError
from .pipeline import ProjectConfig, check_project, run_workflow
from .store import STATUSES, VIEW_FILES, Store

STORE_ENV = "CHAINDOC_STORE"
DEFAULT_OUTPUT = "chaindoc-out"


def _parse_var(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), mathexpr.parse_number(value.strip())
    except ChainDocError as exc:
        raise argparse.ArgumentTypeError(f"{name}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chaindoc", description="Simulate component chains and generate reports.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a project without solving")
    v.add_argument("config")

    r = sub.add_parser("run", help="run the full workflow")
    r.add_argument("config")
    r.add_argument("--output-dir", help=f"override the config's output_dir (fallback: ./{DEFAULT_OUTPUT})")
    r.add_argument("--store-root", help="submit the report to this store")

    s = sub.add_parser("store", help="manage stored reports")
    s.add_argument("--store-root", default=None, help=f"store directory (default: ${STORE_ENV})")
    ssub = s.add_subparsers(dest="verb", required=True)
    ls = ssub.add_parser("list")
    ls.add_argument("--author")
    ls.add_argument("--doc-type")
    ls.add_argument("--status", choices=STATUSES)
    ls.add_argument("--json", action="store_true", help="print records as JSON")
    g = ssub.add_parser("get")
    g.add_argument("doc_id")
    g.add_argument("--mode", choices=sorted(VIEW_FILES), default="inline")
    g.add_argument("-o", "--output", help="write to a file instead of stdout")
    st = ssub.add_parser("status")
    st.add_argument("doc_id")
    st.add_argument("new_status", choices=STATUSES)
    d = ssub.add_parser("delete")
    d.add_argument("doc_id")
    a = ssub.add_parser("archive")
    a.add_argument("doc_id")
    m = ssub.add_parser("meta", help="edit metadata of a non-archived report")
    m.add_argument("doc_id")
    for key in ("author", "title", "doc-type", "discipline"):
        m.add_argument(f"--{key}")

    e = sub.add_parser("expr", help="math panel")
    esub = e.add_subparsers(dest="verb", required=True)
    ev = esub.add_parser("eval")
    ev.add_argument("expression")
    ev.add_argument("--var", action="append", type=_parse_var, default=[], metavar="NAME=VALUE")
    return p


def _store(args) -> Store:
    root = args.store_root or os.environ.get(STORE_ENV)
    if not root:
        raise ConfigError("no_store", f"pass --store-root or set {STORE_ENV}")
    return Store(root)


def _cmd_validate(args) -> int:
    summary = check_project(ProjectConfig.load(args.config))
    print("OK " + " ".join(f"{k}={v}" for k, v in summary.items()))
    return 0


def _cmd_run(args) -> int:
    config = ProjectConfig.load(args.config)
    out = args.output_dir or (None if config.get("output_dir") else DEFAULT_OUTPUT)
    bundle = run_workflow(config, output_dir=out, store_root=args.store_root)
    print(f"OK {bundle.output_dir}")
    if bundle.doc_id:
        print(f"submitted {bundle.doc_id}")
    return 0


def _cmd_store(args) -> int:
    store = _store(args)
    if args.verb == "list":
        records = store.list(args.author, args.doc_type, args.status)
        if args.json:
            print(json.dumps([r.to_json() for r in records], indent=2, ensure_ascii=False))
        for r in [] if args.json else records:
            print(f"{r.doc_id}  {r.status:<9}  {r.created_utc}  {r.doc_type:<17}  {r.author}  {r.title}")
    elif args.verb == "get":
        text = store.get(args.doc_id, args.mode)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    elif args.verb == "status":
        print(f"{args.doc_id} {store.set_status(args.doc_id, args.new_status).status}")
    elif args.verb == "archive":
        print(f"{args.doc_id} {store.archive(args.doc_id).status}")
    elif args.verb == "delete":
        store.delete(args.doc_id)
        print(f"{args.doc_id} deleted")
    else:
        changes = {k: getattr(args, k) for k in ("author", "title", "doc_type", "discipline")
                   if getattr(args, k) is not None}
        rec = store.update_meta(args.doc_id, changes)
        print(f"{rec.doc_id} revised {rec.revised_utc}")
    return 0


def _cmd_expr(args) -> int:
    env = mathexpr.Environment(dict(args.var))
    print(format(mathexpr.evaluate(args.expression, env), ".15g"))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"validate": _cmd_validate, "run": _cmd_run, "store": _cmd_store, "expr": _cmd_expr}[args.command]
    try:
        return handler(args)
    except ChainDocError as exc:
        print(f"chaindoc: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"chaindoc: error: io_failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
