"""Command-line entry points: serve the HTTP API, or run one layout to a file."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ServiceConfig
from .fixtures import NAMED_FIXTURES
from .layout.engine import build_layout, export_layout_json
from .model import derive_ontology, load_graph
from .preferences import extract_preferences_offline


def _load_document(ref: str) -> dict:
    maker = NAMED_FIXTURES.get(ref)
    if maker is not None:
        return maker()
    return json.loads(Path(ref).read_text(encoding="utf-8"))


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import configure_logging, create_app

    config = ServiceConfig.from_env()
    if args.port:
        config.port = args.port
    if args.data_dir:
        config.data_dir = args.data_dir
    if args.offline:
        config.offline = True
    configure_logging()
    uvicorn.run(create_app(config), host=args.host, port=config.port, log_level="warning")
    return 0


def cmd_layout(args: argparse.Namespace) -> int:
    document = _load_document(args.graph)
    kg = load_graph(document)
    ontology = derive_ontology(kg)
    pref = extract_preferences_offline(args.question, ontology, attributes=kg.attributes_by_type())
    result = build_layout(kg, ontology, pref, seed=args.seed, sigma=args.diversity, budget=args.budget)
    payload = export_layout_json(result)
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
        print(f"wrote {args.out} ({len(payload)} bytes)")
    else:
        print(payload)
    return 0


def cmd_fixture(args: argparse.Namespace) -> int:
    maker = NAMED_FIXTURES.get(args.name)
    if maker is None:
        print(f"unknown fixture {args.name!r}; known: {', '.join(sorted(NAMED_FIXTURES))}", file=sys.stderr)
        return 1
    print(json.dumps(maker(), indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kgscape", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0)
    serve.add_argument("--data-dir", default="")
    serve.add_argument("--offline", action="store_true", help="force deterministic offline mode")
    serve.set_defaults(func=cmd_serve)

    layout = sub.add_parser("layout", help="compute one layout from a question")
    layout.add_argument("--graph", required=True, help="fixture name or path to a graph document")
    layout.add_argument("--question", required=True)
    layout.add_argument("--seed", type=int, default=42)
    layout.add_argument("--diversity", type=float, default=None)
    layout.add_argument("--budget", type=int, default=None)
    layout.add_argument("--out", default="")
    layout.set_defaults(func=cmd_layout)

    fixture = sub.add_parser("fixture", help="print a bundled fixture document")
    fixture.add_argument("name")
    fixture.set_defaults(func=cmd_fixture)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
