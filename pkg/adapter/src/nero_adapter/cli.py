"""``nero-adapter``: serve a module:function predict callable over the protocol."""

from __future__ import annotations

import argparse
import importlib
import sys

from .server import MODALITIES, AdapterConfig, AdapterServer


def load_callable(spec: str):
    module_name, sep, attr = spec.partition(":")
    if not sep or not attr:
        raise ValueError(f"expected module:function, got {spec!r}")
    module = importlib.import_module(module_name)
    fn = getattr(module, attr)
    if not callable(fn):
        raise ValueError(f"{spec!r} is not callable")
    return fn


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nero-adapter",
        description="Expose a predict function as a NERO-protocol model server.",
    )
    parser.add_argument("target", help="predict function as module:function")
    parser.add_argument("--modality", required=True, choices=MODALITIES)
    parser.add_argument("--classes", type=int, default=None, help="class count, if applicable")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=9000)
    parser.add_argument("--batch-limit", type=int, default=32)
    parser.add_argument("--name", default=None, help="model name in the descriptor")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        predict_fn = load_callable(args.target)
    except (ImportError, AttributeError, ValueError) as exc:
        print(f"cannot load predict function: {exc}", file=sys.stderr)
        return 2
    config = AdapterConfig(
        modality=args.modality,
        class_count=args.classes,
        host=args.host,
        port=args.port,
        batch_limit=args.batch_limit,
        name=args.name or args.target,
    )
    server = AdapterServer(predict_fn, config)
    print(f"serving {args.target} ({args.modality}) on {server.url}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
