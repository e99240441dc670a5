"""Command line entry points: ``nero run | serve | export | fixture``.

Exit codes: 0 success, 2 configuration error, 3 dataset/compatibility error,
4 model transport failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRANSPORT = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nero",
        description="Measure model equivariance by sweeping inputs along transform-group orbits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate a model per a TOML run config")
    p_run.add_argument("-c", "--config", required=True, help="path to the run config")

    p_serve = sub.add_parser("serve", help="serve stored results over the read-only HTTP API")
    p_serve.add_argument(
        "-r", "--results", required=True, nargs="+", help="result files or directories"
    )
    p_serve.add_argument("-a", "--address", default="127.0.0.1:8080", help="host:port to bind")
    p_serve.add_argument("--model-url", default=None, help="endpoint for live detail recompute")
    p_serve.add_argument("--ui", default=None, help="directory of built UI assets to serve at /")

    p_export = sub.add_parser("export", help="export a result to CSV")
    p_export.add_argument("-r", "--result", required=True, help="result file")
    p_export.add_argument("--csv", required=True, help="output directory")

    p_fix = sub.add_parser("fixture", help="generate a synthetic fixture dataset")
    p_fix.add_argument("modality", help="one of the protocol modalities")
    p_fix.add_argument("-o", "--out", required=True, help="output directory")
    p_fix.add_argument("--seed", type=int, default=0)
    return parser


def _build_model(config, dataset, orbit):
    from .modelproto import HttpModel, SyntheticModel

    if config.model_url:
        return HttpModel(
            config.model_url,
            timeout_s=config.timeout_s,
            retries=config.retries,
            max_in_flight=config.concurrency,
        )
    if config.synthetic.kind == "constant":
        from .config import ConfigError

        raise ConfigError("constant models are an in-code test tool; configure oracle/decay/confuser")
    return SyntheticModel(
        config.synthetic,
        config.synthetic_modality or dataset.modality,
        orbit,
        truths=dataset.truths,
        num_classes=dataset.num_classes,
    )


def cmd_run(args) -> int:
    from .config import ConfigError, load_run_config
    from .dataprep import ManifestError, load_dataset
    from .engine import EngineError, run
    from .groups import enumerate_orbit
    from .modelproto import ModelProtocolError
    from .results import save_result

    try:
        config = load_run_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        dataset = load_dataset(config.manifest_path)
        samples = dataset.samples
        if config.subset_class is not None or config.subset_ids is not None:
            wanted_ids = set(config.subset_ids or [s.sample_id for s in samples])
            samples = [
                s
                for s in samples
                if s.sample_id in wanted_ids
                and (config.subset_class is None or s.class_label == config.subset_class)
            ]
            config.notes["subset"] = {
                "class_label": config.subset_class,
                "ids": [s.sample_id for s in samples],
            }
        orbit = enumerate_orbit(config.orbit_spec)
        model = _build_model(config, dataset, orbit)
        config.notes["manifest_path"] = str(config.manifest_path)
        result = run(config, samples, model)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ManifestError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EngineError as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelProtocolError as exc:
        print(f"model transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT

    out_path = config.output_dir / f"{config.run_id}.json"
    save_result(result, out_path)
    _print_summary(result, out_path)
    return EXIT_OK


def _print_summary(result, out_path):
    agg = result.aggregate
    finite = agg[~np.isnan(agg)]
    lo_k = int(np.nanargmin(agg))
    hi_k = int(np.nanargmax(agg))
    print(f"run {result.run_id}: {len(result.records)} samples x {len(result.orbit)} orbit elements")
    print(
        f"aggregate {result.metric_name}: min {finite.min():.6g} at orbit[{lo_k}], "
        f"max {finite.max():.6g} at orbit[{hi_k}]"
    )
    worst = sorted(result.records, key=lambda r: r.variance, reverse=True)[:3]
    names = ", ".join(f"{r.sample_id} (var {r.variance:.3g})" for r in worst)
    print(f"highest-variance samples: {names}")
    print(f"wrote {out_path}")


def cmd_serve(args) -> int:
    from .serve import ResultsServer, RunStore

    host, _, port = args.address.partition(":")
    try:
        store = RunStore([Path(p) for p in args.results], model_url=args.model_url)
    except Exception as exc:
        print(f"cannot load results: {exc}", file=sys.stderr)
        return EXIT_DATA
    if not store.results:
        print("no results found", file=sys.stderr)
        return EXIT_DATA
    server = ResultsServer(store, host=host or "127.0.0.1", port=int(port or 8080), ui_dir=args.ui)
    print(f"serving {len(store.results)} runs on {server.url}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return EXIT_OK


def cmd_export(args) -> int:
    from .results import ResultFormatError, export_csv, load_result

    try:
        result = load_result(args.result)
    except ResultFormatError as exc:
        print(f"cannot read result: {exc}", file=sys.stderr)
        return EXIT_DATA
    records_path, aggregate_path = export_csv(result, args.csv)
    print(f"wrote {records_path} and {aggregate_path}")
    return EXIT_OK


def cmd_fixture(args) -> int:
    from .fixtures import MAKERS, make_fixture

    if args.modality not in MAKERS:
        print(f"modality must be one of {sorted(MAKERS)}", file=sys.stderr)
        return EXIT_CONFIG
    path = make_fixture(args.modality, args.out, seed=args.seed)
    print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "export":
            return cmd_export(args)
        return cmd_fixture(args)
    except KeyboardInterrupt:
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
