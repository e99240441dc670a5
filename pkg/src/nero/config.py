"""Run configuration: a TOML file with nested tables, validated up front.

Schema (see README for a complete example):

    [run]      id, output_dir
    [dataset]  manifest
    [orbit]    group + discretization keys
    [metric]   name
    [truth]    mode
    [model]    url | [model.synthetic] kind/floor/radius/..., plus
               batch_size, concurrency, retries, timeout_s
    [subset]   class_label | ids            (optional)

The ``NERO_MODEL_URL`` environment variable overrides the endpoint.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .groups import GROUP_KINDS, OrbitSpec
from .metrics import METRIC_NAMES
from .modelproto import MODALITIES, SyntheticModelSpec


class ConfigError(ValueError):
    """Unusable run configuration."""


@dataclass(frozen=True)
class RunConfig:
    run_id: str
    manifest_path: Path
    orbit_spec: OrbitSpec
    metric_name: str
    truth_mode: str
    output_dir: Path
    model_url: Optional[str] = None
    synthetic: Optional[SyntheticModelSpec] = None
    synthetic_modality: Optional[str] = None
    batch_size: int = 16
    concurrency: int = 4
    retries: int = 2
    timeout_s: float = 10.0
    subset_class: Optional[int] = None
    subset_ids: Optional[tuple[str, ...]] = None
    notes: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.run_id:
            raise ConfigError("run id must be nonempty")
        if not self.manifest_path.exists():
            raise ConfigError(f"dataset manifest not found: {self.manifest_path}")
        if self.metric_name not in METRIC_NAMES:
            raise ConfigError(f"metric must be one of {METRIC_NAMES}, got {self.metric_name!r}")
        if self.truth_mode not in ("ground_truth", "consensus"):
            raise ConfigError(f"truth mode must be ground_truth or consensus, got {self.truth_mode!r}")
        if self.model_url is None and self.synthetic is None:
            raise ConfigError("configure either a model url or a synthetic model")
        if self.synthetic_modality is not None and self.synthetic_modality not in MODALITIES:
            raise ConfigError(f"synthetic modality must be one of {MODALITIES}")
        if self.batch_size < 1 or self.concurrency < 1:
            raise ConfigError("batch size and concurrency must be >= 1")
        if self.retries < 0 or self.timeout_s <= 0:
            raise ConfigError("retries must be >= 0 and timeout positive")
        try:
            self.orbit_spec.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _table(raw: dict, name: str) -> dict:
    value = raw.get(name)
    if value is None:
        raise ConfigError(f"missing [{name}] table")
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def load_run_config(path) -> RunConfig:
    """Parse, resolve paths relative to the config file, and validate."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error in {path}: {exc}") from exc

    base = path.parent
    run = _table(raw, "run")
    dataset = _table(raw, "dataset")
    orbit = _table(raw, "orbit")
    metric = _table(raw, "metric")
    truth = raw.get("truth", {"mode": "ground_truth"})
    model = _table(raw, "model")
    subset = raw.get("subset", {})

    try:
        group = orbit["group"]
        if group not in GROUP_KINDS:
            raise ConfigError(f"orbit group must be one of {GROUP_KINDS}, got {group!r}")
        spec_kwargs = {
            key: orbit[key]
            for key in (
                "rotation_step_deg",
                "shift_extent",
                "shift_stride",
                "axis_angle_step_deg",
                "rot_angle_step_deg",
            )
            if key in orbit
        }
        orbit_spec = OrbitSpec(kind=group, **spec_kwargs)

        synthetic = None
        synthetic_modality = None
        if "synthetic" in model:
            syn = model["synthetic"]
            synthetic_modality = syn.get("modality")
            synthetic = SyntheticModelSpec(
                kind=syn.get("kind", "oracle"),
                floor=syn.get("floor", 0.0),
                radius=syn.get("radius", 1.0),
                confusion_pairs=tuple(
                    (int(a), int(b)) for a, b in syn.get("confusion_pairs", [])
                ),
                confusion_threshold_deg=syn.get("confusion_threshold_deg", 90.0),
            )

        model_url = os.environ.get("NERO_MODEL_URL") or model.get("url")

        config = RunConfig(
            run_id=str(run["id"]),
            manifest_path=(base / dataset["manifest"]).resolve(),
            orbit_spec=orbit_spec,
            metric_name=metric["name"],
            truth_mode=truth.get("mode", "ground_truth"),
            output_dir=(base / run.get("output_dir", "results")).resolve(),
            model_url=model_url,
            synthetic=synthetic,
            synthetic_modality=synthetic_modality,
            batch_size=int(model.get("batch_size", 16)),
            concurrency=int(model.get("concurrency", 4)),
            retries=int(model.get("retries", 2)),
            timeout_s=float(model.get("timeout_s", 10.0)),
            subset_class=subset.get("class_label"),
            subset_ids=tuple(subset["ids"]) if "ids" in subset else None,
            notes={"config_path": str(path)},
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    config.validate()
    return config
