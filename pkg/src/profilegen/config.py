"""Run configuration: one TOML document per run, CLI flags override file values."""

from __future__ import annotations

import dataclasses
import datetime as dt
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .common import ConfigError
from .ingest import ConsumptionFactors
from .neural import TrainConfig


@dataclass
class CorpusConfig:
    n_homes: int = 200
    n_days: int = 60
    resolution_minutes: int = 60
    single_missing_rate: float = 0.005
    multi_gap_day_rate: float = 0.01
    invalid_home_rate: float = 0.02
    data_types: tuple[str, ...] = ("load", "pv", "ev")


@dataclass
class IngestConfig:
    n_segments: int = 4
    max_malformed_fraction: float = 0.05
    max_hourly_kwh: float = float("inf")
    max_daily_kwh: float = float("inf")
    motorway_threshold_miles: float = 10.0
    factors: dict = field(default_factory=dict)  # urban/rural/motorway kWh per mile


@dataclass
class EvaluateConfig:
    data_type: str = "load"
    day_type: str = "wd"
    repetitions: int = 10


@dataclass
class GenerateConfig:
    n_homes: int = 5
    n_days: int = 28
    start_date: str = "2013-01-14"
    data_types: tuple[str, ...] = ("load", "pv", "ev")


@dataclass
class PlotConfig:
    data_type: str = "load"
    day_type: str = "wd"
    cluster: int = 0
    band_population: int = 200


@dataclass
class RunConfig:
    """Everything a command needs; see configs/reference.toml for the layout."""

    seed: int = 20130107
    resolution_minutes: int = 60
    raw_dir: Path = Path("runs/raw")
    artifact_dir: Path = Path("runs/artifacts")
    output_dir: Path = Path("runs/output")
    clusters: dict = field(default_factory=lambda: {"load": 4, "ev": 3})
    factor_bins: int = 50
    train: TrainConfig = field(default_factory=TrainConfig)
    min_training_profiles: int = 50
    fill_method: str = "linear"
    fill_mask_fraction: float = 0.05
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    evaluate: EvaluateConfig = field(default_factory=EvaluateConfig)
    generate: GenerateConfig = field(default_factory=GenerateConfig)
    plot: PlotConfig = field(default_factory=PlotConfig)

    def consumption_factors(self) -> ConsumptionFactors:
        """The kWh-per-mile factors must come from the config; there are no defaults."""
        missing = [k for k in ("urban", "rural", "motorway") if k not in self.ingest.factors]
        if missing:
            raise ConfigError(f"ingest.factors.{missing[0]} is required (kWh per mile)")
        try:
            return ConsumptionFactors(
                urban=float(self.ingest.factors["urban"]),
                rural=float(self.ingest.factors["rural"]),
                motorway=float(self.ingest.factors["motorway"]),
                motorway_threshold_miles=self.ingest.motorway_threshold_miles,
                max_hourly_kwh=self.ingest.max_hourly_kwh,
                max_daily_kwh=self.ingest.max_daily_kwh,
            )
        except ValueError as exc:
            raise ConfigError(f"ingest.factors: {exc}") from exc

    def generate_start_date(self) -> dt.date:
        try:
            return dt.date.fromisoformat(self.generate.start_date)
        except ValueError as exc:
            raise ConfigError(f"generate.start_date: {exc}") from exc

    def validate(self) -> None:
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if 1440 % self.resolution_minutes != 0:
            raise ConfigError("resolution_minutes must divide 1440")
        if self.factor_bins < 1:
            raise ConfigError("factor_bins must be >= 1")
        if self.ingest.n_segments < 1:
            raise ConfigError("ingest.n_segments must be >= 1")
        for data_type, k in self.clusters.items():
            if data_type not in ("load", "ev") or int(k) < 1:
                raise ConfigError(f"clusters.{data_type} must be a positive count for load/ev")
        try:
            self.train.validate()
        except ValueError as exc:
            raise ConfigError(f"train: {exc}") from exc

    def to_dict(self) -> dict:
        def unwrap(value):
            if dataclasses.is_dataclass(value) and not isinstance(value, type):
                return {f.name: unwrap(getattr(value, f.name)) for f in dataclasses.fields(value)}
            if isinstance(value, Path):
                return str(value)
            if isinstance(value, tuple):
                return list(value)
            if isinstance(value, dict):
                return {k: unwrap(v) for k, v in value.items()}
            return value

        return unwrap(self)


def _apply_section(target, section: dict, path: str) -> None:
    valid = {f.name: f for f in dataclasses.fields(target)}
    for key, value in section.items():
        if key not in valid:
            raise ConfigError(f"unknown config key {path}{key}")
        current = getattr(target, key)
        if dataclasses.is_dataclass(current) and not isinstance(current, type):
            if not isinstance(value, dict):
                raise ConfigError(f"{path}{key} must be a table")
            _apply_section(current, value, f"{path}{key}.")
        elif isinstance(current, tuple):
            setattr(target, key, tuple(value))
        elif isinstance(current, Path):
            setattr(target, key, Path(value))
        else:
            setattr(target, key, value)


def load_config(
    path: str | Path | None,
    seed: int | None = None,
    out_dir: str | Path | None = None,
) -> RunConfig:
    """Build the run configuration from an optional TOML file plus CLI overrides."""
    cfg = RunConfig()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path, "rb") as fh:
                document = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        # train is frozen; rebuild it from its table rather than mutating
        train_table = document.pop("train", None)
        _apply_section(cfg, document, "")
        if train_table is not None:
            valid = {f.name for f in dataclasses.fields(TrainConfig)}
            unknown = set(train_table) - valid
            if unknown:
                raise ConfigError(f"unknown config key train.{sorted(unknown)[0]}")
            numeric = {
                k: tuple(v) if isinstance(v, list) else v for k, v in train_table.items()
            }
            cfg.train = dataclasses.replace(cfg.train, **numeric)
    if seed is not None:
        cfg.seed = seed
    if out_dir is not None:
        cfg.output_dir = Path(out_dir)
    cfg.validate()
    return cfg
