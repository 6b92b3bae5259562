"""Deterministic synthetic raw corpus: meter readings, trip diaries, ground truth.

Stands in for licensed source data so every downstream mechanism can be
verified against known archetypes, factor dynamics and injected defects.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .common import format_rfc3339, steps_per_day
from .ingest import HOMES_HEADER, METER_HEADER, TRIP_HEADER

DEFAULT_START_DATE = dt.date(2013, 1, 7)  # a Monday


@dataclass(frozen=True)
class Archetype:
    """Ground-truth daily behaviour template for one data type.

    ``shape`` is a relative within-day profile (any positive scale); daily
    totals follow an AR(1) process in log space around ``factor_mean`` with
    coefficient ``factor_rho`` and innovation scale ``factor_sigma``;
    ``shape_noise`` is the per-step multiplicative log-normal sigma.
    """

    name: str
    shape: tuple[float, ...]
    factor_mean: float
    factor_rho: float
    factor_sigma: float
    shape_noise: float = 0.15
    no_travel_prob: float = 0.0  # trips only

    def validate(self) -> None:
        if len(self.shape) < 2 or any(s < 0 for s in self.shape) or sum(self.shape) <= 0:
            raise ValueError(f"archetype {self.name}: shape must be nonnegative with positive sum")
        if not 0.0 <= self.factor_rho < 1.0:
            raise ValueError(f"archetype {self.name}: factor_rho must lie in [0, 1)")
        if self.factor_mean <= 0 or self.factor_sigma < 0 or self.shape_noise < 0:
            raise ValueError(f"archetype {self.name}: scales must be positive")
        if not 0.0 <= self.no_travel_prob < 1.0:
            raise ValueError(f"archetype {self.name}: no_travel_prob must lie in [0, 1)")


@dataclass(frozen=True)
class CorpusSpec:
    """Everything that determines a corpus; equal spec + seed means equal bytes."""

    n_homes: int
    n_days: int
    resolution_minutes: int
    archetypes: dict[str, tuple[Archetype, ...]]
    single_missing_rate: float = 0.0
    multi_gap_day_rate: float = 0.0
    invalid_home_rate: float = 0.0
    seed: int = 0
    start_date: dt.date = DEFAULT_START_DATE

    def validate(self) -> None:
        if self.n_homes < 1:
            raise ValueError("n_homes must be >= 1")
        if self.n_days < 1:
            raise ValueError("n_days must be >= 1")
        if 1440 % self.resolution_minutes != 0:
            raise ValueError("resolution_minutes must divide 1440")
        for name in ("single_missing_rate", "multi_gap_day_rate", "invalid_home_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not self.archetypes:
            raise ValueError("archetypes must name at least one data type")
        for data_type, archs in self.archetypes.items():
            if data_type not in ("load", "pv", "ev"):
                raise ValueError(f"archetypes: unknown data type {data_type!r}")
            if not archs:
                raise ValueError(f"archetypes[{data_type}] must be nonempty")
            t = steps_per_day(self.resolution_minutes)
            for arch in archs:
                arch.validate()
                if len(arch.shape) != t:
                    raise ValueError(
                        f"archetype {arch.name}: shape length {len(arch.shape)} != {t} steps"
                    )


@dataclass
class CorpusFiles:
    out_dir: Path
    meter_paths: dict[str, Path]
    trips_path: Path | None
    homes_path: Path
    labels_path: Path
    labels: dict


def _ar1_log_factors(arch: Archetype, n_days: int, rng: np.random.Generator) -> np.ndarray:
    mu = math.log(arch.factor_mean)
    x = np.empty(n_days)
    stationary_sd = arch.factor_sigma / math.sqrt(1.0 - arch.factor_rho**2) if arch.factor_sigma > 0 else 0.0
    x[0] = mu + stationary_sd * rng.standard_normal()
    for d in range(1, n_days):
        x[d] = mu + arch.factor_rho * (x[d - 1] - mu) + arch.factor_sigma * rng.standard_normal()
    return np.exp(x)


def _noisy_unit_shape(arch: Archetype, rng: np.random.Generator) -> np.ndarray:
    base = np.asarray(arch.shape, dtype=float)
    noisy = base * np.exp(arch.shape_noise * rng.standard_normal(len(base)))
    return noisy / noisy.sum()


def _driving_runs(shape: tuple[float, ...]) -> list[tuple[int, int, float]]:
    """Contiguous positive runs of a trip template: (start step, length, mass share)."""
    values = np.asarray(shape, dtype=float)
    total = values.sum()
    runs: list[tuple[int, int, float]] = []
    start = None
    for t, v in enumerate(values):
        if v > 0 and start is None:
            start = t
        elif v <= 0 and start is not None:
            runs.append((start, t - start, float(values[start:t].sum() / total)))
            start = None
    if start is not None:
        runs.append((start, len(values) - start, float(values[start:].sum() / total)))
    return runs


def _inject_defects(
    values: np.ndarray,
    spec: CorpusSpec,
    rng: np.random.Generator,
) -> list[int]:
    """Mask points per the defect rates; returns sorted masked step indices."""
    t = len(values)
    masked: set[int] = set()
    if spec.single_missing_rate > 0:
        hits = rng.random(t) < spec.single_missing_rate
        masked.update(np.flatnonzero(hits).tolist())
    if spec.multi_gap_day_rate > 0 and rng.random() < spec.multi_gap_day_rate:
        length = 2 + int(rng.integers(0, 2))  # 2 or 3 consecutive points
        start = int(rng.integers(0, t - length + 1))
        masked.update(range(start, start + length))
    return sorted(masked)


def synth_corpus(spec: CorpusSpec, out_dir: str | Path) -> CorpusFiles:
    """Write the corpus CSVs plus the ground-truth label sidecar.

    Emitted files use exactly the ingestion schemas. The sidecar records, per
    home-day and data type, the archetype, the true daily factor and every
    injected defect position, plus emitted record counts and the homes whose
    validity range was left unconfirmable.
    """
    spec.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    t_steps = steps_per_day(spec.resolution_minutes)
    res = spec.resolution_minutes
    dates = [spec.start_date + dt.timedelta(days=d) for d in range(spec.n_days)]
    home_ids = [f"h{i:04d}" for i in range(spec.n_homes)]
    meter_types = [d for d in ("load", "pv") if d in spec.archetypes]
    has_ev = "ev" in spec.archetypes

    records: list[dict] = []
    invalid_homes: list[str] = []
    emitted_counts = {d: 0 for d in meter_types}
    if has_ev:
        emitted_counts["trips"] = 0
    home_meta: dict[str, dict] = {}

    meter_rows: dict[str, list[str]] = {d: [] for d in meter_types}
    trip_rows: list[str] = []
    homes_rows: list[str] = []

    valid_start = dt.datetime.combine(spec.start_date, dt.time(0), tzinfo=dt.timezone.utc)
    valid_end = valid_start + dt.timedelta(days=spec.n_days)

    for home_id in home_ids:
        invalid = rng.random() < spec.invalid_home_rate
        if invalid:
            invalid_homes.append(home_id)
            homes_rows.append(f"{home_id},{format_rfc3339(valid_start)},,\n")
        else:
            homes_rows.append(
                f"{home_id},{format_rfc3339(valid_start)},{format_rfc3339(valid_end)},{float(spec.n_days)!r}\n"
            )
        area = "urban" if rng.random() < 0.7 else "rural"
        home_meta[home_id] = {"area_type": area, "archetypes": {}}

        for data_type in meter_types:
            archs = spec.archetypes[data_type]
            arch_id = int(rng.integers(len(archs)))
            arch = archs[arch_id]
            home_meta[home_id]["archetypes"][data_type] = arch_id
            factors = _ar1_log_factors(arch, spec.n_days, rng)
            for day_idx, date in enumerate(dates):
                values = factors[day_idx] * _noisy_unit_shape(arch, rng)
                defects = _inject_defects(values, spec, rng)
                defect_set = set(defects)
                midnight = dt.datetime.combine(date, dt.time(0), tzinfo=dt.timezone.utc)
                for t in range(t_steps):
                    if t in defect_set:
                        continue
                    stamp = midnight + dt.timedelta(minutes=t * res)
                    meter_rows[data_type].append(
                        f"{home_id},{format_rfc3339(stamp)},{float(values[t])!r}\n"
                    )
                    emitted_counts[data_type] += 1
                records.append(
                    {
                        "home_id": home_id,
                        "date": date.isoformat(),
                        "data_type": data_type,
                        "archetype_id": arch_id,
                        "factor": float(factors[day_idx]),
                        "defect_positions": defects,
                    }
                )

        if has_ev:
            archs = spec.archetypes["ev"]
            arch_id = int(rng.integers(len(archs)))
            arch = archs[arch_id]
            home_meta[home_id]["archetypes"]["ev"] = arch_id
            runs = _driving_runs(arch.shape)
            miles = _ar1_log_factors(arch, spec.n_days, rng)
            for day_idx, date in enumerate(dates):
                if rng.random() < arch.no_travel_prob:
                    records.append(
                        {
                            "home_id": home_id,
                            "date": date.isoformat(),
                            "data_type": "ev",
                            "archetype_id": arch_id,
                            "factor": 0.0,
                            "defect_positions": [],
                        }
                    )
                    continue
                shares = np.array([r[2] for r in runs])
                shares = shares * np.exp(arch.shape_noise * rng.standard_normal(len(shares)))
                shares = shares / shares.sum()
                total_miles = float(miles[day_idx])
                midnight = dt.datetime.combine(date, dt.time(0), tzinfo=dt.timezone.utc)
                for run_idx, (start_step, length, _) in enumerate(runs):
                    distance = total_miles * float(shares[run_idx])
                    start = midnight + dt.timedelta(minutes=start_step * res)
                    duration = float(length * res)
                    if len(runs) == 1:
                        origin, destination = 1, 1
                    elif run_idx == 0:
                        origin, destination = 1, 0
                    elif run_idx == len(runs) - 1:
                        origin, destination = 0, 1
                    else:
                        origin, destination = 0, 0
                    trip_rows.append(
                        f"{home_id},{format_rfc3339(start)},{duration!r},{distance!r},"
                        f"{origin},{destination},{area}\n"
                    )
                    emitted_counts["trips"] += 1
                records.append(
                    {
                        "home_id": home_id,
                        "date": date.isoformat(),
                        "data_type": "ev",
                        "archetype_id": arch_id,
                        "factor": total_miles,
                        "defect_positions": [],
                    }
                )

    meter_paths: dict[str, Path] = {}
    for data_type in meter_types:
        path = out / f"{data_type}.csv"
        with open(path, "w", newline="") as fh:
            fh.write(",".join(METER_HEADER) + "\n")
            fh.writelines(meter_rows[data_type])
        meter_paths[data_type] = path

    trips_path: Path | None = None
    if has_ev:
        trips_path = out / "trips.csv"
        with open(trips_path, "w", newline="") as fh:
            fh.write(",".join(TRIP_HEADER) + "\n")
            fh.writelines(trip_rows)

    homes_path = out / "homes.csv"
    with open(homes_path, "w", newline="") as fh:
        fh.write(",".join(HOMES_HEADER) + "\n")
        fh.writelines(homes_rows)

    labels = {
        "version": 1,
        "seed": spec.seed,
        "n_homes": spec.n_homes,
        "n_days": spec.n_days,
        "resolution_minutes": spec.resolution_minutes,
        "start_date": spec.start_date.isoformat(),
        "emitted_counts": emitted_counts,
        "invalid_range_homes": invalid_homes,
        "homes": home_meta,
        "records": records,
    }
    labels_path = out / "labels.json"
    with open(labels_path, "w") as fh:
        json.dump(labels, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")

    return CorpusFiles(out, meter_paths, trips_path, homes_path, labels_path, labels)


# ---------------------------------------------------------------------------
# Reference archetype sets
# ---------------------------------------------------------------------------


def _bump(t_steps: int, center_hour: float, width_hours: float, height: float = 1.0) -> np.ndarray:
    hours = (np.arange(t_steps) + 0.5) * (24.0 / t_steps)
    return height * np.exp(-0.5 * ((hours - center_hour) / width_hours) ** 2)


def default_load_archetypes(t_steps: int) -> tuple[Archetype, ...]:
    """Four well-separated household usage patterns."""
    base = 0.08
    shapes = {
        "morning_peak": base + _bump(t_steps, 7.5, 1.5, 1.0) + _bump(t_steps, 19.0, 2.5, 0.25),
        "evening_peak": base + _bump(t_steps, 19.0, 1.8, 1.0) + _bump(t_steps, 8.0, 2.5, 0.2),
        "daytime": base + _bump(t_steps, 13.0, 3.0, 0.9),
        "night_owl": base + _bump(t_steps, 1.5, 2.0, 0.9) + _bump(t_steps, 23.0, 1.5, 0.7),
    }
    return tuple(
        Archetype(
            name=name,
            shape=tuple(shape.tolist()),
            factor_mean=mean,
            factor_rho=0.8,
            factor_sigma=0.25,
            shape_noise=0.15,
        )
        for (name, shape), mean in zip(shapes.items(), (9.0, 11.0, 8.0, 10.0))
    )


def default_pv_archetypes(t_steps: int) -> tuple[Archetype, ...]:
    """Bell-shaped generation around midday; two panel orientations."""
    shapes = {
        "south_facing": _bump(t_steps, 12.5, 2.8),
        "west_facing": _bump(t_steps, 14.5, 2.4),
    }
    return tuple(
        Archetype(
            name=name,
            shape=tuple(shape.tolist()),
            factor_mean=6.0,
            factor_rho=0.7,
            factor_sigma=0.35,
            shape_noise=0.2,
        )
        for name, shape in shapes.items()
    )


def default_ev_archetypes(t_steps: int) -> tuple[Archetype, ...]:
    """Three driving patterns (templates are miles per step; zeros separate trips)."""
    hours = (np.arange(t_steps) + 0.5) * (24.0 / t_steps)

    def block(lo: float, hi: float, level: float) -> np.ndarray:
        return np.where((hours >= lo) & (hours < hi), level, 0.0)

    shapes = {
        "commuter": block(8.0, 9.0, 1.0) + block(17.0, 18.0, 1.0),
        "midday_errands": block(10.0, 11.0, 1.0) + block(14.0, 15.0, 1.0),
        "evening_social": block(18.0, 19.0, 1.0) + block(22.0, 23.0, 1.0),
    }
    probs = {"commuter": 0.1, "midday_errands": 0.25, "evening_social": 0.2}
    means = {"commuter": 18.0, "midday_errands": 7.0, "evening_social": 10.0}
    return tuple(
        Archetype(
            name=name,
            shape=tuple(shape.tolist()),
            factor_mean=means[name],
            factor_rho=0.6,
            factor_sigma=0.3,
            shape_noise=0.2,
            no_travel_prob=probs[name],
        )
        for name, shape in shapes.items()
    )


def reference_spec(
    n_homes: int = 200,
    n_days: int = 60,
    resolution_minutes: int = 60,
    seed: int = 20130107,
    single_missing_rate: float = 0.005,
    multi_gap_day_rate: float = 0.01,
    invalid_home_rate: float = 0.02,
    data_types: tuple[str, ...] = ("load", "pv", "ev"),
) -> CorpusSpec:
    """The desk-scale reference corpus used by the test and demo pipelines."""
    t_steps = steps_per_day(resolution_minutes)
    builders = {
        "load": default_load_archetypes,
        "pv": default_pv_archetypes,
        "ev": default_ev_archetypes,
    }
    return CorpusSpec(
        n_homes=n_homes,
        n_days=n_days,
        resolution_minutes=resolution_minutes,
        archetypes={d: builders[d](t_steps) for d in data_types},
        single_missing_rate=single_missing_rate,
        multi_gap_day_rate=multi_gap_day_rate,
        invalid_home_rate=invalid_home_rate,
        seed=seed,
    )
