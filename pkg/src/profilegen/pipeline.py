"""Command-level orchestration: corpus, prepare, train, generate, evaluate, plot."""

from __future__ import annotations

import datetime as dt
import json
import logging
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import artifacts, corpus, svgplot
from .common import DAY_TYPE_TRANSITIONS, MissingArtifactError, day_type_of
from .config import RunConfig
from .engine import generate_home
from .evaluation import evaluate_tstr_trts, percentile_bands
from .ingest import (
    DayProfile,
    ValidityRange,
    build_ev_days,
    days_from_readings,
    enforce_validity,
    filter_trips,
    infer_native_resolution,
    parse_meter,
    parse_trips,
    parse_validity,
    segment_homes,
)
from .neural import train_gan
from .prep import assign_cluster, compare_fill_methods, fill_gaps, fit_cluster_model, normalise
from .transitions import build_cluster_matrix, build_factor_matrix, day_pairs, percentile_bins

log = logging.getLogger(__name__)

PV_DAY_TYPE = "all"  # month-grouped generators are day-type independent


def _train_seed(base: int, data_type: str, day_type: str, cluster: int) -> int:
    # stable per-key stream; crc32 keeps it reproducible across processes
    return (base + zlib.crc32(f"{data_type}/{day_type}/{cluster}".encode())) % 2**31


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


def run_corpus(cfg: RunConfig) -> corpus.CorpusFiles:
    spec = corpus.reference_spec(
        n_homes=cfg.corpus.n_homes,
        n_days=cfg.corpus.n_days,
        resolution_minutes=cfg.corpus.resolution_minutes,
        seed=cfg.seed,
        single_missing_rate=cfg.corpus.single_missing_rate,
        multi_gap_day_rate=cfg.corpus.multi_gap_day_rate,
        invalid_home_rate=cfg.corpus.invalid_home_rate,
        data_types=tuple(cfg.corpus.data_types),
    )
    files = corpus.synth_corpus(spec, cfg.raw_dir)
    artifacts.write_manifest(files.out_dir, "corpus", cfg.to_dict(), cfg.seed)
    return files


# ---------------------------------------------------------------------------
# prepare
# ---------------------------------------------------------------------------


@dataclass
class HomeDay:
    home_id: str
    date: dt.date
    profile: NormalisedProfile
    factor: float
    cluster: int = -1


@dataclass
class PrepareSummary:
    day_counts: dict = field(default_factory=dict)
    discarded_gap_days: dict = field(default_factory=dict)
    discarded_trip_days: int = 0
    skipped_rows: dict = field(default_factory=dict)
    homes_dropped_validity: dict = field(default_factory=dict)
    cluster_sizes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "day_counts": self.day_counts,
            "discarded_gap_days": self.discarded_gap_days,
            "discarded_trip_days": self.discarded_trip_days,
            "skipped_rows": self.skipped_rows,
            "homes_dropped_validity": self.homes_dropped_validity,
            "cluster_sizes": self.cluster_sizes,
        }


def _fill_or_drop(days: list[DayProfile], method: str) -> tuple[list[DayProfile], int]:
    """Apply the configured gap filling per home calendar; count discarded days."""
    calendar: dict[tuple[str, dt.date], DayProfile] = {(d.home_id, d.date): d for d in days}
    kept: list[DayProfile] = []
    dropped = 0
    for day in days:
        if not day.gaps:
            kept.append(day)
            continue
        context = {}
        for offset in (-7, -2, -1, 1, 2, 7):
            neighbor = calendar.get((day.home_id, day.date + dt.timedelta(days=offset)))
            if neighbor is not None:
                context[offset] = neighbor
        filled = fill_gaps(day, method, context)
        if filled is None:
            dropped += 1
        else:
            kept.append(filled)
    return kept, dropped


def _meter_days(cfg: RunConfig, data_type: str, summary: PrepareSummary) -> list[DayProfile]:
    path = Path(cfg.raw_dir) / f"{data_type}.csv"
    if not path.exists():
        raise MissingArtifactError(str(path))
    parsed = parse_meter(path, data_type, cfg.ingest.max_malformed_fraction)
    summary.skipped_rows[data_type] = parsed.n_skipped

    homes_path = Path(cfg.raw_dir) / "homes.csv"
    validity = parse_validity(homes_path) if homes_path.exists() else {}

    by_home: dict[str, list] = {}
    for reading in parsed.readings:
        by_home.setdefault(reading.home_id, []).append(reading)

    kept_by_home: dict[str, list] = {}
    dropped_homes = 0
    for home_id, readings in by_home.items():
        valid = enforce_validity(readings, validity.get(home_id, ValidityRange()))
        if valid:
            kept_by_home[home_id] = valid
        else:
            dropped_homes += 1
    summary.homes_dropped_validity[data_type] = dropped_homes
    if not kept_by_home:
        return []

    native = infer_native_resolution(parsed.readings)
    days: list[DayProfile] = []
    for segment in segment_homes(kept_by_home, cfg.ingest.n_segments):
        for home_id in sorted(segment):
            days.extend(days_from_readings(segment[home_id], native, cfg.resolution_minutes))
    days, dropped = _fill_or_drop(days, cfg.fill_method)
    summary.discarded_gap_days[data_type] = dropped
    summary.day_counts[data_type] = len(days)
    return days


def _ev_days(cfg: RunConfig, summary: PrepareSummary) -> list[DayProfile]:
    path = Path(cfg.raw_dir) / "trips.csv"
    if not path.exists():
        return []
    factors = cfg.consumption_factors()
    parsed = parse_trips(path, cfg.ingest.max_malformed_fraction)
    summary.skipped_rows["trips"] = parsed.n_skipped
    filtered = filter_trips(parsed.trips, factors)

    by_home: dict[str, list] = {}
    for trip in filtered.kept:
        by_home.setdefault(trip.home_id, []).append(trip)
    days: list[DayProfile] = []
    discarded = 0
    for segment in segment_homes(by_home, cfg.ingest.n_segments):
        for home_id in sorted(segment):
            result = build_ev_days(segment[home_id], factors, cfg.resolution_minutes)
            days.extend(result.days)
            discarded += result.n_discarded
    summary.discarded_trip_days = discarded
    summary.day_counts["ev"] = len(days)
    return days


def _normalise_days(days: list[DayProfile]) -> dict[str, list[HomeDay]]:
    """Normalized home-days grouped by day type ('all' collects everything)."""
    grouped: dict[str, list[HomeDay]] = {"wd": [], "we": [], "all": []}
    for day in days:
        profile, factor = normalise(day)
        record = HomeDay(day.home_id, day.date, profile, factor)
        grouped[day.day_type].append(record)
        grouped["all"].append(record)
    return grouped


def _write_transitions(
    root: Path,
    data_type: str,
    records: list[HomeDay],
    m: int,
    skip_zero_factors: bool,
) -> None:
    """Factor bins shared across all four day-type transitions of a data type."""
    factors_all = [r.factor for r in records if not (skip_zero_factors and r.factor == 0.0)]
    bins = percentile_bins(factors_all, m)

    per_home: dict[str, list[tuple[dt.date, float]]] = {}
    for r in records:
        if skip_zero_factors and r.factor == 0.0:
            continue  # a no-travel day breaks the factor chain
        per_home.setdefault(r.home_id, []).append((r.date, r.factor))
    pair_map: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for home_records in per_home.values():
        for key, pairs in day_pairs(home_records).items():
            pair_map.setdefault(key, []).extend(pairs)

    marginals: dict[str, list[float]] = {"wd": [], "we": []}
    for r in records:
        if skip_zero_factors and r.factor == 0.0:
            continue
        marginals[day_type_of(r.date)].append(r.factor)

    for d_from, d_to in DAY_TYPE_TRANSITIONS:
        pairs = pair_map.get((d_from, d_to), [])
        marginal = marginals[d_from] or factors_all
        matrix = build_factor_matrix(data_type, d_from, d_to, pairs, bins, marginal)
        artifacts.save_factor_matrix(
            artifacts.factor_matrix_path(root, data_type, d_from, d_to), matrix
        )


def _write_cluster_transitions(root: Path, data_type: str, records: list[HomeDay], k: int) -> None:
    records = [r for r in records if r.cluster >= 0]  # unclustered zero days drop out
    per_home: dict[str, list[tuple[dt.date, int]]] = {}
    for r in records:
        per_home.setdefault(r.home_id, []).append((r.date, r.cluster))
    pair_map: dict[tuple[str, str], list[tuple[int, int]]] = {}
    for home_records in per_home.values():
        for key, pairs in day_pairs(home_records).items():
            pair_map.setdefault(key, []).extend(pairs)
    marginals: dict[str, list[int]] = {"wd": [], "we": []}
    for r in records:
        marginals[day_type_of(r.date)].append(r.cluster)

    for d_from, d_to in DAY_TYPE_TRANSITIONS:
        pairs = pair_map.get((d_from, d_to), [])
        marginal = marginals[d_from] or [r.cluster for r in records]
        matrix = build_cluster_matrix(data_type, d_from, d_to, pairs, k, marginal)
        artifacts.save_cluster_matrix(
            artifacts.cluster_matrix_path(root, data_type, d_from, d_to), matrix
        )


def run_prepare(cfg: RunConfig) -> PrepareSummary:
    """Raw CSVs to intermediate artifacts: cluster models, training profiles,
    transition matrices and the gap-filling comparison report."""
    root = Path(cfg.artifact_dir)
    root.mkdir(parents=True, exist_ok=True)
    summary = PrepareSummary()

    all_days: dict[str, list[DayProfile]] = {}
    for data_type in ("load", "pv"):
        if (Path(cfg.raw_dir) / f"{data_type}.csv").exists():
            all_days[data_type] = _meter_days(cfg, data_type, summary)
    ev_days = _ev_days(cfg, summary)
    if ev_days:
        all_days["ev"] = ev_days
    if not all_days:
        raise MissingArtifactError(f"{cfg.raw_dir}/load.csv (no input data found)")

    for data_type, days in all_days.items():
        grouped = _normalise_days(days)
        if data_type == "pv":
            model, _ = fit_cluster_model([], "pv", PV_DAY_TYPE, 12, cfg.seed)
            artifacts.save_cluster_model(
                artifacts.cluster_model_path(root, "pv", PV_DAY_TYPE), model
            )
            for record in grouped["all"]:
                record.cluster = assign_cluster(model, record.profile, record.date)
            by_cluster: dict[int, list[HomeDay]] = {}
            for record in grouped["all"]:
                if not record.profile.zero_day:
                    by_cluster.setdefault(record.cluster, []).append(record)
            for cluster, members in sorted(by_cluster.items()):
                artifacts.save_profiles(
                    artifacts.profiles_path(root, "pv", PV_DAY_TYPE, cluster),
                    np.array([r.profile.values for r in members]),
                )
                summary.cluster_sizes[f"pv/{PV_DAY_TYPE}/{cluster}"] = len(members)
        else:
            k = int(cfg.clusters.get(data_type, 4 if data_type == "load" else 3))
            for day_type in ("wd", "we"):
                records = grouped[day_type]
                if not records:
                    continue
                profiles = [r.profile for r in records]
                if data_type == "load":
                    usable = [r for r in records if not r.profile.zero_day]
                    model, labels = fit_cluster_model(
                        [r.profile for r in usable], "load", day_type, k, cfg.seed
                    )
                    for r, label in zip(usable, labels):
                        r.cluster = int(label)
                else:
                    model, labels = fit_cluster_model(profiles, "ev", day_type, k, cfg.seed)
                    for r, label in zip(records, labels):
                        r.cluster = int(label)
                artifacts.save_cluster_model(
                    artifacts.cluster_model_path(root, data_type, day_type), model
                )
                by_cluster = {}
                for r in records:
                    if r.cluster >= 0 and not r.profile.zero_day:
                        by_cluster.setdefault(r.cluster, []).append(r)
                for cluster, members in sorted(by_cluster.items()):
                    artifacts.save_profiles(
                        artifacts.profiles_path(root, data_type, day_type, cluster),
                        np.array([r.profile.values for r in members]),
                    )
                    summary.cluster_sizes[f"{data_type}/{day_type}/{cluster}"] = len(members)

        skip_zero = data_type == "ev"
        _write_transitions(root, data_type, grouped["all"], cfg.factor_bins, skip_zero)
        if data_type != "pv":
            k_states = int(cfg.clusters.get(data_type, 4)) + (1 if data_type == "ev" else 0)
            _write_cluster_transitions(root, data_type, grouped["all"], k_states)

    if "load" in all_days:
        gap_free = [d for d in all_days["load"] if not d.gaps]
        sample = gap_free[: min(len(gap_free), 400)]
        if sample:
            report = compare_fill_methods(sample, cfg.fill_mask_fraction, cfg.seed)
            with open(root / "fill_report.json", "w") as fh:
                json.dump(
                    {
                        "mean_abs_error": report.mean_abs_error,
                        "p99_abs_error": report.p99_abs_error,
                        "n_masked": report.n_masked,
                        "mask_fraction": report.mask_fraction,
                        "seed": report.seed,
                    },
                    fh,
                    sort_keys=True,
                    separators=(",", ":"),
                )
                fh.write("\n")

    with open(root / "prepare_summary.json", "w") as fh:
        json.dump(summary.to_dict(), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    input_files = sorted(Path(cfg.raw_dir).glob("*.csv"))
    artifacts.write_manifest(root, "prepare", cfg.to_dict(), cfg.seed, input_files)
    return summary


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def run_train(cfg: RunConfig) -> list[tuple[str, str, int]]:
    """Train one generator per (data type, day type, cluster) with enough profiles."""
    root = Path(cfg.artifact_dir)
    profile_files = sorted(root.glob("*/*/*/profiles.csv"))
    if not profile_files:
        raise MissingArtifactError(f"{root}/*/*/*/profiles.csv (run prepare first)")
    trained: list[tuple[str, str, int]] = []
    for path in profile_files:
        cluster = int(path.parent.name)
        day_type = path.parent.parent.name
        data_type = path.parent.parent.parent.name
        profiles = artifacts.load_profiles(path)
        needed = max(cfg.train.population, cfg.min_training_profiles)
        if len(profiles) < needed:
            log.warning(
                "skipping %s/%s/%d: %d profiles < %d required",
                data_type, day_type, cluster, len(profiles), needed,
            )
            continue
        gan_cfg = replace(cfg.train, seed=_train_seed(cfg.seed, data_type, day_type, cluster))
        weights, trace = train_gan(profiles, gan_cfg, data_type, day_type, cluster)
        artifacts.save_gan(artifacts.gan_path(root, data_type, day_type, cluster), weights)
        with open(path.parent / "loss_trace.csv", "w", newline="") as fh:
            fh.write("epoch,d_loss,g_adv,sum_pen,pct_pen\n")
            for entry in trace:
                fh.write(
                    f"{entry.epoch},{entry.d_loss!r},{entry.g_adv!r},"
                    f"{entry.sum_pen!r},{entry.pct_pen!r}\n"
                )
        trained.append((data_type, day_type, cluster))
        log.info("trained %s/%s/%d on %d profiles", data_type, day_type, cluster, len(profiles))
    artifacts.write_manifest(root, "train", cfg.to_dict(), cfg.seed)
    return trained


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def run_generate(cfg: RunConfig, n_homes: int | None = None, n_days: int | None = None) -> list[Path]:
    n_homes = n_homes if n_homes is not None else cfg.generate.n_homes
    n_days = n_days if n_days is not None else cfg.generate.n_days
    start = cfg.generate_start_date()
    dates = [start + dt.timedelta(days=i) for i in range(n_days)]
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    data_types = [d for d in cfg.generate.data_types]
    artifact_sets = {d: artifacts.load_artifact_set(Path(cfg.artifact_dir), d) for d in data_types}

    written: list[Path] = []
    for home_idx in range(n_homes):
        home_id = f"g{home_idx:04d}"
        path = out / f"home_{home_idx:04d}.csv"
        with open(path, "w", newline="") as fh:
            fh.write("date,data_type,step,value_kwh,available\n")
            for type_idx, data_type in enumerate(data_types):
                seed_seq = np.random.SeedSequence((cfg.seed, home_idx, type_idx))
                days = generate_home(
                    data_type,
                    artifact_sets[data_type],
                    np.random.default_rng(seed_seq),
                    dates,
                    home_id,
                    population=cfg.train.population,
                )
                for day in days:
                    avail = day.availability
                    for step, value in enumerate(day.values):
                        flag = "" if avail is None else str(int(avail[step]))
                        fh.write(f"{day.date.isoformat()},{data_type},{step},{float(value)!r},{flag}\n")
        written.append(path)

    gan_files = sorted(Path(cfg.artifact_dir).glob("*/*/*/gan.json"))
    artifacts.write_manifest(out, "generate", cfg.to_dict(), cfg.seed, gan_files)
    return written


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def run_evaluate(cfg: RunConfig) -> dict:
    data_type = cfg.evaluate.data_type
    day_type = cfg.evaluate.day_type if data_type != "pv" else PV_DAY_TYPE
    root = Path(cfg.artifact_dir)
    model = artifacts.load_cluster_model(artifacts.cluster_model_path(root, data_type, day_type))

    xs: list[np.ndarray] = []
    ys: list[int] = []
    for path in sorted(root.glob(f"{data_type}/{day_type}/*/profiles.csv")):
        cluster = int(path.parent.name)
        profiles = artifacts.load_profiles(path)
        xs.append(profiles)
        ys.extend([cluster] * len(profiles))
    if not xs:
        raise MissingArtifactError(f"{root}/{data_type}/{day_type}/*/profiles.csv")

    report = evaluate_tstr_trts(
        np.vstack(xs),
        np.array(ys),
        cfg.train,
        seed=cfg.seed,
        repetitions=cfg.evaluate.repetitions,
        cluster_model=model,
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict()
    payload["data_type"] = data_type
    payload["day_type"] = day_type
    with open(out / "eval_report.json", "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    artifacts.write_manifest(out, "evaluate", cfg.to_dict(), cfg.seed)
    return payload


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------

PLOT_FIGURES = ("fill_compare", "clusters", "bands", "tstr", "factor_matrix")


def _write_band_csv(path: Path, bands: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,p10,p25,p50,p75,p90,mean\n")
        for t in range(bands.shape[1]):
            row = ",".join(repr(float(bands[k, t])) for k in range(6))
            fh.write(f"{t},{row}\n")


def run_plot(cfg: RunConfig, figure: str) -> list[Path]:
    """Emit the CSV series and an SVG rendering for one figure analogue."""
    if figure not in PLOT_FIGURES:
        raise ValueError(f"unknown figure {figure!r}; pick one of {PLOT_FIGURES}")
    root = Path(cfg.artifact_dir)
    out = Path(cfg.output_dir) / "plots"
    out.mkdir(parents=True, exist_ok=True)
    made: list[Path] = []

    if figure == "fill_compare":
        report_path = root / "fill_report.json"
        if not report_path.exists():
            raise MissingArtifactError(str(report_path))
        report = json.loads(report_path.read_text())
        methods = sorted(report["mean_abs_error"])
        csv_path = out / "fill_compare.csv"
        with open(csv_path, "w", newline="") as fh:
            fh.write("method,mean_abs_error,p99_abs_error\n")
            for m in methods:
                fh.write(f"{m},{report['mean_abs_error'][m]!r},{report['p99_abs_error'][m]!r}\n")
        svg_path = out / "fill_compare.svg"
        svgplot.bar_chart(
            methods,
            {
                "mean": [report["mean_abs_error"][m] for m in methods],
                "p99": [report["p99_abs_error"][m] for m in methods],
            },
            "Gap-filling error by method",
            svg_path,
        )
        made += [csv_path, svg_path]

    elif figure == "clusters":
        data_type, day_type = cfg.plot.data_type, cfg.plot.day_type
        series = []
        csv_rows = []
        for path in sorted(root.glob(f"{data_type}/{day_type}/*/profiles.csv")):
            cluster = int(path.parent.name)
            profiles = artifacts.load_profiles(path)
            mean = profiles.mean(axis=0)
            series.append((f"cluster {cluster}", np.arange(len(mean)), mean))
            csv_rows.append((cluster, mean))
        if not series:
            raise MissingArtifactError(f"{root}/{data_type}/{day_type}/*/profiles.csv")
        csv_path = out / f"clusters_{data_type}_{day_type}.csv"
        with open(csv_path, "w", newline="") as fh:
            fh.write("cluster,t,mean_value\n")
            for cluster, mean in csv_rows:
                for t, v in enumerate(mean):
                    fh.write(f"{cluster},{t},{float(v)!r}\n")
        svg_path = out / f"clusters_{data_type}_{day_type}.svg"
        svgplot.line_chart(series, f"{data_type} {day_type} cluster mean profiles", svg_path)
        made += [csv_path, svg_path]

    elif figure == "bands":
        data_type, day_type, cluster = cfg.plot.data_type, cfg.plot.day_type, cfg.plot.cluster
        if data_type == "pv":
            day_type = PV_DAY_TYPE
        gan = artifacts.load_gan(artifacts.gan_path(root, data_type, day_type, cluster))
        from .neural import sample_population

        generated = sample_population(gan, cfg.plot.band_population, cfg.seed)
        gen_bands = percentile_bands(generated)
        real_csv = out / f"bands_real_{data_type}_{day_type}_{cluster}.csv"
        gen_csv = out / f"bands_generated_{data_type}_{day_type}_{cluster}.csv"
        _write_band_csv(real_csv, gan.real_stats)
        _write_band_csv(gen_csv, gen_bands)
        steps = np.arange(gan.t_steps)
        svg_path = out / f"bands_{data_type}_{day_type}_{cluster}.svg"
        svgplot.line_chart(
            [
                ("real p10", steps, gan.real_stats[0]),
                ("real p90", steps, gan.real_stats[4]),
                ("real mean", steps, gan.real_stats[5]),
                ("gen p10", steps, gen_bands[0]),
                ("gen p90", steps, gen_bands[4]),
                ("gen mean", steps, gen_bands[5]),
            ],
            f"{data_type} {day_type} cluster {cluster}: real vs generated bands",
            svg_path,
        )
        made += [real_csv, gen_csv, svg_path]

    elif figure == "tstr":
        report_path = Path(cfg.output_dir) / "eval_report.json"
        if not report_path.exists():
            raise MissingArtifactError(str(report_path))
        report = json.loads(report_path.read_text())
        csv_path = out / "tstr.csv"
        with open(csv_path, "w", newline="") as fh:
            fh.write("metric,accuracy\n")
            for key in ("tstr_accuracy", "trts_accuracy", "random_baseline", "centroid_baseline_accuracy"):
                fh.write(f"{key},{report[key]!r}\n")
        svg_path = out / "tstr.svg"
        svgplot.bar_chart(
            ["TSTR", "TRTS", "random", "centroid"],
            {
                "accuracy": [
                    report["tstr_accuracy"],
                    report["trts_accuracy"],
                    report["random_baseline"],
                    report["centroid_baseline_accuracy"],
                ]
            },
            "Classifier accuracy",
            svg_path,
        )
        made += [csv_path, svg_path]

    elif figure == "factor_matrix":
        data_type = cfg.plot.data_type
        path = artifacts.factor_matrix_path(root, data_type, "wd", "wd")
        matrix = artifacts.load_factor_matrix(path)
        csv_path = out / f"factor_matrix_{data_type}_wd_wd.csv"
        with open(csv_path, "w", newline="") as fh:
            fh.write("from_bin,to_bin,prob\n")
            for i in range(matrix.bins.m):
                for j in range(matrix.bins.m):
                    fh.write(f"{i},{j},{float(matrix.probs[i, j])!r}\n")
        svg_path = out / f"factor_matrix_{data_type}_wd_wd.svg"
        svgplot.heatmap(matrix.probs, f"{data_type} factor transitions (wd to wd)", svg_path)
        made += [csv_path, svg_path]

    artifacts.write_manifest(out, f"plot:{figure}", cfg.to_dict(), cfg.seed)
    return made
