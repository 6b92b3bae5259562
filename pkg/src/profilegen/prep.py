"""Gap filling, normalization, feature extraction and behaviour clustering."""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .ingest import DayProfile

log = logging.getLogger(__name__)

LINEAR = "linear"
#: Donor-day offsets tried by the replacement methods, in evaluation order.
DONOR_OFFSETS = {
    "adjacent_day": (-1, 1),
    "adjacent_two_days": (-1, 1, -2, 2),
    "adjacent_day_or_week": (-1, 1, -7, 7),
}
FILL_METHODS = (LINEAR, *DONOR_OFFSETS)

LOAD_WINDOWS_HOURS = ((0, 7), (7, 11), (11, 14), (14, 17), (17, 21), (21, 24))
EV_WINDOW_HOURS = (6, 22)

ZERO_SUM_EPS = 1e-9


@dataclass
class NormalisedProfile:
    """Unit-sum shape of one day; zero_day marks days with no energy at all."""

    values: np.ndarray
    zero_day: bool = False


@dataclass(frozen=True)
class ClusterModel:
    """Per (data type, day type) behaviour grouping.

    feature_spec is one of load_features / ev_features / month_group; the
    month_group form has no centroids and maps dates straight to calendar
    months. For ev models the extra no_travel_cluster index is reserved for
    zero days.
    """

    data_type: str
    day_type: str
    k: int
    feature_spec: str
    centroids: np.ndarray | None
    no_travel_cluster: int | None = None


@dataclass
class FillComparisonReport:
    """Masked-point reconstruction error per filling method."""

    mean_abs_error: dict[str, float]
    p99_abs_error: dict[str, float]
    n_masked: int
    mask_fraction: float
    seed: int

    def best_method(self) -> str:
        return min(self.mean_abs_error, key=self.mean_abs_error.get)


def _gap_runs(gaps: Sequence[int]) -> list[list[int]]:
    runs: list[list[int]] = []
    for g in sorted(gaps):
        if runs and g == runs[-1][-1] + 1:
            runs[-1].append(g)
        else:
            runs.append([g])
    return runs


def _donor_fill(
    day: DayProfile,
    gap: int,
    offsets: Sequence[int],
    context: Mapping[int, DayProfile],
) -> float | None:
    """Pick the donor day whose flanking values best match the current day.

    The score is the sum of squared differences between the donor's and the
    current day's values at the steps before and after the gap; the donor's
    value at the gap step itself is the fill.
    """
    t = day.t_steps
    flanks = [p for p in (gap - 1, gap + 1) if 0 <= p < t and p not in day.gaps]
    best: tuple[float, float] | None = None
    for offset in offsets:
        donor = context.get(offset)
        if donor is None:
            continue
        needed = set(flanks) | {gap}
        if needed & set(donor.gaps):
            continue
        score = sum((donor.values[p] - day.values[p]) ** 2 for p in flanks)
        if best is None or score < best[0]:
            best = (score, float(donor.values[gap]))
    return None if best is None else best[1]


def fill_gaps(
    day: DayProfile,
    method: str = LINEAR,
    context: Mapping[int, DayProfile] | None = None,
) -> DayProfile | None:
    """Fill single missing steps; days with >= 2 consecutive gaps are discarded (None).

    Boundary gaps copy the single adjacent value under the linear method. The
    donor methods fall back to linear interpolation when no candidate day can
    supply the gap. Non-gap values are never altered.
    """
    if method not in FILL_METHODS:
        raise ValueError(f"unknown fill method {method!r}")
    if not day.gaps:
        return day
    runs = _gap_runs(day.gaps)
    if any(len(run) > 1 for run in runs):
        return None
    context = context or {}

    values = day.values.copy()
    t = day.t_steps
    for (gap,) in runs:
        filled: float | None = None
        if method != LINEAR:
            filled = _donor_fill(day, gap, DONOR_OFFSETS[method], context)
        if filled is None:
            if gap == 0:
                filled = float(values[1])
            elif gap == t - 1:
                filled = float(values[t - 2])
            else:
                filled = float(0.5 * (values[gap - 1] + values[gap + 1]))
        values[gap] = filled
    return DayProfile(
        day.home_id,
        day.date,
        day.data_type,
        values,
        gaps=[],
        availability=None if day.availability is None else day.availability.copy(),
    )


def _isolated_mask(t: int, mask_fraction: float, rng: np.random.Generator) -> list[int]:
    # keep masked points single: no two adjacent, so every gap stays fillable
    candidates = rng.permutation(t)
    target = max(1, int(round(mask_fraction * t)))
    chosen: set[int] = set()
    for pos in candidates:
        if len(chosen) >= target:
            break
        if pos - 1 in chosen or pos + 1 in chosen:
            continue
        chosen.add(int(pos))
    return sorted(chosen)


def compare_fill_methods(
    days: Sequence[DayProfile],
    mask_fraction: float,
    seed: int,
) -> FillComparisonReport:
    """Mask random isolated points on gap-free days, fill with every method,
    and report mean plus 99th-percentile absolute error against the truth.

    The same masked positions are reused across methods so the comparison is
    paired. Donor methods see the true (unmasked) neighbouring days.
    """
    if not 0.0 < mask_fraction <= 0.2:
        raise ValueError("mask_fraction must lie in (0, 0.2]")
    if any(day.gaps for day in days):
        raise ValueError("compare_fill_methods requires gap-free days")

    by_home: dict[tuple[str, str], dict[dt.date, DayProfile]] = {}
    for day in days:
        by_home.setdefault((day.home_id, day.data_type), {})[day.date] = day

    rng = np.random.default_rng(seed)
    masks: list[tuple[DayProfile, list[int]]] = []
    for day in days:
        masks.append((day, _isolated_mask(day.t_steps, mask_fraction, rng)))

    errors: dict[str, list[float]] = {m: [] for m in FILL_METHODS}
    n_masked = 0
    for day, positions in masks:
        if not positions:
            continue
        n_masked += len(positions)
        calendar = by_home[(day.home_id, day.data_type)]
        masked_values = day.values.copy()
        masked_values[positions] = 0.0
        masked = DayProfile(day.home_id, day.date, day.data_type, masked_values, gaps=list(positions))
        for method in FILL_METHODS:
            context = {}
            if method != LINEAR:
                for offset in DONOR_OFFSETS[method]:
                    donor = calendar.get(day.date + dt.timedelta(days=offset))
                    if donor is not None:
                        context[offset] = donor
            filled = fill_gaps(masked, method, context)
            assert filled is not None
            for pos in positions:
                errors[method].append(abs(filled.values[pos] - day.values[pos]))

    mean_err = {m: float(np.mean(errors[m])) for m in FILL_METHODS}
    p99_err = {m: float(np.percentile(errors[m], 99)) for m in FILL_METHODS}
    return FillComparisonReport(mean_err, p99_err, n_masked, mask_fraction, seed)


# ---------------------------------------------------------------------------
# Normalisation
# ---------------------------------------------------------------------------


def normalise(day: DayProfile) -> tuple[NormalisedProfile, float]:
    """Split a gap-free day into its unit-sum shape and kWh/day scaling factor."""
    if day.gaps:
        raise ValueError("normalise requires a gap-free day")
    values = np.asarray(day.values, dtype=float)
    if (values < 0).any():
        raise ValueError("negative values cannot be normalised")
    factor = float(values.sum())
    if factor < ZERO_SUM_EPS:
        return NormalisedProfile(np.zeros_like(values), zero_day=True), 0.0
    return NormalisedProfile(values / factor), factor


def rescale(profile: NormalisedProfile, factor: float) -> np.ndarray:
    return profile.values * factor


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------


def extract_features(profile: NormalisedProfile, feature_spec: str) -> np.ndarray:
    """Feature vector for clustering.

    load_features: peak value, peak time (fraction of day) and the mean over
    six fixed daily windows. ev_features: the raw normalized values between
    06:00 and 22:00. month_group has no feature representation.
    """
    if feature_spec == "month_group":
        raise ValueError("month_group profiles are grouped by calendar month, not features")
    if profile.zero_day:
        raise ValueError("zero days have no features")
    values = profile.values
    t = len(values)
    step_hours = np.arange(t) * (24.0 / t)

    if feature_spec == "load_features":
        feats = [float(values.max()), float(np.argmax(values)) / t]
        for lo, hi in LOAD_WINDOWS_HOURS:
            members = values[(step_hours >= lo) & (step_hours < hi)]
            feats.append(float(members.mean()) if members.size else 0.0)
        return np.array(feats)
    if feature_spec == "ev_features":
        lo, hi = EV_WINDOW_HOURS
        return values[(step_hours >= lo) & (step_hours < hi)].copy()
    raise ValueError(f"unknown feature spec {feature_spec!r}")


# ---------------------------------------------------------------------------
# K-means
# ---------------------------------------------------------------------------


@dataclass
class KMeansFit:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    inertia_history: list[float] = field(default_factory=list)


def _kmeanspp_seed(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[i] = points[rng.integers(n)]
        else:
            centroids[i] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((points - centroids[i]) ** 2).sum(axis=1))
    return centroids


def _lloyd(points: np.ndarray, centroids: np.ndarray, max_iter: int) -> KMeansFit:
    k = centroids.shape[0]
    labels = np.full(points.shape[0], -1)
    history: list[float] = []
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(len(points)), new_labels].sum())
        history.append(inertia)
        for c in range(k):
            members = points[new_labels == c]
            if len(members) == 0:
                # revive an empty cluster at the point farthest from its centroid
                far = d2[np.arange(len(points)), new_labels].argmax()
                centroids[c] = points[far]
                new_labels[far] = c
            else:
                centroids[c] = members.mean(axis=0)
        if (new_labels == labels).all():
            labels = new_labels
            break
        labels = new_labels
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    inertia = float(d2[np.arange(len(points)), labels].sum())
    history.append(inertia)
    return KMeansFit(centroids, labels, inertia, history)


def kmeans_fit(
    features: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 100,
    n_restarts: int = 10,
) -> KMeansFit:
    """Lloyd's algorithm with seeded k-means++ starts; best of n_restarts kept."""
    points = np.asarray(features, dtype=float)
    if points.ndim != 2:
        raise ValueError("features must be 2-D")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > points.shape[0]:
        raise ValueError(f"k={k} exceeds the {points.shape[0]} available points")
    rng = np.random.default_rng(seed)
    best: KMeansFit | None = None
    for _ in range(n_restarts):
        fit = _lloyd(points, _kmeanspp_seed(points, k, rng), max_iter)
        if best is None or fit.inertia < best.inertia:
            best = fit
    assert best is not None
    return best


def fit_cluster_model(
    profiles: Sequence[NormalisedProfile],
    data_type: str,
    day_type: str,
    k: int,
    seed: int,
) -> tuple[ClusterModel, np.ndarray]:
    """Fit the behaviour grouping for one (data type, day type).

    PV has no fitted model (month grouping); ev models reserve one extra
    cluster index for no-travel days and fit K-means on travel days only.
    Returns the model plus per-profile labels (aligned with `profiles`).
    """
    if data_type == "pv":
        model = ClusterModel("pv", day_type, 12, "month_group", None)
        return model, np.zeros(len(profiles), dtype=int)

    feature_spec = "ev_features" if data_type == "ev" else "load_features"
    travel_idx = [i for i, p in enumerate(profiles) if not p.zero_day]
    if data_type != "ev" and len(travel_idx) != len(profiles):
        raise ValueError("zero days must be excluded before clustering non-ev profiles")
    feats = np.array([extract_features(profiles[i], feature_spec) for i in travel_idx])
    fit = kmeans_fit(feats, k, seed)

    labels = np.zeros(len(profiles), dtype=int)
    if data_type == "ev":
        model = ClusterModel("ev", day_type, k + 1, feature_spec, fit.centroids, no_travel_cluster=k)
        labels[:] = k
    else:
        model = ClusterModel(data_type, day_type, k, feature_spec, fit.centroids)
    for pos, i in enumerate(travel_idx):
        labels[i] = int(fit.labels[pos])
    return model, labels


def assign_cluster(model: ClusterModel, profile: NormalisedProfile, date: dt.date) -> int:
    """Deterministic cluster index for one profile.

    Month-grouped data maps to the calendar month (1..12); ev zero days map
    to the reserved no-travel index; everything else goes to the nearest
    centroid, ties broken toward the lowest index.
    """
    if model.feature_spec == "month_group":
        return date.month
    if profile.zero_day:
        if model.no_travel_cluster is None:
            raise ValueError("zero day but model has no no-travel cluster")
        return model.no_travel_cluster
    assert model.centroids is not None
    feats = extract_features(profile, model.feature_spec)
    d2 = ((model.centroids - feats) ** 2).sum(axis=1)
    return int(d2.argmin())
