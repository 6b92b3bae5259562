"""Day-to-day Markov structure: factor bins, transition matrices, interpolation."""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .common import day_type_of

log = logging.getLogger(__name__)

DEFAULT_FACTOR_BINS = 50
ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class FactorBins:
    """Non-uniform discretisation of daily scaling factors at sample quantiles."""

    edges: np.ndarray  # (m+1,) strictly ascending, spanning [min, max]

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if len(edges) < 2 or (np.diff(edges) <= 0).any():
            raise ValueError("bin edges must be strictly ascending with at least one bin")
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return len(self.edges) - 1

    def index(self, factor: float) -> int:
        """Bin of a factor; values outside the observed span clip to the end bins."""
        return int(np.clip(np.searchsorted(self.edges, factor, side="right") - 1, 0, self.m - 1))

    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def percentile_bins(factors: Sequence[float], m: int = DEFAULT_FACTOR_BINS) -> FactorBins:
    """Edges at the 0, 1/m, ..., 1 sample quantiles, so bins hold ~equal counts.

    Duplicate edges (heavily tied samples) are collapsed with a warning,
    reducing the effective bin count.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    values = np.asarray(factors, dtype=float)
    if values.size == 0:
        raise ValueError("factors must be nonempty")
    edges = np.quantile(values, np.linspace(0.0, 1.0, m + 1))
    unique = np.unique(edges)
    if len(unique) < len(edges):
        log.warning("collapsed %d duplicate bin edges; effective m=%d", len(edges) - len(unique), len(unique) - 1)
    if len(unique) < 2:
        raise ValueError("factors are all identical; no bins can be formed")
    return FactorBins(unique)


@dataclass
class MatrixEstimate:
    """Raw transition counts and the row-normalized probabilities.

    Rows with no observations stay all-zero and are flagged in empty_rows for
    later interpolation or marginal fill.
    """

    counts: np.ndarray
    probs: np.ndarray
    empty_rows: np.ndarray


def estimate_matrix(pairs: Iterable[tuple], bins_or_k: FactorBins | int) -> MatrixEstimate:
    """Count transitions and normalize each populated row.

    ``pairs`` holds (value_t, value_{t+1}) tuples; with FactorBins the values
    are raw factors binned here, with an int they are state indices already.
    """
    if isinstance(bins_or_k, FactorBins):
        size = bins_or_k.m
        index = bins_or_k.index
    else:
        size = int(bins_or_k)
        if size < 1:
            raise ValueError("state count must be >= 1")
        index = lambda v: int(v)  # noqa: E731

    counts = np.zeros((size, size), dtype=np.int64)
    for a, b in pairs:
        counts[index(a), index(b)] += 1
    row_sums = counts.sum(axis=1)
    empty = row_sums == 0
    probs = np.zeros((size, size))
    populated = ~empty
    probs[populated] = counts[populated] / row_sums[populated, None]
    return MatrixEstimate(counts, probs, empty)


def interpolate_gaps(estimate: MatrixEstimate, bins: FactorBins) -> np.ndarray:
    """Fill empty rows by per-column linear interpolation over bin centers.

    Empty rows outside the populated range copy the nearest populated row.
    Every row is renormalized so next-day probabilities sum to exactly one.
    """
    probs = estimate.probs.copy()
    populated = np.flatnonzero(~estimate.empty_rows)
    if populated.size == 0:
        raise ValueError("cannot interpolate a matrix with no populated rows")
    centers = bins.centers()
    for i in np.flatnonzero(estimate.empty_rows):
        below = populated[populated < i]
        above = populated[populated > i]
        if below.size and above.size:
            lo, hi = below[-1], above[0]
            lam = (centers[i] - centers[lo]) / (centers[hi] - centers[lo])
            probs[i] = (1.0 - lam) * probs[lo] + lam * probs[hi]
        else:
            probs[i] = probs[below[-1] if below.size else above[0]]
    probs /= probs.sum(axis=1, keepdims=True)
    return probs


def fill_empty_rows_with_marginal(estimate: MatrixEstimate) -> np.ndarray:
    """Cluster matrices have no metric between states: empty rows get the
    empirical next-state marginal instead of interpolation."""
    probs = estimate.probs.copy()
    column_totals = estimate.counts.sum(axis=0).astype(float)
    if column_totals.sum() == 0:
        raise ValueError("cannot fill a matrix with no observations")
    marginal = column_totals / column_totals.sum()
    probs[estimate.empty_rows] = marginal
    probs /= probs.sum(axis=1, keepdims=True)
    return probs


def initial_distribution(labels: Sequence[int], k: int) -> np.ndarray:
    """Empirical state frequencies, summing to one."""
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        raise ValueError("labels must be nonempty")
    counts = np.bincount(labels, minlength=k).astype(float)
    return counts / counts.sum()


@dataclass
class FactorTransitionMatrix:
    """Row-stochastic factor-bin transitions for one (data type, day-type transition)."""

    data_type: str
    day_from: str
    day_to: str
    bins: FactorBins
    probs: np.ndarray
    initial_dist: np.ndarray  # marginal bin distribution over day_from days

    def validate(self) -> None:
        if np.abs(self.probs.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
            raise ValueError("factor matrix rows must sum to 1")
        if np.abs(self.initial_dist.sum() - 1.0) > ROW_SUM_TOL:
            raise ValueError("initial distribution must sum to 1")


@dataclass
class ClusterTransitionMatrix:
    """Row-stochastic cluster transitions for one (data type, day-type transition)."""

    data_type: str
    day_from: str
    day_to: str
    k: int
    probs: np.ndarray
    initial_dist: np.ndarray

    def validate(self) -> None:
        if self.probs.shape != (self.k, self.k):
            raise ValueError("cluster matrix shape mismatch")
        if np.abs(self.probs.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
            raise ValueError("cluster matrix rows must sum to 1")
        if np.abs(self.initial_dist.sum() - 1.0) > ROW_SUM_TOL:
            raise ValueError("initial distribution must sum to 1")


def day_pairs(dated_values: Sequence[tuple[dt.date, object]]) -> dict[tuple[str, str], list[tuple]]:
    """Pairs of values on strictly consecutive calendar days, keyed by the
    (day type, next day type) transition. Any missing day breaks the chain."""
    ordered = sorted(dated_values, key=lambda item: item[0])
    out: dict[tuple[str, str], list[tuple]] = {}
    for (d0, v0), (d1, v1) in zip(ordered, ordered[1:]):
        if (d1 - d0).days != 1:
            continue
        key = (day_type_of(d0), day_type_of(d1))
        out.setdefault(key, []).append((v0, v1))
    return out


def build_factor_matrix(
    data_type: str,
    day_from: str,
    day_to: str,
    pairs: Sequence[tuple[float, float]],
    bins: FactorBins,
    marginal_factors: Sequence[float],
) -> FactorTransitionMatrix:
    """Estimate, gap-fill and package one factor transition matrix."""
    estimate = estimate_matrix(pairs, bins)
    probs = interpolate_gaps(estimate, bins)
    init = initial_distribution([bins.index(f) for f in marginal_factors], bins.m)
    matrix = FactorTransitionMatrix(data_type, day_from, day_to, bins, probs, init)
    matrix.validate()
    return matrix


def build_cluster_matrix(
    data_type: str,
    day_from: str,
    day_to: str,
    pairs: Sequence[tuple[int, int]],
    k: int,
    marginal_labels: Sequence[int],
) -> ClusterTransitionMatrix:
    estimate = estimate_matrix(pairs, k)
    probs = fill_empty_rows_with_marginal(estimate)
    init = initial_distribution(marginal_labels, k)
    matrix = ClusterTransitionMatrix(data_type, day_from, day_to, k, probs, init)
    matrix.validate()
    return matrix
