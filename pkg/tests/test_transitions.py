"""Factor bins, transition estimation, interpolation and marginals."""

import datetime as dt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from profilegen import transitions
from profilegen.corpus import synth_corpus
from profilegen.transitions import FactorBins, estimate_matrix, percentile_bins

from conftest import MONDAY, single_type_spec


# ---------------------------------------------------------------------------
# percentile bins
# ---------------------------------------------------------------------------


def test_single_bin_spans_min_max(rng):
    values = rng.random(50) * 7.0
    bins = percentile_bins(values, 1)
    assert bins.m == 1
    assert bins.edges[0] == pytest.approx(values.min())
    assert bins.edges[1] == pytest.approx(values.max())


def test_uniform_sample_equal_counts(rng):
    values = rng.uniform(0, 100, size=100)
    bins = percentile_bins(values, 4)
    counts = np.bincount([bins.index(v) for v in values], minlength=4)
    assert np.all(np.abs(counts - 25) <= 1)


def test_default_bin_count_is_50():
    assert transitions.DEFAULT_FACTOR_BINS == 50


def test_rejects_m_below_one():
    with pytest.raises(ValueError):
        percentile_bins([1.0, 2.0], 0)


def test_duplicate_edges_collapse_with_warning(caplog):
    values = [1.0] * 50 + [2.0] * 50
    with caplog.at_level("WARNING"):
        bins = percentile_bins(values, 10)
    assert bins.m < 10
    assert any("collapsed" in r.message for r in caplog.records)


def test_all_identical_factors_rejected():
    with pytest.raises(ValueError):
        percentile_bins([3.0] * 10, 5)


@given(st.floats(min_value=-50, max_value=50))
def test_bins_shift_equivariant(shift):
    values = np.array([1.0, 2.0, 3.5, 4.0, 7.0, 9.0, 12.0, 15.0])
    base = percentile_bins(values, 4)
    shifted = percentile_bins(values + shift, 4)
    assert shifted.edges == pytest.approx(base.edges + shift, abs=1e-9)


def test_index_boundaries():
    bins = FactorBins(np.array([0.0, 1.0, 2.0, 3.0]))
    assert bins.index(0.0) == 0
    assert bins.index(1.0) == 1  # internal edges belong to the upper bin
    assert bins.index(3.0) == 2
    assert bins.index(-5.0) == 0 and bins.index(99.0) == 2


# ---------------------------------------------------------------------------
# matrix estimation
# ---------------------------------------------------------------------------


def test_counts_row_normalisation_exact():
    pairs = [(0, 0), (0, 0), (0, 2), (0, 2)]  # row 0 counts [2, 0, 2]
    est = estimate_matrix(pairs, 3)
    assert est.probs[0].tolist() == [0.5, 0.0, 0.5]
    assert est.empty_rows.tolist() == [False, True, True]


def test_single_pair_is_one_hot():
    est = estimate_matrix([(1, 2)], 4)
    assert est.probs[1].tolist() == [0.0, 0.0, 1.0, 0.0]


def test_estimate_with_factor_bins():
    bins = FactorBins(np.array([0.0, 1.0, 2.0]))
    est = estimate_matrix([(0.5, 1.5), (0.5, 0.2)], bins)
    assert est.probs[0].tolist() == [0.5, 0.5]


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=60))
def test_populated_rows_are_stochastic(pairs):
    est = estimate_matrix(pairs, 5)
    sums = est.probs.sum(axis=1)
    for i in range(5):
        if est.empty_rows[i]:
            assert sums[i] == 0.0
        else:
            assert sums[i] == pytest.approx(1.0, abs=1e-9)
    assert np.all(est.probs >= 0) and np.all(est.probs <= 1)


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------


def _bins(m):
    return FactorBins(np.linspace(0.0, float(m), m + 1))


def test_interpolation_identity_without_gaps():
    est = estimate_matrix([(0, 1), (1, 2), (2, 0)], 3)
    probs = transitions.interpolate_gaps(est, _bins(3))
    assert probs == pytest.approx(est.probs)


def test_interpolation_midpoint_example():
    est = estimate_matrix([(0, 0), (2, 2)], 3)
    probs = transitions.interpolate_gaps(est, _bins(3))
    assert probs[1].tolist() == pytest.approx([0.5, 0.0, 0.5])


def test_interpolation_edge_rows_copy_nearest():
    est = estimate_matrix([(1, 2), (2, 0)], 4)  # rows 0 and 3 empty
    probs = transitions.interpolate_gaps(est, _bins(4))
    assert probs[0] == pytest.approx(probs[1])
    assert probs[3] == pytest.approx(probs[2])


def test_interpolation_respects_bin_centers():
    # populated rows 0 and 3 with non-uniform centers: weights follow distance
    bins = FactorBins(np.array([0.0, 1.0, 2.0, 3.0, 10.0]))
    est = estimate_matrix([(0.5, 0.5), (5.0, 5.0)], bins)
    probs = transitions.interpolate_gaps(est, bins)
    centers = bins.centers()
    lam = (centers[1] - centers[0]) / (centers[3] - centers[0])
    assert probs[1, 0] == pytest.approx(1 - lam)
    assert probs[1, 3] == pytest.approx(lam)


def test_interpolation_needs_one_populated_row():
    est = estimate_matrix([], 3)
    with pytest.raises(ValueError):
        transitions.interpolate_gaps(est, _bins(3))


def test_interpolation_keeps_populated_rows():
    est = estimate_matrix([(0, 1), (0, 2), (2, 2)], 3)
    before = est.probs.copy()
    probs = transitions.interpolate_gaps(est, _bins(3))
    assert probs[0] == pytest.approx(before[0], abs=1e-9)
    assert probs[2] == pytest.approx(before[2], abs=1e-9)
    assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9


def test_marginal_fill_for_cluster_rows():
    est = estimate_matrix([(0, 1), (0, 1), (1, 0), (1, 1)], 3)  # row 2 empty
    probs = transitions.fill_empty_rows_with_marginal(est)
    # column totals: [1, 3, 0] -> marginal [0.25, 0.75, 0]
    assert probs[2].tolist() == pytest.approx([0.25, 0.75, 0.0])


# ---------------------------------------------------------------------------
# initial distribution
# ---------------------------------------------------------------------------


def test_initial_one_hot():
    dist = transitions.initial_distribution([2, 2, 2], 4)
    assert dist.tolist() == [0.0, 0.0, 1.0, 0.0]


def test_initial_even_split():
    dist = transitions.initial_distribution([0, 1, 0, 1], 2)
    assert dist.tolist() == [0.5, 0.5]


def test_initial_planted_mixture_within_binomial_tolerance(rng):
    labels = rng.choice(3, size=10_000, p=[0.6, 0.3, 0.1])
    dist = transitions.initial_distribution(labels, 3)
    assert np.abs(dist - [0.6, 0.3, 0.1]).max() <= 0.02


# ---------------------------------------------------------------------------
# pair extraction
# ---------------------------------------------------------------------------


def test_day_pairs_require_consecutive_dates():
    records = [
        (MONDAY, 1.0),                       # Mon (wd)
        (MONDAY + dt.timedelta(days=1), 2.0),  # Tue (wd)
        (MONDAY + dt.timedelta(days=3), 9.0),  # Thu: gap breaks the chain
        (MONDAY + dt.timedelta(days=4), 3.0),  # Fri (wd)
        (MONDAY + dt.timedelta(days=5), 4.0),  # Sat (we)
    ]
    pairs = transitions.day_pairs(records)
    assert pairs[("wd", "wd")] == [(1.0, 2.0), (9.0, 3.0)]
    assert pairs[("wd", "we")] == [(3.0, 4.0)]
    assert ("we", "wd") not in pairs


def test_autocorrelated_corpus_concentrates_near_diagonal(tmp_path):
    """With strong factor self-correlation the modal next bin hugs the diagonal."""
    spec = single_type_spec(40, 40, seed=5, rho=0.98, sigma=0.02)
    files = synth_corpus(spec, tmp_path)
    per_home: dict[str, list[tuple[dt.date, float]]] = {}
    for record in files.labels["records"]:
        per_home.setdefault(record["home_id"], []).append(
            (dt.date.fromisoformat(record["date"]), record["factor"])
        )
    factors = [f for days in per_home.values() for _, f in days]
    bins = percentile_bins(factors, 10)
    pairs = []
    for days in per_home.values():
        for key, home_pairs in transitions.day_pairs(days).items():
            pairs.extend(home_pairs)
    est = estimate_matrix(pairs, bins)
    populated = np.flatnonzero(~est.empty_rows)
    near = sum(abs(int(est.probs[i].argmax()) - i) <= 1 for i in populated)
    assert near / len(populated) >= 0.9
