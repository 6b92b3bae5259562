"""Gap filling, normalization, features and clustering."""

import datetime as dt
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from profilegen import prep
from profilegen.prep import NormalisedProfile

from conftest import MONDAY, make_day


# ---------------------------------------------------------------------------
# fill_gaps
# ---------------------------------------------------------------------------


def test_linear_fill_midpoint():
    day = make_day([2.0, 0.0, 4.0], gaps=[1])
    filled = prep.fill_gaps(day, "linear")
    assert filled is not None
    assert filled.values[1] == pytest.approx(3.0)
    assert filled.gaps == []


def test_two_consecutive_gaps_discard_the_day():
    day = make_day([2.0, 0.0, 0.0, 4.0], gaps=[1, 2])
    assert prep.fill_gaps(day, "linear") is None


def test_boundary_gap_copies_adjacent_value():
    first = prep.fill_gaps(make_day([0.0, 5.0, 6.0], gaps=[0]), "linear")
    last = prep.fill_gaps(make_day([5.0, 6.0, 0.0], gaps=[2]), "linear")
    assert first.values[0] == pytest.approx(5.0)
    assert last.values[2] == pytest.approx(6.0)


def test_donor_method_picks_lowest_flank_score():
    # gap flanked by (2, 4); yesterday flanks (2.1, 3.9) score 0.02, donor 3.2;
    # tomorrow flanks (5, 9) score 34, donor 7 -> yesterday wins
    day = make_day([2.0, 0.0, 4.0], gaps=[1])
    yesterday = make_day([2.1, 3.2, 3.9], date=MONDAY - dt.timedelta(days=1))
    tomorrow = make_day([5.0, 7.0, 9.0], date=MONDAY + dt.timedelta(days=1))
    filled = prep.fill_gaps(day, "adjacent_day", {-1: yesterday, 1: tomorrow})
    assert filled.values[1] == pytest.approx(3.2)


def test_donor_method_skips_donor_with_gap_at_position():
    day = make_day([2.0, 0.0, 4.0], gaps=[1])
    yesterday = make_day([2.0, 0.0, 4.0], date=MONDAY - dt.timedelta(days=1), gaps=[1])
    tomorrow = make_day([5.0, 7.0, 9.0], date=MONDAY + dt.timedelta(days=1))
    filled = prep.fill_gaps(day, "adjacent_day", {-1: yesterday, 1: tomorrow})
    assert filled.values[1] == pytest.approx(7.0)


def test_donor_method_falls_back_to_linear_without_candidates():
    day = make_day([2.0, 0.0, 4.0], gaps=[1])
    filled = prep.fill_gaps(day, "adjacent_day_or_week", {})
    assert filled.values[1] == pytest.approx(3.0)


@given(st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=4, max_size=30),
       st.integers(min_value=0, max_value=29))
def test_fill_never_alters_non_gap_values(values, gap):
    gap = gap % len(values)
    day = make_day(values, gaps=[gap])
    filled = prep.fill_gaps(day, "linear")
    assert filled is not None
    for t, v in enumerate(values):
        if t != gap:
            assert filled.values[t] == v


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        prep.fill_gaps(make_day([1.0, 2.0]), "cubic")


# ---------------------------------------------------------------------------
# compare_fill_methods
# ---------------------------------------------------------------------------


def _smooth_days(n_homes=3, n_days=10, t=24, seed=4):
    # smooth within the day but with realistic day-to-day magnitude swings,
    # so copying from a neighbouring day is worse than interpolating
    rng = np.random.default_rng(seed)
    hours = np.arange(t) + 0.5
    days = []
    for h in range(n_homes):
        base = 2.5 + np.sin(hours / 24 * 2 * np.pi + h)
        for d in range(n_days):
            day_factor = np.exp(0.25 * rng.standard_normal())
            values = day_factor * base * np.exp(0.03 * rng.standard_normal(t))
            days.append(make_day(values, home_id=f"h{h}", date=MONDAY + dt.timedelta(days=d)))
    return days


def test_compare_constant_days_zero_error_everywhere():
    days = [make_day(np.full(24, 2.5), date=MONDAY + dt.timedelta(days=d)) for d in range(6)]
    report = prep.compare_fill_methods(days, 0.1, seed=1)
    for method in prep.FILL_METHODS:
        assert report.mean_abs_error[method] == pytest.approx(0.0, abs=1e-12)


def test_compare_is_deterministic_under_seed():
    days = _smooth_days()
    r1 = prep.compare_fill_methods(days, 0.08, seed=9)
    r2 = prep.compare_fill_methods(days, 0.08, seed=9)
    assert r1.mean_abs_error == r2.mean_abs_error
    assert r1.p99_abs_error == r2.p99_abs_error


def test_compare_rejects_bad_mask_fraction():
    days = _smooth_days(1, 2)
    for bad in (0.0, 0.25, -0.1):
        with pytest.raises(ValueError):
            prep.compare_fill_methods(days, bad, seed=1)


def test_compare_linear_wins_on_smooth_days():
    report = prep.compare_fill_methods(_smooth_days(4, 12), 0.08, seed=3)
    assert report.best_method() == "linear"


# ---------------------------------------------------------------------------
# normalise
# ---------------------------------------------------------------------------


def test_normalise_example():
    profile, factor = prep.normalise(make_day([2.0, 2.0, 4.0]))
    assert factor == pytest.approx(8.0)
    assert profile.values == pytest.approx([0.25, 0.25, 0.5])
    assert not profile.zero_day


def test_normalise_zero_day():
    profile, factor = prep.normalise(make_day([0.0, 0.0, 0.0]))
    assert factor == 0.0
    assert profile.zero_day
    assert np.all(profile.values == 0.0)


def test_normalise_unit_sum_identity():
    values = [0.25, 0.25, 0.5]
    profile, factor = prep.normalise(make_day(values))
    assert factor == pytest.approx(1.0, rel=1e-12)
    assert profile.values == pytest.approx(values, rel=1e-12)


def test_normalise_rejects_negatives_and_gaps():
    with pytest.raises(ValueError):
        prep.normalise(make_day([1.0, -0.5]))
    with pytest.raises(ValueError):
        prep.normalise(make_day([1.0, 2.0], gaps=[0]))


@given(st.lists(st.floats(min_value=1e-6, max_value=1e3), min_size=2, max_size=48))
def test_normalise_round_trip(values):
    day = make_day(values)
    profile, factor = prep.normalise(day)
    assert abs(profile.values.sum() - 1.0) < 1e-9
    reconstructed = prep.rescale(profile, factor)
    assert np.max(np.abs(reconstructed - day.values)) < 1e-12 * max(values)


# ---------------------------------------------------------------------------
# features
# ---------------------------------------------------------------------------


def test_uniform_profile_features():
    profile = NormalisedProfile(np.full(24, 1.0 / 24))
    feats = prep.extract_features(profile, "load_features")
    assert feats[0] == pytest.approx(1 / 24)
    assert feats[2:] == pytest.approx(np.full(6, 1 / 24))


def test_spike_profile_features():
    values = np.zeros(24)
    values[18] = 1.0
    feats = prep.extract_features(NormalisedProfile(values), "load_features")
    assert feats[0] == pytest.approx(1.0)
    assert feats[1] == pytest.approx(18 / 24)
    # windows 0-7, 7-11, 11-14, 14-17, 17-21, 21-24; the spike sits in 17-21 (4 steps)
    assert feats[2:] == pytest.approx([0, 0, 0, 0, 0.25, 0])


def test_ev_features_cover_daytime_window():
    values = np.arange(24, dtype=float)
    values /= values.sum()
    feats = prep.extract_features(NormalisedProfile(values), "ev_features")
    assert len(feats) == 16  # steps 6..21
    assert feats[0] == pytest.approx(values[6])
    assert feats[-1] == pytest.approx(values[21])


def test_month_group_has_no_features():
    with pytest.raises(ValueError):
        prep.extract_features(NormalisedProfile(np.full(24, 1 / 24)), "month_group")


# ---------------------------------------------------------------------------
# kmeans
# ---------------------------------------------------------------------------


def test_kmeans_separable_1d():
    points = np.array([[0.0], [0.1], [10.0], [10.1]])
    fit = prep.kmeans_fit(points, 2, seed=0)
    centroids = sorted(fit.centroids[:, 0].tolist())
    assert centroids == pytest.approx([0.05, 10.05])


def test_kmeans_k1_is_the_mean(rng):
    points = rng.random((50, 3))
    fit = prep.kmeans_fit(points, 1, seed=0)
    assert fit.centroids[0] == pytest.approx(points.mean(axis=0))


def test_kmeans_rejects_k_above_n():
    with pytest.raises(ValueError):
        prep.kmeans_fit(np.zeros((3, 2)), 4, seed=0)


def test_kmeans_objective_non_increasing(rng):
    points = np.vstack([rng.normal(c, 0.3, size=(40, 4)) for c in (0.0, 3.0, 6.0)])
    fit = prep.kmeans_fit(points, 3, seed=1)
    history = np.array(fit.inertia_history)
    assert np.all(np.diff(history) <= 1e-9)


def test_kmeans_deterministic(rng):
    points = rng.random((60, 5))
    a = prep.kmeans_fit(points, 4, seed=7)
    b = prep.kmeans_fit(points, 4, seed=7)
    assert np.array_equal(a.centroids, b.centroids)
    assert np.array_equal(a.labels, b.labels)


def _best_permutation_agreement(labels, truth, k):
    best = 0.0
    for perm in permutations(range(k)):
        mapped = np.array([perm[l] for l in labels])
        best = max(best, float(np.mean(mapped == truth)))
    return best


def test_kmeans_recovers_separated_blobs(rng):
    truth = np.repeat(np.arange(4), 50)
    centers = np.array([[0, 0], [5, 0], [0, 5], [5, 5]], dtype=float)
    points = centers[truth] + 0.4 * rng.standard_normal((200, 2))
    fit = prep.kmeans_fit(points, 4, seed=3)
    assert _best_permutation_agreement(fit.labels, truth, 4) >= 0.95


# ---------------------------------------------------------------------------
# assign_cluster
# ---------------------------------------------------------------------------


def test_assign_month_group():
    model = prep.ClusterModel("pv", "all", 12, "month_group", None)
    profile = NormalisedProfile(np.full(24, 1 / 24))
    assert prep.assign_cluster(model, profile, dt.date(2013, 3, 15)) == 3


def test_assign_ev_zero_day_goes_to_no_travel():
    model = prep.ClusterModel("ev", "wd", 4, "ev_features", np.zeros((3, 16)), no_travel_cluster=3)
    profile = NormalisedProfile(np.zeros(24), zero_day=True)
    assert prep.assign_cluster(model, profile, MONDAY) == 3


def test_assign_tie_breaks_to_lowest_index():
    # three centroids in feature space; craft a profile equidistant from 1 and 2
    profile = NormalisedProfile(np.full(24, 1.0 / 24))
    feats = prep.extract_features(profile, "load_features")
    c1 = feats.copy()
    c1[0] += 1.0
    c2 = feats.copy()
    c2[0] -= 1.0
    c0 = feats.copy()
    c0[0] += 5.0
    model = prep.ClusterModel("load", "wd", 3, "load_features", np.vstack([c0, c1, c2]))
    assert prep.assign_cluster(model, profile, MONDAY) == 1


def test_assign_is_idempotent(rng):
    centroids = rng.random((4, 8))
    model = prep.ClusterModel("load", "wd", 4, "load_features", centroids)
    values = rng.random(24)
    profile = NormalisedProfile(values / values.sum())
    first = prep.assign_cluster(model, profile, MONDAY)
    assert all(prep.assign_cluster(model, profile, MONDAY) == first for _ in range(5))


def test_fit_cluster_model_reserves_no_travel():
    rng = np.random.default_rng(0)
    profiles = []
    for _ in range(30):
        values = rng.random(24)
        profiles.append(NormalisedProfile(values / values.sum()))
    profiles.append(NormalisedProfile(np.zeros(24), zero_day=True))
    model, labels = prep.fit_cluster_model(profiles, "ev", "wd", 3, seed=2)
    assert model.k == 4 and model.no_travel_cluster == 3
    assert labels[-1] == 3
    assert set(labels[:-1]) <= {0, 1, 2}
