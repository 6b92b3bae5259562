"""Shared fixtures: tiny corpora, stub artifacts, day-profile builders."""

from __future__ import annotations

import datetime as dt

import numpy as np
import pytest

from profilegen.corpus import Archetype, CorpusSpec
from profilegen.engine import DataTypeArtifacts
from profilegen.ingest import DayProfile
from profilegen.neural import GanWeights, TrainConfig, build_gan, population_stats
from profilegen.prep import ClusterModel
from profilegen.transitions import (
    ClusterTransitionMatrix,
    FactorBins,
    FactorTransitionMatrix,
)

MONDAY = dt.date(2013, 1, 7)


def make_day(
    values,
    home_id: str = "h1",
    date: dt.date = MONDAY,
    data_type: str = "load",
    gaps=(),
    availability=None,
) -> DayProfile:
    return DayProfile(
        home_id,
        date,
        data_type,
        np.asarray(values, dtype=float),
        gaps=list(gaps),
        availability=None if availability is None else np.asarray(availability, dtype=float),
    )


def bump_shape(t_steps: int, center_hour: float, width: float, base: float = 0.05) -> tuple:
    hours = (np.arange(t_steps) + 0.5) * (24.0 / t_steps)
    return tuple((base + np.exp(-0.5 * ((hours - center_hour) / width) ** 2)).tolist())


def single_type_spec(
    n_homes: int,
    n_days: int,
    data_type: str = "load",
    t_steps: int = 24,
    seed: int = 11,
    rho: float = 0.8,
    sigma: float = 0.25,
    n_archetypes: int = 1,
    **rates,
) -> CorpusSpec:
    centers = (7.5, 19.0, 13.0, 1.5)
    archetypes = tuple(
        Archetype(
            name=f"a{i}",
            shape=bump_shape(t_steps, centers[i % len(centers)], 1.5 + 0.3 * i),
            factor_mean=8.0 + 2.0 * i,
            factor_rho=rho,
            factor_sigma=sigma,
            shape_noise=0.12,
        )
        for i in range(n_archetypes)
    )
    return CorpusSpec(
        n_homes=n_homes,
        n_days=n_days,
        resolution_minutes=1440 // t_steps,
        archetypes={data_type: archetypes},
        seed=seed,
        **rates,
    )


def stub_gan(t_steps: int = 24, cluster: int = 0, day_type: str = "wd", seed: int = 0) -> GanWeights:
    """Untrained small generator, good enough for engine plumbing tests."""
    cfg = TrainConfig(noise_dim=4, generator_hidden=(8,), discriminator_hidden=(8,))
    gen, disc = build_gan(t_steps, cfg, np.random.default_rng(seed))
    fake_real = np.random.default_rng(seed + 1).random((20, t_steps))
    return GanWeights("load", day_type, cluster, t_steps, 4, gen, disc, population_stats(fake_real))


def uniform_bins(m: int, lo: float = 0.0, hi: float = 10.0) -> FactorBins:
    return FactorBins(np.linspace(lo, hi, m + 1))


def stub_artifacts(
    k: int = 3,
    m: int = 5,
    t_steps: int = 24,
    cluster_probs: np.ndarray | None = None,
    factor_probs: np.ndarray | None = None,
    cluster_init: np.ndarray | None = None,
    factor_init: np.ndarray | None = None,
    data_type: str = "load",
    no_travel_cluster: int | None = None,
    seed: int = 0,
) -> DataTypeArtifacts:
    """In-memory artifact set with identical matrices for all four transitions."""
    bins = uniform_bins(m)
    if cluster_probs is None:
        cluster_probs = np.full((k, k), 1.0 / k)
    if factor_probs is None:
        factor_probs = np.full((m, m), 1.0 / m)
    if cluster_init is None:
        cluster_init = np.full(k, 1.0 / k)
    if factor_init is None:
        factor_init = np.full(m, 1.0 / m)

    gans = {}
    for day_type in ("wd", "we"):
        for cluster in range(k):
            if cluster == no_travel_cluster:
                continue
            gans[(day_type, cluster)] = stub_gan(t_steps, cluster, day_type, seed + cluster)

    factor_matrices = {}
    cluster_matrices = {}
    for d_from in ("wd", "we"):
        for d_to in ("wd", "we"):
            factor_matrices[(d_from, d_to)] = FactorTransitionMatrix(
                data_type, d_from, d_to, bins, factor_probs.copy(), factor_init.copy()
            )
            cluster_matrices[(d_from, d_to)] = ClusterTransitionMatrix(
                data_type, d_from, d_to, k, cluster_probs.copy(), cluster_init.copy()
            )

    feature_spec = "ev_features" if data_type == "ev" else "load_features"
    centroid_dim = 16 if data_type == "ev" else 8
    fitted = k - 1 if no_travel_cluster is not None else k
    models = {
        day_type: ClusterModel(
            data_type,
            day_type,
            k,
            feature_spec,
            np.random.default_rng(seed).random((fitted, centroid_dim)),
            no_travel_cluster=no_travel_cluster,
        )
        for day_type in ("wd", "we")
    }
    return DataTypeArtifacts(
        data_type=data_type,
        t_steps=t_steps,
        cluster_models=models,
        gans=gans,
        factor_matrices=factor_matrices,
        cluster_matrices=cluster_matrices,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
