"""Per-home Markov generation: cluster step, profile draw, factor scaling.

Each home owns a seeded RNG and a small state (cluster, factor bin, factor,
day type). Advancing one day samples the next behaviour cluster, draws one
profile from the matching generator population, then samples and applies the
next scaling factor. All artifacts are immutable, so homes are independent.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .common import MissingArtifactError, day_type_of
from .neural import GanWeights, sample_population
from .prep import ClusterModel
from .transitions import ClusterTransitionMatrix, FactorTransitionMatrix

DRIVING_EPS = 1e-6


@dataclass
class DataTypeArtifacts:
    """Everything the engine needs for one data type."""

    data_type: str
    t_steps: int
    cluster_models: dict[str, ClusterModel]
    gans: dict[tuple[str, int], GanWeights]  # (day_type, cluster) -> weights
    factor_matrices: dict[tuple[str, str], FactorTransitionMatrix]
    cluster_matrices: dict[tuple[str, str], ClusterTransitionMatrix] = field(default_factory=dict)

    @property
    def month_grouped(self) -> bool:
        return any(m.feature_spec == "month_group" for m in self.cluster_models.values())

    def gan_day_type(self, day_to: str) -> str:
        # month-grouped generators are day-type independent and live under "all"
        return "all" if self.month_grouped else day_to

    def no_travel_cluster(self, day_type: str) -> int | None:
        model = self.cluster_models.get(day_type)
        return None if model is None else model.no_travel_cluster

    def gan_for(self, day_type: str, cluster: int) -> GanWeights:
        key = (day_type, cluster)
        if key not in self.gans:
            raise MissingArtifactError(f"{self.data_type}: no generator for day_type={day_type} cluster={cluster}")
        return self.gans[key]

    def factor_matrix(self, day_from: str, day_to: str) -> FactorTransitionMatrix:
        key = (day_from, day_to)
        if key not in self.factor_matrices:
            raise MissingArtifactError(f"{self.data_type}: no factor matrix for {day_from}->{day_to}")
        return self.factor_matrices[key]

    def cluster_matrix(self, day_from: str, day_to: str) -> ClusterTransitionMatrix:
        key = (day_from, day_to)
        if key not in self.cluster_matrices:
            raise MissingArtifactError(f"{self.data_type}: no cluster matrix for {day_from}->{day_to}")
        return self.cluster_matrices[key]


@dataclass
class HomeState:
    home_id: str
    data_type: str
    cluster: int
    factor_bin: int
    factor: float
    day_type: str
    rng: np.random.Generator


@dataclass
class GeneratedDay:
    date: dt.date
    values: np.ndarray
    cluster: int
    factor: float
    availability: np.ndarray | None = None


def init_home(
    data_type: str,
    artifacts: DataTypeArtifacts,
    seed,
    first_date: dt.date,
    home_id: str = "",
) -> HomeState:
    """Draw the starting cluster and factor bin from the empirical marginals.

    The state describes a virtual day preceding ``first_date``; every actual
    day, including the first, is then produced by :func:`next_day`.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    day_type = day_type_of(first_date)
    if artifacts.month_grouped:
        cluster = first_date.month
    else:
        cm = artifacts.cluster_matrix(day_type, day_type)
        cluster = int(rng.choice(cm.k, p=cm.initial_dist))
    fm = artifacts.factor_matrix(day_type, day_type)
    factor_bin = int(rng.choice(fm.bins.m, p=fm.initial_dist))
    factor = float(rng.uniform(fm.bins.edges[factor_bin], fm.bins.edges[factor_bin + 1]))
    return HomeState(home_id, data_type, cluster, factor_bin, factor, day_type, rng)


def derive_availability(values: np.ndarray, eps: float = DRIVING_EPS) -> np.ndarray:
    """At-home flags from generated driving demand.

    Every step carrying demand is away, and so is the whole span between the
    first and last driving step (the car is out between the outbound and the
    return leg). A zero profile means the car stays home all day.
    """
    values = np.asarray(values, dtype=float)
    if (values < 0).any():
        raise ValueError("driving demand must be nonnegative")
    availability = np.ones(len(values))
    driving = np.flatnonzero(values > eps * values.sum())
    if driving.size:
        availability[driving[0] : driving[-1] + 1] = 0.0
    return availability


def next_day(
    state: HomeState,
    date: dt.date,
    artifacts: DataTypeArtifacts,
    population: int = 50,
) -> tuple[GeneratedDay, HomeState]:
    """Advance the Markov state one day and emit the generated profile.

    No-travel days produce zeros with full availability and carry the factor
    bin over unchanged, so factor continuity survives gaps in travel.
    """
    day_to = day_type_of(date)
    key_from = state.day_type
    rng = state.rng

    if artifacts.month_grouped:
        cluster = date.month
    else:
        cm = artifacts.cluster_matrix(key_from, day_to)
        cluster = int(rng.choice(cm.k, p=cm.probs[state.cluster]))

    no_travel = artifacts.no_travel_cluster(day_to)
    if no_travel is not None and cluster == no_travel:
        day = GeneratedDay(
            date=date,
            values=np.zeros(artifacts.t_steps),
            cluster=cluster,
            factor=0.0,
            availability=np.ones(artifacts.t_steps),
        )
        new_state = HomeState(
            state.home_id, state.data_type, cluster, state.factor_bin, 0.0, day_to, rng
        )
        return day, new_state

    gan = artifacts.gan_for(artifacts.gan_day_type(day_to), cluster)
    pop = sample_population(gan, population, rng)
    profile = pop[int(rng.integers(population))]
    profile = profile / profile.sum()  # exact unit sum at the consumption point

    fm = artifacts.factor_matrix(key_from, day_to)
    factor_bin = int(rng.choice(fm.bins.m, p=fm.probs[state.factor_bin]))
    factor = float(rng.uniform(fm.bins.edges[factor_bin], fm.bins.edges[factor_bin + 1]))

    values = factor * profile
    availability = derive_availability(values) if state.data_type == "ev" else None
    day = GeneratedDay(date=date, values=values, cluster=cluster, factor=factor, availability=availability)
    new_state = HomeState(state.home_id, state.data_type, cluster, factor_bin, factor, day_to, rng)
    return day, new_state


def generate_home(
    data_type: str,
    artifacts: DataTypeArtifacts,
    seed,
    dates: list[dt.date],
    home_id: str = "",
    population: int = 50,
) -> list[GeneratedDay]:
    """Full multi-day sequence for one home; deterministic under the seed."""
    if not dates:
        return []
    state = init_home(data_type, artifacts, seed, dates[0], home_id)
    days: list[GeneratedDay] = []
    for date in dates:
        day, state = next_day(state, date, artifacts, population)
        days.append(day)
    return days
