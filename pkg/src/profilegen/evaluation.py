"""Generator assessment: percentile bands and the TSTR/TRTS classifier protocol."""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, replace

import numpy as np

from .neural import (
    Adam,
    DenseNet,
    GanWeights,
    TrainConfig,
    backward,
    build_gan,
    forward,
    init_net,
    population_stats,
    sample_population,
    schedule,
    train_gan,
)
from .prep import ClusterModel, NormalisedProfile, assign_cluster

log = logging.getLogger(__name__)

MIN_CLUSTER_PROFILES = 5
DEFAULT_REPETITIONS = 10
CLASSIFIER_EPOCHS = 100


@dataclass
class EvalReport:
    """Classifier-based usefulness scores for one (data type, day type)."""

    tstr_accuracy: float
    trts_accuracy: float
    random_baseline: float
    centroid_baseline_accuracy: float
    repetitions: int
    tstr_per_rep: list[float]
    trts_per_rep: list[float]

    def to_dict(self) -> dict:
        return {
            "tstr_accuracy": self.tstr_accuracy,
            "trts_accuracy": self.trts_accuracy,
            "random_baseline": self.random_baseline,
            "centroid_baseline_accuracy": self.centroid_baseline_accuracy,
            "repetitions": self.repetitions,
            "tstr_per_rep": self.tstr_per_rep,
            "trts_per_rep": self.trts_per_rep,
        }


def percentile_bands(population: np.ndarray) -> np.ndarray:
    """Per-timestep 10/25/50/75/90th percentiles and mean, shape (6, T)."""
    pop = np.asarray(population, dtype=float)
    if pop.ndim != 2 or pop.shape[0] < 2:
        raise ValueError("percentile_bands needs at least 2 profiles")
    return population_stats(pop)


# ---------------------------------------------------------------------------
# Classifier (reuses the dense-network stack)
# ---------------------------------------------------------------------------


def train_classifier(
    profiles: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    seed: int,
    epochs: int = CLASSIFIER_EPOCHS,
    hidden: tuple[int, ...] = (32,),
    batch_size: int = 64,
) -> DenseNet:
    """Softmax profile-to-cluster classifier trained with cross-entropy."""
    x = np.asarray(profiles, dtype=float)
    y = np.asarray(labels, dtype=int)
    rng = np.random.default_rng(seed)
    net = init_net([x.shape[1], *hidden, n_classes], "relu", "softmax", dropout_p=0.0, rng=rng)
    opt = Adam(net.parameters(), beta1=0.9)
    n = len(x)
    for epoch in range(epochs):
        lr = schedule(1e-2, 1e-3, epoch, epochs)
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            probs, cache = forward(net, x[idx], train=False)
            m = len(idx)
            grad = np.zeros_like(probs)
            picked = np.clip(probs[np.arange(m), y[idx]], 1e-12, None)
            grad[np.arange(m), y[idx]] = -1.0 / (picked * m)
            grads, _ = backward(net, grad, cache)
            opt.step(net.parameters(), grads.flat(), lr)
    return net


def classify(net: DenseNet, profiles: np.ndarray) -> np.ndarray:
    probs, _ = forward(net, np.asarray(profiles, dtype=float), train=False)
    return probs.argmax(axis=1)


def accuracy(net: DenseNet, profiles: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(classify(net, profiles) == np.asarray(labels)))


# ---------------------------------------------------------------------------
# TSTR / TRTS
# ---------------------------------------------------------------------------


def _stratified_split(
    labels: np.ndarray, train_fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    train_idx: list[int] = []
    test_idx: list[int] = []
    for cluster in np.unique(labels):
        members = np.flatnonzero(labels == cluster)
        members = members[rng.permutation(len(members))]
        cut = max(1, min(len(members) - 1, int(round(train_fraction * len(members)))))
        train_idx.extend(members[:cut].tolist())
        test_idx.extend(members[cut:].tolist())
    return np.array(sorted(train_idx)), np.array(sorted(test_idx))


@dataclass
class _Repetition:
    tstr: float
    trts: float


def _run_repetition(
    profiles: np.ndarray,
    labels: np.ndarray,
    clusters: np.ndarray,
    cfg: TrainConfig,
    seed: int,
    synth_per_cluster: int,
) -> _Repetition:
    """One 80/20 split, per-cluster GAN training, and both classifier passes.

    All clusters share one init seed and one sampling seed per repetition
    (common random numbers): trained generators differ only through their
    data, and the epoch-0 ablation stays genuinely uninformative.
    """
    rng = np.random.default_rng(seed)
    train_idx, test_idx = _stratified_split(labels, 0.8, rng)
    k = len(clusters)
    cluster_pos = {c: i for i, c in enumerate(clusters)}
    init_seed = int(rng.integers(2**31))
    sample_seed = int(rng.integers(2**31))

    synth_x: list[np.ndarray] = []
    synth_y: list[int] = []
    for cluster in clusters:
        members = train_idx[labels[train_idx] == cluster]
        train_profiles = profiles[members]
        gan_cfg = replace(cfg, seed=init_seed, population=min(cfg.population, len(members)))
        if cfg.n_epochs == 0:
            # untrained ablation: freshly initialized weights, no updates
            gen, disc = build_gan(profiles.shape[1], gan_cfg, np.random.default_rng(gan_cfg.seed))
            weights = GanWeights("", "", int(cluster), profiles.shape[1], gan_cfg.noise_dim, gen, disc,
                                 population_stats(train_profiles), len(members))
        else:
            weights, _ = train_gan(train_profiles, gan_cfg, cluster=int(cluster))
        synth = sample_population(weights, synth_per_cluster, sample_seed)
        synth_x.append(synth)
        synth_y.extend([cluster_pos[cluster]] * synth_per_cluster)

    synth_profiles = np.vstack(synth_x)
    synth_labels = np.array(synth_y)
    test_profiles = profiles[test_idx]
    test_labels = np.array([cluster_pos[c] for c in labels[test_idx]])

    tstr_net = train_classifier(synth_profiles, synth_labels, k, seed=int(rng.integers(2**31)))
    tstr_acc = accuracy(tstr_net, test_profiles, test_labels)

    trts_net = train_classifier(test_profiles, test_labels, k, seed=int(rng.integers(2**31)))
    trts_acc = accuracy(trts_net, synth_profiles, synth_labels)
    return _Repetition(tstr_acc, trts_acc)


def evaluate_tstr_trts(
    profiles: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig,
    seed: int,
    repetitions: int = DEFAULT_REPETITIONS,
    cluster_model: ClusterModel | None = None,
    synth_per_cluster: int | None = None,
) -> EvalReport:
    """Both protocols over the requested repetitions, sharing trained GANs.

    Clusters with fewer than five profiles are excluded with a warning; at
    least two usable clusters are required. The random baseline is 1/K and
    the centroid baseline re-assigns profiles to the fitted model's nearest
    centroid.
    """
    profiles = np.asarray(profiles, dtype=float)
    labels = np.asarray(labels, dtype=int)
    counts = {int(c): int((labels == c).sum()) for c in np.unique(labels)}
    usable = [c for c, n in counts.items() if n >= MIN_CLUSTER_PROFILES]
    for c, n in counts.items():
        if n < MIN_CLUSTER_PROFILES:
            log.warning("excluding cluster %d with only %d profiles", c, n)
    if len(usable) < 2:
        raise ValueError("evaluation needs at least 2 clusters with enough profiles")
    keep = np.isin(labels, usable)
    profiles = profiles[keep]
    labels = labels[keep]
    clusters = np.array(sorted(usable))

    if synth_per_cluster is None:
        # equal count per cluster, matching the training split size but capped
        # so classifier training stays cheap on large corpora
        synth_per_cluster = max(cfg.population, int(round(0.8 * len(profiles) / len(clusters))))
        synth_per_cluster = min(synth_per_cluster, 500)

    reps: list[_Repetition] = []
    for rep in range(repetitions):
        reps.append(_run_repetition(profiles, labels, clusters, cfg, seed + rep, synth_per_cluster))

    centroid_acc = float("nan")
    if cluster_model is not None and cluster_model.centroids is not None:
        any_date = dt.date(2000, 1, 1)  # feature-based assignment ignores the date
        predicted = np.array(
            [assign_cluster(cluster_model, NormalisedProfile(p), any_date) for p in profiles]
        )
        centroid_acc = float(np.mean(predicted == labels))

    return EvalReport(
        tstr_accuracy=float(np.mean([r.tstr for r in reps])),
        trts_accuracy=float(np.mean([r.trts for r in reps])),
        random_baseline=1.0 / len(clusters),
        centroid_baseline_accuracy=centroid_acc,
        repetitions=repetitions,
        tstr_per_rep=[r.tstr for r in reps],
        trts_per_rep=[r.trts for r in reps],
    )


def tstr(
    profiles: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig,
    seed: int,
    repetitions: int = DEFAULT_REPETITIONS,
    **kwargs,
) -> EvalReport:
    """Train-on-synthetic / test-on-real protocol (TRTS numbers come along for free)."""
    return evaluate_tstr_trts(profiles, labels, cfg, seed, repetitions, **kwargs)


def trts(
    profiles: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig,
    seed: int,
    repetitions: int = DEFAULT_REPETITIONS,
    **kwargs,
) -> EvalReport:
    """Train-on-real / test-on-synthetic protocol (shares the TSTR machinery)."""
    return evaluate_tstr_trts(profiles, labels, cfg, seed, repetitions, **kwargs)
