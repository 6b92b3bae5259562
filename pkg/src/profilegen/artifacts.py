"""JSON persistence for trained artifacts, plus run manifests and checksums.

Layout under the artifact directory:

    {data_type}/{day_type}/{cluster}/gan.json            generator weights
    {data_type}/{day_type}/{cluster}/profiles.csv        training profiles
    {data_type}/transitions_{d_from}_{d_to}.json         factor matrices
    {data_type}/cluster_transitions_{d_from}_{d_to}.json cluster matrices
    {data_type}/clusters_{day_type}.json                 cluster model
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .common import DAY_TYPE_TRANSITIONS, MissingArtifactError
from .engine import DataTypeArtifacts
from .neural import DenseNet, GanWeights
from .prep import ClusterModel
from .transitions import ClusterTransitionMatrix, FactorBins, FactorTransitionMatrix


def _dump(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def _load(path: Path) -> dict:
    if not path.exists():
        raise MissingArtifactError(str(path))
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Nets and GAN weights
# ---------------------------------------------------------------------------


def net_to_dict(net: DenseNet) -> dict:
    return {
        "layer_dims": list(net.layer_dims),
        "hidden_activation": net.hidden_activation,
        "output_activation": net.output_activation,
        "dropout_p": net.dropout_p,
        "weights": [w.flatten().tolist() for w in net.weights],  # row-major
        "biases": [b.tolist() for b in net.biases],
    }


def net_from_dict(payload: dict) -> DenseNet:
    dims = payload["layer_dims"]
    weights = [
        np.array(flat, dtype=float).reshape(dims[i], dims[i + 1])
        for i, flat in enumerate(payload["weights"])
    ]
    biases = [np.array(b, dtype=float) for b in payload["biases"]]
    return DenseNet(
        list(dims),
        weights,
        biases,
        payload["hidden_activation"],
        payload["output_activation"],
        payload["dropout_p"],
    )


def save_gan(path: Path, weights: GanWeights) -> None:
    _dump(
        path,
        {
            "data_type": weights.data_type,
            "day_type": weights.day_type,
            "cluster": weights.cluster,
            "t_steps": weights.t_steps,
            "noise_dim": weights.noise_dim,
            "generator": net_to_dict(weights.generator),
            "discriminator": net_to_dict(weights.discriminator),
            "real_percentile_targets": weights.real_stats.tolist(),
            "training_size": weights.training_size,
        },
    )


def load_gan(path: Path) -> GanWeights:
    payload = _load(path)
    return GanWeights(
        data_type=payload["data_type"],
        day_type=payload["day_type"],
        cluster=payload["cluster"],
        t_steps=payload["t_steps"],
        noise_dim=payload["noise_dim"],
        generator=net_from_dict(payload["generator"]),
        discriminator=net_from_dict(payload["discriminator"]),
        real_stats=np.array(payload["real_percentile_targets"], dtype=float),
        training_size=payload.get("training_size", 0),
    )


# ---------------------------------------------------------------------------
# Cluster models and matrices
# ---------------------------------------------------------------------------


def save_cluster_model(path: Path, model: ClusterModel) -> None:
    _dump(
        path,
        {
            "data_type": model.data_type,
            "day_type": model.day_type,
            "K": model.k,
            "feature_spec": model.feature_spec,
            "centroids": None if model.centroids is None else model.centroids.tolist(),
            "no_travel_cluster": model.no_travel_cluster,
        },
    )


def load_cluster_model(path: Path) -> ClusterModel:
    payload = _load(path)
    centroids = payload["centroids"]
    return ClusterModel(
        data_type=payload["data_type"],
        day_type=payload["day_type"],
        k=payload["K"],
        feature_spec=payload["feature_spec"],
        centroids=None if centroids is None else np.array(centroids, dtype=float),
        no_travel_cluster=payload["no_travel_cluster"],
    )


def save_factor_matrix(path: Path, matrix: FactorTransitionMatrix) -> None:
    _dump(
        path,
        {
            "data_type": matrix.data_type,
            "d_from": matrix.day_from,
            "d_to": matrix.day_to,
            "bin_edges": matrix.bins.edges.tolist(),
            "probs": matrix.probs.flatten().tolist(),  # row-major
            "initial_dist": matrix.initial_dist.tolist(),
        },
    )


def load_factor_matrix(path: Path) -> FactorTransitionMatrix:
    payload = _load(path)
    bins = FactorBins(np.array(payload["bin_edges"], dtype=float))
    probs = np.array(payload["probs"], dtype=float).reshape(bins.m, bins.m)
    matrix = FactorTransitionMatrix(
        payload["data_type"],
        payload["d_from"],
        payload["d_to"],
        bins,
        probs,
        np.array(payload["initial_dist"], dtype=float),
    )
    matrix.validate()
    return matrix


def save_cluster_matrix(path: Path, matrix: ClusterTransitionMatrix) -> None:
    _dump(
        path,
        {
            "data_type": matrix.data_type,
            "d_from": matrix.day_from,
            "d_to": matrix.day_to,
            "K": matrix.k,
            "probs": matrix.probs.flatten().tolist(),
            "initial_dist": matrix.initial_dist.tolist(),
        },
    )


def load_cluster_matrix(path: Path) -> ClusterTransitionMatrix:
    payload = _load(path)
    k = payload["K"]
    matrix = ClusterTransitionMatrix(
        payload["data_type"],
        payload["d_from"],
        payload["d_to"],
        k,
        np.array(payload["probs"], dtype=float).reshape(k, k),
        np.array(payload["initial_dist"], dtype=float),
    )
    matrix.validate()
    return matrix


# ---------------------------------------------------------------------------
# Training profiles
# ---------------------------------------------------------------------------


def save_profiles(path: Path, profiles: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for row in np.asarray(profiles, dtype=float):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_profiles(path: Path) -> np.ndarray:
    if not path.exists():
        raise MissingArtifactError(str(path))
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    return np.array(rows, dtype=float)


# ---------------------------------------------------------------------------
# Layout
# ---------------------------------------------------------------------------


def gan_dir(root: Path, data_type: str, day_type: str, cluster: int) -> Path:
    return Path(root) / data_type / day_type / str(cluster)


def gan_path(root: Path, data_type: str, day_type: str, cluster: int) -> Path:
    return gan_dir(root, data_type, day_type, cluster) / "gan.json"


def profiles_path(root: Path, data_type: str, day_type: str, cluster: int) -> Path:
    return gan_dir(root, data_type, day_type, cluster) / "profiles.csv"


def factor_matrix_path(root: Path, data_type: str, d_from: str, d_to: str) -> Path:
    return Path(root) / data_type / f"transitions_{d_from}_{d_to}.json"


def cluster_matrix_path(root: Path, data_type: str, d_from: str, d_to: str) -> Path:
    return Path(root) / data_type / f"cluster_transitions_{d_from}_{d_to}.json"


def cluster_model_path(root: Path, data_type: str, day_type: str) -> Path:
    return Path(root) / data_type / f"clusters_{day_type}.json"


def load_artifact_set(root: Path, data_type: str) -> DataTypeArtifacts:
    """Everything the generation engine needs for one data type."""
    root = Path(root)
    base = root / data_type
    if not base.exists():
        raise MissingArtifactError(str(base))

    cluster_models: dict[str, ClusterModel] = {}
    for path in sorted(base.glob("clusters_*.json")):
        model = load_cluster_model(path)
        cluster_models[model.day_type] = model
    if not cluster_models:
        raise MissingArtifactError(f"{base}/clusters_*.json")

    gans: dict[tuple[str, int], GanWeights] = {}
    for path in sorted(base.glob("*/*/gan.json")):
        weights = load_gan(path)
        gans[(weights.day_type, weights.cluster)] = weights
    if not gans:
        raise MissingArtifactError(f"{base}/*/*/gan.json")

    factor_matrices: dict[tuple[str, str], FactorTransitionMatrix] = {}
    for d_from, d_to in DAY_TYPE_TRANSITIONS:
        path = factor_matrix_path(root, data_type, d_from, d_to)
        if path.exists():
            factor_matrices[(d_from, d_to)] = load_factor_matrix(path)
    if not factor_matrices:
        raise MissingArtifactError(f"{base}/transitions_*.json")

    cluster_matrices: dict[tuple[str, str], ClusterTransitionMatrix] = {}
    for d_from, d_to in DAY_TYPE_TRANSITIONS:
        path = cluster_matrix_path(root, data_type, d_from, d_to)
        if path.exists():
            cluster_matrices[(d_from, d_to)] = load_cluster_matrix(path)

    t_steps = next(iter(gans.values())).t_steps
    return DataTypeArtifacts(
        data_type=data_type,
        t_steps=t_steps,
        cluster_models=cluster_models,
        gans=gans,
        factor_matrices=factor_matrices,
        cluster_matrices=cluster_matrices,
    )


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    config: dict,
    seed: int,
    input_files: list[Path] | None = None,
) -> Path:
    """Reproducibility record: config hash, seed, input checksums, version.

    Deliberately carries no timestamps so identical runs stay byte-identical.
    """
    from . import __version__

    inputs = {}
    for path in input_files or []:
        path = Path(path)
        if path.exists():
            inputs[str(path)] = file_sha256(path)
    manifest = {
        "command": command,
        "config": config,
        "config_sha256": config_hash(config),
        "seed": seed,
        "inputs": inputs,
        "version": __version__,
    }
    path = Path(out_dir) / "manifest.json"
    _dump(path, manifest)
    return path
