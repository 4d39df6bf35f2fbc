"""Drawing labeled datasets from mixture models.

Points follow the direction-times-radius scheme: a uniform direction on
the unit sphere is stretched by the cluster's axes and scaled by a draw
from the normalized radial distribution.  The normal family is the one
exception: there the radius follows chi(dim) rather than |N(0,1)|, which
makes the sampled cluster an exact multivariate normal with the cluster's
covariance, so the Gaussian overlap formulas hold in-sample.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .mixture import Cluster, MixtureModel


@dataclass(frozen=True)
class Dataset:
    """Point matrix, integer labels, and the generating archetype's name."""

    points: np.ndarray
    labels: np.ndarray
    archetype_name: str

    @property
    def n_samples(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def sample_cluster_points(cluster: Cluster, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. points from one cluster (n x dim)."""
    dim = cluster.dim
    if n == 0:
        return np.empty((0, dim))
    dist = cluster.radial_distribution
    if dist.name == "normal":
        scaled = rng.standard_normal((n, dim)) / dist.norm_constant * cluster.axis_lengths
    else:
        directions = rng.standard_normal((n, dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = dist.draw(rng, n)
        scaled = radii[:, None] * directions * cluster.axis_lengths
    return cluster.center + scaled @ cluster.axes.T


def sample_dataset(model: MixtureModel, rng: np.random.Generator) -> Dataset:
    """One labeled dataset: group_sizes[j] points per cluster, rows shuffled."""
    parts = []
    labels = []
    for j, (cluster, size) in enumerate(zip(model.clusters, model.group_sizes)):
        parts.append(sample_cluster_points(cluster, int(size), rng))
        labels.append(np.full(int(size), j, dtype=int))
    points = np.vstack(parts)
    labels = np.concatenate(labels)
    order = rng.permutation(points.shape[0])
    return Dataset(points[order], labels[order], model.archetype_name)


def dataset_to_csv(dataset: Dataset, path) -> None:
    """Write x1..x{dim},label rows with round-trip-stable float formatting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(dataset.dim)] + ["label"])
        for row, label in zip(dataset.points, dataset.labels):
            writer.writerow([f"{v:.17g}" for v in row] + [int(label)])


def dataset_from_csv(path, archetype_name: str = "") -> Dataset:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-1] != "label":
            raise ValueError(f"{path}: expected trailing 'label' column, got {header[-1]!r}")
        points, labels = [], []
        for row in reader:
            points.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
    dim = len(header) - 1
    return Dataset(
        np.asarray(points, dtype=float).reshape(len(labels), dim),
        np.asarray(labels, dtype=int),
        archetype_name,
    )
