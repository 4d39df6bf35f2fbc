"""Concrete mixture models sampled from archetypes.

A cluster is an ellipsoidal distribution: a center, orthonormal principal
axes, per-axis lengths, and a radial distribution.  Sampling a mixture
model draws the geometry (orientations, aspect ratios, radii, axis
lengths, distribution assignment, group sizes) from the archetype and then
places the centers so the pairwise overlap constraints hold exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import archetype as arch
from . import placement
from .distributions import RadialDistribution
from .errors import NonConvergenceError


@dataclass(frozen=True)
class Cluster:
    """One ellipsoidal mixture component."""

    center: np.ndarray
    axes: np.ndarray  # columns are the principal axes
    axis_lengths: np.ndarray
    radial_distribution: RadialDistribution

    @property
    def dim(self) -> int:
        return self.center.shape[0]


@dataclass(frozen=True)
class MixtureModel:
    clusters: list[Cluster]
    group_sizes: np.ndarray
    archetype_name: str

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def dim(self) -> int:
        return self.clusters[0].dim

    @property
    def centers(self) -> np.ndarray:
        return np.stack([c.center for c in self.clusters])

    def covariances(self) -> np.ndarray:
        return np.stack([covariance_of(c) for c in self.clusters])

    def to_dict(self) -> dict:
        return {
            "archetype_name": self.archetype_name,
            "group_sizes": [int(s) for s in self.group_sizes],
            "clusters": [
                {
                    "center": c.center.tolist(),
                    "axes": c.axes.tolist(),  # row-major
                    "axis_lengths": c.axis_lengths.tolist(),
                    "distribution": c.radial_distribution.to_dict(),
                }
                for c in self.clusters
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "MixtureModel":
        clusters = [
            Cluster(
                center=np.asarray(c["center"], dtype=float),
                axes=np.asarray(c["axes"], dtype=float),
                axis_lengths=np.asarray(c["axis_lengths"], dtype=float),
                radial_distribution=RadialDistribution.from_dict(c["distribution"]),
            )
            for c in data["clusters"]
        ]
        return cls(
            clusters=clusters,
            group_sizes=np.asarray(data["group_sizes"], dtype=int),
            archetype_name=data["archetype_name"],
        )

    @classmethod
    def from_json(cls, text: str) -> "MixtureModel":
        return cls.from_dict(json.loads(text))


def sample_orientation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Rotation-invariant random orthonormal matrix.

    QR of a square standard-normal matrix, with column signs fixed by the
    diagonal of R so the distribution does not depend on the QR convention.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def covariance_of(cluster: Cluster) -> np.ndarray:
    """Sigma = U diag(lengths^2) U'."""
    u = cluster.axes
    return (u * cluster.axis_lengths**2) @ u.T


def sample_mixture_model(
    a: arch.Archetype,
    rng: np.random.Generator,
    config: placement.PlacementConfig | None = None,
    origin=None,
) -> MixtureModel:
    """Draw a mixture model matching the archetype, overlap constraints met.

    Single-cluster archetypes skip placement and sit at `origin` (default
    the coordinate origin).  Otherwise centers are initialized in a
    density-calibrated ball and optimized; on non-convergence the
    initialization is redrawn up to config.max_restarts times.
    """
    a.validated()
    config = config or placement.PlacementConfig()
    k, dim = a.n_clusters, a.dim

    aspects = arch.sample_aspect_ratios(a, rng)
    radii = arch.sample_cluster_radii(a, rng)
    lengths = np.stack(
        [arch.sample_axis_lengths(aspects[j], radii[j], dim, rng) for j in range(k)]
    )
    orientations = [sample_orientation(dim, rng) for _ in range(k)]
    families = arch.assign_distributions(a, rng)
    group_sizes = arch.sample_group_sizes(a, rng)

    if k == 1:
        center = np.zeros(dim) if origin is None else np.asarray(origin, dtype=float)
        centers = center[None, :]
    else:
        bounds = placement.OverlapBounds.from_overlaps(a.max_overlap, a.min_overlap)
        covs = np.stack(
            [(u * l**2) @ u.T for u, l in zip(orientations, lengths)]
        )
        last_error: NonConvergenceError | None = None
        for _ in range(config.max_restarts + 1):
            centers = placement.init_centers(k, dim, radii, config, rng)
            try:
                centers, _ = placement._optimize_arrays(
                    centers, covs, lengths, bounds, config, rng
                )
                last_error = None
                break
            except NonConvergenceError as exc:
                last_error = exc
        if last_error is not None:
            raise last_error

    clusters = [
        Cluster(
            center=centers[j],
            axes=orientations[j],
            axis_lengths=lengths[j],
            radial_distribution=RadialDistribution.create(families[j]),
        )
        for j in range(k)
    ]
    return MixtureModel(clusters=clusters, group_sizes=group_sizes, archetype_name=a.name)
