"""Cluster center initialization and overlap-constrained SGD placement.

Centers start uniform inside a ball sized so that the cluster density
matches a sphere-packing-adjusted target, then move by per-cluster
stochastic gradient descent on the overlap loss

    L = (1/k) sum_i [ p((min_j q_ij - q_max)^+) + sum_j p((q_min - q_ij)^+) ]

until every pairwise separation q_ij respects the bounds.  Separations use
the LDA axis oriented from i to j, so q_ij = q_ji >= 0.  Gradients freeze
the axis at the current iterate and differentiate only the explicit center
dependence; axes and axis lengths never change during placement.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import logsumexp

from .errors import NonConvergenceError
from .stats import normal_isf

if TYPE_CHECKING:  # pragma: no cover
    from .mixture import MixtureModel

_LOSS_SLACK = 1e-12


@dataclass(frozen=True)
class PlacementConfig:
    """Knobs for center initialization and SGD."""

    rho_2d: float = 0.10
    learning_rate: float | None = None  # None -> 0.1 * mean cluster radius
    penalty_mix: float = 0.5  # lambda in p(x) = lambda*x + (1-lambda)*x^2
    max_epochs: int = 1000
    loss_tolerance: float = 0.0
    max_restarts: int = 3
    rng_seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.penalty_mix <= 1.0:
            raise ValueError(f"penalty_mix must lie in [0, 1], got {self.penalty_mix}")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 < self.rho_2d < 1.0:
            raise ValueError(f"rho_2d must lie in (0, 1), got {self.rho_2d}")
        if self.loss_tolerance < 0:
            raise ValueError(f"loss_tolerance must be nonnegative, got {self.loss_tolerance}")


@dataclass(frozen=True)
class OverlapBounds:
    """Separation band [q_min, q_max] implied by the overlap constraints."""

    q_min: float
    q_max: float

    def __post_init__(self):
        if not 0 < self.q_min < self.q_max:
            raise ValueError(
                f"need 0 < q_min < q_max, got q_min={self.q_min}, q_max={self.q_max}"
            )

    @classmethod
    def from_overlaps(cls, max_overlap: float, min_overlap: float) -> "OverlapBounds":
        return cls(
            q_min=float(normal_isf(max_overlap / 2.0)),
            q_max=float(normal_isf(min_overlap / 2.0)),
        )


def adjusted_density(dim: int, rho_2d: float) -> float:
    """Sphere-packing-adjusted target density: dim * 2^(1-dim) * rho_2d."""
    return dim * 2.0 ** (1.0 - dim) * rho_2d


def init_centers(
    k: int,
    dim: int,
    cluster_radii,
    config: PlacementConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Centers i.i.d. uniform in a ball matching the adjusted density.

    The ball volume V satisfies (sum of cluster volumes) / V = rho_adj; the
    unit-ball constant cancels, and radii enter in log space so very high
    dimensions cannot overflow.
    """
    radii = np.asarray(cluster_radii, dtype=float)
    log_total = logsumexp(dim * np.log(radii))
    ball_radius = np.exp((log_total - np.log(adjusted_density(dim, config.rho_2d))) / dim)
    directions = rng.standard_normal((k, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radial = rng.uniform(0.0, 1.0, size=(k, 1)) ** (1.0 / dim)
    return ball_radius * radial * directions


def penalty(x: float, penalty_mix: float) -> float:
    """p(x) = lambda*x + (1-lambda)*x^2, zero at zero, convex on [0, 1]."""
    return penalty_mix * x + (1.0 - penalty_mix) * x * x


def _penalty_slope(x, penalty_mix):
    return penalty_mix + 2.0 * (1.0 - penalty_mix) * x


def _separations_from(centers: np.ndarray, covs: np.ndarray, i: int):
    """Separations q_ij and scaled oriented axes for cluster i vs all j != i.

    Returns (others, q, axes) where axes[m] is the LDA axis toward
    others[m], oriented i -> j and pre-divided by the quantile denominator,
    so grad_{mu_j} q_ij = axes[m] and grad_{mu_i} q_ij = -axes[m].
    """
    k = centers.shape[0]
    others = np.array([j for j in range(k) if j != i])
    delta = centers[others] - centers[i]
    avg = 0.5 * (covs[i][None, :, :] + covs[others])
    axes = np.linalg.solve(avg, delta[..., None])[..., 0]
    s_i = np.sqrt(np.einsum("mp,pq,mq->m", axes, covs[i], axes))
    s_j = np.sqrt(np.einsum("mp,mpq,mq->m", axes, covs[others], axes))
    margin = np.einsum("mp,mp->m", axes, delta)
    denom = s_i + s_j
    q = np.abs(margin) / denom
    orient = np.where(margin < 0, -1.0, 1.0)
    return others, q, axes * (orient / denom)[:, None]


def _cluster_loss_from_q(q: np.ndarray, bounds: OverlapBounds, penalty_mix: float) -> float:
    loss = 0.0
    isolation = q.min() - bounds.q_max
    if isolation > 0:
        loss += penalty(isolation, penalty_mix)
    crowding = np.maximum(bounds.q_min - q, 0.0)
    for x in crowding[crowding > 0]:
        loss += penalty(float(x), penalty_mix)
    return loss


def single_cluster_loss(
    i: int, model: "MixtureModel", bounds: OverlapBounds, penalty_mix: float = 0.5
) -> float:
    """Loss on cluster i: isolation penalty plus crowding penalties."""
    centers = model.centers
    covs = model.covariances()
    _, q, _ = _separations_from(centers, covs, i)
    return _cluster_loss_from_q(q, bounds, penalty_mix)


def overlap_loss(
    model: "MixtureModel", bounds: OverlapBounds, penalty_mix: float = 0.5
) -> float:
    """Average single-cluster loss; zero iff all constraints hold."""
    centers = model.centers
    covs = model.covariances()
    return _loss_arrays(centers, covs, bounds, penalty_mix)


def _loss_arrays(centers, covs, bounds, penalty_mix) -> float:
    k = centers.shape[0]
    total = 0.0
    for i in range(k):
        _, q, _ = _separations_from(centers, covs, i)
        total += _cluster_loss_from_q(q, bounds, penalty_mix)
    return total / k


def _gradient_arrays(centers, covs, i, bounds, penalty_mix) -> np.ndarray:
    """Frozen-axis gradient of the i-th cluster loss w.r.t. every center."""
    others, q, axes = _separations_from(centers, covs, i)
    grad = np.zeros_like(centers)
    nearest = int(np.argmin(q))
    isolation = q[nearest] - bounds.q_max
    if isolation > 0:
        slope = _penalty_slope(isolation, penalty_mix)
        grad[i] -= slope * axes[nearest]
        grad[others[nearest]] += slope * axes[nearest]
    shortfall = bounds.q_min - q
    for m in np.nonzero(shortfall > 0)[0]:
        slope = _penalty_slope(shortfall[m], penalty_mix)
        grad[i] += slope * axes[m]
        grad[others[m]] -= slope * axes[m]
    return grad


def loss_gradient(
    i: int, model: "MixtureModel", bounds: OverlapBounds, penalty_mix: float = 0.5
) -> np.ndarray:
    """Gradient of single_cluster_loss(i) w.r.t. all k centers (k x dim)."""
    return _gradient_arrays(model.centers, model.covariances(), i, bounds, penalty_mix)


def loss_trace_csv(trace) -> str:
    """Render a per-epoch loss trace as CSV for convergence plots."""
    rows = ["epoch,loss"]
    rows.extend(f"{epoch},{loss:.17g}" for epoch, loss in enumerate(trace))
    return "\n".join(rows) + "\n"


def _resolve_learning_rate(config: PlacementConfig, lengths: np.ndarray) -> float:
    if config.learning_rate is not None:
        return config.learning_rate
    radii = np.exp(np.mean(np.log(lengths), axis=1))  # per-cluster geometric mean
    return 0.1 * float(radii.mean())


def optimize_centers(
    model: "MixtureModel",
    bounds: OverlapBounds,
    config: PlacementConfig | None = None,
    rng: np.random.Generator | None = None,
):
    """Run SGD epochs until the overlap loss reaches tolerance.

    Returns (converged model, per-epoch loss trace).  Axes and axis
    lengths are untouched; only centers move.  Raises NonConvergenceError
    with the final loss and trace when max_epochs is exhausted.
    """
    config = config or PlacementConfig()
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    centers = model.centers.copy()
    covs = model.covariances()
    lengths = np.stack([c.axis_lengths for c in model.clusters])
    centers, trace = _optimize_arrays(centers, covs, lengths, bounds, config, rng)
    converged = replace(
        model,
        clusters=[replace(c, center=centers[i]) for i, c in enumerate(model.clusters)],
    )
    return converged, trace


def _optimize_arrays(centers, covs, lengths, bounds, config, rng):
    k = centers.shape[0]
    eta = _resolve_learning_rate(config, lengths)
    stop_at = max(config.loss_tolerance, _LOSS_SLACK)
    trace: list[float] = []
    for _ in range(config.max_epochs):
        loss = _loss_arrays(centers, covs, bounds, config.penalty_mix)
        trace.append(loss)
        if loss <= stop_at:
            return centers, trace
        for i in rng.permutation(k):
            grad = _gradient_arrays(centers, covs, int(i), bounds, config.penalty_mix)
            centers = centers - eta * grad
    loss = _loss_arrays(centers, covs, bounds, config.penalty_mix)
    trace.append(loss)
    if loss <= stop_at:
        return centers, trace
    raise NonConvergenceError(loss, trace)
