"""Pairwise cluster separation and overlap measures.

Overlap between two clusters is twice the minimax error rate of the best
linear classifier separating them.  Along a classification axis `a` the
separation quantile is

    q(a) = a'(mu2 - mu1) / (sqrt(a'S1 a) + sqrt(a'S2 a))

and the induced overlap is 2*(1 - Phi(q)).  Three estimators are provided:
the LDA approximation (axis solving the averaged-covariance system), the
cheaper center-to-center approximation, and an exact oracle for Gaussian
pairs that maximizes q over the one-parameter axis family
a(t) = (t*S1 + (1-t)*S2)^{-1} (mu2 - mu1), t in (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stats import normal_sf

_MAX_CONDITION = 1e12
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _as_vector(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


def separation_quantile(mu1, mu2, S1, S2, axis) -> float:
    """Signed separation along `axis`; invariant to positive rescaling."""
    mu1, mu2, axis = _as_vector(mu1), _as_vector(mu2), _as_vector(axis)
    if not np.any(axis):
        raise ValueError("classification axis must be nonzero")
    s1 = float(axis @ np.asarray(S1) @ axis)
    s2 = float(axis @ np.asarray(S2) @ axis)
    if s1 <= 0 or s2 <= 0 or not np.isfinite(s1 + s2):
        raise ValueError("covariance matrices must be symmetric positive definite")
    return float(axis @ (mu2 - mu1)) / (np.sqrt(s1) + np.sqrt(s2))


def lda_axis(mu1, mu2, S1, S2) -> np.ndarray:
    """Solve ((S1+S2)/2) a = mu2 - mu1 without forming an inverse."""
    mu1, mu2 = _as_vector(mu1), _as_vector(mu2)
    delta = mu2 - mu1
    if not np.any(delta):
        raise ValueError("cluster centers coincide; no separating axis exists")
    avg = 0.5 * (np.asarray(S1, dtype=float) + np.asarray(S2, dtype=float))
    if np.linalg.cond(avg) > _MAX_CONDITION:
        raise ValueError("averaged covariance is numerically singular")
    return np.linalg.solve(avg, delta)


def lda_overlap(mu1, mu2, S1, S2) -> float:
    """Overlap along the LDA axis: 2*(1 - Phi(q))."""
    axis = lda_axis(mu1, mu2, S1, S2)
    q = separation_quantile(mu1, mu2, S1, S2, axis)
    return float(2.0 * normal_sf(q))


def c2c_overlap(mu1, mu2, S1, S2) -> float:
    """Overlap along the center-difference axis."""
    mu1, mu2 = _as_vector(mu1), _as_vector(mu2)
    delta = mu2 - mu1
    if not np.any(delta):
        raise ValueError("cluster centers coincide; no separating axis exists")
    q = separation_quantile(mu1, mu2, S1, S2, delta)
    return float(2.0 * normal_sf(q))


def exact_overlap_oracle(mu1, mu2, S1, S2, tol: float = 1e-6) -> float:
    """Exact overlap for a Gaussian pair.

    The minimax axis lies in the family a(t) = (t*S1 + (1-t)*S2)^{-1} delta
    for some t in (0,1), where it maximizes the separation quantile.  A
    64-point grid (log-symmetric in t-odds) brackets the maximum and
    golden-section search refines t to within `tol`.  The LDA axis is the
    t = 1/2 member, so the result never falls below the LDA quantile.
    """
    mu1, mu2 = _as_vector(mu1), _as_vector(mu2)
    delta = mu2 - mu1
    if not np.any(delta):
        raise ValueError("cluster centers coincide; no separating axis exists")
    S1 = np.asarray(S1, dtype=float)
    S2 = np.asarray(S2, dtype=float)

    def q_of(t: float) -> float:
        axis = np.linalg.solve(t * S1 + (1.0 - t) * S2, delta)
        return separation_quantile(mu1, mu2, S1, S2, axis)

    grid = 1.0 / (1.0 + np.exp(-np.linspace(-12.0, 12.0, 64)))
    values = np.array([q_of(t) for t in grid])
    if not np.all(np.isfinite(values)):
        raise ValueError("separation objective is not finite; cannot locate maximum")
    best = int(np.argmax(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]

    # golden-section maximization of q_of on [lo, hi]
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = q_of(x1), q_of(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = q_of(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = q_of(x1)
    q_star = max(f1, f2, values[best], q_of(0.5))
    return float(2.0 * normal_sf(q_star))


@dataclass(frozen=True)
class MonteCarloOverlap:
    estimate: float
    std_error: float


def monte_carlo_overlap(c1, c2, n: int, rng: np.random.Generator) -> MonteCarloOverlap:
    """Empirical minimax overlap between two sampled clusters.

    Draws n points per cluster, projects onto the LDA axis of the model
    covariances, picks the threshold equalizing the two empirical error
    rates, and returns twice that rate with a binomial standard error.
    """
    from .mixture import covariance_of
    from .sampling import sample_cluster_points

    axis = lda_axis(c1.center, c2.center, covariance_of(c1), covariance_of(c2))
    s1 = sample_cluster_points(c1, n, rng) @ axis
    s2 = sample_cluster_points(c2, n, rng) @ axis
    if s1.mean() > s2.mean():
        s1, s2 = s2, s1
    cands = np.unique(np.concatenate([s1, s2]))
    err1 = 1.0 - np.searchsorted(np.sort(s1), cands, side="right") / n  # P(s1 > c)
    err2 = np.searchsorted(np.sort(s2), cands, side="right") / n  # P(s2 <= c)
    at = int(np.argmin(np.abs(err1 - err2)))
    rate = 0.5 * (err1[at] + err2[at])
    estimate = err1[at] + err2[at]
    std_error = float(np.sqrt(2.0 * rate * (1.0 - rate) / n))
    return MonteCarloOverlap(float(estimate), std_error)


@dataclass(frozen=True)
class OverlapReport:
    """Separation and overlap measures for one cluster pair."""

    i: int
    j: int
    q_lda: float
    alpha_lda: float
    alpha_c2c: float
    alpha_exact: float | None = None


def pairwise_overlaps(model, include_exact: bool = False) -> list[OverlapReport]:
    """All pairwise overlap reports for a mixture model."""
    from .mixture import covariance_of

    centers = model.centers
    covs = [covariance_of(c) for c in model.clusters]
    reports = []
    for i in range(len(model.clusters)):
        for j in range(i + 1, len(model.clusters)):
            axis = lda_axis(centers[i], centers[j], covs[i], covs[j])
            q = abs(separation_quantile(centers[i], centers[j], covs[i], covs[j], axis))
            alpha = float(2.0 * normal_sf(q))
            a_c2c = c2c_overlap(centers[i], centers[j], covs[i], covs[j])
            a_exact = (
                exact_overlap_oracle(centers[i], centers[j], covs[i], covs[j])
                if include_exact
                else None
            )
            reports.append(OverlapReport(i, j, q, alpha, a_c2c, a_exact))
    return reports


def overlap_report_rows(reports) -> list[str]:
    """CSV rows (with header) for a list of OverlapReport records."""
    rows = ["i,j,q_lda,alpha_lda,alpha_c2c,alpha_exact"]
    for r in reports:
        exact = "" if r.alpha_exact is None else f"{r.alpha_exact:.17g}"
        rows.append(
            f"{r.i},{r.j},{r.q_lda:.17g},{r.alpha_lda:.17g},{r.alpha_c2c:.17g},{exact}"
        )
    return rows
