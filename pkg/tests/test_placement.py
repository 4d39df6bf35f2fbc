import numpy as np
import pytest

from clustergen.archetype import Archetype
from clustergen.distributions import RadialDistribution
from clustergen.errors import NonConvergenceError
from clustergen.mixture import (
    Cluster,
    MixtureModel,
    sample_mixture_model,
    sample_orientation,
)
from clustergen.overlap import lda_axis, separation_quantile
from clustergen.placement import (
    OverlapBounds,
    PlacementConfig,
    _gradient_arrays,
    _separations_from,
    adjusted_density,
    init_centers,
    loss_gradient,
    optimize_centers,
    overlap_loss,
    penalty,
    single_cluster_loss,
)
from clustergen.stats import normal_isf

BOUNDS = OverlapBounds.from_overlaps(max_overlap=0.05, min_overlap=0.001)


def spherical_model(centers, sigma=1.0):
    centers = np.asarray(centers, dtype=float)
    dim = centers.shape[1]
    clusters = [
        Cluster(
            center=c,
            axes=np.eye(dim),
            axis_lengths=np.full(dim, sigma),
            radial_distribution=RadialDistribution.create("normal"),
        )
        for c in centers
    ]
    return MixtureModel(
        clusters=clusters,
        group_sizes=np.full(len(clusters), 10),
        archetype_name="test",
    )


def model_at_separation(q, sigma=1.0):
    """Two unit spherical clusters whose pairwise separation is exactly q."""
    return spherical_model([[0.0, 0.0], [2.0 * sigma * q, 0.0]], sigma)


class TestOverlapBounds:
    def test_band_orientation(self):
        assert 0 < BOUNDS.q_min < BOUNDS.q_max
        assert BOUNDS.q_min == pytest.approx(float(normal_isf(0.025)))
        assert BOUNDS.q_max == pytest.approx(float(normal_isf(0.0005)))

    def test_degenerate_band_rejected(self):
        with pytest.raises(ValueError):
            OverlapBounds(q_min=2.0, q_max=1.0)


class TestInitCenters:
    def test_density_adjustment_formula(self):
        assert adjusted_density(2, 0.1) == pytest.approx(0.1)
        assert adjusted_density(10, 0.1) == pytest.approx(10 * 2**-9 * 0.1)
        assert adjusted_density(10, 0.1) == pytest.approx(1.953125e-3)

    def test_centers_inside_calibrated_ball(self):
        config = PlacementConfig()
        radii = np.array([1.0, 2.0, 0.5, 1.5])
        rng = np.random.default_rng(0)
        # ball radius from (sum r^dim) / R^dim = rho_adj
        expected_radius = (np.sum(radii**3) / adjusted_density(3, 0.1)) ** (1 / 3)
        for _ in range(50):
            centers = init_centers(4, 3, radii, config, rng)
            assert centers.shape == (4, 3)
            assert (np.linalg.norm(centers, axis=1) <= expected_radius + 1e-12).all()

    def test_no_overflow_in_100d(self):
        config = PlacementConfig()
        centers = init_centers(4, 100, np.full(4, 1.2), config, np.random.default_rng(1))
        assert np.isfinite(centers).all()


class TestPenalty:
    def test_zero_at_zero(self):
        for lam in (0.0, 0.3, 1.0):
            assert penalty(0.0, lam) == 0.0

    def test_linear_case(self):
        assert penalty(0.3, 1.0) == pytest.approx(0.3)

    def test_mixed_case(self):
        assert penalty(2.0, 0.5) == pytest.approx(3.0)  # 0.5*2 + 0.5*4


class TestSingleClusterLoss:
    def test_zero_inside_band(self):
        q_mid = 0.5 * (BOUNDS.q_min + BOUNDS.q_max)
        model = model_at_separation(q_mid)
        assert single_cluster_loss(0, model, BOUNDS) == 0.0
        assert single_cluster_loss(1, model, BOUNDS) == 0.0

    def test_isolation_penalty_linear(self):
        model = model_at_separation(BOUNDS.q_max + 0.5)
        assert single_cluster_loss(0, model, BOUNDS, penalty_mix=1.0) == pytest.approx(
            0.5, rel=1e-9
        )

    def test_crowding_penalty_quadratic(self):
        model = model_at_separation(BOUNDS.q_min - 0.2)
        assert single_cluster_loss(0, model, BOUNDS, penalty_mix=0.0) == pytest.approx(
            0.04, rel=1e-9
        )

    def test_separations_match_overlap_module(self):
        rng = np.random.default_rng(3)
        model = spherical_model(rng.normal(size=(4, 3)) * 3, sigma=0.8)
        centers = model.centers
        covs = model.covariances()
        _, q, _ = _separations_from(centers, covs, 0)
        for m, j in enumerate([1, 2, 3]):
            axis = lda_axis(centers[0], centers[j], covs[0], covs[j])
            expected = abs(
                separation_quantile(centers[0], centers[j], covs[0], covs[j], axis)
            )
            assert q[m] == pytest.approx(expected, rel=1e-12)


class TestOverlapLoss:
    def test_satisfied_configuration(self):
        model = model_at_separation(0.5 * (BOUNDS.q_min + BOUNDS.q_max))
        assert overlap_loss(model, BOUNDS) == 0.0

    def test_symmetric_two_cluster_violation(self):
        model = model_at_separation(BOUNDS.q_min - 0.3)
        l0 = single_cluster_loss(0, model, BOUNDS)
        l1 = single_cluster_loss(1, model, BOUNDS)
        assert l0 == pytest.approx(l1, rel=1e-12)
        assert overlap_loss(model, BOUNDS) == pytest.approx(l0, rel=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            model = spherical_model(rng.normal(size=(3, 2)) * rng.uniform(0.5, 10))
            assert overlap_loss(model, BOUNDS) >= 0.0


class TestLossGradient:
    def test_zero_gradient_inside_band(self):
        model = model_at_separation(0.5 * (BOUNDS.q_min + BOUNDS.q_max))
        np.testing.assert_array_equal(loss_gradient(0, model, BOUNDS), 0.0)

    def test_crowded_pair_pushed_apart(self):
        model = model_at_separation(BOUNDS.q_min - 0.5)
        grad = loss_gradient(0, model, BOUNDS)
        # descent step -grad moves cluster 0 left and cluster 1 right
        assert grad[0][0] > 0
        assert grad[1][0] < 0

    def test_isolated_cluster_pulled_toward_neighbor(self):
        model = model_at_separation(BOUNDS.q_max + 1.0)
        grad = loss_gradient(0, model, BOUNDS)
        assert grad[0][0] < 0  # descent moves cluster 0 toward cluster 1 (right)
        assert grad[1][0] > 0

    def test_matches_finite_differences_on_smooth_configs(self):
        # frozen-axis convention: axes held at the base configuration
        rng = np.random.default_rng(5)
        checked = 0
        while checked < 100:
            k, dim = int(rng.integers(2, 5)), int(rng.integers(2, 4))
            centers = rng.normal(size=(k, dim)) * rng.uniform(1.0, 6.0)
            lengths = rng.uniform(0.6, 1.6, size=(k, dim))
            covs = np.stack(
                [
                    (u * l**2) @ u.T
                    for u, l in (
                        (sample_orientation(dim, rng), lengths[i]) for i in range(k)
                    )
                ]
            )
            i = int(rng.integers(k))
            frozen = _separations_from(centers, covs, i)

            def frozen_loss(flat):
                moved = flat.reshape(k, dim)
                others, _, scaled_axes = frozen
                # recompute q along the frozen scaled axes
                margins = np.einsum(
                    "mp,mp->m", scaled_axes, moved[others] - moved[i]
                )
                from clustergen.placement import _cluster_loss_from_q

                return _cluster_loss_from_q(margins, BOUNDS, 0.5)

            base_q = frozen[1]
            margin_gaps = np.concatenate(
                [np.abs(base_q - BOUNDS.q_min), np.abs(base_q - BOUNDS.q_max)]
            )
            if margin_gaps.min() < 1e-3:  # too close to a kink
                continue
            analytic = _gradient_arrays(centers, covs, i, BOUNDS, 0.5).ravel()
            step = 1e-6
            numeric = np.empty_like(analytic)
            flat = centers.ravel().copy()
            for idx in range(flat.size):
                up, down = flat.copy(), flat.copy()
                up[idx] += step
                down[idx] -= step
                numeric[idx] = (frozen_loss(up) - frozen_loss(down)) / (2 * step)
            scale = max(np.abs(numeric).max(), 1e-12)
            assert np.abs(analytic - numeric).max() <= 1e-5 * max(scale, 1.0)
            checked += 1


class TestOptimizeCenters:
    def test_already_satisfied_returns_immediately(self):
        model = model_at_separation(0.5 * (BOUNDS.q_min + BOUNDS.q_max))
        converged, trace = optimize_centers(model, BOUNDS, PlacementConfig())
        assert trace == [0.0]
        np.testing.assert_array_equal(converged.centers, model.centers)

    def test_benchmark_archetype_converges_fast(self, benchmark_archetypes):
        a = benchmark_archetypes[0]
        bounds = OverlapBounds.from_overlaps(a.max_overlap, a.min_overlap)
        config = PlacementConfig(max_epochs=500)
        rng = np.random.default_rng(0)
        model = sample_mixture_model(a, rng)  # converged during construction
        assert overlap_loss(model, bounds) <= 1e-12

    def test_constraints_hold_at_convergence(self):
        rng = np.random.default_rng(6)
        a = Archetype(
            name="converge", n_clusters=6, dim=3, n_samples=60,
            aspect_ref=1.5, aspect_maxmin=2.0, radius_maxmin=2.0,
            max_overlap=0.05, min_overlap=0.001,
        )
        model = sample_mixture_model(a, rng)
        centers = model.centers
        covs = model.covariances()
        for i in range(6):
            _, q, _ = _separations_from(centers, covs, i)
            assert (q >= BOUNDS.q_min - 1e-9).all()
            assert q.min() <= BOUNDS.q_max + 1e-9

    def test_loss_trace_mostly_decreasing(self):
        from clustergen.placement import _optimize_arrays

        decreasing, total = 0, 0
        bounds = OverlapBounds.from_overlaps(0.02, 0.002)
        for seed in range(5):
            init_rng = np.random.default_rng(seed)
            radii = np.ones(8)
            lengths = np.ones((8, 2))
            covs = np.stack([np.eye(2)] * 8)
            centers = init_centers(8, 2, radii, PlacementConfig(), init_rng)
            _, trace = _optimize_arrays(
                centers, covs, lengths, bounds, PlacementConfig(), init_rng
            )
            positive = [t for t in trace if t > 0]
            diffs = np.diff(positive)
            decreasing += int((diffs < 0).sum())
            total += diffs.size
        assert total == 0 or decreasing / total >= 0.9

    def test_translation_invariance(self):
        rng = np.random.default_rng(8)
        model = spherical_model(rng.normal(size=(4, 3)) * 4)
        shifted = spherical_model(model.centers + np.array([10.0, -3.0, 7.0]))
        assert overlap_loss(model, BOUNDS) == pytest.approx(
            overlap_loss(shifted, BOUNDS), rel=1e-9, abs=1e-12
        )

    def test_nonconvergence_carries_trace(self):
        model = model_at_separation(BOUNDS.q_min - 1.0)
        config = PlacementConfig(max_epochs=1, learning_rate=1e-9)
        with pytest.raises(NonConvergenceError) as excinfo:
            optimize_centers(model, BOUNDS, config)
        assert excinfo.value.final_loss > 0
        assert len(excinfo.value.trace) == 2  # initial epoch + final evaluation

    def test_axes_and_lengths_untouched(self):
        model = model_at_separation(BOUNDS.q_min - 0.4)
        converged, _ = optimize_centers(model, BOUNDS, PlacementConfig())
        for before, after in zip(model.clusters, converged.clusters):
            np.testing.assert_array_equal(before.axes, after.axes)
            np.testing.assert_array_equal(before.axis_lengths, after.axis_lengths)
        assert not np.array_equal(model.centers, converged.centers)

    def test_high_dim_epoch_count_comparable_to_2d(self):
        # dimensionality raises the epoch count only mildly
        from clustergen.placement import _optimize_arrays
        import clustergen.archetype as arch

        def epochs_for(dim, seed):
            k = 12
            a = Archetype(
                name="wide", n_clusters=k, dim=dim, n_samples=100 * k,
                aspect_ref=1.5, aspect_maxmin=2.0, radius_maxmin=3.0,
                max_overlap=0.05, min_overlap=0.001,
            )
            bounds = OverlapBounds.from_overlaps(a.max_overlap, a.min_overlap)
            rng = np.random.default_rng(seed)
            aspects = arch.sample_aspect_ratios(a, rng)
            radii = arch.sample_cluster_radii(a, rng)
            lengths = np.stack(
                [arch.sample_axis_lengths(aspects[j], radii[j], dim, rng) for j in range(k)]
            )
            covs = np.stack(
                [(u * l**2) @ u.T for u, l in
                 ((sample_orientation(dim, rng), lengths[j]) for j in range(k))]
            )
            centers = init_centers(k, dim, radii, PlacementConfig(), rng)
            _, trace = _optimize_arrays(
                centers, covs, lengths, bounds, PlacementConfig(), rng
            )
            assert trace[-1] <= 1e-12
            return len(trace)

        low = np.mean([epochs_for(2, s) for s in range(3)])
        high = np.mean([epochs_for(100, s) for s in range(3)])
        assert high <= 5 * low + 10

    def test_loss_trace_csv(self):
        from clustergen.placement import loss_trace_csv

        text = loss_trace_csv([0.5, 0.25, 0.0])
        lines = text.strip().splitlines()
        assert lines[0] == "epoch,loss"
        assert lines[1] == "0,0.5"
        assert lines[3] == "2,0"
