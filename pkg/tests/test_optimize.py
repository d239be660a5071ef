import numpy as np
import pytest

from cochainopt import persistence
from cochainopt.checks import (
    critical_point_check,
    dihedral_symmetry_check,
    polygon_content_gradient,
    stability_rows,
    write_stability_csv,
    write_stability_svg,
)
from cochainopt.errors import InputError
from cochainopt.optimize import (
    OptConfig,
    mask_from_gradient,
    one_step_weights,
    penalty_ball,
    power_iteration_pca,
    project_simplex,
    run_feature_weights,
    run_image_repair,
    run_point_cloud,
    sliding_window,
)
from cochainopt.synthetic import (
    loop_dataset,
    noisy_circle,
    periodic_feature_series,
    regular_polygon,
    two_blob_image,
)
from conftest import central_difference


class TestPenaltyBall:
    def test_outside_point(self):
        val, grad = penalty_ball(np.array([[2.0, 0.0]]))
        assert val == pytest.approx(1.0)
        assert grad[0] == pytest.approx([2.0, 0.0])  # 2(|x|-1) x/|x|

    def test_inside_and_boundary(self):
        val, grad = penalty_ball(np.array([[0.3, 0.2], [1.0, 0.0]]))
        assert val == 0.0
        assert np.all(grad == 0.0)

    def test_matches_finite_differences(self, rng):
        pts = rng.normal(scale=1.5, size=(4, 2))
        _, grad = penalty_ball(pts)
        fd = central_difference(lambda x: penalty_ball(x)[0], pts)
        assert np.abs(fd - grad).max() < 1e-6


class TestRunPointCloud:
    def test_trace_shape_and_improvement(self):
        pts = noisy_circle(10, 0.1, seed=2)
        cfg = OptConfig(method="cochains", epsilon0=0.05, learning_rate=0.02,
                        iterations=40)
        run = run_point_cloud(pts, cfg)
        assert run.status == "completed"
        assert len(run.records) == cfg.iterations + 1
        assert run.records[-1].normalized_persistence > run.records[0].normalized_persistence

    def test_zero_iterations_echo(self):
        pts = noisy_circle(8, 0.1, seed=0)
        run = run_point_cloud(pts, OptConfig(iterations=0, method="simplices"))
        assert len(run.records) == 1
        assert np.array_equal(run.final_variables, pts)

    def test_no_bar_terminates(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0]])
        run = run_point_cloud(pts, OptConfig(iterations=5))
        assert run.status == "no_bar"
        assert run.events

    @pytest.mark.parametrize("epsilon0", [0.03, 0.04, 0.05, 0.06])
    def test_single_window_epsilon_sweep(self, epsilon0):
        pts = noisy_circle(10, 0.1, seed=3)
        cfg = OptConfig(method="cochains", epsilon0=epsilon0, learning_rate=0.02,
                        iterations=10)
        run = run_point_cloud(pts, cfg)
        assert run.status == "completed"
        assert run.records[-1].loss >= run.records[0].loss

    def test_multi_cochain_mean_of_epsilons(self):
        pts = noisy_circle(10, 0.1, seed=4)
        cfg = OptConfig(method="multi-cochains", epsilon_set=(0.01, 0.05, 0.1),
                        iterations=5, learning_rate=0.02)
        run = run_point_cloud(pts, cfg)
        assert run.status == "completed"
        # thresholds tracked for every member window
        assert len(run.records[0].thresholds) == 12

    def test_regular_polygon_near_stationary(self):
        # constrained criticality: radial moves only, so one unconstrained
        # step changes the shape only by a uniform scaling
        pts = regular_polygon(10)
        cfg = OptConfig(method="cochains", epsilon0=0.05, learning_rate=0.01,
                        iterations=1, penalty=True)
        run = run_point_cloud(pts, cfg)
        moved = run.final_variables
        radii = np.linalg.norm(moved, axis=1)
        assert radii.std() < 1e-10
        angles = np.arctan2(moved[:, 1], moved[:, 0])
        assert np.allclose(np.sort(np.diff(np.sort(angles))), 2 * np.pi / 10, atol=1e-9)


class TestRunImageRepair:
    def test_constant_image_exits(self):
        img = np.full((6, 6), 0.5)
        run = run_image_repair(img, OptConfig(iterations=10, method="cochains",
                                              learning_rate=0.1, penalty=False))
        assert run.status == "no_bar"
        assert run.iterations_completed == 0

    def test_two_blob_merge_progress(self):
        img = two_blob_image(12, seed=1)
        cfg = OptConfig(iterations=60, method="cochains", learning_rate=0.1,
                        epsilon_absolute=0.1, penalty=False)
        run = run_image_repair(img, cfg)
        # either the budget ran out or every finite bar was eliminated
        assert run.status in ("completed", "no_bar")
        assert run.records[-1].normalized_persistence < run.records[0].normalized_persistence
        assert run.final_variables.min() >= 0.0 and run.final_variables.max() <= 1.0

    def test_single_pixel_window_equals_simplices_step(self):
        # one clear merge whose death value sits on a unique pixel
        img = np.array([[0.1, 0.6, 0.15]])
        cfg_c = OptConfig(iterations=1, method="cochains", learning_rate=0.1,
                          epsilon_absolute=0.05, penalty=False)
        cfg_s = OptConfig(iterations=1, method="simplices", learning_rate=0.1,
                          penalty=False)
        run_c = run_image_repair(img, cfg_c)
        run_s = run_image_repair(img, cfg_s)
        assert np.allclose(run_c.final_variables, run_s.final_variables, atol=1e-12)


class TestSlidingWindow:
    def test_constant_series_zero_diameter(self):
        series = np.ones((3, 40))
        cloud = sliding_window(series, np.full(3, 1 / 3), 10)
        assert cloud.points.shape == (31, 30)
        assert cloud.distances(np.full(3, 1 / 3)).max() == 0.0

    def test_single_feature_weight(self, rng):
        series = rng.normal(size=(3, 30))
        cloud = sliding_window(series, np.array([1.0, 0.0, 0.0]), 5)
        d = cloud.distances(np.array([1.0, 0.0, 0.0]))
        assert np.allclose(d, cloud.block_dists[0])

    def test_standard_embedding_point_count(self):
        series = periodic_feature_series(seed=0)
        cloud = sliding_window(series, np.full(10, 0.1), 250)
        assert cloud.points.shape[0] == 300 - 250 + 1 == 51

    def test_window_too_long(self):
        with pytest.raises(InputError):
            sliding_window(np.ones((2, 10)), np.array([0.5, 0.5]), 11)


class TestProjectSimplex:
    def test_already_in_simplex(self):
        w = np.array([0.2, 0.3, 0.5])
        assert np.allclose(project_simplex(w), w)

    def test_projection_properties(self, rng):
        for _ in range(20):
            v = rng.normal(scale=2.0, size=6)
            p = project_simplex(v)
            assert p.min() >= 0
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            # projection is the closest simplex point: compare to a few candidates
            for _ in range(5):
                q = rng.dirichlet(np.ones(6))
                assert np.linalg.norm(v - p) <= np.linalg.norm(v - q) + 1e-9


class TestFeatureWeights:
    def test_pure_signal_upweights_periodic(self):
        series = periodic_feature_series(noise_sigma=0.2, seed=7)
        cfg = OptConfig(method="multi-cochains", learning_rate=2**-6 / 10,
                        iterations=12, window=250)
        run = run_feature_weights(series, cfg)
        w = run.final_variables
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert w.min() >= 0
        assert w[:3].sum() > 0.3  # periodic features gain mass

    def test_simplices_method_runs(self):
        series = periodic_feature_series(seed=9)
        cfg = OptConfig(method="simplices", learning_rate=2**-6 / 10,
                        iterations=8, window=250)
        run = run_feature_weights(series, cfg)
        assert run.status == "completed"
        assert len(run.records) == 9

    def test_all_noise_series_completes(self, rng):
        series = rng.normal(size=(5, 60))
        cfg = OptConfig(method="multi-cochains", learning_rate=0.001,
                        iterations=3, window=40)
        run = run_feature_weights(series, cfg)
        assert run.status in ("completed", "no_bar")


class TestOneStep:
    def test_boundary_intersection_2d(self):
        # uniform (1/2, 1/2) pushed along (c, -c) exits at (1, 0)
        tangent = np.array([0.3, -0.3])
        uniform = np.array([0.5, 0.5])
        neg = tangent < 0
        t_star = np.min(uniform[neg] / -tangent[neg])
        w = uniform + t_star * tangent
        assert np.allclose(w, [1.0, 0.0])

    def test_single_persistence_computation(self):
        series = periodic_feature_series(seed=11)
        before = persistence.REDUCTION_CALLS
        w, grad = one_step_weights(series)
        assert persistence.REDUCTION_CALLS - before == 1
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert (w == 0).any()  # lands on the simplex boundary

    def test_zero_gradient_returns_uniform(self, monkeypatch):
        series = periodic_feature_series(seed=1)
        from cochainopt import optimize as O

        monkeypatch.setattr(
            O, "_weights_gradient",
            lambda cloud, w, cfg: (np.full(series.shape[0], 2.0), 1.0, 1.0),
        )
        w, grad = O.one_step_weights(series)
        assert np.allclose(w, 1.0 / series.shape[0])
        assert np.all(grad == 0)


class TestMask:
    def test_rule_application(self):
        mask = mask_from_gradient(np.array([3.0, 1.0, -2.0, 4.0]))
        assert mask.tolist() == [1, 0, 0, 1]

    def test_all_negative(self):
        with pytest.warns(UserWarning):
            mask = mask_from_gradient(np.array([-1.0, -2.0]))
        assert mask.tolist() == [0, 0]

    def test_masked_pca_reveals_loop(self):
        pts, block = loop_dataset(n_points=36, seed=3)
        n_blocks = pts.shape[1] // block
        blocks = np.abs(
            pts.reshape(len(pts), n_blocks, block)[:, None, :, :]
            - pts.reshape(len(pts), n_blocks, block)[None, :, :, :]
        ).sum(axis=3)  # n x n x n_blocks
        block_dists = np.moveaxis(blocks, 2, 0)
        from cochainopt.complexes import vr_from_distances
        from cochainopt.content import (
            birth_content, content_gradient, death_content, grad_to_weights,
            make_frame,
        )
        from cochainopt.persistence import compute_persistence, select_bar

        w0 = np.full(n_blocks, 1.0 / n_blocks)
        fc = vr_from_distances(np.tensordot(w0, block_dists, axes=1), max_dim=2)
        bar = select_bar(compute_persistence(fc, 1), 1, "longest")
        frame = make_frame(bar, epsilon0=0.05)
        _, bw = birth_content(frame)
        _, dw = death_content(frame, relaxed=True)
        g = grad_to_weights(fc, content_gradient(frame, dw, "death", relaxed=True), block_dists)
        g -= grad_to_weights(fc, content_gradient(frame, bw, "birth"), block_dists)
        mask = mask_from_gradient(g)
        assert mask.sum() >= 1
        cols = np.repeat(mask.astype(bool), block)
        proj, _ = power_iteration_pca(pts[:, cols], n_components=2)

        def longest_h1_persistence(cloud2d):
            fc2 = vr_from_distances(
                np.sqrt(((cloud2d[:, None] - cloud2d[None]) ** 2).sum(-1)), max_dim=2
            )
            b = select_bar(compute_persistence(fc2, 1), 1, "longest")
            return 0.0 if b is None else b.persistence / np.linalg.norm(cloud2d)

        assert longest_h1_persistence(proj) > 0.05  # visible loop in the plane

    def test_pca_recovers_plane(self, rng):
        base = rng.normal(size=(60, 2)) @ rng.normal(size=(2, 7))
        proj, comps = power_iteration_pca(base, n_components=2)
        recon = proj @ comps
        centered = base - base.mean(axis=0)
        assert np.abs(recon - centered).max() < 1e-6


class TestChecks:
    @pytest.mark.parametrize("n", [5, 7, 10])
    def test_critical_point(self, n):
        assert critical_point_check(n, 0.05) <= 1e-6

    def test_perturbed_polygon_not_critical(self, rng):
        pts = regular_polygon(10) + rng.normal(scale=0.02, size=(10, 2))
        g = polygon_content_gradient(pts, 0.05)
        radial = pts * (np.sum(g * pts) / np.sum(pts * pts))
        assert np.linalg.norm(g - radial) > 1e-4

    @pytest.mark.parametrize("n", [5, 6, 8])
    def test_dihedral_symmetry(self, n):
        assert dihedral_symmetry_check(n, epsilon0=0.05) <= 1e-8

    def test_reflection_flips_sign(self):
        # a reflection must negate the window cochains, not fix them
        from cochainopt.checks import _pullback
        from cochainopt.complexes import build_vr
        from cochainopt.content import birth_window_cochain, make_frame
        from cochainopt.persistence import compute_persistence

        n = 6
        fc = build_vr(regular_polygon(n), max_dim=2)
        bar = compute_persistence(fc, 1).in_degree(1)[0]
        eta = birth_window_cochain(make_frame(bar, epsilon0=0.05))
        reflection = {i: (-i) % n for i in range(n)}
        pulled = _pullback(eta, reflection)
        dev_minus = max(abs(pulled.get(s, 0.0) + eta[s]) for s in eta.coeffs)
        assert dev_minus <= 1e-10
        assert max(abs(v) for v in pulled.values()) > 0

    def test_identity_action_exact(self):
        from cochainopt.checks import _pullback
        from cochainopt.complexes import Cochain

        c = Cochain(1, {(0, 1): 0.5, (2, 3): -0.25})
        assert _pullback(c, {i: i for i in range(4)}) == dict(c.coeffs)


class TestStabilityDiagnostics:
    def test_constant_cloud_rows(self, tmp_path):
        pts = regular_polygon(8)
        run = run_point_cloud(pts, OptConfig(method="cochains", epsilon0=0.05,
                                             iterations=3, learning_rate=1e-9))
        rows = stability_rows(run)
        assert len(rows) == 4
        gaps = [r["gap"] for r in rows]
        assert max(gaps) - min(gaps) < 1e-6  # flat lines under a null step
        csv = write_stability_csv(run, tmp_path / "diag.csv")
        header = open(csv).readline()
        assert header.startswith("iteration,birth,death,min_gap")
        svg = write_stability_svg(run, tmp_path / "diag.svg")
        assert open(svg).read().startswith("<svg")

    def test_gap_grows_on_noisy_circle(self):
        pts = noisy_circle(10, 0.1, seed=0)
        cfg = OptConfig(method="multi-cochains", iterations=300, learning_rate=0.02)
        run = run_point_cloud(pts, cfg)
        assert run.status == "completed"
        rows = stability_rows(run)
        assert rows[-1]["gap"] > rows[0]["gap"]
