import json
import math

import numpy as np
import pytest

from cochainopt.complexes import FilteredComplex, build_vr
from cochainopt.content import (
    birth_content,
    content_gradient,
    content_report,
    death_content,
    grad_to_points,
    grad_to_vertex_values,
    is_generic,
    make_frame,
    multi_content,
    relaxed_content,
)
from cochainopt.errors import PreconditionError
from cochainopt.persistence import compute_persistence, select_bar
from cochainopt.synthetic import regular_polygon
from conftest import central_difference

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def toy_graph():
    # vertices 0(0.0), 1(0.2), 2(0.3); edges 1-2 at 0.35, 0-1 at 0.9
    return FilteredComplex(
        [((0,), 0.0), ((1,), 0.2), ((2,), 0.3), ((1, 2), 0.35), ((0, 1), 0.9)]
    )


def toy_bar():
    fc = toy_graph()
    return [b for b in compute_persistence(fc, 0).in_degree(0) if b.birth == 0.2][0]


def longest_h1(points):
    fc = build_vr(points, max_dim=2)
    return select_bar(compute_persistence(fc, 1), 1, "longest")


class TestBirthContent:
    def test_degree0_average_of_merging_vertices(self):
        frame = make_frame(toy_bar(), epsilon=0.12)
        B, w = birth_content(frame)
        assert B == pytest.approx(0.25)  # mean of f(1)=0.2, f(2)=0.3
        assert w == {(1,): pytest.approx(0.5), (2,): pytest.approx(0.5)}

    def test_single_new_simplex_gives_birth_value(self):
        frame = make_frame(toy_bar(), epsilon=0.05)
        B, w = birth_content(frame)
        assert B == pytest.approx(0.2)
        assert list(w) == [(1,)]

    def test_scalar_invariance(self):
        # content is computed from the stored class; rescaling it changes nothing
        bar = toy_bar()
        frame = make_frame(bar, epsilon=0.12)
        B1, _ = birth_content(frame)
        bar.representative = bar.representative.scale(-7.0)
        B2, _ = birth_content(frame)
        assert B1 == pytest.approx(B2)

    def test_within_epsilon_of_birth(self, rng):
        for _ in range(8):
            bar = longest_h1(rng.normal(size=(9, 2)))
            if bar is None:
                continue
            for e0 in (0.05, 0.2, 0.4):
                frame = make_frame(bar, epsilon0=e0)
                B, _ = birth_content(frame)
                assert abs(B - bar.birth) <= frame.epsilon + 1e-12


class TestDeathContent:
    def test_single_new_edge(self):
        frame = make_frame(toy_bar(), epsilon=0.05)
        D, w = death_content(frame)
        assert D == pytest.approx(0.9)
        assert list(w) == [(0, 1)]

    def test_square_triangles(self):
        bar = longest_h1(SQUARE)
        frame = make_frame(bar, epsilon=0.1)
        D, w = death_content(frame)
        assert D == pytest.approx(math.sqrt(2))
        assert len(w) > 0 and all(len(s) == 3 for s in w)

    def test_infinite_bar_rejected(self):
        fc = toy_graph()
        essential = [b for b in compute_persistence(fc, 0).in_degree(0) if not b.finite][0]
        frame = make_frame(essential, epsilon=0.05)
        with pytest.raises(PreconditionError):
            death_content(frame)

    def test_sandwich_random_clouds(self, rng):
        for _ in range(10):
            bar = longest_h1(rng.normal(size=(int(rng.integers(8, 14)), 2)))
            if bar is None:
                continue
            for e0 in (0.01, 0.05, 0.1, 0.2):
                frame = make_frame(bar, epsilon0=e0)
                B, _ = birth_content(frame)
                D, _ = death_content(frame)
                eps, pers = frame.epsilon, bar.persistence
                assert D - B - eps <= pers <= D - B + eps


class TestRelaxedContent:
    def test_mean_over_new_window_edges(self):
        # perturbed pentagon: filling triangles carry two chords that both
        # enter the death window, so the relaxed value is the mean of both,
        # not the diameter
        rng = np.random.default_rng(8)
        pts = regular_polygon(5) + rng.normal(scale=0.01, size=(5, 2))
        fc = build_vr(pts, max_dim=2)
        bar = select_bar(compute_persistence(fc, 1), 1, "longest")
        frame = make_frame(bar, epsilon0=0.05)
        Dr, w = death_content(frame, relaxed=True)
        lo = bar.death - frame.epsilon
        hi = bar.death + frame.epsilon
        expected = 0.0
        multi_edge = False
        import itertools

        for s, wt in w.items():
            new = [
                e for e in itertools.combinations(s, 2)
                if lo < fc.value_of(e) <= hi
            ]
            multi_edge |= len(new) > 1
            expected += wt * np.mean([fc.value_of(e) for e in new])
        assert multi_edge  # the construction exercises the mean
        assert Dr == pytest.approx(expected)
        D, _ = death_content(frame)
        assert Dr != D

    def test_relaxed_equals_plain_for_edges(self):
        # degree-0 death: supports are edges, each edge is its own new edge
        frame = make_frame(toy_bar(), epsilon=0.05)
        D, _ = death_content(frame)
        Dr, _ = relaxed_content(frame, "death")
        assert D == pytest.approx(Dr)

    def test_polygon_relaxed_close_to_plain(self):
        bar = longest_h1(regular_polygon(10))
        frame = make_frame(bar, epsilon0=0.05)
        D, _ = death_content(frame)
        Dr, _ = death_content(frame, relaxed=True)
        assert abs(D - Dr) <= frame.epsilon

    def test_relaxed_sandwich(self, rng):
        for _ in range(6):
            bar = longest_h1(rng.normal(size=(10, 2)))
            if bar is None:
                continue
            frame = make_frame(bar, epsilon0=0.1)
            Br, _ = birth_content(frame, relaxed=True)
            Dr, _ = death_content(frame, relaxed=True)
            assert Dr - Br - frame.epsilon <= bar.persistence <= Dr - Br + frame.epsilon


class TestMultiContent:
    def test_singleton_equals_single(self):
        bar = toy_bar()
        m = multi_content(bar, (0.2,), "birth")
        frame = make_frame(bar, epsilon0=0.2)
        B, _ = birth_content(frame)
        assert m == pytest.approx(B)

    def test_mean_of_members(self, rng):
        bar = longest_h1(rng.normal(size=(10, 2)))
        eset = (0.01, 0.05, 0.1)
        singles = [birth_content(make_frame(bar, epsilon0=e))[0] for e in eset]
        assert multi_content(bar, eset, "birth") == pytest.approx(np.mean(singles))

    def test_invalid_member_named(self):
        bar = toy_bar()
        with pytest.raises(PreconditionError, match="epsilon0=2"):
            multi_content(bar, (0.05, 2.0), "birth")


class TestIsGeneric:
    def test_square_generic(self):
        bar = longest_h1(SQUARE)
        assert is_generic(make_frame(bar, epsilon=0.1))

    def test_threshold_hit_not_generic(self):
        bar = toy_bar()  # [0.2, 0.9) with filtration values {0, 0.2, 0.3, 0.35, 0.9}
        assert not is_generic(make_frame(bar, epsilon=0.1))  # b + eps hits 0.3

    def test_polygon_generic_at_default(self):
        bar = longest_h1(regular_polygon(10))
        frame = make_frame(bar, epsilon0=0.05)
        # distance classes of the regular 10-gon
        classes = sorted({round(2 * math.sin(k * math.pi / 10), 12) for k in range(1, 6)})
        for t in frame.thresholds():
            assert all(abs(t - c) > 1e-9 for c in classes)
        assert is_generic(frame)


class TestGradients:
    def test_two_point_merge_gradient(self):
        pts = np.array([[0.0, 0.0], [2.0, 0.0]])
        fc = build_vr(pts, max_dim=1)
        bar = [b for b in compute_persistence(fc, 0).in_degree(0) if b.finite][0]
        frame = make_frame(bar, epsilon=0.5)
        D, w = death_content(frame)
        grad = content_gradient(frame, w, "death")
        g = grad_to_points(fc, grad, pts)
        assert g[0] == pytest.approx([-1.0, 0.0])
        assert g[1] == pytest.approx([1.0, 0.0])

    def test_frozen_weight_linearity(self):
        frame = make_frame(toy_bar(), epsilon=0.12)
        B, w = birth_content(frame)
        grad = content_gradient(frame, w, "birth")
        # bumping one filtration value by delta changes content by weight*delta
        delta = 1e-3
        bumped = FilteredComplex(
            [((0,), 0.0), ((1,), 0.2 + delta), ((2,), 0.3), ((1, 2), 0.35), ((0, 1), 0.9)]
        )
        manual = sum(
            bumped.value_of(s) * wt for s, wt in w.items()
        )
        assert manual - B == pytest.approx(grad[(1,)] * delta)

    def test_finite_difference_points(self, rng):
        pts = rng.normal(size=(10, 2))
        bar = longest_h1(pts)
        frame = make_frame(bar, epsilon0=0.05)
        assert is_generic(frame)

        def objective(x):
            b = longest_h1(x)
            f = make_frame(b, epsilon0=0.05)
            D, _ = death_content(f, relaxed=True)
            B, _ = birth_content(f)
            return D - B

        fc = build_vr(pts, max_dim=2)
        _, bw = birth_content(frame)
        _, dw = death_content(frame, relaxed=True)
        g = grad_to_points(fc, content_gradient(frame, dw, "death", relaxed=True), pts)
        g -= grad_to_points(fc, content_gradient(frame, bw, "birth"), pts)
        fd = central_difference(objective, pts)
        rel = np.abs(fd - g).max() / max(1e-12, np.abs(fd).max())
        assert rel <= 1e-5

    def test_gradient_keys_on_edges_when_relaxed(self):
        bar = longest_h1(SQUARE)
        frame = make_frame(bar, epsilon=0.1)
        _, dw = death_content(frame, relaxed=True)
        grad = content_gradient(frame, dw, "death", relaxed=True)
        assert all(len(s) == 2 for s in grad)

    def test_vertex_value_routing(self):
        from cochainopt.complexes import build_lower_star

        fc = build_lower_star(
            [(0,), (1,), (2,), (0, 1), (1, 2)], {0: 0.1, 1: 0.6, 2: 0.3}
        )
        bar = [b for b in compute_persistence(fc, 0).in_degree(0) if b.finite]
        bar = max(bar, key=lambda b: b.persistence)
        frame = make_frame(bar, epsilon=0.2)
        D, w = death_content(frame)
        vg = grad_to_vertex_values(fc, content_gradient(frame, w, "death"))
        assert set(vg) == {1}  # the death edge's value comes from vertex 1
        assert sum(vg.values()) == pytest.approx(1.0)


class TestContentReport:
    def test_report_fields_and_json(self):
        bar = longest_h1(SQUARE)
        frame = make_frame(bar, epsilon=0.1)
        report = content_report(frame)
        assert report.B == pytest.approx(1.0)
        assert report.D == pytest.approx(math.sqrt(2))
        assert sum(report.birth_weights.values()) == pytest.approx(1.0, abs=1e-9)
        assert sum(report.death_weights.values()) == pytest.approx(1.0, abs=1e-9)
        assert report.generic
        assert report.B_relaxed <= report.D_relaxed
        payload = json.dumps(report.to_json_obj())
        assert "birth_weights" in payload

    def test_nongeneric_flag(self):
        bar = toy_bar()
        with pytest.warns(UserWarning):
            report = content_report(make_frame(bar, epsilon=0.1))
        assert not report.generic
        assert report.grad_f  # gradient still produced

    def test_small_epsilon_limit(self, rng):
        bar = longest_h1(rng.normal(size=(10, 2)))
        gaps = []
        for e0 in (0.2, 0.1, 0.05, 0.02, 0.01):
            frame = make_frame(bar, epsilon0=e0)
            B, _ = birth_content(frame)
            D, _ = death_content(frame)
            gaps.append(abs((D - B) - bar.persistence))
            assert gaps[-1] <= frame.epsilon
        assert gaps[-1] <= gaps[0] + 1e-12
