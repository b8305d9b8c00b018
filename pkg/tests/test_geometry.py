import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coverclust.errors import DimensionMismatchError
from coverclust.geometry import (
    ball_cover_size_bound,
    euclidean_ball_cover,
    euclidean_distance,
    grid_cover_count,
    min_enclosing_ball,
)

from .conftest import point_arrays


class TestEuclideanDistance:
    def test_identity(self):
        assert euclidean_distance([0, 0], [0, 0]) == 0.0

    def test_345(self):
        assert euclidean_distance([0, 0], [3, 4]) == 5.0

    def test_unit_offsets(self):
        assert euclidean_distance([1, 1, 1], [2, 2, 2]) == pytest.approx(math.sqrt(3), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            euclidean_distance([0, 0], [0, 0, 0])


def _grid_meb_radius(pts, res=200):
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    xs = np.linspace(lo[0], hi[0], res)
    ys = np.linspace(lo[1], hi[1], res)
    X, Y = np.meshgrid(xs, ys)
    C = np.stack([X.ravel(), Y.ravel()], axis=1)
    return np.sqrt(((C[:, None, :] - pts[None]) ** 2).sum(-1)).max(axis=1).min()


class TestMinEnclosingBall:
    def test_singleton(self):
        b = min_enclosing_ball([[0, 0]])
        assert np.allclose(b.center, [0, 0]) and b.radius == 0

    def test_pair(self):
        b = min_enclosing_ball([[0, 0], [2, 0]])
        assert np.allclose(b.center, [1, 0]) and b.radius == pytest.approx(1.0, abs=1e-12)

    def test_equilateral(self):
        pts = np.array([[0, 0], [2, 0], [1, math.sqrt(3)]])
        b = min_enclosing_ball(pts)
        assert b.radius == pytest.approx(2 / math.sqrt(3), abs=1e-9)
        # independent check by grid minimization of the max distance
        assert b.radius <= _grid_meb_radius(pts) + 1e-9

    def test_empty(self):
        with pytest.raises(ValueError):
            min_enclosing_ball(np.empty((0, 2)))

    def test_deterministic(self, rng):
        pts = rng.normal(size=(30, 3))
        a, b = min_enclosing_ball(pts), min_enclosing_ball(pts)
        assert np.array_equal(a.center, b.center) and a.radius == b.radius

    @settings(max_examples=60, deadline=None)
    @given(point_arrays(1, 6))
    def test_grid_oracle_and_diameter(self, pts):
        b = min_enclosing_ball(pts)
        assert np.all(np.linalg.norm(pts - b.center, axis=1) <= b.radius + 1e-9)
        diam = max(np.linalg.norm(p - q) for p in pts for q in pts)
        assert b.radius >= diam / 2 - 1e-9
        if diam > 0:
            assert b.radius <= _grid_meb_radius(pts) + 1e-9

    @settings(max_examples=60, deadline=None)
    @given(point_arrays(1, 25, dim=3))
    def test_containment_3d(self, pts):
        b = min_enclosing_ball(pts)
        assert np.all(np.linalg.norm(pts - b.center, axis=1) <= b.radius + 1e-9)


class TestBallCover:
    def test_axis_grid_1d(self):
        G = euclidean_ball_cover([0.0], 4.0, 2.0)
        assert sorted(G[:, 0].tolist()) == [-4.0, -2.0, 0.0, 2.0, 4.0]
        xs = np.linspace(-4, 4, 8001)
        assert np.abs(xs[:, None] - G[None, :, 0]).min(axis=1).max() <= 2.0

    def test_zero_radius(self):
        assert euclidean_ball_cover([1.0, 2.0], 0.0, 0.5).tolist() == [[1.0, 2.0]]

    def test_coarse_radius(self):
        assert euclidean_ball_cover([1.0, 2.0], 1.0, 3.0).tolist() == [[1.0, 2.0]]

    @pytest.mark.parametrize("rp", [0.0, -1.0])
    def test_bad_rprime(self, rp):
        with pytest.raises(ValueError):
            euclidean_ball_cover([0.0], 1.0, rp)

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            euclidean_ball_cover([0.0], -1.0, 1.0)

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(1, 3),
        st.floats(0.1, 5.0),
        st.floats(1.05, 6.0),
        st.integers(0, 2**32 - 1),
    )
    def test_soundness_and_bound(self, d, r, ratio, seed):
        rp = r / ratio
        rng = np.random.default_rng(seed)
        c = rng.normal(size=d)
        G = euclidean_ball_cover(c, r, rp)
        assert len(G) <= ball_cover_size_bound(d, r, rp)
        assert len(G) == grid_cover_count(d, r / rp)
        v = rng.normal(size=(1000, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        q = c + v * r * rng.uniform(0, 1, (1000, 1)) ** (1 / d)
        gap = np.sqrt(((q[:, None, :] - G[None]) ** 2).sum(-1)).min(axis=1)
        assert gap.max() <= rp + 1e-9

    def test_boundary_points(self):
        # points exactly on the sphere are the hardest case for the clip
        G = euclidean_ball_cover([0.0, 0.0], 3.0, 1.0)
        t = np.linspace(0, 2 * np.pi, 2000)
        q = 3.0 * np.stack([np.cos(t), np.sin(t)], axis=1)
        gap = np.sqrt(((q[:, None, :] - G[None]) ** 2).sum(-1)).min(axis=1)
        assert gap.max() <= 1.0 + 1e-9
