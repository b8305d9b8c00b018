"""Euclidean primitives: points, minimum enclosing balls and grid covers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatchError

#: Absolute tolerance applied to every distance comparison in the package.
TOL = 1e-9

_MEB_SEED = 0x5EED


def as_point(coords) -> np.ndarray:
    """Return ``coords`` as a finite 1-D float array."""
    p = np.asarray(coords, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"a point needs a non-empty 1-D coordinate list, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


def as_points(coords) -> np.ndarray:
    """Return ``coords`` as a finite ``(m, d)`` float array with ``m >= 1``."""
    pts = np.asarray(coords, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise ValueError(f"expected a non-empty (m, d) point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("ball radius must be nonnegative")

    def contains(self, p, tol: float = TOL) -> bool:
        return float(np.linalg.norm(np.asarray(p, dtype=float) - self.center)) <= self.radius + tol


def euclidean_distance(a, b) -> float:
    """l2 distance between two points of equal dimension."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(math.sqrt(float(np.dot(a - b, a - b))))


def _circumball(support: list[np.ndarray]) -> tuple[np.ndarray, float]:
    # Smallest ball with every support point on its boundary; the center
    # lies in the affine hull of the support.
    p0 = support[0]
    if len(support) == 1:
        return p0.copy(), 0.0
    A = np.array([p - p0 for p in support[1:]])
    G = A @ A.T
    rhs = 0.5 * np.einsum("ij,ij->i", A, A)
    try:
        lam = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        lam = np.linalg.lstsq(G, rhs, rcond=None)[0]
    c = p0 + lam @ A
    r = max(float(np.linalg.norm(p - c)) for p in support)
    return c, r


def _mtf(pts: list[np.ndarray], end: int, support: list[np.ndarray], dim: int):
    if support:
        c, r = _circumball(support)
    else:
        c, r = None, -1.0
    if len(support) == dim + 1:
        return c, r
    i = 0
    while i < end:
        p = pts[i]
        if c is None or float(np.linalg.norm(p - c)) > r + TOL:
            c, r = _mtf(pts, i, support + [p], dim)
            pts.insert(0, pts.pop(i))
        i += 1
    return c, r


def min_enclosing_ball(points) -> Ball:
    """Smallest Euclidean ball containing every point.

    Welzl's move-to-front scheme over a fixed pseudo-random permutation, so
    repeated calls on the same input give bit-identical results.

    Parameters
    ----------
    points : array_like, shape (m, d)
        Non-empty list of points of uniform dimension.

    Returns
    -------
    Ball
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("min_enclosing_ball needs a non-empty (m, d) point list")
    m, dim = pts.shape
    if m == 1:
        return Ball(pts[0].copy(), 0.0)
    order = np.random.default_rng(_MEB_SEED).permutation(m)
    work = [pts[i] for i in order]
    c, r = _mtf(work, m, [], dim)
    # Report the radius actually needed by the returned center.
    r = float(np.max(np.linalg.norm(pts - c, axis=1)))
    return Ball(c, r)


@lru_cache(maxsize=512)
def _unit_lattice(dim: int, k: int, bound: float) -> np.ndarray:
    # integer offsets in [-k, k]^dim with norm <= bound, read-only and shared
    axis = np.arange(-k, k + 1, dtype=float)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    offs = np.stack([g.ravel() for g in mesh], axis=1)
    keep = np.linalg.norm(offs, axis=1) <= bound + TOL * max(1.0, bound)
    out = offs[keep]
    out.flags.writeable = False
    return out


def _lattice_shape(dim: int, ratio: float) -> tuple[int, float]:
    # per-axis steps and clipping radius, both in units of the spacing r'/sqrt(d)
    root = math.sqrt(dim)
    return math.ceil(ratio * root - 1e-12), round((ratio + 0.5) * root, 9)


def grid_cover_count(dim: int, ratio: float) -> int:
    """Size of :func:`euclidean_ball_cover` for ``r / r' = ratio``."""
    if ratio <= 1:
        return 1
    return len(_unit_lattice(dim, *_lattice_shape(dim, ratio)))


def euclidean_ball_cover(center, r: float, r_prime: float) -> np.ndarray:
    """Finite ``r_prime``-cover of the Euclidean ball ``B(center, r)``.

    Axis-aligned lattice anchored at ``center`` with spacing
    ``r_prime / sqrt(d)``, clipped to ``ceil(r sqrt(d) / r_prime)`` steps per
    axis and to the ball of radius ``r + r_prime / 2``.  Every point of the
    ball is within ``r_prime / 2`` of the lattice point it rounds to, and
    that lattice point survives both clips.

    Returns
    -------
    ndarray, shape (N, d)
        ``N <= (2 ceil(r sqrt(d) / r_prime) + 1) ** d``.
    """
    c = as_point(center)
    if r_prime <= 0:
        raise ValueError("r_prime must be positive")
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r <= r_prime:
        return c[None, :].copy()
    dim = c.size
    step = r_prime / math.sqrt(dim)
    return c + _unit_lattice(dim, *_lattice_shape(dim, r / r_prime)) * step


def ball_cover_size_bound(dim: int, r: float, r_prime: float) -> int:
    """Upper bound ``(2 ceil(r sqrt(d) / r') + 1) ** d`` on the grid cover size."""
    if r <= r_prime:
        return 1
    return (2 * math.ceil(r * math.sqrt(dim) / r_prime - 1e-12) + 1) ** dim
