"""Restricted center spaces C.

A center space bundles the three capabilities the clustering framework
needs from C: distances from inputs to centers, the nearest-center
projection ``x -> argmin_{y in C} d(x, y)``, and finite covers of metric
balls intersected with C.

Two geometric spaces are provided, ``T^l`` (trajectories with at most ``l``
vertices under the discrete Fréchet distance) and ``U^l`` (point sets with
at most ``l`` points under the Hausdorff distance), plus a finite space
given by an explicit list of centers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import metrics
from .errors import ParameterError
from .geometry import TOL, euclidean_ball_cover, grid_cover_count, min_enclosing_ball
from .metrics import PointSet, Trajectory, pad_stack

# ---------------------------------------------------------------------------
# nearest-center projections


def simplify_trajectory(points: np.ndarray, l: int) -> tuple[np.ndarray, float]:
    """Closest trajectory with at most ``l`` vertices under discrete Fréchet.

    Splits the index range into at most ``l`` contiguous blocks minimizing
    the largest block MEB radius, and returns the block MEB centers in order
    together with that radius.  O(m^3) for the interval MEB table plus
    O(m^2 l) for the minimax partition.
    """
    if l < 1:
        raise ParameterError("l >= 1", f"center complexity l must be >= 1, got {l}")
    pts = np.asarray(points, dtype=float)
    m = pts.shape[0]
    if m <= l:
        return pts.copy(), 0.0

    radius = np.full((m, m), np.inf)
    centers: dict[tuple[int, int], np.ndarray] = {}
    for i in range(m):
        for j in range(i, m):
            ball = min_enclosing_ball(pts[i : j + 1])
            radius[i, j] = ball.radius
            centers[i, j] = ball.center

    # best[c, j]: minimax cost of covering pts[:j] with c blocks
    best = np.full((l + 1, m + 1), np.inf)
    cut = np.zeros((l + 1, m + 1), dtype=int)
    best[0, 0] = 0.0
    for c in range(1, l + 1):
        for j in range(1, m + 1):
            for i in range(c - 1, j):
                v = max(best[c - 1, i], radius[i, j - 1])
                if v < best[c, j]:
                    best[c, j] = v
                    cut[c, j] = i
    c_best = min(range(1, l + 1), key=lambda c: (best[c, m], c))
    blocks = []
    j, c = m, c_best
    while c > 0:
        i = cut[c, j]
        blocks.append((i, j - 1))
        j, c = i, c - 1
    blocks.reverse()
    out = np.array([centers[b] for b in blocks])
    return out, float(best[c_best, m])


def project_to_trajectory_centers(t: Trajectory, l: int) -> Trajectory:
    """Nearest element of ``T^l`` to ``t``; returns ``t`` when ``|t| <= l``."""
    if l < 1:
        raise ParameterError("l >= 1", f"center complexity l must be >= 1, got {l}")
    if len(t) <= l:
        return t
    pts, _ = simplify_trajectory(t.points, l)
    return Trajectory(pts, t.id)


def l_center(points: np.ndarray, l: int) -> tuple[np.ndarray, float]:
    """Exact Euclidean ``l``-center of a small point set.

    Every optimal disk can be shrunk to the MEB of the points it covers,
    and an MEB is fixed by at most ``d + 1`` support points, so the MEBs of
    all subsets of size ``<= d + 1`` form a complete candidate list.
    Candidates are scanned by increasing radius; the first radius at which
    ``l`` candidates no larger cover everything is optimal.
    """
    if l < 1:
        raise ParameterError("l >= 1", f"center complexity l must be >= 1, got {l}")
    pts = np.asarray(points, dtype=float)
    m, d = pts.shape
    if m <= l:
        return pts.copy(), 0.0
    full = (1 << m) - 1

    by_mask: dict[int, tuple[float, np.ndarray]] = {}
    for size in range(1, min(d + 1, m) + 1):
        for combo in itertools.combinations(range(m), size):
            ball = min_enclosing_ball(pts[list(combo)])
            inside = np.linalg.norm(pts - ball.center, axis=1) <= ball.radius + TOL
            mask = int(sum(1 << i for i in np.flatnonzero(inside)))
            prev = by_mask.get(mask)
            if prev is None or ball.radius < prev[0]:
                by_mask[mask] = (ball.radius, ball.center)
    cands = sorted(((r, mask, c) for mask, (r, c) in by_mask.items()), key=lambda t: (t[0], t[1]))

    def covers(masks: list[int], need: int, budget: int, start: int) -> list[int] | None:
        if need == 0:
            return []
        if budget == 0:
            return None
        for idx in range(start, -1, -1):
            mask = masks[idx]
            if mask & need:
                rest = covers(masks, need & ~mask, budget - 1, idx - 1)
                if rest is not None:
                    return [idx] + rest
        return None

    masks: list[int] = []
    for pos, (r, mask, c) in enumerate(cands):
        masks.append(mask)
        # the newest (largest) candidate is part of the solution
        rest = covers(masks, full & ~mask, l - 1, pos - 1)
        if rest is not None:
            chosen = [pos] + rest
            out = np.array([cands[i][2] for i in sorted(chosen)])
            return out, float(r)
    raise AssertionError("singleton disks always cover")  # pragma: no cover


def project_to_pointset_centers(s: PointSet, l: int) -> PointSet:
    """Nearest element of ``U^l`` to ``s``; returns ``s`` when ``|s| <= l``."""
    if l < 1:
        raise ParameterError("l >= 1", f"center complexity l must be >= 1, got {l}")
    if len(s) <= l:
        return s
    pts, _ = l_center(s.points, l)
    return PointSet(pts, s.id)


# ---------------------------------------------------------------------------
# ball covers


@dataclass(frozen=True)
class CoverRequest:
    """Request for an ``r_prime``-cover of ``ball(center, r) ∩ C``."""

    center: Trajectory | PointSet
    r: float
    r_prime: float

    def __post_init__(self):
        if not (0 < self.r_prime < self.r):
            raise ParameterError(
                "0 < r_prime < r", f"cover radii must satisfy 0 < r' < r, got r={self.r}, r'={self.r_prime}"
            )


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def cover_trajectory_ball(req: CoverRequest, l: int) -> Iterator[Trajectory]:
    """Stream the cover of ``ball(τ, r) ∩ T^l`` built from per-vertex grids.

    Emits every sequence of ``s <= 2l`` grid points whose block indices are
    non-decreasing, start at the first vertex of τ, end at the last and
    visit every vertex, with the ``t``-th point drawn from the grid cover of
    ``B(p_{b_t}, r)``.  Each trajectory of ``T^l`` within ``r`` of τ is
    within ``r_prime`` of some emitted trajectory.
    """
    tau = req.center.points
    lp = tau.shape[0]
    if lp > l:
        raise ParameterError("|center| <= l", f"cover center has {lp} > l={l} vertices")
    grids = [euclidean_ball_cover(p, req.r, req.r_prime) for p in tau]
    for s in range(lp, 2 * l + 1):
        for parts in _compositions(s, lp):
            blocks = [b for b, c in enumerate(parts) for _ in range(c)]
            for combo in itertools.product(*(range(len(grids[b])) for b in blocks)):
                yield Trajectory(np.array([grids[b][i] for b, i in zip(blocks, combo)]))


def trajectory_cover_size(req: CoverRequest, l: int) -> int:
    """Exact number of elements :func:`cover_trajectory_ball` emits."""
    tau = req.center.points
    lp = tau.shape[0]
    g = [len(euclidean_ball_cover(p, req.r, req.r_prime)) for p in tau]
    total = 0
    for s in range(lp, 2 * l + 1):
        for parts in _compositions(s, lp):
            total += math.prod(gi**c for gi, c in zip(g, parts))
    return total


def trajectory_cover_bound(n_vertices: int, grid_size: int, l: int) -> int:
    """Closed-form bound ``C(2l, l') * g^(2l)`` on the trajectory cover size.

    There are ``C(s-1, l'-1)`` block patterns of length ``s`` and
    ``sum_{s <= 2l} C(s-1, l'-1) = C(2l, l')``.  For ``l >= 2`` this is at
    most ``l^(2l) g^(2l)``; for ``l = 1`` the cover has ``g + g^2`` elements.
    """
    return math.comb(2 * l, n_vertices) * grid_size ** (2 * l)


def trajectory_cover_witness(req: CoverRequest, target: Trajectory) -> tuple[Trajectory, list[int]]:
    """Cover element assigned to ``target`` by the coupling argument.

    Follows an optimal monotone coupling between ``target`` and the cover
    center; every coupled pair ``(q_i, p_j)`` contributes the grid point of
    ``B(p_j, r)`` nearest to ``q_i``.  Returns the trajectory and the block
    index of each of its vertices.
    """
    tau = req.center.points
    q = target.points
    D = np.sqrt(((q[:, None, :] - tau[None, :, :]) ** 2).sum(axis=-1))
    n1, n2 = D.shape
    F = np.full((n1, n2), np.inf)
    for i in range(n1):
        for j in range(n2):
            if i == 0 and j == 0:
                prev = 0.0
            else:
                prev = min(
                    F[i - 1, j] if i else np.inf,
                    F[i, j - 1] if j else np.inf,
                    F[i - 1, j - 1] if i and j else np.inf,
                )
            F[i, j] = max(prev, D[i, j])
    path = [(n1 - 1, n2 - 1)]
    i, j = n1 - 1, n2 - 1
    while (i, j) != (0, 0):
        steps = []
        if i and j:
            steps.append((F[i - 1, j - 1], i - 1, j - 1))
        if i:
            steps.append((F[i - 1, j], i - 1, j))
        if j:
            steps.append((F[i, j - 1], i, j - 1))
        _, i, j = min(steps)
        path.append((i, j))
    path.reverse()
    grids = [euclidean_ball_cover(p, req.r, req.r_prime) for p in tau]
    verts, blocks = [], []
    for i, j in path:
        g = grids[j]
        verts.append(g[np.argmin(np.linalg.norm(g - q[i], axis=1))])
        blocks.append(j)
    return Trajectory(np.array(verts)), blocks


def cover_pointset_ball(req: CoverRequest, l: int) -> Iterator[PointSet]:
    """Stream all non-empty subsets of size ``<= l`` of the union of grid covers."""
    sigma = req.center.points
    if sigma.shape[0] > l:
        raise ParameterError("|center| <= l", f"cover center has {sigma.shape[0]} > l={l} points")
    union = np.concatenate([euclidean_ball_cover(p, req.r, req.r_prime) for p in sigma])
    for j in range(1, l + 1):
        for combo in itertools.combinations(range(len(union)), j):
            yield PointSet(union[list(combo)])


def pointset_cover_size(req: CoverRequest, l: int) -> int:
    """Number of subsets :func:`cover_pointset_ball` emits."""
    u = sum(len(euclidean_ball_cover(p, req.r, req.r_prime)) for p in req.center.points)
    return sum(math.comb(u, j) for j in range(1, l + 1))


def _cartesian(arrays: list[np.ndarray]) -> np.ndarray:
    idx = np.meshgrid(*[np.arange(len(a)) for a in arrays], indexing="ij")
    return np.stack([a[i.ravel()] for a, i in zip(arrays, idx)], axis=1)


def compact_trajectory_cover(tau: np.ndarray, r: float, r_prime: float, l: int) -> np.ndarray:
    """Cover of ``ball(τ, r) ∩ T^l`` using only trajectories of ``T^l``.

    Sequences of at most ``l`` grid points with non-decreasing block index,
    kept when within ``r + r_prime`` of τ.  Snapping each vertex of a
    trajectory in the ball to the grid of the first τ-vertex it is coupled
    with yields such a sequence within ``r_prime``, so the output is a
    sound cover that needs no projection.

    Returns
    -------
    ndarray, shape (N, l, d)
        Padded by repeating the last vertex.
    """
    grids = [euclidean_ball_cover(p, r, r_prime) for p in tau]
    parts = []
    for s in range(1, l + 1):
        for blocks in itertools.combinations_with_replacement(range(len(grids)), s):
            seqs = _cartesian([grids[b] for b in blocks])
            if s < l:
                seqs = np.concatenate([seqs, np.repeat(seqs[:, -1:], l - s, axis=1)], axis=1)
            parts.append(seqs)
    stack = np.concatenate(parts)
    keep = metrics.frechet_batch(stack, tau) <= r + r_prime + TOL
    return stack[keep]


def compact_trajectory_cover_size(n_vertices: int, dim: int, ratio: float, l: int) -> int:
    """Unfiltered size of :func:`compact_trajectory_cover` for ``r / r' = ratio``."""
    g = grid_cover_count(dim, ratio)
    return sum(math.comb(n_vertices + s - 1, s) * g**s for s in range(1, l + 1))


def compact_pointset_cover(sigma: np.ndarray, r: float, r_prime: float, l: int) -> np.ndarray:
    """Subsets of size ``<= l`` of the grid union within ``r + r_prime`` of σ.

    Returns
    -------
    ndarray, shape (N, l, d)
        Padded by repeating the first point.
    """
    union = np.concatenate([euclidean_ball_cover(p, r, r_prime) for p in sigma])
    parts = []
    for j in range(1, l + 1):
        combos = np.array(list(itertools.combinations(range(len(union)), j)), dtype=int).reshape(-1, j)
        sets = union[combos]
        if j < l:
            sets = np.concatenate([sets, np.repeat(sets[:, :1], l - j, axis=1)], axis=1)
        parts.append(sets)
    stack = np.concatenate(parts)
    keep = metrics.hausdorff_batch(stack, sigma) <= r + r_prime + TOL
    return stack[keep]


def compact_pointset_cover_size(n_points: int, dim: int, ratio: float, l: int) -> int:
    """Unfiltered size of :func:`compact_pointset_cover` for ``r / r' = ratio``."""
    u = n_points * grid_cover_count(dim, ratio)
    return sum(math.comb(u, j) for j in range(1, l + 1))


# ---------------------------------------------------------------------------
# finite spaces


def finite_space_1median(sample: Sequence, centers: Sequence, weights: Sequence[float] | None = None):
    """Exact 1-median of ``sample`` over an explicit center list.

    Returns the index of the minimizing center; ties go to the lowest index.
    """
    if len(sample) == 0:
        raise ValueError("finite_space_1median needs a non-empty sample")
    if len(centers) == 0:
        raise ValueError("finite center space is empty")
    w = np.ones(len(sample)) if weights is None else np.asarray(weights, dtype=float)
    costs = [sum(wi * metrics.distance(s, c) for wi, s in zip(w, sample)) for c in centers]
    return int(np.argmin(costs))


# ---------------------------------------------------------------------------
# the space abstraction


def element_key(x: Trajectory | PointSet) -> bytes:
    """Hashable identity of an element's geometry (ids are ignored)."""
    pts = x.points
    if x.kind == "pointset":
        pts = pts[np.lexsort(pts.T[::-1])]
    head = f"{x.kind}:{pts.shape[0]}x{pts.shape[1]}:".encode()
    return head + np.ascontiguousarray(pts).tobytes()


@dataclass(frozen=True)
class CenterSpaceDescriptor:
    kind: str
    l: int | None = None
    explicit_centers: tuple = ()

    def __post_init__(self):
        if self.kind not in ("trajectory_l", "pointset_l", "finite"):
            raise ParameterError("kind in {trajectory_l, pointset_l, finite}", f"unknown center space {self.kind!r}")
        if self.kind != "finite" and (self.l is None or self.l < 1):
            raise ParameterError("l >= 1", f"center complexity l must be >= 1, got {self.l}")
        if self.kind == "finite" and len(self.explicit_centers) == 0:
            raise ParameterError("explicit_centers non-empty", "finite center space needs explicit centers")


class CenterSpace:
    """Base class; concrete spaces fill in projection and covers."""

    kind: str
    element_kind: str

    def distance(self, x, c) -> float:
        return metrics.distance(x, c)

    def stack(self, elements: Sequence, length: int | None = None) -> np.ndarray:
        return pad_stack([e.points for e in elements], self.element_kind, length)

    def distances_to(self, batch: np.ndarray, c) -> np.ndarray:
        """``d(x_i, c)`` for every row of a padded batch."""
        return metrics.batch_distance(self.element_kind, batch, c.points)

    def sample_costs(self, stack: np.ndarray, sample: Sequence) -> np.ndarray:
        """``sum_s d(s, c_j)`` over ``sample`` for each stacked candidate ``c_j``."""
        total = np.zeros(stack.shape[0])
        for s in sample:
            total += metrics.batch_distance(self.element_kind, stack, s.points)
        return total

    def make(self, points: np.ndarray, id: str = ""):
        return Trajectory(points, id) if self.element_kind == "trajectory" else PointSet(points, id)

    def unpad(self, padded: np.ndarray):
        """Element from a padded row, dropping trailing repeats."""
        pts = padded
        if self.element_kind == "trajectory":
            m = pts.shape[0]
            while m > 1 and np.array_equal(pts[m - 1], pts[m - 2]):
                m -= 1
            pts = pts[:m]
        return self.make(pts)

    def key(self, c) -> bytes:
        return element_key(c)

    def project(self, x):
        raise NotImplementedError

    def cover_stack(self, c, r: float, r_prime: float) -> np.ndarray:
        raise NotImplementedError

    def cover_size(self, c, ratio: float) -> int:
        """Cover size before filtering, as a function of ``r / r'`` only."""
        raise NotImplementedError

    def contains(self, c) -> bool:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_descriptor(desc: CenterSpaceDescriptor) -> "CenterSpace":
        if desc.kind == "trajectory_l":
            return TrajectoryCenters(desc.l)
        if desc.kind == "pointset_l":
            return PointSetCenters(desc.l)
        return FiniteCenters(list(desc.explicit_centers))


class TrajectoryCenters(CenterSpace):
    """``T^l`` under the discrete Fréchet distance."""

    kind = "trajectory_l"
    element_kind = "trajectory"

    def __init__(self, l: int):
        if l < 1:
            raise ParameterError("l >= 1", f"center complexity l must be >= 1, got {l}")
        self.l = l

    def project(self, x: Trajectory) -> Trajectory:
        return project_to_trajectory_centers(x, self.l)

    def cover_stack(self, c, r, r_prime):
        return compact_trajectory_cover(c.points, r, r_prime, self.l)

    def cover_size(self, c, ratio):
        return compact_trajectory_cover_size(len(c), c.dim, ratio, self.l)

    def contains(self, c) -> bool:
        return isinstance(c, Trajectory) and len(c) <= self.l

    def describe(self):
        return {"kind": self.kind, "l": self.l}


class PointSetCenters(CenterSpace):
    """``U^l`` under the Hausdorff distance."""

    kind = "pointset_l"
    element_kind = "pointset"

    def __init__(self, l: int):
        if l < 1:
            raise ParameterError("l >= 1", f"center complexity l must be >= 1, got {l}")
        self.l = l

    def project(self, x: PointSet) -> PointSet:
        return project_to_pointset_centers(x, self.l)

    def cover_stack(self, c, r, r_prime):
        return compact_pointset_cover(c.points, r, r_prime, self.l)

    def cover_size(self, c, ratio):
        return compact_pointset_cover_size(len(c), c.dim, ratio, self.l)

    def contains(self, c) -> bool:
        return isinstance(c, PointSet) and len(c) <= self.l

    def describe(self):
        return {"kind": self.kind, "l": self.l}


class FiniteCenters(CenterSpace):
    """Explicit finite center list; the ball itself is its own cover."""

    kind = "finite"

    def __init__(self, centers: Sequence):
        if not centers:
            raise ParameterError("explicit_centers non-empty", "finite center space needs explicit centers")
        kinds = {c.kind for c in centers}
        if len(kinds) != 1:
            raise ParameterError("uniform center kind", "explicit centers mix trajectories and point sets")
        self.element_kind = kinds.pop()
        self.centers = list(centers)
        self._keys = {element_key(c): i for i, c in enumerate(self.centers)}
        self._stack = self.stack(self.centers)

    def project(self, x):
        dists = [metrics.distance(x, c) for c in self.centers]
        return self.centers[int(np.argmin(dists))]

    def index_of(self, c) -> int:
        return self._keys[element_key(c)]

    def cover_stack(self, c, r, r_prime):
        d = metrics.batch_distance(self.element_kind, self._stack, c.points)
        return self._stack[d <= r + TOL]

    def cover_size(self, c, ratio):
        return len(self.centers)

    def unpad(self, padded):
        # map back onto the explicit object so identity is preserved
        probe = self.make(padded)
        d = [metrics.distance(probe, c) for c in self.centers]
        return self.centers[int(np.argmin(d))]

    def contains(self, c) -> bool:
        return element_key(c) in self._keys

    def describe(self):
        return {"kind": self.kind, "centers": len(self.centers)}
