"""Brute-force references and instance generators for testing.

The brute-force references never call into :mod:`coverclust.metrics`,
:mod:`coverclust.geometry` or the projection code; each recomputes its
arithmetic from scratch so it can check those modules independently.
Planted instances record their cost with the engine's own evaluator.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .metrics import PointSet, Trajectory


def _dist(p, q) -> float:
    return math.dist(tuple(map(float, p)), tuple(map(float, q)))


# ---------------------------------------------------------------------------
# distances


def _monotone_paths(n1: int, n2: int):
    # all lattice paths (0,0) -> (n1-1, n2-1) with steps (1,0), (0,1), (1,1)
    def rec(i, j, path):
        if (i, j) == (n1 - 1, n2 - 1):
            yield path
            return
        if i + 1 < n1:
            yield from rec(i + 1, j, path + [(i + 1, j)])
        if j + 1 < n2:
            yield from rec(i, j + 1, path + [(i, j + 1)])
        if i + 1 < n1 and j + 1 < n2:
            yield from rec(i + 1, j + 1, path + [(i + 1, j + 1)])

    yield from rec(0, 0, [(0, 0)])


def brute_frechet(a, b) -> float:
    """Discrete Fréchet distance by enumerating every monotone correspondence."""
    A = a.points if hasattr(a, "points") else np.asarray(a, float)
    B = b.points if hasattr(b, "points") else np.asarray(b, float)
    D = [[_dist(p, q) for q in B] for p in A]
    return min(max(D[i][j] for i, j in path) for path in _monotone_paths(len(A), len(B)))


def brute_hausdorff(a, b) -> float:
    """Hausdorff distance as the best correspondence (a relation covering both sides).

    Enumerates every subset of ``A x B``; feasible for ``|A| * |B| <= 16``.
    """
    A = a.points if hasattr(a, "points") else np.asarray(a, float)
    B = b.points if hasattr(b, "points") else np.asarray(b, float)
    na, nb = len(A), len(B)
    pairs = [(i, j) for i in range(na) for j in range(nb)]
    w = np.array([_dist(A[i], B[j]) for i, j in pairs])
    masks = np.arange(1, 1 << len(pairs), dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(len(pairs))) & 1).astype(bool)
    left = np.zeros((len(masks), na), dtype=bool)
    right = np.zeros((len(masks), nb), dtype=bool)
    for col, (i, j) in enumerate(pairs):
        left[:, i] |= bits[:, col]
        right[:, j] |= bits[:, col]
    valid = left.all(axis=1) & right.all(axis=1)
    cost = np.where(bits, w[None, :], -np.inf).max(axis=1)
    return float(cost[valid].min())


# ---------------------------------------------------------------------------
# enclosing balls and projections


def brute_meb_radius(points) -> float:
    """Smallest enclosing ball radius in the plane (or on a line).

    Tries every ball with two points as a diameter and every circumcircle of
    three points, keeping the smallest one that contains all points.
    """
    P = np.asarray(points, float)
    if len(P) == 1:
        return 0.0
    if P.shape[1] > 2:
        raise ValueError("brute_meb_radius supports d <= 2")
    best = math.inf
    cands = []
    for i, j in itertools.combinations(range(len(P)), 2):
        cands.append(((P[i] + P[j]) / 2, _dist(P[i], P[j]) / 2))
    if P.shape[1] == 2:
        for i, j, k in itertools.combinations(range(len(P)), 3):
            (ax, ay), (bx, by), (cx, cy) = P[i], P[j], P[k]
            den = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
            if abs(den) < 1e-12:
                continue
            ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / den
            uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / den
            c = np.array([ux, uy])
            cands.append((c, _dist(c, P[i])))
    for c, r in cands:
        if r < best and all(_dist(c, p) <= r + 1e-9 for p in P):
            best = r
    return best


def brute_trajectory_projection_cost(points, l: int) -> float:
    """Min over contiguous partitions into at most ``l`` blocks of the max block MEB radius."""
    P = np.asarray(points, float)
    m = len(P)
    best = math.inf
    for blocks in range(1, min(l, m) + 1):
        for cuts in itertools.combinations(range(1, m), blocks - 1):
            bounds = (0,) + cuts + (m,)
            cost = max(brute_meb_radius(P[bounds[i] : bounds[i + 1]]) for i in range(blocks))
            best = min(best, cost)
    return best


def brute_pointset_projection_cost(points, l: int) -> float:
    """Min over all assignments of points to ``l`` groups of the max group MEB radius."""
    P = np.asarray(points, float)
    best = math.inf
    for labels in itertools.product(range(l), repeat=len(P)):
        groups = [P[[i for i, g in enumerate(labels) if g == c]] for c in range(l)]
        cost = max(brute_meb_radius(g) for g in groups if len(g))
        best = min(best, cost)
    return best


# ---------------------------------------------------------------------------
# grid 1-median


def _frechet_rows(cands: np.ndarray, elem: np.ndarray) -> np.ndarray:
    # full-table coupling DP for many candidates (N, L, d) against one element (M, d)
    N, L, _ = cands.shape
    M = elem.shape[0]
    D = np.linalg.norm(cands[:, :, None, :] - elem[None, None, :, :], axis=-1)  # (N, L, M)
    F = np.full((N, L, M), np.inf)
    for i in range(L):
        for j in range(M):
            if i == 0 and j == 0:
                F[:, 0, 0] = D[:, 0, 0]
                continue
            prev = np.full(N, np.inf)
            if i > 0:
                prev = np.minimum(prev, F[:, i - 1, j])
            if j > 0:
                prev = np.minimum(prev, F[:, i, j - 1])
            if i > 0 and j > 0:
                prev = np.minimum(prev, F[:, i - 1, j - 1])
            F[:, i, j] = np.maximum(prev, D[:, i, j])
    return F[:, L - 1, M - 1]


def _hausdorff_rows(cands: np.ndarray, elem: np.ndarray) -> np.ndarray:
    D = np.linalg.norm(cands[:, :, None, :] - elem[None, None, :, :], axis=-1)
    return np.maximum(D.min(axis=2).max(axis=1), D.min(axis=1).max(axis=1))


@dataclass(frozen=True)
class GridMedian:
    center: Trajectory | PointSet
    cost: float
    slack: float
    spacing: float


def grid_1median(
    P: Sequence,
    l: int,
    bounding_box: tuple[Sequence[float], Sequence[float]] | None = None,
    resolution: int = 21,
    chunk: int = 20000,
) -> GridMedian:
    """Best center among all ``<= l``-vertex elements with lattice vertices.

    The lattice has ``resolution`` points per axis over ``bounding_box``
    (default: the bounding box of all input points).  Clamping a center into
    that box does not increase any distance, and snapping each vertex to the
    lattice moves it by at most ``spacing * sqrt(d) / 2``, so the true
    1-median cost lies in ``[cost - slack, cost]`` with
    ``slack = n * spacing * sqrt(d) / 2``.
    """
    kind = P[0].kind
    pts = np.concatenate([p.points for p in P])
    d = pts.shape[1]
    lo, hi = (pts.min(axis=0), pts.max(axis=0)) if bounding_box is None else map(np.asarray, bounding_box)
    axes = [np.linspace(lo[i], hi[i], resolution) for i in range(d)]
    spacing = float(max((hi[i] - lo[i]) / (resolution - 1) for i in range(d)))
    lattice = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    G = len(lattice)

    def index_tuples(s):
        if kind == "trajectory":
            return itertools.product(range(G), repeat=s)
        return itertools.combinations(range(G), s)

    best_cost, best_center = math.inf, None
    rows_fn = _frechet_rows if kind == "trajectory" else _hausdorff_rows
    for s in range(1, l + 1):
        it = index_tuples(s)
        while True:
            block = list(itertools.islice(it, chunk))
            if not block:
                break
            cands = lattice[np.array(block)]
            total = np.zeros(len(cands))
            for p in P:
                total += rows_fn(cands, p.points)
            j = int(np.argmin(total))
            if total[j] < best_cost:
                best_cost, best_center = float(total[j]), cands[j]
    center = Trajectory(best_center) if kind == "trajectory" else PointSet(best_center)
    slack = len(P) * spacing * math.sqrt(d) / 2
    return GridMedian(center, best_cost, slack, spacing)


def exhaustive_k_median(P: Sequence, centers: Sequence, k: int) -> tuple[float, tuple[int, ...]]:
    """Optimal cost over all ``<= k``-subsets of an explicit center list."""
    M = np.array([[brute_distance(p, c) for c in centers] for p in P])
    best = (math.inf, ())
    for size in range(1, min(k, len(centers)) + 1):
        for combo in itertools.combinations(range(len(centers)), size):
            cost = math.fsum(M[:, list(combo)].min(axis=1).tolist())
            if cost < best[0]:
                best = (cost, combo)
    return best


def brute_distance(a, b) -> float:
    if a.kind == "trajectory":
        return float(_frechet_rows(a.points[None], b.points)[0])
    return float(_hausdorff_rows(a.points[None], b.points)[0])


def brute_cost(P: Sequence, centers: Sequence) -> float:
    return math.fsum(min(brute_distance(p, c) for c in centers) for p in P)


# ---------------------------------------------------------------------------
# instance generators


def antipodal_family(m: int, r: float = 1.0, d: int = 2) -> tuple[Trajectory, list[Trajectory]]:
    """Spine with vertex spacing ``3r`` and all ``2^m`` antipodal sign choices.

    Vertex ``i`` of a family member is ``p_i + 0.99 r e_1`` or
    ``p_i - 0.99 r e_1``.  Every member is within ``r`` of the spine while
    distinct members are more than ``r`` apart.
    """
    if not 1 <= m <= 12:
        raise ValueError("antipodal_family supports 1 <= m <= 12")
    e1 = np.zeros(d)
    e1[0] = 1.0
    spine = np.array([3 * r * i * e1 for i in range(m)])
    family = []
    for signs in itertools.product((1.0, -1.0), repeat=m):
        pts = spine + 0.99 * r * np.array(signs)[:, None] * e1
        family.append(Trajectory(pts, "".join("a" if s > 0 else "b" for s in signs)))
    return Trajectory(spine, "spine"), family


def evaluate_cost(P, centers) -> float:
    # the planted cost is defined by the engine's own evaluation
    from .engine import evaluate_cost as engine_cost

    return engine_cost(P, centers)


@dataclass
class PlantedInstance:
    elements: list
    ground_truth_centers: list
    ground_truth_cost: float
    generator_params: dict = field(default_factory=dict)


def _ball_jitter(rng: np.random.Generator, shape: tuple[int, int], radius: float) -> np.ndarray:
    v = rng.normal(size=shape)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.uniform(0, 1, size=(shape[0], 1)) ** (1 / shape[1])


def planted_trajectories(
    spines: Sequence[Sequence[Sequence[float]]],
    per_cluster: int,
    jitter: float,
    repeat: int = 2,
    seed: int = 0,
) -> PlantedInstance:
    """Jittered copies of each spine, every spine vertex repeated ``repeat`` times."""
    rng = np.random.default_rng(seed)
    elements, centers = [], []
    for c, spine in enumerate(spines):
        sp = np.asarray(spine, float)
        centers.append(Trajectory(sp, f"spine{c}"))
        base = np.repeat(sp, repeat, axis=0)
        for i in range(per_cluster):
            elements.append(Trajectory(base + _ball_jitter(rng, base.shape, jitter), f"c{c}_{i:03d}"))
    cost = evaluate_cost(elements, centers)
    params = {"kind": "trajectory", "spines": [np.asarray(s, float).tolist() for s in spines], "per_cluster": per_cluster,
              "jitter": jitter, "repeat": repeat, "seed": seed}
    return PlantedInstance(elements, centers, cost, params)


def planted_pointsets(
    cores: Sequence[Sequence[Sequence[float]]],
    per_cluster: int,
    jitter: float,
    repeat: int = 2,
    seed: int = 0,
) -> PlantedInstance:
    """Point sets with ``repeat`` jittered samples around every core point."""
    rng = np.random.default_rng(seed)
    elements, centers = [], []
    for c, core in enumerate(cores):
        co = np.asarray(core, float)
        centers.append(PointSet(co, f"core{c}"))
        base = np.repeat(co, repeat, axis=0)
        for i in range(per_cluster):
            elements.append(PointSet(base + _ball_jitter(rng, base.shape, jitter), f"c{c}_{i:03d}"))
    cost = evaluate_cost(elements, centers)
    params = {"kind": "pointset", "cores": [np.asarray(s, float).tolist() for s in cores], "per_cluster": per_cluster,
              "jitter": jitter, "repeat": repeat, "seed": seed}
    return PlantedInstance(elements, centers, cost, params)


def write_fixture(inst: PlantedInstance, path: Path, l: int, resolution: int = 21) -> dict:
    """Write ``path`` (records) and ``path.meta.json`` with oracle costs.

    The metadata records the planted cost and, per planted cluster, the
    grid 1-median cost and slack over that cluster's bounding box.
    """
    path = Path(path)
    with path.open("w") as fh:
        for el in inst.elements:
            fh.write(json.dumps({"id": el.id, "kind": el.kind, "points": el.points.tolist()}) + "\n")
    groups: dict[str, list] = {}
    for el in inst.elements:
        groups.setdefault(el.id.split("_")[0], []).append(el)
    grid_cost = slack = 0.0
    for members in groups.values():
        g = grid_1median(members, l, resolution=resolution)
        grid_cost += g.cost
        slack += g.slack
    meta = {
        "generator": inst.generator_params,
        "l": l,
        "ground_truth_cost": inst.ground_truth_cost,
        "ground_truth_centers": [c.points.tolist() for c in inst.ground_truth_centers],
        "grid_oracle_cost": grid_cost,
        "grid_oracle_slack": slack,
        "grid_resolution": resolution,
    }
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta
