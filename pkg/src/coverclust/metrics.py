"""Discrete Fréchet and Hausdorff distances.

Scalar functions (:func:`discrete_frechet`, :func:`hausdorff`) are the exact
reference evaluations.  The ``*_batch`` functions evaluate one side against
many padded elements at once; trajectories are padded by repeating their
last point and point sets by repeating their first point, neither of which
changes the distance.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError
from .geometry import TOL, as_points


def _dedupe(points: np.ndarray, tol: float = TOL) -> np.ndarray:
    keep: list[int] = []
    for i in range(points.shape[0]):
        if not any(np.linalg.norm(points[i] - points[j]) <= tol for j in keep):
            keep.append(i)
    return points[keep]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Ordered, non-empty sequence of points in R^d."""

    points: np.ndarray
    id: str = ""
    kind: str = field(default="trajectory", init=False, repr=False)

    def __post_init__(self):
        pts = np.array(as_points(self.points), dtype=float)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def with_id(self, new_id: str) -> "Trajectory":
        return Trajectory(self.points, new_id)


@dataclass(frozen=True, eq=False)
class PointSet:
    """Finite non-empty point set; near-duplicates (within 1e-9) are merged."""

    points: np.ndarray
    id: str = ""
    kind: str = field(default="pointset", init=False, repr=False)

    def __post_init__(self):
        pts = _dedupe(np.array(as_points(self.points), dtype=float))
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def with_id(self, new_id: str) -> "PointSet":
        return PointSet(self.points, new_id)


Element = Trajectory | PointSet


def _points(x) -> np.ndarray:
    return x.points if isinstance(x, (Trajectory, PointSet)) else as_points(x)


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")


def discrete_frechet(a, b) -> float:
    """Discrete Fréchet distance between two trajectories.

    Iterative dynamic program over the coupling table that keeps a single
    row of length ``min(|a|, |b|)``.

    Examples
    --------
    >>> discrete_frechet([[0, 0], [1, 0], [2, 0]], [[0, 1], [2, 1]])  # doctest: +ELLIPSIS
    1.414213562...
    """
    A, B = _points(a), _points(b)
    _check_dims(A, B)
    if A.shape[0] < B.shape[0]:
        A, B = B, A
    nb = B.shape[0]
    row: list[float] = []
    for i in range(A.shape[0]):
        dist = np.sqrt(((B - A[i]) ** 2).sum(axis=1)).tolist()
        new = [0.0] * nb
        if i == 0:
            acc = 0.0
            for j in range(nb):
                acc = max(acc, dist[j])
                new[j] = acc
        else:
            new[0] = max(row[0], dist[0])
            for j in range(1, nb):
                new[j] = max(min(row[j], row[j - 1], new[j - 1]), dist[j])
        row = new
    return float(row[-1])


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite point sets (directed-max form)."""
    A, B = _points(a), _points(b)
    _check_dims(A, B)
    D = np.sqrt(((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=-1))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def distance(a: Element, b: Element) -> float:
    """Distance between two elements of the same kind."""
    if isinstance(a, Trajectory) and isinstance(b, Trajectory):
        return discrete_frechet(a, b)
    if isinstance(a, PointSet) and isinstance(b, PointSet):
        return hausdorff(a, b)
    raise TypeError(f"cannot compare {type(a).__name__} with {type(b).__name__}")


# ---------------------------------------------------------------------------
# padded batches


def pad_stack(arrays: list[np.ndarray], kind: str, length: int | None = None) -> np.ndarray:
    """Stack variable-length point arrays into ``(n, M, d)``.

    Trajectories are padded with their last point, point sets with their
    first point.
    """
    M = max(a.shape[0] for a in arrays) if length is None else length
    d = arrays[0].shape[1]
    out = np.empty((len(arrays), M, d))
    for i, a in enumerate(arrays):
        m = a.shape[0]
        out[i, :m] = a
        if m < M:
            out[i, m:] = a[-1] if kind == "trajectory" else a[0]
    return out


def _pairwise(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # A: (N, Ma, d); B: (Lb, d) or (N, Lb, d) -> (N, Ma, Lb)
    if B.ndim == 2:
        B = B[None]
    diff = A[:, :, None, :] - B[:, None, :, :]
    return np.sqrt(np.einsum("...k,...k->...", diff, diff))


def _frechet_table(D: np.ndarray) -> np.ndarray:
    # coupling DP over the last two axes of D, vectorized over the rest
    ma, mb = D.shape[-2], D.shape[-1]
    row = np.maximum.accumulate(D[..., 0, :], axis=-1)
    for i in range(1, ma):
        new = np.empty_like(row)
        new[..., 0] = np.maximum(row[..., 0], D[..., i, 0])
        for j in range(1, mb):
            best = np.minimum(np.minimum(row[..., j], row[..., j - 1]), new[..., j - 1])
            new[..., j] = np.maximum(best, D[..., i, j])
        row = new
    return row[..., -1]


def frechet_batch(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Discrete Fréchet distance between each ``A[i]`` and ``B`` (or ``B[i]``)."""
    return _frechet_table(_pairwise(A, B))


def hausdorff_batch(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Hausdorff distance between each ``A[i]`` and ``B`` (or ``B[i]``)."""
    D = _pairwise(A, B)
    return np.maximum(D.min(axis=2).max(axis=1), D.min(axis=1).max(axis=1))


def batch_distance(kind: str, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if kind == "trajectory":
        return frechet_batch(A, B)
    return hausdorff_batch(A, B)


def _plane(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    # distances between point rows X (na, d) and Y (nb, d) -> (na, nb)
    acc = np.zeros((X.shape[0], Y.shape[0]))
    for k in range(X.shape[1]):
        acc += (X[:, k, None] - Y[None, :, k]) ** 2
    return np.sqrt(acc)


def cross_distance(kind: str, A: np.ndarray, B: np.ndarray, chunk: int = 1 << 22) -> np.ndarray:
    """All distances between padded batches ``A (Na, Ma, d)`` and ``B (Nb, Mb, d)``.

    Returns an ``(Na, Nb)`` array.  Point counts are small, so the work
    loops over vertex pairs and operates on whole ``(Na, Nb)`` planes.
    ``B`` is split so that the planes held at once stay below ``chunk``
    entries.
    """
    na, ma, _ = A.shape
    nb, mb, _ = B.shape
    step = max(1, chunk // max(1, na * ma * mb))
    out = np.empty((na, nb))
    for s in range(0, nb, step):
        Bs = B[s : s + step]
        D = [[_plane(A[:, i], Bs[:, j]) for j in range(mb)] for i in range(ma)]
        if kind == "trajectory":
            row = list(itertools.accumulate(D[0], np.maximum))
            for i in range(1, ma):
                new = [np.maximum(row[0], D[i][0])]
                for j in range(1, mb):
                    new.append(np.maximum(np.minimum(np.minimum(row[j], row[j - 1]), new[j - 1]), D[i][j]))
                row = new
            out[:, s : s + step] = row[-1]
        else:
            a_side = functools.reduce(np.maximum, (functools.reduce(np.minimum, D[i]) for i in range(ma)))
            b_side = functools.reduce(
                np.maximum, (functools.reduce(np.minimum, (D[i][j] for i in range(ma))) for j in range(mb))
            )
            out[:, s : s + step] = np.maximum(a_side, b_side)
    return out
