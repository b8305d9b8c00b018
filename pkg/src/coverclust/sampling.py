"""Randomized subroutines: superset sampling and weak-sampling candidates.

The candidate generator :func:`gamma_candidates` draws a small multiset
``Q`` plus one extra element ``q``, anchors at ``q' = project(q)`` and
returns ``q'`` together with a cover of a ball around ``q'`` whose radii
are derived from the average sample distance to ``q'``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .center_space import (
    CenterSpace,
    CoverRequest,
    cover_pointset_ball,
    cover_trajectory_ball,
)
from .errors import ParameterError

NORMALIZATION = "per-point-mean"


def _ceil(x: float) -> int:
    # guard against 4/0.4 style round-off pushing an integer just above itself
    return math.ceil(x - 1e-12)


@dataclass(frozen=True)
class SamplingParams:
    """Accuracy and confidence parameters of the weak-sampling generator.

    ``loose=True`` relaxes the ``epsilon < 4/9`` and ``delta > 1 - 5 eps/18``
    range checks; ``delta1 > 0`` is still required because the cover
    radius divides by it.
    """

    epsilon: float
    delta: float
    loose: bool = False

    def __post_init__(self):
        eps, delta = self.epsilon, self.delta
        if not (0 < eps < 1):
            raise ParameterError("0 < epsilon < 1", f"epsilon must lie in (0, 1), got {eps}")
        if not (0 < delta < 1):
            raise ParameterError("0 < delta < 1", f"delta must lie in (0, 1), got {delta}")
        if not self.loose:
            if not eps < 4 / 9:
                raise ParameterError("epsilon < 4/9", f"epsilon must be < 4/9, got {eps}")
            if not delta > 1 - 5 * eps / 18:
                raise ParameterError(
                    "delta > 1 - 5*epsilon/18",
                    f"delta must exceed 1 - 5*epsilon/18 = {1 - 5 * eps / 18:.6g}, got {delta}",
                )
        if not self.delta1 > 0:
            raise ParameterError(
                "delta1 = epsilon/2 - (9/5)(1-delta) > 0",
                f"delta1 = {self.delta1:.6g} must be positive",
            )

    @property
    def epsilon1(self) -> float:
        return self.epsilon / 4

    @property
    def delta1(self) -> float:
        return self.epsilon / 2 - 9 / 5 * (1 - self.delta)

    @property
    def q_size(self) -> int:
        """``|Q| = ceil(1 / epsilon1)``."""
        return _ceil(1 / self.epsilon1)

    @property
    def m(self) -> int:
        """Sample size ``1 + ceil(4 / epsilon)`` consumed by one generator call."""
        return 1 + _ceil(4 / self.epsilon)

    def anchor_bounds(self, W: float, q_count: int) -> tuple[float, float]:
        """Lower and upper bounds ``(a, b)`` on the mean 1-median cost."""
        mean = W / q_count
        e1 = self.epsilon1
        return (e1**3 / 2) * mean, (1 / e1) * mean

    def cover_radii(self, a: float, b: float) -> tuple[float, float]:
        """Ball radius ``2b / delta1`` and cover radius ``eps a / 2``."""
        return 2 * b / self.delta1, self.epsilon * a / 2

    def cover_ratio(self) -> float:
        """``r / r'`` produced by :meth:`anchor_bounds` and :meth:`cover_radii`."""
        a, b = self.anchor_bounds(1.0, 1)
        r, rp = self.cover_radii(a, b)
        return r / rp


@dataclass
class OperationCounter:
    """Distances and projections evaluated, plus wall time in seconds."""

    distance_evals: int = 0
    projection_evals: int = 0
    wall_time: float = 0.0

    def merge(self, other: "OperationCounter") -> None:
        self.distance_evals += other.distance_evals
        self.projection_evals += other.projection_evals
        self.wall_time += other.wall_time


@dataclass
class CoverTrace:
    """Cover radius ratios actually used, for the run report."""

    covers: int = 0
    ratio_nominal: float | None = None
    ratio_min: float | None = None
    ratio_max: float | None = None
    degenerate: int = 0

    def note(self, nominal: float, effective: float) -> None:
        self.covers += 1
        self.ratio_nominal = nominal
        self.ratio_min = effective if self.ratio_min is None else min(self.ratio_min, effective)
        self.ratio_max = effective if self.ratio_max is None else max(self.ratio_max, effective)

    def merge(self, other: "CoverTrace") -> None:
        self.covers += other.covers
        self.degenerate += other.degenerate
        if other.ratio_nominal is not None:
            self.ratio_nominal = other.ratio_nominal
        for name, fn in (("ratio_min", min), ("ratio_max", max)):
            mine, theirs = getattr(self, name), getattr(other, name)
            if theirs is not None:
                setattr(self, name, theirs if mine is None else fn(mine, theirs))


def derive_rng(seed: int, path: Sequence[int] = ()) -> np.random.Generator:
    """Independent generator for the branch identified by ``path``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(path)))


def uniform_multiset(population: Sequence, size: int, rng: np.random.Generator) -> list:
    """``size`` independent uniform draws (with replacement) from ``population``."""
    if len(population) == 0:
        raise ValueError("cannot sample from an empty population")
    if size < 1:
        raise ValueError(f"sample size must be positive, got {size}")
    idx = rng.integers(0, len(population), size=size)
    return [population[i] for i in idx]


@dataclass(frozen=True)
class CoverBudget:
    """Desk-scale limits on the cover built around an anchor.

    ``ratio_cap`` bounds ``r / r'`` (``None`` keeps the exact ratio);
    ``cover_limit`` shrinks the ratio further until the cover has at most
    that many elements; ``keep`` retains only the best candidates by cost on
    the sample; ``mode`` selects the compact cover (elements of C directly)
    or the full cover whose elements are projected.
    """

    ratio_cap: float | None = 64.0
    cover_limit: int | None = None
    keep: int | None = None
    mode: str = "compact"

    def __post_init__(self):
        if self.ratio_cap is not None and not self.ratio_cap > 1:
            raise ParameterError("cover_ratio_cap > 1", f"cover ratio cap must exceed 1, got {self.ratio_cap}")
        if self.cover_limit is not None and self.cover_limit < 1:
            raise ParameterError("cover_limit >= 1", f"cover limit must be positive, got {self.cover_limit}")
        if self.keep is not None and self.keep < 0:
            raise ParameterError("gamma_keep >= 0", f"gamma_keep must be nonnegative, got {self.keep}")
        if self.mode not in ("compact", "full"):
            raise ParameterError("cover mode in {compact, full}", f"unknown cover mode {self.mode!r}")


def _windowed_radii(r: float, rp: float, ratio: float) -> tuple[float, float]:
    # same geometric midpoint, ratio reduced to `ratio`
    mid = math.sqrt(r * rp)
    s = math.sqrt(ratio)
    return mid * s, mid / s


def candidate_set_from_anchor(
    anchor,
    a: float,
    b: float,
    params: SamplingParams,
    space: CenterSpace,
    budget: CoverBudget = CoverBudget(),
    sample: Sequence | None = None,
    counter: OperationCounter | None = None,
    trace: CoverTrace | None = None,
) -> list:
    """``{q'}`` plus a cover of ``ball(q', 2b/delta1) ∩ C`` at radius ``eps a / 2``.

    Parameters
    ----------
    anchor : element of C
        The projected anchor ``q'``.
    a, b : float
        Bounds ``0 < a <= b`` on the average distance to an optimal center.
    sample : sequence of elements, optional
        Used to rank cover elements when ``budget.keep`` is set.

    Returns
    -------
    list
        Distinct elements of C, the anchor first.
    """
    if not (0 < a <= b):
        raise ValueError(f"anchor bounds need 0 < a <= b, got a={a}, b={b}")
    r, rp = params.cover_radii(a, b)
    nominal = ratio = r / rp
    if budget.ratio_cap is not None and ratio > budget.ratio_cap:
        ratio = budget.ratio_cap
    if budget.cover_limit is not None:
        while ratio > 1 and space.cover_size(anchor, ratio) > budget.cover_limit:
            ratio = max(1.0, ratio * 0.8)
    if ratio < nominal:
        r, rp = _windowed_radii(r, rp, ratio)
    if trace is not None:
        trace.note(nominal, ratio)
    if rp >= r:
        return [anchor]

    if budget.mode == "full" and space.kind != "finite":
        req = CoverRequest(anchor, r, rp)
        stream = cover_trajectory_ball if space.element_kind == "trajectory" else cover_pointset_ball
        projected = []
        for el in stream(req, space.l):
            projected.append(space.project(el))
            if counter is not None:
                counter.projection_evals += 1
        stack = space.stack(projected, length=max(len(p) for p in projected)) if projected else None
    else:
        stack = space.cover_stack(anchor, r, rp)
    if stack is None or len(stack) == 0:
        return [anchor]

    if budget.keep is not None and sample:
        costs = space.sample_costs(stack, sample)
        if counter is not None:
            counter.distance_evals += len(stack) * len(sample)
        order = np.argsort(costs, kind="stable")[: budget.keep]
        stack = stack[order]

    out = [anchor]
    seen = {space.key(anchor)}
    for row in stack:
        el = space.unpad(row)
        k = space.key(el)
        if k not in seen:
            seen.add(k)
            out.append(el)
    return out


def gamma_from_sample(
    Q: Sequence,
    q,
    params: SamplingParams,
    space: CenterSpace,
    budget: CoverBudget = CoverBudget(),
    counter: OperationCounter | None = None,
    trace: CoverTrace | None = None,
    project=None,
) -> list:
    """Candidate set for an explicit sample ``Q`` and extra element ``q``.

    ``project`` may supply a cached projection of ``q``.
    """
    if len(Q) == 0:
        raise ValueError("gamma needs a non-empty sample Q")
    if project is None:
        qp = space.project(q)
        if counter is not None:
            counter.projection_evals += 1
    else:
        qp = project(q)
    W = float(sum(space.distance(p, qp) for p in Q))
    if counter is not None:
        counter.distance_evals += len(Q)
    if W == 0.0:
        if trace is not None:
            trace.degenerate += 1
        return [qp]
    a, b = params.anchor_bounds(W, len(Q))
    sample = list(Q) + [q]
    return candidate_set_from_anchor(qp, a, b, params, space, budget, sample, counter, trace)


def gamma_candidates(
    P_view: Sequence,
    params: SamplingParams,
    space: CenterSpace,
    rng: np.random.Generator,
    budget: CoverBudget = CoverBudget(),
    counter: OperationCounter | None = None,
    trace: CoverTrace | None = None,
) -> list:
    """Weak-sampling candidate set drawn from ``P_view``.

    Samples ``Q`` (``ceil(1/epsilon1)`` elements) and ``q`` uniformly with
    replacement, then defers to :func:`gamma_from_sample`.
    """
    if len(P_view) == 0:
        raise ValueError("gamma needs a non-empty input")
    drawn = uniform_multiset(P_view, params.m, rng)
    return gamma_from_sample(drawn[:-1], drawn[-1], params, space, budget, counter, trace)


def timed(counter: OperationCounter):
    """Context manager adding elapsed wall time to ``counter``."""

    class _T:
        def __enter__(self):
            self.t0 = time.perf_counter()

        def __exit__(self, *exc):
            counter.wall_time += time.perf_counter() - self.t0

    return _T()
