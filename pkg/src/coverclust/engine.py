"""Recursive (k, C)-median search with pruning and sampling phases.

Each call of the search either prunes the half of the remaining elements
that are closest to the centers chosen so far, or samples from the
remaining elements, builds a candidate set and recurses once per
candidate with one center fewer to place.  Every terminal center set is
scored against the full input and the cheapest one wins.

The search keeps, for every node, the vector of distances from all input
elements to their nearest chosen center, so scoring a terminal set is a
sum and extending a set costs one distance row.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import multiprocessing
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import metrics
from .center_space import CenterSpace, FiniteCenters
from .errors import DimensionMismatchError, ParameterError
from .sampling import (
    CoverBudget,
    CoverTrace,
    OperationCounter,
    SamplingParams,
    derive_rng,
    gamma_from_sample,
)

REPETITION_CAP = 256


def default_repetitions(delta: float, k: int, cap: int = REPETITION_CAP) -> int:
    """``ceil(ln(1/0.05) * (5 / (1 - delta)) ** k)``, capped."""
    log_reps = math.log(math.log(20.0)) + k * math.log(5.0 / (1.0 - delta))
    if log_reps > math.log(cap):
        return cap
    return min(cap, math.ceil(math.log(20.0) * (5.0 / (1.0 - delta)) ** k))


@dataclass(frozen=True)
class ClusterParams:
    """Configuration of one clustering run.

    Parameters
    ----------
    k : int
        Number of centers.
    sampling : SamplingParams
        ``epsilon`` and ``delta`` of the candidate generator.
    alpha : float, optional
        Superset-sampling fraction, default ``epsilon / (8 k^2)``.
    mode : {"weak", "strong"}
        ``weak`` generates candidates from covers; ``strong`` takes the
        exact 1-median of each sample over a finite center list.
    subset_budget : int or "exhaustive"
        Random size-``m`` subsets drawn per sampling phase, or all of them.
    repetitions : int, optional
        Independent restarts; default from :func:`default_repetitions`.
    cover_ratio_cap, cover_limit, gamma_keep, cover_mode
        Desk-scale limits, see :class:`~coverclust.sampling.CoverBudget`.
    strong_m : int, optional
        Subset size in strong mode (default ``sampling.m``).
    workers : int
        Worker processes; results do not depend on this value.
    """

    k: int
    sampling: SamplingParams
    alpha: float | None = None
    mode: str = "weak"
    subset_budget: int | str = 32
    repetitions: int | None = None
    seed: int = 0
    cover_ratio_cap: float | None = 64.0
    cover_limit: int | None = 2048
    gamma_keep: int | None = 3
    cover_mode: str = "compact"
    strong_m: int | None = None
    workers: int = 1

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ParameterError("k >= 1", f"k must be a positive integer, got {self.k}")
        if not (0 < self.resolved_alpha < 1 / (4 * self.k)):
            raise ParameterError("0 < alpha < 1/(4k)", f"alpha must lie in (0, 1/(4k)), got {self.resolved_alpha}")
        if self.mode not in ("weak", "strong"):
            raise ParameterError("mode in {weak, strong}", f"unknown mode {self.mode!r}")
        if self.subset_budget != "exhaustive" and (
            not isinstance(self.subset_budget, (int, np.integer)) or self.subset_budget < 1
        ):
            raise ParameterError("subset_budget >= 1 or 'exhaustive'", f"bad subset budget {self.subset_budget!r}")
        if self.repetitions is not None and self.repetitions < 1:
            raise ParameterError("repetitions >= 1", f"repetitions must be >= 1, got {self.repetitions}")
        if self.strong_m is not None and self.strong_m < 1:
            raise ParameterError("strong_m >= 1", f"strong-mode sample size must be >= 1, got {self.strong_m}")
        if self.workers < 1:
            raise ParameterError("workers >= 1", f"workers must be >= 1, got {self.workers}")
        if not (0 <= int(self.seed) < 2**64):
            raise ParameterError("0 <= seed < 2**64", f"seed out of range: {self.seed}")
        self.budget  # validates the cover settings

    @property
    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return self.sampling.epsilon / (8 * self.k**2)

    @property
    def resolved_repetitions(self) -> int:
        if self.repetitions is not None:
            return self.repetitions
        return default_repetitions(self.sampling.delta, self.k)

    @property
    def m(self) -> int:
        if self.mode == "strong" and self.strong_m is not None:
            return self.strong_m
        return self.sampling.m

    @property
    def sample_size(self) -> int:
        return math.ceil(2 / self.resolved_alpha * self.m - 1e-9)

    @property
    def budget(self) -> CoverBudget:
        return CoverBudget(self.cover_ratio_cap, self.cover_limit, self.gamma_keep, self.cover_mode)


@dataclass
class SearchTrace:
    """Per-run recursion summary."""

    max_depth: int = 0
    prune_nodes: int = 0
    sample_nodes: int = 0
    terminal_nodes: int = 0
    subsets: int = 0
    candidates: int = 0
    cover: CoverTrace = field(default_factory=CoverTrace)

    def merge(self, other: "SearchTrace") -> None:
        self.max_depth = max(self.max_depth, other.max_depth)
        for name in ("prune_nodes", "sample_nodes", "terminal_nodes", "subsets", "candidates"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.cover.merge(other.cover)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class ClusteringResult:
    """Centers, assignment and cost of a run.

    ``assignment`` lists ``(id, center_index, distance)`` per input element
    in input order.
    """

    centers: list
    assignment: list[tuple[str, int, float]]
    total_cost: float
    counters: OperationCounter
    trace: SearchTrace
    params: ClusterParams


def evaluate_cost(P: Sequence, centers: Sequence) -> float:
    """Sum over ``P`` of the distance to the nearest center (scalar route)."""
    if len(centers) == 0:
        raise ValueError("evaluate_cost needs at least one center")
    return float(math.fsum(min(metrics.distance(p, c) for c in centers) for p in P))


# ---------------------------------------------------------------------------
# search


def branch_id(key: bytes) -> int:
    """Stable positive id of a candidate, used in its subtree's RNG path.

    Keying subtrees by candidate geometry (not list position) means a
    candidate explores the same subtree whatever else is in the list.
    """
    return 1 + int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big") % (2**63 - 1)


def prune(sub: np.ndarray, row: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``sub`` into the ``floor(|sub|/2)`` elements closest to the centers and the rest.

    Ties are broken by element index.  Both parts are returned sorted by index.
    """
    order = np.lexsort((sub, row[sub]))
    half = len(sub) // 2
    return np.sort(sub[order[:half]]), np.sort(sub[order[half:]])


class _Search:
    """State shared by one subtree of the recursion (caches and counters)."""

    def __init__(self, P: Sequence, space: CenterSpace, params: ClusterParams):
        self.P = P
        self.n = len(P)
        self.space = space
        self.params = params
        self.budget = params.budget
        self.Pstack = space.stack(P)
        self.counter = OperationCounter()
        self.trace = SearchTrace()
        self._proj: dict[int, object] = {}
        self._proj_rows: dict[int, np.ndarray] = {}
        self._finite: np.ndarray | None = None

    # -- primitives ---------------------------------------------------------

    def project(self, i: int):
        c = self._proj.get(i)
        if c is None:
            c = self.space.project(self.P[i])
            self.counter.projection_evals += 1
            self._proj[i] = c
        return c

    def rows(self, cands: Sequence) -> np.ndarray:
        """``(len(cands), n)`` distances from every input element."""
        if not cands:
            return np.empty((0, self.n))
        C = self.space.stack(cands)
        self.counter.distance_evals += len(cands) * self.n
        return metrics.cross_distance(self.space.element_kind, self.Pstack, C).T

    def projection_row(self, i: int) -> np.ndarray:
        row = self._proj_rows.get(i)
        if row is None:
            row = self.rows([self.project(i)])[0]
            self._proj_rows[i] = row
        return row

    def finite_matrix(self) -> np.ndarray:
        if self._finite is None:
            space = self.space
            assert isinstance(space, FiniteCenters)
            self._finite = self.rows(space.centers).T  # (n, |C|)
        return self._finite

    # -- sampling phase -----------------------------------------------------

    def _subsets(self, S: np.ndarray, rng: np.random.Generator) -> list[tuple[int, ...]]:
        m = self.params.m
        budget = self.params.subset_budget
        if budget != "exhaustive":
            if len(S) <= m:
                return [tuple(int(i) for i in S)]
            return [tuple(int(i) for i in S[rng.choice(len(S), size=m, replace=False)]) for _ in range(budget)]
        counts = Counter(int(i) for i in S)
        distinct = sorted(counts)
        if self.params.mode == "strong":
            # every non-empty set of distinct sampled elements up to size m
            return [
                combo
                for size in range(1, min(m, len(distinct)) + 1)
                for combo in itertools.combinations(distinct, size)
            ]
        # weak: every sub-multiset of size m, split into (Q, q) for each possible q
        out = []
        for q in distinct:
            rest = dict(counts)
            rest[q] -= 1
            for Q in itertools.combinations_with_replacement(distinct, m - 1):
                if all(Q.count(v) <= rest[v] for v in set(Q)):
                    out.append(Q + (q,))
        return out

    def candidates(self, sub: np.ndarray, rng: np.random.Generator) -> list:
        S = rng.choice(sub, size=self.params.sample_size, replace=True)
        subsets = self._subsets(S, rng)
        self.trace.subsets += len(subsets)
        out, seen = [], set()
        for sp in subsets:
            if self.params.mode == "strong":
                M = self.finite_matrix()
                weights = np.bincount(np.asarray(sp), minlength=self.n).astype(float)
                j = int(np.argmin(weights @ M))
                found = [self.space.centers[j]]
            else:
                q = sp[-1]
                found = gamma_from_sample(
                    [self.P[i] for i in sp[:-1]],
                    self.P[q],
                    self.params.sampling,
                    self.space,
                    self.budget,
                    self.counter,
                    self.trace.cover,
                    project=lambda _x, q=q: self.project(q),
                )
            for c in found:
                key = self.space.key(c)
                if key not in seen:
                    seen.add(key)
                    out.append(c)
        self.trace.candidates += len(out)
        return out

    # -- recursion ----------------------------------------------------------

    def cluster(self, sub: np.ndarray, kbar: int, centers: list, row: np.ndarray, path: tuple, depth: int):
        """Best ``(cost, centers)`` below this node; ``row`` is the min-distance vector."""
        self.trace.max_depth = max(self.trace.max_depth, depth)
        if kbar == 0:
            self.trace.terminal_nodes += 1
            return float(row.sum()), centers
        if kbar >= len(sub):
            self.trace.terminal_nodes += 1
            new_row = row
            for i in sub:
                new_row = np.minimum(new_row, self.projection_row(int(i)))
            return float(new_row.sum()), centers + [self.project(int(i)) for i in sub]

        best = None
        if centers:
            self.trace.prune_nodes += 1
            _, keep = prune(sub, row)
            best = self.cluster(keep, kbar, centers, row, path + (0,), depth + 1)

        self.trace.sample_nodes += 1
        cands = self.candidates(sub, derive_rng(self.params.seed, path))
        cand_rows = self.rows(cands)
        for j, c in enumerate(cands):
            child = path + (branch_id(self.space.key(c)),)
            res = self.cluster(sub, kbar - 1, centers + [c], np.minimum(row, cand_rows[j]), child, depth + 1)
            if best is None or res[0] < best[0]:
                best = res
        return best


# top-level candidates run as independent tasks; each builds its own _Search
_WORKER_STATE: tuple | None = None


def _init_worker(P, space, params):
    global _WORKER_STATE
    _WORKER_STATE = (P, space, params)


def _run_task(task):
    rep, j, cand = task
    P, space, params = _WORKER_STATE
    search = _Search(P, space, params)
    row = search.rows([cand])[0]
    sub = np.arange(search.n)
    path = (rep, branch_id(space.key(cand)))
    cost, centers = search.cluster(sub, params.k - 1, [cand], row, path, 1)
    return cost, centers, search.counter, search.trace


def _validate_input(P: Sequence, space: CenterSpace) -> None:
    if len(P) == 0:
        raise ValueError("cannot cluster an empty input")
    kinds = {p.kind for p in P}
    if kinds != {space.element_kind}:
        raise ValueError(f"input kinds {sorted(kinds)} do not match center space {space.element_kind!r}")
    dims = {p.dim for p in P}
    if len(dims) != 1:
        raise DimensionMismatchError(f"input mixes dimensions {sorted(dims)}")
    if isinstance(space, FiniteCenters) and {c.dim for c in space.centers} != dims:
        raise DimensionMismatchError("explicit centers and input differ in dimension")


def run(P: Sequence, space: CenterSpace, params: ClusterParams) -> ClusteringResult:
    """Cluster ``P`` with ``params.k`` centers from ``space``.

    Repeats the randomized search ``params.repetitions`` times with derived
    seeds, keeps the cheapest center set, pads it to ``k`` centers when
    pruning left fewer, and assigns every element to its nearest center.
    """
    _validate_input(P, space)
    if params.mode == "strong" and not isinstance(space, FiniteCenters):
        raise ParameterError("strong mode requires a finite center space", "strong mode needs explicit centers")
    t0 = time.perf_counter()
    n, k = len(P), params.k
    main = _Search(P, space, params)
    counter, trace = main.counter, main.trace
    best_cost, best_centers = math.inf, None

    if k >= n:
        trace.terminal_nodes += 1
        best_centers = [main.project(i) for i in range(n)]
    else:
        tasks = []
        sub = np.arange(n)
        for rep in range(params.resolved_repetitions):
            trace.sample_nodes += 1
            cands = main.candidates(sub, derive_rng(params.seed, (rep,)))
            tasks.extend((rep, j, c) for j, c in enumerate(cands))
        if params.workers > 1 and len(tasks) > 1:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(params.workers, mp_context=ctx, initializer=_init_worker, initargs=(P, space, params)) as ex:
                results = list(ex.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * params.workers))))
        else:
            _init_worker(P, space, params)
            results = [_run_task(t) for t in tasks]
        for cost, centers, c_counter, c_trace in results:
            counter.merge(c_counter)
            trace.merge(c_trace)
            if cost < best_cost:
                best_cost, best_centers = cost, centers

    centers = list(best_centers)
    D = main.rows(centers)
    # pruning can stop early with fewer than k centers; add the farthest elements
    while len(centers) < min(k, n):
        nearest = D.min(axis=0)
        far = int(np.argmax(nearest))
        centers.append(main.project(far))
        D = np.vstack([D, main.rows([centers[-1]])])
    idx = np.argmin(D, axis=0)
    dist = D[idx, np.arange(n)]
    total = float(math.fsum(dist.tolist()))
    check = evaluate_cost(P, centers)
    if not math.isclose(total, check, rel_tol=1e-6, abs_tol=1e-9):
        raise AssertionError(f"cost mismatch: vectorized {total} vs scalar {check}")
    counter.wall_time = time.perf_counter() - t0
    assignment = [(p.id, int(i), float(d)) for p, i, d in zip(P, idx, dist)]
    return ClusteringResult(centers, assignment, total, counter, trace, params)


def cluster(P: Sequence, k_remaining: int, C_bar: Sequence, space: CenterSpace, params: ClusterParams, path: tuple = (0,)) -> list:
    """One pass of the recursive search from an explicit starting state.

    Returns the cheapest terminal center set (``C_bar`` plus at most
    ``k_remaining`` new centers).  Randomness derives from ``params.seed``
    and ``path``.
    """
    if k_remaining < 0 or k_remaining > params.k:
        raise ParameterError("0 <= k_remaining <= k", f"k_remaining={k_remaining} outside [0, {params.k}]")
    _validate_input(P, space)
    search = _Search(P, space, params)
    row = np.full(search.n, np.inf)
    if C_bar:
        row = search.rows(list(C_bar)).min(axis=0)
    _, centers = search.cluster(np.arange(search.n), k_remaining, list(C_bar), row, tuple(path), 0)
    return centers
