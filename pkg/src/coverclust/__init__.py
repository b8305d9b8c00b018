"""Approximate k-median clustering of trajectories and point sets with
centers restricted to a coverable center space."""

from .center_space import (
    CenterSpace,
    CenterSpaceDescriptor,
    CoverRequest,
    FiniteCenters,
    PointSetCenters,
    TrajectoryCenters,
    cover_pointset_ball,
    cover_trajectory_ball,
    finite_space_1median,
    project_to_pointset_centers,
    project_to_trajectory_centers,
)
from .engine import ClusteringResult, ClusterParams, cluster, evaluate_cost, run
from .errors import CoverClustError, DimensionMismatchError, InputError, ParameterError
from .geometry import Ball, euclidean_ball_cover, euclidean_distance, min_enclosing_ball
from .metrics import PointSet, Trajectory, discrete_frechet, distance, hausdorff
from .sampling import (
    CoverBudget,
    OperationCounter,
    SamplingParams,
    candidate_set_from_anchor,
    gamma_candidates,
    uniform_multiset,
)

__version__ = "0.1.0"
