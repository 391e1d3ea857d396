"""Learning sparse discrete distributions with iterative hard thresholding."""

from .lattice import LatticeDomain, index_bijection, point_support, restricted_points
from .measures import (
    DenseFunction,
    Distribution,
    SparseDistribution,
    inner_product,
    is_k_sparse,
    l2_distance_sq,
    restricted_mass,
)
from .objectives import (
    Objective,
    VectorObjective,
    check_derivative,
    kl_objective,
    l2_objective,
    mmd_objective,
    quadratic_sensing_objective,
    restricted_min_kl,
)
from .projection import (
    InstanceTooLarge,
    ProjectionResult,
    TieBreakRule,
    exact_sparse_project,
    greedy_sparse_project,
    project_restricted_distribution,
    project_restricted_general,
    restricted_distance_sq_closed_form,
    simplex_project,
    vector_sparse_project,
)
from .solvers import (
    SolveResult,
    SolverConfig,
    dist_iht,
    greedy_select,
    lasso_baseline,
    random_baseline,
    vector_iht,
)

__version__ = "0.1.0"
