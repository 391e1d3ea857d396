"""Hard instances for sparse distribution projection.

Includes the subset-sum reduction (an exact k-sparse projection decides
whether a zero-sum subset of size k exists), the adversarial family on which
greedy projection has unbounded approximation ratio, and the recovery margin
that certifies when greedy projection recovers the support exactly.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .lattice import LatticeDomain, point_support
from .measures import DenseFunction, l2_distance_sq, support_union
from .projection import exact_sparse_project, restricted_distance_sq_closed_form

MAX_GROUND_SET = 20
MAX_MARGIN_SUPPORT = 12


@dataclass(frozen=True)
class SspInstance:
    ground_set: tuple
    k: int

    def __post_init__(self):
        g = tuple(int(e) for e in self.ground_set)
        object.__setattr__(self, "ground_set", g)
        if not 1 <= len(g) <= MAX_GROUND_SET:
            raise ValueError(f"ground set size must be in [1, {MAX_GROUND_SET}], got {len(g)}")
        if not 1 <= self.k <= len(g):
            raise ValueError(f"k must be in [1, {len(g)}], got {self.k}")


@dataclass(frozen=True)
class RecoveryMargin:
    theta: float
    mu_max: float
    satisfied: bool


def ssp_instance_function(inst):
    """Indicator over {0,1}^n of the size-k subsets summing to zero."""
    g = np.array(inst.ground_set, dtype=np.int64)
    domain = LatticeDomain(len(g), 2)
    coords = domain.unrank_many(np.arange(domain.size))
    hit = (coords @ g == 0) & (coords.sum(axis=1) == inst.k)
    return DenseFunction(domain, hit.astype(float))


def subset_sum_decide(ground_set, tol=1e-9):
    """Find a non-empty zero-sum subset through exact sparse projections.

    For k = 1..n the reduction function is projected onto D_k; a point mass
    on a point with k nonzero coordinates identifies a subset. Returns the
    subset's elements, or None if no k yields one.
    """
    g = tuple(int(e) for e in ground_set)
    for k in range(1, len(g) + 1):
        q = ssp_instance_function(SspInstance(g, k))
        p = exact_sparse_project(q, k).result.values
        top = int(np.argmax(p))
        if abs(p[top] - 1.0) <= tol:
            chosen = point_support(q.domain.unrank(top))
            if len(chosen) == k:
                return [g[i] for i in chosen]
    return None


def brute_force_subset_sum(ground_set):
    """Smallest-first enumeration; an independent check of the reduction."""
    g = list(ground_set)
    for size in range(1, len(g) + 1):
        for combo in combinations(range(len(g)), size):
            if sum(g[i] for i in combo) == 0:
                return [g[i] for i in combo]
    return None


def adversarial_instance(n, m, k, delta, x_star):
    """1 + delta at ``x_star`` and zero elsewhere.

    The exact projection is the point mass at ``x_star`` (distance delta^2),
    while any method that never probes ``x_star`` sees the zero function.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    domain = LatticeDomain(n, m)
    x_star = tuple(int(c) for c in x_star)
    domain.check_point(x_star)
    if len(point_support(x_star)) != k:
        raise ValueError(f"x_star {x_star} must have exactly {k} nonzero coordinates")
    v = np.zeros(domain.size)
    v[domain.rank(x_star)] = 1.0 + delta
    return DenseFunction(domain, v)


def adversarial_ratio_bound(m, k, delta):
    """(1/|X_S| + (1+delta)^2) / delta^2 - 1 with |X_S| = m**k."""
    return (1.0 / m ** k + (1.0 + delta) ** 2) / delta ** 2 - 1.0


def approximation_ratio(q, candidate, oracle):
    """||q - candidate||^2 / ||q - oracle||^2 - 1."""
    d_oracle = l2_distance_sq(q, _dist(oracle))
    if d_oracle == 0.0:
        raise ValueError("ratio undefined: the oracle fits q exactly")
    return l2_distance_sq(q, _dist(candidate)) / d_oracle - 1.0


def _dist(x):
    return getattr(x, "dist", x)


def greedy_recovery_margin(p, L, mu):
    """Check the sufficient condition for greedy projection to recover supp(p).

    theta is the smallest gap ||p_(S+i) - p|| - ||p_(S+j) - p|| over proper
    subsets S of S' = supp(p), wrong dims i outside S' and right dims j in
    S' \\ S, where p_T is the projection of p onto P_T. The condition holds
    when theta > 0 and 2 mu L < theta.
    """
    n = p.domain.n
    true_support = support_union(p)
    if len(true_support) > MAX_MARGIN_SUPPORT:
        raise ValueError(f"|S'| = {len(true_support)} exceeds {MAX_MARGIN_SUPPORT}")
    wrong = [i for i in range(n) if i not in true_support]
    theta = np.inf
    if wrong:
        dist = {}

        def norm_to(support):
            key = tuple(sorted(support))
            if key not in dist:
                dist[key] = np.sqrt(max(restricted_distance_sq_closed_form(p, key), 0.0))
            return dist[key]

        for size in range(len(true_support)):
            for s in combinations(true_support, size):
                right = [j for j in true_support if j not in s]
                worst_wrong = min(norm_to(s + (i,)) for i in wrong)
                worst_right = max(norm_to(s + (j,)) for j in right)
                theta = min(theta, worst_wrong - worst_right)
    theta = float(theta)
    mu_max = np.inf if L == 0 else theta / (2.0 * L)
    return RecoveryMargin(theta, float(mu_max), bool(theta > 0 and 2.0 * mu * L < theta))
