"""Euclidean projections onto the simplex and onto k-sparse distributions.

Projection onto the k-sparse set D_k (the union of P_S over |S| <= k) is
NP-hard in general, so two routes are offered: ``greedy_sparse_project``
grows the support one dimension at a time, and ``exact_sparse_project``
enumerates every support and serves as the correctness oracle.
"""

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .lattice import as_support
from .measures import DenseFunction, Distribution, SparseDistribution

MAX_ENUMERATION = 10 ** 7
TIE_RTOL = 1e-12


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class TieBreakRule:
    """How to choose among equally good candidates.

    ``rule`` is ``"lowest"`` (lowest index wins) or ``"random"`` (uniform among
    the tied candidates, drawn from a generator seeded with ``seed``).
    """

    rule: str = "lowest"
    seed: int = 0

    def __post_init__(self):
        if self.rule not in ("lowest", "random"):
            raise ValueError(f"unknown tie rule {self.rule!r}")

    def chooser(self):
        if self.rule == "lowest":
            return lambda tied: tied[0]
        rng = np.random.default_rng(self.seed)
        return lambda tied: tied[int(rng.integers(len(tied)))]


LOWEST_INDEX = TieBreakRule()


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    result: SparseDistribution
    distance_sq: float
    support_trace: list = field(default_factory=list)
    round_distances: list = field(default_factory=list)


def simplex_project(v):
    """Euclidean projection of ``v`` onto {w >= 0, sum(w) = 1}.

    Sort-and-threshold: find the largest rho with
    ``u_rho > (sum_{j<=rho} u_j - 1) / rho`` over the descending sort ``u``
    and shift by that threshold.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("simplex_project needs a non-empty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("simplex_project needs finite values")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u * ks > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    w = np.maximum(v - theta, 0.0)
    # push the remaining rounding error onto the largest entry
    w[np.argmax(w)] += 1.0 - w.sum()
    return w


def project_restricted_distribution(p, support):
    """Closed-form projection of a distribution onto P_S.

    The missing mass 1 - C is spread uniformly over X_S, where C is the mass
    ``p`` already places there.
    """
    idx = p.domain.restricted_indices(support)
    out = np.zeros(p.domain.size)
    c = p.values[idx].sum()
    out[idx] = p.values[idx] + (1.0 - c) / len(idx)
    return Distribution(p.domain, out)


def project_restricted_general(q, support):
    """Projection of an arbitrary function onto P_S via the simplex."""
    idx = q.domain.restricted_indices(support)
    out = np.zeros(q.domain.size)
    out[idx] = simplex_project(q.values[idx])
    return Distribution(q.domain, out)


def restricted_distance_sq_closed_form(p, support):
    """||p - proj_S(p)||^2 = (1-C)^2/|X_S| - sum_{X_S} p^2 + sum_X p^2."""
    idx = p.domain.restricted_indices(support)
    r = p.values[idx]
    c = r.sum()
    return float((1.0 - c) ** 2 / len(idx) - np.dot(r, r) + np.dot(p.values, p.values))


class _Scorer:
    """Distance from ``q`` to P_S, using the closed form for distributions."""

    def __init__(self, q):
        self.q = q
        self.values = q.values
        self.total_sq = float(np.dot(q.values, q.values))
        self.closed_form = isinstance(q, Distribution)

    def __call__(self, idx):
        r = self.values[idx]
        r_sq = float(np.dot(r, r))
        if self.closed_form:
            return (1.0 - r.sum()) ** 2 / len(idx) - r_sq + self.total_sq
        w = simplex_project(r)
        d = w - r
        return float(np.dot(d, d)) - r_sq + self.total_sq

    def project(self, support):
        if self.closed_form:
            return project_restricted_distribution(self.q, support)
        return project_restricted_general(self.q, support)


def _check_k(k, n):
    if int(k) != k or not 1 <= k <= n:
        raise ValueError(f"k must be an integer in [1, {n}], got {k}")
    return int(k)


def _tied(scores, rtol=TIE_RTOL):
    best = min(scores)
    cutoff = best + rtol * max(1.0, abs(best))
    return [i for i, s in enumerate(scores) if s <= cutoff]


def greedy_sparse_project(q, k, tie=LOWEST_INDEX):
    """Greedy sparse projection (GSProj).

    Runs ``k`` rounds; each round adds the dimension whose enlarged restricted
    projection is closest to ``q``. Distribution inputs are scored with the
    O(|X_S|) closed form, anything else through a simplex projection.
    """
    domain = q.domain
    k = _check_k(k, domain.n)
    score = _Scorer(q)
    choose = tie.chooser()
    support = ()
    trace, rounds = [], []
    for _ in range(k):
        candidates = [i for i in range(domain.n) if i not in support]
        scores = [score(domain.restricted_indices(support + (i,))) for i in candidates]
        pick = candidates[choose(_tied(scores))]
        support = tuple(sorted(support + (pick,)))
        trace.append(pick)
        rounds.append(min(scores))
    p = score.project(support)
    return ProjectionResult(SparseDistribution(p, support, k),
                            _distance(q, p), trace, rounds)


def exact_sparse_project(q, k, max_evaluations=MAX_ENUMERATION):
    """Exact projection onto D_k by enumerating every size-k support.

    Ties go to the lexicographically smallest support. Raises
    ``InstanceTooLarge`` when C(n, k) * m**k exceeds ``max_evaluations``.
    """
    domain = q.domain
    k = _check_k(k, domain.n)
    work = comb(domain.n, k) * domain.m ** k
    if work > max_evaluations:
        raise InstanceTooLarge(
            f"instance too large for exact enumeration: C({domain.n},{k})*{domain.m}^{k}"
            f" = {work} > {max_evaluations}")
    score = _Scorer(q)
    best, best_support = np.inf, None
    for support in combinations(range(domain.n), k):
        d = score(domain.restricted_indices(support))
        if d < best:
            best, best_support = d, support
    p = score.project(best_support)
    return ProjectionResult(SparseDistribution(p, best_support, k),
                            _distance(q, p), list(best_support), [best])


def _distance(q, p):
    d = q.values - p.values
    return float(np.dot(d, d))


def vector_sparse_project(v, k):
    """Projection onto k-sparse vectors of the simplex.

    Keeps the k largest entries (lowest index on ties) and projects those onto
    the simplex; this is exact for vector sparsity.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("vector_sparse_project needs a 1-d vector")
    k = _check_k(k, v.size)
    keep = np.sort(np.argsort(-v, kind="stable")[:k])
    w = np.zeros_like(v)
    w[keep] = simplex_project(v[keep])
    return w


def vector_support(w):
    return tuple(int(i) for i in np.flatnonzero(w))


def as_function(domain, values):
    """Wrap raw values, as a Distribution when they already are one."""
    try:
        return Distribution(domain, values)
    except ValueError:
        return DenseFunction(domain, values)


__all__ = [
    "InstanceTooLarge", "TieBreakRule", "LOWEST_INDEX", "ProjectionResult",
    "simplex_project", "project_restricted_distribution", "project_restricted_general",
    "restricted_distance_sq_closed_form", "greedy_sparse_project", "exact_sparse_project",
    "vector_sparse_project", "vector_support", "as_support", "as_function",
]
