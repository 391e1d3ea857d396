import itertools

import numpy as np
import pytest

from sparsedist import Distribution, LatticeDomain


def simplex_by_bisection(v, iters=200):
    """Simplex projection found by bisecting on the threshold tau.

    Independent of the sort-based routine under test: it only uses the fact
    that the projection is max(v - tau, 0) for the tau making it sum to one.
    """
    v = np.asarray(v, dtype=float)
    lo, hi = v.min() - 1.0, v.max()
    for _ in range(iters):
        tau = 0.5 * (lo + hi)
        if np.maximum(v - tau, 0.0).sum() > 1.0:
            lo = tau
        else:
            hi = tau
    return np.maximum(v - 0.5 * (lo + hi), 0.0)


def points_with_support_in(domain, support):
    """Flat indices of X_S by filtering every point of the domain."""
    out = []
    for idx in range(domain.size):
        x = domain.unrank(idx)
        if all(x[i] == 0 for i in range(domain.n) if i not in support):
            out.append(idx)
    return out


def brute_force_sparse_projection(q, k):
    """Minimum over all size-k supports of the projection onto P_S.

    Uses filtered enumeration and the bisection simplex oracle, sharing no
    code with the projection module.
    """
    domain = q.domain
    best = (np.inf, None, None)
    for support in itertools.combinations(range(domain.n), k):
        idx = points_with_support_in(domain, support)
        p = np.zeros(domain.size)
        p[idx] = simplex_by_bisection(q.values[idx])
        d = float(np.sum((q.values - p) ** 2))
        if d < best[0] - 1e-13:
            best = (d, support, p)
    return best


def random_distribution(rng, domain, support=None, concentration=1.0):
    v = np.zeros(domain.size)
    if support is None:
        idx = np.arange(domain.size)
    else:
        idx = np.array(points_with_support_in(domain, support))
    v[idx] = rng.dirichlet(np.full(len(idx), concentration))
    return Distribution(domain, v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def toy():
    """n=2, m=2 distribution with p(0,0)=0.4, p(1,0)=0.2, p(0,1)=0.3, p(1,1)=0.1."""
    d = LatticeDomain(2, 2)
    return Distribution(d, [0.4, 0.2, 0.3, 0.1])
