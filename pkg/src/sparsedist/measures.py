"""Dense functions and probability distributions over a lattice domain."""

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeDomain, as_support

NEG_CLAMP = 1e-12
SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DenseFunction:
    """A real function on a lattice, stored as one value per flat index."""

    domain: LatticeDomain
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.domain.size,):
            raise ValueError(
                f"expected {self.domain.size} values for {self.domain}, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, point):
        return float(self.values[self.domain.rank(point)])

    @classmethod
    def zeros(cls, domain):
        return cls(domain, np.zeros(domain.size))

    @classmethod
    def from_entries(cls, domain, entries):
        """Build from ``(point, value)`` pairs; unlisted points are zero."""
        v = np.zeros(domain.size)
        for point, value in entries:
            v[domain.rank(point)] += value
        return cls(domain, v)


class Distribution(DenseFunction):
    """A nonnegative DenseFunction summing to one.

    Values in [-1e-12, 0) are clamped to zero on construction; anything more
    negative, or a total mass off by more than 1e-9, is rejected.
    """

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1 and np.all(np.isfinite(v)):
            if np.any(v < -NEG_CLAMP):
                raise ValueError(f"distribution has a negative value {v.min():.3g}")
            v[v < 0] = 0.0
            total = v.sum()
            if abs(total - 1.0) > SUM_TOL:
                raise ValueError(f"distribution sums to {total!r}, not 1")
        object.__setattr__(self, "values", v)
        super().__post_init__()

    @classmethod
    def point_mass(cls, domain, point):
        v = np.zeros(domain.size)
        v[domain.rank(point)] = 1.0
        return cls(domain, v)

    @classmethod
    def uniform(cls, domain, support=None):
        """Uniform over X_S, or over all of X when ``support`` is None."""
        v = np.zeros(domain.size)
        if support is None:
            v[:] = 1.0 / domain.size
        else:
            idx = domain.restricted_indices(support)
            v[idx] = 1.0 / len(idx)
        return cls(domain, v)


@dataclass(frozen=True, eq=False)
class SparseDistribution:
    """A distribution together with a support S it is confined to."""

    dist: Distribution
    support: tuple
    k: int = None

    def __post_init__(self):
        support = as_support(self.support, self.dist.domain.n)
        object.__setattr__(self, "support", support)
        k = len(support) if self.k is None else self.k
        object.__setattr__(self, "k", k)
        if len(support) > k:
            raise ValueError(f"support {support} is larger than k={k}")
        outside = np.ones(self.dist.domain.size, dtype=bool)
        outside[self.dist.domain.restricted_indices(support)] = False
        if np.any(self.dist.values[outside] != 0.0):
            raise ValueError(f"distribution has mass outside X_S for S={support}")

    @property
    def values(self):
        return self.dist.values

    @property
    def domain(self):
        return self.dist.domain


def _check_same_domain(f, g):
    if f.domain != g.domain:
        raise ValueError(f"domain mismatch: {f.domain} vs {g.domain}")


def inner_product(f, g):
    _check_same_domain(f, g)
    return float(np.dot(f.values, g.values))


def l2_distance_sq(f, g):
    _check_same_domain(f, g)
    d = f.values - g.values
    return float(np.dot(d, d))


def restricted_mass(f, support):
    return float(f.values[f.domain.restricted_indices(support)].sum())


def support_union(f):
    """Union of point supports over all points where ``f`` is nonzero."""
    idx = np.flatnonzero(f.values)
    if idx.size == 0:
        return ()
    coords = f.domain.unrank_many(idx)
    return tuple(int(i) for i in np.flatnonzero(np.any(coords != 0, axis=0)))


def is_k_sparse(d, k):
    return len(support_union(d)) <= k
