"""Integer lattice domains {0..m-1}^n and their restricted sub-domains.

Points are mapped to flat indices with a little-endian mixed radix:
``index = sum_i x_i * m**i``. Every dense array in this package is laid out
in that order, so the convention is also the on-disk one.
"""

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_MAX_POINTS = 2 ** 24


def max_points():
    """Cap on m**n, overridable through ``SDIST_MAX_POINTS``."""
    raw = os.environ.get("SDIST_MAX_POINTS")
    if raw is None:
        return DEFAULT_MAX_POINTS
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"SDIST_MAX_POINTS must be an integer, got {raw!r}")
    if cap < 1:
        raise ValueError("SDIST_MAX_POINTS must be positive")
    return cap


@dataclass(frozen=True)
class LatticeDomain:
    """The lattice X = {x in Z^n : 0 <= x_i <= m-1}."""

    n: int
    m: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        cap = max_points()
        if self.m ** self.n > cap:
            raise ValueError(
                f"domain has {self.m}**{self.n} = {self.m ** self.n} points, "
                f"above the cap of {cap} (set SDIST_MAX_POINTS to raise it)")

    @property
    def size(self):
        return self.m ** self.n

    @cached_property
    def strides(self):
        return self.m ** np.arange(self.n, dtype=np.int64)

    def rank(self, point):
        x = self.check_point(point)
        return int(np.dot(x, self.strides))

    def unrank(self, index):
        index = int(index)
        if not 0 <= index < self.size:
            raise ValueError(f"index {index} outside [0, {self.size})")
        coords = []
        for _ in range(self.n):
            index, r = divmod(index, self.m)
            coords.append(r)
        return tuple(coords)

    def unrank_many(self, indices):
        """Coordinates of many flat indices at once, shape (len, n)."""
        indices = np.asarray(indices, dtype=np.int64)
        return (indices[:, None] // self.strides[None, :]) % self.m

    def check_point(self, point):
        x = np.asarray(point, dtype=np.int64)
        if x.shape != (self.n,):
            raise ValueError(f"point must have {self.n} coordinates, got {tuple(point)}")
        if np.any(x < 0) or np.any(x >= self.m):
            raise ValueError(f"point {tuple(point)} has a coordinate outside [0, {self.m - 1}]")
        return x

    def check_support(self, support):
        return as_support(support, self.n)

    def restricted_indices(self, support):
        """Flat indices of X_S in ascending order; there are m**|S| of them."""
        support = self.check_support(support)
        offsets = np.zeros(1, dtype=np.int64)
        for d in support:
            # higher dims vary slowest, which keeps the output sorted
            steps = np.arange(self.m, dtype=np.int64) * self.strides[d]
            offsets = (steps[:, None] + offsets[None, :]).ravel()
        return offsets


def as_support(indices, n):
    """Validate a support set and return it as a sorted tuple."""
    s = tuple(sorted(int(i) for i in indices))
    if len(set(s)) != len(s):
        raise ValueError(f"support {s} has duplicate indices")
    if s and (s[0] < 0 or s[-1] >= n):
        raise ValueError(f"support {s} has an index outside [0, {n - 1}]")
    return s


def index_bijection(domain, arg):
    """Map a point to its flat index, or a flat index back to its point."""
    if isinstance(arg, (int, np.integer)):
        return domain.unrank(arg)
    return domain.rank(arg)


def point_support(point):
    return tuple(i for i, c in enumerate(point) if c != 0)


def restricted_points(domain, support):
    """All points whose support lies inside ``support``, by ascending index."""
    return [tuple(int(c) for c in row)
            for row in domain.unrank_many(domain.restricted_indices(support))]
