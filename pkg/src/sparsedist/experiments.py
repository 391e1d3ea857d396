"""Experiment harnesses: simulations, distribution compression, prototypes.

Every run derives its randomness from ``numpy.random.default_rng([seed, run])``
(PCG64 seeded through SeedSequence), so tables are reproducible bit for bit.
"""

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .fileio import table_from_csv, table_to_csv
from .lattice import LatticeDomain
from .measures import Distribution
from .objectives import kl_objective, l2_objective, mmd_objective, quadratic_sensing_objective
from .projection import exact_sparse_project
from .solvers import (
    SolverConfig,
    dist_iht,
    format_support,
    greedy_select,
    lasso_baseline,
    random_baseline,
    spectral_norm_sq,
    vector_iht,
)

KL_BACKGROUND = 1e-6


@dataclass
class ResultsTable:
    columns: list
    rows: list = field(default_factory=list)

    def to_csv(self):
        return table_to_csv(self.columns, self.rows)

    @classmethod
    def from_csv(cls, text):
        columns, rows = table_from_csv(text)
        return cls(columns, rows)

    def select(self, **match):
        return [r for r in self.rows if all(r[c] == v for c, v in match.items())]


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def gen_random_sparse_target(domain, positions, seed=0, strictly_positive=False, support=None):
    """Random masses on ``positions`` distinct lattice points.

    With ``support`` the points are drawn from X_S only. ``strictly_positive``
    mixes in 1e-6 total mass spread uniformly over X and renormalizes, as the
    KL objective needs a target without zeros.
    """
    rng = _rng(seed)
    pool = np.arange(domain.size) if support is None else domain.restricted_indices(support)
    if not 1 <= positions <= len(pool):
        raise ValueError(f"positions must be in [1, {len(pool)}], got {positions}")
    chosen = rng.choice(pool, size=positions, replace=False)
    mass = rng.random(positions)
    v = np.zeros(domain.size)
    v[chosen] = mass / mass.sum()
    if strictly_positive:
        v = (v + KL_BACKGROUND / domain.size) / (1.0 + KL_BACKGROUND)
    return Distribution(domain, v / v.sum())


def enumerated_optimum(obj, k):
    """Global minimum of an l2 or KL objective over D_k by enumeration."""
    if obj.kind == "l2":
        return exact_sparse_project(obj.target, k).distance_sq
    if obj.kind == "kl":
        domain = obj.domain
        t = obj.target.values
        best = max(t[domain.restricted_indices(s)].sum()
                   for s in combinations(range(domain.n), k))
        return float(-np.log(best))
    raise ValueError(f"no enumeration for objective kind {obj.kind!r}")


@dataclass
class SimulationSpec:
    n: int = 15
    m: int = 2
    k: int = 7
    runs: int = 20
    objective: str = "l2"
    mu0: float = 0.008
    iters: int = 200
    positions: int = 50
    seed: int = 0
    sparse_target: bool = False
    timing: bool = False
    kind = "simulate"

    def __post_init__(self):
        if self.objective not in ("l2", "kl"):
            raise ValueError(f"objective must be 'l2' or 'kl', got {self.objective!r}")
        if min(self.n, self.m, self.k, self.runs, self.iters, self.positions) < 1:
            raise ValueError("simulation parameters must be positive")
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")


SIM_ALGORITHMS = ("iht", "greedy", "iht_after_greedy")


def run_simulation(spec):
    """IHT, greedy selection and IHT-after-greedy on random targets.

    Objectives are normalized by the enumerated optimum; per-run rows are
    followed by ``mean`` and ``std`` (population) rows for each algorithm.
    """
    domain = LatticeDomain(spec.n, spec.m)
    columns = ["run", "algorithm", "objective", "normalized"]
    if spec.timing:
        columns.append("wall_time")
    table = ResultsTable(columns)
    for run in range(spec.runs):
        rng = np.random.default_rng([spec.seed, run])
        support = None
        if spec.sparse_target:
            support = tuple(sorted(rng.choice(spec.n, size=spec.k, replace=False)))
        positions = spec.positions
        if support is not None:
            positions = min(positions, spec.m ** spec.k)
        target = gen_random_sparse_target(domain, positions, rng,
                                          strictly_positive=spec.objective == "kl",
                                          support=support)
        obj = l2_objective(target) if spec.objective == "l2" else kl_objective(target)
        iht_seed = int(rng.integers(2 ** 32))
        opt = enumerated_optimum(obj, spec.k)

        results = {}
        t0 = time.perf_counter()
        cfg = SolverConfig(mu0=spec.mu0, max_iters=spec.iters, init="uniform", seed=iht_seed)
        results["iht"] = (dist_iht(obj, spec.k, cfg), time.perf_counter() - t0)
        t0 = time.perf_counter()
        greedy = greedy_select(obj, spec.k)
        greedy_time = time.perf_counter() - t0
        results["greedy"] = (greedy, greedy_time)
        t0 = time.perf_counter()
        cfg = SolverConfig(mu0=spec.mu0, max_iters=spec.iters, init=greedy.best, seed=iht_seed)
        results["iht_after_greedy"] = (dist_iht(obj, spec.k, cfg),
                                       greedy_time + time.perf_counter() - t0)
        for name in SIM_ALGORITHMS:
            res, elapsed = results[name]
            row = {"run": run, "algorithm": name, "objective": res.best_objective,
                   "normalized": res.best_objective - opt}
            if spec.timing:
                row["wall_time"] = elapsed
            table.rows.append(row)

    for stat, fn in (("mean", np.mean), ("std", np.std)):
        for name in SIM_ALGORITHMS:
            rows = [r for r in table.rows if r["algorithm"] == name and isinstance(r["run"], int)]
            row = {"run": stat, "algorithm": name}
            for c in columns[2:]:
                row[c] = float(fn([r[c] for r in rows]))
            table.rows.append(row)
    return table


def parse_values(lines):
    """First-column floats of CSV lines; blank lines are skipped.

    Raises ValueError naming every line that is not a finite number.
    """
    values, bad = [], []
    for lineno, line in enumerate(lines, start=1):
        cell = line.strip().split(",")[0].strip()
        if not cell:
            continue
        try:
            x = float(cell)
        except ValueError:
            bad.append(lineno)
            continue
        if not np.isfinite(x):
            bad.append(lineno)
            continue
        values.append(x)
    if bad:
        shown = ", ".join(str(b) for b in bad[:20])
        raise ValueError(f"non-numeric values on line(s) {shown}"
                         + (" ..." if len(bad) > 20 else ""))
    return values


def ingest_histogram(values, bins, bin_width):
    """Normalized histogram with bins [i*w, (i+1)*w); out-of-range values clamp."""
    if bins < 1 or not bin_width > 0:
        raise ValueError("need bins >= 1 and bin_width > 0")
    values = list(values)
    if values and isinstance(values[0], str):
        values = parse_values(values)
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("no values to bin")
    idx = np.clip(np.floor(x / bin_width), 0, bins - 1).astype(np.int64)
    counts = np.bincount(idx, minlength=bins).astype(float)
    return counts / counts.sum()


def synthetic_histogram(bins, bin_width, seed=0, samples=20000):
    """Right-skewed stand-in for charge data: log-normal draws, binned.

    The spread is narrow enough that roughly 50 to 60 bins carry mass, so the
    histogram is close to, but not exactly, 50-sparse.
    """
    rng = np.random.default_rng(seed)
    center = np.log(bins * bin_width / 100.0)
    return ingest_histogram(rng.lognormal(center, 0.5, size=samples), bins, bin_width)


@dataclass
class CompressionSpec:
    bins: int = 1000
    bin_width: float = 1.0
    rows: int = 100
    k: int = 50
    gamma_lasso: Optional[float] = None
    trials: int = 10
    tests: int = 20
    iters: int = 2000
    lasso_iters: int = 500
    seed: int = 0
    timing: bool = False
    kind = "compress"

    def __post_init__(self):
        if min(self.bins, self.rows, self.k, self.trials, self.tests, self.iters) < 1:
            raise ValueError("compression parameters must be positive")
        if self.k > self.bins:
            raise ValueError(f"k={self.k} exceeds the number of bins {self.bins}")


COMPRESS_ALGORITHMS = ("iht", "lasso", "random")


def run_compression(spec, p0):
    """Train on ||A w - A p0||^2, test on ||B w - B p0||^2 for fresh B.

    One row per (trial, algorithm): training loss plus mean and population
    standard deviation of the test loss over ``spec.tests`` matrices. The
    lasso weight defaults to 5% of ||2 A^T A p0||_inf, the level at which
    the lasso solution collapses to zero.
    """
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (spec.bins,):
        raise ValueError(f"target has length {p0.shape[0]}, expected {spec.bins}")
    columns = ["trial", "algorithm", "train_error", "test_error", "test_std", "support_size"]
    if spec.timing:
        columns.append("wall_time")
    table = ResultsTable(columns)
    for trial in range(spec.trials):
        rng = np.random.default_rng([spec.seed, trial])
        A = rng.standard_normal((spec.rows, spec.bins))
        obj = quadratic_sensing_objective(A, p0)
        solver_seed = int(rng.integers(2 ** 32))
        gamma = spec.gamma_lasso
        if gamma is None:
            gamma = 0.05 * float(np.max(np.abs(2.0 * A.T @ (A @ p0))))

        solutions = {}
        t0 = time.perf_counter()
        cfg = SolverConfig(mu0=1.0 / (2.0 * spectral_norm_sq(A)), max_iters=spec.iters,
                           init="uniform", seed=solver_seed)
        solutions["iht"] = (vector_iht(obj, spec.k, cfg), time.perf_counter() - t0)
        t0 = time.perf_counter()
        solutions["lasso"] = (lasso_baseline(A, p0, gamma, spec.k, spec.lasso_iters),
                              time.perf_counter() - t0)
        t0 = time.perf_counter()
        solutions["random"] = (random_baseline(obj, spec.k, spec.iters, solver_seed),
                               time.perf_counter() - t0)

        tests = [rng.standard_normal((spec.rows, spec.bins)) for _ in range(spec.tests)]
        for name in COMPRESS_ALGORITHMS:
            res, elapsed = solutions[name]
            w = res.best
            errs = np.array([float(np.sum((B @ (w - p0)) ** 2)) for B in tests])
            row = {"trial": trial, "algorithm": name, "train_error": res.best_objective,
                   "test_error": float(errs.mean()), "test_std": float(errs.std()),
                   "support_size": int(np.count_nonzero(w))}
            if spec.timing:
                row["wall_time"] = elapsed
            table.rows.append(row)
    return table


def rbf_kernel(X, Y, gamma):
    d2 = np.sum(X ** 2, 1)[:, None] + np.sum(Y ** 2, 1)[None, :] - 2.0 * X @ Y.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


def median_heuristic_gamma(X):
    """1 / (2 * median squared distance between distinct points)."""
    d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
    off = d2[np.triu_indices(len(X), 1)]
    med = float(np.median(off)) if off.size else 0.0
    return 1.0 / (2.0 * med) if med > 0 else 1.0


def gaussian_blobs(n_per_blob=50, centers=((0.0, 0.0), (10.0, 10.0)), scale=1.0, seed=0):
    """Labeled points from well separated isotropic Gaussian blobs."""
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=float)
    X = np.concatenate([c + scale * rng.standard_normal((n_per_blob, centers.shape[1]))
                        for c in centers])
    y = np.repeat(np.arange(len(centers)), n_per_blob)
    return X, y


def nearest_neighbor_error(train_X, train_y, test_X, test_y):
    d2 = np.sum((test_X[:, None, :] - train_X[None, :, :]) ** 2, axis=-1)
    pred = train_y[np.argmin(d2, axis=1)]
    return float(np.mean(pred != test_y))


def top_k(w, k):
    return np.sort(np.argsort(-np.asarray(w), kind="stable")[:k])


@dataclass
class PrototypeSpec:
    k: int = 10
    gamma: Optional[float] = None
    iters: int = 2000
    test_fraction: float = 0.3
    seed: int = 0
    kind = "prototypes"

    def __post_init__(self):
        if self.k < 1 or self.iters < 1:
            raise ValueError("k and iters must be positive")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must lie in (0, 1)")


def split_train_test(n_points, test_fraction, seed):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_points)
    n_test = max(1, int(round(test_fraction * n_points)))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def run_prototypes(spec, X, y):
    """Select k prototypes by IHT on squared MMD and score them with 1-NN.

    Prototypes are the k heaviest coordinates of the IHT solution. Rows cover
    IHT, the random baseline, and 1-NN on the full training set.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("need a non-empty 2-d data matrix")
    if len(y) != len(X):
        raise ValueError(f"{len(X)} points but {len(y)} labels")
    train, test = split_train_test(len(X), spec.test_fraction, spec.seed)
    Xtr, ytr, Xte, yte = X[train], y[train], X[test], y[test]
    if spec.k > len(Xtr):
        raise ValueError(f"k={spec.k} exceeds the {len(Xtr)} training points")
    gamma = spec.gamma if spec.gamma is not None else median_heuristic_gamma(Xtr)
    K = rbf_kernel(Xtr, Xtr, gamma)
    nu = np.full(len(Xtr), 1.0 / len(Xtr))
    obj = mmd_objective(K, nu)
    # curvature of the MMD along a difference of two k-sparse vectors is at
    # most 4k max K_ii; the global 2*lambda_max is far too conservative
    mu0 = 1.0 / (4.0 * spec.k * float(np.max(np.diag(K))))
    cfg = SolverConfig(mu0=mu0, max_iters=spec.iters, init="uniform", seed=spec.seed)
    iht = vector_iht(obj, spec.k, cfg)
    rand = random_baseline(obj, spec.k, spec.iters, spec.seed)

    table = ResultsTable(["algorithm", "k", "mmd", "test_error", "prototypes"])
    for name, w in (("iht", iht.best), ("random", rand.best)):
        chosen = top_k(w, spec.k)
        table.rows.append({
            "algorithm": name, "k": spec.k, "mmd": obj.value(w),
            "test_error": nearest_neighbor_error(Xtr[chosen], ytr[chosen], Xte, yte),
            "prototypes": format_support(int(train[i]) for i in chosen)})
    table.rows.append({
        "algorithm": "full", "k": len(Xtr), "mmd": 0.0,
        "test_error": nearest_neighbor_error(Xtr, ytr, Xte, yte),
        "prototypes": format_support(int(i) for i in train)})
    return table
