"""Distribution IHT, greedy selection, vector IHT and the baseline solvers."""

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .measures import Distribution, SparseDistribution, support_union
from .objectives import Objective, VectorObjective, restricted_min_kl
from .projection import (
    LOWEST_INDEX,
    TieBreakRule,
    as_function,
    exact_sparse_project,
    greedy_sparse_project,
    project_restricted_distribution,
    restricted_distance_sq_closed_form,
    simplex_project,
    vector_sparse_project,
    vector_support,
)

TRACE_COLUMNS = ("iter", "objective", "step", "support", "proj_dist_sq")


@dataclass
class SolverConfig:
    """Run parameters shared by ``dist_iht`` and ``vector_iht``.

    ``init`` is ``"uniform"`` (uniform mass on a random size-k support),
    ``"greedy"`` (greedy selection result, distributions only), or an explicit
    starting Distribution / vector.
    """

    mu0: float = 0.008
    max_iters: int = 200
    projection: str = "greedy"
    tie: TieBreakRule = LOWEST_INDEX
    init: object = "uniform"
    seed: int = 0
    stall_tol: float = 1e-10
    stall_patience: int = 3
    max_doublings: int = 10

    def __post_init__(self):
        if not self.mu0 > 0:
            raise ValueError(f"mu0 must be positive, got {self.mu0}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.projection not in ("greedy", "exact"):
            raise ValueError(f"projection must be 'greedy' or 'exact', got {self.projection!r}")
        if not (self.stall_tol > 0 and self.stall_patience >= 1 and self.max_doublings >= 0):
            raise ValueError("stall_tol and stall_patience must be positive")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    objective: float
    step: float
    support: tuple
    proj_dist_sq: float


@dataclass
class SolveResult:
    best: object
    best_objective: float
    trace: list = field(default_factory=list)
    best_iteration: Optional[int] = None

    @property
    def objectives(self):
        return np.array([r.objective for r in self.trace])


class StepSchedule:
    """Step-size doubling for IHT.

    The run counts as trapped after ``patience`` consecutive iterations that
    fail to beat the best objective so far by more than ``tol``; the step then
    doubles (at most ``max_doublings`` times in a row). Any improvement larger
    than ``tol`` resets the step to ``mu0``.
    """

    def __init__(self, mu0, tol, patience, max_doublings, f0):
        self.mu0 = mu0
        self.mu = mu0
        self.tol = tol
        self.patience = patience
        self.max_doublings = max_doublings
        self.best = f0
        self.stalls = 0
        self.doublings = 0

    def update(self, f):
        if f < self.best - self.tol:
            self.best = f
            self.mu = self.mu0
            self.stalls = 0
            self.doublings = 0
            return self.mu
        self.best = min(self.best, f)
        self.stalls += 1
        if self.stalls >= self.patience and self.doublings < self.max_doublings:
            self.mu *= 2.0
            self.doublings += 1
            self.stalls = 0
        return self.mu


def _run_iht(value, step_fn, x0, cfg):
    """Shared projected-gradient loop with best-along-path reporting.

    ``step_fn(x, mu)`` returns ``(x_next, support, proj_dist_sq)``. The path
    starts at ``x0``, recorded as iteration 0 with step 0.
    """
    f0 = value(x0)
    sched = StepSchedule(cfg.mu0, cfg.stall_tol, cfg.stall_patience, cfg.max_doublings, f0)
    x = x0
    trace = [TraceRecord(0, f0, 0.0, support_of(x0), 0.0)]
    best, best_f, best_t = x0, f0, 0
    for t in range(1, cfg.max_iters + 1):
        mu = sched.mu
        x, support, dist = step_fn(x, mu)
        f = value(x)
        if not np.isfinite(f):
            raise FloatingPointError(f"objective became {f} at iteration {t}")
        trace.append(TraceRecord(t, f, mu, support, dist))
        if f < best_f:
            best, best_f, best_t = x, f, t
        sched.update(f)
    return SolveResult(best, best_f, trace, best_t)


def support_of(x):
    if isinstance(x, SparseDistribution):
        return x.support
    return vector_support(x)


def _random_support(rng, n, k):
    return tuple(sorted(int(i) for i in rng.choice(n, size=k, replace=False)))


def _check_sparsity(k, n):
    if int(k) != k or not 1 <= k <= n:
        raise ValueError(f"k must be an integer in [1, {n}], got {k}")
    return int(k)


def dist_iht(obj, k, cfg=None):
    """Distribution IHT: gradient step then sparse projection onto D_k."""
    cfg = cfg or SolverConfig()
    domain = obj.domain
    k = _check_sparsity(k, domain.n)
    rng = np.random.default_rng(cfg.seed)
    if isinstance(cfg.init, str):
        if cfg.init == "uniform":
            p0 = Distribution.uniform(domain, _random_support(rng, domain.n, k))
        elif cfg.init == "greedy":
            p0 = greedy_select(obj, k).best.dist
        else:
            raise ValueError(f"unknown init {cfg.init!r}")
    else:
        p0 = cfg.init.dist if isinstance(cfg.init, SparseDistribution) else cfg.init
        if not isinstance(p0, Distribution) or p0.domain != domain:
            raise ValueError("given init must be a Distribution on the objective's domain")
        if len(support_union(p0)) > k:
            raise ValueError(f"given init is not {k}-sparse")

    if cfg.projection == "exact":
        project = lambda q: exact_sparse_project(q, k)
    else:
        project = lambda q: greedy_sparse_project(q, k, cfg.tie)

    def step(p, mu):
        q = as_function(domain, p.values - mu * obj.grad(p.values))
        res = project(q)
        return res.result, res.result.support, res.distance_sq

    start = SparseDistribution(p0, support_union(p0), k)
    return _run_iht(obj.value, step, start, cfg)


def vector_iht(obj, k, cfg=None):
    """IHT over probability vectors with the exact top-k simplex projection."""
    cfg = cfg or SolverConfig()
    n = obj.size
    k = _check_sparsity(k, n)
    rng = np.random.default_rng(cfg.seed)
    if isinstance(cfg.init, str):
        if cfg.init != "uniform":
            raise ValueError(f"vector_iht supports init 'uniform' or an explicit vector, "
                             f"got {cfg.init!r}")
        w0 = np.zeros(n)
        w0[list(_random_support(rng, n, k))] = 1.0 / k
    else:
        w0 = np.asarray(cfg.init, dtype=float)
        if w0.shape != (n,):
            raise ValueError(f"init has shape {w0.shape}, expected ({n},)")

    def step(w, mu):
        q = w - mu * obj.gradient(w)
        w_new = vector_sparse_project(q, k)
        d = w_new - q
        return w_new, vector_support(w_new), float(np.dot(d, d))

    return _run_iht(obj.value, step, w0, cfg)


def _restricted_minimizer(obj):
    """(support -> (minimizer, value)) for objectives greedy selection accepts."""
    target = obj.target
    if obj.kind == "l2":
        return lambda s: (project_restricted_distribution(target, s),
                          restricted_distance_sq_closed_form(target, s))
    if obj.kind == "kl":
        def kl_min(s):
            idx = target.domain.restricted_indices(s)
            if target.values[idx].sum() <= 0:
                return None, np.inf
            return restricted_min_kl(target, s)
        return kl_min
    return lambda s: restricted_pgd(obj, s)


def restricted_pgd(obj, support, iters=500, tol=1e-10):
    """Minimize a generic objective over P_S by projected gradient descent.

    Uses backtracking on the step, starting from 1/beta when known.
    """
    domain = obj.domain
    idx = domain.restricted_indices(support)
    x = np.zeros(domain.size)
    x[idx] = 1.0 / len(idx)
    f = obj.fn(x)
    step = 1.0 / obj.beta if obj.beta else 1.0
    for _ in range(iters):
        g = obj.grad(x)[idx]
        while True:
            cand = np.zeros(domain.size)
            cand[idx] = simplex_project(x[idx] - step * g)
            f_new = obj.fn(cand)
            d = cand[idx] - x[idx]
            if f_new <= f + g @ d + (d @ d) / (2 * step) or step < 1e-12:
                break
            step /= 2
        done = f - f_new <= tol
        x, f = cand, f_new
        if done:
            break
    return Distribution(domain, x), float(f)


def greedy_select(obj, k):
    """Forward greedy selection on the objective itself.

    Each round adds the dimension whose restricted minimizer has the lowest
    objective; l2 and KL use closed forms, other objectives a projected
    gradient inner solver.
    """
    if not isinstance(obj, Objective):
        raise TypeError("greedy_select needs a distribution Objective")
    n = obj.domain.n
    k = _check_sparsity(k, n)
    minimize = _restricted_minimizer(obj)
    support = ()
    trace = []
    best = None
    for r in range(1, k + 1):
        candidates = [i for i in range(n) if i not in support]
        results = [minimize(tuple(sorted(support + (i,)))) for i in candidates]
        values = [v for _, v in results]
        j = int(np.argmin(values))
        support = tuple(sorted(support + (candidates[j],)))
        best = results[j][0]
        # report F at the returned point, not the closed form used for ranking,
        # so that a warm start from here begins at exactly the same value
        trace.append(TraceRecord(r, float(obj.value(best)), 0.0, support, 0.0))
    return SolveResult(SparseDistribution(best, support, k), trace[-1].objective, trace, k)


def lasso_baseline(A, p0, gamma, k, iters=500):
    """Lasso on the sensing loss, then projection onto k-sparse vectors.

    Proximal gradient (ISTA) on ``||A w - A p0||^2 + gamma ||w||_1`` from
    w = 0 with step 1/(2 sigma^2), sigma^2 taken from 50 power iterations.
    """
    A = np.asarray(A, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    if A.ndim != 2 or A.shape[1] != p0.shape[0]:
        raise ValueError(f"A has shape {A.shape} but p0 has length {p0.shape[0]}")
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    sigma_sq = spectral_norm_sq(A)
    step = 1.0 / (2.0 * sigma_sq)
    y = A @ p0
    w = np.zeros(A.shape[1])
    for _ in range(iters):
        z = w - step * 2.0 * (A.T @ (A @ w - y))
        w = np.sign(z) * np.maximum(np.abs(z) - gamma * step, 0.0)
    out = vector_sparse_project(w, k)
    r = A @ out - y
    f = float(r @ r)
    return SolveResult(out, f, [TraceRecord(iters, f, step, vector_support(out), 0.0)], iters)


def spectral_norm_sq(A, iters=50):
    """Largest eigenvalue of A^T A by power iteration from a constant start."""
    v = np.ones(A.shape[1]) / np.sqrt(A.shape[1])
    lam = 0.0
    for _ in range(iters):
        u = A.T @ (A @ v)
        lam = float(np.linalg.norm(u))
        if lam == 0:
            return 1.0
        v = u / lam
    return lam


def random_baseline(obj, k, T, seed=0):
    """Best of ``T`` random k-sparse candidates (random support, Dirichlet mass)."""
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    rng = np.random.default_rng(seed)
    vector = isinstance(obj, VectorObjective)
    n = obj.size if vector else obj.domain.n
    k = _check_sparsity(k, n)
    trace = []
    best, best_f, best_t = None, np.inf, None
    for t in range(1, T + 1):
        support = _random_support(rng, n, k)
        if vector:
            cand = np.zeros(n)
            cand[list(support)] = rng.dirichlet(np.ones(k))
        else:
            idx = obj.domain.restricted_indices(support)
            v = np.zeros(obj.domain.size)
            v[idx] = rng.dirichlet(np.ones(len(idx)))
            cand = SparseDistribution(Distribution(obj.domain, v), support, k)
        f = obj.value(cand)
        trace.append(TraceRecord(t, f, 0.0, support, 0.0))
        if f < best_f:
            best, best_f, best_t = cand, f, t
    return SolveResult(best, best_f, trace, best_t)


def convergence_constants(alpha, beta, L, phi=0.0):
    """Contraction factor eta and additive floor c of the IHT rate bound.

    Valid when beta/alpha lies in (2 - 1/(1+phi), 2) and the step is 1/beta.
    """
    ratio = beta / alpha
    if not 2.0 - 1.0 / (1.0 + phi) < ratio < 2.0:
        raise ValueError(f"beta/alpha = {ratio} outside ({2 - 1 / (1 + phi)}, 2)")
    shrink = (1.0 + phi) * (2.0 - ratio)
    eta = 1.0 - shrink
    c = (phi / (2 * beta) + (1 + phi) * (beta - alpha) / (2 * alpha ** 2)) * L ** 2 / shrink
    return eta, c


def format_support(support):
    return ";".join(str(i) for i in support)


def parse_support(text):
    return tuple(int(s) for s in text.split(";")) if text else ()


def trace_to_csv(trace):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace:
        w.writerow([r.iteration, repr(float(r.objective)), repr(float(r.step)),
                    format_support(r.support), repr(float(r.proj_dist_sq))])
    return buf.getvalue()


def trace_from_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != TRACE_COLUMNS:
        raise ValueError(f"trace header must be {','.join(TRACE_COLUMNS)}")
    return [TraceRecord(int(r[0]), float(r[1]), float(r[2]), parse_support(r[3]), float(r[4]))
            for r in rows[1:]]
