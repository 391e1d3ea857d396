"""Convex objectives over distributions and over probability vectors.

An :class:`Objective` acts on functions over a lattice domain and returns its
variational derivative as a DenseFunction; a :class:`VectorObjective` acts on
plain vectors. Under the flat-index bijection the two coincide, and
``check_derivative`` compares either against central differences.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .measures import DenseFunction, Distribution, restricted_mass

KL_FLOOR = 1e-12


def _raw(p):
    # DenseFunction and SparseDistribution both expose .values
    values = getattr(p, "values", None)
    return np.asarray(p if values is None else values, dtype=float)


def _check_constants(alpha, beta, L):
    if alpha is not None and beta is not None and not 0 < alpha <= beta:
        raise ValueError(f"need 0 < alpha <= beta, got alpha={alpha}, beta={beta}")
    if L is not None and L < 0:
        raise ValueError(f"need L >= 0, got {L}")


@dataclass(frozen=True, eq=False)
class Objective:
    """F[p] on a lattice domain plus its variational derivative.

    ``kind`` and ``target`` identify objectives with a closed-form restricted
    minimizer (``"l2"`` and ``"kl"``), which greedy selection relies on.
    """

    domain: object
    fn: Callable
    grad: Callable
    alpha: Optional[float] = None
    beta: Optional[float] = None
    L: Optional[float] = None
    kind: str = "generic"
    target: Optional[Distribution] = None

    def __post_init__(self):
        _check_constants(self.alpha, self.beta, self.L)

    def value(self, p):
        return float(self.fn(_raw(p)))

    def derivative(self, p):
        return DenseFunction(self.domain, self.grad(_raw(p)))


@dataclass(frozen=True, eq=False)
class VectorObjective:
    fn: Callable
    grad: Callable
    size: int
    alpha: Optional[float] = None
    beta: Optional[float] = None
    L: Optional[float] = None
    kind: str = "generic"

    def __post_init__(self):
        _check_constants(self.alpha, self.beta, self.L)

    def value(self, w):
        return float(self.fn(np.asarray(w, dtype=float)))

    def gradient(self, w):
        w = np.asarray(w, dtype=float)
        if w.shape != (self.size,):
            raise ValueError(f"expected a vector of length {self.size}, got shape {w.shape}")
        return self.grad(w)


def l2_objective(target):
    t = target.values

    def fn(p):
        d = p - t
        return np.dot(d, d)

    return Objective(target.domain, fn, lambda p: 2.0 * (p - t),
                     alpha=2.0, beta=2.0, kind="l2", target=target)


def kl_objective(target):
    """KL(p || target) with 0 log 0 = 0.

    The derivative log(p/target) + 1 is evaluated with p floored at 1e-12 so
    that it stays finite where p has no mass.
    """
    t = target.values
    if np.any(t <= 0):
        raise ValueError("KL target must be strictly positive everywhere")
    log_t = np.log(t)

    def fn(p):
        pos = p > 0
        return np.sum(p[pos] * (np.log(p[pos]) - log_t[pos]))

    def grad(p):
        return np.log(np.maximum(p, KL_FLOOR)) - log_t + 1.0

    return Objective(target.domain, fn, grad, kind="kl", target=target)


def quadratic_sensing_objective(A, p0):
    """w -> ||A w - A p0||^2, the compressed-sensing training loss."""
    A = np.asarray(A, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    if A.ndim != 2 or A.shape[1] != p0.shape[0]:
        raise ValueError(f"A has shape {A.shape} but p0 has length {p0.shape[0]}")
    y = A @ p0

    def fn(w):
        r = A @ w - y
        return np.dot(r, r)

    def grad(w):
        return 2.0 * (A.T @ (A @ w - y))

    return VectorObjective(fn, grad, p0.shape[0], kind="sensing")


def mmd_objective(K, nu):
    """Squared MMD between weights ``w`` and reference weights ``nu``."""
    K = np.asarray(K, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"kernel matrix must be square, got shape {K.shape}")
    if nu.shape != (K.shape[0],):
        raise ValueError(f"nu has length {nu.shape[0]} but K is {K.shape[0]}x{K.shape[0]}")
    Knu = K @ nu
    nu_K_nu = float(nu @ Knu)

    def fn(w):
        return w @ K @ w - 2.0 * (w @ Knu) + nu_K_nu

    return VectorObjective(fn, lambda w: 2.0 * (K @ w - Knu), K.shape[0], kind="mmd")


def check_derivative(obj, p, h=1e-5, relative=False, coords=None):
    """Largest gap between the analytic derivative and central differences.

    The perturbed points are not projected back onto the simplex. With
    ``relative=True`` the gap is divided by ``1 + |F(p)|``.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    x = _raw(p).astype(float)
    if isinstance(obj, Objective):
        analytic = obj.grad(x)
    else:
        analytic = obj.gradient(x)
    coords = range(x.size) if coords is None else coords
    worst = 0.0
    for i in coords:
        e = np.zeros_like(x)
        e[i] = h
        fd = (obj.fn(x + e) - obj.fn(x - e)) / (2.0 * h)
        worst = max(worst, abs(analytic[i] - fd))
    if relative:
        worst /= 1.0 + abs(obj.fn(x))
    return float(worst)


def restricted_min_kl(target, support):
    """Minimizer of KL(p || target) over P_S: target renormalized on X_S."""
    c = restricted_mass(target, support)
    if c <= 0:
        raise ValueError(f"target has no mass on X_S for S={tuple(support)}")
    idx = target.domain.restricted_indices(support)
    out = np.zeros(target.domain.size)
    out[idx] = target.values[idx] / c
    return Distribution(target.domain, out), float(-np.log(c))
