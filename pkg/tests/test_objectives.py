import itertools

import numpy as np
import pytest

from sparsedist import (
    DenseFunction,
    Distribution,
    LatticeDomain,
    Objective,
    check_derivative,
    inner_product,
    kl_objective,
    l2_objective,
    mmd_objective,
    quadratic_sensing_objective,
    restricted_min_kl,
)

from conftest import points_with_support_in, random_distribution

D22 = LatticeDomain(2, 2)


def _central_differences(obj, p, h=1e-5):
    """Central differences computed here, without check_derivative."""
    x = np.array(p.values, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (obj.fn(x + e) - obj.fn(x - e)) / (2 * h)
    return out


# l2

def test_l2_at_target_is_flat(toy):
    obj = l2_objective(toy)
    assert obj.value(toy) == 0.0
    np.testing.assert_array_equal(obj.derivative(toy).values, 0.0)
    assert (obj.alpha, obj.beta) == (2.0, 2.0)


def test_l2_distinct_point_masses():
    a = Distribution.point_mass(D22, (0, 0))
    b = Distribution.point_mass(D22, (1, 1))
    assert l2_objective(a).value(b) == 2.0


def test_l2_derivative_matches_differences(rng):
    d = LatticeDomain(3, 3)
    obj = l2_objective(random_distribution(rng, d))
    for _ in range(5):
        p = random_distribution(rng, d)
        fd = _central_differences(obj, p)
        np.testing.assert_allclose(obj.derivative(p).values, fd, atol=1e-7)
        assert check_derivative(obj, p) <= 1e-7


def test_l2_strong_convexity_and_smoothness_are_tight(rng):
    d = LatticeDomain(3, 2)
    obj = l2_objective(random_distribution(rng, d))
    for _ in range(20):
        p, q = random_distribution(rng, d), random_distribution(rng, d)
        gap = obj.value(q) - obj.value(p) - inner_product(obj.derivative(p), DenseFunction(d, q.values - p.values))
        sq = np.sum((q.values - p.values) ** 2)
        assert gap == pytest.approx(obj.alpha / 2 * sq, abs=1e-12)
        assert gap == pytest.approx(obj.beta / 2 * sq, abs=1e-12)


# KL

def test_kl_value_examples(rng):
    d = LatticeDomain(3, 2)
    t = random_distribution(rng, d)
    assert kl_objective(t).value(t) == pytest.approx(0.0, abs=1e-15)
    obj = kl_objective(Distribution.uniform(d))
    assert obj.value(Distribution.point_mass(d, (1, 0, 1))) == pytest.approx(np.log(8))


def test_kl_rejects_target_with_zeros():
    with pytest.raises(ValueError, match="strictly positive"):
        kl_objective(Distribution.point_mass(D22, (0, 0)))


def test_kl_derivative_on_interior_points(rng):
    d = LatticeDomain(3, 3)
    obj = kl_objective(random_distribution(rng, d, concentration=5.0))
    for _ in range(10):
        p = random_distribution(rng, d, concentration=5.0)
        assert p.values.min() > 1e-3
        expected = np.log(p.values / obj.target.values) + 1.0
        np.testing.assert_allclose(obj.derivative(p).values, expected, rtol=1e-12)
        assert check_derivative(obj, p) <= 1e-6


def test_kl_derivative_is_finite_at_zero_mass():
    obj = kl_objective(Distribution.uniform(D22))
    g = obj.derivative(Distribution.point_mass(D22, (0, 0))).values
    assert np.all(np.isfinite(g))
    assert g[1] == pytest.approx(np.log(1e-12 / 0.25) + 1.0)


# vector objectives

def test_quadratic_sensing_examples(rng):
    A = rng.normal(size=(4, 6))
    p0 = rng.dirichlet(np.ones(6))
    obj = quadratic_sensing_objective(A, p0)
    assert obj.value(p0) == pytest.approx(0.0, abs=1e-24)
    null = quadratic_sensing_objective(np.array([[1.0, 1.0]]), np.array([1.0, 0.0]))
    assert null.value([0.0, 1.0]) == 0.0
    w = rng.dirichlet(np.ones(6))
    assert check_derivative(obj, w) <= 1e-7
    np.testing.assert_allclose(obj.gradient(w), 2 * A.T @ (A @ w - A @ p0))


def test_quadratic_sensing_shape_checks():
    with pytest.raises(ValueError):
        quadratic_sensing_objective(np.ones((2, 3)), np.ones(2))
    obj = quadratic_sensing_objective(np.ones((2, 3)), np.ones(3) / 3)
    with pytest.raises(ValueError):
        obj.gradient(np.ones(2))


def test_mmd_examples():
    obj = mmd_objective(np.eye(2), [0.5, 0.5])
    assert obj.value([0.5, 0.5]) == pytest.approx(0.0)
    assert obj.value([1.0, 0.0]) == pytest.approx(0.5)
    np.testing.assert_allclose(obj.gradient(np.array([1.0, 0.0])), [1.0, -1.0])


def test_mmd_equals_feature_space_distance(rng):
    for _ in range(10):
        phi = rng.normal(size=(3, 7))
        K = phi.T @ phi
        nu = rng.dirichlet(np.ones(7))
        w = rng.dirichlet(np.ones(7))
        obj = mmd_objective(K, nu)
        assert obj.value(w) == pytest.approx(np.sum((phi @ w - phi @ nu) ** 2), abs=1e-10)
        assert obj.value(w) >= -1e-12
        assert check_derivative(obj, w) <= 1e-7


def test_mmd_shape_checks():
    with pytest.raises(ValueError, match="square"):
        mmd_objective(np.ones((2, 3)), [0.5, 0.5])
    with pytest.raises(ValueError):
        mmd_objective(np.eye(3), [0.5, 0.5])


# first-order convexity

def test_first_order_convexity(rng):
    d = LatticeDomain(3, 2)
    t = random_distribution(rng, d, concentration=2.0)
    A = rng.normal(size=(5, d.size))
    phi = rng.normal(size=(4, d.size))
    nu = rng.dirichlet(np.ones(d.size))
    vec = [quadratic_sensing_objective(A, t.values), mmd_objective(phi.T @ phi, nu)]
    for _ in range(30):
        p = random_distribution(rng, d, concentration=2.0)
        q = random_distribution(rng, d, concentration=2.0)
        for obj in (l2_objective(t), kl_objective(t)):
            lin = obj.value(p) + np.dot(obj.derivative(p).values, q.values - p.values)
            assert obj.value(q) >= lin - 1e-8
        for obj in vec:
            lin = obj.value(p.values) + np.dot(obj.gradient(p.values), q.values - p.values)
            assert obj.value(q.values) >= lin - 1e-8


# derivative checker

def test_check_derivative_rejects_bad_step(toy):
    with pytest.raises(ValueError):
        check_derivative(l2_objective(toy), toy, h=0.0)


def test_check_derivative_detects_a_wrong_gradient(toy):
    good = l2_objective(toy)
    bad = Objective(toy.domain, good.fn, lambda p: 2.0 * (p - toy.values) + 0.01)
    assert check_derivative(bad, toy) == pytest.approx(0.01, rel=1e-4)


def test_constants_are_validated():
    f = lambda p: 0.0
    with pytest.raises(ValueError):
        Objective(D22, f, f, alpha=3.0, beta=2.0)
    with pytest.raises(ValueError):
        Objective(D22, f, f, L=-1.0)


# restricted KL minimizer

def test_restricted_min_kl_examples(rng):
    d = LatticeDomain(3, 2)
    t = random_distribution(rng, d, support=(0, 2))
    p, v = restricted_min_kl(t, (0, 2))
    np.testing.assert_allclose(p.values, t.values, atol=1e-15)
    assert v == pytest.approx(0.0, abs=1e-15)

    p, v = restricted_min_kl(Distribution.uniform(D22), (0,))
    np.testing.assert_allclose(p.values, [0.5, 0.5, 0.0, 0.0])
    assert v == pytest.approx(np.log(2))


def test_restricted_min_kl_against_grid_search():
    d = LatticeDomain(2, 2)
    t = Distribution(d, [0.1, 0.3, 0.4, 0.2])
    obj = kl_objective(t)
    grid = np.linspace(0.0, 1.0, 10001)
    vals = [obj.value(np.array([a, 1 - a, 0.0, 0.0])) for a in grid]
    p, v = restricted_min_kl(t, (0,))
    assert v <= min(vals) + 1e-12
    assert p.values[0] == pytest.approx(grid[int(np.argmin(vals))], abs=1e-4)


def test_restricted_min_kl_beats_random_restricted_points(rng):
    d = LatticeDomain(3, 3)
    t = random_distribution(rng, d)
    obj = kl_objective(t)
    for s in itertools.combinations(range(3), 2):
        _, v = restricted_min_kl(t, s)
        for _ in range(100 // 3 + 1):
            p = random_distribution(rng, d, support=s)
            assert v <= obj.value(p) + 1e-12


def test_restricted_min_kl_value_decreases_with_mass():
    d = LatticeDomain(2, 2)
    vals = []
    for c in (0.2, 0.5, 0.9):
        t = Distribution(d, [c / 2, c / 2, (1 - c) / 2, (1 - c) / 2])
        vals.append(restricted_min_kl(t, (0,))[1])
    assert vals[0] > vals[1] > vals[2]


def test_restricted_min_kl_needs_mass():
    t = Distribution(D22, [0.0, 0.0, 0.5, 0.5])
    with pytest.raises(ValueError, match="no mass"):
        restricted_min_kl(t, (0,))


def test_points_helper_agrees_with_domain():
    d = LatticeDomain(3, 3)
    assert points_with_support_in(d, (0, 2)) == list(d.restricted_indices((0, 2)))
