import math

import numpy as np
import pytest

from magband.eigensolver import TridiagonalMatrix, lowest_eigenvalues
from magband.oracles import (
    DomainError,
    SizeExceeded,
    SolvableKind,
    SolvableModel,
    brute_dense_eigs,
    exact_eigenvalue,
    quadrature_integral,
)


def test_free_landau_levels():
    model = SolvableModel(SolvableKind.FREE_LANDAU, B=2.0)
    assert exact_eigenvalue(model, 1, 0.0) == 6.0
    assert exact_eigenvalue(model, 0, 3.7) == 2.0


def test_linear_reduces_to_free_at_zero_slope():
    model = SolvableModel(SolvableKind.LINEAR, B=1.0, alpha=0.0)
    for n in range(4):
        for p in (-2.0, 0.0, 5.0):
            assert exact_eigenvalue(model, n, p) == 2 * n + 1


def test_linear_is_affine_in_momentum():
    model = SolvableModel(SolvableKind.LINEAR, B=1.5, alpha=0.7)
    ps = np.linspace(-4, 4, 9)
    vals = np.array([exact_eigenvalue(model, 2, p) for p in ps])
    slopes = np.diff(vals) / np.diff(ps)
    assert np.max(np.abs(slopes - (-model.alpha / model.B))) < 1e-13


def test_parabola_value_and_shape():
    model = SolvableModel(SolvableKind.PARABOLA, B=1.0, beta=0.6)
    assert exact_eigenvalue(model, 0, 1.0) == pytest.approx(0.8 - 0.36 / 0.64)
    ps = np.linspace(-3, 3, 13)
    vals = np.array([exact_eigenvalue(model, 0, p) for p in ps])
    assert np.allclose(vals, vals[::-1])  # even in p
    second_diff = np.diff(vals, 2)
    assert np.all(second_diff < 0)  # concave


def test_parabola_domain_error():
    model = SolvableModel(SolvableKind.PARABOLA, B=1.0, beta=1.2)
    with pytest.raises(DomainError):
        exact_eigenvalue(model, 0, 0.0)
    boundary = SolvableModel(SolvableKind.PARABOLA, B=1.0, beta=1.0)
    with pytest.raises(DomainError):
        exact_eigenvalue(boundary, 0, 0.0)


def test_brute_dense_two_by_two():
    m = TridiagonalMatrix(np.array([2.0, 2.0]), np.array([1.0]))
    assert np.allclose(brute_dense_eigs(m), [1.0, 3.0], atol=1e-12)


def test_brute_dense_matches_laplacian_closed_form():
    n = 20
    m = TridiagonalMatrix(np.full(n, 2.0), np.full(n - 1, -1.0))
    k = np.arange(1, n + 1)
    want = np.sort(2.0 - 2.0 * np.cos(k * math.pi / (n + 1)))
    assert np.max(np.abs(brute_dense_eigs(m) - want)) < 1e-10


def test_brute_dense_size_guard():
    n = 401
    m = TridiagonalMatrix(np.full(n, 2.0), np.full(n - 1, -1.0))
    with pytest.raises(SizeExceeded):
        brute_dense_eigs(m)


def test_brute_dense_agrees_with_bisection():
    rng = np.random.default_rng(99)
    tol = 1e-9
    for _ in range(10):
        n = int(rng.integers(10, 31))
        m = TridiagonalMatrix(rng.normal(0, 2, n), rng.uniform(0.05, 1.5, n - 1))
        dense = brute_dense_eigs(m)
        mine = lowest_eigenvalues(m, n, tol)
        assert np.max(np.abs(dense - mine)) < 10 * tol


def test_quadrature_constant_and_linear():
    x = np.linspace(0.0, 1.0, 11)
    assert quadrature_integral(np.ones_like(x), 0.1) == pytest.approx(1.0)
    assert quadrature_integral(x, 0.1) == pytest.approx(0.5)


def test_quadrature_gaussian():
    x = np.arange(-8.0, 8.0 + 1e-12, 0.01)
    got = quadrature_integral(np.exp(-x * x), 0.01)
    assert abs(got - math.sqrt(math.pi)) < 1e-8


def test_quadrature_validation():
    with pytest.raises(ValueError):
        quadrature_integral(np.array([1.0]), 0.1)
    with pytest.raises(ValueError):
        quadrature_integral(np.array([1.0, 2.0]), 0.0)


def test_model_validation():
    with pytest.raises(ValueError):
        SolvableModel(SolvableKind.FREE_LANDAU, B=0.0)
    with pytest.raises(ValueError):
        exact_eigenvalue(SolvableModel(SolvableKind.FREE_LANDAU, B=1.0), -1, 0.0)
