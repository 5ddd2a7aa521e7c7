import itertools

import numpy as np
import pytest

from bilinext import (BilinearMap, LinearMap, NormedSpace, OperatorValuedMap, bilinear_argmax,
                      bilinear_norm, curry, make_subspace, operator_norm, rank_one_bilinear,
                      uncurry)
from bilinext.normed_spaces import dual_norm

from conftest import circle

INF = np.inf
R = NormedSpace(1, 2)
PLANE = NormedSpace(2, 2)


def sphere_grid(n):
    """Grid on the Euclidean unit sphere of R^2 or R^3."""
    if n == 2:
        return circle(2000)
    u, v = np.meshgrid(np.linspace(0, np.pi, 120), np.linspace(0, 2 * np.pi, 240))
    pts = np.stack([np.sin(u) * np.cos(v), np.sin(u) * np.sin(v), np.cos(u)], -1)
    return pts.reshape(-1, 3)


def test_eval_examples(rng):
    f = np.array([0.0, 1.0])
    phi = BilinearMap.form(PLANE, PLANE, np.outer(f, f))
    assert phi([1, 2], [3, 4]) == pytest.approx([8.0])
    x, y = rng.standard_normal((2, 2))
    assert phi(x, y) == pytest.approx([x[1] * y[1]])
    psi = BilinearMap(PLANE, PLANE, NormedSpace(3, 1), rng.standard_normal((3, 2, 2)))
    assert np.all(psi(np.zeros(2), y) == 0)


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        BilinearMap(PLANE, PLANE, R, np.zeros((1, 3, 2)))
    phi = BilinearMap.zero(PLANE, PLANE, R)
    with pytest.raises(ValueError):
        phi([1, 2, 3], [1, 2])


def test_sections():
    phi = BilinearMap.form(PLANE, PLANE, [[0, 0], [0, 1]])
    assert np.all(phi.section_y(np.zeros(2)).matrix == 0)
    assert np.allclose(phi.section_y([0, 1]).matrix, [[0, 1]])


def test_sections_agree_with_eval(rng):
    X, Y, Z = NormedSpace(3, 1), NormedSpace(4, INF), NormedSpace(2, 2)
    phi = BilinearMap(X, Y, Z, rng.standard_normal((2, 3, 4)))
    for _ in range(100):
        x, y = rng.standard_normal(3), rng.standard_normal(4)
        direct = phi(x, y)
        assert np.allclose(phi.section_y(y)(x), direct, atol=1e-12)
        assert np.allclose(phi.section_x(x)(y), direct, atol=1e-12)


def test_norm_of_product_form(cfg):
    f = np.array([0.0, 1.0])
    phi_hat = BilinearMap.form(PLANE, PLANE, np.outer(f, f))
    assert bilinear_norm(phi_hat, cfg) == pytest.approx(1.0, abs=1e-12)
    M = make_subspace(PLANE, [[0, 1]])
    phi = BilinearMap.form(M, M, [[1.0]])
    assert bilinear_norm(phi, cfg) == pytest.approx(1.0, abs=1e-12)
    assert bilinear_norm(BilinearMap.zero(PLANE, PLANE, R), cfg) == 0.0


def test_norm_of_euclidean_form_is_spectral(rng):
    for _ in range(30):
        A = rng.standard_normal(tuple(rng.integers(1, 6, size=2)))
        phi = BilinearMap.form(NormedSpace(A.shape[0], 2), NormedSpace(A.shape[1], 2), A)
        assert bilinear_norm(phi) == pytest.approx(np.linalg.norm(A, 2), abs=1e-7)
        assert bilinear_norm(phi, method="ascent") == pytest.approx(np.linalg.norm(A, 2),
                                                                    abs=1e-7)


def test_norm_polytope_closed_forms(rng):
    # l1 x l1 -> Z: the largest ||C[:, i, j]||_Z; l_inf x l_inf -> R by sign enumeration.
    C = rng.standard_normal((3, 3, 4))
    phi = BilinearMap(NormedSpace(3, 1), NormedSpace(4, 1), NormedSpace(3, 2.5), C)
    oracle = np.linalg.norm(C, ord=2.5, axis=0).max()
    assert bilinear_norm(phi) == pytest.approx(oracle, rel=1e-9)
    A = rng.standard_normal((4, 3))
    psi = BilinearMap.form(NormedSpace(4, INF), NormedSpace(3, INF), A)
    oracle = max(abs(np.array(s) @ A @ np.array(t))
                 for s in itertools.product([-1, 1], repeat=4)
                 for t in itertools.product([-1, 1], repeat=3))
    assert bilinear_norm(psi) == pytest.approx(oracle, rel=1e-12)


def test_argmax_attains_norm(rng):
    X, Y = NormedSpace(3, 3), NormedSpace(3, 1.5)
    phi = BilinearMap(X, Y, NormedSpace(2, 2), rng.standard_normal((2, 3, 3)))
    value, x, y = bilinear_argmax(phi)
    assert X.norm(x) <= 1 + 1e-9 and Y.norm(y) <= 1 + 1e-9
    assert np.linalg.norm(phi(x, y)) == pytest.approx(value, rel=1e-8)


@pytest.mark.parametrize("p", [1, 2, INF, 3])
def test_probe_bound(p, rng):
    X, Y, Z = NormedSpace(3, p), NormedSpace(4, p), NormedSpace(2, p)
    phi = BilinearMap(X, Y, Z, rng.standard_normal((2, 3, 4)))
    norm = bilinear_norm(phi)
    for _ in range(200):
        x, y = rng.standard_normal(3), rng.standard_normal(4)
        assert Z.norm(phi(x, y)) <= norm * X.norm(x) * Y.norm(y) + 1e-8


def test_rank_one_examples():
    u = NormedSpace(1, 2)
    phi = rank_one_bilinear(LinearMap.functional(u, [1.0]), LinearMap.identity(u))
    assert phi([2.0], [3.0]) == pytest.approx([6.0])
    g = LinearMap.functional(PLANE, [0.0, 1.0])
    phi = rank_one_bilinear(g, LinearMap.identity(PLANE))
    v = np.array([0.3, -2.0])
    assert np.allclose(phi.section_y(v).matrix, g(v)[0] * np.eye(2))
    with pytest.raises(ValueError):
        rank_one_bilinear(LinearMap.functional(PLANE, [0.0, 0.0]), LinearMap.identity(PLANE))


def test_rank_one_norm_against_grid(rng):
    X, Y, Z = NormedSpace(2, 2), NormedSpace(3, 2), NormedSpace(2, 2)
    g = LinearMap.functional(Y, rng.standard_normal(3))
    T = LinearMap(X, Z, rng.standard_normal((2, 2)))
    phi = rank_one_bilinear(g, T)
    xs, ys = sphere_grid(2), sphere_grid(3)
    grid = (np.abs(ys @ g.matrix[0]).max() * np.linalg.norm(xs @ T.matrix.T, axis=1).max())
    value = bilinear_norm(phi)
    assert value == pytest.approx(grid, rel=1e-3)
    assert value == pytest.approx(dual_norm(Y, g) * operator_norm(T), rel=1e-6)


@pytest.mark.parametrize("p", [1, 2, INF, 3])
def test_rank_one_norm_multiplies(p, rng):
    X, Y, Z = NormedSpace(3, p), NormedSpace(3, p), NormedSpace(2, p)
    g = LinearMap.functional(Y, rng.standard_normal(3))
    T = LinearMap(X, Z, rng.standard_normal((2, 3)))
    assert bilinear_norm(rank_one_bilinear(g, T)) == pytest.approx(
        dual_norm(Y, g) * operator_norm(T), rel=1e-6)


def test_curry_examples():
    assert not np.any(curry(BilinearMap.zero(PLANE, PLANE, R)).tensor)
    phi = BilinearMap.form(PLANE, PLANE, [[0, 0], [0, 1]])
    assert np.allclose(curry(phi)([0, 1]).matrix, [[0, 1]])


def test_curry_round_trip(rng):
    for _ in range(100):
        X, Y, Z = (NormedSpace(int(d), 2) for d in rng.integers(1, 5, size=3))
        phi = BilinearMap(X, Y, Z, rng.standard_normal((Z.dim, X.dim, Y.dim)))
        assert np.array_equal(uncurry(curry(phi)).coeffs, phi.coeffs)
    zero = OperatorValuedMap(PLANE, PLANE, R, np.zeros((2, 1, 2)))
    assert not np.any(uncurry(zero).coeffs)


def test_uncurry_of_scaled_identity_is_rank_one(rng):
    g = rng.standard_normal(2)
    T = OperatorValuedMap.from_images(PLANE, [LinearMap(PLANE, PLANE, np.outer(e, g))
                                             for e in np.eye(2)])
    expected = rank_one_bilinear(LinearMap.functional(PLANE, g), LinearMap.identity(PLANE))
    assert np.allclose(uncurry(T).coeffs, expected.coeffs)


def test_curry_isometry_euclidean(rng, cfg):
    phi = BilinearMap.form(NormedSpace(3, 2), NormedSpace(2, 2), rng.standard_normal((3, 2)))
    assert curry(phi).operator_norm(cfg) == pytest.approx(bilinear_norm(phi, cfg), rel=1e-6)


@pytest.mark.parametrize("p", [1, 2, INF, 3])
def test_curry_isometry(p, rng, cfg):
    X, Y, Z = NormedSpace(4, p), NormedSpace(3, p), NormedSpace(2, p)
    phi = BilinearMap(X, Y, Z, rng.standard_normal((2, 4, 3)))
    assert curry(phi).operator_norm(cfg) == pytest.approx(bilinear_norm(phi, cfg), rel=1e-6)
