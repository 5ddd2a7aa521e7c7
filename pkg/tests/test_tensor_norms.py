import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bilinext import (BilinearMap, LinearMap, NormedSpace, OptimizerConfig, TensorElement,
                      bilinear_norm, delinearize, embedded_projective_norms, injective_norm,
                      is_subspace_embedding, linearize, make_subspace, operator_norm,
                      projective_norm, projective_norm_dual_lower, projective_norm_upper,
                      single_tensor)
from bilinext.tensor_norms import random_element_in

from conftest import circle

INF = np.inf
PLANE = NormedSpace(2, 2)
PAIRS = [(1, 1), (2, 2), (INF, INF), (1, INF), (2, 1), (INF, 2), (3, 3), (3, 1)]


def nuclear(C):
    return float(np.linalg.svd(C, compute_uv=False).sum())


def test_single_tensor_examples():
    e1, e2 = np.eye(2)
    assert np.array_equal(single_tensor(PLANE, PLANE, e1, e2).coeff_matrix, [[0, 1], [0, 0]])
    assert single_tensor(PLANE, PLANE, np.zeros(2), [1, 2]).is_zero()
    F = single_tensor(PLANE, PLANE, [1, 1], [1, -1])
    assert np.array_equal(F.coeff_matrix, [[1, -1], [1, -1]])
    with pytest.raises(ValueError):
        single_tensor(PLANE, PLANE, [1, 2, 3], [1, 2])


def test_injective_examples(cfg):
    I = TensorElement.from_matrix(PLANE, PLANE, np.eye(2))
    xs = circle(4000)
    grid = np.abs(np.einsum("ai,ij,bj->ab", xs, np.eye(2), xs)).max()
    assert injective_norm(I, cfg) == pytest.approx(grid, abs=1e-6)
    assert injective_norm(I, cfg) == pytest.approx(1.0, abs=1e-12)
    assert injective_norm(TensorElement(PLANE, PLANE, ()), cfg) == 0.0


def test_injective_euclidean_is_spectral(rng):
    for _ in range(30):
        C = rng.standard_normal(tuple(rng.integers(1, 6, size=2)))
        F = TensorElement.from_matrix(NormedSpace(C.shape[0], 2), NormedSpace(C.shape[1], 2), C)
        assert injective_norm(F) == pytest.approx(np.linalg.norm(C, 2), abs=1e-7)


def test_injective_with_sup_norm_factor(rng):
    # l_inf^n (x)_eps Y is l_inf^n(Y): the largest Y-norm of a row.
    C = rng.standard_normal((4, 3))
    F = TensorElement.from_matrix(NormedSpace(4, INF), NormedSpace(3, 3), C)
    assert injective_norm(F) == pytest.approx(np.linalg.norm(C, 3, axis=1).max(), rel=1e-7)


def test_projective_examples(cfg):
    x, y = np.array([1.0, -2.0]), np.array([0.5, 3.0])
    assert projective_norm_upper(single_tensor(PLANE, PLANE, x, y), cfg=cfg) == pytest.approx(
        np.linalg.norm(x) * np.linalg.norm(y), rel=1e-12)
    I = TensorElement.from_matrix(PLANE, PLANE, np.eye(2))
    assert projective_norm_upper(I, k=2, cfg=cfg) == pytest.approx(nuclear(np.eye(2)), abs=1e-9)
    assert projective_norm_upper(TensorElement(PLANE, PLANE, ()), cfg=cfg) == 0.0
    with pytest.raises(ValueError):
        projective_norm_upper(I, k=1, cfg=cfg)


def test_dual_lower_examples(cfg):
    x, y = np.array([1.0, -2.0]), np.array([0.5, 3.0])
    S = single_tensor(PLANE, PLANE, x, y)
    assert projective_norm_dual_lower(S, cfg) == pytest.approx(
        np.linalg.norm(x) * np.linalg.norm(y), rel=1e-9)
    I = TensorElement.from_matrix(PLANE, PLANE, np.eye(2))
    value, A = projective_norm_dual_lower(I, cfg, return_form=True)
    assert value == pytest.approx(2.0, abs=1e-9)
    assert bilinear_norm(BilinearMap.form(PLANE, PLANE, A), cfg) <= 1 + 1e-9
    assert projective_norm_dual_lower(TensorElement(PLANE, PLANE, ()), cfg) == 0.0


def test_projective_euclidean_is_nuclear(rng, cfg):
    for _ in range(10):
        C = rng.standard_normal(tuple(rng.integers(1, 5, size=2)))
        F = TensorElement.from_matrix(NormedSpace(C.shape[0], 2), NormedSpace(C.shape[1], 2), C)
        rep = projective_norm(F, cfg)
        assert rep.certified
        assert rep.value == pytest.approx(nuclear(C), rel=1e-4)


def test_projective_with_l1_factor(rng, cfg):
    # l1^n (x)_pi Y is l1^n(Y): the sum of the Y-norms of the rows.
    for q in (2, 3, INF):
        C = rng.standard_normal((3, 4))
        F = TensorElement.from_matrix(NormedSpace(3, 1), NormedSpace(4, q), C)
        rep = projective_norm(F, cfg)
        oracle = np.linalg.norm(C, q, axis=1).sum()
        assert rep.projective_upper == pytest.approx(oracle, rel=1e-6)
        assert rep.projective_dual_lower == pytest.approx(oracle, rel=1e-6)
    C = rng.standard_normal((4, 3))
    F = TensorElement.from_matrix(NormedSpace(4, 3), NormedSpace(3, 1), C)
    assert projective_norm(F, cfg).value == pytest.approx(np.linalg.norm(C, 3, axis=0).sum(),
                                                          rel=1e-6)


def test_identity_in_sup_norm_plane(cfg):
    # (a, b) -> (a + b, a - b) maps l1^2 isometrically onto l_inf^2, so
    # pi(I) in l_inf^2 (x) l_inf^2 is the l1(l_inf) norm of T^{-1} I.
    T = np.array([[1.0, 1.0], [1.0, -1.0]])
    oracle = np.abs(np.linalg.inv(T)).max(axis=1).sum()
    square = NormedSpace(2, INF)
    rep = projective_norm(TensorElement.from_matrix(square, square, np.eye(2)), cfg)
    assert rep.projective_dual_lower <= rep.projective_upper + 1e-9
    assert rep.value == pytest.approx(oracle, abs=1e-9)
    assert rep.injective == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p, q", PAIRS)
def test_crossnorm_properties(p, q, rng, cfg):
    X, Y = NormedSpace(3, p), NormedSpace(4, q)
    for _ in range(3):
        F = TensorElement.from_matrix(X, Y, rng.standard_normal((3, 4)))
        rep = projective_norm(F, cfg)
        assert rep.injective <= rep.projective_upper + 1e-6
        assert rep.projective_dual_lower <= rep.projective_upper + 1e-6
        assert rep.certified
        x, y = rng.standard_normal(3), rng.standard_normal(4)
        S = projective_norm(single_tensor(X, Y, x, y), cfg)
        target = X.norm(x) * Y.norm(y)
        for value in (S.injective, S.projective_upper, S.projective_dual_lower):
            assert value == pytest.approx(target, abs=1e-6)


def test_upper_bound_decomposition_is_exact(rng, cfg):
    X, Y = NormedSpace(3, 3), NormedSpace(3, INF)
    F = TensorElement.from_matrix(X, Y, rng.standard_normal((3, 3)))
    value, terms = projective_norm_upper(F, cfg=cfg, return_terms=True)
    assert len(terms) <= 9
    assert np.allclose(sum(np.outer(x, y) for x, y in terms), F.coeff_matrix, atol=1e-9)
    assert value == pytest.approx(sum(X.norm(x) * Y.norm(y) for x, y in terms), rel=1e-12)


def test_report_serialises(cfg):
    rep = projective_norm(single_tensor(PLANE, PLANE, [1, 0], [0, 2]), cfg)
    d = rep.to_dict()
    assert d["certified"] and d["decomposition_terms"] == 1
    assert d["projective_upper"] == pytest.approx(2.0)


matrices = arrays(float, (3, 3), elements=st.floats(-10, 10, allow_nan=False, width=64))
scalars = st.floats(-5, 5, allow_nan=False)
FAST = OptimizerConfig(restarts=8, seed=3)


@settings(max_examples=15, deadline=None)
@given(matrices, matrices, st.sampled_from([(2, 2), (1, INF), (INF, INF)]))
def test_projective_triangle_inequality(A, B, pq):
    X, Y = NormedSpace(3, pq[0]), NormedSpace(3, pq[1])
    pi = lambda C: projective_norm_upper(TensorElement.from_matrix(X, Y, C), cfg=FAST)
    assert pi(A + B) <= pi(A) + pi(B) + 1e-6 * (1 + pi(A) + pi(B))


@settings(max_examples=25, deadline=None)
@given(matrices, scalars, st.sampled_from([(2, 2), (1, INF), (INF, 2)]))
def test_projective_homogeneity(A, a, pq):
    X, Y = NormedSpace(3, pq[0]), NormedSpace(3, pq[1])
    pi = lambda C: projective_norm_upper(TensorElement.from_matrix(X, Y, C), cfg=FAST)
    assert pi(a * A) == pytest.approx(abs(a) * pi(A), abs=1e-6 * (1 + abs(a) * pi(A)))


@settings(max_examples=25, deadline=None)
@given(matrices, matrices, scalars, st.sampled_from([(2, 2), (1, INF), (3, 3)]))
def test_injective_norm_axioms(A, B, a, pq):
    X, Y = NormedSpace(3, pq[0]), NormedSpace(3, pq[1])
    eps = lambda C: injective_norm(TensorElement.from_matrix(X, Y, C), FAST)
    assert eps(A + B) <= eps(A) + eps(B) + 1e-6 * (1 + eps(A) + eps(B))
    assert eps(a * A) == pytest.approx(abs(a) * eps(A), abs=1e-6 * (1 + abs(a) * eps(A)))


def test_linearize_examples(cfg):
    R = NormedSpace(1, 2)
    Phi = linearize(BilinearMap.zero(PLANE, PLANE, R), cfg)
    assert not np.any(Phi.matrix)
    Phi = linearize(BilinearMap.form(PLANE, PLANE, [[0, 0], [0, 1]]), cfg)
    F = TensorElement.from_matrix(PLANE, PLANE, [[1, 2], [3, 4]])
    assert Phi(F.vector) == pytest.approx([4.0])


def test_linearize_agrees_on_single_tensors(rng):
    X, Y, Z = NormedSpace(3, 1), NormedSpace(2, 3), NormedSpace(2, INF)
    phi = BilinearMap(X, Y, Z, rng.standard_normal((2, 3, 2)))
    Phi = linearize(phi)
    for _ in range(20):
        x, y = rng.standard_normal(3), rng.standard_normal(2)
        assert np.allclose(Phi(np.outer(x, y).ravel()), phi(x, y), atol=1e-12)
    assert np.array_equal(delinearize(Phi).coeffs, phi.coeffs)


def adjoint_spectral_sup(C):
    """sup over unit h in R^2 of the spectral norm of h_1 C_1 + h_2 C_2 (grid)."""
    return max(np.linalg.norm(np.tensordot(h, C, 1), 2) for h in circle(20000))


def test_linearization_isometry_euclidean(rng, cfg):
    for _ in range(3):
        X, Y, Z = NormedSpace(3, 2), NormedSpace(3, 2), NormedSpace(2, 2)
        phi = BilinearMap(X, Y, Z, rng.standard_normal((2, 3, 3)))
        lin = operator_norm(linearize(phi, cfg), cfg, method="ascent")
        assert lin == pytest.approx(bilinear_norm(phi, cfg), abs=1e-4)
        assert lin == pytest.approx(adjoint_spectral_sup(phi.coeffs), abs=1e-4)


@pytest.mark.parametrize("p", [1, INF, 3])
def test_linearization_isometry_other_exponents(p, rng, cfg):
    X, Y, Z = NormedSpace(3, p), NormedSpace(2, p), NormedSpace(2, p)
    phi = BilinearMap(X, Y, Z, rng.standard_normal((2, 3, 2)))
    assert operator_norm(linearize(phi, cfg), cfg) == pytest.approx(bilinear_norm(phi, cfg),
                                                                    abs=1e-6)


def test_embedded_norms_whole_space(rng, cfg):
    X = NormedSpace(3, 1)
    M = make_subspace(X, np.eye(3))
    F = random_element_in(M, M, rng)
    sub, amb = embedded_projective_norms(F, M, M, cfg)
    assert sub.value == pytest.approx(amb.value, rel=1e-9)


def test_embedded_norms_single_tensor(rng, cfg):
    X = NormedSpace(4, INF)
    M = make_subspace(X, rng.standard_normal((2, 4)))
    u, v = M.embed(rng.standard_normal(2)), M.embed(rng.standard_normal(2))
    sub, amb = embedded_projective_norms(single_tensor(X, X, u, v), M, M, cfg)
    assert sub.value == pytest.approx(X.norm(u) * X.norm(v), rel=1e-6)
    assert amb.value == pytest.approx(X.norm(u) * X.norm(v), rel=1e-6)


def test_embedded_norms_hilbert_equal(rng, cfg):
    X, Y = NormedSpace(4, 2), NormedSpace(3, 2)
    M, N = make_subspace(X, rng.standard_normal((2, 4))), make_subspace(Y, rng.standard_normal((2, 3)))
    for _ in range(5):
        F = random_element_in(M, N, rng)
        sub, amb = embedded_projective_norms(F, M, N, cfg, share_decomposition=False)
        assert amb.value == pytest.approx(sub.value, rel=1e-4)
        assert amb.value == pytest.approx(nuclear(F.coeff_matrix), rel=1e-4)


@pytest.mark.parametrize("p", [1, INF])
def test_embedded_norms_monotone(p, rng, cfg):
    X = NormedSpace(4, p)
    M, N = make_subspace(X, rng.standard_normal((2, 4))), make_subspace(X, rng.standard_normal((3, 4)))
    for _ in range(5):
        F = random_element_in(M, N, rng)
        sub, amb = embedded_projective_norms(F, M, N, cfg, share_decomposition=False)
        assert amb.value <= sub.value + 1e-6


def test_embedded_norms_reject_outside_terms(cfg):
    X = NormedSpace(2, 2)
    M = make_subspace(X, [[1, 0]])
    with pytest.raises(ValueError):
        embedded_projective_norms(single_tensor(X, X, [0, 1], [1, 0]), M, M, cfg)


def test_is_subspace_embedding_verdicts(rng, cfg):
    X = NormedSpace(4, 2)
    M = make_subspace(X, rng.standard_normal((2, 4)))
    verdict = is_subspace_embedding(M, M, samples=5, cfg=cfg)
    assert verdict.equal and verdict.monotone and verdict.worst_gap <= 1e-4
    W = make_subspace(X, np.eye(4))
    assert is_subspace_embedding(W, W, samples=3, cfg=cfg).worst_gap <= 1e-9
    square = NormedSpace(3, INF)
    coord = make_subspace(square, np.eye(3)[:2])
    verdict = is_subspace_embedding(coord, coord, samples=5, cfg=cfg)
    assert verdict.equal and verdict.monotone


def test_strict_inequality_can_occur(cfg):
    # A subspace of l_inf^3 with no norm-one projection can shrink the norm.
    X = NormedSpace(3, INF)
    M = make_subspace(X, [[1, 1, 0], [0, 1, 1]])
    rng = np.random.default_rng(5)
    gaps = []
    for _ in range(6):
        F = random_element_in(M, M, rng, terms=2)
        sub, amb = embedded_projective_norms(F, M, M, cfg, share_decomposition=False)
        assert sub.certified and amb.certified
        assert amb.value <= sub.value + 1e-6
        gaps.append(sub.projective_dual_lower - amb.projective_upper)
    assert max(gaps) > 1e-2
