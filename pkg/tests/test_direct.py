import numpy as np
import pytest

from conftest import EXAMPLE_LAMBDA, EXAMPLE_W, random_pencils
from reltoda import (
    BidiagonalPencil,
    SpectralData,
    WeylFunction,
    assemble_dense,
    direct_transform,
    generalized_eigenvalues,
    weights_from_eigenvectors,
    weights_from_residues,
    weyl_eval,
)
from reltoda.direct import eigenvector_matrices, eigenvectors, refine_eigenvalues, resolvent_corner
from reltoda.errors import PoleEvaluation

SMALL = BidiagonalPencil([1.0, 2.0], [1.0])
SMALL_LAMBDA = np.array([2 - np.sqrt(2), 2 + np.sqrt(2)])


def test_eigenvalues(example):
    np.testing.assert_allclose(generalized_eigenvalues(example), EXAMPLE_LAMBDA, atol=1e-8)
    assert generalized_eigenvalues(BidiagonalPencil([5.0], [])).tolist() == [5.0]
    np.testing.assert_allclose(generalized_eigenvalues(SMALL), SMALL_LAMBDA, rtol=1e-15)


def test_eigenvalues_against_dense_solver():
    for p in random_pencils(11, 30):
        L, M, Minv = assemble_dense(p)
        dense = np.sort(np.linalg.eigvals(Minv @ L).real)
        np.testing.assert_allclose(generalized_eigenvalues(p), dense, rtol=1e-8)


@pytest.mark.parametrize("weights", [weights_from_residues, weights_from_eigenvectors])
def test_weights_examples(example, weights):
    np.testing.assert_allclose(weights(example, generalized_eigenvalues(example)), EXAMPLE_W, atol=1e-8)
    np.testing.assert_allclose(weights(SMALL, SMALL_LAMBDA), [0.5, 0.5], rtol=1e-14)
    np.testing.assert_array_equal(weights(BidiagonalPencil([5.0], []), np.array([5.0])), [1.0])


def test_direct_transform_examples():
    s = direct_transform(BidiagonalPencil([5.0], []))
    assert s.lam.tolist() == [5.0] and s.w.tolist() == [1.0]
    s = direct_transform(SMALL, method="eigenvectors")
    np.testing.assert_allclose(s.w, [0.5, 0.5], rtol=1e-14)
    with pytest.raises(ValueError):
        direct_transform(SMALL, method="qr")


def test_weight_paths_agree_and_are_positive():
    for p in random_pencils(12, 150):
        lam = generalized_eigenvalues(p)
        w1 = weights_from_residues(p, lam)
        w2 = weights_from_eigenvectors(p, lam)
        assert np.all(w1 > 0)
        assert abs(np.sum(w1) - 1.0) < 1e-14
        np.testing.assert_allclose(w1, w2, rtol=1e-8)


def test_weyl_examples(example):
    s = SpectralData(SMALL_LAMBDA, [0.5, 0.5])
    assert weyl_eval(s, 0.0) == pytest.approx(-1.0, rel=1e-14)
    assert 1e9 * weyl_eval(s, 1e9) == pytest.approx(1.0, abs=1e-6)
    f0 = weyl_eval(direct_transform(example), 0.0)
    assert f0 == pytest.approx(-1.0 / 3.0, rel=1e-10)
    assert -1.0 / f0 == pytest.approx(3.0, rel=1e-10)


def test_weyl_derivative_and_poles():
    f = WeylFunction(SMALL_LAMBDA, [0.5, 0.5])
    val, der = weyl_eval(f, 1.0, derivative=True)
    h = 1e-6
    assert der == pytest.approx((weyl_eval(f, 1 + h) - weyl_eval(f, 1 - h)) / (2 * h), rel=1e-7)
    assert f(1.0) == val
    with pytest.raises(PoleEvaluation) as info:
        weyl_eval(f, SMALL_LAMBDA[1])
    assert info.value.j == 2


def test_weyl_equals_resolvent_corner():
    rng = np.random.default_rng(13)
    for p in random_pencils(13, 40):
        s = direct_transform(p)
        z = rng.uniform(0.01, 1.2 * s.lam[-1], 20)
        z = z[np.min(np.abs(z[:, None] - s.lam), axis=1) > 1e-6 * s.lam[-1]]
        np.testing.assert_allclose(weyl_eval(s, z), resolvent_corner(p, z), rtol=1e-9)


def test_eigenvectors_solve_pencil(example):
    lam = generalized_eigenvalues(example)
    L, M, _ = assemble_dense(example)
    for j, pair in enumerate(eigenvectors(example, lam)):
        assert pair.right[0] == 1.0 and pair.left[0] == 1.0
        v, u = pair.right, pair.left
        assert np.linalg.norm(L @ v - lam[j] * M @ v) < 1e-10 * np.linalg.norm(L @ v)
        assert np.linalg.norm(u @ L - lam[j] * u @ M) < 1e-10 * np.linalg.norm(u @ L)


def test_m_orthogonality():
    for p in random_pencils(14, 60):
        lam = generalized_eigenvalues(p)
        U, V = eigenvector_matrices(p, lam)
        _, M, _ = assemble_dense(p)
        G = U.T @ M @ V
        # componentwise scale of each inner product
        scale = np.abs(U).T @ np.abs(M) @ np.abs(V)
        off = ~np.eye(p.N, dtype=bool)
        assert np.all(np.abs(G[off]) <= 1e-9 * np.sqrt(np.outer(np.diag(G), np.diag(G)))[off] + 1e-12 * scale[off])


def test_refine_eigenvalues_extended(example):
    lam = refine_eigenvalues(example, generalized_eigenvalues(example))
    assert lam.dtype == np.longdouble
    np.testing.assert_allclose(lam.astype(float), EXAMPLE_LAMBDA, atol=1e-8)
