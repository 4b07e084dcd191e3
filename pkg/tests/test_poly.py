import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXAMPLE_LAMBDA, random_pencils
from reltoda import BidiagonalPencil
from reltoda.errors import BracketFailure
from reltoda.poly import (
    bisect_brackets,
    eval_Delta,
    eval_Delta_with_derivative,
    eval_P,
    eval_P_with_derivative,
    pencil_zeros,
    twisted_pivots,
    zeros_interlaced,
)

SMALL = BidiagonalPencil([1.0, 2.0], [1.0])


def test_eval_P_small():
    np.testing.assert_array_equal(eval_P(SMALL, 0.0), [1.0, -1.0, 2.0])


def test_eval_P_vanishes_at_eigenvalue(example):
    vals = eval_P(example, EXAMPLE_LAMBDA[0])
    # relative to the size of the individual terms of the recurrence
    assert abs(vals[5]) < 1e-6 * np.max(np.abs(vals))


def test_eval_Delta_small():
    vals = eval_Delta(SMALL, 3.0)
    assert vals[1] == 1.0 and vals[2] == -1.0


def test_delta_derivative_small():
    vals, ders = eval_Delta_with_derivative(SMALL, 2.0)
    assert ders[2] == 0.0
    assert vals[0] == 1.0 and ders[0] == 0.0


def test_delta_and_P_share_determinant():
    rng = np.random.default_rng(5)
    for p in random_pencils(5, 40):
        z = rng.uniform(0.05, 60.0, 7)
        np.testing.assert_allclose(eval_Delta(p, z)[p.N], eval_P(p, z)[p.N], rtol=1e-12, atol=1e-300)


def test_derivatives_match_finite_differences():
    h = 1e-6
    for p in random_pencils(6, 20):
        for z in (0.3, 2.7, 11.0):
            _, dP = eval_P_with_derivative(p, z)
            fd = (eval_P(p, z + h) - eval_P(p, z - h)) / (2 * h)
            np.testing.assert_allclose(dP, fd, rtol=1e-6, atol=1e-6 * np.max(np.abs(fd)))
            _, dD = eval_Delta_with_derivative(p, z)
            fd = (eval_Delta(p, z + h) - eval_Delta(p, z - h)) / (2 * h)
            np.testing.assert_allclose(dD, fd, rtol=1e-6, atol=1e-6 * np.max(np.abs(fd)))


def test_twisted_pivots_factor_determinant(example):
    z = np.array([0.7, 5.5, 20.0])
    gam, gder, _, _ = twisted_pivots(example, z)
    P = eval_P(example, z)
    D = eval_Delta(example, z)
    N = example.N
    for r in range(1, N + 1):
        np.testing.assert_allclose(P[r - 1] * D[N - r] * gam[r - 1], P[N], rtol=1e-12)
    # derivative of gamma_r by central differences
    h = 1e-6
    fd = (twisted_pivots(example, z + h)[0] - twisted_pivots(example, z - h)[0]) / (2 * h)
    np.testing.assert_allclose(gder, fd, rtol=1e-6)


def test_zeros_first_member_is_a1(example):
    assert pencil_zeros(example, upto=1)[0][0] == 3.0


def test_zeros_quadratic():
    z = pencil_zeros(SMALL)[-1]
    np.testing.assert_allclose(z, [2 - np.sqrt(2), 2 + np.sqrt(2)], rtol=1e-14)


def test_cascade_matches_table(example):
    np.testing.assert_allclose(pencil_zeros(example)[-1], EXAMPLE_LAMBDA, atol=1e-8)


def _interlaced(prev, cur):
    # Zeros of consecutive members can sit closer than one ulp (seed 7 has a
    # pair 9e-17 apart in relative terms), so ties are allowed; order is not.
    return np.all(cur[:-1] <= prev) and np.all(prev <= cur[1:]) and np.all(np.diff(cur) > 0)


def test_interlacing_and_identities():
    for p in random_pencils(7, 100):
        levels = pencil_zeros(p)
        for prev, cur in zip(levels, levels[1:]):
            assert cur[0] > 0
            assert _interlaced(prev, cur)
        lam = levels[-1]
        trace = np.sum(p.a) + np.sum(p.b)
        assert abs(np.sum(lam) - trace) <= 1e-10 * trace
        assert abs(np.sum(np.log(lam)) - np.sum(np.log(p.a))) <= 1e-10


def test_example_identities(example):
    lam = pencil_zeros(example)[-1]
    assert np.sum(lam) == pytest.approx(66.0, rel=1e-12)
    assert np.prod(lam) == pytest.approx(20160.0, rel=1e-12)


def test_zeros_interlaced_direct_use():
    # Chebyshev-like family: x^2 - 4x + 2 after x - 1, with zeros of the first member given
    roots = zeros_interlaced(lambda x: x * x - 4 * x + 2, [1.0], 1.0, lambda x: 2 * x - 4)
    np.testing.assert_allclose(roots, [2 - np.sqrt(2), 2 + np.sqrt(2)], rtol=1e-14)


def test_bisect_requires_sign_change():
    with pytest.raises(BracketFailure):
        bisect_brackets(lambda x: x, np.array([1.0]), np.array([2.0]), np.array([1.0]), np.array([2.0]))


def test_bisect_converges():
    lo, hi = bisect_brackets(lambda x: x**2 - 2, [0.0], [2.0], [-2.0], [2.0])
    assert hi[0] - lo[0] <= 1e-14 * hi[0]
    assert lo[0] <= np.sqrt(2) <= hi[0]


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_interlacing_property(N, seed):
    rng = np.random.default_rng(seed)
    p = BidiagonalPencil(np.exp(rng.uniform(-2.3, 2.3, N)), np.exp(rng.uniform(-2.3, 2.3, N - 1)))
    levels = pencil_zeros(p)
    for prev, cur in zip(levels, levels[1:]):
        assert _interlaced(prev, cur)
