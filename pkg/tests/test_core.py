import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_pencils
from reltoda import BidiagonalPencil, FlowSpec, SpectralData, Trajectory, assemble_dense, validate_pencil
from reltoda.errors import InvalidSpectralData, NonPositiveEntry, ShapeMismatch, ValidationError


def test_validate_examples(example):
    validate_pencil(example)
    validate_pencil(BidiagonalPencil([1.0], []))


def test_negative_entry_reports_position():
    with pytest.raises(NonPositiveEntry) as info:
        BidiagonalPencil([1.0, -2.0], [1.0])
    assert info.value.index == 2
    assert info.value.which == "a"


@pytest.mark.parametrize(
    "a, b",
    [([1.0, 2.0], [1.0, 1.0]), ([1.0, 2.0], []), ([], [])],
)
def test_shape_mismatch(a, b):
    with pytest.raises(ValidationError):
        BidiagonalPencil(a, b)


def test_nonfinite_rejected():
    with pytest.raises(NonPositiveEntry):
        BidiagonalPencil([1.0, np.inf], [1.0])
    with pytest.raises(NonPositiveEntry):
        BidiagonalPencil([1.0, 2.0], [np.nan])


def test_assemble_dense_small():
    L, M, Minv = assemble_dense(BidiagonalPencil([1.0, 2.0], [1.0]))
    np.testing.assert_array_equal(L, [[1, 1], [0, 2]])
    np.testing.assert_array_equal(M, [[1, 0], [-1, 1]])
    np.testing.assert_array_equal(Minv, [[1, 0], [1, 1]])
    assert (L @ Minv)[1, 0] == 2.0

    L, M, Minv = assemble_dense(BidiagonalPencil([5.0], []))
    assert L.tolist() == [[5.0]] and M.tolist() == [[1.0]] and Minv.tolist() == [[1.0]]


def _inverse_residual(M, Minv):
    # componentwise, against the scale |Minv| |M| of the products that cancel
    scale = np.abs(Minv) @ np.abs(M)
    err = np.abs(Minv @ M - np.eye(M.shape[0]))
    assert np.all(err[scale == 0] == 0)
    return np.max(err[scale > 0] / scale[scale > 0])


def test_minv_is_inverse():
    for p in random_pencils(3, 50):
        _, M, Minv = assemble_dense(p)
        assert _inverse_residual(M, Minv) < 1e-13


def test_assemble_dense_is_deterministic(example):
    first = assemble_dense(example)
    again = assemble_dense(BidiagonalPencil(list(example.a), list(example.b)))
    for x, y in zip(first, again):
        assert np.array_equal(x, y)


def test_pencil_is_immutable(example):
    with pytest.raises(ValueError):
        example.a[0] = 2.0
    assert example == BidiagonalPencil([3, 12, 16, 7, 5], [1, 6, 11, 5])
    assert example.to_dict() == {"a": [3, 12, 16, 7, 5], "b": [1, 6, 11, 5]}


def test_spectral_data_renormalizes_small_drift():
    s = SpectralData([1.0, 2.0], [0.5, 0.5 + 1e-11])
    assert abs(np.sum(s.w) - 1.0) < 1e-15


@pytest.mark.parametrize(
    "lam, w, exc",
    [
        ([2.0, 1.0], [0.5, 0.5], InvalidSpectralData),
        ([1.0, 1.0], [0.5, 0.5], InvalidSpectralData),
        ([-1.0, 1.0], [0.5, 0.5], InvalidSpectralData),
        ([1.0, 2.0], [0.6, 0.6], InvalidSpectralData),
        ([1.0, 2.0], [1.0, 0.0], InvalidSpectralData),
        ([1.0, 2.0], [1.0], ShapeMismatch),
    ],
)
def test_spectral_data_rejects(lam, w, exc):
    with pytest.raises(exc):
        SpectralData(lam, w)


def test_from_log_weights_survives_underflow():
    s = SpectralData.from_log_weights([1.0, 2.0, 3.0], [0.0, -800.0, -1600.0])
    assert s.w[0] == 1.0
    assert s.log_w[2] == pytest.approx(-1600.0)


@pytest.mark.parametrize(
    "text, values, direction",
    [
        ("reciprocal", [1.0, 0.5], -1),
        ("identity", [1.0, 2.0], 1),
        ("log", [0.0, np.log(2.0)], 1),
        ("power:2", [1.0, 4.0], 1),
        ("power:-0.5", [1.0, 2.0**-0.5], -1),
    ],
)
def test_flow_spec(text, values, direction):
    F = FlowSpec.parse(text)
    np.testing.assert_allclose(F([1.0, 2.0]), values)
    assert F.direction == direction
    assert FlowSpec.parse(str(F)) == F


@pytest.mark.parametrize("text", ["cosine", "power:0", "power:x", "power:inf"])
def test_flow_spec_rejects(text):
    with pytest.raises(ValidationError):
        FlowSpec.parse(text)


def test_trajectory_samples_and_stacking():
    traj = Trajectory([0.0, 1.0], [[1.0, 2.0], [1.5, 1.5]], [[1.0], [0.5]])
    assert len(traj) == 2 and traj.N == 2
    assert traj.sample(1) == BidiagonalPencil([1.5, 1.5], [0.5])
    assert traj.stacked().shape == (2, 3)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=8), st.data())
def test_dense_pencil_structure(a, data):
    b = data.draw(st.lists(st.floats(0.1, 10.0), min_size=len(a) - 1, max_size=len(a) - 1))
    L, M, Minv = assemble_dense(BidiagonalPencil(a, b))
    np.testing.assert_array_equal(np.diag(L), a)
    np.testing.assert_array_equal(np.diag(M, -1), -np.asarray(b))
    assert _inverse_residual(M, Minv) < 1e-13
