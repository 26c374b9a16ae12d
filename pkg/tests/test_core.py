import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from gdrop.core import (Constant, Exponential, Power, Scaled,
                        ShiftedRational, StructuredSystem, TrainingSet,
                        conjugate_closure, eval_K, eval_transfer,
                        eval_transfer_derivative, evaluate_f_diag,
                        frequency_grid, function_from_dict)
from gdrop.exceptions import DimensionMismatch, SingularFunction
from gdrop.models import gen_fom

from conftest import random_system


def test_resolvent_pencil(rng):
    A = rng.standard_normal((4, 4))
    s = StructuredSystem((np.eye(4), A), (Power(1), Constant(-1.0)),
                         np.ones((4, 1)), np.ones((1, 4)))
    np.testing.assert_allclose(eval_K(s, 2j), 2j * np.eye(4) - A)


def test_delay_pencil(rng):
    A, Ad = rng.standard_normal((2, 3, 3))
    s = StructuredSystem(
        (np.eye(3), A, Ad),
        (Power(1), Constant(-1.0), Scaled(-1.0, Exponential(-3.0))),
        np.ones((3, 1)), np.ones((1, 3)))
    z = 0.3 + 1.2j
    np.testing.assert_allclose(eval_K(s, z),
                               z * np.eye(3) - A - np.exp(-3 * z) * Ad)


def test_fading_memory_pencil(rng):
    A = rng.standard_normal((3, 3))
    s = StructuredSystem(
        (np.eye(3), A, A),
        (Power(1), Constant(-1.0), ShiftedRational(1.05)),
        np.ones((3, 1)), np.ones((1, 3)))
    np.testing.assert_allclose(eval_K(s, 1j),
                               1j * np.eye(3) - A + A / (1j + 1.05))


def test_scalar_transfer():
    s = StructuredSystem((np.array([[2.0]]),), (Constant(1.0),),
                         np.array([[1.0]]), np.array([[3.0]]))
    for z in (0.0, 1j, -5 + 2j):
        assert eval_transfer(s, z)[0, 0] == pytest.approx(1.5)


def test_transfer_dense_inverse_oracle(rng):
    sys_ = random_system(rng, n=3, m=2, p=2)
    A = sys_.matrices[1]
    H = eval_transfer(sys_, 1j)
    ref = sys_.C @ np.linalg.inv(1j * np.eye(3) - A) @ sys_.B
    assert np.linalg.norm(H - ref) <= 1e-12 * np.linalg.norm(ref)


def test_transfer_conjugate_symmetry(small_system):
    z = 0.2 + 3j
    np.testing.assert_allclose(eval_transfer(small_system, np.conj(z)),
                               np.conj(eval_transfer(small_system, z)),
                               rtol=1e-12)


def test_transfer_linear_in_B(rng):
    s1 = random_system(rng, n=10)
    B2 = rng.standard_normal((10, 1))
    s2 = StructuredSystem(s1.matrices, s1.functions, B2, s1.C)
    s12 = StructuredSystem(s1.matrices, s1.functions, 2 * s1.B + B2, s1.C)
    z = 2j
    np.testing.assert_allclose(
        eval_transfer(s12, z),
        2 * eval_transfer(s1, z) + eval_transfer(s2, z), rtol=1e-10)


def test_fom_strictly_proper():
    fom = gen_fom()
    mags = [abs(eval_transfer(fom, 1j * w)[0, 0]) for w in (1e3, 1e6, 1e9)]
    assert mags[0] > mags[1] > mags[2]
    # H(jw) ~ CB/(jw) for large w
    cb = abs((fom.C @ fom.B)[0, 0])
    assert mags[2] * 1e9 == pytest.approx(cb, rel=1e-6)


def test_transfer_derivative_matches_fd(small_system):
    z = 0.5 + 2j
    h = 1e-6
    fd = (eval_transfer(small_system, z + h)
          - eval_transfer(small_system, z - h)) / (2 * h)
    np.testing.assert_allclose(eval_transfer_derivative(small_system, z), fd,
                               rtol=1e-6)


def test_sparse_pencil_is_sparse():
    A = sp.diags([-1.0, -2.0, -3.0]).tocsr()
    s = StructuredSystem((sp.identity(3), A), (Power(1), Constant(-1.0)),
                         np.ones((3, 1)), np.ones((1, 3)))
    K = eval_K(s, 1j)
    assert sp.issparse(K)
    np.testing.assert_allclose(K.toarray(), np.diag([1 + 1j, 2 + 1j, 3 + 1j]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        StructuredSystem((np.eye(3), np.eye(4)), (Power(1), Constant(1.0)),
                         np.ones((3, 1)), np.ones((1, 3)))
    with pytest.raises(DimensionMismatch):
        StructuredSystem((np.eye(3),), (Power(1),), np.ones((2, 1)),
                         np.ones((1, 3)))


# scalar functions

@pytest.mark.parametrize('f, z, expected', [
    (Power(1), 1j, 1j),
    (Power(1), 2j, 2j),
    (Exponential(-3.0), 1j, np.exp(-3j)),
    (ShiftedRational(1.05), 1j, 1 / (1j + 1.05)),
    (Power(2), 1j, -1.0),
    (Scaled(-1.0, Exponential(-3.0)), 1j, -np.exp(-3j)),
])
def test_function_values(f, z, expected):
    assert f(z) == pytest.approx(expected, rel=1e-15)


def test_shifted_rational_pole():
    with pytest.raises(SingularFunction):
        ShiftedRational(2.0)(-2.0)


@pytest.mark.parametrize('f', [Constant(2.5), Power(3), Exponential(-0.7),
                               ShiftedRational(1.05),
                               Scaled(-2.0, Power(1))])
def test_function_derivative_and_roundtrip(f):
    z = 0.4 + 1.3j
    h = 1e-6
    fd = (f(z + h) - f(z - h)) / (2 * h)
    assert f.derivative(z) == pytest.approx(fd, rel=1e-7, abs=1e-12)
    assert function_from_dict(f.to_dict()) == f


def test_delay_shorthand():
    f = function_from_dict({'kind': 'delay', 'tau': 3})
    assert f(1j) == pytest.approx(-np.exp(-3j))


def test_f_diag_values(small_system):
    pts = np.array([1j, 2j])
    F = evaluate_f_diag(small_system, pts)
    np.testing.assert_array_equal(F, [[1j, 2j], [-1.0, -1.0]])


# training sets

def test_conjugate_closure_dedup():
    ts = conjugate_closure([1j, -1j, 2j])
    np.testing.assert_array_equal(ts.points, [1j, 2j])
    np.testing.assert_array_equal(ts.multiplicity, [2, 2])


def test_conjugate_closure_real_point():
    ts = conjugate_closure([1.0])
    np.testing.assert_array_equal(ts.points, [1.0])
    np.testing.assert_array_equal(ts.multiplicity, [1])
    assert ts.is_real.all()


def test_log_grid_representatives():
    ts = frequency_grid(1e-2, 1e4, 100)
    assert len(ts) == 100
    assert ts.points[0] == pytest.approx(1e-2j)
    assert ts.points[-1] == pytest.approx(1e4j)
    assert np.allclose(np.diff(np.log(ts.points.imag)),
                       np.log(1e6) / 99)


def test_training_set_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        TrainingSet(np.array([-1j]))


def test_training_set_is_read_only():
    ts = frequency_grid(1, 10, 5)
    with pytest.raises(ValueError):
        ts.points[0] = 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                                   allow_infinity=False), min_size=1,
                max_size=20))
def test_closure_expands_to_conjugate_closed_set(points):
    ts = conjugate_closure(points)
    full = ts.expanded()
    assert np.all(ts.points.imag >= 0)
    assert set(np.round(full, 9)) == set(np.round(np.conj(full), 9))
    assert len(full) == int(ts.multiplicity.sum())
