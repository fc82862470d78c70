import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from convarb.errors import DomainError
from convarb.measurecalc import (DiscreteMeasure, difference_positivity_check, is_orthogonal, lebesgue_decompose,
                                 monotone_classify, null_tol)
from convarb.simkernel import make_grid

def m(values):
    values = np.asarray(values, dtype=float)
    return DiscreteMeasure(make_grid(1.0, values.shape[-1]), values)


# magnitudes kept away from the subnormal range, where ratios lose precision by design
normal = st.floats(-1e6, 1e6).filter(lambda x: x == 0 or abs(x) > 1e-200)
masses = st.integers(1, 30).flatmap(
    lambda n: st.tuples(arrays(float, n, elements=normal),
                        arrays(float, n, elements=st.one_of(st.just(0.0), normal.map(abs)))))


def test_identity_split():
    ref = m([1.0, 2.0, 0.5])
    s = lebesgue_decompose(ref, ref)
    np.testing.assert_array_equal(s.density, 1.0)
    np.testing.assert_array_equal(s.singular.mass, 0.0)


def test_atomic_cells():
    s = lebesgue_decompose(m([2, 3, 0]), m([1, 0, 2]), tol=0.0)
    np.testing.assert_array_equal(s.density, [2, 0, 0])
    np.testing.assert_array_equal(s.singular.mass, [0, 3, 0])


def test_zero_target():
    s = lebesgue_decompose(m([0, 0, 0]), m([1, 0, 2]))
    np.testing.assert_array_equal(s.density, 0)
    np.testing.assert_array_equal(s.singular.mass, 0)


def test_negative_reference_rejected():
    with pytest.raises(DomainError):
        lebesgue_decompose(m([1, 1]), m([1, -1]))


def test_grid_mismatch_rejected():
    with pytest.raises(DomainError):
        lebesgue_decompose(m([1, 1]), m([1, 1, 1]))


def test_non_finite_mass_rejected():
    with pytest.raises(DomainError):
        m([1.0, np.nan])


@given(masses)
def test_round_trip_bitwise(pair):
    target, ref = pair
    s = lebesgue_decompose(m(target), m(ref))
    np.testing.assert_array_equal(s.reconstruct(), target)
    ac = s.absolutely_continuous.mass
    assert np.all(np.abs(s.density * ref - ac) <= 2 * np.spacing(np.abs(ac)))


@given(masses)
def test_split_is_orthogonal_pair(pair):
    target, ref = pair
    s = lebesgue_decompose(m(target), m(ref))
    assert is_orthogonal(s.absolutely_continuous, s.singular)
    charged = ref > null_tol(ref)
    assert np.all(s.singular.mass[charged] == 0)


def test_null_tol_batched_per_row():
    x = np.array([[1.0, 1.0], [100.0, 0.0]])
    np.testing.assert_array_equal(null_tol(x), [[2e-12], [1e-10]])


def test_orthogonality_examples():
    assert is_orthogonal(m([1, 0]), m([0, 1]))
    assert not is_orthogonal(m([1, 1]), m([0, 1]))
    assert is_orthogonal(m([3, -2, 5]), m([0, 0, 0]))


def test_positivity_examples():
    assert difference_positivity_check(m([1, 1]), m([0.5, 0.5])).ok
    v = difference_positivity_check(m([1, 0]), m([0, 0.5]))
    assert not v.ok and v.violation_cells == (1,)
    assert difference_positivity_check(m([0, 2]), m([0, 0])).ok


def test_monotone_examples():
    v = monotone_classify(m([-0.1, -0.2]))
    assert v.classification == "decreasing"
    np.testing.assert_array_equal(v.increasing_part.mass, 0)
    v = monotone_classify(m([0.1, -0.2]))
    assert v.classification == "neither"
    np.testing.assert_array_equal(v.increasing_part.mass, [0.1, 0])
    np.testing.assert_array_equal(v.decreasing_part.mass, [0, 0.2])
    assert monotone_classify(m([0.0, 0.0])).classification == "increasing"


@given(arrays(float, st.integers(1, 40), elements=st.floats(-1e3, 1e3)))
def test_jordan_split_orthogonal(v):
    res = monotone_classify(m(v))
    assert np.all(np.minimum(res.increasing_part.mass, res.decreasing_part.mass) == 0)
    np.testing.assert_array_equal(res.increasing_part.mass - res.decreasing_part.mass, v)


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(
    arrays(float, n, elements=st.floats(-1e3, 1e3)), arrays(bool, n))))
def test_orthogonal_nonnegative_sum_implies_nonnegative_parts(data):
    vals, side = data
    a, b = m(np.where(side, vals, 0.0)), m(np.where(side, 0.0, vals))
    assert is_orthogonal(a, b)
    if np.all(a.mass + b.mass >= 0):
        assert np.all(a.mass >= 0) and np.all(b.mass >= 0)
    else:
        assert np.any(a.mass < 0) or np.any(b.mass < 0)
