import numpy as np
import pytest
import scipy.special
from hypothesis import given, strategies as st

from torusmoments.bessel import j0


def test_matches_scipy_on_a_dense_range():
    x = np.concatenate([np.linspace(0, 30, 30001), np.linspace(30, 2000, 20001)])
    assert np.max(np.abs(j0(x) - scipy.special.j0(x))) < 1e-13


@pytest.mark.parametrize("x", [7.999999, 8.0, 8.000001, 24.99999, 25.0, 25.00001])
def test_regime_boundaries(x):
    assert j0(np.array([x]))[0] == pytest.approx(scipy.special.j0(x), abs=1e-13)


def test_first_zero():
    z = scipy.special.jn_zeros(0, 3)
    assert np.max(np.abs(j0(z))) < 1e-13


@given(st.floats(-500, 500))
def test_even_and_bounded(x):
    v = j0(np.array([x, -x]))
    assert v[0] == v[1]
    assert abs(v[0]) <= 1.0 + 1e-15
