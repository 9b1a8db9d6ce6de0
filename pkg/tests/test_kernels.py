import warnings

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, strategies as st
from sklearn.base import clone

from torusmoments.kernels import (KernelApproximation, KernelSpec, TrigPolynomial, best_delta_poly, convolve,
                                  eval_grid, fejer_abs_moment, fejer_abs_moment_bounds, fejer_closed_form,
                                  jackson_closed_form, kernel_multiplier)
from torusmoments.measures import Discrete, Lebesgue, random_discrete


def test_fejer_closed_form_matches_multipliers():
    x = np.linspace(0, 1, 97)
    for n in (1, 4, 11):
        p = KernelSpec("fejer", n).polynomial()
        assert np.allclose(p(x), fejer_closed_form(x, n), atol=1e-12)


def test_jackson_closed_form_matches_multipliers():
    x = np.linspace(0, 1, 97)
    for m in (1, 2, 5, 9):
        p = KernelSpec.jackson(m).polynomial()
        assert p.degree == 2 * m - 2
        assert np.allclose(p(x), jackson_closed_form(x, m), atol=1e-12)


def test_fejer_on_small_grid_hand_values():
    # F_1(x) = 1 + cos(2 pi x)
    assert np.allclose(eval_grid(KernelSpec("fejer", 1).polynomial(), 4), [2, 1, 0, 1])


def test_eval_grid_matches_direct_evaluation(rng):
    p = convolve(random_discrete(2, 4, seed=2).moments(6), KernelSpec("fejer", 6, 2))
    m = 20
    g = eval_grid(p, m)
    X = np.stack(np.meshgrid(np.arange(m) / m, np.arange(m) / m, indexing="ij"), -1).reshape(-1, 2)
    assert np.allclose(g.ravel(), p(X), atol=1e-12)


def test_eval_grid_folds_aliases_with_warning():
    p = KernelSpec("fejer", 5).polynomial()
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        g = eval_grid(p, 4)
    assert rec
    assert np.allclose(g, p(np.arange(4) / 4), atol=1e-12)


@pytest.mark.parametrize("kind", ["fejer", "jackson", "best"])
def test_kernels_are_normalized_and_even(kind):
    k = KernelSpec(kind, 6).polynomial()
    assert k.integral == pytest.approx(1.0)
    assert np.allclose(k.coef, k.coef[::-1])


@given(st.integers(1, 40))
def test_fejer_and_jackson_are_nonnegative(n):
    x = np.linspace(0, 1, 4 * n + 7)
    assert KernelSpec("fejer", n).polynomial()(x).min() > -1e-12
    m = n // 2 + 1
    assert KernelSpec.jackson(m).polynomial()(x).min() > -1e-12


def test_fejer_abs_moment_against_quadrature():
    for n in (1, 2, 7, 30):
        # int over [-1/2, 1/2] of F_n(x) |x|
        val = 2 * scipy.integrate.quad(lambda x: fejer_closed_form(np.array(x), n) * x, 0, 0.5,
                                       limit=400, epsabs=1e-14)[0]
        assert fejer_abs_moment(n) == pytest.approx(val, abs=1e-12)


def test_fejer_abs_moment_first_values_and_dimension_scaling():
    assert fejer_abs_moment(1) == pytest.approx(0.25 - 1 / np.pi ** 2)
    assert fejer_abs_moment(0) == pytest.approx(0.25)
    assert fejer_abs_moment(5, d=3) == pytest.approx(3 * fejer_abs_moment(5))


@given(st.integers(1, 500))
def test_fejer_abs_moment_bracket(n):
    lo, hi = fejer_abs_moment_bounds(n)
    assert lo <= fejer_abs_moment(n) <= hi


def test_best_delta_coefficients():
    p = best_delta_poly(3)
    j = np.arange(1, 4)
    arg = j * np.pi / 8
    assert np.allclose(p.coef[4:], arg / np.tan(arg))
    assert p.coef[3] == 1.0


def test_kernel_multiplier_lookup():
    k = KernelSpec("fejer", 4, 2)
    assert kernel_multiplier(k, [1, 2]) == pytest.approx(0.8 * 0.6)
    assert kernel_multiplier(k, [5, 0]) == 0.0


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("jackson", 3)
    with pytest.raises(ValueError):
        KernelSpec("gauss", 3)
    with pytest.raises(ValueError):
        KernelSpec("best", 3, dim=2)


def test_convolution_of_lebesgue_is_flat():
    p = KernelApproximation("jackson", 6).fit(Lebesgue(2))
    assert np.allclose(p.evaluate_grid(16), 1.0)


def test_saturation_identity():
    w = TrigPolynomial(np.array([0.5, 1, 0.5]))
    for n in (1, 5, 20):
        diff = convolve(w.moments(n), KernelSpec("fejer", n)) - w
        expected = np.zeros(2 * n + 1)
        expected[n - 1] = expected[n + 1] = -0.5 / (n + 1)
        assert np.allclose(diff.coef, expected, atol=1e-15)


def test_trig_polynomial_algebra(rng):
    a = TrigPolynomial(rng.normal(size=5) + 1j * rng.normal(size=5))
    b = TrigPolynomial(rng.normal(size=3) + 1j * rng.normal(size=3))
    x = rng.random(9)
    assert np.allclose((a * b)(x), a(x) * b(x))
    assert np.allclose((a + b)(x), a(x) + b(x))
    assert np.allclose(a.conj()(x), np.conj(a(x)))
    g = scipy.integrate.quad(lambda t: abs(a(np.array([t]))[0]) ** 2, 0, 1)[0]
    assert a.l2_norm_squared() == pytest.approx(g)


def test_estimator_api():
    est = KernelApproximation(kernel="jackson", degree=8)
    assert est.get_params() == {"kernel": "jackson", "degree": 8}
    est2 = clone(est).set_params(degree=4)
    est2.fit(Discrete([[0.0]], [1.0]))
    assert est2.coef_.shape == (9,)
    assert est2.n_features_in_ == 1
    with pytest.raises(TypeError):
        KernelApproximation().fit(np.zeros(3))
