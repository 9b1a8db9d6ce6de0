import numpy as np
import pytest
import scipy.integrate
import scipy.special
from hypothesis import given, strategies as st

from torusmoments.measures import (CircleUniform, Discrete, Example1, GridDensity, Lebesgue, Mixture, MomentTable,
                                   ParametricCurve, QuadratureError, implicit_curve, implicit_curve_parametrization,
                                   moments_curve, random_discrete, sample_curve)


def test_delta_at_zero_has_unit_moments():
    t = Discrete([[0.0, 0.0]], [1.0]).moments(3)
    assert np.allclose(t.values, 1.0)


def test_sign_convention_single_atom():
    x = 0.1
    t = Discrete([[x]], [1.0]).moments(2)
    assert t[[1]] == pytest.approx(np.exp(-2j * np.pi * x))
    assert t[[-2]] == pytest.approx(np.exp(4j * np.pi * x))


def test_discrete_moments_match_direct_sum(rng):
    pts = rng.random((7, 2))
    w = rng.random(7) + 1j * rng.random(7)
    t = Discrete(pts, w).moments(4)
    for k in t.indices()[::7]:
        direct = np.sum(w * np.exp(-2j * np.pi * pts @ k))
        assert t[k] == pytest.approx(direct, abs=1e-13)


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_real_measure_moments_are_conjugate_symmetric(n, seed):
    mu = random_discrete(2, 5, seed=seed)
    v = mu.moments(n).values
    assert np.allclose(v, np.conj(v[::-1, ::-1]), atol=1e-13)
    assert v[n, n] == pytest.approx(1.0)


def test_moment_table_indexing_and_truncation():
    t = random_discrete(1, 3, seed=1).moments(5)
    s = t.truncate(2)
    assert s.order == 2 and s[[1]] == t[[1]]
    with pytest.raises(IndexError):
        s[[3]]
    with pytest.raises(ValueError):
        t.truncate(6)
    assert (t + t)[[2]] == 2 * t[[2]]
    assert (0.5 * t)[[2]] == 0.5 * t[[2]]


def test_circle_bessel_matches_curve_quadrature():
    c = CircleUniform(np.array([0.2, 0.7]), 1 / 3)
    a = c.moments(12).values
    b = moments_curve(c, 12).values
    assert np.max(np.abs(a - b)) < 1e-12


def test_circle_rejects_bad_radius():
    with pytest.raises(ValueError):
        CircleUniform(np.zeros(2), 0.6)


def test_curve_quadrature_reports_failure():
    curve = ParametricCurve(implicit_curve_parametrization, max_panels=4)
    with pytest.raises(QuadratureError):
        curve.moments(40)


def test_implicit_curve_lies_on_level_set():
    t = np.linspace(0, 1, 200, endpoint=False)
    pts, speed = implicit_curve_parametrization(t)
    a, b = np.cos(2 * np.pi * pts[:, 0]), np.cos(2 * np.pi * pts[:, 1])
    assert np.max(np.abs((a + 1) * (b + 1) - 1.25)) < 1e-13
    assert np.all(speed > 0)


def test_implicit_curve_speed_matches_finite_differences():
    t = np.linspace(0.01, 0.99, 50)
    h = 1e-6
    p_plus, _ = implicit_curve_parametrization(t + h)
    p_minus, _ = implicit_curve_parametrization(t - h)
    diff = (p_plus - p_minus + 0.5) % 1.0 - 0.5
    fd = np.hypot(diff[:, 0], diff[:, 1]) / (2 * h)
    _, speed = implicit_curve_parametrization(t)
    assert np.allclose(fd, speed, rtol=1e-6)


def test_implicit_curve_moments_are_real_and_normalized():
    t = implicit_curve().moments(8)
    assert t[[0, 0]] == pytest.approx(1.0, abs=1e-13)
    # symmetric under x -> -x and y -> -y, so the moments are real
    assert np.max(np.abs(t.values.imag)) < 1e-12


def test_sample_curve_equal_arclength():
    c = implicit_curve()
    s = 64
    atoms = sample_curve(c, s)
    t = c.sample(s)
    # arclength between consecutive parameters should be L / s
    length = c.length()
    edges = np.append(t, 1.0)
    arcs = [scipy.integrate.quad(lambda u: implicit_curve_parametrization(np.array([u]))[1][0], a, b)[0]
            for a, b in zip(edges[:-1], edges[1:])]
    assert np.allclose(arcs, length / s, rtol=1e-8)
    assert np.allclose(atoms.weights, 1 / s)


def test_random_discrete_is_seeded_and_separated():
    a = random_discrete(2, 15, seed=3, min_separation=0.15)
    b = random_discrete(2, 15, seed=3, min_separation=0.15)
    assert np.array_equal(a.points, b.points)
    assert a.separation >= 0.15
    assert a.weights.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        random_discrete(2, 50, seed=0, min_separation=0.4, max_tries=200)


def test_grid_density_moments_of_trig_polynomial():
    m = 16
    x = np.arange(m) / m
    vals = 1 + np.cos(2 * np.pi * x)
    t = GridDensity(vals).moments(3)
    assert np.allclose(t.values, [0, 0, 0.5, 1, 0.5, 0, 0], atol=1e-15)


def test_lebesgue_and_mixture():
    t = Mixture([(0.5, Lebesgue(1)), (0.5, Discrete([[0.0]], [1.0]))]).moments(2)
    assert np.allclose(t.values, [0.5, 0.5, 1, 0.5, 0.5])


# --- the one-dimensional mixture with an atom, a box and an integrable pole ---

def _example1_qaws_oracle(k):
    """Independent oracle: QUADPACK with the algebraic endpoint weight for the pole."""
    c, pole = np.sqrt(2) / 3, 7 / 8

    def part(func, a, b, **kw):
        re = scipy.integrate.quad(lambda x: func(x).real, a, b, epsabs=1e-14, limit=200, **kw)[0]
        im = scipy.integrate.quad(lambda x: func(x).imag, a, b, epsabs=1e-14, limit=200, **kw)[0]
        return re + 1j * im

    e = lambda x: np.exp(-2j * np.pi * k * x)
    val = e(1 / 8) / 3 + 8 / 9 * part(e, 0.25, 0.625)
    # |x - 7/8|^(-1/2) as the weight (b - x)^(-1/2) on the left half and (x - a)^(-1/2) on the right half
    val += c * part(e, 0.75, pole, weight="alg", wvar=(0.0, -0.5))
    val += c * part(e, pole, 1.0, weight="alg", wvar=(-0.5, 0.0))
    val -= c * np.sqrt(8) * part(e, 0.75, 1.0)
    return val


def _example1_fresnel_oracle(k):
    """Closed form of the pole part with Fresnel integrals."""
    mu = Example1()
    c = np.sqrt(2) / 3
    base = np.exp(-2j * np.pi * k / 8) / 3
    if k == 0:
        box = 8 / 9 * 0.375
        pole = c * (4 * np.sqrt(1 / 8) - np.sqrt(8) / 4)
        return base + box + pole
    box = 8 / 9 * (np.exp(-2j * np.pi * k * 0.625) - np.exp(-2j * np.pi * k * 0.25)) / (-2j * np.pi * k)
    # int_0^U cos(2 pi k u^2) du = C(2 sqrt(k) U) / (2 sqrt(k)) with the scipy Fresnel convention
    kk = abs(k)
    U = np.sqrt(1 / 8)
    S, C = scipy.special.fresnel(2 * np.sqrt(kk) * U)
    chirp = C / (2 * np.sqrt(kk))
    pole = 4 * np.exp(-2j * np.pi * k * 7 / 8) * chirp
    flat = np.sqrt(8) * (np.exp(-2j * np.pi * k) - np.exp(-2j * np.pi * k * 0.75)) / (-2j * np.pi * k)
    return base + box + c * (pole - flat)


@pytest.mark.parametrize("k", [0, 1, 2, 5, 13, 19])
def test_example1_moments_against_fresnel(k):
    t = Example1().moments(19)
    assert t[[k]] == pytest.approx(_example1_fresnel_oracle(k), abs=1e-10)
    assert t[[-k]] == pytest.approx(np.conj(_example1_fresnel_oracle(k)), abs=1e-10)


@pytest.mark.parametrize("k", [0, 3, 19])
def test_example1_moments_against_weighted_quadrature(k):
    assert Example1().moments(19)[[k]] == pytest.approx(_example1_qaws_oracle(k), abs=1e-10)


def test_example1_parts_and_first_moment():
    mu = Example1()
    assert mu.total_mass == pytest.approx(1.0, abs=1e-14)
    assert mu.mid_cdf(np.array([0.2]))[0] == pytest.approx(1 / 3)
    assert mu.mid_cdf(np.array([0.7]))[0] == pytest.approx(2 / 3)
    assert mu.mid_cdf(np.array([1.0]))[0] == pytest.approx(1.0)
    assert mu.mid_cdf(np.array([0.125]))[0] == pytest.approx(1 / 6)
    assert mu.first_moment() == pytest.approx(23 / 48, abs=1e-14)
