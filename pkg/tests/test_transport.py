import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from torusmoments.kernels import KernelSpec, TrigPolynomial, best_delta_poly, convolve, eval_grid, fejer_abs_moment
from torusmoments.measures import CircleUniform, Discrete, Example1, GridDensity, Lebesgue, Mixture
from torusmoments.transport import (BernoulliProfile, SemidiscreteProblem, SemidiscreteTransport, bernoulli_sawtooth,
                                    laguerre_partition, semidiscrete_objective, w1_1d, w1_auto, w1_semidiscrete)
from torusmoments.transport import semidiscrete as sd

DELTA0 = Discrete([[0.0]], [1.0])


def _random_discrete_1d(rng, size):
    return Discrete(rng.random(size), rng.dirichlet(np.ones(size)))


def _lp_oracle(a, b):
    """Circle W1 between two discrete measures as a transport linear program."""
    x, y = a.points[:, 0], b.points[:, 0]
    diff = np.abs(x[:, None] - y[None, :])
    cost = np.minimum(diff, 1 - diff)
    p, q = len(x), len(y)
    A = np.vstack([np.kron(np.eye(p), np.ones(q)), np.kron(np.ones(p), np.eye(q))])
    res = linprog(cost.ravel(), A_eq=A, b_eq=np.concatenate([a.weights, b.weights]), bounds=(0, None),
                  method="highs")
    return res.fun


# --- one dimension ---

def test_sawtooth():
    assert np.allclose(bernoulli_sawtooth([0.0, 0.25, 0.75, 1.25]), [0.0, 0.25, -0.25, 0.25])


def test_profile_of_dirac_is_shifted_sawtooth():
    a = 0.3
    t = np.array([0.1, 0.5, 0.9])
    assert np.allclose(BernoulliProfile(Discrete([[a]], [1.0]))(t), bernoulli_sawtooth(t - a))


@pytest.mark.parametrize("mu", [Example1(), Discrete([[0.2], [0.7]], [0.3, 0.7]), KernelSpec("fejer", 5).polynomial(),
                                Lebesgue(1)])
def test_profile_integrates_to_zero(mu):
    h = BernoulliProfile(mu)
    edges = np.union1d([0.0, 1.0], h.breakpoints)
    assert abs(h.integral(edges[:-1], edges[1:]).sum()) < 1e-12


def test_profile_of_polynomial_matches_generic_formula():
    p = TrigPolynomial(np.array([0.1 - 0.2j, 0.3, 1.0, 0.3, 0.1 + 0.2j]))
    t = np.linspace(0.01, 0.99, 11)
    generic = p.mid_cdf(t) - (t + 0.5) + p.first_moment()
    assert np.allclose(BernoulliProfile(p)(t), generic)


def test_two_diracs():
    assert w1_1d(DELTA0, Discrete([[0.5]], [1.0])) == pytest.approx(0.5, abs=1e-14)
    assert w1_1d(DELTA0, Discrete([[0.9]], [1.0])) == pytest.approx(0.1, abs=1e-12)
    # the uncentred L1 norm of the profile difference is not the distance here
    assert w1_1d(DELTA0, Discrete([[0.1]], [1.0]), center="zero") == pytest.approx(0.18)


def test_best_approximation_and_fejer_values():
    for n in (1, 4, 17):
        assert w1_1d(DELTA0, best_delta_poly(n)) == pytest.approx(1 / (4 * (n + 1)), abs=1e-12)
        assert w1_1d(DELTA0, KernelSpec("fejer", n).polynomial()) == pytest.approx(fejer_abs_moment(n), abs=1e-12)


def test_lebesgue_against_dirac_and_example1():
    assert w1_1d(Lebesgue(1), DELTA0) == pytest.approx(0.25, abs=1e-13)
    # W1(Example1, Lebesgue) by a brute-force median of the profile difference on a fine midpoint grid
    h = BernoulliProfile(Example1()) - BernoulliProfile(Lebesgue(1))
    t = (np.arange(2 ** 22) + 0.5) / 2 ** 22
    v = h(t)
    assert w1_1d(Example1(), Lebesgue(1)) == pytest.approx(np.mean(np.abs(v - np.median(v))), abs=1e-6)


@pytest.mark.parametrize("seed", range(8))
def test_discrete_pairs_against_linear_program(seed):
    rng = np.random.default_rng(seed)
    a, b = _random_discrete_1d(rng, 4), _random_discrete_1d(rng, 5)
    assert w1_1d(a, b) == pytest.approx(_lp_oracle(a, b), abs=1e-9)


def test_polynomial_against_discretized_linear_program():
    p = KernelSpec("fejer", 3).polynomial()
    m = 400
    grid = Discrete((np.arange(m) + 0.5)[:, None] / m, p((np.arange(m) + 0.5) / m) / m)
    b = Discrete([[0.3], [0.8]], [0.4, 0.6])
    assert w1_1d(p, b) == pytest.approx(_lp_oracle(grid.normalized(), b), abs=5e-4)


def test_mixture_profile():
    mix = Mixture([(0.5, DELTA0), (0.5, Discrete([[0.5]], [1.0]))])
    assert w1_1d(mix, Lebesgue(1)) == pytest.approx(0.125, abs=1e-12)


def test_rejections():
    with pytest.raises(ValueError):
        w1_1d(Discrete([[0.0, 0.0]], [1.0]), Discrete([[0.5, 0.5]], [1.0]))
    with pytest.raises(ValueError):
        w1_1d(Discrete([[0.0]], [2.0]), DELTA0)
    with pytest.raises(ValueError):
        w1_1d(DELTA0, DELTA0, center="mean")


@given(st.integers(0, 2 ** 31), st.integers(1, 6), st.integers(1, 6))
def test_metric_axioms(seed, p, q):
    rng = np.random.default_rng(seed)
    a, b, c = _random_discrete_1d(rng, p), _random_discrete_1d(rng, q), _random_discrete_1d(rng, 3)
    ab, ba = w1_1d(a, b), w1_1d(b, a)
    assert abs(ab - ba) <= 1e-10
    assert w1_1d(a, a) <= 1e-10
    assert ab <= w1_1d(a, c) + w1_1d(c, b) + 1e-8


def test_jackson_beats_fejer_for_even_degrees():
    for n in range(8, 41, 4):
        jackson = w1_1d(DELTA0, KernelSpec("jackson", n).polynomial())
        assert jackson <= w1_1d(DELTA0, KernelSpec("fejer", n).polynomial())


# --- two dimensions ---

def _uniform(m):
    return np.ones((m, m))


def test_single_atom_cell_holds_all_mass():
    P = SemidiscreteProblem(_uniform(20), [[0.3, 0.3]], [1.0])
    labels, masses, moments, _ = laguerre_partition(P, np.zeros(1))
    assert np.all(labels == 0) and masses[0] == pytest.approx(1.0)


def test_two_symmetric_atoms_split_mass():
    m = 40
    P = SemidiscreteProblem(_uniform(m), [[0.25, 0.5], [0.75, 0.5]], [0.5, 0.5])
    _, masses, _, _ = laguerre_partition(P, np.zeros(2))
    assert np.allclose(masses, 0.5, atol=2 / m)


def test_raising_a_weight_grows_its_cell(rng):
    P = SemidiscreteProblem(_uniform(64), rng.random((6, 2)), np.full(6, 1 / 6))
    w = rng.normal(0, 0.02, 6)
    _, before, _, _ = laguerre_partition(P, w)
    w2 = w.copy()
    w2[2] += 0.05
    _, after, _, _ = laguerre_partition(P, w2)
    assert after[2] > before[2]


def test_gradient_sums_to_zero_and_matches_finite_differences(rng):
    m = 200
    dens = 1 + 0.5 * np.cos(2 * np.pi * np.arange(m) / m)[:, None] * np.ones(m)
    P = SemidiscreteProblem(dens, rng.random((8, 2)), rng.dirichlet(np.ones(8)))
    w = rng.normal(0, 0.05, 8)
    f, g = semidiscrete_objective(P, w)
    assert abs(g.sum()) < 1e-12
    h = 1e-3
    fd = [(semidiscrete_objective(P, w + h * e)[0] - semidiscrete_objective(P, w - h * e)[0]) / (2 * h)
          for e in np.eye(8)]
    assert np.allclose(fd, g, atol=1e-3)


def test_objective_at_zero_is_transport_cost_to_nearest_atom():
    P = SemidiscreteProblem(_uniform(30), [[0.5, 0.5]], [1.0])
    f, _ = semidiscrete_objective(P, np.zeros(1))
    y = np.arange(30) / 30 - 0.5
    brute = np.mean(np.hypot(*np.meshgrid(y, y)))
    assert f == pytest.approx(brute)


def test_uniform_against_central_atom():
    res = w1_semidiscrete(SemidiscreteProblem(_uniform(502), [[0.5, 0.5]], [1.0]))
    assert res.w1 == pytest.approx((np.sqrt(2) + np.arcsinh(1)) / 6, abs=1e-5)


def test_tree_assignment_matches_dense(rng, monkeypatch):
    m = 96
    pts = rng.random((40, 2))
    lam = rng.dirichlet(np.ones(40))
    w = rng.normal(0, 0.03, 40)
    for metric in ("l2", "l1", "linf"):
        dense = laguerre_partition(SemidiscreteProblem(_uniform(m), pts, lam, metric), w)
        monkeypatch.setattr(sd, "PRECOMPUTE_ENTRIES", 0)
        tree = laguerre_partition(SemidiscreteProblem(_uniform(m), pts, lam, metric), w)
        monkeypatch.setattr(sd, "PRECOMPUTE_ENTRIES", 30_000_000)
        assert np.mean(dense[0] == tree[0]) > 0.999
        assert dense[3] == pytest.approx(tree[3], abs=1e-12)


def test_solver_ascends_and_converges(atoms15):
    n = 10
    dens = eval_grid(convolve(atoms15.moments(n), KernelSpec("fejer", n, 2)), 128)
    P = SemidiscreteProblem(dens, atoms15.points, atoms15.weights)
    res = w1_semidiscrete(P)
    assert res.w1 >= semidiscrete_objective(P, np.zeros(15))[0]
    assert res.converged
    assert res.gradient_inf_norm <= 1e-5 or res.termination == "objective_change"


def test_grid_refinement_is_consistent():
    atom = [[0.5, 0.5]]
    dens = lambda m: eval_grid(convolve(Discrete(atom, [1.0]).moments(8), KernelSpec("fejer", 8, 2)), m)
    a = w1_semidiscrete(SemidiscreteProblem(dens(100), atom, [1.0])).w1
    b = w1_semidiscrete(SemidiscreteProblem(dens(200), atom, [1.0])).w1
    assert abs(a - b) <= 5 / 100


def test_iteration_cap_is_reported(atoms15):
    dens = eval_grid(convolve(atoms15.moments(6), KernelSpec("fejer", 6, 2)), 64)
    res = w1_semidiscrete(SemidiscreteProblem(dens, atoms15.points, atoms15.weights), max_iter=1, ftol=0, gtol=0)
    assert res.termination == "max_iterations" and not res.converged


def test_problem_validation():
    with pytest.raises(ValueError):
        SemidiscreteProblem(-_uniform(8), [[0.1, 0.1]], [1.0])
    with pytest.raises(ValueError):
        SemidiscreteProblem(2 * _uniform(8), [[0.1, 0.1]], [1.0])
    with pytest.raises(ValueError):
        SemidiscreteProblem(_uniform(8), [[0.1, 0.1]], [0.5])
    with pytest.raises(ValueError):
        SemidiscreteProblem(_uniform(8), [[0.1, 0.1]], [1.0], metric="l3")


def test_estimator():
    est = SemidiscreteTransport().fit(_uniform(64), [[0.25, 0.5], [0.75, 0.5]])
    assert est.get_params()["metric"] == "l2"
    assert est.predict([[0.2, 0.5], [0.8, 0.5]]).tolist() == [0, 1]
    assert est.w1_ > 0


def test_dispatch():
    p = KernelSpec("fejer", 6).polynomial()
    assert w1_auto(DELTA0, p) == pytest.approx(fejer_abs_moment(6))
    c = CircleUniform(np.zeros(2), 1 / 3)
    dens = convolve(c.moments(10), KernelSpec("fejer", 10, 2))
    res = w1_auto(dens, c, grid=96, samples=200, return_result=True)
    assert res.w1 > 0
    g = GridDensity(np.ones((32, 32)))
    assert w1_auto(g, Discrete([[0.5, 0.5]], [1.0])) == pytest.approx(0.3826, abs=2e-3)
    with pytest.raises(NotImplementedError):
        w1_auto(Discrete([[0.1, 0.1]], [1.0]), Discrete([[0.5, 0.5]], [1.0]))


def test_sampled_circle_close_to_circle():
    # triangle inequality: W1(mu_s, mu) <= sqrt(2) L / s, so two sample sets are within the sum of bounds
    c = CircleUniform(np.zeros(2), 1 / 3)
    dens = eval_grid(convolve(c.moments(20), KernelSpec("fejer", 20, 2)), 128)
    from torusmoments.measures import sample_curve
    w_small = w1_auto(GridDensity(dens), sample_curve(c, 50))
    w_large = w1_auto(GridDensity(dens), sample_curve(c, 400))
    L = c.arclength
    assert abs(w_small - w_large) <= np.sqrt(2) * L * (1 / 50 + 1 / 400)
