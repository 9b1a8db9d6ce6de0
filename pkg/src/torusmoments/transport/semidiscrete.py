"""Semidiscrete optimal transport between a grid density and a discrete measure on T^2.

The dual objective in the weights ``w`` of the atoms ``x_j`` is::

    f(w) = sum_j lambda_j w_j + sum_j int_{Omega_j(w)} (|x_j - y| - w_j) p(y) dy,

with Laguerre cells ``Omega_j(w) = {y : |x_j - y| - w_j <= |x_i - y| - w_i}``.
It is concave with gradient ``lambda_j - mass(Omega_j(w))`` and its maximum
is the Wasserstein-1 distance.  Integrals are midpoint sums over the grid
nodes ``j / m``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator

from .._validation import check_points

logger = logging.getLogger(__name__)

_METRICS = {"l1": 1, "l2": 2, "linf": np.inf}
# distance matrices up to this many entries are kept in memory
PRECOMPUTE_ENTRIES = 30_000_000
_NODE_CHUNK = 65536


@dataclass
class SemidiscreteProblem:
    """Grid density against weighted atoms.

    Parameters
    ----------
    density : ndarray of shape (m,) * d
        Values at the nodes ``j / m``; nonnegative, with grid mass one.
    points : ndarray of shape (s, d)
    weights : ndarray of shape (s,)
        Nonnegative, summing to one.
    metric : {'l2', 'l1', 'linf'}
        Wrap-around norm for ``|x - y|``.
    """

    density: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    metric: str = "l2"
    mass_tol: float = 1e-6
    nodes: np.ndarray = field(init=False, repr=False)
    cell_mass: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = np.asarray(self.density)
        if np.iscomplexobj(p):
            if np.abs(p.imag).max() > 1e-10 * max(1.0, np.abs(p.real).max()):
                raise ValueError("density must be real")
            p = p.real
        p = np.asarray(p, dtype=float)
        if p.ndim == 0 or len(set(p.shape)) != 1:
            raise ValueError("density must be sampled on a cube m^d")
        floor = -1e-10 * max(1.0, p.max())
        if p.min() < floor:
            raise ValueError(f"density has negative values (min {p.min():.3g})")
        p = np.maximum(p, 0.0)
        mass = p.sum() / p.size
        if abs(mass - 1.0) > self.mass_tol:
            raise ValueError(f"density mass is {mass:.9g}, expected 1")
        self.density = p
        d = p.ndim
        self.points = check_points(self.points, d)
        lam = np.asarray(self.weights, dtype=float).ravel()
        if lam.shape[0] != len(self.points):
            raise ValueError(f"got {lam.shape[0]} weights for {len(self.points)} atoms")
        if lam.min() < 0 or abs(lam.sum() - 1.0) > self.mass_tol:
            raise ValueError("atom weights must be nonnegative and sum to one")
        self.weights = lam
        if self.metric not in _METRICS:
            raise ValueError(f"metric must be one of {sorted(_METRICS)}, got {self.metric!r}")
        m = p.shape[0]
        axes = [np.arange(m) / m] * d
        self.nodes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        self.cell_mass = p.ravel() / p.size
        self._distances = None
        self._tree = None

    @property
    def size(self):
        return len(self.points)

    @property
    def grid(self):
        return self.density.shape[0]

    def offsets(self, nodes, atoms):
        diff = nodes - atoms
        return diff - np.round(diff)

    def distances(self):
        """Node-by-atom distance matrix, or ``None`` if it would be too large."""
        if self._distances is None and self.size * len(self.nodes) <= PRECOMPUTE_ENTRIES:
            out = np.empty((len(self.nodes), self.size))
            for start in range(0, len(self.nodes), _NODE_CHUNK):
                y = self.nodes[start:start + _NODE_CHUNK]
                off = self.offsets(y[:, None, :], self.points[None, :, :])
                out[start:start + _NODE_CHUNK] = _norm(off, self.metric)
            self._distances = out
        return self._distances

    def tree(self):
        if self._tree is None:
            self._tree = cKDTree(self.points, boxsize=1.0)
        return self._tree


def _norm(off, metric):
    a = np.abs(off)
    if metric == "l2":
        return np.sqrt(np.sum(a * a, axis=-1))
    if metric == "l1":
        return a.sum(axis=-1)
    return a.max(axis=-1)


def _assign_dense(D, w):
    cost = D - w[None, :]
    j = np.argmin(cost, axis=1)  # argmin returns the first minimizer: ties go to the smallest j
    return j, cost[np.arange(len(j)), j]


def _assign_tree(problem, w, nodes):
    """Cell assignment by k-nearest-neighbour candidates with an exact pruning radius."""
    tree = problem.tree()
    p = _METRICS[problem.metric]
    s = problem.size
    labels = np.empty(len(nodes), dtype=int)
    best = np.empty(len(nodes))
    pending = np.arange(len(nodes))
    k = min(16, s)
    while len(pending):
        dist, idx = tree.query(nodes[pending], k=k, p=p)
        dist, idx = dist.reshape(len(pending), k), idx.reshape(len(pending), k)
        cost = dist - w[idx]
        minc = cost.min(axis=1, keepdims=True)
        # among equal costs the smallest atom index wins
        tied = np.where(cost == minc, idx, s)
        labels[pending] = tied.min(axis=1)
        best[pending] = minc[:, 0]
        # any atom beyond the k-th neighbour costs at least dist_k - max(w)
        complete = (k == s) | (dist[:, -1] - w.max() > minc[:, 0])
        pending = pending[~complete]
        k = min(2 * k, s)
    return labels, best


def laguerre_partition(problem, w):
    """Assign every grid node to its Laguerre cell.

    Returns
    -------
    labels : ndarray of shape (m^d,)
        Cell index of each node (ties to the smallest index).
    masses : ndarray of shape (s,)
        Cell masses.
    moments : ndarray of shape (s, d)
        First moments ``int_{Omega_j} y p(y) dy`` with ``y`` taken as the
        representative closest to ``x_j``.
    cost : float
        ``sum_y min_j (|x_j - y| - w_j) p(y) / m^d``.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (problem.size,) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be a finite vector with one entry per atom")
    D = problem.distances()
    if D is not None:
        labels, best = _assign_dense(D, w)
    else:
        labels = np.empty(len(problem.nodes), dtype=int)
        best = np.empty(len(problem.nodes))
        for start in range(0, len(problem.nodes), _NODE_CHUNK):
            sl = slice(start, start + _NODE_CHUNK)
            labels[sl], best[sl] = _assign_tree(problem, w, problem.nodes[sl])
    cm = problem.cell_mass
    masses = np.bincount(labels, weights=cm, minlength=problem.size)
    off = problem.offsets(problem.nodes, problem.points[labels])
    d = problem.points.shape[1]
    moments = masses[:, None] * problem.points + np.stack(
        [np.bincount(labels, weights=cm * off[:, i], minlength=problem.size) for i in range(d)], axis=1)
    cost = float(np.dot(best, cm))
    return labels, masses, moments, cost


def semidiscrete_objective(problem, w):
    """Dual objective ``f(w)`` and its gradient ``lambda - mass(Omega(w))``."""
    w = np.asarray(w, dtype=float)
    _, masses, _, cost = laguerre_partition(problem, w)
    f = float(np.dot(problem.weights, w)) + cost
    return f, problem.weights - masses


@dataclass
class TransportResult:
    w1: float
    weights: np.ndarray
    iterations: int
    gradient_inf_norm: float
    termination: str
    history: list = field(default_factory=list)

    @property
    def converged(self):
        return self.termination in ("objective_change", "gradient")

    def to_dict(self):
        return {"w1": self.w1, "iterations": self.iterations,
                "gradient_inf_norm": self.gradient_inf_norm, "termination": self.termination}


def w1_semidiscrete(problem, w0=None, max_iter=100, ftol=1e-9, gtol=1e-5, c1=1e-4, max_halvings=40):
    """Maximize the dual objective by BFGS with Armijo backtracking.

    Stops when the objective changes by less than ``ftol``, when
    ``||grad f||_inf < gtol``, or after ``max_iter`` iterations.  Failure to
    converge is reported in ``termination``, not raised.

    Returns
    -------
    TransportResult
    """
    s = problem.size
    w = np.zeros(s) if w0 is None else np.array(w0, dtype=float)
    f, g = semidiscrete_objective(problem, w)
    history = [f]
    if s == 1:
        return TransportResult(f, w, 0, float(np.abs(g).max()), "gradient", history)
    # minimize -f; its gradient is -g
    H = np.eye(s)
    termination = "max_iterations"
    it = 0
    for it in range(1, max_iter + 1):
        ginf = float(np.abs(g).max())
        if ginf < gtol:
            termination, it = "gradient", it - 1
            break
        direction = H @ g  # ascent direction for f
        slope = float(np.dot(g, direction))
        if slope <= 0:
            H = np.eye(s)
            direction, slope = g.copy(), float(np.dot(g, g))
        alpha = 1.0
        for _ in range(max_halvings):
            w_new = w + alpha * direction
            f_new, g_new = semidiscrete_objective(problem, w_new)
            if f_new >= f + c1 * alpha * slope:
                break
            alpha *= 0.5
        else:
            termination = "line_search"
            break
        step = w_new - w
        y = g - g_new  # change of the gradient of -f
        sy = float(np.dot(step, y))
        if sy > 1e-14:
            if it == 1:
                H *= sy / float(np.dot(y, y))
            rho = 1.0 / sy
            Hy = H @ y
            H += (rho * rho * np.dot(y, Hy) + rho) * np.outer(step, step) - rho * (np.outer(Hy, step) + np.outer(step, Hy))
        change = abs(f_new - f)
        w, f, g = w_new, f_new, g_new
        history.append(f)
        logger.debug("iteration %d: f=%.12g |grad|=%.3g alpha=%.3g", it, f, np.abs(g).max(), alpha)
        if change < ftol:
            termination = "objective_change"
            break
        if np.abs(g).max() < gtol:
            termination = "gradient"
            break
    return TransportResult(f, w, it, float(np.abs(g).max()), termination, history)


class SemidiscreteTransport(BaseEstimator):
    """Wasserstein-1 distance between a grid density and a discrete measure.

    Parameters
    ----------
    metric : {'l2', 'l1', 'linf'}, default='l2'
    max_iter : int, default=100
    ftol : float, default=1e-9
    gtol : float, default=1e-5

    Attributes
    ----------
    w1_ : float
    weights_ : ndarray of shape (s,)
        Optimal dual weights.
    n_iter_ : int
    termination_ : str
    """

    def __init__(self, metric="l2", max_iter=100, ftol=1e-9, gtol=1e-5):
        self.metric = metric
        self.max_iter = max_iter
        self.ftol = ftol
        self.gtol = gtol

    def fit(self, density, points, weights=None):
        points = check_points(points, np.ndim(density))
        if weights is None:
            weights = np.full(len(points), 1.0 / len(points))
        self.problem_ = SemidiscreteProblem(density, points, weights, self.metric)
        res = w1_semidiscrete(self.problem_, max_iter=self.max_iter, ftol=self.ftol, gtol=self.gtol)
        self.result_ = res
        self.w1_ = res.w1
        self.weights_ = res.weights
        self.n_iter_ = res.iterations
        self.termination_ = res.termination
        return self

    def predict(self, X):
        """Laguerre cell index of each point under the fitted weights."""
        X = check_points(X, self.problem_.points.shape[1])
        off = self.problem_.offsets(X[:, None, :], self.problem_.points[None, :, :])
        cost = _norm(off, self.metric) - self.weights_[None, :]
        return np.argmin(cost, axis=1)
