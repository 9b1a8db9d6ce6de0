"""Sum-of-squares support indicators built from the singular vectors of the moment matrix.

For the left singular vectors ``u_j`` of ``T_n`` (as polynomials
``u_j(x) = e_n(x)^* U[:, j]``) and the numerical rank ``r``::

    p1(x) = (1/N) sum_{j <= r} |u_j(x)|^2,    p0(x) = (1/N) sum_{j > r} |u_j(x)|^2,

so that ``p1 + p0 = 1``.  ``p1`` equals one on the Zariski closure of the
support and decays away from it.  The bound helpers return ``nan`` wherever
the hypotheses of the corresponding estimate are not met.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_order, check_points, min_separation, wrap_distance
from .kernels import KernelSpec, TrigPolynomial, _resolve_moments, convolve
from .moment_matrix import DEFAULT_RANK_TOL, MomentMatrix, exponential_vectors, grid_indices, svd

_GRID_CHUNK_BYTES = 2 ** 27


@dataclass
class SosPair:
    """Grid values of ``p1`` and ``p0`` on ``{j / m}^d``."""

    n: int
    dim: int
    rank: int
    m: int
    p1: np.ndarray
    p0: np.ndarray
    factors: object

    @property
    def partition_error(self):
        return float(np.abs(self.p1 + self.p0 - 1.0).max())


def _sum_squares_grid(U, n, dim, m):
    """``sum_j |u_j(x)|^2`` on the grid, one zero-padded inverse FFT per column."""
    N = U.shape[0]
    out = np.zeros((m,) * dim)
    if U.shape[1] == 0:
        return out
    chunk = max(1, _GRID_CHUNK_BYTES // (16 * m ** dim))
    for start in range(0, U.shape[1], chunk):
        cols = U[:, start:start + chunk]
        b = cols.shape[1]
        spectrum = np.zeros((b,) + (m,) * dim, dtype=complex)
        spectrum[(slice(None),) + (slice(0, n + 1),) * dim] = cols.T.reshape((b,) + (n + 1,) * dim)
        axes = tuple(range(1, dim + 1))
        vals = np.fft.ifftn(spectrum, axes=axes) * m ** dim
        out += np.sum(vals.real ** 2 + vals.imag ** 2, axis=0)
    return out


def sos_pair(factors, r=None, m=502, independent=False):
    """Grid values of the signal and noise polynomials.

    Parameters
    ----------
    factors : SvdFactors
    r : int, optional
        Rank; defaults to ``factors.rank``.
    m : int
        Grid nodes per axis; must be at least ``n + 1``.
    independent : bool
        Evaluate both sums explicitly instead of completing one of them
        by ``p0 = 1 - p1``; needs complete factors.
    """
    n, dim, N = factors.n, factors.dim, factors.N
    r = factors.rank if r is None else check_order(r, "r")
    if r > N:
        raise ValueError(f"rank {r} exceeds N = {N}")
    if m < n + 1:
        raise ValueError(f"grid size {m} is smaller than n + 1 = {n + 1}")
    U = factors.U
    if r > U.shape[1]:
        raise ValueError(f"rank {r} needs more singular vectors than the {U.shape[1]} available")
    if independent:
        if not factors.complete:
            raise ValueError("independent evaluation needs the full set of singular vectors")
        p1 = _sum_squares_grid(U[:, :r], n, dim, m) / N
        p0 = _sum_squares_grid(U[:, r:], n, dim, m) / N
    elif factors.complete and N - r < r:
        p0 = _sum_squares_grid(U[:, r:], n, dim, m) / N
        p1 = 1.0 - p0
    else:
        p1 = _sum_squares_grid(U[:, :r], n, dim, m) / N
        p0 = 1.0 - p1
    return SosPair(n, dim, r, m, p1, p0, factors)


def p1_at(factors, X, r=None):
    """``p1`` at arbitrary points ``X`` of shape (M, d)."""
    r = factors.rank if r is None else r
    X = check_points(X, factors.dim)
    E = exponential_vectors(grid_indices(factors.n, factors.dim), X)
    vals = E.conj().T @ factors.U[:, :r]
    return np.sum(np.abs(vals) ** 2, axis=1) / factors.N


def _scalar_or_array(x, out):
    return float(out[0]) if np.ndim(x) <= 1 and len(out) == 1 else out


def p1_offsupport_bound(x, atoms, weights, n):
    """Upper bound on ``p1`` away from the atoms of a discrete measure.

    ``(n+1)^-2 * |lambda_max| / |lambda_min| * (1/3) * sum_j |x - x_j|_inf^-2``,
    valid when ``n + 1 > 4 d / sep`` (``sep`` the minimal wrap-around
    max-norm distance of the atoms) and ``x`` is not an atom.
    """
    atoms = check_points(atoms)
    d = atoms.shape[1]
    X = check_points(x, d)
    w = np.abs(np.asarray(weights))
    sep = min_separation(atoms)
    dist = wrap_distance(X[:, None, :], atoms[None, :, :])
    with np.errstate(divide="ignore"):
        val = (w.max() / w.min()) * np.sum(1.0 / dist ** 2, axis=1) / (3.0 * (n + 1) ** 2)
    applicable = (n + 1 > 4 * d / sep) & (dist.min(axis=1) > 0)
    return _scalar_or_array(x, np.where(applicable, val, np.nan))


def p1_nearsupport_bound(x, atoms, n):
    """Upper bound on ``p1`` close to the support and the companion Taylor lower bound.

    Returns ``(upper, lower)`` with
    ``upper = 1 - 3^(d-1) (2d - 1) / (2^d d^(2 + d/2)) (n+1)^2 dist^2``,
    valid when ``n + 1 > 2 sqrt(d) / sep`` and ``dist <= sqrt(d) / (n+1)``,
    and ``lower = 1 - 2 pi^2 d^2 n^2 dist^2`` (no hypotheses).
    """
    atoms = check_points(atoms)
    d = atoms.shape[1]
    X = check_points(x, d)
    dist = wrap_distance(X[:, None, :], atoms[None, :, :]).min(axis=1)
    sep = min_separation(atoms)
    const = 3.0 ** (d - 1) * (2 * d - 1) / (2.0 ** d * d ** (2 + d / 2))
    upper = 1.0 - const * (n + 1) ** 2 * dist ** 2
    applicable = (n + 1 > 2 * np.sqrt(d) / sep) & (dist <= np.sqrt(d) / (n + 1))
    upper = np.where(applicable, upper, np.nan)
    lower = 1.0 - 2.0 * np.pi ** 2 * d ** 2 * n ** 2 * dist ** 2
    return _scalar_or_array(x, upper), _scalar_or_array(x, lower)


def vandermonde_bound(x, atoms, n):
    """``1 - sigma_min(A)^2 / N`` for ``A = [e_n(x_1) ... e_n(x_r) e_n(x)]``, an upper bound on ``p1(x)``."""
    atoms = check_points(atoms)
    d = atoms.shape[1]
    X = check_points(x, d)
    idx = grid_indices(n, d)
    base = exponential_vectors(idx, atoms)
    N = (n + 1) ** d
    out = np.empty(len(X))
    for i, xi in enumerate(X):
        A = np.hstack([base, exponential_vectors(idx, xi[None, :])])
        out[i] = 1.0 - np.linalg.svd(A, compute_uv=False)[-1] ** 2 / N
    return _scalar_or_array(x, out)


def max_degree(g):
    """Max-degree of ``g`` in the one-sided sense: the largest frequency span over the axes."""
    nz = np.argwhere(np.abs(g.coef) > 0)
    if len(nz) == 0:
        return 0
    return int((nz.max(axis=0) - nz.min(axis=0)).max())


def p1_variety_bound(y, g, n, m=None):
    """Bounds on ``p1_{n+m}(y)`` off the zero set of ``g``.

    Parameters
    ----------
    y : array_like of shape (M, d) or (d,)
    g : TrigPolynomial
        Vanishes on the support of the measure.
    n : int
        Inner degree, ``n >= m``.
    m : int, optional
        Max-degree of ``g``; defaults to :func:`max_degree`.

    Returns
    -------
    exact, loose : ndarray or float
        ``1 - ((n+1)/(n+m+1))^d |g(y)|^2 / (F_n * |g|^2)(y)`` and
        ``||g||^2 / |g(y)|^2 * m (4m+2)^d / (n+1) + d m / (n+m+1)``;
        ``nan`` where ``g(y) = 0``.
    """
    m = max_degree(g) if m is None else check_order(m, "m")
    n = check_order(n)
    if n < m:
        raise ValueError(f"need n >= m, got n={n}, m={m}")
    d = g.dim
    Y = check_points(y, d)
    gy2 = np.abs(g(Y)) ** 2
    f = g * g.conj()
    smoothed = convolve(f.moments(max(n, f.degree)), KernelSpec("fejer", n, d))
    fy = np.real(smoothed(Y))
    norm2 = g.l2_norm_squared()
    inapplicable = gy2 <= 1e-28 * max(norm2, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = 1.0 - ((n + 1.0) / (n + m + 1.0)) ** d * gy2 / fy
        loose = norm2 / gy2 * m * (4 * m + 2) ** d / (n + 1) + d * m / (n + m + 1.0)
    exact = np.where(inapplicable, np.nan, exact)
    loose = np.where(inapplicable, np.nan, loose)
    return _scalar_or_array(y, exact), _scalar_or_array(y, loose)


def svals_weight_gap(singular_values, weights, atoms, n):
    """Measured ``max_j | sigma_j / N - |lambda_j| |`` and its a-priori bound.

    Weights are sorted by decreasing modulus.  The bound
    ``|lambda_1| (1 + sqrt(e)) r / (2 (n+1) sep)`` needs ``(n+1) sep > d``;
    otherwise it is ``nan``.
    """
    atoms = check_points(atoms)
    d = atoms.shape[1]
    lam = np.sort(np.abs(np.asarray(weights)))[::-1]
    r = len(lam)
    N = (n + 1) ** d
    sigma = np.asarray(singular_values, dtype=float)[:r]
    deviation = float(np.max(np.abs(sigma / N - lam)))
    sep = min_separation(atoms)
    if (n + 1) * sep <= d:
        return deviation, np.nan
    bound = lam[0] * (1 + np.sqrt(np.e)) * r / (2.0 * (n + 1) * sep)
    return deviation, float(bound)


def implicit_curve_polynomial():
    """``cos(2 pi x) cos(2 pi y) + cos(2 pi x) + cos(2 pi y) - 1/4``."""
    c = np.zeros((3, 3), dtype=complex)
    c[[0, 0, 2, 2], [0, 2, 0, 2]] = 0.25
    c[[0, 2], [1, 1]] = 0.5
    c[[1, 1], [0, 2]] = 0.5
    c[1, 1] = -0.25
    return TrigPolynomial(c)


class SupportIndicator(BaseEstimator):
    """Signal polynomial ``p1`` of the moment matrix as a support indicator.

    Parameters
    ----------
    degree : int, default=10
        Order ``n`` of the moment matrix.
    rank : int, optional
        Fixed rank; by default the numerical rank under ``rank_tol``.
    rank_tol : float, default=1e-8
        Relative singular value threshold.
    rank_mode : {'relative', 'gap'}, default='relative'
    svd_mode : {'auto', 'dense', 'iterative'}, default='auto'
    random_state : int, RandomState or None, default=0
        Start vector of the iterative solver.

    Attributes
    ----------
    moment_matrix_ : MomentMatrix
    factors_ : SvdFactors
    singular_values_ : ndarray
    rank_ : int
    components_ : ndarray of shape (rank_, N)
        Coefficient vectors of the signal polynomials.
    """

    def __init__(self, degree=10, rank=None, rank_tol=DEFAULT_RANK_TOL, rank_mode="relative",
                 svd_mode="auto", random_state=0):
        self.degree = degree
        self.rank = rank
        self.rank_tol = rank_tol
        self.rank_mode = rank_mode
        self.svd_mode = svd_mode
        self.random_state = random_state

    def fit(self, X, y=None):
        """Fit on a :class:`MomentTable` or :class:`Measure`."""
        table = _resolve_moments(X, self.degree)
        self.moment_matrix_ = MomentMatrix(table, self.degree)
        self.factors_ = svd(self.moment_matrix_, mode=self.svd_mode, rank_tol=self.rank_tol,
                            rank_mode=self.rank_mode, random_state=self.random_state)
        if self.rank is None:
            self.rank_ = self.factors_.rank
        else:
            self.rank_ = check_order(self.rank, "rank")
            if self.rank_ > self.factors_.U.shape[1]:
                raise ValueError(f"rank {self.rank_} exceeds the {self.factors_.U.shape[1]} computed triplets")
        self.singular_values_ = self.factors_.singular_values
        self.components_ = self.factors_.U[:, :self.rank_].T
        self.n_features_in_ = table.dim
        return self

    def predict(self, X):
        """``p1`` at points of shape (M, d)."""
        check_is_fitted(self)
        return p1_at(self.factors_, check_points(X, self.n_features_in_), self.rank_)

    def predict_noise(self, X):
        """``p0 = 1 - p1`` at points of shape (M, d)."""
        return 1.0 - self.predict(X)

    def transform(self, X):
        p1 = self.predict(X)
        return np.column_stack([p1, 1.0 - p1])

    def evaluate_grid(self, m=502, independent=False):
        check_is_fitted(self)
        return sos_pair(self.factors_, self.rank_, m, independent)

    def l1_norm(self):
        """``||p1||_{L^1} = r / N``."""
        check_is_fitted(self)
        return self.rank_ / self.factors_.N
