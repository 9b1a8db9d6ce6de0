"""Multilevel Toeplitz moment matrices, FFT matvec and singular value decompositions."""

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.fft import next_fast_len
from scipy.sparse.linalg import LinearOperator
from sklearn.utils import check_random_state

from ._validation import check_order

DENSE_THRESHOLD = 4096
DEFAULT_RANK_TOL = 1e-8


class ConvergenceError(RuntimeError):
    """Iterative SVD did not converge; carries the partial result."""

    def __init__(self, message, factors=None, residual=None):
        super().__init__(message)
        self.factors = factors
        self.residual = residual


class MomentMatrix:
    """The moment matrix ``T_n = (mu_hat(k - l))`` for ``k, l`` in ``{0..n}^d``.

    Rows and columns are ordered by the multi-index ``k`` in C order
    (last coordinate fastest).  The matrix is never formed unless
    :meth:`dense` is called.

    Parameters
    ----------
    table : MomentTable
        Moments of order at least ``n``.
    n : int, optional
        Matrix order; defaults to the table order.
    dense_threshold : int, default=4096
        Largest size ``N = (n+1)^d`` for which :meth:`dense` is allowed
        without ``force=True``.
    """

    def __init__(self, table, n=None, dense_threshold=DENSE_THRESHOLD):
        n = table.order if n is None else check_order(n)
        if table.order < n:
            raise ValueError(f"moment table of order {table.order} cannot build T_{n}")
        self.table = table.truncate(n)
        self.n = n
        self.dim = table.dim
        self.N = (n + 1) ** self.dim
        self.shape = (self.N, self.N)
        self.dense_threshold = dense_threshold
        self._dense = None
        self._fft_shape = (next_fast_len(2 * n + 1),) * self.dim
        self._spectrum = self._embed(self.table.values)
        flipped = np.conj(self.table.values[(slice(None, None, -1),) * self.dim])
        self._adjoint_spectrum = self._embed(flipped)

    def __repr__(self):
        return f"MomentMatrix(dim={self.dim}, n={self.n}, N={self.N})"

    def _embed(self, g):
        n = self.n
        c = np.zeros(self._fft_shape, dtype=complex)
        idx = np.arange(-n, n + 1) % self._fft_shape[0]
        c[np.ix_(*([idx] * self.dim))] = g
        return np.fft.fftn(c)

    @property
    def is_hermitian(self):
        g = self.table.values
        flipped = np.conj(g[(slice(None, None, -1),) * self.dim])
        return bool(np.abs(g - flipped).max() <= 1e-13 * max(np.abs(g).max(), 1e-300))

    def entry(self, k, l):
        k, l = np.asarray(k), np.asarray(l)
        return self.table[k - l]

    def indices(self):
        """Multi-indices ``k`` of the rows, shape (N, d)."""
        return grid_indices(self.n, self.dim)

    def dense(self, force=False):
        """Materialize ``T_n`` as an (N, N) array."""
        if self._dense is not None:
            return self._dense
        if self.N > self.dense_threshold and not force:
            raise ValueError(f"N = {self.N} exceeds the dense threshold {self.dense_threshold}")
        n, d = self.n, self.dim
        a = np.arange(n + 1)
        diff = a[:, None] - a[None, :] + n  # (k, l) -> k - l + n
        # index array per axis, shaped so that the result has axes (k_1..k_d, l_1..l_d)
        index = []
        for axis in range(d):
            shape = [1] * (2 * d)
            shape[axis] = n + 1
            shape[d + axis] = n + 1
            index.append(diff.reshape(shape))
        self._dense = self.table.values[tuple(index)].reshape(self.N, self.N)
        return self._dense

    def _apply(self, spectrum, Q):
        Q = np.asarray(Q, dtype=complex)
        single = Q.ndim == 1
        Q2 = Q.reshape(self.N, -1)
        if Q2.shape[0] != self.N:
            raise ValueError(f"vector length {Q.shape[0]} does not match N = {self.N}")
        b = Q2.shape[1]
        grid = Q2.T.reshape((b,) + (self.n + 1,) * self.dim)
        axes = tuple(range(1, self.dim + 1))
        prod = np.fft.ifftn(np.fft.fftn(grid, s=self._fft_shape, axes=axes) * spectrum, axes=axes)
        out = prod[(slice(None),) + (slice(0, self.n + 1),) * self.dim].reshape(b, self.N).T
        return out[:, 0] if single else out

    def matvec(self, q):
        """``T_n q`` in O(N log N) via a circulant embedding."""
        return self._apply(self._spectrum, q)

    def rmatvec(self, q):
        """``T_n^* q``."""
        return self._apply(self._adjoint_spectrum, q)

    matmat = matvec
    rmatmat = rmatvec

    def aslinearoperator(self):
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.rmatvec,
                              matmat=self.matmat, rmatmat=self.rmatmat, dtype=complex)

    def frobenius_norm_squared(self):
        """``||T_n||_F^2`` from the generator: each ``mu_hat(j)`` occurs prod(n + 1 - |j_l|) times."""
        k = np.arange(-self.n, self.n + 1)
        count1 = self.n + 1 - np.abs(k)
        counts = count1
        for _ in range(self.dim - 1):
            counts = np.multiply.outer(counts, count1)
        return float(np.sum(counts * np.abs(self.table.values) ** 2))

    def quadratic_form(self, X):
        """``e_n(x)^* T_n e_n(x)`` for points ``X`` of shape (M, d)."""
        E = exponential_vectors(self.indices(), X)  # (N, M), columns e_n(x)
        return np.einsum("nm,nm->m", np.conj(E), self.matvec(E))


def grid_indices(n, dim):
    """Multi-indices of ``{0..n}^dim`` in C order, shape ((n+1)^dim, dim)."""
    return np.array(list(itertools.product(range(n + 1), repeat=dim))).reshape(-1, dim)


def exponential_vectors(indices, X):
    """Columns ``e_n(x) = (exp(-2 pi i <k, x>))_k`` for each point, shape (N, M)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.exp(-2j * np.pi * indices @ X.T)


def build(table, n=None, dense_threshold=DENSE_THRESHOLD):
    """Moment matrix of order ``n`` (default: the table order)."""
    return MomentMatrix(table, n, dense_threshold)


def matvec(T, q):
    return T.matvec(q)


@dataclass
class SvdFactors:
    """Leading singular triplets of a moment matrix.

    Attributes
    ----------
    singular_values : ndarray
        Nonincreasing singular values.
    U, V : ndarray of shape (N, k)
        Left and right singular vectors; column ``j`` of ``U`` holds the
        coefficients of the polynomial ``u_j(x) = e_n(x)^* U[:, j]``.
    rank : int
        Numerical rank under ``rank_tol``.
    rank_tol : float
        Relative threshold used for ``rank``.
    complete : bool
        Whether ``U`` is a full unitary basis (dense mode).
    exhausted : bool
        Whether the omitted singular values are known to vanish (an
        invariant subspace was found).
    residual : float
        Largest triplet residual relative to ``sigma_1`` (iterative mode).
    """

    singular_values: np.ndarray
    U: np.ndarray
    V: np.ndarray
    rank: int
    rank_tol: float
    complete: bool
    exhausted: bool = False
    residual: float = 0.0
    n: Optional[int] = None
    dim: Optional[int] = None

    @property
    def N(self):
        return self.U.shape[0]

    def to_rows(self):
        return [(j + 1, float(s)) for j, s in enumerate(self.singular_values)]


def numerical_rank(sigma, tau_rel=DEFAULT_RANK_TOL, mode="relative"):
    """Count singular values above ``tau_rel * sigma_1``.

    ``mode='gap'`` instead cuts at the largest ratio ``sigma_j / sigma_{j+1}``.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0 or sigma[0] <= 0:
        return 0
    if np.any(np.diff(sigma) > 1e-12 * sigma[0]):
        raise ValueError("singular values must be nonincreasing")
    if mode == "relative":
        return int(np.count_nonzero(sigma > tau_rel * sigma[0]))
    if mode == "gap":
        floor = np.finfo(float).tiny + np.finfo(float).eps * sigma[0] * 1e-3
        s = np.maximum(sigma, floor)
        if s.size == 1:
            return 1
        return int(np.argmax(s[:-1] / s[1:]) + 1)
    raise ValueError(f"unknown rank mode {mode!r}")


def _dense_svd(T, rank_tol, rank_mode, hermitian):
    M = T.dense()
    if hermitian:
        w, Q = np.linalg.eigh(M)
        order = np.argsort(-np.abs(w), kind="stable")
        w, Q = w[order], Q[:, order]
        sigma = np.abs(w)
        V = Q * np.where(w < 0, -1.0, 1.0)
        U = Q
    else:
        U, sigma, Vh = np.linalg.svd(M)
        V = Vh.conj().T
    rank = numerical_rank(sigma, rank_tol, rank_mode)
    return SvdFactors(sigma, U, V, rank, rank_tol, complete=True, exhausted=True, n=T.n, dim=T.dim)


def golub_kahan_svd(T, k, tol=1e-10, max_steps=None, random_state=None):
    """Leading ``k`` singular triplets by Golub-Kahan bidiagonalization.

    Uses only ``T.matvec`` and ``T.rmatvec`` with full (twice repeated
    classical Gram-Schmidt) reorthogonalization.  Stops when every wanted
    triplet has residual ``<= tol * sigma_1`` or an invariant subspace is
    reached.

    Returns
    -------
    sigma, U, V, exhausted, residual
    """
    N = T.N
    k = check_order(k, "k", minimum=1)
    if k > N:
        raise ValueError(f"k = {k} exceeds N = {N}")
    max_steps = N if max_steps is None else min(N, max_steps)
    rng = check_random_state(random_state)
    V = np.zeros((N, max_steps + 1), dtype=complex)
    U = np.zeros((N, max_steps), dtype=complex)
    alpha = np.zeros(max_steps)
    beta = np.zeros(max_steps)

    v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    V[:, 0] = v / np.linalg.norm(v)
    u = T.matvec(V[:, 0])
    alpha[0] = np.linalg.norm(u)
    if alpha[0] == 0:
        return np.zeros(1), np.zeros((N, 1), complex), V[:, :1], True, 0.0
    U[:, 0] = u / alpha[0]

    def ritz(steps, rectangular):
        B = np.diag(alpha[:steps]) + np.diag(beta[:steps - 1], 1)
        if rectangular:
            B = np.hstack([B, np.zeros((steps, 1))])
            B[steps - 1, steps] = beta[steps - 1]
        X, s, Yh = np.linalg.svd(B)
        return X, s, Yh.conj().T

    next_check = k
    steps = 1
    exhausted = False
    rectangular = False
    while True:
        j = steps - 1
        w = T.rmatvec(U[:, j]) - alpha[j] * V[:, j]
        for _ in range(2):
            w -= V[:, :steps] @ (V[:, :steps].conj().T @ w)
        beta[j] = np.linalg.norm(w)
        scale = max(alpha[:steps].max(), beta[:steps].max())
        if beta[j] <= 1e-13 * scale:
            beta[j] = 0.0
            exhausted = True
            break
        V[:, steps] = w / beta[j]
        if steps >= next_check or steps == max_steps:
            X, s, Y = ritz(steps, False)
            res = beta[j] * np.abs(X[j, :k]) / s[0] if steps >= k else np.array([np.inf])
            if np.all(res <= tol):
                break
            if steps == max_steps:
                break
            next_check = steps + max(10, steps // 10)
        u = T.matvec(V[:, steps]) - beta[j] * U[:, j]
        for _ in range(2):
            u -= U[:, :steps] @ (U[:, :steps].conj().T @ u)
        a = np.linalg.norm(u)
        if a <= 1e-13 * scale:
            # A v_{steps} lies in span(U): exact with the rectangular bidiagonal
            exhausted = True
            rectangular = True
            break
        alpha[steps] = a
        U[:, steps] = u / a
        steps += 1

    X, s, Y = ritz(steps, rectangular)
    cols = steps + 1 if rectangular else steps
    Uk = U[:, :steps] @ X
    Vk = V[:, :cols] @ Y[:, :steps]
    if exhausted:
        residual = 0.0
    else:
        residual = float((beta[steps - 1] * np.abs(X[steps - 1, :k]) / s[0]).max())
    keep = min(k, steps)
    return s[:keep], Uk[:, :keep], Vk[:, :keep], exhausted, residual


def svd(T, mode="auto", k=None, rank_tol=DEFAULT_RANK_TOL, rank_mode="relative",
        tol=1e-10, max_steps=None, random_state=0):
    """Singular value decomposition of a moment matrix.

    Parameters
    ----------
    T : MomentMatrix
    mode : {'auto', 'dense', 'iterative'}
        ``'auto'`` picks dense when ``N`` is below the dense threshold.
    k : int, optional
        Number of triplets requested in iterative mode (default all
        until an invariant subspace or ``N``).
    rank_tol : float
        Relative rank threshold.
    tol : float
        Residual tolerance relative to ``sigma_1`` in iterative mode.

    Raises
    ------
    ConvergenceError
        If the iterative solver exhausts ``max_steps`` above ``tol``; the
        partial factors are attached.
    """
    if mode == "auto":
        mode = "dense" if T.N <= T.dense_threshold else "iterative"
    if mode == "dense":
        return _dense_svd(T, rank_tol, rank_mode, T.is_hermitian)
    if mode != "iterative":
        raise ValueError(f"unknown svd mode {mode!r}")
    k = T.N if k is None else k
    sigma, U, V, exhausted, residual = golub_kahan_svd(T, k, tol, max_steps, random_state)
    rank = numerical_rank(sigma, rank_tol, rank_mode)
    factors = SvdFactors(sigma, U, V, rank, rank_tol, complete=False, exhausted=exhausted,
                         residual=residual, n=T.n, dim=T.dim)
    if residual > tol:
        raise ConvergenceError(f"Golub-Kahan stopped with relative residual {residual:.2e} > {tol:.0e}",
                               factors, residual)
    return factors
