"""Convolution kernels, trigonometric polynomials and kernel approximations of measures."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_order, check_points
from .measures import Measure, MomentTable

TWO_PI = 2.0 * np.pi
KERNELS = ("fejer", "jackson", "dirichlet", "best")


class TrigPolynomial(Measure):
    """Trigonometric polynomial ``p(x) = sum_k coef[k + n] exp(2 pi i <k, x>)``.

    As a measure, ``p`` stands for the density ``p(x) dx``; its moments are
    its coefficients.

    Parameters
    ----------
    coef : ndarray of shape (2n+1,) * d
        Coefficients on the box ``{-n, ..., n}^d``.
    """

    def __init__(self, coef):
        coef = np.asarray(coef, dtype=complex)
        if coef.ndim == 0 or len(set(coef.shape)) != 1 or coef.shape[0] % 2 != 1:
            raise ValueError(f"coefficient array must be a cube of odd side, got {coef.shape}")
        self.coef = coef

    def __repr__(self):
        return f"TrigPolynomial(dim={self.dim}, degree={self.degree})"

    @property
    def dim(self):
        return self.coef.ndim

    @property
    def degree(self):
        return (self.coef.shape[0] - 1) // 2

    @property
    def is_real(self):
        flipped = np.conj(self.coef[(slice(None, None, -1),) * self.dim])
        scale = max(np.abs(self.coef).max(), 1e-300)
        return bool(np.abs(self.coef - flipped).max() <= 1e-13 * scale)

    def __getitem__(self, k):
        k = np.atleast_1d(np.asarray(k, dtype=int))
        if np.any(np.abs(k) > self.degree):
            return 0.0
        return self.coef[tuple(k + self.degree)]

    def with_degree(self, n):
        """Truncate or zero-pad to the box of order ``n``."""
        n = check_order(n)
        d, m = self.dim, self.degree
        out = np.zeros((2 * n + 1,) * d, dtype=complex)
        keep = min(n, m)
        src = (slice(m - keep, m + keep + 1),) * d
        dst = (slice(n - keep, n + keep + 1),) * d
        out[dst] = self.coef[src]
        return TrigPolynomial(out)

    def moments(self, n):
        return MomentTable(self.dim, n, self.with_degree(n).coef)

    def conj(self):
        """Complex conjugate function ``conj(p(x))``."""
        return TrigPolynomial(np.conj(self.coef[(slice(None, None, -1),) * self.dim]))

    def __mul__(self, other):
        if isinstance(other, TrigPolynomial):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return TrigPolynomial(fftconvolve(self.coef, other.coef))
        return TrigPolynomial(self.coef * other)

    __rmul__ = __mul__

    def __add__(self, other):
        n = max(self.degree, other.degree)
        return TrigPolynomial(self.with_degree(n).coef + other.with_degree(n).coef)

    def __sub__(self, other):
        return self + (-1.0) * other

    @property
    def integral(self):
        return self.coef[(self.degree,) * self.dim]

    def l2_norm_squared(self):
        return float(np.sum(np.abs(self.coef) ** 2))

    def __call__(self, X):
        """Evaluate at points ``X`` of shape (M, d) by direct summation."""
        X = check_points(X, self.dim, wrap=False)
        k = np.arange(-self.degree, self.degree + 1)
        out = np.empty(len(X), dtype=complex)
        step = max(1, int(2e6 // self.coef.size))
        for start in range(0, len(X), step):
            Xc = X[start:start + step]
            e = np.exp(1j * TWO_PI * np.outer(Xc[:, 0], k))
            acc = np.tensordot(e, self.coef, axes=([1], [0]))
            for axis in range(1, self.dim):
                e = np.exp(1j * TWO_PI * np.outer(Xc[:, axis], k))
                acc = np.einsum("mk...,mk->m...", acc, e)
            out[start:start + step] = acc
        return out.real if self.is_real else out

    def eval_grid(self, m=502):
        """Values at ``j / m`` for ``j`` in ``{0, ..., m-1}^d`` via a zero-padded inverse FFT."""
        return eval_grid(self, m)

    # one-dimensional distribution function, used by the Bernoulli-spline transport
    def bernoulli_coefficients(self):
        if self.dim != 1:
            raise ValueError("Bernoulli profile needs d = 1")
        k = np.arange(-self.degree, self.degree + 1)
        out = np.zeros_like(self.coef)
        nz = k != 0
        out[nz] = self.coef[nz] / (1j * TWO_PI * k[nz])
        return out

    def mid_cdf(self, t):
        t = np.asarray(t, dtype=float)
        k = np.arange(-self.degree, self.degree + 1)
        b = self.bernoulli_coefficients()
        e = np.exp(1j * TWO_PI * np.multiply.outer(t, k)) - 1.0
        val = self.integral * t + e @ b
        return val.real if self.is_real else val

    def first_moment(self):
        val = self.integral / 2.0 + self.bernoulli_coefficients().sum()
        return val.real if self.is_real else val


def eval_grid(p, m=502):
    """Evaluate a trigonometric polynomial on the regular grid with ``m`` nodes per axis.

    Frequencies are folded modulo ``m`` when ``m < 2n + 1`` (with a warning),
    which aliases the result.
    """
    m = check_order(m, "m", minimum=1)
    n, d = p.degree, p.dim
    if m < 2 * n + 1:
        warnings.warn(f"grid size {m} < 2n+1 = {2 * n + 1}; grid values are aliased", RuntimeWarning)
    spectrum = np.zeros((m,) * d, dtype=complex)
    idx = np.arange(-n, n + 1) % m
    if m >= 2 * n + 1:
        spectrum[np.ix_(*([idx] * d))] = p.coef
    else:
        np.add.at(spectrum, np.ix_(*([idx] * d)), p.coef)
    values = np.fft.ifftn(spectrum) * m ** d
    return values.real if p.is_real else values


@dataclass(frozen=True)
class KernelSpec:
    """A tensor-product convolution kernel of max-degree ``degree``.

    ``kind`` is one of ``fejer``, ``jackson`` (even degree ``2m - 2``),
    ``dirichlet`` or ``best`` (best approximation of the Dirac at 0, d = 1).
    """

    kind: str
    degree: int
    dim: int = 1

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}; choose from {KERNELS}")
        check_order(self.degree, "degree", minimum=0)
        if self.kind == "jackson" and self.degree % 2:
            raise ValueError("the Jackson kernel has even degree 2m - 2")
        if self.kind == "best" and (self.dim != 1 or self.degree < 1):
            raise ValueError("the best approximation of delta_0 is defined for d = 1, n >= 1")

    @classmethod
    def jackson(cls, m, dim=1):
        """Jackson kernel ``J_{2m-2}``."""
        return cls("jackson", 2 * check_order(m, "m", minimum=1) - 2, dim)

    def multipliers_1d(self):
        """Univariate Fourier multipliers on ``-n..n``."""
        n = self.degree
        k = np.arange(-n, n + 1)
        if self.kind == "fejer":
            return 1.0 - np.abs(k) / (n + 1.0)
        if self.kind == "dirichlet":
            return np.ones(2 * n + 1)
        if self.kind == "jackson":
            m = n // 2 + 1
            # sin^2(m pi x)/sin^2(pi x) has coefficients m - |j|, |j| < m; square it
            a = m - np.abs(np.arange(-(m - 1), m))
            c = np.convolve(a, a)
            return c / c[n]
        return best_delta_multipliers(n)

    def multipliers(self):
        """Tensor-product multipliers, shape ``(2n+1,) * dim``."""
        m1 = self.multipliers_1d()
        out = m1
        for _ in range(self.dim - 1):
            out = np.multiply.outer(out, m1)
        return out

    def polynomial(self):
        """The kernel itself, ``K_n = K_n * delta_0``."""
        return TrigPolynomial(self.multipliers())


def best_delta_multipliers(n):
    n = check_order(n, minimum=1)
    j = np.abs(np.arange(-n, n + 1))
    out = np.ones(2 * n + 1)
    nz = j != 0
    arg = j[nz] * np.pi / (2 * n + 2)
    out[nz] = arg / np.tan(arg)
    return out


def kernel_multiplier(kernel, k):
    """Multiplier of ``kernel`` at the frequency ``k`` (0 outside its degree box)."""
    k = np.atleast_1d(np.asarray(k, dtype=int))
    if k.shape != (kernel.dim,):
        raise ValueError(f"frequency must have {kernel.dim} entries")
    if np.any(np.abs(k) > kernel.degree):
        return 0.0
    m1 = kernel.multipliers_1d()
    return float(np.prod(m1[k + kernel.degree]))


def convolve(table, kernel):
    """Coefficients of ``K_n * mu`` from the moments of ``mu``."""
    if table.dim != kernel.dim:
        raise ValueError(f"kernel dimension {kernel.dim} does not match moments of dimension {table.dim}")
    if table.order < kernel.degree:
        raise ValueError(f"moment table of order {table.order} is too short for degree {kernel.degree}")
    return TrigPolynomial(kernel.multipliers() * table.truncate(kernel.degree).values)


def fejer_abs_moment(n, d=1):
    """Exact value of ``int F_n(x) |x|_1 dx`` over ``T^d`` (``= W1(F_n, delta_0)``)."""
    n = check_order(n)
    j = np.arange(n // 2 + 1)
    tail = np.sum((n - 2 * j) / (2 * j + 1.0) ** 2)
    return d * 2.0 * (0.125 - tail / ((n + 1) * np.pi ** 2))


def fejer_abs_moment_bounds(n, d=1):
    """Lower and upper bounds on :func:`fejer_abs_moment` for ``n >= 1``."""
    lower = d / np.pi ** 2 * (np.log(n + 2) / (n + 1) + 1.0 / (n + 3))
    upper = d / np.pi ** 2 * (np.log(n + 1) + 3) / n
    return lower, upper


def best_delta_poly(n):
    """Best Wasserstein-1 approximation of ``delta_0`` of degree ``n`` (d = 1)."""
    return TrigPolynomial(best_delta_multipliers(n))


def fejer_closed_form(x, n):
    """``F_n(x) = (sin((n+1) pi x) / sin(pi x))^2 / (n+1)``, with the limit at integers."""
    x = np.asarray(x, dtype=float)
    s = np.sin(np.pi * x)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = (np.sin((n + 1) * np.pi * x) / s) ** 2 / (n + 1)
    return np.where(np.abs(s) < 1e-300, n + 1.0, val)


def jackson_closed_form(x, m):
    """``J_{2m-2}(x) = 3 / (m (2 m^2 + 1)) sin^4(m pi x) / sin^4(pi x)``."""
    x = np.asarray(x, dtype=float)
    s = np.sin(np.pi * x)
    c = 3.0 / (m * (2.0 * m * m + 1))
    with np.errstate(invalid="ignore", divide="ignore"):
        val = c * (np.sin(m * np.pi * x) / s) ** 4
    return np.where(np.abs(s) < 1e-300, c * m ** 4, val)


def _resolve_moments(X, order):
    if isinstance(X, MomentTable):
        return X
    if isinstance(X, Measure):
        return X.moments(order)
    raise TypeError(f"expected a MomentTable or Measure, got {type(X).__name__}")


class KernelApproximation(BaseEstimator):
    """Approximate a measure by its convolution with a kernel.

    Parameters
    ----------
    kernel : {'fejer', 'jackson', 'dirichlet', 'best'}, default='fejer'
        Convolution kernel.  ``'dirichlet'`` gives the Fourier partial sum.
    degree : int, default=10
        Max-degree of the approximating polynomial (even for Jackson).

    Attributes
    ----------
    polynomial_ : TrigPolynomial
        The approximation ``K_n * mu``.
    coef_ : ndarray
        Its coefficients.
    n_features_in_ : int
        Dimension of the torus.

    Examples
    --------
    >>> from torusmoments.measures import Discrete
    >>> approx = KernelApproximation(degree=4).fit(Discrete([[0.0]], [1.0]))
    >>> round(float(approx.predict([[0.0]])[0]), 12)
    5.0
    """

    def __init__(self, kernel="fejer", degree=10):
        self.kernel = kernel
        self.degree = degree

    def fit(self, X, y=None):
        """Fit on a :class:`MomentTable` or a :class:`Measure`."""
        table = _resolve_moments(X, self.degree)
        self.kernel_ = KernelSpec(self.kernel, self.degree, table.dim)
        self.polynomial_ = convolve(table, self.kernel_)
        self.coef_ = self.polynomial_.coef
        self.n_features_in_ = table.dim
        return self

    def predict(self, X):
        """Evaluate the approximation at points of shape (M, d)."""
        check_is_fitted(self)
        return self.polynomial_(check_points(X, self.n_features_in_))

    def evaluate_grid(self, m=502):
        check_is_fitted(self)
        return eval_grid(self.polynomial_, m)
