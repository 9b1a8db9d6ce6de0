"""Exact one-dimensional Wasserstein-1 distance through the Bernoulli spline.

For a real measure ``mu`` on T = [0, 1) the convolution with the sawtooth
``B1(x) = 1/2 - frac(x)`` is::

    (B1 * mu)(t) = (mu([0, t)) + mu([0, t])) / 2 - mu(T) (t + 1/2) + int x dmu(x).

For two probability measures ``W1(mu, nu) = min_c int |h(t) - c| dt`` with
``h = B1 * mu - B1 * nu``; the minimizing ``c`` is a median of ``h`` under
Lebesgue measure.  ``h`` is smooth between the jump points of the two
distribution functions, so the integral splits into pieces on which
``h - c`` has constant sign.
"""

import numpy as np
from scipy import integrate

from ..kernels import TrigPolynomial
from ..measures import Discrete, GridDensity, Lebesgue, Mixture, TWO_PI

# pieces on which the profile is affine: two-point rules are exact
_AFFINE = (Discrete, Lebesgue, GridDensity)


def bernoulli_sawtooth(x):
    """``B1(x) = 1/2 - frac(x)``, with value 0 at the jumps."""
    x = np.asarray(x, dtype=float)
    frac = x - np.floor(x)
    return np.where(frac == 0.0, 0.0, 0.5 - frac)


class BernoulliProfile:
    """The function ``t -> (B1 * mu)(t)`` of a one-dimensional real measure.

    Parameters
    ----------
    measure : Measure or TrigPolynomial
        Real, one-dimensional.
    sign : float, default=1
        Scale factor, used to build differences.
    """

    def __init__(self, measure, sign=1.0):
        if getattr(measure, "dim", None) != 1:
            raise ValueError(f"Bernoulli profile needs a one-dimensional measure, got dim={getattr(measure, 'dim', None)}")
        if not measure.is_real:
            raise ValueError("Bernoulli profile needs a real measure")
        self.terms = list(_expand(measure, float(sign)))
        jumps = [m.breakpoints() for _, m in self.terms if not isinstance(m, TrigPolynomial)]
        self.breakpoints = np.unique(np.mod(np.concatenate([np.empty(0)] + jumps), 1.0))
        self.degree = max([m.degree for _, m in self.terms if isinstance(m, TrigPolynomial)], default=0)

    def __sub__(self, other):
        out = object.__new__(BernoulliProfile)
        out.terms = self.terms + [(-c, m) for c, m in other.terms]
        out.breakpoints = np.union1d(self.breakpoints, other.breakpoints)
        out.degree = max(self.degree, other.degree)
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for c, m in self.terms:
            out += c * _term_value(m, t)
        return out

    def integral(self, a, b):
        """``int_a^b`` of the profile for arrays of interval ends inside one smooth piece."""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        out = np.zeros(a.shape)
        for c, m in self.terms:
            out += c * _term_integral(m, a, b)
        return out


def _expand(measure, scale):
    if isinstance(measure, Mixture):
        for c, m in measure.components:
            yield from _expand(m, scale * float(np.real(c)))
    else:
        yield scale, measure


def _term_value(m, t):
    if isinstance(m, TrigPolynomial):
        k = np.arange(-m.degree, m.degree + 1)
        b = m.bernoulli_coefficients()
        return np.real(np.exp(1j * TWO_PI * np.multiply.outer(t, k)) @ b)
    mass = float(np.real(m.total_mass))
    return np.real(m.mid_cdf(t)) - mass * (t + 0.5) + float(np.real(m.first_moment()))


def _term_integral(m, a, b):
    if isinstance(m, TrigPolynomial):
        k = np.arange(-m.degree, m.degree + 1)
        c = m.bernoulli_coefficients()
        nz = k != 0
        c2 = np.zeros_like(c)
        c2[nz] = c[nz] / (1j * TWO_PI * k[nz])
        ea = np.exp(1j * TWO_PI * np.multiply.outer(a, k))
        eb = np.exp(1j * TWO_PI * np.multiply.outer(b, k))
        return np.real((eb - ea) @ c2)
    if isinstance(m, _AFFINE):
        return (b - a) * _term_value(m, 0.5 * (a + b))
    out = np.empty(a.shape)
    for i, (lo, hi) in enumerate(zip(a.ravel(), b.ravel())):
        out.flat[i] = integrate.quad(lambda t: float(_term_value(m, np.array(t))), lo, hi,
                                     epsabs=1e-13, epsrel=1e-12, limit=200)[0] if hi > lo else 0.0
    return out


class _Pieces:
    """Sample grid of a profile difference, split at the jump points."""

    def __init__(self, h, samples_per_unit=None):
        self.h = h
        edges = np.union1d(np.concatenate([[0.0, 1.0], h.breakpoints]), [])
        edges = edges[(edges >= 0.0) & (edges <= 1.0)]
        density = samples_per_unit or max(256, 16 * (h.degree + 1))
        lefts, rights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            count = max(4, int(np.ceil((hi - lo) * density)))
            nodes = np.linspace(lo, hi, count + 1)
            lefts.append(nodes[:-1])
            rights.append(nodes[1:])
        self.a = np.concatenate(lefts)
        self.b = np.concatenate(rights)
        # values just inside each cell, avoiding the one-sided jump values
        shrink = 1e-14
        self.ha = h(self.a + shrink * (self.b - self.a))
        self.hb = h(self.b - shrink * (self.b - self.a))

    def roots(self, c, iterations=100):
        """Cells with a sign change of ``h - c`` and the crossing points (Illinois iteration)."""
        fa, fb = self.ha - c, self.hb - c
        idx = np.flatnonzero(np.sign(fa) * np.sign(fb) < 0)
        lo, hi = self.a[idx].copy(), self.b[idx].copy()
        flo, fhi = fa[idx].copy(), fb[idx].copy()
        side = np.zeros(len(idx), dtype=int)
        x = 0.5 * (lo + hi)
        for _ in range(iterations):
            if len(idx) == 0 or np.all(hi - lo < 1e-15):
                break
            x = (lo * fhi - hi * flo) / (fhi - flo)
            x = np.where((x > lo) & (x < hi), x, 0.5 * (lo + hi))
            fx = self.h(x) - c
            left = np.sign(fx) == np.sign(flo)
            # Illinois: halve the retained end value after two moves on the same side
            fhi = np.where(left & (side == 1), 0.5 * fhi, fhi)
            flo = np.where(~left & (side == -1), 0.5 * flo, flo)
            lo, flo = np.where(left, x, lo), np.where(left, fx, flo)
            hi, fhi = np.where(left, hi, x), np.where(left, fhi, fx)
            side = np.where(left, 1, -1)
            done = fx == 0
            lo, hi = np.where(done, x, lo), np.where(done, x, hi)
            if np.all(np.abs(fx) < 1e-15):
                break
        return idx, x

    def split(self, c):
        """Sub-intervals on which ``h - c`` keeps its sign."""
        idx, r = self.roots(c)
        a = np.concatenate([self.a, r])
        b = self.b.copy()
        b_extra = self.b[idx].copy()
        b[idx] = r
        b = np.concatenate([b, b_extra])
        return a, b

    def measure_below(self, c):
        a, b = self.split(c)
        mid = self.h(0.5 * (a + b))
        return float(np.sum((b - a)[mid < c])), float(np.sum((b - a)[mid > c]))

    def l1(self, c):
        a, b = self.split(c)
        return float(np.sum(np.abs(self.h.integral(a, b) - c * (b - a))))


def median_offset(h, pieces=None, tol=1e-11):
    """A median of ``h`` on [0, 1].

    Since ``c -> int |h - c|`` is convex with slope ``|{h < c}| - |{h > c}|``,
    its excess over the minimum is at most ``|c - c*|`` times that slope; the
    bisection stops once this bound drops below ``tol``.
    """
    pieces = pieces or _Pieces(h)
    vals = 0.5 * (pieces.ha + pieces.hb)
    order = np.argsort(vals)
    cum = np.cumsum((pieces.b - pieces.a)[order])
    guess = float(vals[order][min(np.searchsorted(cum, 0.5), len(vals) - 1)])
    lo = float(min(pieces.ha.min(), pieces.hb.min()))
    hi = float(max(pieces.ha.max(), pieces.hb.max()))
    candidates = [0.0, guess] if lo <= 0.0 <= hi else [guess]
    for _ in range(200):
        c = candidates.pop(0) if candidates else 0.5 * (lo + hi)
        below, above = pieces.measure_below(c)
        if abs(below - above) * (hi - lo) <= tol or (below <= 0.5 + 1e-12 and above <= 0.5 + 1e-12):
            return c
        if below > above:
            hi = min(hi, c)
        else:
            lo = max(lo, c)
    return 0.5 * (lo + hi)


def _check_normalized(mu, name, tol):
    if getattr(mu, "dim", None) != 1:
        raise ValueError(f"{name} must be one-dimensional")
    mass = mu.total_mass
    if abs(mass - 1.0) > tol:
        raise ValueError(f"{name} must be normalized, total mass is {mass:.12g}")


def w1_1d(mu, nu, center="median", mass_tol=1e-9):
    """Wasserstein-1 distance between two probability measures on the circle.

    Parameters
    ----------
    mu, nu : Measure or TrigPolynomial
        Real, one-dimensional, total mass one.
    center : {'median', 'zero'}, default='median'
        ``'median'`` minimizes ``int |h - c|`` over ``c`` and gives W1;
        ``'zero'`` returns ``int |h|``, which coincides with W1 whenever the
        profile difference has median zero (e.g. both measures symmetric
        about the same point).

    Returns
    -------
    float

    Examples
    --------
    >>> from torusmoments.measures import Discrete
    >>> round(w1_1d(Discrete.uniform([0.0]), Discrete.uniform([0.9])), 12)
    0.1
    """
    _check_normalized(mu, "mu", mass_tol)
    _check_normalized(nu, "nu", mass_tol)
    h = BernoulliProfile(mu) - BernoulliProfile(nu)
    pieces = _Pieces(h)
    if center == "median":
        c = median_offset(h, pieces)
    elif center == "zero":
        c = 0.0
    else:
        raise ValueError(f"unknown center {center!r}")
    return pieces.l1(c)
