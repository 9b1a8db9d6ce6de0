"""Test measures on the torus and their trigonometric moments.

Sign convention used throughout the package::

    mu_hat(k) = integral of exp(-2 pi i <k, x>) dmu(x),   k in Z^d,

and trigonometric polynomials are ``p(x) = sum_k p_hat(k) exp(2 pi i <k, x>)``,
so a measure with density ``p`` has moments ``p_hat``.
"""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._validation import check_order, check_points, check_weights, min_separation
from .bessel import j0

TWO_PI = 2.0 * np.pi

# 32-point Gauss-Legendre rule on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Moments ``mu_hat(k)`` for ``k`` in the box ``{-n, ..., n}^d``.

    ``values`` has shape ``(2n+1,) * d``; the moment at ``k`` is stored at
    ``values[k + n]``.
    """

    dim: int
    order: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        expected = (2 * self.order + 1,) * self.dim
        if values.shape != expected:
            raise ValueError(f"values have shape {values.shape}, expected {expected}")
        object.__setattr__(self, "values", values)

    def __getitem__(self, k):
        k = np.atleast_1d(np.asarray(k, dtype=int))
        if k.shape != (self.dim,):
            raise IndexError(f"index must have {self.dim} entries")
        if np.any(np.abs(k) > self.order):
            raise IndexError(f"index {tuple(k)} outside order {self.order}")
        return self.values[tuple(k + self.order)]

    def truncate(self, n):
        n = check_order(n)
        if n > self.order:
            raise ValueError(f"table has order {self.order} < {n}")
        cut = slice(self.order - n, self.order + n + 1)
        return MomentTable(self.dim, n, self.values[(cut,) * self.dim])

    def indices(self):
        """All multi-indices in C order, shape ``((2n+1)^d, d)``."""
        r = range(-self.order, self.order + 1)
        return np.array(list(itertools.product(r, repeat=self.dim)), dtype=int).reshape(-1, self.dim)

    def __add__(self, other):
        _check_compatible(self, other)
        return MomentTable(self.dim, self.order, self.values + other.values)

    def __mul__(self, scalar):
        return MomentTable(self.dim, self.order, scalar * self.values)

    __rmul__ = __mul__


def _check_compatible(a, b):
    if a.dim != b.dim or a.order != b.order:
        raise ValueError("moment tables differ in dimension or order")


def _axis_exponentials(coords, n):
    """``exp(-2 pi i k x)`` for k in -n..n, shape (2n+1, M)."""
    k = np.arange(-n, n + 1)
    return np.exp(-1j * TWO_PI * np.outer(k, coords))


def _separable_sum(points, weights, n):
    """sum_j w_j exp(-2 pi i <k, x_j>) over the whole box, exploiting separability."""
    M, d = points.shape
    out = _axis_exponentials(points[:, 0], n) * weights  # (2n+1, M)
    for axis in range(1, d):
        e = _axis_exponentials(points[:, axis], n)
        out = out[..., None, :] * e.reshape((1,) * axis + e.shape)
    return out.sum(axis=-1)


def _chunked_separable_sum(points, weights, n, chunk=None):
    d = points.shape[1]
    if chunk is None:
        chunk = max(1, int(2e7 // (2 * n + 1) ** d))
    total = np.zeros((2 * n + 1,) * d, dtype=complex)
    for start in range(0, len(points), chunk):
        total += _separable_sum(points[start:start + chunk], weights[start:start + chunk], n)
    return total


class Measure:
    """Base class for measures on the torus ``[0, 1)^d``."""

    dim: int

    def moments(self, n):
        raise NotImplementedError

    @property
    def total_mass(self):
        return complex(self.moments(0).values.ravel()[0])

    @property
    def is_real(self):
        return True

    # one-dimensional interface used by the Bernoulli-spline transport
    def mid_cdf(self, t):
        """``(mu([0, t)) + mu([0, t])) / 2`` for ``t`` in [0, 1] (d = 1 only)."""
        raise NotImplementedError(f"{type(self).__name__} has no closed-form distribution function")

    def first_moment(self):
        """``int x dmu(x)`` over ``[0, 1)`` (d = 1 only)."""
        raise NotImplementedError(f"{type(self).__name__} has no closed-form first moment")

    def breakpoints(self):
        """Points in [0, 1) where the distribution function is not smooth."""
        return np.empty(0)


@dataclass(frozen=True, eq=False)
class Discrete(Measure):
    """Finite sum of weighted Dirac measures ``sum_j w_j delta_{x_j}``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = check_points(self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", check_weights(self.weights, len(pts)))
        if len(pts) == 0:
            raise ValueError("a discrete measure needs at least one atom")

    @classmethod
    def uniform(cls, points):
        pts = check_points(points)
        return cls(pts, np.full(len(pts), 1.0 / len(pts)))

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def is_real(self):
        return not np.iscomplexobj(self.weights)

    @property
    def separation(self):
        return min_separation(self.points)

    def normalized(self):
        return Discrete(self.points, self.weights / self.weights.sum())

    def moments(self, n):
        n = check_order(n)
        return MomentTable(self.dim, n, _chunked_separable_sum(self.points, self.weights, n))

    def mid_cdf(self, t):
        _require_1d(self)
        t = np.asarray(t, dtype=float)
        x = self.points[:, 0]
        below = (x[None, :] < t.reshape(-1, 1)).astype(float)
        at = (x[None, :] == t.reshape(-1, 1)).astype(float)
        return ((below + 0.5 * at) @ self.weights).reshape(t.shape)

    def first_moment(self):
        _require_1d(self)
        return np.dot(self.points[:, 0], self.weights)

    def breakpoints(self):
        return np.unique(self.points[:, 0])


@dataclass(frozen=True, eq=False)
class CircleUniform(Measure):
    """Normalized arclength measure on a circle of radius ``radius`` in T^2."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(2))
    radius: float = 1.0 / 3.0

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(-1)
        if center.shape != (2,):
            raise ValueError("circle center must be a 2-vector")
        if not 0.0 < self.radius < 0.5:
            raise ValueError(f"radius must lie in (0, 1/2), got {self.radius}")
        object.__setattr__(self, "center", np.mod(center, 1.0))

    dim = 2

    @property
    def arclength(self):
        return TWO_PI * self.radius

    def moments(self, n):
        n = check_order(n)
        k = np.arange(-n, n + 1)
        k1, k2 = np.meshgrid(k, k, indexing="ij")
        phase = np.exp(-1j * TWO_PI * (k1 * self.center[0] + k2 * self.center[1]))
        return MomentTable(2, n, phase * j0(TWO_PI * self.radius * np.hypot(k1, k2)))

    def parametrization(self, t):
        t = np.asarray(t, dtype=float)
        pts = self.center + self.radius * np.stack([np.cos(TWO_PI * t), np.sin(TWO_PI * t)], axis=-1)
        return pts, np.full(t.shape, TWO_PI * self.radius)

    def as_curve(self):
        return ParametricCurve(self.parametrization, dim=2, arclength=self.arclength)


@dataclass(frozen=True, eq=False)
class ParametricCurve(Measure):
    """Normalized arclength measure on a closed curve.

    ``parametrization(t)`` maps parameters ``t`` in [0, 1) (array of shape
    (M,)) to ``(points, speed)`` with ``points`` of shape (M, d) and
    ``speed = ||gamma'(t)||`` of shape (M,).
    """

    parametrization: Callable
    dim: int = 2
    arclength: Optional[float] = None
    tol: float = 1e-12
    max_panels: int = 4096

    def _rule(self, panels):
        edges = np.arange(panels) / panels
        t = (edges[:, None] + _GL_X[None, :] / panels).ravel()
        pts, speed = self.parametrization(t)
        pts = np.atleast_2d(np.asarray(pts, dtype=float)).reshape(len(t), self.dim)
        w = np.tile(_GL_W / panels, panels) * np.asarray(speed, dtype=float)
        return pts, w

    def length(self):
        if self.arclength is not None:
            return float(self.arclength)
        return float(self._rule(64)[1].sum())

    def moments(self, n, tol=None):
        n = check_order(n)
        tol = self.tol if tol is None else tol
        if tol <= 0:
            raise ValueError("tol must be positive")
        panels = 4
        previous = None
        while panels <= self.max_panels:
            pts, w = self._rule(panels)
            current = _chunked_separable_sum(np.mod(pts, 1.0), w / w.sum(), n)
            if previous is not None and np.abs(current - previous).max() < tol:
                return MomentTable(self.dim, n, current)
            previous = current
            panels *= 2
        raise QuadratureError(f"curve moments did not reach tol={tol} within {self.max_panels} panels")

    def sample(self, s):
        """Parameters of ``s`` equal-arclength points, starting at t = 0."""
        panels = 64
        pts, w = self._rule(panels)
        per_panel = w.reshape(panels, -1).sum(axis=1)
        cum = np.concatenate([[0.0], np.cumsum(per_panel)])
        total = cum[-1]
        target = np.arange(s) * total / s
        p = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, panels - 1)
        a = p / panels
        t = a + (target - cum[p]) / per_panel[p] / panels
        for _ in range(8):
            # arclength from panel start a to t by Gauss-Legendre on [a, t]
            h = t - a
            nodes = a[:, None] + h[:, None] * _GL_X[None, :]
            _, sp = self.parametrization(nodes.ravel())
            arc = (np.asarray(sp).reshape(nodes.shape) * _GL_W).sum(axis=1) * h
            _, speed_t = self.parametrization(t)
            step = (cum[p] + arc - target) / np.asarray(speed_t)
            t = t - step
            if np.abs(step).max() < 1e-15:
                break
        return np.mod(t, 1.0)


@dataclass(frozen=True, eq=False)
class GridDensity(Measure):
    """Density sampled on the regular grid ``j / m``, integrated by the periodic trapezoidal rule."""

    values: np.ndarray
    normalize: bool = False

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim == 0 or len(set(v.shape)) != 1:
            raise ValueError("grid values must form a cube m^d")
        if self.normalize:
            v = v / (v.sum() / v.size)
        object.__setattr__(self, "values", v)

    @property
    def dim(self):
        return self.values.ndim

    @property
    def size(self):
        return self.values.shape[0]

    @property
    def is_real(self):
        return not np.iscomplexobj(self.values)

    def moments(self, n):
        n = check_order(n)
        m = self.size
        spectrum = np.fft.fftn(self.values) / self.values.size
        k = np.arange(-n, n + 1) % m
        return MomentTable(self.dim, n, spectrum[np.ix_(*([k] * self.dim))])

    # 1-D: piecewise constant on the cells [j/m, (j+1)/m)
    def mid_cdf(self, t):
        _require_1d(self)
        t = np.asarray(t, dtype=float)
        m = self.size
        v = np.real(self.values) / m
        cum = np.concatenate([[0.0], np.cumsum(v)])
        j = np.clip(np.floor(t * m).astype(int), 0, m - 1)
        return cum[j] + (t * m - j) * v[j]

    def first_moment(self):
        _require_1d(self)
        m = self.size
        centers = (np.arange(m) + 0.5) / m
        return float(np.dot(centers, np.real(self.values)) / m)

    def breakpoints(self):
        return np.arange(self.size) / self.size


@dataclass(frozen=True, eq=False)
class Lebesgue(Measure):
    """Normalized Lebesgue measure on T^d."""

    dim: int = 1

    def moments(self, n):
        n = check_order(n)
        values = np.zeros((2 * n + 1,) * self.dim, dtype=complex)
        values[(n,) * self.dim] = 1.0
        return MomentTable(self.dim, n, values)

    def mid_cdf(self, t):
        _require_1d(self)
        return np.asarray(t, dtype=float)

    def first_moment(self):
        return 0.5


@dataclass(frozen=True, eq=False)
class Mixture(Measure):
    """Linear combination ``sum_i c_i mu_i`` of measures of equal dimension."""

    components: Sequence

    def __post_init__(self):
        comps = [(complex(c) if np.iscomplexobj(c) else float(c), m) for c, m in self.components]
        if not comps:
            raise ValueError("mixture needs at least one component")
        dims = {m.dim for _, m in comps}
        if len(dims) != 1:
            raise ValueError(f"mixture components have dimensions {sorted(dims)}")
        object.__setattr__(self, "components", tuple(comps))

    @property
    def dim(self):
        return self.components[0][1].dim

    @property
    def is_real(self):
        return all(isinstance(c, float) and m.is_real for c, m in self.components)

    def moments(self, n):
        tables = [c * m.moments(n) for c, m in self.components]
        total = tables[0]
        for t in tables[1:]:
            total = total + t
        return total

    def mid_cdf(self, t):
        return sum(c * m.mid_cdf(t) for c, m in self.components)

    def first_moment(self):
        return sum(c * m.first_moment() for c, m in self.components)

    def breakpoints(self):
        return np.unique(np.concatenate([m.breakpoints() for _, m in self.components]))


class Example1(Measure):
    """One-dimensional mixture of an atom, a box and an integrable pole.

    ``mu = delta_{1/8} / 3 + nu`` with density
    ``8/9 on [1/4, 5/8]`` plus ``sqrt(2)/3 (|x - 7/8|^(-1/2) - sqrt(8))`` on
    ``[3/4, 1]``; each part carries mass 1/3.
    """

    dim = 1
    ATOM = 1.0 / 8.0
    BOX = (0.25, 0.625)
    BOX_HEIGHT = 8.0 / 9.0
    POLE = 7.0 / 8.0
    POLE_SUPPORT = (0.75, 1.0)
    POLE_SCALE = np.sqrt(2.0) / 3.0

    def __repr__(self):
        return "Example1()"

    def moments(self, n):
        n = check_order(n)
        k = np.arange(-n, n + 1).astype(float)
        values = np.exp(-1j * TWO_PI * k * self.ATOM) / 3.0
        values = values + self.BOX_HEIGHT * _exp_integral(k, *self.BOX)
        # pole: x = 7/8 +- u^2 turns |x - 7/8|^(-1/2) dx into 2 du
        half = np.sqrt(self.POLE - self.POLE_SUPPORT[0])
        pole = 4.0 * np.exp(-1j * TWO_PI * k * self.POLE) * _cos_chirp_integral(k, half)
        values = values + self.POLE_SCALE * (pole - np.sqrt(8.0) * _exp_integral(k, *self.POLE_SUPPORT))
        return MomentTable(1, n, values)

    def density(self, x):
        """Absolutely continuous part (the atom is excluded)."""
        x = np.asarray(x, dtype=float)
        out = np.where((x >= self.BOX[0]) & (x <= self.BOX[1]), self.BOX_HEIGHT, 0.0)
        in_pole = (x >= self.POLE_SUPPORT[0]) & (x <= self.POLE_SUPPORT[1]) & (x != self.POLE)
        with np.errstate(divide="ignore"):
            pole = self.POLE_SCALE * (1.0 / np.sqrt(np.abs(x - self.POLE)) - np.sqrt(8.0))
        return out + np.where(in_pole, pole, 0.0)

    def mid_cdf(self, t):
        t = np.asarray(t, dtype=float)
        atom = np.where(t > self.ATOM, 1.0, np.where(t == self.ATOM, 0.5, 0.0)) / 3.0
        box = self.BOX_HEIGHT * np.clip(t - self.BOX[0], 0.0, self.BOX[1] - self.BOX[0])
        lo, hi = self.POLE_SUPPORT
        tc = np.clip(t, lo, hi)
        root = 2.0 * np.sign(tc - self.POLE) * np.sqrt(np.abs(tc - self.POLE))
        pole = self.POLE_SCALE * (root + 2.0 * np.sqrt(self.POLE - lo) - np.sqrt(8.0) * (tc - lo))
        return atom + box + pole

    def first_moment(self):
        lo, hi = self.POLE_SUPPORT
        a, b = self.BOX
        box = self.BOX_HEIGHT * (b * b - a * a) / 2.0
        # int x |x - c|^(-1/2) over the symmetric support equals c * int |x - c|^(-1/2)
        pole_int = self.POLE * 2.0 * (np.sqrt(self.POLE - lo) + np.sqrt(hi - self.POLE))
        pole = self.POLE_SCALE * (pole_int - np.sqrt(8.0) * (hi * hi - lo * lo) / 2.0)
        return self.ATOM / 3.0 + box + pole

    def breakpoints(self):
        return np.array([self.ATOM, *self.BOX, self.POLE_SUPPORT[0], self.POLE])


def _exp_integral(k, a, b):
    """int_a^b exp(-2 pi i k x) dx, elementwise in k."""
    k = np.asarray(k, dtype=float)
    out = np.full(k.shape, b - a, dtype=complex)
    nz = k != 0
    kk = k[nz]
    out[nz] = (np.exp(-1j * TWO_PI * kk * b) - np.exp(-1j * TWO_PI * kk * a)) / (-1j * TWO_PI * kk)
    return out


def _cos_chirp_integral(k, upper, tol=1e-14):
    """int_0^upper cos(2 pi k u^2) du by composite Gauss-Legendre with panel doubling."""
    k = np.asarray(k, dtype=float)
    panels = 1
    previous = None
    while panels <= 1 << 14:
        u = ((np.arange(panels)[:, None] + _GL_X[None, :]) / panels).ravel() * upper
        w = np.tile(_GL_W, panels) * upper / panels
        current = np.cos(TWO_PI * np.outer(k, u * u)) @ w
        if previous is not None and np.abs(current - previous).max() < tol:
            return current
        previous = current
        panels *= 2
    raise QuadratureError("chirp integral did not converge")


def _require_1d(measure):
    if measure.dim != 1:
        raise ValueError(f"operation needs a one-dimensional measure, got dim={measure.dim}")


# ---------------------------------------------------------------------------
# implicit curve cos(2 pi x) cos(2 pi y) + cos(2 pi x) + cos(2 pi y) = 1/4
# ---------------------------------------------------------------------------

def _implicit_radius(theta):
    """Radius of the implicit curve along the ray at angle ``theta`` from the origin.

    Along each ray ``(a + 1)(b + 1)`` with ``a = cos 2 pi x``, ``b = cos 2 pi y``
    decreases strictly from 4 to 0, so the level 5/4 is crossed exactly once.
    """
    c, s = np.cos(theta), np.sin(theta)
    lo = np.zeros_like(theta)
    hi = 0.5 / np.maximum(np.abs(c), np.abs(s))

    def level(r):
        return (np.cos(TWO_PI * r * c) + 1) * (np.cos(TWO_PI * r * s) + 1) - 1.25

    for _ in range(45):
        mid = 0.5 * (lo + hi)
        pos = level(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    r = 0.5 * (lo + hi)
    for _ in range(3):
        x, y = r * c, r * s
        a1, b1 = np.cos(TWO_PI * x) + 1, np.cos(TWO_PI * y) + 1
        d_r = -TWO_PI * (np.sin(TWO_PI * x) * c * b1 + np.sin(TWO_PI * y) * s * a1)
        r = r - level(r) / d_r
    return r


def implicit_curve_parametrization(t):
    """Star-shaped parametrization of the implicit curve around the origin.

    Returns points (wrapped into [0, 1)^2) and the speed ``||gamma'(t)||``.
    """
    t = np.asarray(t, dtype=float)
    theta = TWO_PI * t
    c, s = np.cos(theta), np.sin(theta)
    r = _implicit_radius(theta)
    x, y = r * c, r * s
    a1, b1 = np.cos(TWO_PI * x) + 1, np.cos(TWO_PI * y) + 1
    sx, sy = np.sin(TWO_PI * x), np.sin(TWO_PI * y)
    g_r = -TWO_PI * (sx * c * b1 + sy * s * a1)
    g_theta = -TWO_PI * (sx * (-r * s) * b1 + sy * (r * c) * a1)
    dr = -g_theta / g_r
    speed = TWO_PI * np.hypot(dr, r)
    pts = np.mod(np.stack([x, y], axis=-1), 1.0)
    return pts, speed


def implicit_curve():
    """Uniform measure on the implicit trigonometric curve."""
    return ParametricCurve(implicit_curve_parametrization, dim=2)


def random_discrete(dim=2, count=15, seed=0, min_separation=0.0, max_tries=100000):
    """Seeded atoms with positive weights summing to one.

    Atoms are drawn uniformly and rejected if closer than ``min_separation``
    (wrap-around max-norm) to an earlier atom; weights are uniform on
    [0.5, 1.5] before normalization.
    """
    rng = np.random.default_rng(seed)
    points = []
    tries = 0
    while len(points) < count:
        tries += 1
        if tries > max_tries:
            raise ValueError(f"could not place {count} atoms with separation {min_separation}")
        x = rng.random(dim)
        if points:
            diff = np.abs(np.array(points) - x)
            diff = np.minimum(diff, 1 - diff).max(axis=1)
            if diff.min() < min_separation:
                continue
        points.append(x)
    weights = rng.uniform(0.5, 1.5, count)
    return Discrete(np.array(points), weights / weights.sum())


# ---------------------------------------------------------------------------
# functional interface
# ---------------------------------------------------------------------------

def moments(measure, n):
    """Moment table of order ``n`` for any supported measure."""
    return measure.moments(n)


def moments_discrete(measure, n):
    if not isinstance(measure, Discrete):
        raise TypeError("expected a Discrete measure")
    return measure.moments(n)


def moments_circle(circle, n):
    if not isinstance(circle, CircleUniform):
        raise TypeError("expected a CircleUniform measure")
    return circle.moments(n)


def moments_curve(curve, n, tol=1e-12):
    if isinstance(curve, CircleUniform):
        curve = curve.as_curve()
    return curve.moments(n, tol=tol)


def moments_example1(n):
    return Example1().moments(n)


def sample_curve(measure, s):
    """Replace a curve measure by ``s`` equal-weight atoms at equal-arclength positions."""
    s = check_order(s, "s", minimum=1)
    if isinstance(measure, CircleUniform):
        t = np.arange(s) / s
    elif isinstance(measure, ParametricCurve):
        t = measure.sample(s)
    else:
        raise TypeError(f"cannot sample {type(measure).__name__}")
    pts, _ = measure.parametrization(t)
    return Discrete.uniform(np.mod(pts, 1.0))


def curve_length(measure):
    if isinstance(measure, CircleUniform):
        return measure.arclength
    return measure.length()
