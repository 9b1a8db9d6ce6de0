"""Experiment drivers behind the command line: kernel rate tables, transport sweeps and p1 cross sections."""

import numpy as np

from .kernels import KernelSpec, best_delta_poly, convolve, eval_grid, fejer_abs_moment, fejer_abs_moment_bounds
from .measures import CircleUniform, Discrete, ParametricCurve, sample_curve
from .moment_matrix import DEFAULT_RANK_TOL
from .sos import (SupportIndicator, p1_nearsupport_bound, p1_offsupport_bound, vandermonde_bound)
from .transport import SemidiscreteProblem, w1_1d, w1_semidiscrete


def parse_degrees(text):
    """``"10,20,30"``, ``"1-50"`` or ``"10:60:10"`` (inclusive) to a sorted list of ints."""
    out = set()
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi, *step = (int(v) for v in part.split(":"))
            out.update(range(lo, hi + 1, step[0] if step else 1))
        elif "-" in part[1:]:
            lo, hi = (int(v) for v in part.split("-", 1))
            out.update(range(lo, hi + 1))
        else:
            out.add(int(part))
    if not out or min(out) < 0:
        raise ValueError(f"invalid degree list {text!r}")
    return sorted(out)


def kernel_spec(kind, n, dim):
    """Kernel of total degree ``n``; Jackson kernels exist for even ``n`` only."""
    if kind == "jackson":
        if n % 2:
            raise ValueError(f"Jackson kernels have even degree, got {n}")
        return KernelSpec.jackson(n // 2 + 1, dim)
    return KernelSpec(kind, n, dim)


def approximation(measure, kernel, n):
    """``K_n * mu`` as a trigonometric polynomial."""
    return convolve(measure.moments(n), kernel_spec(kernel, n, measure.dim))


def table1(degrees):
    """W1 distance of delta_0 to its Fejer, Jackson and best approximations, with the reference bounds."""
    delta = Discrete([[0.0]], [1.0])
    rows = []
    for n in degrees:
        fejer = w1_1d(delta, KernelSpec("fejer", n).polynomial())
        lower, upper = fejer_abs_moment_bounds(n)
        if n % 2 == 0 and n > 0:
            jackson = w1_1d(delta, kernel_spec("jackson", n, 1).polynomial())
            jackson_bound = 3.0 / (2.0 * (n + 2))
        else:
            jackson = jackson_bound = float("nan")
        best = w1_1d(delta, best_delta_poly(n))
        rows.append({
            "n": n, "fejer": fejer, "fejer_exact": fejer_abs_moment(n), "fejer_lower": lower,
            "fejer_upper": upper, "jackson": jackson, "jackson_bound": jackson_bound,
            "best": best, "best_exact": 1.0 / (4.0 * (n + 1)),
        })
    return rows


def _target_atoms(measure, samples, unweighted=False):
    if isinstance(measure, (CircleUniform, ParametricCurve)):
        return sample_curve(measure, samples)
    if isinstance(measure, Discrete):
        if unweighted:
            return Discrete.uniform(measure.points)
        return measure
    raise ValueError(f"rates need a discrete or curve measure, got {type(measure).__name__}")


def rates(measure, degrees, kernel="fejer", samples=3000, grid=502, rank_tol=DEFAULT_RANK_TOL,
          random_state=0, metric="l2"):
    """W1 between the degree-``n`` density and the (sampled) measure for each ``n``.

    ``kernel='p1'`` uses ``p1 / ||p1||_1`` with ``||p1||_1 = r / N`` and
    compares against the unweighted atoms (or curve samples).
    """
    d = measure.dim
    if d != 2:
        raise ValueError("rates run in two dimensions")
    target = _target_atoms(measure, samples, unweighted=(kernel == "p1"))
    rows = []
    for n in degrees:
        extra = {}
        if kernel == "p1":
            est = SupportIndicator(degree=n, rank_tol=rank_tol, random_state=random_state).fit(measure)
            pair = est.evaluate_grid(grid)
            dens = pair.p1 / est.l1_norm()
            extra = {"rank": est.rank_}
        else:
            dens = eval_grid(approximation(measure, kernel, n), grid)
        res = w1_semidiscrete(SemidiscreteProblem(dens, target.points, np.real(target.weights), metric))
        bound = d * (np.log(n + 1) + 3) / (np.pi ** 2 * n) if kernel == "fejer" and n > 0 else float("nan")
        rows.append({"n": n, "w1": res.w1, "bound": bound, "iterations": res.iterations,
                     "gradient_inf_norm": res.gradient_inf_norm, "termination": res.termination, **extra})
    return rows


def bounds_p1(measure, n, atom=0, axis=0, halfwidth=0.5, points=401, rank_tol=DEFAULT_RANK_TOL,
              random_state=0):
    """``p1`` and its pointwise bounds along the line through one atom parallel to a coordinate axis."""
    if not isinstance(measure, Discrete):
        raise ValueError("p1 bounds need a discrete measure")
    d = measure.dim
    est = SupportIndicator(degree=n, rank_tol=rank_tol, random_state=random_state).fit(measure)
    t = np.linspace(-halfwidth, halfwidth, points)
    X = np.repeat(measure.points[atom][None, :], points, axis=0)
    X[:, axis] = X[:, axis] + t
    X = np.mod(X, 1.0)
    p1 = est.predict(X)
    near, taylor = p1_nearsupport_bound(X, measure.points, n)
    off = p1_offsupport_bound(X, measure.points, measure.weights, n)
    vdm = vandermonde_bound(X, measure.points, n)
    rows = []
    for i in range(points):
        rows.append({"t": t[i], **{f"x_{j + 1}": X[i, j] for j in range(d)}, "p1": p1[i],
                     "near_bound": near[i], "taylor_lower": taylor[i], "off_bound": off[i],
                     "vandermonde_bound": vdm[i]})
    return rows, est
