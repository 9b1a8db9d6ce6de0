"""Choose the Wasserstein-1 route from the types of the two arguments."""

from ..kernels import TrigPolynomial, eval_grid
from ..measures import CircleUniform, Discrete, GridDensity, ParametricCurve, sample_curve
from .bernoulli import w1_1d
from .semidiscrete import SemidiscreteProblem, w1_semidiscrete


def _as_density(mu, grid):
    if isinstance(mu, TrigPolynomial):
        return eval_grid(mu, grid)
    if isinstance(mu, GridDensity):
        return mu.values
    return None


def _as_atoms(mu, samples):
    if isinstance(mu, (CircleUniform, ParametricCurve)):
        mu = sample_curve(mu, samples)
    if isinstance(mu, Discrete):
        return mu
    return None


def w1_auto(a, b, grid=502, samples=3000, metric="l2", return_result=False):
    """Wasserstein-1 distance by the route matching the inputs.

    One-dimensional pairs use the exact Bernoulli-spline formula.  In two
    dimensions one argument must be a density (trigonometric polynomial,
    evaluated on a ``grid`` x ``grid`` mesh, or a grid density) and the other
    discrete; curve measures are first replaced by ``samples`` equal-arclength
    atoms.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.dim == 1:
        return w1_1d(a, b)
    for dens, atoms in ((a, b), (b, a)):
        p = _as_density(dens, grid)
        target = _as_atoms(atoms, samples)
        if p is not None and target is not None:
            res = w1_semidiscrete(SemidiscreteProblem(p, target.points, target.weights.real, metric))
            return res if return_result else res.w1
    if _as_atoms(a, samples) is not None and _as_atoms(b, samples) is not None:
        raise NotImplementedError("discrete-to-discrete transport is not implemented; smooth one side "
                                  "with a kernel (e.g. KernelSpec('fejer', n, d)) to get a density")
    raise NotImplementedError(f"no transport route for {type(a).__name__} and {type(b).__name__} in d={a.dim}")
