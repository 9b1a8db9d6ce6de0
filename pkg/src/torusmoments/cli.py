"""Command-line interface.

Exit codes: 0 on success, 2 for an invalid spec or arguments, 3 when a
numerical method did not converge (partial outputs are still written).
"""

import argparse
import logging
import os
import shlex
import sys

import numpy as np

from . import io
from .experiments import approximation, bounds_p1, parse_degrees, rates, table1
from .measures import CircleUniform, ParametricCurve, sample_curve
from .moment_matrix import DEFAULT_RANK_TOL, ConvergenceError
from .sos import SupportIndicator
from .transport import SemidiscreteProblem, w1_1d, w1_semidiscrete

EXIT_OK, EXIT_SPEC, EXIT_CONVERGENCE = 0, 2, 3

log = logging.getLogger("torusmoments")


class NonConvergence(RuntimeError):
    pass


def _command_line(argv):
    return "torusmoments " + " ".join(shlex.quote(a) for a in argv)


def _out(args, default):
    path = args.out or default
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return path


def _stem(path):
    root, ext = os.path.splitext(path)
    return root if ext else path


def _load(args):
    if not args.spec:
        raise io.SpecError("--spec is required")
    return io.load_spec(args.spec, seed=args.spec_seed)


def _rows_out(path, rows, prov, columns=None):
    columns = columns or list(rows[0].keys())
    io.write_csv(path, columns, ([row.get(c, float("nan")) for c in columns] for row in rows), prov)


def cmd_moments(args, prov):
    measure, spec = _load(args)
    table = measure.moments(args.degree)
    path = _out(args, "moments.csv")
    io.write_moments_csv(path, table, io.provenance(prov, spec))
    log.info("wrote %s", path)


def cmd_approx(args, prov):
    measure, spec = _load(args)
    p = approximation(measure, args.kernel, args.degree)
    grid = p.eval_grid(args.grid)
    path = _out(args, "approx.csv")
    io.write_grid_csv(path, grid, io.provenance(prov, spec))
    io.write_pgm(_stem(path) + ".pgm", grid)
    log.info("wrote %s", path)


def cmd_interp(args, prov):
    measure, spec = _load(args)
    path = _out(args, "interp.csv")
    header = io.provenance(prov, spec)
    est = SupportIndicator(degree=args.degree, rank=args.rank, rank_tol=args.rank_tol,
                           svd_mode=args.svd_mode, random_state=args.seed)
    try:
        est.fit(measure)
    except ConvergenceError as exc:
        if exc.factors is not None:
            _write_svals(_stem(path) + "_svals.csv", exc.factors, header)
        raise NonConvergence(str(exc)) from exc
    pair = est.evaluate_grid(args.grid)
    io.write_grid_csv(path, pair.p1, header)
    io.write_pgm(_stem(path) + ".pgm", pair.p1)
    _write_svals(_stem(path) + "_svals.csv", est.factors_, header)
    log.info("rank %d of N=%d; wrote %s", est.rank_, est.factors_.N, path)


def _write_svals(path, factors, header):
    io.write_csv(path, ["j", "sigma"], factors.to_rows(), header)
    np.save(_stem(path) + "_U.npy", factors.U)


def cmd_w1(args, prov):
    measure, spec = _load(args)
    payload = {}
    if args.target:
        target, tspec = io.load_spec(args.target, seed=args.spec_seed)
        spec = {"source": spec, "target": tspec}
        source = measure
    else:
        if args.degree is None:
            raise io.SpecError("w1 needs --target or --degree (to compare K_n * mu with mu)")
        source, target = approximation(measure, args.kernel, args.degree), measure
    if source.dim == 1:
        payload = {"w1": w1_1d(source, target), "termination": "exact"}
    else:
        res = _semidiscrete(source, target, args)
        payload = res.to_dict()
    path = _out(args, "w1.json")
    payload["provenance"] = io.provenance(prov, spec)
    io.write_json(path, payload)
    print(f"{payload['w1']:.12g}")
    if payload["termination"] not in ("exact", "gradient", "objective_change"):
        raise NonConvergence(f"transport stopped with {payload['termination']}")


def _semidiscrete(source, target, args):
    from .kernels import TrigPolynomial
    from .measures import GridDensity
    if isinstance(target, (CircleUniform, ParametricCurve)):
        target = sample_curve(target, args.samples)
    if isinstance(source, TrigPolynomial):
        dens = source.eval_grid(args.grid)
    elif isinstance(source, GridDensity):
        dens = source.values
    else:
        raise io.SpecError("in two dimensions the source must be a density (use --degree or a density spec)")
    if not hasattr(target, "points"):
        raise io.SpecError("in two dimensions the target must be discrete or a curve")
    return w1_semidiscrete(SemidiscreteProblem(dens, target.points, np.real(target.weights)))


def cmd_table1(args, prov):
    degrees = parse_degrees(args.degrees or "1-50")
    rows = table1(degrees)
    path = _out(args, "table1.csv")
    _rows_out(path, rows, io.provenance(prov))
    log.info("wrote %s", path)


def cmd_rates(args, prov):
    measure, spec = _load(args)
    degrees = parse_degrees(args.degrees or "10:60:10")
    kernel = args.kernel if args.kernel else "fejer"
    try:
        rows = rates(measure, degrees, kernel, args.samples, args.grid, args.rank_tol, args.seed)
    except ConvergenceError as exc:
        raise NonConvergence(str(exc)) from exc
    path = _out(args, "rates.csv")
    cols = ["n", "w1", "bound", "iterations", "gradient_inf_norm", "termination"] + (["rank"] if kernel == "p1" else [])
    _rows_out(path, rows, io.provenance(prov, spec), cols)
    bad = [r["n"] for r in rows if r["termination"] not in ("gradient", "objective_change")]
    if bad:
        raise NonConvergence(f"transport did not converge for n = {bad}")


def cmd_bounds_p1(args, prov):
    measure, spec = _load(args)
    rows, est = bounds_p1(measure, args.degree, args.atom, args.axis, args.halfwidth, args.points,
                          args.rank_tol, args.seed)
    path = _out(args, "bounds_p1.csv")
    _rows_out(path, rows, io.provenance(prov, spec))
    log.info("rank %d; wrote %s", est.rank_, path)


def cmd_sample_curve(args, prov):
    measure, spec = _load(args)
    if not isinstance(measure, (CircleUniform, ParametricCurve)):
        raise io.SpecError("sample-curve needs a circle or curve spec")
    atoms = sample_curve(measure, args.samples)
    path = _out(args, "samples.csv")
    io.write_csv(path, ["x_1", "x_2", "weight"],
                 ([x[0], x[1], w] for x, w in zip(atoms.points, atoms.weights)), io.provenance(prov, spec))
    log.info("wrote %s", path)


def build_parser():
    parser = argparse.ArgumentParser(prog="torusmoments", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, spec=True, degree=None, grid=False, kernel=False, rank=False,
            samples=False, degrees=False):
        p = sub.add_parser(name, help=help_text)
        if spec:
            p.add_argument("--spec", help="measure spec: JSON file or inline JSON")
        if degree is not None:
            p.add_argument("--degree", "-n", type=int, default=degree, help="polynomial degree n")
        if degrees:
            p.add_argument("--degrees", help="degree list, e.g. 10,20,30 or 1-50 or 10:60:10")
        if grid:
            p.add_argument("--grid", type=int, default=502, help="grid nodes per axis (default 502)")
        if kernel:
            p.add_argument("--kernel", default="fejer", help="fejer, jackson, dirichlet, best (or p1 for rates)")
        if rank:
            p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL,
                           help="relative singular value threshold (default 1e-8)")
        if samples:
            p.add_argument("--samples", type=int, default=3000, help="curve samples s (default 3000)")
        p.add_argument("--out", help="output file")
        p.add_argument("--seed", type=int, default=None, help="seed for random specs and the iterative SVD")
        p.set_defaults(func=func)
        return p

    add("moments", cmd_moments, "moment table as CSV", degree=10)
    add("approx", cmd_approx, "kernel approximation on a grid (CSV + PGM)", degree=10, grid=True, kernel=True)
    p = add("interp", cmd_interp, "signal polynomial p1 on a grid (CSV + PGM + singular values)",
            degree=10, grid=True, rank=True)
    p.add_argument("--rank", type=int, default=None, help="fixed rank instead of the numerical rank")
    p.add_argument("--svd-mode", default="auto", choices=["auto", "dense", "iterative"])
    p = add("w1", cmd_w1, "Wasserstein-1 distance (result JSON)", degree=None, grid=True, kernel=True, samples=True)
    p.add_argument("--degree", "-n", type=int, default=None, help="compare K_n * mu with mu")
    p.add_argument("--target", help="second measure spec")
    add("table1", cmd_table1, "W1 of kernel approximations of delta_0", spec=False, degrees=True)
    add("rates", cmd_rates, "W1 rate sweep over degrees (2-D)", degrees=True, grid=True, kernel=True,
        rank=True, samples=True)
    p = add("bounds-p1", cmd_bounds_p1, "p1 and its bounds on a cross section", degree=20, rank=True)
    p.add_argument("--atom", type=int, default=0, help="atom the cross section passes through")
    p.add_argument("--axis", type=int, default=0, help="coordinate axis of the cross section")
    p.add_argument("--halfwidth", type=float, default=0.5)
    p.add_argument("--points", type=int, default=401)
    add("sample-curve", cmd_sample_curve, "equal-arclength samples of a curve", samples=True)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SPEC if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    # an explicit --seed overrides the seed of random specs; the SVD start vector defaults to 0
    args.spec_seed = args.seed
    if args.seed is None:
        args.seed = 0
    try:
        args.func(args, _command_line(argv))
    except (io.SpecError, ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except NonConvergence as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
