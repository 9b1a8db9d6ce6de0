"""Measure specifications (JSON) and deterministic CSV / PGM / JSON outputs.

A measure spec is a JSON object with a ``type`` key::

    {"type": "discrete", "points": [[0.1, 0.2], ...], "weights": [0.5, ...]}
    {"type": "delta", "at": [0.0, 0.0]}
    {"type": "random_discrete", "dim": 2, "count": 15, "seed": 0, "min_separation": 0.15}
    {"type": "circle", "center": [0, 0], "radius": 0.333333}
    {"type": "curve", "name": "implicit"}
    {"type": "density", "values": [[...], ...]}      or  {"type": "density", "file": "grid.npy"}
    {"type": "lebesgue", "dim": 2}
    {"type": "example1"}
    {"type": "mixture", "components": [{"coef": 0.5, "measure": {...}}, ...]}

Relative ``file`` paths are resolved against the spec file's directory.
"""

import hashlib
import json
import os

import numpy as np

from . import __version__
from .measures import (CircleUniform, Discrete, Example1, GridDensity, Lebesgue, Mixture,
                       implicit_curve, random_discrete)


class SpecError(ValueError):
    """Malformed or unsupported measure specification."""


def _require(spec, key):
    if key not in spec:
        raise SpecError(f"spec of type {spec.get('type')!r} needs the key {key!r}")
    return spec[key]


def measure_from_spec(spec, base_dir=".", seed=None):
    """Build a measure from a parsed spec dictionary.

    ``seed`` overrides the seed of a ``random_discrete`` spec.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise SpecError("a measure spec must be an object with a 'type' key")
    kind = str(spec["type"]).lower()
    try:
        if kind == "discrete":
            weights = spec.get("weights")
            points = _require(spec, "points")
            if weights is None:
                return Discrete.uniform(points)
            return Discrete(points, _parse_complex(weights))
        if kind == "delta":
            at = np.atleast_1d(np.asarray(spec.get("at", [0.0] * int(spec.get("dim", 1))), dtype=float))
            return Discrete(at.reshape(1, -1), [1.0])
        if kind == "random_discrete":
            return random_discrete(dim=int(spec.get("dim", 2)), count=int(spec.get("count", 15)),
                                   seed=int(spec.get("seed", 0) if seed is None else seed),
                                   min_separation=float(spec.get("min_separation", 0.0)))
        if kind == "circle":
            return CircleUniform(np.asarray(spec.get("center", [0.0, 0.0]), dtype=float),
                                 float(_require(spec, "radius")))
        if kind == "curve":
            name = spec.get("name", "implicit")
            if name != "implicit":
                raise SpecError(f"unknown curve {name!r}; available: 'implicit'")
            return implicit_curve()
        if kind == "density":
            if "file" in spec:
                path = os.path.join(base_dir, spec["file"])
                values = np.load(path) if path.endswith(".npy") else np.loadtxt(path, delimiter=",", comments="#")
            else:
                values = np.asarray(_require(spec, "values"), dtype=float)
            return GridDensity(values, normalize=bool(spec.get("normalize", False)))
        if kind == "lebesgue":
            return Lebesgue(int(spec.get("dim", 1)))
        if kind == "example1":
            return Example1()
        if kind == "mixture":
            comps = []
            for item in _require(spec, "components"):
                comps.append((_parse_complex(item.get("coef", 1.0)),
                              measure_from_spec(_require(item, "measure"), base_dir, seed)))
            return Mixture(comps)
    except SpecError:
        raise
    except (TypeError, ValueError, OSError) as exc:
        raise SpecError(f"invalid {kind} spec: {exc}") from exc
    raise SpecError(f"unknown measure type {spec['type']!r}")


def _parse_complex(value):
    """Numbers, ``[re, im]`` pairs or lists of either."""
    arr = np.asarray(value, dtype=object)
    if arr.ndim == 0:
        return complex(value) if isinstance(value, complex) else float(value)
    out = []
    for v in value:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise SpecError("complex weights are written as [re, im]")
            out.append(complex(float(v[0]), float(v[1])))
        else:
            out.append(float(v))
    return np.asarray(out)


def load_spec(path, seed=None):
    """Read a JSON spec file (or an inline JSON string) and build the measure."""
    if os.path.exists(path):
        with open(path) as fh:
            text = fh.read()
        base = os.path.dirname(os.path.abspath(path))
    else:
        text, base = path, "."
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        if text is path:
            raise SpecError(f"spec {path!r} is neither a file nor valid JSON") from exc
        raise SpecError(f"spec {path!r} is not valid JSON: {exc}") from exc
    return measure_from_spec(spec, base, seed), spec


def provenance(command, spec=None):
    """One-line provenance header: command, package version and a digest of the spec."""
    parts = [f"torusmoments {__version__}"]
    if spec is not None:
        digest = hashlib.sha256(json.dumps(spec, sort_keys=True).encode()).hexdigest()[:16]
        parts.append(f"spec-sha256:{digest}")
    parts.append(f"command: {command}")
    return "# provenance: " + "; ".join(parts)


def _fmt(x):
    return repr(float(x))


def write_csv(path, header, rows, prov):
    """Rows of numbers with a provenance line and a column header."""
    with open(path, "w", newline="\n") as fh:
        fh.write(prov + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else _fmt(v))
                              for v in row) + "\n")


def write_moments_csv(path, table, prov):
    """Moment table as ``k_1, ..., k_d, re, im``."""
    idx = table.indices()
    vals = table.values.ravel()
    header = [f"k_{i + 1}" for i in range(table.dim)] + ["re", "im"]
    rows = ([int(k) for k in ks] + [v.real, v.imag] for ks, v in zip(idx, vals))
    write_csv(path, header, rows, prov)


def read_moments_csv(path):
    from .measures import MomentTable
    data = np.loadtxt(path, delimiter=",", comments="#", skiprows=2)
    data = np.atleast_2d(data)
    d = data.shape[1] - 2
    n = int(np.abs(data[:, :d]).max())
    values = np.zeros((2 * n + 1,) * d, dtype=complex)
    idx = tuple((data[:, :d].astype(int) + n).T)
    values[idx] = data[:, d] + 1j * data[:, d + 1]
    return MomentTable(d, n, values)


def write_grid_csv(path, values, prov):
    """1-D grids as ``x, value``; 2-D grids as an m x m matrix (row index = first coordinate)."""
    values = np.real_if_close(np.asarray(values))
    with open(path, "w", newline="\n") as fh:
        fh.write(prov + "\n")
        if values.ndim == 1:
            m = len(values)
            fh.write("x,value\n")
            for j, v in enumerate(values):
                fh.write(f"{_fmt(j / m)},{_fmt(np.real(v))}\n")
        elif values.ndim == 2:
            for row in np.real(values):
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        else:
            raise ValueError("grid export supports d <= 2")


def write_pgm(path, values):
    """8-bit binary PGM with affine min/max contrast (first coordinate downwards)."""
    v = np.real(np.asarray(values, dtype=complex if np.iscomplexobj(values) else float))
    if v.ndim == 1:
        v = np.tile(v, (max(1, len(v) // 8), 1))
    lo, hi = float(v.min()), float(v.max())
    scaled = np.zeros(v.shape) if hi <= lo else (v - lo) / (hi - lo)
    img = np.round(255 * scaled).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ValueError("not a binary PGM file")
        width, height = map(int, fh.readline().split())
        fh.readline()
        return np.frombuffer(fh.read(), dtype=np.uint8).reshape(height, width)


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
