"""Experiment configuration: YAML parsing, schema checks and object builders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import estimators as est
from . import kernel as km
from . import quadrature as qd
from .geometry import Annulus, Ball

__all__ = ["ConfigError", "ExperimentConfig", "COMMANDS", "load_config", "parse_config", "apply_override"]

MAX_MODULATOR_FREQUENCY = 100.0


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; ``where`` names the key and line."""

    def __init__(self, message: str, key: str = "", line: int | None = None):
        self.key = key
        self.line = line
        where = key or "<root>"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{where}: {message}")


REQUIRED = object()

# experiment keys per command, with defaults
COMMANDS = {
    "validate": {
        "n_radial": 64, "radial_max": 64.0, "n_points": 2000, "tol": 1e-9, "spatial_box": 5.0,
    },
    "exit-time": {
        "center": None, "radii": [0.05, 0.1, 0.2, 0.4], "start": "center", "epsilon_rel": 0.02,
        "dump_replicas": 4,
    },
    "survival": {
        "center": None, "radii": [0.05, 0.1, 0.2], "times": [0.05, 0.1, 0.2], "epsilon_rel": 0.02,
    },
    "hitting": {
        "center": None, "r": 1.0, "lam": None, "fractions": [0.5, 0.25, 0.125, 0.0625], "start": None,
    },
    "harmonic": {
        "domain": REQUIRED, "data": REQUIRED, "points": REQUIRED,
    },
    "harnack": {
        "center": None, "radii": [0.02, 0.05, 0.1, 0.2], "data": REQUIRED, "n_probes": 32, "epsilon_rel": 0.05,
        "amplitudes": None, "c1": None,
    },
    "restricted-harnack": {
        "center": None, "r": 1.0, "lam": None, "data": REQUIRED, "n_probes": 8,
    },
    "hoelder": {
        "center": None, "R": 1.0, "scales": [0.5, 0.25, 0.125, 0.0625], "data": REQUIRED, "n_probes": 16,
    },
    "levy-check": {
        "start": None, "set_a": REQUIRED, "set_b": REQUIRED, "horizon": 1.0, "container": None,
        "angular_nodes": 64,
    },
    "nondegeneracy": {
        "point": None, "rhos": [0.1, 0.5], "normalizer": None, "n_angular": 64,
    },
    "eta": {
        "center": None, "radii": [0.01, 0.05, 0.1, 0.2], "js": [1, 2, 3, 4, 5, 6, 8], "n_probe": 32,
    },
    "apply-l": {
        "function": REQUIRED, "points": REQUIRED, "form": "symmetric", "n_angular": 64,
    },
    "karamata": {
        "side": "small", "beta": 0.0, "radii": [1e-2, 1e-4, 1e-6, 1e-8],
    },
    "geometry-check": {
        "count": 1000, "dims": [2, 3], "inflate": None, "search": 2000,
    },
}

TOP_KEYS = {"seed", "output", "kernel", "simulation", "experiment", "plot"}
KERNEL_KEYS = {"dim", "alpha", "ell", "tail", "kappa", "sigma", "caps", "delta", "upper", "modulator"}
SIM_KEYS = {"epsilon", "n", "max_events"}


@dataclass
class ExperimentConfig:
    command: str
    kernel: km.JumpKernel
    seed: int = 0
    epsilon: float = 0.01
    n: int = 10000
    max_events: int = 1_000_000
    output: str = "out"
    plot: bool = True
    params: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# line lookup


def _line_map(text: str) -> dict:
    """Dotted key path -> 1-based line of the key in the YAML source."""
    out = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return out

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = f"{prefix}.{k.value}" if prefix else str(k.value)
                out[path] = k.start_mark.line + 1
                walk(v, path)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, f"{prefix}[{i}]")

    if root is not None:
        walk(root, "")
    return out


class _Ctx:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, key, message):
        line = self.lines.get(key)
        if line is None and "[" in key:
            line = self.lines.get(key.split("[")[0])
        raise ConfigError(message, key, line)

    def mapping(self, obj, key, allowed):
        if not isinstance(obj, dict):
            self.fail(key, "expected a mapping")
        for k in obj:
            if k not in allowed:
                self.fail(f"{key}.{k}" if key else str(k), "unknown key")
        return obj

    def number(self, obj, key, lo=-math.inf, hi=math.inf, integer=False):
        if isinstance(obj, bool) or not isinstance(obj, (int, float)):
            self.fail(key, "expected a number")
        if integer and int(obj) != obj:
            self.fail(key, "expected an integer")
        if not lo <= obj <= hi:
            self.fail(key, f"value {obj} outside [{lo}, {hi}]")
        return int(obj) if integer else float(obj)

    def vector(self, obj, key, dim=None):
        if not isinstance(obj, (list, tuple)) or not obj:
            self.fail(key, "expected a list of numbers")
        vals = [self.number(v, f"{key}[{i}]") for i, v in enumerate(obj)]
        if dim is not None and len(vals) != dim:
            self.fail(key, f"expected {dim} components")
        return np.array(vals)

    def numbers(self, obj, key, lo=-math.inf, hi=math.inf, integer=False):
        if not isinstance(obj, (list, tuple)) or not obj:
            self.fail(key, "expected a non-empty list")
        return [self.number(v, f"{key}[{i}]", lo, hi, integer) for i, v in enumerate(obj)]


# ---------------------------------------------------------------------------
# builders


def _ell(ctx, spec, key):
    if spec is None:
        return km.Constant(1.0)
    if not isinstance(spec, dict):
        return km.Constant(ctx.number(spec, key, lo=1e-300))
    kind = spec.get("kind")
    if kind == "constant":
        ctx.mapping(spec, key, {"kind", "c"})
        return km.Constant(ctx.number(spec.get("c", 1.0), f"{key}.c", lo=1e-300))
    if kind == "log_power":
        ctx.mapping(spec, key, {"kind", "power"})
        if "power" not in spec:
            ctx.fail(f"{key}.power", "missing exponent")
        return km.LogPower(ctx.number(spec["power"], f"{key}.power"))
    if kind == "product":
        ctx.mapping(spec, key, {"kind", "factors"})
        facs = spec.get("factors")
        if not isinstance(facs, list) or not facs:
            ctx.fail(f"{key}.factors", "expected a non-empty list")
        return km.Product(tuple(_ell(ctx, f, f"{key}.factors[{i}]") for i, f in enumerate(facs)))
    ctx.fail(f"{key}.kind", f"unknown slowly varying kind {kind!r}")


def _tail(ctx, spec, key):
    if spec is None:
        return km.PowerTail()
    ctx.mapping(spec, key, {"kind", "scale", "cutoff", "rate"})
    kind = spec.get("kind", "power")
    scale = ctx.number(spec.get("scale", 1.0), f"{key}.scale", lo=0.0)
    if kind == "power":
        return km.PowerTail(scale)
    if kind == "truncated":
        return km.TruncatedTail(ctx.number(spec.get("cutoff"), f"{key}.cutoff", lo=1.0), scale)
    if kind == "exponential":
        return km.ExponentialTail(ctx.number(spec.get("rate"), f"{key}.rate", lo=0.0), scale)
    ctx.fail(f"{key}.kind", f"unknown tail kind {kind!r}")


def _modulator(ctx, spec, key, dim):
    if spec is None:
        return km.ConstantOne()
    ctx.mapping(spec, key, {"kind", "frequency", "phase", "values", "cell"})
    kind = spec.get("kind", "constant")
    if kind == "constant":
        return km.ConstantOne()
    if kind == "sinusoidal":
        freq = ctx.vector(spec.get("frequency"), f"{key}.frequency", dim)
        if np.linalg.norm(freq) > MAX_MODULATOR_FREQUENCY:
            ctx.fail(f"{key}.frequency", f"frequency norm above {MAX_MODULATOR_FREQUENCY}")
        return km.Sinusoidal(tuple(freq), ctx.number(spec.get("phase", 0.0), f"{key}.phase"))
    if kind == "patchwise":
        try:
            vals = np.array(spec.get("values"), dtype=float)
        except (TypeError, ValueError):
            ctx.fail(f"{key}.values", "expected a numeric grid")
        if vals.ndim != dim:
            ctx.fail(f"{key}.values", f"grid must have {dim} axes")
        try:
            return km.Patchwise(vals, ctx.number(spec.get("cell", 1.0), f"{key}.cell"))
        except ValueError as exc:
            ctx.fail(f"{key}.values", str(exc))
    ctx.fail(f"{key}.kind", f"unknown modulator kind {kind!r}")


def build_kernel(ctx, spec) -> km.JumpKernel:
    ctx.mapping(spec, "kernel", KERNEL_KEYS)
    dim = ctx.number(spec.get("dim", 2), "kernel.dim", 1, 8, integer=True)
    alpha = ctx.number(spec.get("alpha", 1.0), "kernel.alpha", 0.0, 2.0)
    if not 0.0 < alpha < 2.0:
        ctx.fail("kernel.alpha", "alpha must lie in (0, 2)")
    ell = _ell(ctx, spec.get("ell"), "kernel.ell")
    tail = _tail(ctx, spec.get("tail"), "kernel.tail")
    kappa = ctx.number(spec.get("kappa", 1.0), "kernel.kappa", 1.0)
    sigma = spec.get("sigma")
    sigma = None if sigma is None else ctx.number(sigma, "kernel.sigma", 0.0)
    if sigma is not None and sigma <= 0.0:
        ctx.fail("kernel.sigma", "sigma must be positive")
    radial = km.RadialProfile(alpha, ell, tail, kappa, sigma)
    caps_spec = spec.get("caps")
    delta = ctx.number(spec.get("delta", 1.0), "kernel.delta", 0.0)
    if delta <= 0.0:
        ctx.fail("kernel.delta", "delta must be positive")
    if caps_spec is None:
        axis = np.zeros(dim)
        axis[0] = 1.0
        caps = (km.Cap(km.UnitVector(axis), 2.0),)
    else:
        if not isinstance(caps_spec, list) or not caps_spec:
            ctx.fail("kernel.caps", "expected a non-empty list of caps")
        caps = []
        for i, c in enumerate(caps_spec):
            key = f"kernel.caps[{i}]"
            ctx.mapping(c, key, {"axis", "cosine", "chordal_radius"})
            axis = km.UnitVector.normalized(ctx.vector(c.get("axis"), f"{key}.axis", dim))
            if ("cosine" in c) == ("chordal_radius" in c):
                ctx.fail(key, "give exactly one of cosine or chordal_radius")
            if "cosine" in c:
                caps.append(km.Cap.from_cosine(axis, ctx.number(c["cosine"], f"{key}.cosine", -1.0, 1.0)))
            else:
                caps.append(km.Cap(axis, ctx.number(c["chordal_radius"], f"{key}.chordal_radius", 0.0, 2.0)))
        caps = tuple(caps)
    upper = spec.get("upper")
    if upper is None:
        upper = (delta,) * len(caps)
    else:
        upper = tuple(ctx.numbers(upper, "kernel.upper"))
        if len(upper) != len(caps):
            ctx.fail("kernel.upper", "need one upper value per cap")
        if min(upper) < delta:
            ctx.fail("kernel.upper", "upper values must be >= delta")
    mod = _modulator(ctx, spec.get("modulator"), "kernel.modulator", dim)
    try:
        return km.JumpKernel(km.ConeSystem(caps, delta, upper), radial, mod)
    except ValueError as exc:
        ctx.fail("kernel", str(exc))


def build_region(ctx, spec, key, dim):
    ctx.mapping(spec, key, {"kind", "center", "radius", "inner", "outer"})
    kind = spec.get("kind")
    center = ctx.vector(spec.get("center", [0.0] * dim), f"{key}.center", dim)
    if kind == "ball":
        return Ball(center, ctx.number(spec.get("radius"), f"{key}.radius", lo=0.0))
    if kind == "annulus":
        outer = spec.get("outer", math.inf)
        outer = math.inf if outer in (None, "inf") else ctx.number(outer, f"{key}.outer", lo=0.0)
        return Annulus(center, ctx.number(spec.get("inner", 0.0), f"{key}.inner", lo=0.0), outer)
    ctx.fail(f"{key}.kind", f"unknown region kind {kind!r}")


def build_data(ctx, spec, key, dim):
    """Exterior data g from its YAML description."""
    if not isinstance(spec, dict):
        ctx.fail(key, "expected a mapping")
    kind = spec.get("kind")
    if kind == "constant":
        ctx.mapping(spec, key, {"kind", "c"})
        return est.ConstantData(ctx.number(spec.get("c", 1.0), f"{key}.c"))
    if kind == "ball":
        ctx.mapping(spec, key, {"kind", "center", "radius", "value"})
        return est.IndicatorOfBall(tuple(ctx.vector(spec.get("center"), f"{key}.center", dim)),
                                   ctx.number(spec.get("radius"), f"{key}.radius", lo=0.0),
                                   ctx.number(spec.get("value", 1.0), f"{key}.value"))
    if kind == "annulus":
        ctx.mapping(spec, key, {"kind", "center", "inner", "outer", "value"})
        reg = build_region(ctx, {k: spec[k] for k in ("center", "inner", "outer") if k in spec} | {"kind": "annulus"},
                           key, dim)
        return est.IndicatorOfAnnulus(tuple(reg.center), reg.inner, reg.outer,
                                      ctx.number(spec.get("value", 1.0), f"{key}.value"))
    if kind == "signed":
        ctx.mapping(spec, key, {"kind", "positive", "negative", "positive_value", "negative_value"})
        pos = build_region(ctx, spec.get("positive"), f"{key}.positive", dim)
        neg = build_region(ctx, spec.get("negative"), f"{key}.negative", dim)
        return est.SignedBump(pos, neg, ctx.number(spec.get("positive_value", 1.0), f"{key}.positive_value"),
                              ctx.number(spec.get("negative_value", 1.0), f"{key}.negative_value"))
    if kind == "radial_power":
        # g(z) = min(cap, |z - center|^-exponent)
        ctx.mapping(spec, key, {"kind", "center", "exponent", "cap"})
        p = ctx.number(spec.get("exponent"), f"{key}.exponent", lo=0.0)
        cap = ctx.number(spec.get("cap", 1.0), f"{key}.cap", lo=0.0)
        return est.RadialProfileData(_CappedPower(p, cap), tuple(ctx.vector(spec.get("center"), f"{key}.center", dim)),
                                     cap)
    ctx.fail(f"{key}.kind", f"unknown data kind {kind!r}")


@dataclass(frozen=True)
class _CappedPower:
    exponent: float
    cap: float

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return np.minimum(self.cap, s ** -self.exponent)


def build_function(ctx, spec, key, dim):
    if not isinstance(spec, dict):
        ctx.fail(key, "expected a mapping")
    kind = spec.get("kind")
    if kind == "constant":
        ctx.mapping(spec, key, {"kind", "c"})
        return qd.ConstantFunction(ctx.number(spec.get("c", 1.0), f"{key}.c"))
    if kind == "bump":
        ctx.mapping(spec, key, {"kind", "center", "radius", "height"})
        return qd.CompactBump(ctx.vector(spec.get("center"), f"{key}.center", dim),
                              ctx.number(spec.get("radius"), f"{key}.radius", lo=0.0),
                              ctx.number(spec.get("height", 1.0), f"{key}.height"))
    if kind == "barrier":
        ctx.mapping(spec, key, {"kind", "center", "r"})
        return qd.Barrier(ctx.vector(spec.get("center"), f"{key}.center", dim),
                          ctx.number(spec.get("r"), f"{key}.r", lo=0.0))
    if kind == "cosine":
        ctx.mapping(spec, key, {"kind", "frequency"})
        return qd.Cosine(ctx.vector(spec.get("frequency"), f"{key}.frequency", dim))
    ctx.fail(f"{key}.kind", f"unknown test function kind {kind!r}")


# ---------------------------------------------------------------------------
# top level


def apply_override(raw: dict, assignment: str) -> None:
    """Applies ``a.b.c=value`` in place; the value is parsed as YAML."""
    if "=" not in assignment:
        raise ConfigError("override must look like key=value", assignment)
    path, text = assignment.split("=", 1)
    keys = path.strip().split(".")
    if not all(keys):
        raise ConfigError("empty key in override", path)
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value: {exc}", path) from None
    node = raw
    for k in keys[:-1]:
        nxt = node.get(k)
        if nxt is None:
            nxt = node[k] = {}
        if not isinstance(nxt, dict):
            raise ConfigError("override descends into a non-mapping", path)
        node = nxt
    node[keys[-1]] = value


def parse_config(text: str, command: str, overrides=()) -> ExperimentConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", "",
                          None if mark is None else mark.line + 1) from None
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    for o in overrides:
        apply_override(raw, o)
    ctx = _Ctx(_line_map(text))
    ctx.mapping(raw, "", TOP_KEYS)
    kern = build_kernel(ctx, raw.get("kernel") or {})
    dim = kern.dim
    sim = raw.get("simulation") or {}
    ctx.mapping(sim, "simulation", SIM_KEYS)
    eps = ctx.number(sim.get("epsilon", 0.01), "simulation.epsilon", 0.0, 1.0)
    if not 0.0 < eps < 1.0:
        ctx.fail("simulation.epsilon", "epsilon must lie in (0, 1)")
    n = ctx.number(sim.get("n", 10000), "simulation.n", 1, integer=True)
    max_events = ctx.number(sim.get("max_events", 1_000_000), "simulation.max_events", 1, integer=True)
    seed = ctx.number(raw.get("seed", 0), "seed", 0, 2**64 - 1, integer=True)
    plot = raw.get("plot", True)
    if not isinstance(plot, bool):
        ctx.fail("plot", "expected true or false")
    output = raw.get("output", "out")
    if not isinstance(output, str):
        ctx.fail("output", "expected a path")

    schema = COMMANDS[command]
    exp = raw.get("experiment") or {}
    ctx.mapping(exp, "experiment", set(schema))
    params = {}
    for key, default in schema.items():
        if key in exp:
            params[key] = exp[key]
        elif default is REQUIRED:
            ctx.fail(f"experiment.{key}", f"required by {command}")
        else:
            params[key] = default
    params = _typed_params(ctx, command, params, dim)
    return ExperimentConfig(command, kern, seed, eps, n, max_events, output, plot, params, raw)


def _point(ctx, value, key, dim, default=None):
    if value is None:
        return np.zeros(dim) if default is None else default
    return ctx.vector(value, key, dim)


def _typed_params(ctx, command, p, dim):
    k = "experiment."
    out = dict(p)
    if "center" in p:
        out["center"] = _point(ctx, p["center"], k + "center", dim)
    if "radii" in p:
        out["radii"] = ctx.numbers(p["radii"], k + "radii", lo=1e-300)
    for key in ("data",):
        if key in p:
            out[key] = build_data(ctx, p[key], k + key, dim)
    if command in ("exit-time", "survival", "harnack"):
        if p["epsilon_rel"] is not None:
            out["epsilon_rel"] = ctx.number(p["epsilon_rel"], k + "epsilon_rel", 0.0, 1.0)
    if command == "exit-time":
        if p["start"] != "center":
            out["start"] = ctx.vector(p["start"], k + "start", dim)
        out["dump_replicas"] = ctx.number(p["dump_replicas"], k + "dump_replicas", 0, integer=True)
    elif command == "survival":
        out["times"] = ctx.numbers(p["times"], k + "times", lo=0.0)
    elif command in ("hitting", "restricted-harnack"):
        out["r"] = ctx.number(p["r"], k + "r", lo=0.0)
        if p["lam"] is not None:
            out["lam"] = ctx.number(p["lam"], k + "lam", lo=0.0)
        if command == "hitting":
            out["fractions"] = ctx.numbers(p["fractions"], k + "fractions", 0.0, 1.0)
            if p["start"] is not None:
                out["start"] = ctx.vector(p["start"], k + "start", dim)
        else:
            out["n_probes"] = ctx.number(p["n_probes"], k + "n_probes", 1, integer=True)
    elif command == "harmonic":
        out["domain"] = build_region(ctx, p["domain"], k + "domain", dim)
        if not isinstance(out["domain"], Ball):
            ctx.fail(k + "domain", "domain must be a ball")
        pts = p["points"]
        if not isinstance(pts, list) or not pts:
            ctx.fail(k + "points", "expected a list of points")
        out["points"] = [ctx.vector(q, f"{k}points[{i}]", dim) for i, q in enumerate(pts)]
    elif command == "harnack":
        out["n_probes"] = ctx.number(p["n_probes"], k + "n_probes", 1, integer=True)
        if p["amplitudes"] is not None:
            if not isinstance(out["data"], est.SignedBump):
                ctx.fail(k + "amplitudes", "an amplitude scan needs signed data")
            out["amplitudes"] = ctx.numbers(p["amplitudes"], k + "amplitudes", lo=0.0)
            if p["c1"] is None:
                ctx.fail(k + "c1", "an amplitude scan needs c1")
        if p["c1"] is not None:
            out["c1"] = ctx.number(p["c1"], k + "c1", lo=1.0)
        if any(not 0.0 < r < 0.25 for r in out["radii"]):
            ctx.fail(k + "radii", "radii must lie in (0, 1/4)")
    elif command == "hoelder":
        out["R"] = ctx.number(p["R"], k + "R", lo=0.0)
        out["scales"] = ctx.numbers(p["scales"], k + "scales", lo=0.0)
        out["n_probes"] = ctx.number(p["n_probes"], k + "n_probes", 2, integer=True)
    elif command == "levy-check":
        out["start"] = _point(ctx, p["start"], k + "start", dim)
        out["set_a"] = build_region(ctx, p["set_a"], k + "set_a", dim)
        out["set_b"] = build_region(ctx, p["set_b"], k + "set_b", dim)
        out["horizon"] = ctx.number(p["horizon"], k + "horizon", lo=0.0)
        if p["container"] is not None:
            out["container"] = build_region(ctx, p["container"], k + "container", dim)
        out["angular_nodes"] = ctx.number(p["angular_nodes"], k + "angular_nodes", 1, integer=True)
    elif command == "nondegeneracy":
        out["point"] = _point(ctx, p["point"], k + "point", dim)
        out["rhos"] = ctx.numbers(p["rhos"], k + "rhos", 0.0, 1.0)
        if p["normalizer"] is not None:
            out["normalizer"] = ctx.number(p["normalizer"], k + "normalizer", lo=0.0)
        out["n_angular"] = ctx.number(p["n_angular"], k + "n_angular", 1, integer=True)
    elif command == "eta":
        out["js"] = ctx.numbers(p["js"], k + "js", 1, integer=True)
        out["n_probe"] = ctx.number(p["n_probe"], k + "n_probe", 1, integer=True)
    elif command == "apply-l":
        out["function"] = build_function(ctx, p["function"], k + "function", dim)
        pts = p["points"]
        if not isinstance(pts, list) or not pts:
            ctx.fail(k + "points", "expected a list of points")
        out["points"] = [ctx.vector(q, f"{k}points[{i}]", dim) for i, q in enumerate(pts)]
        if p["form"] not in ("symmetric", "compensated"):
            ctx.fail(k + "form", "form must be symmetric or compensated")
        out["n_angular"] = ctx.number(p["n_angular"], k + "n_angular", 1, integer=True)
    elif command == "karamata":
        if p["side"] not in ("small", "large"):
            ctx.fail(k + "side", "side must be small or large")
        out["beta"] = ctx.number(p["beta"], k + "beta")
        out["radii"] = ctx.numbers(p["radii"], k + "radii", 0.0, 1.0)
    elif command == "geometry-check":
        out["count"] = ctx.number(p["count"], k + "count", 1, integer=True)
        out["dims"] = ctx.numbers(p["dims"], k + "dims", 2, 8, integer=True)
        if p["inflate"] is not None:
            out["inflate"] = ctx.number(p["inflate"], k + "inflate", lo=0.0)
        out["search"] = ctx.number(p["search"], k + "search", 1, integer=True)
    return out


def load_config(path, command: str, overrides=()) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, command, overrides)
