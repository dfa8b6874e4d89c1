"""Anisotropic jump kernels with cone-supported angular profiles.

A kernel is the product of an angular factor, which is a step function on a
finite family of symmetric spherical caps, and a radial density ``j``.  A
spatial modulator in [0, 1] interpolates between the lower and upper
angular values, which introduces state dependence while keeping

    lower(h/|h|) j(|h|) <= n(x, h) <= upper(h/|h|) j(|h|)

and ``n(x, h) == n(x, -h)`` exact by construction (the modulator only sees
``x``).

Example::

    >>> iso = isotropic_kernel(dim=2, alpha=1.0)
    >>> float(eval_n(iso, [0.0, 0.0], [1.0, 0.0]))
    1.0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import integrate, special

from . import _core

__all__ = [
    "UnitVector",
    "Cap",
    "ConeSystem",
    "Constant",
    "LogPower",
    "Product",
    "PowerTail",
    "TruncatedTail",
    "ExponentialTail",
    "RadialProfile",
    "ConstantOne",
    "Sinusoidal",
    "Patchwise",
    "JumpKernel",
    "GridSpec",
    "CheckResult",
    "ValidationReport",
    "AngularRule",
    "eval_n",
    "validate_kernel",
    "tail_mass",
    "nondegeneracy_matrix",
    "angular_rule",
    "sphere_area",
    "cap_area",
    "isotropic_kernel",
    "cone_kernel",
    "gauss_legendre",
]


def gauss_legendre(n: int = 16):
    x, w = np.polynomial.legendre.leggauss(n)
    return np.ascontiguousarray(x), np.ascontiguousarray(w)


_GLX, _GLW = gauss_legendre(16)


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim (2 for dim=1)."""
    return 2.0 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def cap_area(dim: int, cosine: float) -> float:
    """Measure of {xi : |<xi, axis>| >= cosine} on the unit sphere."""
    if dim == 1 or cosine <= 0.0:
        return sphere_area(dim)
    s2 = 1.0 - cosine * cosine
    return sphere_area(dim) * float(special.betainc((dim - 1) / 2, 0.5, s2))


# ---------------------------------------------------------------------------
# directions and caps


@dataclass(frozen=True)
class UnitVector:
    components: tuple

    def __init__(self, components: Sequence[float]):
        arr = np.asarray(components, dtype=float).ravel()
        if arr.size < 1:
            raise ValueError("unit vector needs at least one component")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"not a unit vector: |v| = {norm!r}")
        object.__setattr__(self, "components", tuple(float(c) for c in arr))

    @classmethod
    def normalized(cls, v: Sequence[float]) -> "UnitVector":
        arr = np.asarray(v, dtype=float)
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        out = arr / norm
        # renormalize once more so the 1e-12 check cannot trip on rounding
        return cls(out / np.linalg.norm(out))

    @property
    def dim(self) -> int:
        return len(self.components)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


@dataclass(frozen=True)
class Cap:
    """Symmetric cap {xi : min(|xi - axis|, |xi + axis|) <= chordal_radius}.

    Membership is decided through ``cosine = max(0, 1 - chordal_radius**2/2)``
    so that a cap given by its cosine (``Cap.from_cosine``) is reproduced
    exactly.  A chordal radius of sqrt(2) or more covers the whole sphere.
    """

    axis: UnitVector
    chordal_radius: float
    cosine: float = field(default=None)

    def __post_init__(self):
        if not isinstance(self.axis, UnitVector):
            object.__setattr__(self, "axis", UnitVector(self.axis))
        if not 0.0 < self.chordal_radius <= 2.0:
            raise ValueError(f"chordal radius must lie in (0, 2], got {self.chordal_radius}")
        if self.cosine is None:
            c = 1.0 - 0.5 * self.chordal_radius**2
            object.__setattr__(self, "cosine", max(0.0, c))

    @classmethod
    def from_cosine(cls, axis, cosine: float) -> "Cap":
        if not 0.0 <= cosine < 1.0:
            raise ValueError("cap cosine must lie in [0, 1)")
        return cls(axis, math.sqrt(2.0 * (1.0 - cosine)), cosine)

    @property
    def half_angle(self) -> float:
        """Opening angle of the cap about its axis, at most pi/2."""
        return math.acos(self.cosine)

    def contains(self, xi) -> bool:
        return abs(float(np.dot(np.asarray(self.axis), xi))) >= self.cosine


@dataclass(frozen=True)
class ConeSystem:
    caps: tuple
    delta: float
    upper_values: tuple

    def __post_init__(self):
        caps = tuple(self.caps)
        if not caps:
            raise ValueError("cone system needs at least one cap")
        dims = {c.axis.dim for c in caps}
        if len(dims) != 1:
            raise ValueError("caps have inconsistent dimensions")
        if not self.delta > 0.0:
            raise ValueError("delta must be positive")
        upper = tuple(float(u) for u in self.upper_values)
        if len(upper) != len(caps):
            raise ValueError("one upper value per cap is required")
        if any(u < self.delta for u in upper):
            raise ValueError("upper values must be >= delta")
        object.__setattr__(self, "caps", caps)
        object.__setattr__(self, "upper_values", upper)

    @property
    def dim(self) -> int:
        return self.caps[0].axis.dim

    @property
    def governing_angle(self) -> float:
        """Smallest cap half-angle; the cone lower bound holds inside it."""
        return min(c.half_angle for c in self.caps)

    def weights(self) -> np.ndarray:
        """upper value times cap measure, per cap."""
        return np.array([u * cap_area(self.dim, c.cosine) for c, u in zip(self.caps, self.upper_values)])


# ---------------------------------------------------------------------------
# slowly varying factors


@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError("constant must be positive")

    def reduce(self):
        return float(self.c), 0.0


@dataclass(frozen=True)
class LogPower:
    """t -> log(e/t)**p."""

    p: float

    def reduce(self):
        return 1.0, float(self.p)


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def reduce(self):
        c, p = 1.0, 0.0
        for f in self.factors:
            fc, fp = f.reduce()
            c *= fc
            p += fp
        return c, p


# ---------------------------------------------------------------------------
# tails (the rule for j beyond t = 1)


@dataclass(frozen=True)
class PowerTail:
    """Continues j(t) = scale * ell(1) * t**-(d+alpha) beyond 1."""

    scale: float = 1.0
    kind = _core.TAIL_POWER

    @property
    def param(self) -> float:
        return 0.0


@dataclass(frozen=True)
class TruncatedTail:
    cutoff: float
    scale: float = 1.0
    kind = _core.TAIL_TRUNCATED

    def __post_init__(self):
        if not self.cutoff > 1.0:
            raise ValueError("truncation cutoff must exceed 1")

    @property
    def param(self) -> float:
        return float(self.cutoff)


@dataclass(frozen=True)
class ExponentialTail:
    rate: float
    scale: float = 1.0
    kind = _core.TAIL_EXPONENTIAL

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError("exponential rate must be positive")

    @property
    def param(self) -> float:
        return float(self.rate)


@dataclass(frozen=True)
class RadialProfile:
    alpha: float
    ell: object = field(default_factory=Constant)
    tail: object = field(default_factory=PowerTail)
    kappa: float = 1.0
    sigma: float = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError("alpha must lie in (0, 2)")
        if self.kappa < 1.0:
            raise ValueError("kappa must be >= 1")
        if self.sigma is None:
            object.__setattr__(self, "sigma", 0.5 * self.alpha)
        # sigma >= alpha is accepted here and reported by validate_kernel
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")

    def ell_params(self):
        return self.ell.reduce()

    def j(self, t, dim: int) -> np.ndarray:
        """Radial density at distances ``t`` for the given dimension."""
        kd = _profile_only_data(self, dim)
        ts = np.ascontiguousarray(np.atleast_1d(np.asarray(t, dtype=float)))
        out = np.empty_like(ts)
        _core.j_many(ts, kd, out)
        return out if np.ndim(t) else float(out[0])


# ---------------------------------------------------------------------------
# spatial modulators


@dataclass(frozen=True)
class ConstantOne:
    """Translation-invariant case: the kernel sits at its upper values."""

    kind = _core.MOD_CONSTANT


@dataclass(frozen=True)
class Sinusoidal:
    """m(x) = (1 + sin(<frequency, x> + phase)) / 2."""

    frequency: tuple
    phase: float = 0.0
    kind = _core.MOD_SINUSOIDAL

    def __post_init__(self):
        object.__setattr__(self, "frequency", tuple(float(f) for f in self.frequency))


@dataclass(frozen=True)
class Patchwise:
    """Periodic grid of values; cell index of x is floor(x_k / cell) mod shape_k."""

    values: np.ndarray
    cell: float = 1.0
    kind = _core.MOD_PATCHWISE

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.size == 0 or np.any(vals < 0.0) or np.any(vals > 1.0):
            raise ValueError("patch values must be non-empty and lie in [0, 1]")
        if not self.cell > 0.0:
            raise ValueError("cell size must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __hash__(self):
        return hash((self.values.tobytes(), self.values.shape, self.cell))

    def __eq__(self, other):
        return (
            isinstance(other, Patchwise)
            and self.cell == other.cell
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
        )


# ---------------------------------------------------------------------------
# the kernel


def _orthonormal_complement(axis: np.ndarray) -> np.ndarray:
    d = axis.size
    if d == 1:
        return np.zeros((0, 1))
    m = np.column_stack([axis, np.eye(d)])
    q, _ = np.linalg.qr(m)
    comp = q[:, 1:d].T
    # remove the axis component left by rounding and renormalize
    comp -= np.outer(comp @ axis, axis)
    comp /= np.linalg.norm(comp, axis=1)[:, None]
    return comp


def _profile_data(radial: RadialProfile, dim: int) -> dict:
    ell_c, ell_p = radial.ell_params()
    return dict(
        dim=int(dim),
        alpha=float(radial.alpha),
        ell_c=float(ell_c),
        ell_p=float(ell_p),
        tail_kind=int(radial.tail.kind),
        tail_param=float(radial.tail.param),
        tail_scale=float(radial.tail.scale),
    )


def _modulator_data(mod, dim: int) -> dict:
    vec = np.zeros(dim)
    phase = 0.0
    values = np.ones(1)
    shape = np.ones(dim, dtype=np.int64)
    cell = 1.0
    if isinstance(mod, Sinusoidal):
        if len(mod.frequency) != dim:
            raise ValueError("frequency vector has the wrong dimension")
        vec = np.array(mod.frequency)
        phase = float(mod.phase)
    elif isinstance(mod, Patchwise):
        vals = mod.values
        if vals.ndim == 1 and dim > 1:
            vals = vals.reshape((vals.size,) + (1,) * (dim - 1))
        if vals.ndim != dim:
            raise ValueError("patch grid must have one axis per dimension")
        values = np.ascontiguousarray(vals.ravel())
        shape = np.array(vals.shape, dtype=np.int64)
        cell = float(mod.cell)
    return dict(
        mod_kind=int(mod.kind),
        mod_vec=vec,
        mod_phase=phase,
        mod_values=values,
        mod_shape=shape,
        mod_cell=cell,
    )


def _profile_only_data(radial: RadialProfile, dim: int):
    """KernelData carrying a full-sphere cap; enough for radial computations."""
    axes = np.zeros((1, dim))
    axes[0, 0] = 1.0
    return _core.KernelData(
        axes=axes,
        cosines=np.zeros(1),
        upper=np.ones(1),
        delta=1.0,
        theta_c=np.full(1, 0.5 * math.pi),
        basis=np.zeros((1, max(dim - 1, 0), dim)),
        **_profile_data(radial, dim),
        **_modulator_data(ConstantOne(), dim),
    )


@dataclass(frozen=True)
class JumpKernel:
    cones: ConeSystem
    radial: RadialProfile
    modulator: object = field(default_factory=ConstantOne)

    def __post_init__(self):
        # fail early on dimension mismatches
        _modulator_data(self.modulator, self.cones.dim)

    @property
    def dim(self) -> int:
        return self.cones.dim

    @property
    def alpha(self) -> float:
        return self.radial.alpha

    @property
    def translation_invariant(self) -> bool:
        return isinstance(self.modulator, ConstantOne)

    @cached_property
    def data(self):
        d = self.dim
        caps = self.cones.caps
        axes = np.array([np.asarray(c.axis) for c in caps])
        basis = np.array([_orthonormal_complement(a) for a in axes]).reshape(len(caps), max(d - 1, 0), d)
        return _core.KernelData(
            axes=axes,
            cosines=np.array([c.cosine for c in caps]),
            upper=np.array(self.cones.upper_values),
            delta=float(self.cones.delta),
            theta_c=np.array([c.half_angle for c in caps]),
            basis=np.ascontiguousarray(basis),
            **_profile_data(self.radial, d),
            **_modulator_data(self.modulator, d),
        )

    def ell(self, t):
        c, p = self.radial.ell_params()
        t = np.asarray(t, dtype=float)
        return c * np.log(np.e / t) ** p if p else c * np.ones_like(t)

    def j(self, t):
        return self.radial.j(t, self.dim)

    def modulator_values(self, xs) -> np.ndarray:
        xs = np.ascontiguousarray(np.atleast_2d(np.asarray(xs, dtype=float)))
        out = np.empty(xs.shape[0])
        _core.modulator_many(xs, self.data, out)
        return out

    def angular_bounds(self, xis):
        """(k1, k2) at unit directions ``xis`` (rows)."""
        xis = np.ascontiguousarray(np.atleast_2d(np.asarray(xis, dtype=float)))
        k1 = np.empty(xis.shape[0])
        k2 = np.empty(xis.shape[0])
        _core.caps_many(xis, self.data, k1, k2)
        return k1, k2

    def radial_integral(self, a, b, power: float = 0.0):
        """int_a^b t**(d-1+power) j(t) dt, vectorized over a, b."""
        a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        a_flat = np.ascontiguousarray(a_arr.ravel())
        b_flat = np.ascontiguousarray(b_arr.ravel())
        out = np.empty(a_flat.size)
        _core.radial_integral_many(a_flat, b_flat, float(power), self.data, _GLX, _GLW, out)
        out = out.reshape(a_arr.shape)
        return out if out.ndim else float(out)


def isotropic_kernel(dim: int = 2, alpha: float = 1.0, ell=None, tail=None, kappa: float = 1.0, sigma=None) -> JumpKernel:
    """n(x, h) = ell(|h|) |h|^(-d-alpha): one cap covering the whole sphere."""
    axis = np.zeros(dim)
    axis[0] = 1.0
    cones = ConeSystem((Cap(UnitVector(axis), 2.0),), 1.0, (1.0,))
    radial = RadialProfile(alpha, ell or Constant(1.0), tail or PowerTail(), kappa, sigma)
    return JumpKernel(cones, radial)


def cone_kernel(axes, cosine: float, dim: int = 2, alpha: float = 1.0, delta: float = 1.0, upper=None,
                ell=None, tail=None, modulator=None, kappa: float = 1.0, sigma=None) -> JumpKernel:
    """Caps of a common cosine around each axis."""
    caps = tuple(Cap.from_cosine(UnitVector.normalized(a), cosine) for a in axes)
    upper = tuple(upper) if upper is not None else (delta,) * len(caps)
    radial = RadialProfile(alpha, ell or Constant(1.0), tail or PowerTail(), kappa, sigma)
    return JumpKernel(ConeSystem(caps, delta, upper), radial, modulator or ConstantOne())


# ---------------------------------------------------------------------------
# pointwise evaluation


def eval_n(kernel: JumpKernel, x, h):
    """Kernel value(s); rows of ``x`` and ``h`` are broadcast against each other."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    scalar = h.ndim == 1
    xs, hs = np.broadcast_arrays(np.atleast_2d(x), np.atleast_2d(h))
    if xs.shape[-1] != kernel.dim:
        raise ValueError("point dimension does not match the kernel")
    if np.any(np.all(hs == 0.0, axis=1)):
        raise ValueError("kernel is undefined at h = 0")
    out = np.empty(hs.shape[0])
    _core.n_many(np.ascontiguousarray(xs), np.ascontiguousarray(hs), kernel.data, out)
    return float(out[0]) if scalar and x.ndim == 1 else out


def _bounds(kernel: JumpKernel, hs: np.ndarray):
    lo = np.empty(hs.shape[0])
    hi = np.empty(hs.shape[0])
    _core.bounds_many(np.ascontiguousarray(hs), kernel.data, lo, hi)
    return lo, hi


# ---------------------------------------------------------------------------
# integrated quantities


def tail_mass(radial: RadialProfile, dim: int, R: float) -> float:
    """int_{|z| > R} j(|z|) dz by adaptive quadrature (scipy.integrate.quad)."""
    if not R > 0.0:
        raise ValueError("R must be positive")
    c, p = radial.ell_params()
    d_alpha = dim + radial.alpha

    def inner(s):
        # t = e^s, dt = t ds, integrand t^(d-1) j(t)
        t = math.exp(s)
        return c * math.log(math.e / t) ** p * t ** (dim - d_alpha) if p else c * t ** (dim - d_alpha)

    total = 0.0
    if R < 1.0:
        val, _ = integrate.quad(inner, math.log(R), 0.0, limit=200, epsabs=0.0, epsrel=1e-12)
        total += val
    tail = radial.tail
    lo = max(R, 1.0)
    scale = c * tail.scale
    if isinstance(tail, TruncatedTail):
        if tail.cutoff > lo:
            val, _ = integrate.quad(lambda t: t ** (dim - 1 - d_alpha), lo, tail.cutoff, epsabs=0.0, epsrel=1e-12)
            total += scale * val
    elif isinstance(tail, ExponentialTail):
        val, _ = integrate.quad(
            lambda t: t ** (dim - 1 - d_alpha) * math.exp(-tail.rate * (t - 1.0)),
            lo, np.inf, epsabs=0.0, epsrel=1e-12, limit=200,
        )
        total += scale * val
    else:
        val, _ = integrate.quad(lambda t: t ** (dim - 1 - d_alpha), lo, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
        total += scale * val
    total *= sphere_area(dim)
    if not math.isfinite(total):
        raise ArithmeticError("tail mass diverges")
    return total


@dataclass(frozen=True)
class AngularRule:
    """Quadrature on the union of caps: nodes, weights, and k1/k2 at nodes."""

    nodes: np.ndarray
    weights: np.ndarray
    k1: np.ndarray
    k2: np.ndarray

    def values(self, modulation: float) -> np.ndarray:
        """Angular factor k1 + m (k2 - k1) at the nodes."""
        return np.clip(self.k1 + modulation * (self.k2 - self.k1), self.k1, self.k2)


def _circle_rule(cones: ConeSystem, n: int, extra_marks=()):
    if all(c.cosine <= 0.0 for c in cones.caps) and not extra_marks:
        # periodic smooth integrands: the trapezoid rule converges geometrically
        m = 4 * n
        phi = 2.0 * math.pi * (np.arange(m) + 0.5) / m
        return np.column_stack([np.cos(phi), np.sin(phi)]), np.full(m, 2.0 * math.pi / m)
    # breakpoints of the piecewise constant angular factor on [0, 2 pi)
    marks = [0.0, 2.0 * math.pi] + [e % (2.0 * math.pi) for e in extra_marks]
    for cap in cones.caps:
        if cap.cosine <= 0.0:
            continue
        a = math.atan2(cap.axis.components[1], cap.axis.components[0])
        th = cap.half_angle
        for base in (a, a + math.pi):
            for e in (base - th, base + th):
                marks.append(e % (2.0 * math.pi))
    marks = np.unique(np.array(marks))
    x, w = gauss_legendre(n)
    nodes, weights = [], []
    for lo, hi in zip(marks[:-1], marks[1:]):
        if hi - lo < 1e-15:
            continue
        mid = 0.5 * (lo + hi)
        probe = np.array([math.cos(mid), math.sin(mid)])
        if not any(c.contains(probe) for c in cones.caps):
            continue
        phi = mid + 0.5 * (hi - lo) * x
        nodes.append(np.column_stack([np.cos(phi), np.sin(phi)]))
        weights.append(0.5 * (hi - lo) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _sphere3_rule(cones: ConeSystem, n: int):
    x, w = gauss_legendre(n)
    n_az = 2 * n
    psi = 2.0 * math.pi * (np.arange(n_az) + 0.5) / n_az
    nodes, weights = [], []
    for i, cap in enumerate(cones.caps):
        axis = np.asarray(cap.axis)
        basis = _orthonormal_complement(axis)
        # polar cosine u in [cosine, 1] about the axis, both hemispheres
        u = cap.cosine + 0.5 * (1.0 - cap.cosine) * (x + 1.0)
        wu = 0.5 * (1.0 - cap.cosine) * w
        uu, pp = np.meshgrid(u, psi, indexing="ij")
        ww = np.repeat(wu[:, None], n_az, axis=1) * (2.0 * math.pi / n_az)
        s = np.sqrt(np.maximum(0.0, 1.0 - uu**2))
        pts = uu[..., None] * axis + s[..., None] * (np.cos(pp)[..., None] * basis[0] + np.sin(pp)[..., None] * basis[1])
        pts = pts.reshape(-1, 3)
        ww = ww.ravel()
        for sign in (1.0, -1.0):
            cand = sign * pts
            keep = np.ones(len(cand), dtype=bool)
            for other in cones.caps[:i]:
                keep &= np.abs(cand @ np.asarray(other.axis)) < other.cosine
            nodes.append(cand[keep])
            weights.append(ww[keep])
    return np.concatenate(nodes), np.concatenate(weights)


def _sphere_mc_rule(cones: ConeSystem, n: int, seed: int = 12345):
    d = cones.dim
    rng = np.random.default_rng(seed)
    m = max(4096, n**3)
    g = rng.standard_normal((m, d))
    pts = g / np.linalg.norm(g, axis=1)[:, None]
    keep = np.zeros(m, dtype=bool)
    for cap in cones.caps:
        keep |= np.abs(pts @ np.asarray(cap.axis)) >= cap.cosine
    w = np.full(m, sphere_area(d) / m)
    return pts[keep], w[keep]


def angular_rule(kernel_or_cones, n: int = 32, extra_marks=()) -> AngularRule:
    """Integration rule over the cap union of a cone system.

    Exact breakpoints in d=2, per-cap product rules with first-cap masking
    in d=3, and a seeded Monte Carlo rule in d >= 4.  ``extra_marks`` adds
    polar angles (d=2 only) where the integrand has kinks.
    """
    cones = kernel_or_cones.cones if isinstance(kernel_or_cones, JumpKernel) else kernel_or_cones
    d = cones.dim
    if d == 1:
        nodes, weights = np.array([[1.0], [-1.0]]), np.ones(2)
    elif d == 2:
        nodes, weights = _circle_rule(cones, n, tuple(extra_marks))
    elif d == 3:
        nodes, weights = _sphere3_rule(cones, n)
    else:
        nodes, weights = _sphere_mc_rule(cones, n)
    kern = kernel_or_cones if isinstance(kernel_or_cones, JumpKernel) else JumpKernel(
        cones, RadialProfile(1.0)
    )
    k1, k2 = kern.angular_bounds(nodes)
    return AngularRule(np.ascontiguousarray(nodes), np.ascontiguousarray(weights), k1, k2)


def nondegeneracy_matrix(kernel: JumpKernel, x, rho: float, normalizer=None, n_angular: int = 64):
    """N(rho) int_{|h| <= rho} h h^T n(x, h) dh and its eigenvalues.

    ``normalizer`` is a callable of rho; the default is rho**(alpha - 2).
    """
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    if not rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    scale = normalizer(rho) if normalizer is not None else rho ** (kernel.alpha - 2.0)
    if not scale > 0.0:
        raise ValueError("normalizer must be positive")
    rule = angular_rule(kernel, n_angular)
    m = float(kernel.modulator_values(np.asarray(x, dtype=float))[0])
    vals = rule.values(m) * rule.weights
    second = (rule.nodes * vals[:, None]).T @ rule.nodes
    radial = kernel.radial_integral(0.0, rho, 2.0)
    mat = scale * radial * second
    mat = 0.5 * (mat + mat.T)
    return mat, np.linalg.eigvalsh(mat)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class GridSpec:
    n_radial: int = 64
    radial_max: float = 64.0
    n_points: int = 2000
    tol: float = 1e-9
    seed: int = 0
    spatial_box: float = 5.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_margin: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]


def _random_directions(rng, m: int, d: int) -> np.ndarray:
    g = rng.standard_normal((m, d))
    return g / np.linalg.norm(g, axis=1)[:, None]


def _cone_directions(rng, kernel: JumpKernel, m: int) -> np.ndarray:
    """Directions inside the caps, drawn with the compiled sampler."""
    from .simulate import sampler_data  # local import: simulate depends on this module

    kd = kernel.data
    sd = sampler_data(kernel, 0.5)
    out_h = np.empty((m, kernel.dim))
    acc = np.empty(m, dtype=np.bool_)
    _core.sample_jumps(np.zeros(kernel.dim), kd, sd, np.uint64(rng.integers(2**32)), np.uint64(0), 0, out_h, acc)
    return out_h / np.linalg.norm(out_h, axis=1)[:, None]


def validate_kernel(kernel: JumpKernel, grid: GridSpec | None = None) -> ValidationReport:
    """Numerical checks of symmetry, the angular sandwich, the cone lower
    bound, and the radial conditions J1 (slow variation near 0), J2
    (comparability with constant kappa beyond 1) and J3 (polynomial tail
    decay of order sigma)."""
    grid = grid or GridSpec()
    rng = np.random.default_rng(grid.seed)
    d = kernel.dim
    m = grid.n_points
    checks = []

    xs = rng.uniform(-grid.spatial_box, grid.spatial_box, (m, d))
    radii = np.exp(rng.uniform(math.log(1e-3), math.log(grid.radial_max), m))
    dirs = np.concatenate([_random_directions(rng, m // 2, d), _cone_directions(rng, kernel, m - m // 2)])
    hs = dirs * radii[:, None]

    plus = eval_n(kernel, xs, hs)
    minus = eval_n(kernel, xs, -hs)
    asym = float(np.max(np.abs(plus - minus)))
    checks.append(CheckResult("symmetry", asym == 0.0, -asym, "max |n(x,h) - n(x,-h)|"))

    lo, hi = _bounds(kernel, hs)
    margin = float(min(np.min(plus - lo), np.min(hi - plus)))
    checks.append(CheckResult("sandwich", margin >= 0.0, margin, "min distance to k1 j / k2 j"))

    # cone lower bound inside the governing opening angle of each cap
    # (delta j is recomputed from |h| by the compiled path so rounding matches)
    cone_margin = np.inf
    norms = np.linalg.norm(hs, axis=1)
    jv = np.empty_like(norms)
    _core.j_many(norms, kernel.data, jv)
    for cap in kernel.cones.caps:
        inside = np.abs(dirs @ np.asarray(cap.axis)) >= cap.cosine
        if np.any(inside):
            cone_margin = min(cone_margin, float(np.min(plus[inside] - kernel.cones.delta * jv[inside])))
    checks.append(CheckResult("cone_lower_bound", cone_margin >= 0.0, cone_margin, "min n - delta j on caps"))

    checks.append(_check_j1(kernel))
    checks.append(_check_j2(kernel, grid))
    checks.append(_check_j3(kernel, grid))

    inner = kernel.radial_integral(0.0, 1.0, 2.0)
    outer = kernel.radial_integral(1.0, np.inf, 0.0)
    finite = math.isfinite(inner) and math.isfinite(outer)
    checks.append(CheckResult("integrability", finite, inner + outer, "int (|z|^2 ^ 1) j, per unit solid angle"))
    return ValidationReport(checks)


def _check_j1(kernel: JumpKernel) -> CheckResult:
    ts = np.logspace(-12, math.log10(1.999), 400)
    ell = kernel.ell(ts)
    positive = bool(np.all(ell > 0.0) and np.all(np.isfinite(ell)))
    # slow variation: ell(t/2)/ell(t) drifts toward 1 as t -> 0
    rs = 10.0 ** -np.arange(2, 13, 2)
    dev = np.abs(kernel.ell(rs / 2) / kernel.ell(rs) - 1.0)
    approaching = bool(np.all(np.diff(dev) <= 1e-14))
    detail = "deviation of ell(t/2)/ell(t) from 1 at t=1e-12: %.3g" % dev[-1]
    return CheckResult("J1", positive and approaching, -float(dev[-1]), detail)


def _check_j2(kernel: JumpKernel, grid: GridSpec) -> CheckResult:
    ts = np.logspace(0.0, math.log10(grid.radial_max), grid.n_radial)
    jv = kernel.j(ts)
    running_min = np.minimum.accumulate(jv)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(jv > 0.0, jv / running_min, 0.0)
    worst = float(np.max(ratio))
    kappa = kernel.radial.kappa
    ok = worst <= kappa * (1.0 + grid.tol)
    return CheckResult("J2", ok, kappa - worst, "max j(t)/j(s) over 1 <= s <= t")


def _check_j3(kernel: JumpKernel, grid: GridSpec) -> CheckResult:
    radial = kernel.radial
    sigma = radial.sigma
    rs = np.logspace(0.0, math.log10(grid.radial_max), 16)
    g = np.array([r**sigma * tail_mass(radial, kernel.dim, r) for r in rs])
    if g[-1] == 0.0:
        return CheckResult("J3", True, 1.0, "tail vanishes")
    slope = math.log(g[-1] / g[-4]) / math.log(rs[-1] / rs[-4])
    # a negative log-log slope means R^sigma * tail -> 0, so the limsup is 0
    if slope < -grid.tol:
        return CheckResult("J3", True, -slope, "R^sigma tail decays with slope %.4g" % slope)
    ok = slope <= grid.tol and g[-1] <= 1.0 + grid.tol
    return CheckResult("J3", ok, 1.0 - g[-1], "R^sigma tail slope %.4g, value %.4g at R=%g" % (slope, g[-1], rs[-1]))
