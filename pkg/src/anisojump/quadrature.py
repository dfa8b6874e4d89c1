"""Deterministic integrals against the kernel.

``apply_L`` evaluates the nonlocal operator

    L f(x) = int ( f(x+h) - f(x) - <grad f(x), h> 1{|h| <= 1} ) n(x, h) dh

in polar coordinates: the angular factor is integrated with the cap-adapted
rule from ``kernel.angular_rule`` and the radial part is split at |h| = 1.
Near the origin the radius is cut into dyadic shells until the shell
integral agrees with its second-order Taylor prediction, after which the
Taylor term is integrated in closed form.

The remaining functions compute masses of regions under the kernel or under
a radial profile: the tail term of the Harnack bound, the exterior mass
M(x0, r), and the normalised exterior measures nu and eta used to control
the influence of far-away data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _core
from .geometry import Annulus, Ball, ball_points
from .kernel import (
    ConeSystem,
    Cap,
    JumpKernel,
    RadialProfile,
    UnitVector,
    _profile_only_data,
    angular_rule,
    gauss_legendre,
    sphere_area,
)

__all__ = [
    "TestFunction",
    "ConstantFunction",
    "CompactBump",
    "Cosine",
    "Barrier",
    "TailMeasureQuery",
    "apply_L",
    "harnack_tail_term",
    "exterior_mass",
    "big_M",
    "nu_measure",
    "eta_rj",
    "region_mass",
    "ball_average",
]

_GLX, _GLW = gauss_legendre(16)


# ---------------------------------------------------------------------------
# test functions: value on arrays of points (..., d), gradient and Hessian at
# a single point


class TestFunction:
    __test__ = False  # keep pytest from collecting this as a test class

    #: (value, center, radius) when the function is constant outside a ball
    outside = None

    def value(self, pts):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def hess(self, x):
        raise NotImplementedError

    def __call__(self, pts):
        return self.value(np.asarray(pts, dtype=float))


@dataclass(frozen=True)
class ConstantFunction(TestFunction):
    c: float = 1.0

    def value(self, pts):
        return np.full(np.shape(pts)[:-1], float(self.c))

    def grad(self, x):
        return np.zeros(np.size(x))

    def hess(self, x):
        d = np.size(x)
        return np.zeros((d, d))

    @property
    def outside(self):
        return None


class _Radial(TestFunction):
    """f(x) = phi(|x - center|) with phi even and smooth at 0."""

    center: np.ndarray

    def phi(self, s):
        raise NotImplementedError

    def dphi_over_s(self, s):
        """phi'(s)/s, finite at 0."""
        raise NotImplementedError

    def d2phi(self, s):
        raise NotImplementedError

    def value(self, pts):
        s = np.linalg.norm(np.asarray(pts, dtype=float) - self.center, axis=-1)
        return self.phi(s)

    def grad(self, x):
        y = np.asarray(x, dtype=float) - self.center
        s = float(np.linalg.norm(y))
        return float(self.dphi_over_s(np.array(s))) * y

    def hess(self, x):
        y = np.asarray(x, dtype=float) - self.center
        d = y.size
        s = float(np.linalg.norm(y))
        a = float(self.dphi_over_s(np.array(s)))
        b = float(self.d2phi(np.array(s)))
        if s == 0.0:
            return b * np.eye(d)
        u = y / s
        uu = np.outer(u, u)
        return b * uu + a * (np.eye(d) - uu)


class CompactBump(_Radial):
    """height * (1 - (s/radius)^2)^3 inside the ball, 0 outside (C^2)."""

    def __init__(self, center, radius: float, height: float = 1.0):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.height = float(height)

    @property
    def outside(self):
        return (0.0, self.center, self.radius)

    def phi(self, s):
        q = np.clip(1.0 - (s / self.radius) ** 2, 0.0, None)
        return self.height * q**3

    def dphi_over_s(self, s):
        q = np.clip(1.0 - (s / self.radius) ** 2, 0.0, None)
        return -6.0 * self.height * q**2 / self.radius**2

    def d2phi(self, s):
        q = np.clip(1.0 - (s / self.radius) ** 2, 0.0, None)
        u = s / self.radius
        return self.height * (-6.0 * q**2 + 24.0 * u * u * q) / self.radius**2


class Barrier(_Radial):
    """|x - center|^2 on the inner half ball, r^2 outside B(center, r), joined
    by a quintic smoothstep so the result is C^2."""

    def __init__(self, center, r: float):
        self.center = np.asarray(center, dtype=float)
        self.r = float(r)

    @property
    def outside(self):
        return (self.r**2, self.center, self.r)

    def _step(self, s):
        u = np.clip((s - 0.5 * self.r) / (0.5 * self.r), 0.0, 1.0)
        k = 2.0 / self.r
        S = u**3 * (10.0 - 15.0 * u + 6.0 * u * u)
        dS = 30.0 * u * u * (1.0 - u) ** 2 * k
        d2S = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) * k * k
        return S, dS, d2S

    def phi(self, s):
        S, _, _ = self._step(s)
        return s * s + (self.r**2 - s * s) * S

    def dphi_over_s(self, s):
        s = np.asarray(s, dtype=float)
        S, dS, _ = self._step(s)
        safe = np.where(s > 0.0, s, 1.0)
        return np.where(s > 0.0, 2.0 * (1.0 - S) + (self.r**2 - s * s) * dS / safe, 2.0)

    def d2phi(self, s):
        S, dS, d2S = self._step(s)
        return 2.0 * (1.0 - S) - 4.0 * s * dS + (self.r**2 - s * s) * d2S


class Cosine(TestFunction):
    """cos(<frequency, x>)."""

    def __init__(self, frequency):
        self.frequency = np.asarray(frequency, dtype=float)

    def value(self, pts):
        return np.cos(np.asarray(pts, dtype=float) @ self.frequency)

    def grad(self, x):
        return -math.sin(float(np.dot(self.frequency, x))) * self.frequency

    def hess(self, x):
        return -math.cos(float(np.dot(self.frequency, x))) * np.outer(self.frequency, self.frequency)


# ---------------------------------------------------------------------------
# the operator


def _tail_density(kernel: JumpKernel):
    """t -> t^(d-1) j(t) for t >= 1 as a plain Python callable."""
    c, _ = kernel.radial.ell_params()
    tail = kernel.radial.tail
    a = kernel.alpha
    scale = c * tail.scale
    if tail.kind == _core.TAIL_EXPONENTIAL:
        rate = tail.param
        return lambda t: scale * t ** (-1.0 - a) * math.exp(-rate * (t - 1.0))
    return lambda t: scale * t ** (-1.0 - a)


def _inner_part(kernel, f, x, xi, wk, form, rel_tol, max_shells):
    d = kernel.dim
    f0 = float(f.value(x))
    g0 = f.grad(x)
    hq = np.einsum("mi,ij,mj->m", xi, f.hess(x), xi)
    taylor_weight = 0.5 * float(np.dot(wk, hq))
    total = 0.0
    hi = 1.0
    for k in range(max_shells):
        lo = 0.5 * hi
        s = 0.5 * (math.log(lo) + math.log(hi)) + 0.5 * math.log(hi / lo) * _GLX
        t = np.exp(s)
        wt = 0.5 * math.log(hi / lo) * _GLW * t * t ** (d - 1) * kernel.j(t)
        disp = t[:, None, None] * xi[None, :, :]
        if form == "symmetric":
            diff = 0.5 * (f.value(x + disp) + f.value(x - disp) - 2.0 * f0)
        else:
            diff = f.value(x + disp) - f0 - t[:, None] * (xi @ g0)[None, :]
        shell = float(wt @ diff @ wk)
        predicted = taylor_weight * kernel.radial_integral(lo, hi, 2.0)
        total += shell
        hi = lo
        if abs(shell - predicted) <= rel_tol * max(abs(total), 1e-300) or shell == predicted:
            break
    else:
        raise ArithmeticError("inner integral did not settle")
    total += taylor_weight * kernel.radial_integral(0.0, hi, 2.0)
    return total


def _outer_part(kernel, f, x, xi, wk, panels: int = 8, r_max: float = 2.0**24):
    d = kernel.dim
    f0 = float(f.value(x))
    m_out = kernel.radial_integral(1.0, np.inf, 0.0)
    tail = _tail_density(kernel)
    cutoff = kernel.radial.tail.param if kernel.radial.tail.kind == _core.TAIL_TRUNCATED else math.inf
    if f.outside is not None:
        c_out, center, radius = f.outside
        total = (c_out - f0) * m_out * float(np.sum(wk))
        seg = np.empty((xi.shape[0], 4))
        _core.ray_annulus_many(x, np.ascontiguousarray(xi), np.asarray(center, dtype=float), 0.0, float(radius), seg)
        for m in range(xi.shape[0]):
            for a, b in ((seg[m, 0], seg[m, 1]), (seg[m, 2], seg[m, 3])):
                a, b = max(a, 1.0), min(b, cutoff)
                if not b > a:
                    continue
                edges = np.linspace(a, b, panels + 1)
                for lo, hi in zip(edges[:-1], edges[1:]):
                    t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GLX
                    vals = f.value(x + t[:, None] * xi[m]) - c_out
                    dens = t ** (d - 1) * kernel.j(t)
                    total += wk[m] * 0.5 * (hi - lo) * float(np.dot(_GLW, vals * dens))
        return total
    if isinstance(f, Cosine):
        phase0 = float(np.dot(f.frequency, x))
        total = -f0 * m_out * float(np.sum(wk))
        for m in range(xi.shape[0]):
            w = float(np.dot(f.frequency, xi[m]))
            total += wk[m] * _cosine_tail(kernel, tail, cutoff, phase0, w, m_out)
        return total
    # generic bounded f: dyadic shells out to r_max; the neglected tail is
    # bounded by 2 sup|f| times the kernel mass beyond r_max
    total = 0.0
    lo = 1.0
    while lo < min(r_max, cutoff):
        hi = min(2.0 * lo, cutoff)
        t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GLX
        dens = 0.5 * (hi - lo) * _GLW * t ** (d - 1) * kernel.j(t)
        vals = f.value(x + t[:, None, None] * xi[None, :, :]) - f0
        total += float(dens @ vals @ wk)
        lo = hi
    return total


def _gl_panels(func, edges):
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GLX
        total += 0.5 * (hi - lo) * float(np.dot(_GLW, func(t)))
    return total


def _cosine_tail(kernel, tail, cutoff, phase, w, m_out):
    """int_1^inf cos(phase + w t) t^(d-1) j(t) dt."""
    if w < 0.0:
        phase, w = -phase, -w
    if w < 1e-14:
        return math.cos(phase) * m_out
    kind = kernel.radial.tail.kind
    if kind == _core.TAIL_POWER:
        # scale out the frequency: u = w t turns the tail into w^alpha times a
        # fixed oscillatory integral from u = w
        a = kernel.alpha
        scale = tail(1.0)
        g = lambda u: np.cos(phase + u) * u ** (-1.0 - a)
        head = np.geomspace(w, 1.0, max(2, int(math.ceil(math.log2(1.0 / w))) + 1)) if w < 1.0 else np.array([w])
        top = head[-1] + 40.0 * math.pi
        body = np.linspace(head[-1], top, 161)
        part = _gl_panels(g, head) if head.size > 1 else 0.0
        part += _gl_panels(g, body)
        opts = dict(wvar=1.0, epsabs=1e-15, limlst=200, limit=400)
        c_tail, _ = integrate.quad(lambda u: u ** (-1.0 - a), top, np.inf, weight="cos", **opts)
        s_tail, _ = integrate.quad(lambda u: u ** (-1.0 - a), top, np.inf, weight="sin", **opts)
        part += math.cos(phase) * c_tail - math.sin(phase) * s_tail
        return scale * w**a * part
    # truncated or exponential tails live on a bounded range in practice
    upper = cutoff if kind == _core.TAIL_TRUNCATED else 1.0 + 40.0 / kernel.radial.tail.param
    width = min(1.0, 0.5 / w)
    edges = np.linspace(1.0, upper, int(math.ceil((upper - 1.0) / width)) + 1)
    return _gl_panels(lambda t: np.cos(phase + w * t) * np.array([tail(v) for v in t]), edges)


def _operator_rule(kernel, f, n):
    """Angular rule; for cosines, the far-field integrand has a kink where
    the direction is orthogonal to the frequency, so place a break there."""
    if not isinstance(f, Cosine) or not np.any(f.frequency):
        return angular_rule(kernel, n)
    d = kernel.dim
    if d == 2:
        a = math.atan2(f.frequency[1], f.frequency[0])
        return angular_rule(kernel, n, extra_marks=(a + 0.5 * math.pi, a - 0.5 * math.pi))
    if d == 3 and all(c.cosine <= 0.0 for c in kernel.cones.caps):
        axis = UnitVector.normalized(f.frequency)
        cones = ConeSystem((Cap(axis, 2.0),), kernel.cones.delta, (max(kernel.cones.upper_values),))
        return angular_rule(JumpKernel(cones, kernel.radial, kernel.modulator), n)
    return angular_rule(kernel, n)


def apply_L(kernel: JumpKernel, f: TestFunction, x, form: str = "symmetric", n_angular: int = 64,
            rel_tol: float = 1e-6, max_shells: int = 80) -> float:
    """The nonlocal operator applied to a C^2 test function at ``x``.

    ``form="symmetric"`` integrates the second difference
    (f(x+h) + f(x-h) - 2 f(x))/2 on |h| <= 1, ``form="compensated"`` the
    gradient-compensated first difference; they agree for symmetric kernels.
    """
    if form not in ("symmetric", "compensated"):
        raise ValueError("form must be 'symmetric' or 'compensated'")
    x = np.asarray(x, dtype=float)
    rule = _operator_rule(kernel, f, n_angular)
    m = float(kernel.modulator_values(x)[0])
    wk = rule.weights * rule.values(m)
    keep = wk > 0.0
    xi = np.ascontiguousarray(rule.nodes[keep])
    wk = wk[keep]
    inner = _inner_part(kernel, f, x, xi, wk, form, rel_tol, max_shells)
    outer = _outer_part(kernel, f, x, xi, wk)
    value = inner + outer
    if not math.isfinite(value):
        raise ArithmeticError("non-finite operator value")
    return value


# ---------------------------------------------------------------------------
# region masses


def _full_sphere_rule(dim: int, n: int):
    axis = np.zeros(dim)
    axis[0] = 1.0
    return angular_rule(ConeSystem((Cap(UnitVector(axis), 2.0),), 1.0, (1.0,)), n)


def region_mass(kernel: JumpKernel, y, region, exclude: Ball | None = None, n_angular: int = 64,
                rule=None) -> np.ndarray:
    """int over region \\ exclude of n(y, u - y) du, for each row of ``y``."""
    ys = np.ascontiguousarray(np.atleast_2d(np.asarray(y, dtype=float)))
    ms = kernel.modulator_values(ys)
    out = np.empty(ys.shape[0])
    ex_c = np.zeros(kernel.dim) if exclude is None else np.asarray(exclude.center, dtype=float)
    ex_r = -1.0 if exclude is None else float(exclude.radius)
    if rule is not None or kernel.dim != 2:
        rule = rule or angular_rule(kernel, n_angular)
        _core.region_rate_many(ys, ms, kernel.data, region.encode(), ex_c, ex_r, 0.0,
                               rule.nodes, rule.weights, rule.k1, rule.k2, _GLX, _GLW, out)
        return out
    # in the plane, break the angular rule where rays graze a boundary circle
    circles = _boundary_circles(region) + ([] if exclude is None else [(ex_c, ex_r)])
    for i, yi in enumerate(ys):
        rule_i = angular_rule(kernel, n_angular, extra_marks=_tangent_angles(yi, circles))
        out[i] = _core.region_rate(yi, kernel.data, float(ms[i]), region.encode(), ex_c, ex_r, 0.0,
                                   rule_i.nodes, rule_i.weights, rule_i.k1, rule_i.k2, _GLX, _GLW)
    return out


def _boundary_circles(region):
    c = np.asarray(region.center, dtype=float)
    if isinstance(region, Ball):
        return [(c, region.radius)]
    out = [(c, region.inner)] if region.inner > 0.0 else []
    return out + ([(c, region.outer)] if math.isfinite(region.outer) else [])


def _tangent_angles(y, circles):
    marks = []
    for c, rad in circles:
        v = c - y
        dist = float(np.hypot(v[0], v[1]))
        if rad > 0.0 and dist > rad:
            a = math.atan2(v[1], v[0])
            w = math.asin(rad / dist)
            marks += [a - w, a + w]
    return tuple(marks)


def _generic_negative_mass(kernel, v, g, x0, outer_r, rule, r_max_factor=1e4):
    """int over B(x0, outer_r)^c of g^-(z) n(v, z - v) dz along rays from v."""
    m = float(kernel.modulator_values(v)[0])
    wk = rule.weights * rule.values(m)
    total = 0.0
    d = kernel.dim
    for k in np.nonzero(wk > 0.0)[0]:
        xi = rule.nodes[k]
        _, t_exit = _core._ray_ball(v, xi, np.asarray(x0, dtype=float), outer_r)
        lo = t_exit
        stop = r_max_factor * outer_r
        acc = 0.0
        while lo < stop:
            hi = 2.0 * lo
            t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GLX
            vals = np.maximum(-g(v + t[:, None] * xi), 0.0)
            acc += 0.5 * (hi - lo) * float(np.dot(_GLW, vals * t ** (d - 1) * kernel.j(t)))
            lo = hi
        total += wk[k] * acc
    return total


def harnack_tail_term(kernel: JumpKernel, x0, r: float, g, n_probe: int = 64, n_angular: int = 64,
                      return_argmax: bool = False):
    """(r^alpha / ell(r)) * max over v in B(x0, 2r) of
    int_{B(x0, 4r)^c} g^-(z) n(v, z - v) dz.

    ``g`` is exterior data: it either lists its negative part as
    (region, magnitude) pieces via ``negative_part()`` or is integrated
    numerically along rays.  The max runs over ``n_probe`` Halton points.
    """
    x0 = np.asarray(x0, dtype=float)
    vs = ball_points(x0, 2.0 * r, n_probe)
    exclude = Ball(x0, 4.0 * r)
    rule = angular_rule(kernel, n_angular)
    pieces = g.negative_part() if hasattr(g, "negative_part") else None
    if pieces is not None:
        masses = np.zeros(len(vs))
        for region, magnitude in pieces:
            masses += magnitude * region_mass(kernel, vs, region, exclude, rule=rule)
    else:
        masses = np.array([_generic_negative_mass(kernel, v, g, x0, 4.0 * r, rule) for v in vs])
    factor = r**kernel.alpha / float(kernel.ell(r))
    best = int(np.argmax(masses))
    value = factor * float(masses[best])
    return (value, vs[best]) if return_argmax else value


def exterior_mass(kernel: JumpKernel, x0, r: float, n_angular: int = 64) -> float:
    """int over B(x0, 4r)^c of n(x0, z - x0) dz."""
    x0 = np.asarray(x0, dtype=float)
    rule = angular_rule(kernel, n_angular)
    m = float(kernel.modulator_values(x0)[0])
    ang = float(np.dot(rule.weights, rule.values(m)))
    return ang * kernel.radial_integral(4.0 * r, np.inf, 0.0)


def big_M(kernel: JumpKernel, x0, r: float) -> float:
    """Reciprocal of the exterior kernel mass beyond 4r."""
    if not 0.0 < r < 0.25:
        raise ValueError("r must lie in (0, 1/4)")
    mass = exterior_mass(kernel, x0, r)
    if not mass > 0.0:
        raise ZeroDivisionError("no kernel mass outside B(x0, 4r)")
    return 1.0 / mass


@dataclass(frozen=True)
class TailMeasureQuery:
    x0: np.ndarray
    r: float
    x: np.ndarray
    region: object  # Ball, Annulus, or None for the empty set

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float)
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x", x)
        if not np.linalg.norm(x - x0) < 0.5 * self.r:
            raise ValueError("x must lie in B(x0, r/2)")
        reg = self.region
        if reg is None:
            return
        gap = float(np.linalg.norm(reg.center - x0))
        if isinstance(reg, Annulus):
            ok = gap + self.r <= reg.inner * (1.0 + 1e-12) or gap >= reg.outer + self.r
        else:
            ok = gap >= reg.radius + self.r
        if not ok:
            raise ValueError("region must lie outside B(x0, r)")


def _gamma_data(gamma: RadialProfile, dim: int):
    return _profile_only_data(gamma, dim)


def nu_measure(gamma: RadialProfile, query: TailMeasureQuery, n_angular: int = 256) -> float:
    """int_A gamma(|z - x|) dz / int_{B(x0, r)^c} gamma(|z - x0|) dz."""
    d = query.x0.size
    kd = _gamma_data(gamma, d)
    denom = sphere_area(d) * _core.radial_integral(query.r, np.inf, 0.0, kd, _GLX, _GLW)
    if not denom > 0.0:
        raise ZeroDivisionError("profile has no mass outside B(x0, r)")
    if query.region is None:
        return 0.0
    reg = query.region
    concentric = np.array_equal(reg.center, query.x0) and np.array_equal(query.x, query.x0)
    if concentric:
        inner, outer = (reg.inner, reg.outer) if isinstance(reg, Annulus) else (0.0, reg.radius)
        num = sphere_area(d) * _core.radial_integral(inner, outer, 0.0, kd, _GLX, _GLW)
    else:
        rule = _full_sphere_rule(d, n_angular)
        num = _core.region_rate(query.x, kd, 1.0, reg.encode(), np.zeros(d), -1.0, 0.0,
                                rule.nodes, rule.weights, rule.k1, rule.k2, _GLX, _GLW)
    return num / denom


def eta_rj(gamma: RadialProfile, x0, r: float, j: int, xs=None, n_probe: int = 32):
    """(max over x in the grid of nu_r^x(B(x0, 2^j r)^c), its j-th root)."""
    if j < 1:
        raise ValueError("j must be >= 1")
    x0 = np.asarray(x0, dtype=float)
    if xs is None:
        xs = ball_points(x0, 0.5 * r, n_probe)
    region = Annulus(x0, 2.0**j * r)
    eta = max(nu_measure(gamma, TailMeasureQuery(x0, r, x, region)) for x in np.atleast_2d(xs))
    return eta, eta ** (1.0 / j)


def ball_average(g, z, x0, r: float, n_radial: int = 32, n_angular: int = 64) -> float:
    """int_{B(x0, r)} g(|z - u|) du for a radial function ``g``."""
    x0 = np.asarray(x0, dtype=float)
    z = np.asarray(z, dtype=float)
    d = x0.size
    x, w = gauss_legendre(n_radial)
    s = 0.5 * r * (x + 1.0)
    ws = 0.5 * r * w * s ** (d - 1)
    rule = _full_sphere_rule(d, n_angular)
    pts = x0 + s[:, None, None] * rule.nodes[None, :, :]
    vals = np.asarray(g(np.linalg.norm(z - pts, axis=-1)), dtype=float)
    return float(ws @ vals @ rule.weights)
