"""Balls, double cones and the chain of auxiliary centers used to route a
jump from near the center of a ball to a far exterior point.

Given a ball B(x0, r), a start u0 close to x0 and an exterior point z that is
visible from u0 through a cone of the kernel, ``build_chain`` picks

* ``x_tilde = x0 - (r/2) xi`` on the far side of x0, with xi = +/- axis
  pointing from u0 towards z, and
* ``z_tilde`` on the sphere |y - x0| = r/2,

so that every displacement along the chain

    B(x0, 2 lam r) -> B(x_tilde, 2 lam r) -> B(z_tilde, lam r / 4) -> z

lies in the cone, and z_tilde is strictly closer to z than x0 is.  Each of
the four requirements is a containment of a ball in a cone, so it has a
closed-form margin (distance of the ball to the cone's complement); the
sampled-boundary version in ``verify_chain`` is a second, independent route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

__all__ = [
    "Ball",
    "Annulus",
    "Cone",
    "ChainConfig",
    "ChainMargins",
    "NoConeError",
    "InfeasibleChainError",
    "half_angle_from_chordal",
    "chordal_from_half_angle",
    "lambda_max",
    "lambda_restricted",
    "separation_cosine",
    "build_chain",
    "verify_chain",
    "kernel_cones",
    "governing_angle",
    "sphere_points",
    "ball_points",
    "ChainCase",
    "random_chain_case",
    "chain_stress",
]


class NoConeError(ValueError):
    """No cone of the kernel connects the small ball to the exterior point."""


class InfeasibleChainError(RuntimeError):
    def __init__(self, message, margins=None):
        super().__init__(message)
        self.margins = margins


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if not self.radius >= 0.0:
            raise ValueError("radius must be non-negative")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, x) -> np.ndarray | bool:
        """Open-ball membership (rows of ``x``)."""
        x = np.asarray(x, dtype=float)
        return np.sum((x - self.center) ** 2, axis=-1) < self.radius**2

    def volume(self) -> float:
        d = self.dim
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * self.radius**d

    def encode(self) -> np.ndarray:
        return np.concatenate([self.center, [0.0, self.radius]])

    def __hash__(self):
        return hash((self.center.tobytes(), self.radius))

    def __eq__(self, other):
        return isinstance(other, Ball) and self.radius == other.radius and np.array_equal(self.center, other.center)


@dataclass(frozen=True)
class Annulus:
    """{u : inner <= |u - center| < outer}; ``outer`` may be inf."""

    center: np.ndarray
    inner: float
    outer: float = math.inf

    def __post_init__(self):
        c = np.array(self.center, dtype=float).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if not 0.0 <= self.inner < self.outer:
            raise ValueError("need 0 <= inner < outer")

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, x):
        r2 = np.sum((np.asarray(x, dtype=float) - self.center) ** 2, axis=-1)
        return (r2 >= self.inner**2) & (r2 < self.outer**2)

    def volume(self) -> float:
        d = self.dim
        unit = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
        return unit * (self.outer**d - self.inner**d)

    def encode(self) -> np.ndarray:
        return np.concatenate([self.center, [self.inner, self.outer]])

    def __hash__(self):
        return hash((self.center.tobytes(), self.inner, self.outer))

    def __eq__(self, other):
        return (
            isinstance(other, Annulus)
            and (self.inner, self.outer) == (other.inner, other.outer)
            and np.array_equal(self.center, other.center)
        )


def regions_disjoint(a, b) -> bool:
    """Conservative disjointness test for two balls or annuli."""
    gap = float(np.linalg.norm(a.center - b.center))
    a_out = a.radius if isinstance(a, Ball) else a.outer
    b_out = b.radius if isinstance(b, Ball) else b.outer
    a_in = 0.0 if isinstance(a, Ball) else a.inner
    b_in = 0.0 if isinstance(b, Ball) else b.inner
    if gap >= a_out + b_out:
        return True
    # one region inside the hole of the other
    if gap + a_out <= b_in or gap + b_out <= a_in:
        return True
    return False


# ---------------------------------------------------------------------------
# cones


def half_angle_from_chordal(rho: float) -> float:
    if not 0.0 < rho <= 2.0:
        raise ValueError("chordal radius must lie in (0, 2]")
    return math.acos(1.0 - 0.5 * rho * rho)


def chordal_from_half_angle(theta: float) -> float:
    return math.sqrt(2.0 * (1.0 - math.cos(theta)))


def lambda_max(theta: float) -> float:
    if not 0.0 < theta <= 0.5 * math.pi + 1e-15:
        raise ValueError("theta must lie in (0, pi/2]")
    return math.sin(theta) / 8.0


def lambda_restricted(theta: float) -> float:
    """Admissible radius factor for the restricted two-step chain."""
    return 0.5 * lambda_max(theta)


@dataclass(frozen=True)
class Cone:
    """Double cone of directions within chordal distance rho of +/- axis."""

    axis: np.ndarray
    chordal_radius: float

    def __post_init__(self):
        a = np.array(self.axis, dtype=float).ravel()
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError("cone axis must be a unit vector")
        a.setflags(write=False)
        object.__setattr__(self, "axis", a)
        half_angle_from_chordal(self.chordal_radius)

    @property
    def half_angle(self) -> float:
        """Opening angle, capped at pi/2 where the double cone fills space."""
        return min(half_angle_from_chordal(self.chordal_radius), 0.5 * math.pi)

    def contains(self, x) -> np.ndarray | bool:
        x = np.asarray(x, dtype=float)
        n = np.linalg.norm(x, axis=-1)
        safe = np.where(n > 0.0, n, 1.0)
        u = x / np.expand_dims(safe, -1)
        dist = np.minimum(np.linalg.norm(u - self.axis, axis=-1), np.linalg.norm(u + self.axis, axis=-1))
        return (n > 0.0) & (dist <= self.chordal_radius)

    def signed_distance(self, p) -> np.ndarray:
        """Distance from p to the cone's complement, negative outside the cone."""
        p = np.atleast_2d(np.asarray(p, dtype=float))
        norm = np.linalg.norm(p, axis=1)
        along = np.abs(p @ self.axis)
        perp = np.sqrt(np.maximum(norm**2 - along**2, 0.0))
        phi = np.arctan2(perp, along)
        return norm * np.sin(self.half_angle - phi)

    def ball_margin(self, center, radius: float) -> float:
        """Positive iff B(center, radius) lies inside the cone, by that much."""
        return float(self.signed_distance(center)[0]) - radius


def kernel_cones(kernel) -> list:
    return [Cone(np.asarray(c.axis), c.chordal_radius) for c in kernel.cones.caps]


def governing_angle(kernel) -> float:
    return min(c.half_angle for c in kernel.cones.caps)


def separation_cosine(u, v, xi) -> float:
    diff = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
    n = float(np.linalg.norm(diff))
    if n == 0.0:
        raise ValueError("points coincide")
    return min(1.0, abs(float(diff @ np.asarray(xi, dtype=float))) / n)


# ---------------------------------------------------------------------------
# deterministic point sets


def sphere_points(n: int, dim: int) -> np.ndarray:
    """Near-uniform points on the unit sphere: equispaced circle in 2-d,
    Fibonacci lattice in 3-d, seeded Gaussian directions above."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        phi = 2.0 * math.pi * np.arange(n) / n
        return np.column_stack([np.cos(phi), np.sin(phi)])
    if dim == 3:
        k = np.arange(n) + 0.5
        z = 1.0 - 2.0 * k / n
        s = np.sqrt(1.0 - z * z)
        phi = math.pi * (3.0 - math.sqrt(5.0)) * k
        return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])
    g = np.random.default_rng(1234).standard_normal((n, dim))
    return g / np.linalg.norm(g, axis=1)[:, None]


def ball_points(center, radius: float, n: int) -> np.ndarray:
    """Scrambling-free Halton points inside a ball, center first."""
    center = np.asarray(center, dtype=float)
    d = center.size
    if d == 1:
        t = (np.arange(n) + 0.5) / n * 2.0 - 1.0
        order = np.argsort(np.abs(t), kind="stable")
        pts = t[order][:, None]
    else:
        sampler = qmc.Halton(d, scramble=False)
        raw = []
        while sum(len(r) for r in raw) < n - 1:
            cube = sampler.random(4 * n) * 2.0 - 1.0
            raw.append(cube[np.sum(cube**2, axis=1) < 1.0])
        pts = np.concatenate([np.zeros((1, d))] + raw)[:n]
    return center + radius * pts


# ---------------------------------------------------------------------------
# the chain


@dataclass(frozen=True)
class ChainMargins:
    """Margins of the four chain requirements in units of r; all >= 0 means
    verified.  ``m4`` compares distances to z."""

    m1: float
    m2: float
    m3: float
    m4: float

    def as_tuple(self):
        return (self.m1, self.m2, self.m3, self.m4)

    @property
    def worst(self) -> float:
        return min(self.as_tuple())

    @property
    def ok(self) -> bool:
        return self.worst >= 0.0


@dataclass(frozen=True)
class ChainConfig:
    x0: np.ndarray
    r: float
    lam: float
    xi: np.ndarray
    x_tilde: np.ndarray
    z_tilde: np.ndarray
    z: np.ndarray
    u0: np.ndarray
    cone: Cone
    margins: ChainMargins = field(default=None)


def chain_margins(x0, r, lam, cone: Cone, x_tilde, z_tilde, z) -> ChainMargins:
    """Closed-form margins (ball-in-cone distances)."""
    x0 = np.asarray(x0, dtype=float)
    z = np.asarray(z, dtype=float)
    m1 = cone.ball_margin(x_tilde - x0, 4.0 * lam * r)
    m2 = cone.ball_margin(z_tilde - x_tilde, 2.25 * lam * r)
    m3 = cone.ball_margin(z - z_tilde, 0.25 * lam * r)
    m4 = (np.linalg.norm(z - x0) - 4.0 * lam * r) - (np.linalg.norm(z - z_tilde) + 0.25 * lam * r)
    return ChainMargins(m1 / r, m2 / r, m3 / r, float(m4) / r)


def _select_cone(cones, d, z, u0):
    best = None
    for cone in cones:
        if cone.contains(z - u0):
            score = float(cone.signed_distance(z - u0)[0])
            if best is None or score > best[0]:
                best = (score, cone)
    return None if best is None else best[1]


def _tangent_frame(p: np.ndarray) -> np.ndarray:
    d = p.size
    q, _ = np.linalg.qr(np.column_stack([p, np.eye(d)]))
    return q[:, 1:d].T


def _golden_max(f, lo: float, hi: float, steps: int = 20):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - g * (b - a)
    e = a + g * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(steps):
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + g * (b - a)
            fe = f(e)
    return (c, fc) if fc >= fe else (e, fe)


def build_chain(x0, r: float, kernel, u0, z, lam: float | None = None, n_candidates: int = 1024) -> ChainConfig:
    """Choose x_tilde and z_tilde for the route u0 -> z (see module docstring).

    ``lam`` defaults to 0.9 sin(theta)/16 with theta the smallest cap angle.
    Raises NoConeError if no cone connects the small ball to z, and
    InfeasibleChainError if no candidate z_tilde has positive margins.
    """
    x0 = np.asarray(x0, dtype=float)
    z = np.asarray(z, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    d = x0.size
    theta = governing_angle(kernel)
    if lam is None:
        lam = 0.9 * lambda_restricted(theta)
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    if np.linalg.norm(u0 - x0) >= lam * r:
        raise ValueError("u0 must lie in B(x0, lam r)")
    if np.linalg.norm(z - x0) < 1.5 * r:
        raise ValueError("z must lie outside B(x0, 3r/2)")

    cones = kernel_cones(kernel)
    cone = _select_cone(cones, d, z, u0)
    if cone is None:
        # look for another start in the small ball that sees z through a cone
        for u in ball_points(x0, lam * r, 512)[1:]:
            cone = _select_cone(cones, d, z, u)
            if cone is not None:
                u0 = u
                break
        else:
            raise NoConeError("no cone of the kernel contains z - u for u near x0")

    xi = cone.axis if float((z - u0) @ cone.axis) > 0.0 else -cone.axis
    x_tilde = x0 - 0.5 * r * xi

    def scores_at(ps):
        zt = x0 + 0.5 * r * np.atleast_2d(ps)
        m2 = cone.signed_distance(zt - x_tilde) - 2.25 * lam * r
        m3 = cone.signed_distance(z - zt) - 0.25 * lam * r
        m4 = (np.linalg.norm(z - x0) - 4.0 * lam * r) - (np.linalg.norm(z - zt, axis=1) + 0.25 * lam * r)
        return np.minimum(np.minimum(m2, m3), m4) / r

    def score_at(p):
        return float(scores_at(p)[0])

    cands = sphere_points(n_candidates, d)
    scores = scores_at(cands)
    best = cands[int(np.argmax(scores))]
    best_score = float(np.max(scores))

    # golden-section polish along each tangent direction of the sphere
    if d >= 2:
        width = 2.0 * math.pi / n_candidates if d == 2 else 4.0 / math.sqrt(n_candidates)
        for _ in range(2):
            for t in _tangent_frame(best):
                def along(s, p=best, t=t):
                    q = p * math.cos(s) + t * math.sin(s)
                    return score_at(q / np.linalg.norm(q))

                s, val = _golden_max(along, -width, width)
                if val > best_score:
                    q = best * math.cos(s) + t * math.sin(s)
                    best, best_score = q / np.linalg.norm(q), val

    z_tilde = x0 + 0.5 * r * best
    margins = chain_margins(x0, r, lam, cone, x_tilde, z_tilde, z)
    if not margins.ok:
        raise InfeasibleChainError("no admissible z_tilde: worst margin %.3g" % margins.worst, margins)
    return ChainConfig(x0, float(r), float(lam), xi, x_tilde, z_tilde, z, u0, cone, margins)


def verify_chain(config: ChainConfig, cone: Cone | None = None, n_boundary: int | None = None) -> ChainMargins:
    """Margins recomputed as infima over sampled ball boundaries."""
    cone = cone or config.cone
    d = config.x0.size
    n = n_boundary or (256 if d <= 2 else 1024)
    omega = sphere_points(n, d)
    r, lam = config.r, config.lam

    def ball_inf(center, radius):
        return float(np.min(cone.signed_distance(center + radius * omega)))

    m1 = ball_inf(config.x_tilde - config.x0, 4.0 * lam * r)
    m2 = ball_inf(config.z_tilde - config.x_tilde, 2.25 * lam * r)
    m3 = ball_inf(config.z - config.z_tilde, 0.25 * lam * r)
    near = config.x0 + 4.0 * lam * r * omega
    far = config.z_tilde + 0.25 * lam * r * omega
    m4 = float(np.min(np.linalg.norm(config.z - near, axis=1)) - np.max(np.linalg.norm(config.z - far, axis=1)))
    return ChainMargins(m1 / r, m2 / r, m3 / r, m4 / r)


# ---------------------------------------------------------------------------
# randomized stress cases


@dataclass(frozen=True)
class ChainCase:
    kernel: object
    x0: np.ndarray
    r: float
    lam: float
    u0: np.ndarray
    z: np.ndarray


def random_chain_case(rng: np.random.Generator, dims=(2, 3), lam_factor: float | None = None) -> ChainCase:
    """A feasible instance: one random cap, lambda in (0, 0.9 sin(theta)/16]
    (or ``lam_factor * sin(theta)/8`` when given), u0 in B(x0, lam r) and z
    inside the cone seen from u0 with |z - x0| between 1.5r and 100r."""
    from .kernel import cone_kernel

    d = int(rng.choice(list(dims)))
    axis = rng.standard_normal(d)
    axis /= np.linalg.norm(axis)
    cosine = rng.uniform(0.0, 0.99)
    kern = cone_kernel([axis], cosine, dim=d)
    theta = governing_angle(kern)
    if lam_factor is None:
        lam = rng.uniform(0.01, 1.0) * 0.9 * lambda_restricted(theta)
    else:
        lam = lam_factor * lambda_max(theta)
    x0 = rng.standard_normal(d)
    r = rng.uniform(0.05, 1.0)
    v = rng.standard_normal(d)
    u0 = x0 + v / np.linalg.norm(v) * lam * r * rng.uniform(0.0, 0.99)
    while True:
        w = rng.standard_normal(d)
        w /= np.linalg.norm(w)
        if abs(w @ axis) >= cosine:
            break
    while True:
        z = u0 + math.exp(rng.uniform(math.log(1.5), math.log(100.0))) * r * w
        if np.linalg.norm(z - x0) >= 1.5 * r:
            break
    return ChainCase(kern, x0, r, lam, u0, z)


def chain_stress(count: int, seed: int = 0, dims=(2, 3), lam_factor: float | None = None):
    """Builds and verifies ``count`` random cases.

    Yields (case, config or None, verified margins or the failing closed-form
    margins, error message or None) per case.
    """
    rng = np.random.default_rng(seed)
    for _ in range(count):
        case = random_chain_case(rng, dims, lam_factor)
        try:
            cfg = build_chain(case.x0, case.r, case.kernel, case.u0, case.z, lam=case.lam)
        except (InfeasibleChainError, NoConeError) as exc:
            yield case, None, getattr(exc, "margins", None), str(exc)
            continue
        yield case, cfg, verify_chain(cfg), None
