"""Monte Carlo estimators built on the simulator.

Harmonic functions are realised as exit expectations,
f(x) = E^x[g(X_tau)] for exterior data g, which are harmonic in the exit
domain by the strong Markov property.  Values at different probes reuse the
same replica indices, so for translation-invariant kernels the paths from
two probes are translates of one another and differences f(x) - f(y) are
estimated with far less noise than the values themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._stats import MCEstimate
from .geometry import Annulus, Ball, ball_points, governing_angle, lambda_max
from .kernel import JumpKernel
from .quadrature import ball_average, harnack_tail_term
from .simulate import SimConfig, hitting_before_exit, simulate_exits

__all__ = [
    "MCEstimate",
    "ConstantData",
    "IndicatorOfBall",
    "IndicatorOfAnnulus",
    "SignedBump",
    "RadialProfileData",
    "ExitStats",
    "KSRow",
    "HarnackReport",
    "SignedHarnackScan",
    "RestrictedHarnack",
    "HolderFit",
    "AveragingReport",
    "DegenerateDataError",
    "estimate_exit_stats",
    "estimate_survival",
    "estimate_ks_ratio",
    "evaluate_harmonic",
    "harmonic_samples",
    "harnack_report",
    "signed_harnack_scan",
    "restricted_harnack_check",
    "holder_fit",
    "averaging_check",
]


class DegenerateDataError(ValueError):
    """The data produce no measurable oscillation."""


# ---------------------------------------------------------------------------
# exterior data


@dataclass(frozen=True)
class ConstantData:
    c: float = 1.0

    def __call__(self, z):
        return np.full(np.shape(z)[:-1], float(self.c))

    @property
    def sup_norm(self):
        return abs(self.c)

    def negative_part(self):
        if self.c >= 0.0:
            return []
        return None  # no finite support; integrated along rays


@dataclass(frozen=True)
class IndicatorOfBall:
    center: tuple
    radius: float
    value: float = 1.0

    @property
    def region(self):
        return Ball(self.center, self.radius)

    def __call__(self, z):
        return np.where(self.region.contains(z), self.value, 0.0)

    @property
    def sup_norm(self):
        return abs(self.value)

    def negative_part(self):
        return [(self.region, -self.value)] if self.value < 0.0 else []


@dataclass(frozen=True)
class IndicatorOfAnnulus:
    center: tuple
    inner: float
    outer: float = math.inf
    value: float = 1.0

    @property
    def region(self):
        return Annulus(self.center, self.inner, self.outer)

    def __call__(self, z):
        return np.where(self.region.contains(z), self.value, 0.0)

    @property
    def sup_norm(self):
        return abs(self.value)

    def negative_part(self):
        return [(self.region, -self.value)] if self.value < 0.0 else []


@dataclass(frozen=True)
class SignedBump:
    """positive_value on one region minus negative_value on a disjoint one."""

    positive: object
    negative: object
    positive_value: float = 1.0
    negative_value: float = 1.0

    def __call__(self, z):
        return self.positive_value * self.positive.contains(z) - self.negative_value * self.negative.contains(z)

    @property
    def sup_norm(self):
        return max(abs(self.positive_value), abs(self.negative_value))

    def negative_part(self):
        return [(self.negative, self.negative_value)] if self.negative_value > 0.0 else []

    def with_amplitude(self, amplitude: float) -> "SignedBump":
        return SignedBump(self.positive, self.negative, self.positive_value, amplitude)


@dataclass(frozen=True)
class RadialProfileData:
    """g(z) = profile(|z - center|) for a vectorized callable ``profile``."""

    profile: object
    center: tuple
    bound: float

    def __call__(self, z):
        s = np.linalg.norm(np.asarray(z, dtype=float) - np.asarray(self.center, dtype=float), axis=-1)
        return np.asarray(self.profile(s), dtype=float)

    @property
    def sup_norm(self):
        return self.bound

    def negative_part(self):
        return None


# ---------------------------------------------------------------------------
# exit statistics


@dataclass
class ExitStats:
    tau: MCEstimate
    normalized: MCEstimate  # tau * ell(r) / r^alpha
    survival: list = field(default_factory=list)  # (t, MCEstimate of 1{tau <= t})
    mean_events: float = 0.0
    degenerate: bool = False


def _ball(x0, r):
    return Ball(np.asarray(x0, dtype=float), float(r))


def estimate_exit_stats(kernel: JumpKernel, x, ball: Ball, n: int, config: SimConfig, times=(),
                        threads: int = 1, first_replica: int = 0) -> ExitStats:
    """Mean exit time, its scale-normalised version and P(tau <= t)."""
    if n < 2:
        raise ValueError("need at least two replicas")
    x = np.asarray(x, dtype=float)
    batch = simulate_exits(kernel, x, ball, config, n, first_replica, threads)
    cens = batch.censored
    tau = MCEstimate.from_samples(batch.tau, cens)
    r = ball.radius
    norm = tau.scaled(float(kernel.ell(r)) / r**kernel.alpha)
    surv = [(float(t), MCEstimate.from_samples((batch.tau <= t) & ~cens)) for t in times]
    boundary = not np.linalg.norm(x - ball.center) < ball.radius * (1.0 - 1e-9)
    return ExitStats(tau, norm, surv, float(np.mean(batch.n_real + batch.n_fictitious)), boundary)


def estimate_survival(kernel: JumpKernel, x, ball: Ball, times, n: int, config: SimConfig,
                      threads: int = 1) -> list:
    """P(tau <= t) for each t, simulating only up to max(times)."""
    times = sorted(float(t) for t in times)
    cfg = SimConfig(config.epsilon, config.max_events, times[-1], config.seed)
    batch = simulate_exits(kernel, x, ball, cfg, n, 0, threads)
    exited = ~batch.censored
    if np.any(batch.flags & 1 & (batch.tau < times[-1])):
        raise RuntimeError("event cap reached before the time horizon")
    return [(t, MCEstimate.from_samples(exited & (batch.tau <= t))) for t in times]


# ---------------------------------------------------------------------------
# hitting


@dataclass(frozen=True)
class KSRow:
    fraction: float
    probability: MCEstimate
    volume_ratio: float

    @property
    def ratio(self) -> float:
        return self.probability.mean / self.volume_ratio


def estimate_ks_ratio(kernel: JumpKernel, x0, r: float, lam: float, fractions, n: int, config: SimConfig,
                      start=None, threads: int = 1) -> list:
    """Probability of landing in a concentric target ball of volume
    fraction*|B(x0, lam r)| before leaving B(x0, r), and its ratio to
    |target|/|B(x0, r)|.

    The default start sits at distance 0.9 lam r from x0, orthogonal to the
    first cap axis.
    """
    x0 = np.asarray(x0, dtype=float)
    d = x0.size
    theta = governing_angle(kernel)
    if not 0.0 < lam <= lambda_max(theta) * (1.0 + 1e-12):
        raise ValueError("lambda exceeds sin(theta)/8 for this kernel")
    if start is None:
        axis = np.asarray(kernel.cones.caps[0].axis)
        perp = np.eye(d)[int(np.argmin(np.abs(axis)))] if d > 1 else np.ones(1)
        perp = perp - (perp @ axis) * axis if d > 1 else perp
        start = x0 + 0.9 * lam * r * perp / np.linalg.norm(perp)
    container = _ball(x0, r)
    rows = []
    for frac in fractions:
        if frac <= 0.0:
            rows.append(KSRow(float(frac), MCEstimate(0.0, 0.0, n, 0.0), 0.0))
            continue
        rad = lam * r * frac ** (1.0 / d)
        batch = hitting_before_exit(kernel, start, [Ball(x0, rad)], container, config, n, 0, threads)
        prob = MCEstimate.from_samples(batch.hit.astype(float), batch.censored)
        rows.append(KSRow(float(frac), prob, (rad / r) ** d))
    return rows


# ---------------------------------------------------------------------------
# harmonic functions


def harmonic_samples(kernel: JumpKernel, domain: Ball, g, points, n: int, config: SimConfig,
                     threads: int = 1) -> np.ndarray:
    """Array (probes, n) of g(X_tau) with common replica indices across probes.
    Censored replicas are NaN."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty((len(points), n))
    for i, p in enumerate(points):
        batch = simulate_exits(kernel, p, domain, config, n, 0, threads)
        vals = np.asarray(g(batch.x_post), dtype=float)
        vals[batch.censored] = np.nan
        out[i] = vals
    return out


def _estimate_row(row) -> MCEstimate:
    ok = ~np.isnan(row)
    return MCEstimate.from_samples(np.where(ok, row, 0.0), ~ok)


def evaluate_harmonic(kernel: JumpKernel, domain: Ball, g, x, n: int, config: SimConfig,
                      threads: int = 1) -> MCEstimate:
    """E^x[g(X_tau)] for the exit time of ``domain``."""
    return _estimate_row(harmonic_samples(kernel, domain, g, [x], n, config, threads)[0])


@dataclass
class HarnackReport:
    r: float
    values: list  # MCEstimate per probe
    sup: float
    inf: float
    quotient: float | None
    tail_term: float
    c1: float | None
    c2: float | None
    flagged: bool

    @property
    def slack(self) -> float | None:
        """c1 * inf + c2 * tail - sup for the fitted constants."""
        if self.c1 is None:
            return None
        return self.c1 * self.inf + (self.c2 or 0.0) * self.tail_term - self.sup


def _probes(x0, r, n_probes):
    return ball_points(x0, r, n_probes)


def harnack_report(kernel: JumpKernel, x0, r: float, g, n: int, config: SimConfig, probes=None,
                   n_probes: int = 32, c1: float | None = None, threads: int = 1) -> HarnackReport:
    """Sup, inf and quotient of f = E[g(X_tau)] over probes in B(x0, r) with
    tau the exit time of B(x0, 4r), plus the tail term of g^-.

    Without ``c1`` the report gives the smallest c1 (the quotient) with no
    tail credit; with ``c1`` given it gives the smallest c2 that makes
    sup <= c1 inf + c2 tail hold.
    """
    if not 0.0 < r < 0.25:
        raise ValueError("r must lie in (0, 1/4)")
    x0 = np.asarray(x0, dtype=float)
    pts = _probes(x0, r, n_probes) if probes is None else np.atleast_2d(probes)
    samples = harmonic_samples(kernel, _ball(x0, 4.0 * r), g, pts, n, config, threads)
    ests = [_estimate_row(row) for row in samples]
    means = np.array([e.mean for e in ests])
    ses = np.array([e.std_error for e in ests])
    sup, inf = float(means.max()), float(means.min())
    tail = harnack_tail_term(kernel, x0, r, g)
    flagged = inf - 2.0 * ses[int(np.argmin(means))] <= 0.0
    quotient = None if flagged else sup / inf
    if c1 is None:
        c1_fit, c2_fit = quotient, (0.0 if tail == 0.0 else None)
    else:
        c1_fit = c1
        excess = sup - c1 * inf
        c2_fit = max(0.0, excess / tail) if tail > 0.0 else (0.0 if excess <= 0.0 else math.inf)
    return HarnackReport(r, ests, sup, inf, quotient, tail, c1_fit, c2_fit, flagged)


@dataclass
class SignedHarnackScan:
    amplitudes: np.ndarray
    sup: np.ndarray
    inf: np.ndarray
    inf_domain: np.ndarray  # min over the probes covering B(x0, 4r)
    tail: np.ndarray
    c1: float
    c2: float
    holds_with_tail: np.ndarray
    holds_without_tail: np.ndarray


def signed_harnack_scan(kernel: JumpKernel, x0, r: float, data: SignedBump, amplitudes, c1: float, n: int,
                        config: SimConfig, n_probes: int = 32, n_domain: int = 32, threads: int = 1):
    """Harnack inequality for g = positive part - A * negative part over a
    scan of amplitudes A.

    One set of paths serves all amplitudes, since f is affine in A.  Only
    amplitudes keeping f >= 0 on the probes covering B(x0, 4r) are kept.
    c2 is the smallest value making the inequality hold at the largest kept
    amplitude; both inequalities are then re-checked at every amplitude.
    """
    x0 = np.asarray(x0, dtype=float)
    inner = _probes(x0, r, n_probes)
    outer = ball_points(x0, 3.9 * r, n_domain)
    pts = np.concatenate([inner, outer])
    domain = _ball(x0, 4.0 * r)
    pos = harmonic_samples(kernel, domain, data.with_amplitude(0.0), pts, n, config, threads)
    neg = harmonic_samples(kernel, domain, lambda z: data.negative.contains(z).astype(float), pts, n, config, threads)
    p = np.nanmean(pos, axis=1)
    q = np.nanmean(neg, axis=1)
    unit_tail = harnack_tail_term(kernel, x0, r, data.with_amplitude(1.0))
    amps = np.asarray(sorted(amplitudes), dtype=float)
    f = p[None, :] - amps[:, None] * q[None, :]
    k = len(inner)
    sup = f[:, :k].max(axis=1)
    inf = f[:, :k].min(axis=1)
    inf_dom = f.min(axis=1)
    keep = inf_dom > 0.0
    if not np.any(keep):
        raise ValueError("no amplitude keeps f non-negative in B(x0, 4r)")
    amps, sup, inf, inf_dom = amps[keep], sup[keep], inf[keep], inf_dom[keep]
    tail = unit_tail * amps
    top = int(np.argmax(amps))
    c2 = max(0.0, (sup[top] - c1 * inf[top]) / tail[top]) if tail[top] > 0.0 else 0.0
    with_tail = sup <= c1 * inf + c2 * tail * (1.0 + 1e-12)
    without = sup <= c1 * inf
    return SignedHarnackScan(amps, sup, inf, inf_dom, tail, c1, c2, with_tail, without)


@dataclass
class RestrictedHarnack:
    numerator: MCEstimate  # largest E^x[H(X_tau(lam r))] over x-probes
    denominator: MCEstimate  # smallest E^y[H(X_tau(r))] over y-probes
    quotient: float | None
    vacuous: bool  # both sides indistinguishable from 0


def restricted_harnack_check(kernel: JumpKernel, x0, r: float, lam: float, H, n: int, config: SimConfig,
                             x_probes=None, y_probes=None, n_probes: int = 8, threads: int = 1):
    """Compares exits from the small ball B(x0, lam r) with exits from
    B(x0, r) for data H >= 0 supported outside B(x0, 3r/2)."""
    x0 = np.asarray(x0, dtype=float)
    theta = governing_angle(kernel)
    if lam > 0.5 * lambda_max(theta) * (1.0 + 1e-12):
        raise ValueError("lambda exceeds sin(theta)/16 for this kernel")
    xs = ball_points(x0, lam * r, n_probes) if x_probes is None else np.atleast_2d(x_probes)
    ys = ball_points(x0, lam * r, n_probes) if y_probes is None else np.atleast_2d(y_probes)
    small = harmonic_samples(kernel, _ball(x0, lam * r), H, xs, n, config, threads)
    large = harmonic_samples(kernel, _ball(x0, r), H, ys, n, config, threads)
    num = max((_estimate_row(row) for row in small), key=lambda e: e.mean)
    den = min((_estimate_row(row) for row in large), key=lambda e: e.mean)
    if den.mean == 0.0 and num.mean == 0.0:
        return RestrictedHarnack(num, den, None, True)
    if den.mean - 2.0 * den.std_error <= 0.0:
        return RestrictedHarnack(num, den, None, False)
    return RestrictedHarnack(num, den, num.mean / den.mean, False)


# ---------------------------------------------------------------------------
# Hoelder exponent


@dataclass
class HolderFit:
    scales: np.ndarray
    oscillations: np.ndarray
    errors: np.ndarray
    beta: float
    residual: float
    intercept: float

    def __post_init__(self):
        if np.any(np.diff(self.scales) >= 0.0):
            raise ValueError("scales must be strictly decreasing")


def holder_fit(kernel: JumpKernel, x0, R: float, g, scales, n: int, config: SimConfig, n_probes: int = 16,
               threads: int = 1) -> HolderFit:
    """Least-squares slope of log oscillation against log scale for
    f = E[g(X_tau)], tau the exit time of B(x0, R).

    The oscillation at scale rho is max - min of f over ``n_probes``
    low-discrepancy points of B(x0, rho), all scales sharing replica
    indices.  The extremal pair is picked on one half of the replicas and
    its difference measured on the other (then the roles swap), so the
    noise in the means does not inflate the small-scale oscillations.
    """
    x0 = np.asarray(x0, dtype=float)
    scales = np.asarray(sorted(scales, reverse=True), dtype=float)
    if len(scales) < 3:
        raise ValueError("need at least three scales")
    if n < 4:
        raise ValueError("need at least four replicas")
    if scales[0] > 0.5 * R * (1.0 + 1e-12):
        raise ValueError("scales must not exceed R/2")
    base = ball_points(np.zeros_like(x0), 1.0, n_probes)
    domain = _ball(x0, R)
    oscs, errs = [], []
    for rho in scales:
        samples = harmonic_samples(kernel, domain, g, x0 + rho * base, n, config, threads)
        half = n // 2
        diffs = []
        for pick, use in ((samples[:, :half], samples[:, half:]), (samples[:, half:], samples[:, :half])):
            means = np.nanmean(pick, axis=1)
            d = use[int(np.argmax(means))] - use[int(np.argmin(means))]
            diffs.append(d[~np.isnan(d)])
        diff = np.concatenate(diffs)
        oscs.append(float(np.mean(diff)))
        errs.append(float(np.std(diff, ddof=1) / math.sqrt(diff.size)))
    oscs, errs = np.array(oscs), np.array(errs)
    usable = oscs > 2.0 * errs
    if usable.sum() < 2:
        raise DegenerateDataError("oscillation indistinguishable from zero")
    lx, ly = np.log(scales[usable]), np.log(oscs[usable])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return HolderFit(scales, oscs, errs, float(slope), resid, float(intercept))


# ---------------------------------------------------------------------------
# averaging


@dataclass(frozen=True)
class AveragingReport:
    constant: float  # max over x of g(|z-x|) r^d / int_{B(x0,r)} g(|z-u|) du
    argmax: np.ndarray
    ball_integral: float


def averaging_check(g, x0, r: float, z, xs=None, n_probe: int = 64) -> AveragingReport:
    """Compares a radial function at |z - x| with its average over B(x0, r)."""
    x0 = np.asarray(x0, dtype=float)
    z = np.asarray(z, dtype=float)
    if not np.linalg.norm(z - x0) > 2.0 * r:
        raise ValueError("z must satisfy |z - x0| > 2r")
    xs = ball_points(x0, 0.5 * r, n_probe) if xs is None else np.atleast_2d(xs)
    integral = ball_average(g, z, x0, r)
    vals = np.asarray(g(np.linalg.norm(z - xs, axis=1)), dtype=float)
    k = int(np.argmax(vals))
    d = x0.size
    return AveragingReport(float(vals[k]) * r**d / integral, xs[k], integral)
