"""Simulation of the jump process with jumps shorter than ``epsilon`` removed.

Jumps are proposed from the dominating measure

    sum_i upper_i 1{h/|h| in cap_i} j(|h|) 1{|h| > epsilon} dh

at the constant total rate ``envelope_rate`` and accepted with probability
n(x, h) divided by the dominating density, so rejected proposals are
fictitious events that only advance the clock.  Every replica draws from its
own Philox counter stream keyed by (seed, replica index); batches are split
into fixed-size chunks and run on a thread pool, so results do not depend on
the number of threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _core
from ._stats import MCEstimate
from .geometry import Annulus, Ball, regions_disjoint
from .kernel import JumpKernel, angular_rule, gauss_legendre

__all__ = [
    "SimConfig",
    "RNGStream",
    "ExitSample",
    "ExitBatch",
    "FICTITIOUS",
    "KernelBoundError",
    "envelope_rate",
    "sampler_data",
    "sample_jump",
    "sample_jumps",
    "simulate_until_exit",
    "simulate_exits",
    "hitting_before_exit",
    "levy_system_paths",
    "trace_paths",
]

CHUNK = 128
_GLX, _GLW = gauss_legendre(16)
_MASK32 = 0xFFFFFFFF


class KernelBoundError(ArithmeticError):
    """A thinning probability fell outside [0, 1]: the kernel left its bounds."""


class _Fictitious:
    def __repr__(self):
        return "FICTITIOUS"

    def __bool__(self):
        return False


FICTITIOUS = _Fictitious()


@dataclass(frozen=True)
class SimConfig:
    epsilon: float = 0.01
    max_events: int = 1_000_000
    time_horizon: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.max_events < 1:
            raise ValueError("max_events must be >= 1")
        if self.time_horizon is not None and not self.time_horizon > 0.0:
            raise ValueError("time horizon must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def keys(self):
        return np.uint64(self.seed & _MASK32), np.uint64((self.seed >> 32) & _MASK32)

    def with_epsilon(self, epsilon: float) -> "SimConfig":
        return SimConfig(epsilon, self.max_events, self.time_horizon, self.seed)


class RNGStream:
    """Counter-based uniform stream for one replica of one seed."""

    def __init__(self, seed: int, replica: int = 0):
        self.seed = int(seed)
        self.replica = int(replica)
        self.k0 = np.uint64(self.seed & _MASK32)
        self.k1 = np.uint64((self.seed >> 32) & _MASK32)
        self.counter = np.uint64(0)

    def uniforms(self, n: int) -> np.ndarray:
        out = np.empty(n)
        self.counter = np.uint64(_core.fill_uniforms(self.k0, self.k1, np.uint64(self.replica), self.counter, out))
        return out


@dataclass(frozen=True)
class ExitSample:
    tau: float
    x_pre: np.ndarray
    x_post: np.ndarray
    n_real_jumps: int
    n_fictitious: int
    censored: bool
    hit: bool = False


@dataclass
class ExitBatch:
    tau: np.ndarray
    x_pre: np.ndarray
    x_post: np.ndarray
    n_real: np.ndarray
    n_fictitious: np.ndarray
    flags: np.ndarray
    hit: np.ndarray

    @property
    def censored(self) -> np.ndarray:
        return (self.flags & _core.FLAG_CENSORED) != 0

    def __len__(self):
        return self.tau.size

    def sample(self, i: int) -> ExitSample:
        return ExitSample(
            float(self.tau[i]), self.x_pre[i].copy(), self.x_post[i].copy(),
            int(self.n_real[i]), int(self.n_fictitious[i]), bool(self.censored[i]), bool(self.hit[i]),
        )

    def mean_tau(self) -> MCEstimate:
        return MCEstimate.from_samples(self.tau, self.censored)


# ---------------------------------------------------------------------------
# dominating measure


def _masses(kernel: JumpKernel, epsilon: float):
    m_in = kernel.radial_integral(epsilon, 1.0) if epsilon < 1.0 else 0.0
    m_out = kernel.radial_integral(max(epsilon, 1.0), np.inf)
    return m_in, m_out


def envelope_rate(kernel: JumpKernel, epsilon: float) -> float:
    """Total mass of the dominating measure outside B(0, epsilon); 0 flags a
    kernel with no jumps longer than epsilon."""
    if not epsilon > 0.0:
        raise ValueError("the envelope diverges at epsilon = 0")
    m_in, m_out = _masses(kernel, epsilon)
    return float(np.sum(kernel.cones.weights()) * (m_in + m_out))


def sampler_data(kernel: JumpKernel, epsilon: float) -> _core.SamplerData:
    m_in, m_out = _masses(kernel, epsilon)
    weights = kernel.cones.weights()
    rate = float(np.sum(weights) * (m_in + m_out))
    if not rate > 0.0:
        raise ValueError("degenerate envelope: no jumps longer than epsilon")
    c, p = kernel.radial.ell_params()
    ell_sup = 0.0
    if epsilon < 1.0:
        # log(e/t)**p is monotone on (0, 1], so the sup sits at an end point
        ell_sup = max(c * math.log(math.e / epsilon) ** p, c) if p else c
    return _core.SamplerData(
        eps=float(epsilon),
        m_in=float(m_in),
        m_out=float(m_out),
        ell_sup=float(ell_sup),
        cum_w=np.cumsum(weights),
        rate=rate,
    )


def sample_jump(kernel: JumpKernel, x, epsilon: float, stream: RNGStream):
    """One proposal; returns the displacement or FICTITIOUS if thinned out."""
    d = kernel.dim
    h = np.empty(d)
    acc, p, ctr = _core.propose(
        np.asarray(x, dtype=float), kernel.data, sampler_data(kernel, epsilon),
        stream.k0, stream.k1, np.uint64(stream.replica), stream.counter,
        h, np.empty(d), np.empty(max(d, 2)),
    )
    stream.counter = np.uint64(ctr)
    if p > 1.0 + 1e-12 or p < 0.0:
        raise KernelBoundError(f"acceptance probability {p!r}")
    return h if acc else FICTITIOUS


def sample_jumps(kernel: JumpKernel, x, epsilon: float, n: int, seed: int = 0, first_replica: int = 0):
    """``n`` independent proposals (draw i uses replica stream first_replica + i).

    Returns (displacements, accepted mask).
    """
    d = kernel.dim
    out_h = np.empty((n, d))
    acc = np.empty(n, dtype=np.bool_)
    k0, k1 = SimConfig(seed=seed).keys
    worst = _core.sample_jumps(np.asarray(x, dtype=float), kernel.data, sampler_data(kernel, epsilon),
                               k0, k1, first_replica, out_h, acc)
    if worst > 1.0 + 1e-12:
        raise KernelBoundError(f"acceptance probability {worst!r}")
    return out_h, acc


# ---------------------------------------------------------------------------
# batched runs


def _empty_targets(d):
    return np.zeros((0, d)), np.zeros(0)


def _encode_targets(targets, d):
    if targets is None:
        return _empty_targets(d)
    if isinstance(targets, Ball):
        targets = [targets]
    targets = list(targets)
    if not targets:
        return _empty_targets(d)
    return np.array([t.center for t in targets]), np.array([t.radius for t in targets])


def _run(kernel, mode, start, ball, config: SimConfig, n: int, first_replica: int = 0, threads: int = 1,
         targets=None, set_a=None, set_b=None, horizon=None, angular_nodes: int = 64):
    d = kernel.dim
    start = np.ascontiguousarray(np.asarray(start, dtype=float))
    if start.shape != (d,):
        raise ValueError("start point has the wrong dimension")
    kd = kernel.data
    sd = sampler_data(kernel, config.epsilon)
    k0, k1 = config.keys
    if ball is None:
        ball_c, ball_r = np.zeros(d), -1.0
    else:
        ball_c, ball_r = np.ascontiguousarray(ball.center, dtype=float), float(ball.radius)
    if horizon is None:
        horizon = config.time_horizon
    horizon = -1.0 if horizon is None else float(horizon)
    tgt, tgt_r = _encode_targets(targets, d)
    if mode == _core.MODE_LEVY:
        rule = angular_rule(kernel, angular_nodes)
        enc_a, enc_b = set_a.encode(), set_b.encode()
        ang = (rule.nodes, rule.weights, rule.k1, rule.k2)
    else:
        enc_a = enc_b = np.zeros(d + 2)
        ang = (np.zeros((1, d)), np.zeros(1), np.zeros(1), np.zeros(1))

    tau = np.empty(n)
    x_pre = np.empty((n, d))
    x_post = np.empty((n, d))
    n_real = np.empty(n, dtype=np.int64)
    n_fict = np.empty(n, dtype=np.int64)
    flags = np.empty(n, dtype=np.int64)
    hit = np.empty(n, dtype=np.int64)
    lcount = np.empty(n)
    lint = np.empty(n)

    def work(off):
        count = min(CHUNK, n - off)
        _core.run_block(
            kd, sd, mode, start, ball_c, ball_r, horizon, int(config.max_events), k0, k1,
            first_replica + off, count, off, tgt, tgt_r, enc_a, enc_b, *ang, _GLX, _GLW,
            tau, x_pre, x_post, n_real, n_fict, flags, hit, lcount, lint,
        )

    offsets = range(0, n, CHUNK)
    if threads <= 1 or n <= CHUNK:
        for off in offsets:
            work(off)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, offsets))
    if np.any(flags & _core.FLAG_BOUND_VIOLATION):
        raise KernelBoundError("thinning probability left [0, 1]")
    batch = ExitBatch(tau, x_pre, x_post, n_real, n_fict, flags, hit.astype(bool))
    return batch, lcount, lint


def simulate_exits(kernel: JumpKernel, start, ball: Ball, config: SimConfig, n: int,
                   first_replica: int = 0, threads: int = 1) -> ExitBatch:
    """``n`` independent exit runs from ``start`` (replicas first_replica ...)."""
    batch, _, _ = _run(kernel, _core.MODE_EXIT, start, ball, config, n, first_replica, threads)
    return batch


def simulate_until_exit(kernel: JumpKernel, start, ball: Ball, config: SimConfig, replica: int = 0) -> ExitSample:
    """Single exit run; a start outside the ball exits at time 0."""
    return simulate_exits(kernel, start, ball, config, 1, replica).sample(0)


def hitting_before_exit(kernel: JumpKernel, start, targets, container: Ball, config: SimConfig, n: int,
                        first_replica: int = 0, threads: int = 1) -> ExitBatch:
    """Runs stopped at the first landing in a target ball or the exit from the
    container, whichever comes first; ``batch.hit`` marks target hits."""
    batch, _, _ = _run(kernel, _core.MODE_HIT, start, container, config, n, first_replica, threads, targets=targets)
    return batch


def levy_system_paths(kernel: JumpKernel, start, set_a, set_b, n: int, config: SimConfig, horizon: float = 1.0,
                      container: Ball | None = None, first_replica: int = 0, threads: int = 1,
                      angular_nodes: int = 64):
    """Both sides of the jump-counting identity for disjoint sets A and B.

    Returns (count, compensator): the mean number of jumps from A into B up
    to the stopping time, and the mean of the time integral over
    {X_s in A} of the kernel mass of B seen from X_s.
    """
    for s in (set_a, set_b):
        if not isinstance(s, (Ball, Annulus)):
            raise TypeError("sets must be balls or annuli")
    if not regions_disjoint(set_a, set_b):
        raise ValueError("sets A and B overlap")
    batch, count, integral = _run(
        kernel, _core.MODE_LEVY, start, container, config, n, first_replica, threads,
        set_a=set_a, set_b=set_b, horizon=horizon, angular_nodes=angular_nodes,
    )
    cens = batch.censored
    return MCEstimate.from_samples(count, cens), MCEstimate.from_samples(integral, cens)


def trace_paths(kernel: JumpKernel, start, ball: Ball, config: SimConfig, replicas, max_events: int = 100_000):
    """Event logs of the given replicas as rows
    (replica, time, x_pre..., x_post..., fictitious)."""
    d = kernel.dim
    kd = kernel.data
    sd = sampler_data(kernel, config.epsilon)
    k0, k1 = config.keys
    cap = min(max_events, config.max_events)
    rows = []
    for rep in replicas:
        times = np.empty(cap)
        pre = np.empty((cap, d))
        post = np.empty((cap, d))
        fict = np.empty(cap, dtype=np.bool_)
        m = _core.trace_path(kd, sd, np.asarray(start, dtype=float), np.asarray(ball.center, dtype=float),
                             float(ball.radius), cap, k0, k1, int(rep), times, pre, post, fict)
        for i in range(m):
            rows.append((int(rep), times[i], *pre[i], *post[i], int(fict[i])))
    return rows
