"""Compiled primitives shared by the kernel, quadrature and simulation layers.

Everything here is numba-jitted and operates on two flat records:

* ``KernelData``  -- cone caps, radial profile and modulator of a jump kernel
* ``SamplerData`` -- normalising masses of the dominating jump measure for a
  given small-jump cutoff

The random numbers come from Philox-4x32-10 keyed by the master seed, with
the replica index and a per-replica draw counter in the counter words, so a
replica's stream does not depend on scheduling.
"""

import math
from collections import namedtuple

import numpy as np
from numba import njit

KernelData = namedtuple(
    "KernelData",
    [
        "dim",
        "axes",
        "cosines",
        "upper",
        "delta",
        "theta_c",
        "basis",
        "alpha",
        "ell_c",
        "ell_p",
        "tail_kind",
        "tail_param",
        "tail_scale",
        "mod_kind",
        "mod_vec",
        "mod_phase",
        "mod_values",
        "mod_shape",
        "mod_cell",
    ],
)

SamplerData = namedtuple(
    "SamplerData",
    ["eps", "m_in", "m_out", "ell_sup", "cum_w", "rate"],
)

TAIL_POWER = 0
TAIL_TRUNCATED = 1
TAIL_EXPONENTIAL = 2

MOD_CONSTANT = 0
MOD_SINUSOIDAL = 1
MOD_PATCHWISE = 2

MODE_EXIT = 0
MODE_HIT = 1
MODE_LEVY = 2

FLAG_CENSORED = 1
FLAG_BOUND_VIOLATION = 2

# Philox-4x32 constants (Salmon et al., Random123)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S5 = np.uint64(5)
_S6 = np.uint64(6)
_ONE = np.uint64(1)


@njit(cache=True, nogil=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    for i in range(10):
        if i > 0:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK
        c0, c1, c2, c3 = (hi1 ^ c1 ^ k0) & _MASK, lo1, (hi0 ^ c3 ^ k1) & _MASK, lo0
    return c0, c1, c2, c3


@njit(cache=True, nogil=True)
def uniform(k0, k1, rep, ctr):
    """Double in the open interval (0, 1) for draw ``ctr`` of replica ``rep``."""
    r0, r1, _, _ = philox4x32(ctr & _MASK, ctr >> _S32, rep & _MASK, rep >> _S32, k0, k1)
    a = r0 >> _S5
    b = r1 >> _S6
    return (a * 67108864.0 + b + 0.5) / 9007199254740992.0


@njit(cache=True, nogil=True)
def fill_uniforms(k0, k1, rep, ctr0, out):
    ctr = ctr0
    for i in range(out.shape[0]):
        out[i] = uniform(k0, k1, rep, ctr)
        ctr += _ONE
    return ctr


# ---------------------------------------------------------------------------
# kernel evaluation


@njit(cache=True, nogil=True)
def ell_value(t, c, p):
    if p == 0.0:
        return c
    return c * math.log(math.e / t) ** p


@njit(cache=True, nogil=True)
def j_value(t, kd):
    s = -(kd.dim + kd.alpha)
    if t <= 1.0:
        return ell_value(t, kd.ell_c, kd.ell_p) * t**s
    if kd.tail_kind == TAIL_TRUNCATED and t > kd.tail_param:
        return 0.0
    v = kd.ell_c * kd.tail_scale * t**s
    if kd.tail_kind == TAIL_EXPONENTIAL:
        v *= math.exp(-kd.tail_param * (t - 1.0))
    return v


@njit(cache=True, nogil=True)
def cap_values(xi, kd, force):
    """(k1, k2, sum of upper values over caps containing xi).

    ``force`` marks a cap known to contain ``xi`` (sampled from it); pass -1
    otherwise.
    """
    k1 = 0.0
    k2 = 0.0
    ks = 0.0
    for i in range(kd.axes.shape[0]):
        c = 0.0
        for k in range(kd.dim):
            c += xi[k] * kd.axes[i, k]
        if i == force or abs(c) >= kd.cosines[i]:
            k1 = kd.delta
            if kd.upper[i] > k2:
                k2 = kd.upper[i]
            ks += kd.upper[i]
    return k1, k2, ks


@njit(cache=True, nogil=True)
def modulator(x, kd):
    if kd.mod_kind == MOD_CONSTANT:
        return 1.0
    if kd.mod_kind == MOD_SINUSOIDAL:
        s = 0.0
        for k in range(kd.dim):
            s += kd.mod_vec[k] * x[k]
        return 0.5 + 0.5 * math.sin(s + kd.mod_phase)
    idx = 0
    for k in range(kd.dim):
        m = kd.mod_shape[k]
        cell = int(math.floor(x[k] / kd.mod_cell)) % m
        idx = idx * m + cell
    return kd.mod_values[idx]


@njit(cache=True, nogil=True)
def angular_value(k1, k2, m):
    v = k1 + m * (k2 - k1)
    if v < k1:
        v = k1
    if v > k2:
        v = k2
    return v


@njit(cache=True, nogil=True)
def n_value(x, h, kd):
    t2 = 0.0
    for k in range(kd.dim):
        t2 += h[k] * h[k]
    t = math.sqrt(t2)
    xi = np.empty(kd.dim)
    for k in range(kd.dim):
        xi[k] = h[k] / t
    k1, k2, _ = cap_values(xi, kd, -1)
    if k2 == 0.0:
        return 0.0
    return angular_value(k1, k2, modulator(x, kd)) * j_value(t, kd)


@njit(cache=True, nogil=True)
def n_many(xs, hs, kd, out):
    for i in range(hs.shape[0]):
        out[i] = n_value(xs[i], hs[i], kd)


@njit(cache=True, nogil=True)
def bounds_many(hs, kd, lo, hi):
    """k1(h/|h|) j(|h|) and k2(h/|h|) j(|h|) row by row."""
    xi = np.empty(kd.dim)
    for i in range(hs.shape[0]):
        t2 = 0.0
        for k in range(kd.dim):
            t2 += hs[i, k] * hs[i, k]
        t = math.sqrt(t2)
        for k in range(kd.dim):
            xi[k] = hs[i, k] / t
        k1, k2, _ = cap_values(xi, kd, -1)
        jt = j_value(t, kd)
        lo[i] = k1 * jt
        hi[i] = k2 * jt


@njit(cache=True, nogil=True)
def caps_many(xis, kd, k1s, k2s):
    for i in range(xis.shape[0]):
        k1, k2, _ = cap_values(xis[i], kd, -1)
        k1s[i] = k1
        k2s[i] = k2


@njit(cache=True, nogil=True)
def modulator_many(xs, kd, out):
    for i in range(xs.shape[0]):
        out[i] = modulator(xs[i], kd)


@njit(cache=True, nogil=True)
def j_many(ts, kd, out):
    for i in range(ts.shape[0]):
        out[i] = j_value(ts[i], kd)


# ---------------------------------------------------------------------------
# radial integrals  I(a, b; p) = int_a^b t^(d-1+p) j(t) dt


@njit(cache=True, nogil=True)
def _power_integral(lo, hi, q):
    # int_lo^hi t^(q-1) dt
    if q == 0.0:
        if lo <= 0.0 or hi == np.inf:
            return np.inf
        return math.log(hi / lo)
    if q > 0.0:
        if hi == np.inf:
            return np.inf
        return (hi**q - lo**q) / q
    if lo <= 0.0:
        return np.inf
    if hi == np.inf:
        return -(lo**q) / q
    return (lo**q - hi**q) / (-q)


@njit(cache=True, nogil=True)
def _log_power_integral(lo, hi, q, c, p, glx, glw):
    # int_lo^hi t^(q-1) c log(e/t)^p dt with 0 <= lo < hi <= 1, in s = log t
    s_hi = math.log(hi)
    if lo <= 0.0:
        if q <= 0.0:
            return np.inf
        s_lo = s_hi - (60.0 + 2.0 * abs(p) * math.log(60.0 / q + 2.0)) / q
    else:
        s_lo = math.log(lo)
    length = s_hi - s_lo
    panels = int(math.ceil(length * max(abs(q), 1.0) / 2.0))
    if panels < 1:
        panels = 1
    if panels > 400:
        panels = 400
    width = length / panels
    total = 0.0
    for k in range(panels):
        a = s_lo + k * width
        for i in range(glx.shape[0]):
            s = a + 0.5 * width * (glx[i] + 1.0)
            total += 0.5 * width * glw[i] * math.exp(q * s) * (1.0 - s) ** p
    return c * total


@njit(cache=True, nogil=True)
def _exp_tail_integral(lo, hi, q, rate, glx, glw):
    # int_lo^hi t^(q-1) exp(-rate (t-1)) dt, 1 <= lo
    cut = 1.0 + 80.0 / rate
    if hi > cut:
        hi = cut
    if hi <= lo:
        return 0.0
    length = hi - lo
    panels = int(math.ceil(length * rate / 2.0 + math.log(hi / lo) * (abs(q) + 1.0)))
    if panels < 1:
        panels = 1
    if panels > 400:
        panels = 400
    width = length / panels
    total = 0.0
    for k in range(panels):
        a = lo + k * width
        for i in range(glx.shape[0]):
            t = a + 0.5 * width * (glx[i] + 1.0)
            total += 0.5 * width * glw[i] * t ** (q - 1.0) * math.exp(-rate * (t - 1.0))
    return total


@njit(cache=True, nogil=True)
def radial_integral(a, b, power, kd, glx, glw):
    if not b > a:
        return 0.0
    q = power - kd.alpha
    total = 0.0
    if a < 1.0:
        hi = b if b < 1.0 else 1.0
        if kd.ell_p == 0.0:
            total += kd.ell_c * _power_integral(a, hi, q)
        else:
            total += _log_power_integral(a, hi, q, kd.ell_c, kd.ell_p, glx, glw)
    if b > 1.0:
        lo = a if a > 1.0 else 1.0
        hi = b
        if kd.tail_kind == TAIL_TRUNCATED and hi > kd.tail_param:
            hi = kd.tail_param
        if hi > lo:
            c = kd.ell_c * kd.tail_scale
            if kd.tail_kind == TAIL_EXPONENTIAL:
                total += c * _exp_tail_integral(lo, hi, q, kd.tail_param, glx, glw)
            else:
                total += c * _power_integral(lo, hi, q)
    return total


@njit(cache=True, nogil=True)
def radial_integral_many(a, b, power, kd, glx, glw, out):
    for i in range(a.shape[0]):
        out[i] = radial_integral(a[i], b[i], power, kd, glx, glw)


# ---------------------------------------------------------------------------
# ray geometry: {t >= 0 : inner <= |y + t xi - c| < outer}


@njit(cache=True, nogil=True)
def _ray_ball(y, xi, c, radius):
    if radius == np.inf:
        return 0.0, np.inf
    b = 0.0
    q = -radius * radius
    for k in range(y.shape[0]):
        s = y[k] - c[k]
        b += xi[k] * s
        q += s * s
    disc = b * b - q
    if disc <= 0.0:
        return 0.0, 0.0
    r = math.sqrt(disc)
    t0 = -b - r
    t1 = -b + r
    if t1 <= 0.0:
        return 0.0, 0.0
    if t0 < 0.0:
        t0 = 0.0
    return t0, t1


@njit(cache=True, nogil=True)
def ray_annulus(y, xi, c, inner, outer):
    """Up to two disjoint intervals (a1, b1, a2, b2); empty ones have a >= b."""
    a, b = _ray_ball(y, xi, c, outer)
    if not b > a:
        return 0.0, 0.0, 0.0, 0.0
    if inner <= 0.0:
        return a, b, 0.0, 0.0
    ia, ib = _ray_ball(y, xi, c, inner)
    if not ib > ia:
        return a, b, 0.0, 0.0
    a1, b1 = a, min(b, ia)
    a2, b2 = max(a, ib), b
    return a1, b1, a2, b2


@njit(cache=True, nogil=True)
def ray_annulus_many(y, xis, c, inner, outer, out):
    for i in range(xis.shape[0]):
        a1, b1, a2, b2 = ray_annulus(y, xis[i], c, inner, outer)
        out[i, 0] = a1
        out[i, 1] = b1
        out[i, 2] = a2
        out[i, 3] = b2


@njit(cache=True, nogil=True)
def in_annulus(x, c, inner, outer):
    r2 = 0.0
    for k in range(x.shape[0]):
        s = x[k] - c[k]
        r2 += s * s
    return r2 >= inner * inner and r2 < outer * outer


@njit(cache=True, nogil=True)
def region_rate(y, kd, m, bset, excl_c, excl_r, eps, ang_xi, ang_w, ang_k1, ang_k2, glx, glw):
    """int over bset minus B(excl_c, excl_r) of n(y, u - y) 1{|u - y| > eps} du.

    ``m`` is the modulator value at y; polar quadrature centred at y.
    """
    c = bset[:-2]
    inner = bset[-2]
    outer = bset[-1]
    total = 0.0
    for k in range(ang_xi.shape[0]):
        kv = angular_value(ang_k1[k], ang_k2[k], m)
        if kv == 0.0:
            continue
        lo = eps
        if excl_r > 0.0:
            _, t_exit = _ray_ball(y, ang_xi[k], excl_c, excl_r)
            if t_exit > lo:
                lo = t_exit
        a1, b1, a2, b2 = ray_annulus(y, ang_xi[k], c, inner, outer)
        s = 0.0
        if b1 > lo:
            s += radial_integral(max(a1, lo), b1, 0.0, kd, glx, glw)
        if b2 > lo:
            s += radial_integral(max(a2, lo), b2, 0.0, kd, glx, glw)
        total += ang_w[k] * kv * s
    return total


@njit(cache=True, nogil=True)
def region_rate_many(ys, ms, kd, bset, excl_c, excl_r, eps, ang_xi, ang_w, ang_k1, ang_k2, glx, glw, out):
    for i in range(ys.shape[0]):
        out[i] = region_rate(ys[i], kd, ms[i], bset, excl_c, excl_r, eps, ang_xi, ang_w, ang_k1, ang_k2, glx, glw)


@njit(cache=True, nogil=True)
def set_rate(y, kd, eps, bset, ang_xi, ang_w, ang_k1, ang_k2, glx, glw):
    """int over bset of n(y, u - y) 1{|u - y| > eps} du."""
    return region_rate(y, kd, modulator(y, kd), bset, bset[:-2], -1.0, eps, ang_xi, ang_w, ang_k1, ang_k2, glx, glw)


# ---------------------------------------------------------------------------
# sampling from the dominating measure sum_i u_i 1_{S_i}(xi) j(t) 1{t > eps}


@njit(cache=True, nogil=True)
def draw_direction(kd, cap, k0, k1, rep, ctr, xi, tmp):
    d = kd.dim
    ax = kd.axes[cap]
    if d == 1:
        u = uniform(k0, k1, rep, ctr)
        ctr += _ONE
        xi[0] = 1.0 if u < 0.5 else -1.0
        return ctr
    th = kd.theta_c[cap]
    cosc = math.cos(th)
    if cosc < 0.0:
        cosc = 0.0
    if d == 2:
        u = uniform(k0, k1, rep, ctr)
        ctr += _ONE
        phi = th * (2.0 * u - 1.0)
        ct = math.cos(phi)
        st = math.sin(phi)
        b = kd.basis[cap, 0]
        for k in range(2):
            xi[k] = ct * ax[k] + st * b[k]
    else:
        if d == 3:
            u = uniform(k0, k1, rep, ctr)
            ctr += _ONE
            ct = cosc + u * (1.0 - cosc)
        else:
            e = 0.5 * (d - 3)
            while True:
                u = uniform(k0, k1, rep, ctr)
                ctr += _ONE
                ct = cosc + u * (1.0 - cosc)
                v = uniform(k0, k1, rep, ctr)
                ctr += _ONE
                if v <= (1.0 - ct * ct) ** e:
                    break
        st = math.sqrt(max(0.0, 1.0 - ct * ct))
        if d == 3:
            u = uniform(k0, k1, rep, ctr)
            ctr += _ONE
            psi = 2.0 * math.pi * u
            tmp[0] = math.cos(psi)
            tmp[1] = math.sin(psi)
        else:
            nrm = 0.0
            i = 0
            while i < d - 1:
                u1 = uniform(k0, k1, rep, ctr)
                ctr += _ONE
                u2 = uniform(k0, k1, rep, ctr)
                ctr += _ONE
                rad = math.sqrt(-2.0 * math.log(u1))
                tmp[i] = rad * math.cos(2.0 * math.pi * u2)
                if i + 1 < d - 1:
                    tmp[i + 1] = rad * math.sin(2.0 * math.pi * u2)
                i += 2
            for i in range(d - 1):
                nrm += tmp[i] * tmp[i]
            nrm = math.sqrt(nrm)
            for i in range(d - 1):
                tmp[i] /= nrm
        for k in range(d):
            s = 0.0
            for i in range(d - 1):
                s += tmp[i] * kd.basis[cap, i, k]
            xi[k] = ct * ax[k] + st * s
    u = uniform(k0, k1, rep, ctr)
    ctr += _ONE
    if u < 0.5:
        for k in range(d):
            xi[k] = -xi[k]
    return ctr


@njit(cache=True, nogil=True)
def _inverse_power(a, b, alpha, u):
    # sample t on (a, b] with density proportional to t^(-1-alpha)
    if b == np.inf:
        return a * u ** (-1.0 / alpha)
    aa = a ** (-alpha)
    bb = b ** (-alpha)
    return (aa - u * (aa - bb)) ** (-1.0 / alpha)


@njit(cache=True, nogil=True)
def draw_radius(kd, sd, k0, k1, rep, ctr):
    total = sd.m_in + sd.m_out
    u = uniform(k0, k1, rep, ctr)
    ctr += _ONE
    alpha = kd.alpha
    if u * total < sd.m_in:
        while True:
            u = uniform(k0, k1, rep, ctr)
            ctr += _ONE
            t = _inverse_power(sd.eps, 1.0, alpha, u)
            if t > 1.0:
                t = 1.0
            if kd.ell_p == 0.0:
                return t, ctr
            v = uniform(k0, k1, rep, ctr)
            ctr += _ONE
            if v * sd.ell_sup <= ell_value(t, kd.ell_c, kd.ell_p):
                return t, ctr
    a = sd.eps if sd.eps > 1.0 else 1.0
    b = kd.tail_param if kd.tail_kind == TAIL_TRUNCATED else np.inf
    while True:
        u = uniform(k0, k1, rep, ctr)
        ctr += _ONE
        t = _inverse_power(a, b, alpha, u)
        if kd.tail_kind != TAIL_EXPONENTIAL:
            return t, ctr
        v = uniform(k0, k1, rep, ctr)
        ctr += _ONE
        if v <= math.exp(-kd.tail_param * (t - a)):
            return t, ctr


@njit(cache=True, nogil=True)
def propose(x, kd, sd, k0, k1, rep, ctr, h, xi, tmp):
    """One proposal from the dominating measure plus the thinning decision.

    Returns (accepted, acceptance probability, ctr).
    """
    u = uniform(k0, k1, rep, ctr)
    ctr += _ONE
    ncap = sd.cum_w.shape[0]
    target = u * sd.cum_w[ncap - 1]
    cap = 0
    while cap < ncap - 1 and sd.cum_w[cap] <= target:
        cap += 1
    ctr = draw_direction(kd, cap, k0, k1, rep, ctr, xi, tmp)
    t, ctr = draw_radius(kd, sd, k0, k1, rep, ctr)
    for k in range(kd.dim):
        h[k] = t * xi[k]
    c1, c2, cs = cap_values(xi, kd, cap)
    p = angular_value(c1, c2, modulator(x, kd)) / cs
    if p >= 1.0:
        return True, p, ctr
    v = uniform(k0, k1, rep, ctr)
    ctr += _ONE
    return v < p, p, ctr


@njit(cache=True, nogil=True)
def sample_jumps(x, kd, sd, k0, k1, rep0, out_h, out_acc):
    """Independent proposals, draw i on replica stream rep0 + i."""
    xi = np.empty(kd.dim)
    tmp = np.empty(max(kd.dim, 2))
    h = np.empty(kd.dim)
    worst = 0.0
    for i in range(out_h.shape[0]):
        rep = np.uint64(rep0 + i)
        acc, p, _ = propose(x, kd, sd, k0, k1, rep, np.uint64(0), h, xi, tmp)
        if p > worst:
            worst = p
        for k in range(kd.dim):
            out_h[i, k] = h[k]
        out_acc[i] = acc
    return worst


@njit(cache=True, nogil=True)
def _in_targets(y, tgt, tgt_r):
    for j in range(tgt.shape[0]):
        r2 = 0.0
        for k in range(y.shape[0]):
            s = y[k] - tgt[j, k]
            r2 += s * s
        if r2 <= tgt_r[j] * tgt_r[j]:
            return True
    return False


@njit(cache=True, nogil=True)
def run_block(
    kd, sd, mode, start, ball_c, ball_r, horizon, max_events, k0, k1, rep0, count, out_off,
    tgt, tgt_r, set_a, set_b, ang_xi, ang_w, ang_k1, ang_k2, glx, glw,
    tau, x_pre, x_post, n_real, n_fict, flags, hit, lcount, lint,
):
    """Simulate replicas rep0 .. rep0+count-1 into output rows out_off ...

    mode 0: run until the first exit from the open ball (ball_c, ball_r)
    mode 1: additionally stop when a post-jump state lies in a target ball
    mode 2: Levy-system bookkeeping for sets A, B up to ``horizon`` or exit
    A ball radius <= 0 means no container.  horizon <= 0 means none.
    """
    d = kd.dim
    x = np.empty(d)
    y = np.empty(d)
    h = np.empty(d)
    xi = np.empty(d)
    tmp = np.empty(max(d, 2))
    has_ball = ball_r > 0.0
    a_c = set_a[:-2]
    for i in range(count):
        out = out_off + i
        rep = np.uint64(rep0 + i)
        ctr = np.uint64(0)
        for k in range(d):
            x[k] = start[k]
        t = 0.0
        nr = 0
        nf = 0
        fl = 0
        hh = 0
        lc = 0.0
        li = 0.0
        done = False
        if mode == MODE_HIT and _in_targets(x, tgt, tgt_r):
            hh = 1
            done = True
        elif has_ball and not in_annulus(x, ball_c, 0.0, ball_r):
            done = True
        if done:
            for k in range(d):
                y[k] = x[k]
        rate_b = 0.0
        rate_b_ready = False
        while not done:
            if nr + nf >= max_events:
                fl |= FLAG_CENSORED
                break
            u = uniform(k0, k1, rep, ctr)
            ctr += _ONE
            dt = -math.log(u) / sd.rate
            x_in_a = False
            if mode == MODE_LEVY:
                x_in_a = in_annulus(x, a_c, set_a[-2], set_a[-1])
                if x_in_a and not rate_b_ready:
                    rate_b = set_rate(x, kd, sd.eps, set_b, ang_xi, ang_w, ang_k1, ang_k2, glx, glw)
                    rate_b_ready = True
            if horizon > 0.0 and t + dt >= horizon:
                if x_in_a:
                    li += (horizon - t) * rate_b
                t = horizon
                if mode != MODE_LEVY:
                    fl |= FLAG_CENSORED
                for k in range(d):
                    y[k] = x[k]
                break
            if x_in_a:
                li += dt * rate_b
            t += dt
            acc, p, ctr = propose(x, kd, sd, k0, k1, rep, ctr, h, xi, tmp)
            if p > 1.0 + 1e-12 or p < 0.0:
                fl |= FLAG_BOUND_VIOLATION
                break
            if not acc:
                nf += 1
                continue
            nr += 1
            for k in range(d):
                y[k] = x[k] + h[k]
            if mode == MODE_LEVY and x_in_a and in_annulus(y, set_b[:-2], set_b[-2], set_b[-1]):
                lc += 1.0
            if mode == MODE_HIT and _in_targets(y, tgt, tgt_r):
                hh = 1
                break
            if has_ball and not in_annulus(y, ball_c, 0.0, ball_r):
                break
            for k in range(d):
                x[k] = y[k]
            rate_b_ready = False
        tau[out] = t
        for k in range(d):
            x_pre[out, k] = x[k]
            x_post[out, k] = y[k]
        n_real[out] = nr
        n_fict[out] = nf
        flags[out] = fl
        hit[out] = hh
        lcount[out] = lc
        lint[out] = li


@njit(cache=True, nogil=True)
def trace_path(kd, sd, start, ball_c, ball_r, max_events, k0, k1, rep, times, pre, post, fict):
    """Event log of one exit run (real and fictitious events); returns the count."""
    d = kd.dim
    x = start.copy()
    h = np.empty(d)
    xi = np.empty(d)
    tmp = np.empty(max(d, 2))
    r = np.uint64(rep)
    ctr = np.uint64(0)
    t = 0.0
    m = 0
    if not in_annulus(x, ball_c, 0.0, ball_r):
        return 0
    while m < max_events and m < times.shape[0]:
        u = uniform(k0, k1, r, ctr)
        ctr += _ONE
        t += -math.log(u) / sd.rate
        acc, p, ctr = propose(x, kd, sd, k0, k1, r, ctr, h, xi, tmp)
        times[m] = t
        for k in range(d):
            pre[m, k] = x[k]
            post[m, k] = x[k] + h[k] if acc else x[k]
        fict[m] = not acc
        m += 1
        if acc:
            for k in range(d):
                x[k] = x[k] + h[k]
            if not in_annulus(x, ball_c, 0.0, ball_r):
                break
    return m
