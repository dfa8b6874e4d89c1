"""Numerics for the slowly varying factor of the radial density."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .kernel import Constant, LogPower, Product, RadialProfile

__all__ = [
    "KaramataReport",
    "eval_ell",
    "ell_ratio",
    "karamata_ratio_small",
    "karamata_ratio_large",
    "monotone_envelope",
]


def _params(spec):
    if not isinstance(spec, (Constant, LogPower, Product)):
        raise TypeError(f"unsupported slowly varying factor {spec!r}")
    return spec.reduce()


def eval_ell(spec, t):
    """Value of the factor at ``t`` in (0, 2); vectorized over ``t``."""
    arr = np.asarray(t, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 2.0))):
        raise ValueError("slowly varying factor is defined on (0, 2)")
    c, p = _params(spec)
    out = c * np.log(math.e / arr) ** p if p else np.full_like(arr, c)
    return float(out) if out.ndim == 0 else out


def ell_ratio(spec, r: float, v):
    """ell(r * e^v) / ell(r), computed without forming either value."""
    _, p = _params(spec)
    if not p:
        return np.ones_like(np.asarray(v, dtype=float)) if np.ndim(v) else 1.0
    big = math.log(math.e / r)
    return ((big - np.asarray(v, dtype=float)) / big) ** p


@dataclass(frozen=True)
class KaramataReport:
    r: float
    ratio: float
    beta: float

    def __post_init__(self):
        if not self.ratio > 0.0:
            raise ValueError("Karamata ratio must be positive")


def karamata_ratio_small(spec, beta1: float, r: float) -> KaramataReport:
    """int_0^r u^b ell(u) du divided by r^(1+b) ell(r) / (1+b).

    With u = r e^-v the quotient is (1+b) int_0^inf e^-(1+b)v ell(r e^-v)/ell(r) dv.
    """
    if not beta1 > -1.0:
        raise ValueError("integral diverges for beta1 <= -1")
    if not 0.0 < r <= 1.0:
        raise ValueError("r must lie in (0, 1]")
    k = 1.0 + beta1
    val, _ = integrate.quad(lambda v: math.exp(-k * v) * ell_ratio(spec, r, -v), 0.0, np.inf,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return KaramataReport(r, k * val, beta1)


def karamata_ratio_large(spec, beta2: float, r: float) -> KaramataReport:
    """int_r^1 u^-b ell(u) du divided by r^(1-b) ell(r) / (b-1)."""
    if not beta2 > 1.0:
        raise ValueError("asymptotic fails for beta2 <= 1")
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    k = beta2 - 1.0
    top = math.log(1.0 / r)
    val, _ = integrate.quad(lambda v: math.exp(-k * v) * ell_ratio(spec, r, v), 0.0, top,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return KaramataReport(r, k * val, beta2)


def _raw(radial: RadialProfile, dim: int, s: np.ndarray) -> np.ndarray:
    return s ** -(dim + radial.alpha) * eval_ell(radial.ell, s)


def monotone_envelope(radial: RadialProfile, dim: int, t, points: int = 4096, tol: float = 1e-6):
    """max over s in [t, 1] of s^-(d+alpha) ell(s), a non-increasing majorant.

    The max is taken on a log-spaced grid, refined four-fold until two
    successive grids agree to ``tol``.  Vectorized over ``t``.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~((ts > 0.0) & (ts <= 1.0))):
        raise ValueError("t must lie in (0, 1]")
    out = np.empty_like(ts)
    for i, ti in enumerate(ts):
        n = points
        prev = None
        while True:
            grid = np.exp(np.linspace(math.log(ti), 0.0, n))
            cur = float(np.max(_raw(radial, dim, grid)))
            if prev is not None and abs(cur - prev) <= tol * cur:
                break
            prev = cur
            n *= 4
        out[i] = cur
    return out if np.ndim(t) else float(out[0])
