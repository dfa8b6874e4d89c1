import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisojump.estimators import (
    ConstantData,
    DegenerateDataError,
    HolderFit,
    IndicatorOfAnnulus,
    IndicatorOfBall,
    RadialProfileData,
    SignedBump,
    averaging_check,
    estimate_exit_stats,
    estimate_ks_ratio,
    estimate_survival,
    evaluate_harmonic,
    harmonic_samples,
    harnack_report,
    holder_fit,
    restricted_harnack_check,
    signed_harnack_scan,
)
from anisojump.geometry import Annulus, Ball, governing_angle, lambda_max
from anisojump.kernel import isotropic_kernel
from anisojump.simulate import SimConfig

CFG = SimConfig(epsilon=0.05, seed=1)


# -- exterior data ---------------------------------------------------------------


def test_data_values_and_norms():
    z = np.array([[0.0, 0.0], [2.0, 0.0], [5.0, 0.0]])
    assert np.array_equal(ConstantData(2.0)(z), [2.0, 2.0, 2.0])
    ball = IndicatorOfBall((2.0, 0.0), 0.5, 3.0)
    assert np.array_equal(ball(z), [0.0, 3.0, 0.0])
    ann = IndicatorOfAnnulus((0.0, 0.0), 1.0, 3.0, -2.0)
    assert np.array_equal(ann(z), [0.0, -2.0, 0.0])
    assert ann.sup_norm == 2.0 and ann.negative_part()[0][1] == 2.0
    assert ball.negative_part() == []


def test_signed_bump_amplitude():
    g = SignedBump(Ball([0.0, 0.0], 1.0), Annulus([0.0, 0.0], 3.0, 4.0), 1.0, 0.5)
    h = g.with_amplitude(4.0)
    z = np.array([[0.0, 0.0], [3.5, 0.0]])
    assert np.array_equal(h(z), [1.0, -4.0])
    assert h.sup_norm == 4.0
    assert g.with_amplitude(0.0).negative_part() == []


def test_radial_profile_data():
    g = RadialProfileData(lambda s: np.minimum(1.0, 1.0 / s), (1.0, 0.0), 1.0)
    assert g(np.array([3.0, 0.0])) == pytest.approx(0.5)
    assert g.negative_part() is None


# -- exit statistics ---------------------------------------------------------------


def test_exit_stats_checks(iso2):
    with pytest.raises(ValueError):
        estimate_exit_stats(iso2, [0, 0], Ball([0, 0], 1.0), 1, CFG)


def test_exit_stats_normalisation_one_dim():
    k = isotropic_kernel(1, 1.0)
    st_ = estimate_exit_stats(k, [0.0], Ball([0.0], 0.5), 4000, SimConfig(epsilon=0.005, seed=2), times=(0.01, 0.1, 10.0))
    assert st_.normalized.mean == pytest.approx(st_.tau.mean / 0.5, rel=1e-12)
    assert st_.normalized.mean == pytest.approx(1 / math.pi, rel=0.06)
    probs = [e.mean for _, e in st_.survival]
    assert probs == sorted(probs) and probs[-1] == 1.0
    assert not st_.degenerate


def test_exit_stats_boundary_flag(iso2):
    st_ = estimate_exit_stats(iso2, [1.0, 0.0], Ball([0.0, 0.0], 1.0), 10, CFG)
    assert st_.degenerate


def test_survival_monotone(iso2):
    rows = estimate_survival(iso2, [0.0, 0.0], Ball([0.0, 0.0], 0.5), [0.3, 0.01, 0.1], 2000, CFG)
    assert [t for t, _ in rows] == [0.01, 0.1, 0.3]
    ps = [e.mean for _, e in rows]
    assert ps == sorted(ps) and 0.0 <= ps[0] and ps[-1] <= 1.0


# -- hitting ---------------------------------------------------------------------------


def test_ks_ratio_rows(narrow_cone):
    lam = 0.5 * lambda_max(governing_angle(narrow_cone))
    rows = estimate_ks_ratio(narrow_cone, [0.0, 0.0], 1.0, lam, [0.0, 0.5], 500, CFG)
    assert rows[0].probability.mean == 0.0 and rows[0].volume_ratio == 0.0
    assert rows[1].volume_ratio == pytest.approx(0.5 * lam**2)
    assert rows[1].probability.mean > 0.0


def test_ks_rejects_large_lambda(narrow_cone):
    lam = 1.01 * lambda_max(governing_angle(narrow_cone))
    with pytest.raises(ValueError):
        estimate_ks_ratio(narrow_cone, [0.0, 0.0], 1.0, lam, [0.5], 10, CFG)


# -- harmonic functions -------------------------------------------------------------------


def test_constant_data_is_exact(two_cap):
    est = evaluate_harmonic(two_cap, Ball([0.0, 0.0], 1.0), ConstantData(2.5), [0.1, 0.2], 200, CFG)
    assert est.mean == 2.5 and est.std_error == 0.0


def test_poisson_kernel_one_dim():
    # exit distribution of the symmetric Cauchy process from (-1, 1) started at 0:
    # density (1/pi) / (|y| sqrt(y^2 - 1)); mass beyond |y| = 2 is 1/3
    k = isotropic_kernel(1, 1.0)
    g = IndicatorOfAnnulus((0.0,), 2.0)
    est = evaluate_harmonic(k, Ball([0.0], 1.0), g, [0.0], 20_000, SimConfig(epsilon=0.005, seed=6))
    assert abs(est.mean - 1 / 3) < 4 * est.std_error + 0.01


@settings(max_examples=8, deadline=None)
@given(r1=st.floats(0.2, 1.0), extra=st.floats(0.0, 1.0), seed=st.integers(0, 1000))
def test_harmonic_monotone_in_data(r1, extra, seed):
    k = isotropic_kernel(2, 1.0)
    small = IndicatorOfBall((2.0, 0.0), r1)
    large = IndicatorOfBall((2.0, 0.0), r1 + extra)
    cfg = SimConfig(epsilon=0.1, seed=seed)
    a = evaluate_harmonic(k, Ball([0.0, 0.0], 1.0), small, [0.0, 0.0], 300, cfg)
    b = evaluate_harmonic(k, Ball([0.0, 0.0], 1.0), large, [0.0, 0.0], 300, cfg)
    # common replicas make the comparison pathwise
    assert a.mean <= b.mean


def test_harmonic_samples_shape(iso2):
    s = harmonic_samples(iso2, Ball([0.0, 0.0], 1.0), ConstantData(1.0), [[0, 0], [0.5, 0]], 50, CFG)
    assert s.shape == (2, 50)


def test_harnack_report_nonnegative(iso2):
    g = IndicatorOfBall((0.6, 0.0), 0.15)
    rep = harnack_report(iso2, [0.0, 0.0], 0.1, g, 1000, CFG, n_probes=8)
    assert rep.tail_term == 0.0 and rep.c2 == 0.0
    assert not rep.flagged and rep.quotient >= 1.0
    assert rep.sup >= rep.inf > 0.0
    with pytest.raises(ValueError):
        harnack_report(iso2, [0.0, 0.0], 0.3, g, 10, CFG)


def test_harnack_report_fits_c2(iso2):
    g = SignedBump(Annulus([0, 0], 0.4, 0.5), Annulus([0, 0], 2.0, 4.0), 1.0, 1.0)
    rep = harnack_report(iso2, [0.0, 0.0], 0.1, g, 1000, CFG, n_probes=8, c1=1.0)
    assert rep.tail_term > 0.0
    assert rep.slack == pytest.approx(0.0, abs=1e-12) or rep.slack > 0.0


def test_signed_scan_needs_positive_f(iso2):
    g = SignedBump(Annulus([0, 0], 0.4, 0.5), Annulus([0, 0], 2.0, 4.0))
    with pytest.raises(ValueError):
        signed_harnack_scan(iso2, [0, 0], 0.1, g, [1e6], 1.3, 200, CFG, n_probes=4, n_domain=4)


def test_signed_scan_affine(iso2):
    g = SignedBump(Annulus([0, 0], 0.4, 0.5), Annulus([0, 0], 2.0, 4.0))
    scan = signed_harnack_scan(iso2, [0, 0], 0.1, g, [0.0, 0.5, 1.0], 1.3, 400, CFG, n_probes=4, n_domain=4)
    assert np.all(np.diff(scan.sup) <= 1e-12)
    assert np.all(scan.holds_with_tail)
    assert scan.tail[0] == 0.0


def test_restricted_harnack(narrow_cone):
    lam = 0.5 * lambda_max(governing_angle(narrow_cone))
    zero = restricted_harnack_check(narrow_cone, [0, 0], 1.0, lam, ConstantData(0.0), 50, CFG, n_probes=2)
    assert zero.vacuous and zero.quotient is None
    # data straight above: no cone direction reaches it
    off = restricted_harnack_check(narrow_cone, [0, 0], 1.0, lam, IndicatorOfBall((0.0, 3.0), 0.3), 200, CFG,
                                   n_probes=2)
    assert off.vacuous
    with pytest.raises(ValueError):
        restricted_harnack_check(narrow_cone, [0, 0], 1.0, 2 * lam, ConstantData(1.0), 10, CFG)


# -- Hoelder fit -----------------------------------------------------------------------


def test_holder_fit_type_checks():
    with pytest.raises(ValueError):
        HolderFit(np.array([0.1, 0.2, 0.3]), np.ones(3), np.ones(3), 0.5, 0.0, 0.0)


def test_holder_fit_preconditions(iso2):
    g = IndicatorOfBall((3.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        holder_fit(iso2, [0, 0], 1.0, g, [0.5, 0.25], 10, CFG)
    with pytest.raises(ValueError):
        holder_fit(iso2, [0, 0], 1.0, g, [0.6, 0.25, 0.1], 10, CFG)


def test_holder_fit_constant_is_degenerate(iso2):
    with pytest.raises(DegenerateDataError):
        holder_fit(iso2, [0, 0], 1.0, ConstantData(1.0), [0.5, 0.25, 0.125], 50, CFG, n_probes=4)


def test_holder_fit_positive_slope(iso2):
    g = IndicatorOfBall((101.0, 0.0), 100.0)
    fit = holder_fit(iso2, [0, 0], 1.0, g, [0.5, 0.25, 0.125], 2000, CFG, n_probes=8)
    assert fit.beta > 0.0
    assert np.all(np.diff(fit.oscillations) < 0.0)


# -- averaging -------------------------------------------------------------------------


def test_averaging_constant_function():
    rep = averaging_check(lambda s: np.ones_like(s), [0.0, 0.0], 0.5, [2.0, 0.0])
    assert rep.constant == pytest.approx(1.0 / math.pi, rel=1e-10)


def test_averaging_power_bounded():
    rep = averaging_check(lambda s: s**-3.0, [0.0, 0.0], 0.5, [1.01, 0.0])
    assert math.isfinite(rep.constant) and rep.constant > 1.0 / math.pi
    with pytest.raises(ValueError):
        averaging_check(lambda s: s, [0.0, 0.0], 0.5, [0.9, 0.0])
