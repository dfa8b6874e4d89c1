import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from anisojump.kernel import (
    Cap,
    ConeSystem,
    Constant,
    ExponentialTail,
    GridSpec,
    JumpKernel,
    LogPower,
    Patchwise,
    PowerTail,
    Product,
    RadialProfile,
    Sinusoidal,
    TruncatedTail,
    UnitVector,
    angular_rule,
    cap_area,
    cone_kernel,
    eval_n,
    isotropic_kernel,
    nondegeneracy_matrix,
    tail_mass,
    validate_kernel,
)

coord = st.floats(-5.0, 5.0, allow_nan=False)
radius = st.floats(1e-3, 50.0)
angle = st.floats(0.0, 2.0 * math.pi)


def _h(t, phi):
    return np.array([t * math.cos(phi), t * math.sin(phi)])


# -- types ------------------------------------------------------------------


def test_unit_vector_rejects_non_unit():
    with pytest.raises(ValueError):
        UnitVector([1.0, 1.0])
    assert UnitVector.normalized([3.0, 4.0]).components == pytest.approx((0.6, 0.8), abs=1e-15)


def test_empty_cap_list_rejected():
    with pytest.raises(ValueError):
        ConeSystem((), 1.0, ())


def test_upper_below_delta_rejected():
    cap = Cap(UnitVector([1.0, 0.0]), 0.5)
    with pytest.raises(ValueError):
        ConeSystem((cap,), 2.0, (1.0,))


def test_chordal_radius_range():
    with pytest.raises(ValueError):
        Cap(UnitVector([1.0, 0.0]), 2.5)


def test_cap_area_circle():
    # two arcs of half-width theta each
    for c in (0.0, 0.5, 0.99):
        assert cap_area(2, c) == pytest.approx(4.0 * math.acos(c), rel=1e-13)
    assert cap_area(3, 0.0) == pytest.approx(4.0 * math.pi, rel=1e-13)


def test_patchwise_values_in_unit_interval():
    with pytest.raises(ValueError):
        Patchwise(np.array([[0.5, 1.5]]), 1.0)


# -- eval_n -----------------------------------------------------------------


def test_isotropic_unit_displacement(iso2):
    assert eval_n(iso2, [0.3, -2.0], [1.0, 0.0]) == 1.0


def test_cone_kernel_zero_off_cone(narrow_cone):
    assert eval_n(narrow_cone, [0.0, 0.0], [0.0, 1.0]) == 0.0


def test_cone_kernel_on_cone_equals_power(narrow_cone):
    for t in (0.01, 0.5, 1.0, 7.0):
        h = np.array([t, 0.05 * t])
        assert eval_n(narrow_cone, [1.0, 2.0], h) == np.linalg.norm(h) ** -3


def test_eval_n_at_zero_raises(iso2):
    with pytest.raises(ValueError):
        eval_n(iso2, [0.0, 0.0], [0.0, 0.0])


@settings(max_examples=200, deadline=None)
@given(x0=coord, x1=coord, t=radius, phi=angle)
def test_symmetry_bit_exact(modulated, x0, x1, t, phi):
    x = np.array([x0, x1])
    h = _h(t, phi)
    assert eval_n(modulated, x, h) == eval_n(modulated, x, -h)


@settings(max_examples=200, deadline=None)
@given(x0=coord, x1=coord, t=radius, phi=angle)
def test_sandwich_exact(modulated, x0, x1, t, phi):
    h = _h(t, phi)
    val = eval_n(modulated, np.array([x0, x1]), h)
    k1, k2 = modulated.angular_bounds(h / np.linalg.norm(h))
    j = float(modulated.j(np.linalg.norm(h)))
    assert k1[0] * j <= val <= k2[0] * j


@settings(max_examples=200, deadline=None)
@given(x0=coord, x1=coord, t=radius, phi=angle)
def test_cone_lower_bound(modulated, x0, x1, t, phi):
    h = _h(t, phi)
    xi = h / np.linalg.norm(h)
    val = eval_n(modulated, np.array([x0, x1]), h)
    for cap in modulated.cones.caps:
        if abs(xi @ np.asarray(cap.axis)) >= cap.cosine:
            assert val >= modulated.cones.delta * float(modulated.j(np.linalg.norm(h))) * (1 - 1e-15)


def test_patchwise_symmetry():
    k = cone_kernel([(1.0, 0.0)], 0.5, upper=(3.0,), modulator=Patchwise(np.array([[0.0, 1.0], [0.25, 0.75]]), 0.5))
    rng = np.random.default_rng(1)
    xs = rng.uniform(-3, 3, (500, 2))
    hs = rng.standard_normal((500, 2))
    assert np.array_equal(eval_n(k, xs, hs), eval_n(k, xs, -hs))


# -- slowly varying factors and radial profile --------------------------------


def test_product_reduces():
    assert Product((Constant(2.0), LogPower(1.0), LogPower(0.5))).reduce() == (2.0, 1.5)


def test_radial_profile_rejects_alpha():
    with pytest.raises(ValueError):
        RadialProfile(2.0)


def test_j_inside_unit_interval():
    prof = RadialProfile(0.5, LogPower(2.0))
    t = np.array([1e-4, 0.3, 1.0])
    assert np.allclose(prof.j(t, 3), np.log(np.e / t) ** 2 * t ** -3.5, rtol=1e-14)


def test_truncated_tail_vanishes_beyond_cutoff():
    prof = RadialProfile(1.0, tail=TruncatedTail(2.0))
    assert prof.j(2.5, 2) == 0.0
    assert prof.j(1.5, 2) == pytest.approx(1.5**-3)


# -- tail_mass ----------------------------------------------------------------


def test_tail_mass_closed_forms():
    prof = RadialProfile(1.0)
    # 2 pi int_R^inf t^-2 dt
    assert tail_mass(prof, 2, 2.0) == pytest.approx(math.pi, rel=1e-10)
    assert tail_mass(prof, 2, 1.0) == pytest.approx(2.0 * math.pi, rel=1e-10)
    assert tail_mass(RadialProfile(1.0, tail=TruncatedTail(3.0)), 2, 4.0) == 0.0


def test_tail_mass_below_one():
    prof = RadialProfile(0.7)
    # surf(S^2) R^-alpha / alpha for the pure power law in d = 3
    assert tail_mass(prof, 3, 0.2) == pytest.approx(4 * math.pi * 0.2**-0.7 / 0.7, rel=1e-10)


def test_tail_mass_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        tail_mass(RadialProfile(1.0), 2, 0.0)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.05, 20.0), b=st.floats(0.05, 20.0), tail=st.sampled_from(["power", "exp"]))
def test_tail_mass_strictly_decreasing(a, b, tail):
    if abs(a - b) < 1e-6:
        return
    prof = RadialProfile(1.2, LogPower(1.0), PowerTail() if tail == "power" else ExponentialTail(0.5))
    lo, hi = sorted((a, b))
    assert tail_mass(prof, 2, lo) > tail_mass(prof, 2, hi)


def test_radial_integral_matches_quad():
    k = isotropic_kernel(2, 1.3, LogPower(1.5), ExponentialTail(2.0))
    for a, b, p in [(0.0, 0.5, 2.0), (0.01, 1.0, 0.0), (0.5, 3.0, 0.0), (1.0, np.inf, 0.0)]:
        ref, _ = integrate.quad(lambda t: t ** (1 + p) * float(k.j(t)), a, b, limit=400, epsabs=0, epsrel=1e-12,
                                points=[1.0] if a < 1.0 < b else None)
        assert k.radial_integral(a, b, p) == pytest.approx(ref, rel=1e-9)


# -- angular rules ------------------------------------------------------------


@pytest.mark.parametrize("dim", [2, 3])
def test_angular_rule_total_mass(dim):
    axes = [np.eye(dim)[0], np.eye(dim)[1] + np.eye(dim)[0]]
    k = cone_kernel(axes, 0.8, dim=dim)
    rule = angular_rule(k, 48)
    # overlapping caps: the union measure, computed by seeded Monte Carlo
    g = np.random.default_rng(0).standard_normal((400000, dim))
    g /= np.linalg.norm(g, axis=1)[:, None]
    inside = np.zeros(len(g), dtype=bool)
    for a in axes:
        inside |= np.abs(g @ (a / np.linalg.norm(a))) >= 0.8
    area = 2 * math.pi if dim == 2 else 4 * math.pi
    assert rule.weights.sum() == pytest.approx(area * inside.mean(), rel=5e-3)


# -- nondegeneracy matrix ------------------------------------------------------


@pytest.mark.parametrize("rho", [0.1, 0.5, 0.9])
def test_nondegeneracy_isotropic_is_pi_identity(iso2, rho):
    mat, eig = nondegeneracy_matrix(iso2, [0.2, 0.1], rho, normalizer=lambda r: 1.0 / r)
    assert np.allclose(mat, math.pi * np.eye(2), atol=1e-6)


def test_nondegeneracy_cone_oracle(narrow_cone):
    # independent route: angular integral of xi xi^T over both arcs by quad
    th = math.acos(0.99)
    a11 = 2 * integrate.quad(lambda p: math.cos(p) ** 2, -th, th)[0]
    a22 = 2 * integrate.quad(lambda p: math.sin(p) ** 2, -th, th)[0]
    mat, eig = nondegeneracy_matrix(narrow_cone, [0.0, 0.0], 0.3, normalizer=lambda r: 1.0 / r)
    assert mat[0, 0] == pytest.approx(a11, rel=1e-10)
    assert mat[1, 1] == pytest.approx(a22, rel=1e-9)
    assert abs(mat[0, 1]) < 1e-14
    assert mat[0, 0] > mat[1, 1] > 0


def test_nondegeneracy_rejects_rho(iso2):
    with pytest.raises(ValueError):
        nondegeneracy_matrix(iso2, [0, 0], 0.0)
    with pytest.raises(ValueError):
        nondegeneracy_matrix(iso2, [0, 0], 1.0)


@settings(max_examples=30, deadline=None)
@given(x0=coord, x1=coord, rho=st.floats(0.01, 0.99), xi=st.tuples(coord, coord))
def test_nondegeneracy_symmetric_positive(modulated, x0, x1, rho, xi):
    mat, eig = nondegeneracy_matrix(modulated, [x0, x1], rho)
    assert np.array_equal(mat, mat.T)
    v = np.array(xi)
    if np.linalg.norm(v) > 1e-3:
        assert v @ mat @ v > 0
    assert eig[0] > 0


# -- validation -----------------------------------------------------------------


def test_validate_example_one(iso2):
    report = validate_kernel(iso2)
    assert report.passed, report.failed()


def test_validate_sigma_above_alpha_fails_j3():
    report = validate_kernel(isotropic_kernel(2, 1.0, sigma=1.5))
    assert not report["J3"].passed
    assert report["J2"].passed


def test_validate_j2_detects_increase():
    bumped = isotropic_kernel(2, 1.0, tail=PowerTail(3.0))
    assert not validate_kernel(bumped)["J2"].passed
    tolerant = isotropic_kernel(2, 1.0, tail=PowerTail(3.0), kappa=3.5)
    assert validate_kernel(tolerant)["J2"].passed


def test_validate_truncated_tail(iso2):
    k = isotropic_kernel(2, 1.0, tail=TruncatedTail(2.0))
    report = validate_kernel(k, GridSpec(n_points=500))
    assert report["J2"].passed and report["J3"].passed


def test_validate_modulated(modulated):
    assert validate_kernel(modulated, GridSpec(n_points=1000)).passed


def test_kernel_dimension_mismatch():
    cones = ConeSystem((Cap(UnitVector([1.0, 0.0]), 0.5),), 1.0, (2.0,))
    with pytest.raises(ValueError):
        JumpKernel(cones, RadialProfile(1.0), Sinusoidal((1.0, 2.0, 3.0)))
