import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisojump.geometry import (
    Annulus,
    Ball,
    Cone,
    InfeasibleChainError,
    NoConeError,
    ball_points,
    build_chain,
    chain_stress,
    chordal_from_half_angle,
    governing_angle,
    half_angle_from_chordal,
    lambda_max,
    lambda_restricted,
    separation_cosine,
    sphere_points,
    verify_chain,
)
from anisojump.geometry import regions_disjoint
from anisojump.kernel import cone_kernel


def test_chordal_half_angle_roundtrip():
    for theta in (0.05, 0.4, 1.0, math.pi / 2):
        rho = chordal_from_half_angle(theta)
        assert rho**2 == pytest.approx(2 * (1 - math.cos(theta)), rel=1e-14)
        assert half_angle_from_chordal(rho) == pytest.approx(theta, rel=1e-12)
    with pytest.raises(ValueError):
        half_angle_from_chordal(0.0)


def test_lambda_bounds():
    assert lambda_max(math.pi / 2) == 0.125
    assert lambda_restricted(math.pi / 6) == pytest.approx(1 / 32)
    with pytest.raises(ValueError):
        lambda_max(2.0)


def test_ball_and_annulus():
    b = Ball([0.0, 0.0], 2.0)
    assert b.volume() == pytest.approx(4 * math.pi)
    assert b.contains([1.0, 1.0]) and not b.contains([2.0, 0.0])
    a = Annulus([0.0, 0.0], 1.0, 2.0)
    assert a.volume() == pytest.approx(3 * math.pi)
    with pytest.raises(ValueError):
        Annulus([0.0, 0.0], 2.0, 1.0)
    with pytest.raises(ValueError):
        Ball([0.0], -1.0)


def test_regions_disjoint():
    assert regions_disjoint(Ball([0, 0], 1), Ball([3, 0], 1))
    assert not regions_disjoint(Ball([0, 0], 1), Ball([1.5, 0], 1))
    assert regions_disjoint(Ball([0, 0], 1), Annulus([0, 0], 2, 3))
    assert not regions_disjoint(Ball([0, 0], 2.5), Annulus([0, 0], 2, 3))


vec2 = st.tuples(st.floats(-10, 10), st.floats(-10, 10))


@settings(max_examples=200, deadline=None)
@given(p=vec2, phi=st.floats(0, 2 * math.pi), cos=st.floats(0.0, 0.995))
def test_signed_distance_agrees_with_membership(p, phi, cos):
    axis = np.array([math.cos(phi), math.sin(phi)])
    cone = Cone(axis, chordal_from_half_angle(math.acos(cos)))
    p = np.array(p)
    if np.linalg.norm(p) < 1e-6:
        return
    sd = float(cone.signed_distance(p)[0])
    if abs(sd) > 1e-9:
        assert (sd > 0) == bool(cone.contains(p))


@settings(max_examples=100, deadline=None)
@given(p=vec2, rad=st.floats(0.0, 3.0), cos=st.floats(0.1, 0.99))
def test_ball_margin_matches_boundary_sampling(p, rad, cos):
    cone = Cone(np.array([1.0, 0.0]), chordal_from_half_angle(math.acos(cos)))
    p = np.array(p)
    margin = cone.ball_margin(p, rad)
    if margin > 1e-9:
        # every sampled boundary point lies inside the cone
        pts = p + rad * sphere_points(720, 2)
        assert np.all(cone.contains(pts))


def test_separation_cosine():
    assert separation_cosine([1, 1], [0, 1], [1, 0]) == 1.0
    assert separation_cosine([0, 1], [0, 0], [1, 0]) == 0.0
    with pytest.raises(ValueError):
        separation_cosine([0, 0], [0, 0], [1, 0])


@pytest.mark.parametrize("dim", [2, 3])
def test_ball_points_inside(dim):
    pts = ball_points(np.ones(dim), 0.5, 200)
    assert pts.shape == (200, dim)
    assert np.array_equal(pts[0], np.ones(dim))
    assert np.all(np.linalg.norm(pts - 1.0, axis=1) < 0.5)


def test_governing_angle_is_smallest(two_cap):
    k = cone_kernel([(1, 0), (0, 1)], 0.9)
    assert governing_angle(k) == pytest.approx(math.acos(0.9))


def test_build_chain_example(narrow_cone):
    cfg = build_chain([0.0, 0.0], 1.0, narrow_cone, [0.0, 0.0], [5.0, 0.2])
    assert cfg.margins.ok
    ver = verify_chain(cfg)
    assert ver.ok
    for closed, sampled in zip(cfg.margins.as_tuple(), ver.as_tuple()):
        assert sampled == pytest.approx(closed, abs=1e-3)


def test_build_chain_no_cone(narrow_cone):
    with pytest.raises(NoConeError):
        build_chain([0.0, 0.0], 1.0, narrow_cone, [0.0, 0.0], [0.0, 5.0])


def test_build_chain_preconditions(narrow_cone):
    with pytest.raises(ValueError):
        build_chain([0.0, 0.0], 1.0, narrow_cone, [0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        build_chain([0.0, 0.0], 1.0, narrow_cone, [0.5, 0.0], [5.0, 0.0])


def test_stress_sample_all_verified():
    results = list(chain_stress(100, seed=7))
    assert all(err is None and m.ok for _, _, m, err in results)


def test_inflated_lambda_infeasible():
    found = False
    for _, cfg, m, err in chain_stress(20, seed=3, lam_factor=2.0):
        found |= cfg is None or not m.ok
    assert found


def test_infeasible_error_carries_margins():
    k = cone_kernel([(1.0, 0.0)], 0.99)
    lam = 2.0 * lambda_max(governing_angle(k))
    with pytest.raises(InfeasibleChainError) as info:
        build_chain([0.0, 0.0], 1.0, k, [0.0, 0.0], [5.0, 0.0], lam=lam)
    assert info.value.margins.worst < 0
