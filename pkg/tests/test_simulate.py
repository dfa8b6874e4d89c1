import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from anisojump.geometry import Annulus, Ball
from anisojump.kernel import eval_n, isotropic_kernel
from anisojump.simulate import (
    FICTITIOUS,
    RNGStream,
    SimConfig,
    envelope_rate,
    hitting_before_exit,
    levy_system_paths,
    sample_jump,
    sample_jumps,
    simulate_exits,
    simulate_until_exit,
    trace_paths,
)


def test_sim_config_checks():
    for bad in ({"epsilon": 0.0}, {"epsilon": 1.0}, {"max_events": 0}, {"time_horizon": -1.0}, {"seed": -1}):
        with pytest.raises(ValueError):
            SimConfig(**bad)


def test_stream_reproducible_and_distinct():
    a = RNGStream(5, 3).uniforms(1000)
    b = RNGStream(5, 3).uniforms(1000)
    c = RNGStream(5, 4).uniforms(1000)
    d = RNGStream(6, 3).uniforms(1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)
    assert np.all((a > 0.0) & (a < 1.0))


def test_stream_continues_counter():
    s = RNGStream(1, 0)
    first = s.uniforms(10)
    second = s.uniforms(10)
    assert np.array_equal(np.concatenate([first, second]), RNGStream(1, 0).uniforms(20))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), replica=st.integers(0, 2**32))
def test_stream_uniformity(seed, replica):
    u = RNGStream(seed, replica).uniforms(4000)
    assert stats.kstest(u, "uniform").pvalue > 1e-4


def test_envelope_rate_closed_form(iso2, two_cap):
    assert envelope_rate(iso2, 0.1) == pytest.approx(2 * math.pi / 0.1, rel=1e-12)
    arcs = 4 * math.acos(0.9)
    assert envelope_rate(two_cap, 0.5) == pytest.approx(3.5 * arcs / 0.5, rel=1e-12)
    with pytest.raises(ValueError):
        envelope_rate(iso2, 0.0)


def test_radius_law_isotropic(iso2):
    h, acc = sample_jumps(iso2, [0.0, 0.0], 0.05, 50_000, seed=11)
    assert acc.all()
    t = np.linalg.norm(h, axis=1)
    # P(|h| > s) = eps / s for alpha = 1, d = 2
    assert stats.kstest(t, lambda s: 1.0 - 0.05 / np.maximum(s, 0.05)).pvalue > 1e-3
    phi = np.arctan2(h[:, 1], h[:, 0])
    assert stats.kstest(phi, stats.uniform(-math.pi, 2 * math.pi).cdf).pvalue > 1e-3


def test_cone_directions_stay_in_caps(narrow_cone):
    h, acc = sample_jumps(narrow_cone, [0.0, 0.0], 0.1, 5000, seed=2)
    cos = np.abs(h[:, 0]) / np.linalg.norm(h, axis=1)
    assert np.all(cos >= 0.99 - 1e-12)


def test_acceptance_rate_matches_angular_integral(modulated):
    x = np.array([0.3, -0.2])
    m = 400_000
    phi = 2 * math.pi * (np.arange(m) + 0.5) / m
    dirs = np.column_stack([np.cos(phi), np.sin(phi)])
    ang = float(np.mean(eval_n(modulated, x, dirs))) * 2 * math.pi
    expected = ang / float(np.sum(modulated.cones.weights()))
    _, acc = sample_jumps(modulated, x, 0.05, 100_000, seed=4)
    se = math.sqrt(expected * (1 - expected) / acc.size)
    assert abs(acc.mean() - expected) < 4 * se


def test_single_proposal(modulated):
    s = RNGStream(0, 0)
    out = [sample_jump(modulated, [0.0, 0.0], 0.1, s) for _ in range(200)]
    assert any(o is FICTITIOUS for o in out)
    assert any(o is not FICTITIOUS for o in out)
    assert not FICTITIOUS


def test_exit_time_one_dim_oracle():
    # E^x tau = sqrt(r^2 - x^2) / pi for the 1-d kernel |h|^-2
    k = isotropic_kernel(1, 1.0)
    batch = simulate_exits(k, [0.0], Ball([0.0], 1.0), SimConfig(epsilon=0.01, seed=3), 20_000)
    est = batch.mean_tau()
    assert est.censored_fraction == 0.0
    assert est.mean == pytest.approx(1 / math.pi, rel=0.03)


def test_exits_land_outside(iso2):
    batch = simulate_exits(iso2, [0.1, 0.0], Ball([0.0, 0.0], 0.5), SimConfig(epsilon=0.02, seed=1), 500)
    assert np.all(np.linalg.norm(batch.x_post, axis=1) >= 0.5)
    assert np.all(np.linalg.norm(batch.x_pre, axis=1) < 0.5)
    assert np.all(batch.tau > 0.0)


def test_thread_count_does_not_matter(two_cap):
    cfg = SimConfig(epsilon=0.05, seed=9)
    a = simulate_exits(two_cap, [0.0, 0.0], Ball([0.0, 0.0], 1.0), cfg, 700, threads=1)
    b = simulate_exits(two_cap, [0.0, 0.0], Ball([0.0, 0.0], 1.0), cfg, 700, threads=3)
    assert np.array_equal(a.tau, b.tau) and np.array_equal(a.x_post, b.x_post)


def test_replica_offsets_compose(iso2):
    cfg = SimConfig(epsilon=0.05, seed=2)
    whole = simulate_exits(iso2, [0.0, 0.0], Ball([0.0, 0.0], 1.0), cfg, 300)
    tail = simulate_exits(iso2, [0.0, 0.0], Ball([0.0, 0.0], 1.0), cfg, 100, first_replica=200)
    assert np.array_equal(whole.tau[200:], tail.tau)
    one = simulate_until_exit(iso2, [0.0, 0.0], Ball([0.0, 0.0], 1.0), cfg, replica=57)
    assert one.tau == whole.tau[57]


def test_censoring(iso2):
    batch = simulate_exits(iso2, [0.0, 0.0], Ball([0.0, 0.0], 1.0), SimConfig(epsilon=0.001, max_events=2), 50)
    assert batch.censored.any()
    with pytest.raises(RuntimeError):
        simulate_exits(iso2, [0.0, 0.0], Ball([0.0, 0.0], 10.0), SimConfig(epsilon=0.001, max_events=1), 20).mean_tau()


def test_start_outside_exits_immediately(iso2):
    s = simulate_until_exit(iso2, [2.0, 0.0], Ball([0.0, 0.0], 1.0), SimConfig())
    assert s.tau == 0.0


def test_hitting_marks_landings(iso2):
    target = Ball([0.5, 0.0], 0.2)
    batch = hitting_before_exit(iso2, [0.0, 0.0], [target], Ball([0.0, 0.0], 1.0), SimConfig(epsilon=0.02, seed=5), 2000)
    assert 0.0 < batch.hit.mean() < 1.0
    assert np.all(target.contains(batch.x_post[batch.hit]))
    out = ~batch.hit & ~batch.censored
    assert np.all(np.linalg.norm(batch.x_post[out], axis=1) >= 1.0)


def test_levy_system_preconditions(iso2):
    with pytest.raises(ValueError):
        levy_system_paths(iso2, [0, 0], Ball([0, 0], 1.0), Ball([0.5, 0], 1.0), 10, SimConfig())
    with pytest.raises(TypeError):
        levy_system_paths(iso2, [0, 0], [0, 0], Ball([5, 0], 1.0), 10, SimConfig())


def test_levy_system_sides_agree(iso2):
    a, b = Ball([0.0, 0.0], 0.5), Annulus([0.0, 0.0], 2.0, 3.0)
    count, comp = levy_system_paths(iso2, [0.0, 0.0], a, b, 20_000, SimConfig(epsilon=0.2, seed=8), horizon=1.0)
    assert abs(count.mean - comp.mean) <= 3 * (count.std_error + comp.std_error)
    assert comp.mean > 0


def test_trace_paths(iso2):
    ball = Ball([0.0, 0.0], 0.5)
    rows = trace_paths(iso2, [0.0, 0.0], ball, SimConfig(epsilon=0.05, seed=4), [0, 1])
    for rep in (0, 1):
        mine = [r for r in rows if r[0] == rep]
        times = [r[1] for r in mine]
        assert times == sorted(times)
        last = mine[-1]
        assert not ball.contains(np.array(last[4:6]))
        assert last[6] == 0
    batch = simulate_exits(iso2, [0.0, 0.0], ball, SimConfig(epsilon=0.05, seed=4), 2)
    assert [r for r in rows if r[0] == 1][-1][1] == batch.tau[1]
