import math

import numpy as np
import pytest

import flocklab as fl
from flocklab.dynamics import (
    FAST_PATH_MIN_STEPS,
    MAX_RECORDED_SAMPLES,
    _integrate_stepwise,
    _check_step_size,
)
from flocklab.programs import normalize_programs

from oracles import eig_oracle, matched_distance


def chain(N, rho, r=None, f=-1.0, g=-2.0):
    return fl.build_standard_example(
        fl.StandardExampleParams(N=N, rho=rho, r=rho if r is None else r, f=f, g=g)
    )


def test_companion_single_follower_fixture():
    A = fl.companion_matrix(chain(1, 0.5))
    np.testing.assert_allclose(A, [[0.0, 1.0], [-1.0, -2.0]])


def test_companion_block_layout():
    m = chain(4, 0.3, 0.6)
    A = fl.companion_matrix(m)
    Lff_rho, Lff_r, _, _ = fl.follower_reduction(m)
    assert A.shape == (8, 8)
    np.testing.assert_allclose(A[:4, :4], 0.0)
    np.testing.assert_allclose(A[:4, 4:], np.eye(4))
    np.testing.assert_allclose(A[4:, :4], m.f * Lff_rho)
    np.testing.assert_allclose(A[4:, 4:], m.g * Lff_r)


def test_follower_reduction_blocks():
    m = chain(3, 0.25)
    Lff_rho, Lff_r, Lfl_rho, Lfl_r = fl.follower_reduction(m)
    np.testing.assert_allclose(Lff_rho, m.L_rho[1:, 1:])
    np.testing.assert_allclose(Lfl_rho, m.L_rho[1:, :1])
    np.testing.assert_allclose(Lff_r, m.L_r[1:, 1:])
    np.testing.assert_allclose(Lfl_r, m.L_r[1:, :1])


@pytest.mark.parametrize("rho", [0.3, 0.5, 0.65])
def test_spectrum_closed_under_conjugation(rho):
    lam = fl.eigenvalues(fl.companion_matrix(chain(12, rho)))
    assert matched_distance(lam, lam.conj()) < 1e-8


def test_eigenvalues_match_charpoly_oracle():
    rng = np.random.default_rng(42)
    for _ in range(5):
        A = rng.standard_normal((6, 6))
        assert matched_distance(fl.eigenvalues(A), eig_oracle(A)) < 1e-8


def test_eigenvalues_rejects_nonsquare():
    with pytest.raises(fl.EigensolveError):
        fl.eigenvalues(np.zeros((2, 3)))


def test_spectral_summary_statistics():
    eigs = np.array([-2.0 + 1j, -2.0 - 1j, -0.5, -1e-8])
    rep = fl.spectral_summary(eigs, near_zero_threshold=1e-6)
    assert rep.spectral_abscissa == pytest.approx(-1e-8)
    assert rep.min_abs_real == pytest.approx(1e-8)
    assert rep.min_modulus == pytest.approx(1e-8)
    assert rep.near_zero_count == 1
    # output sorted by (real, imag) for stable CSV emission
    assert list(rep.eigenvalues) == sorted(eigs, key=lambda z: (z.real, z.imag))


def test_single_follower_step_response_closed_form():
    """f=-1, g=-2 gives a critically damped follower: z(t) = -v t e^{-t}."""
    traj = fl.step_response(chain(1, 0.5), 0.1, dt=0.01, horizon=30.0, record_every=1)
    expected = -0.1 * traj.times * np.exp(-traj.times)
    assert np.abs(traj.z[:, 1] - expected).max() < 1e-9
    assert traj.max_abs_zN == pytest.approx(0.1 / math.e, rel=1e-5)


def test_integrate_accepts_program_shorthand():
    m = chain(2, 0.5)
    init = fl.FlockState(t=0.0, z=np.zeros(3), zdot=np.zeros(3))
    a = fl.integrate(m, init, fl.ConstantVelocity(0.0, 0.2), dt=0.01, horizon=5.0)
    b = fl.integrate(m, init, {0: fl.ConstantVelocity(0.0, 0.2)}, dt=0.01, horizon=5.0)
    np.testing.assert_array_equal(a.z, b.z)
    # followers are dragged along by the moving leader
    assert a.z[-1, 1] > 0.5


def test_integrate_none_program_coasts_from_initial_state():
    m = chain(2, 0.5)
    init = fl.FlockState(t=0.0, z=np.ones(3), zdot=np.full(3, 0.3))
    traj = fl.integrate(m, init, None, dt=0.01, horizon=10.0, record_every=100,
                        stop_rule=None)
    # the whole flock starts on the invariant family and stays there
    expected = 1.0 + 0.3 * traj.times[:, None]
    np.testing.assert_allclose(traj.z, np.broadcast_to(expected, traj.z.shape),
                               atol=1e-10)


def test_blocked_and_stepwise_paths_agree():
    m = chain(6, 0.4)
    n = m.n_agents
    rng = np.random.default_rng(3)
    init = fl.FlockState(
        t=0.0,
        z=np.concatenate([[0.0], rng.standard_normal(n - 1) * 0.2]),
        zdot=np.zeros(n),
    )
    dt, horizon = 0.01, 400.0
    steps = int(horizon / dt)
    assert steps >= FAST_PATH_MIN_STEPS  # guarantees the fast path engages
    fast = fl.integrate(m, init, None, dt=dt, horizon=horizon, record_every=500,
                        stop_rule=None)
    programs = normalize_programs(m, None, init)
    slow = _integrate_stepwise(m, init, programs, fl.companion_matrix(m), dt,
                               steps, None, 500)
    np.testing.assert_array_equal(fast.times, slow.times)
    np.testing.assert_allclose(fast.z, slow.z, rtol=0, atol=1e-10)
    np.testing.assert_allclose(fast.zdot, slow.zdot, rtol=0, atol=1e-10)
    assert fast.max_abs_zN == pytest.approx(slow.max_abs_zN, rel=1e-10)


def test_default_thinning_caps_samples_but_not_maxima():
    m = chain(3, 0.45)
    init, programs = _step_setup(m, 0.1)
    dt, horizon = 0.01, 3000.0  # 300k steps -> record_every 3
    traj = fl.integrate(m, init, programs, dt=dt, horizon=horizon, stop_rule=None)
    assert len(traj.times) <= MAX_RECORDED_SAMPLES + 1
    dense = fl.integrate(m, init, programs, dt=dt, horizon=60.0, record_every=1,
                         stop_rule=None)
    # the early transient carries the peak; thinning must not lose it
    assert traj.max_abs_zN == pytest.approx(dense.max_abs_zN, rel=1e-12)
    assert traj.max_abs_zN >= np.abs(traj.z[:, -1]).max() - 1e-15


def _step_setup(m, v):
    z0 = np.zeros(m.n_agents)
    zd0 = np.zeros(m.n_agents)
    zd0[m.followers] = -v
    return fl.FlockState(t=0.0, z=z0, zdot=zd0), {
        k: fl.ConstantVelocity(0.0, 0.0) for k in m.leaders
    }


def test_settle_rule_stops_early():
    traj = fl.step_response(chain(1, 0.5), 0.1, dt=0.01, horizon=1e6)
    assert traj.stopped_at < 100.0
    assert traj.times[-1] == pytest.approx(traj.stopped_at)


def test_oversized_step_warns_then_blows_up():
    m = chain(20, 0.45)
    init, programs = _step_setup(m, 0.1)
    with pytest.warns(RuntimeWarning):
        with pytest.raises(fl.IntegrationBlowUpError) as err:
            with np.errstate(over="ignore", invalid="ignore"):
                fl.integrate(m, init, programs, dt=5.0, horizon=1e5, stop_rule=None)
    assert err.value.t > 0


def test_step_size_check_quiet_inside_margin():
    import warnings

    A = fl.companion_matrix(chain(10, 0.5))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        _check_step_size(A, 0.01)


def test_decay_rate_matches_spectral_abscissa():
    """Trailing log-linear fit of the state norm vs the slowest mode."""
    m = chain(6, 0.55)
    rep = fl.spectral_summary(fl.eigenvalues(fl.companion_matrix(m)))
    n = m.n_agents
    z0 = np.zeros(n)
    z0[1:] = 0.3 * np.cos(np.arange(1, n))
    zd0 = np.zeros(n)
    zd0[1:] = 0.1 * np.sin(np.arange(1, n) * 1.7)
    traj = fl.integrate(m, fl.FlockState(t=0.0, z=z0, zdot=zd0),
                        {0: fl.ConstantVelocity(0.0, 0.0)},
                        dt=0.01, horizon=600.0, record_every=10, stop_rule=None)
    norm = np.sqrt(np.sum(traj.z[:, 1:] ** 2, axis=1)
                   + np.sum(traj.zdot[:, 1:] ** 2, axis=1))
    half = len(traj.times) // 2
    slope = np.polyfit(traj.times[half:], np.log(norm[half:]), 1)[0]
    assert abs(slope - rep.spectral_abscissa) < 0.1 * abs(rep.spectral_abscissa)


def test_trajectory_state_accessor():
    traj = fl.step_response(chain(2, 0.5), 0.1, dt=0.01, horizon=2.0, record_every=10)
    s = traj.state(3)
    assert s.t == pytest.approx(traj.times[3])
    np.testing.assert_array_equal(s.z, traj.z[3])
    np.testing.assert_array_equal(s.zdot, traj.zdot[3])


def test_integrate_rejects_mismatched_state():
    m = chain(3, 0.5)
    bad = fl.FlockState(t=0.0, z=np.zeros(2), zdot=np.zeros(2))
    with pytest.raises(ValueError):
        fl.integrate(m, bad, None, dt=0.01, horizon=1.0)
