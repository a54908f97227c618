import numpy as np
import pytest

import flocklab as fl


def chain(N, rho, r=None, f=-1.0, g=-2.0):
    return fl.build_standard_example(
        fl.StandardExampleParams(N=N, rho=rho, r=rho if r is None else r, f=f, g=g)
    )


def closed_form_single(omega, f=-1.0, g=-2.0):
    s = f + 1j * omega * g
    return s / (s + omega * omega)


def test_single_follower_matches_closed_form():
    m = chain(1, 0.5)
    for omega in np.logspace(-3, 2, 40):
        a = fl.response_at(m, omega)
        assert a[0] == 1.0
        assert abs(a[1] - closed_form_single(omega)) < 1e-12


def test_low_frequency_amplitudes_approach_one():
    m = chain(20, 0.35, 0.6)
    a = fl.response_at(m, 1e-4)
    assert np.abs(a - 1.0).max() < 1e-3


def test_rejects_nonpositive_frequency():
    m = chain(2, 0.5)
    with pytest.raises(ValueError):
        fl.response_at(m, 0.0)
    with pytest.raises(ValueError):
        fl.response_at(m, -1.0)


def test_leaders_pinned_at_unity():
    m = fl.build_custom(
        weights_rho={1: {0: 1.0, 3: 1.0}, 2: {1: 1.0, 3: 0.5}},
        weights_r={1: {0: 1.0}, 2: {3: 1.0}},
        leaders={0, 3},
        f=-1.0,
        g=-2.0,
    )
    a = fl.response_at(m, 0.7)
    assert a[0] == 1.0 and a[3] == 1.0


def test_sweep_table_layout():
    m = chain(4, 0.45)
    grid = np.logspace(-2, 1, 25)
    table = fl.sweep(m, grid)
    assert table.amplitudes.shape == (25, 5)
    np.testing.assert_array_equal(table.omegas, grid)
    np.testing.assert_allclose(table.gains, np.abs(table.amplitudes))
    assert table.errors == {}


def undamped_chain():
    # no velocity feedback at all: response is singular where omega^2
    # hits an eigenvalue of the position Laplacian
    return fl.build_custom(
        weights_rho={1: {0: 1.0}}, weights_r={}, leaders={0}, f=-1.0, g=-2.0
    )


def test_singular_frequency_raises():
    with pytest.raises(fl.ResponseSingularError):
        fl.response_at(undamped_chain(), 1.0)


def test_sweep_isolates_singular_points():
    grid = np.array([0.5, 1.0, 2.0])
    table = fl.sweep(undamped_chain(), grid)
    assert list(table.errors) == [1]
    assert np.isnan(table.amplitudes[1]).all()
    assert np.isfinite(table.amplitudes[[0, 2]]).all()


def test_peak_gain_refinement_never_loses_to_grid():
    m = chain(30, 0.5)
    grid = fl.default_omega_grid(points=300)
    w0, g0 = fl.peak_gain(m, grid=grid, refine_iters=0)
    w1, g1 = fl.peak_gain(m, grid=grid, refine_iters=60)
    assert g1 >= g0
    # refine_iters=0 is the exact grid argmax
    tail = np.array([abs(fl.response_at(m, w)[-1]) for w in grid])
    assert g0 == pytest.approx(tail.max())
    assert w0 == pytest.approx(grid[np.argmax(tail)])


def test_time_domain_run_reproduces_linear_solve():
    """Sinusoidal forcing of a short chain lands on |a_N| and its phase."""
    m = chain(3, 0.5)
    omega = 0.8
    aN = fl.response_at(m, omega)[-1]
    T = 2 * np.pi / omega
    n = m.n_agents
    traj = fl.integrate(
        m,
        fl.FlockState(t=0.0, z=np.zeros(n), zdot=np.zeros(n)),
        {0: fl.Sinusoid(amplitude=1.0, omega=omega)},
        dt=0.005,
        horizon=40 * T,
        record_every=1,
        stop_rule=None,
    )
    sel = traj.times >= 30 * T
    ts, zs = traj.times[sel], traj.z[sel, -1]
    basis = np.column_stack([np.sin(omega * ts), np.cos(omega * ts)])
    coef, *_ = np.linalg.lstsq(basis, zs, rcond=None)
    amp = np.hypot(*coef)
    phase = np.arctan2(coef[1], coef[0])
    assert amp == pytest.approx(abs(aN), rel=1e-2)
    dphi = (phase - np.angle(aN) + np.pi) % (2 * np.pi) - np.pi
    assert abs(dphi) < 1e-2
