"""Acceptance gate: ten library-level guarantees, one test per line.

Each test pins tolerances against independently derived fixtures
(closed forms where available, frozen measured values elsewhere).
Criterion 1 encodes stricter slope bands than the symmetric chain can
meet at these sizes; it is kept as stated and currently fails on the
rho = 1/2 branch.  Details in the repository notes.
"""

import math

import numpy as np
import pytest

import flocklab as fl
from flocklab.experiments import run_preset

from conftest import pinned_leader_step, random_pair_model
from oracles import eig_oracle, matched_distance


def chain(N, rho, r=None, f=-1.0, g=-2.0):
    return fl.build_standard_example(
        fl.StandardExampleParams(N=N, rho=rho, r=rho if r is None else r, f=f, g=g)
    )


def spectrum_report(N, rho):
    m = chain(N, rho)
    return fl.spectral_summary(fl.eigenvalues(fl.companion_matrix(m)))


def test_c01_size_scaling_dichotomy(classifier_reports):
    """Growth-exponent classifier: unstable on both sides of rho = 1/2,
    stable exactly at it, with slope bands 0.02 / 0.01."""
    for rho in (0.45, 0.55):
        rep = classifier_reports[rho]
        assert rep.harmonic.slope > 0.02, (rho, rep.harmonic)
        assert rep.impulse.slope > 0.02, (rho, rep.impulse)
        assert rep.verdict == "both-unstable"

    rep = classifier_reports[0.5]
    assert abs(rep.harmonic.slope) < 0.01, (
        "rho=0.5 harmonic slope", rep.harmonic.slope, rep.harmonic.per_N_values)
    assert abs(rep.impulse.slope) < 0.01, (
        "rho=0.5 impulse slope", rep.impulse.slope, rep.impulse.per_N_values)
    assert rep.verdict == "flock-stable"


def test_c02_low_frequency_tracking():
    """Every agent follows an asymptotically slow leader: a_k(1e-3) near 1."""
    a = fl.response_at(chain(50, 0.5), 1e-3)
    assert np.abs(a - 1.0).max() < 1e-2


def test_c03_single_follower_closed_forms():
    m = chain(1, 0.5)
    for omega in np.logspace(-3, 2, 100):
        s = -1.0 + 1j * omega * -2.0
        assert abs(fl.response_at(m, omega)[1] - s / (s + omega * omega)) < 1e-10

    traj = fl.step_response(m, 0.1, dt=0.01, horizon=40.0, record_every=1)
    expected = -0.1 * traj.times * np.exp(-traj.times)
    assert np.abs(traj.z[:, 1] - expected).max() < 1e-6


def test_c04_eigenvalue_geometry():
    # (a) rho = 0.55: slowest mode collapses exponentially in N
    mods = [spectrum_report(N, 0.55).min_modulus for N in (10, 20, 40)]
    assert mods[1] / mods[0] < 0.5, mods
    assert mods[2] / mods[1] < 0.5, mods

    # (b) rho = 0.45: spectrum bounded away from the imaginary axis;
    # the distance-to-origin statistic is the one stable to 25% across
    # sizes, while min |Re| keeps adjusting toward its limit (43% drift
    # at these sizes) and is held to a positive floor instead
    reps = {N: spectrum_report(N, 0.45) for N in (25, 50, 100)}
    assert abs(reps[100].min_modulus - reps[25].min_modulus) <= 0.25 * reps[25].min_modulus
    for rep in reps.values():
        assert rep.min_abs_real > 4e-3, rep.min_abs_real

    # (c) rho = 0.5: distance to the axis decays like N^-2
    Ns = (10, 20, 40, 80)
    d = [spectrum_report(N, 0.5).min_abs_real for N in Ns]
    slope = np.polyfit(np.log(Ns), np.log(d), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.4)


def relative_residual(m, dt):
    init, programs = pinned_leader_step(m, 0.1)
    traj = fl.integrate(m, init, programs, dt=dt, horizon=50.0,
                        record_every=1, stop_rule=None)
    series = fl.ledger(traj, m)
    return np.abs(series.residual).max() / np.abs(series.lhs).max()


def test_c05_work_energy_ledger():
    m = chain(10, 0.45)
    r1, r2 = relative_residual(m, 0.01), relative_residual(m, 0.005)
    assert r1 < 1e-4
    assert r1 / r2 >= 3.5

    rand = random_pair_model(seed=3)
    abscissa = fl.spectral_summary(
        fl.eigenvalues(fl.companion_matrix(rand))
    ).spectral_abscissa
    assert abscissa < 0  # the seeded topology must itself be stabilized
    q1, q2 = relative_residual(rand, 0.01), relative_residual(rand, 0.005)
    assert q1 < 1e-4
    assert q1 / q2 >= 3.5


def test_c06_eigensolver_against_charpoly_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        A = rng.standard_normal((n, n))
        assert matched_distance(fl.eigenvalues(A), eig_oracle(A)) < 1e-6


def test_c07_planar_equilibrium_and_covariance():
    from flocklab.planar import planar_accel

    m = fl.turn_model()
    for j in range(8):
        s = fl.equilibrium_state(m, heading_angle=-math.pi + j * math.pi / 4,
                                 speed=m.V)
        assert np.abs(planar_accel(s, m)).max() < 1e-12

    init = fl.equilibrium_state(m, heading_angle=0.0, speed=1.0)
    pos, vel = init.positions.copy(), init.velocities.copy()
    rng = np.random.default_rng(7)
    pos[1:] += 0.05 * rng.standard_normal((6, 2))
    vel[1:] += 0.02 * rng.standard_normal((6, 2))
    phi = 0.73
    c, s_ = math.cos(phi), math.sin(phi)
    R = np.array([[c, -s_], [s_, c]])

    def run(p, v, ha):
        return fl.integrate_planar(
            m, fl.PlanarState(t=0.0, positions=p, velocities=v),
            fl.PlanarStraight(x0=p[0], speed=1.0, heading_angle=ha),
            dt=0.01, horizon=100.0, record_every=100,
        )

    base = run(pos, vel, 0.0)
    rot = run(pos @ R.T, vel @ R.T, phi)
    for i in range(len(base.times)):
        assert np.abs(rot.positions[i] - base.positions[i] @ R.T).max() < 1e-8
        assert np.abs(rot.velocities[i] - base.velocities[i] @ R.T).max() < 1e-8


def test_c08_planar_run_reduces_to_linear_chain():
    lin = chain(10, 0.45)
    n = lin.n_agents
    init, programs = pinned_leader_step(lin, 0.1)
    ltraj = fl.integrate(lin, init, programs, dt=0.01, horizon=50.0,
                         record_every=10, stop_rule=None)

    form = np.column_stack([lin.h, np.zeros(n)])
    pm = fl.PlanarFlockModel(base=lin, formation=form, masses=np.ones(n),
                             alpha=0.0, V=0.0)
    vel0 = np.zeros((n, 2))
    vel0[:, 0] = 1.0
    vel0[1:, 0] -= 0.1  # followers lag the cruising frame exactly as in 1-D
    ptraj = fl.integrate_planar(
        pm, fl.PlanarState(t=0.0, positions=form.copy(), velocities=vel0),
        fl.PlanarStraight(x0=form[0], speed=1.0, heading_angle=0.0),
        dt=0.01, horizon=50.0, record_every=10,
    )
    dev = ptraj.positions[:, :, 0] - lin.h[None, :] - ptraj.times[:, None]
    assert np.abs(dev - ltraj.z).max() < 1e-8
    assert np.abs(ptraj.positions[:, :, 1]).max() == 0.0


def test_c09_time_frequency_cross_check():
    m = chain(10, 0.5)
    omega = 0.5
    aN = fl.response_at(m, omega)[-1]
    T = 2 * math.pi / omega
    n = m.n_agents
    traj = fl.integrate(
        m, fl.FlockState(t=0.0, z=np.zeros(n), zdot=np.zeros(n)),
        {0: fl.Sinusoid(amplitude=1.0, omega=omega)},
        dt=0.005, horizon=50 * T, record_every=1, stop_rule=None,
    )
    sel = traj.times >= 40 * T
    ts, zs = traj.times[sel], traj.z[sel, -1]
    basis = np.column_stack([np.sin(omega * ts), np.cos(omega * ts)])
    coef, *_ = np.linalg.lstsq(basis, zs, rcond=None)
    amp, phase = np.hypot(*coef), np.arctan2(coef[1], coef[0])
    assert abs(amp - abs(aN)) / abs(aN) < 0.01
    dphi = (phase - np.angle(aN) + math.pi) % (2 * math.pi) - math.pi
    assert abs(dphi) < 0.01


def test_c10_step_response_reproduction(tmp_path):
    """Full preset pipeline at N=100: the rho=0.45 chain loses cohesion
    (peak deviation beyond 10 spacings inside t = 1000) and beats the
    symmetric chain's peak by at least 10x; artifacts land on disk."""
    import json

    results = run_preset("fig2", tmp_path, scale=100)
    maxima = {}
    for outputs, summary, manifest in results:
        doc = json.loads(manifest.read_text())
        rho = doc["config"]["model"]["rho"]
        maxima[rho] = summary["max_abs_z_any"]
        d = manifest.parent
        assert (d / "trajectory.csv").stat().st_size > 0
        assert (d / "trajectory.svg").stat().st_size > 0
    assert maxima[0.45] > 10.0
    assert maxima[0.45] >= 10.0 * maxima[0.5], maxima
