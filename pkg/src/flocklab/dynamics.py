"""Time-domain integration and companion-matrix spectra of linear flocks.

The follower block of a well-formed model is an LTI system

    d/dt (z_f, zdot_f) = A (z_f, zdot_f) + leader terms,
    A = [[0, I], [f*Lff_rho, g*Lff_r]]

with the Laplacian blocks as stored (positive diagonal).  For a single
follower with f = -1, g = -2 this is [[0, 1], [-1, -2]], a critically
damped oscillator with double eigenvalue -1; that worked example pins
the sign convention, and the spectrum/simulation consistency test
keeps it honest at scale.

Integration is fixed-step classical fourth-order Runge-Kutta.  For the
common unforced case (all leader signals identically zero) one RK4 step
is exactly the linear map R = I + X + X^2/2 + X^3/6 + X^4/24, X = A*dt,
so long runs use precomputed powers of R applied blockwise; this is
bit-for-bit the same method, evaluated with far less Python overhead.
Maxima of |z| are tracked at full step resolution even when the stored
trajectory is thinned.

Impulse-style experiments use an adaptive stop rule: integrate until
the horizon cap, or until the mechanical energy has collapsed to a
small fraction of its running peak while max|z_N| has stopped growing.
The slow transients of back-heavy chains (rho > 1/2) live on timescales
thousands of units long, which is what the rule is for.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EigensolveError, IntegrationBlowUpError
from .model import FlockState, LinearFlockModel
from .programs import ConstantVelocity, all_zero, normalize_programs

# RK4 keeps |lambda|*dt inside roughly this radius on the negative axis.
RK4_STABILITY_MARGIN = 2.5

# Cap on stored samples; longer runs are thinned (maxima stay exact).
MAX_RECORDED_SAMPLES = 100_000

# Unforced runs at least this long take the blocked propagation path.
FAST_PATH_MIN_STEPS = 20_000
FAST_PATH_BLOCK = 64


@dataclass
class Trajectory:
    """Sampled run: times, per-agent deviations and velocities, maxima.

    ``max_abs_zN`` is the full-resolution maximum of |z| for the
    highest-index follower; ``max_abs_z_any`` the maximum over all
    agents and times.  With thinning these can slightly exceed the
    maxima recomputed from the stored samples.
    """

    times: np.ndarray
    z: np.ndarray
    zdot: np.ndarray
    max_abs_zN: float
    max_abs_z_any: float
    stopped_at: float = 0.0

    def state(self, i) -> FlockState:
        return FlockState(t=float(self.times[i]), z=self.z[i], zdot=self.zdot[i])

    @property
    def states(self):
        return [self.state(i) for i in range(len(self.times))]


@dataclass
class SpectrumReport:
    """Eigenvalues of a companion matrix with axis-distance statistics."""

    eigenvalues: np.ndarray
    spectral_abscissa: float
    min_abs_real: float
    min_modulus: float
    near_zero_count: int
    near_zero_threshold: float


@dataclass
class SettleRule:
    """Stop once energy has collapsed and the running |z_N| max has plateaued.

    Stops when E(t) <= energy_drop * peak(E) and max|z_N| has not
    increased during the trailing plateau_fraction of elapsed time.
    E is the mechanical energy (1/2)[(zdot,zdot) - f (L_rho^S z, z)].
    """

    energy_drop: float = 1e-6
    plateau_fraction: float = 0.1
    check_interval: int = 200


def follower_reduction(m: LinearFlockModel):
    """Partition the Laplacians into follower-follower and follower-leader blocks.

    Returns (Lff_rho, Lff_r, Lfl_rho, Lfl_r).  Follower rows/columns are
    taken in ascending agent order, leader columns likewise, so placing
    the blocks back yields the original non-leader rows exactly.
    """
    fidx = m.followers
    lidx = sorted(m.leaders)
    Lff_rho = m.L_rho[np.ix_(fidx, fidx)]
    Lff_r = m.L_r[np.ix_(fidx, fidx)]
    Lfl_rho = m.L_rho[np.ix_(fidx, lidx)]
    Lfl_r = m.L_r[np.ix_(fidx, lidx)]
    return Lff_rho, Lff_r, Lfl_rho, Lfl_r


def companion_matrix(m: LinearFlockModel) -> np.ndarray:
    """First-order block matrix [[0, I], [f*Lff_rho, g*Lff_r]] on (z_f, zdot_f)."""
    Lff_rho, Lff_r, _, _ = follower_reduction(m)
    nf = Lff_rho.shape[0]
    A = np.zeros((2 * nf, 2 * nf))
    A[:nf, nf:] = np.eye(nf)
    A[nf:, :nf] = m.f * Lff_rho
    A[nf:, nf:] = m.g * Lff_r
    return A


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues of a dense real matrix.

    Delegates to LAPACK (balancing, Hessenberg reduction, shifted QR);
    accuracy is ~1e-8 relative for well-conditioned spectra at desk
    scale.  Non-convergence raises EigensolveError.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise EigensolveError(f"matrix must be square, got shape {M.shape}")
    if M.size == 0:
        return np.zeros(0, dtype=complex)
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigensolveError(f"eigensolver did not converge: {exc}") from exc


def spectral_summary(eigs, near_zero_threshold=1e-6) -> SpectrumReport:
    """Axis-distance statistics of a spectrum.

    min_abs_real measures distance to the imaginary axis, min_modulus
    distance to the origin; near_zero_count applies the supplied
    modulus threshold.
    """
    eigs = np.asarray(eigs, dtype=complex)
    if eigs.size == 0:
        raise EigensolveError("empty spectrum")
    order = np.lexsort((eigs.imag, eigs.real))
    eigs = eigs[order]
    return SpectrumReport(
        eigenvalues=eigs,
        spectral_abscissa=float(eigs.real.max()),
        min_abs_real=float(np.abs(eigs.real).min()),
        min_modulus=float(np.abs(eigs).min()),
        near_zero_count=int(np.count_nonzero(np.abs(eigs) < near_zero_threshold)),
        near_zero_threshold=float(near_zero_threshold),
    )


def _rk4_transfer(A, dt):
    """Exact one-step RK4 map for zdot = A z: the degree-4 Taylor polynomial."""
    X = A * dt
    R = np.eye(A.shape[0]) + X
    T = X.copy()
    for k in (2.0, 3.0, 4.0):
        T = T @ X / k
        R = R + T
    return R


def _check_step_size(A, dt):
    # Cheap norm bound first; only price the true spectral radius when
    # the bound is in doubt.
    bound = np.abs(A).sum(axis=1).max()
    if dt * bound < RK4_STABILITY_MARGIN:
        return
    specrad = float(np.abs(eigenvalues(A)).max()) if A.size else 0.0
    if dt * specrad >= RK4_STABILITY_MARGIN:
        warnings.warn(
            f"dt = {dt:g} puts dt*specrad = {dt * specrad:.2f} outside the "
            f"RK4 stability margin {RK4_STABILITY_MARGIN}; expect blow-up",
            RuntimeWarning,
            stacklevel=3,
        )


@dataclass
class _Recorder:
    """Collects thinned samples plus full-resolution maxima."""

    model: LinearFlockModel
    programs: dict
    zN_index: int
    times: list = field(default_factory=list)
    zs: list = field(default_factory=list)
    zds: list = field(default_factory=list)
    max_abs_zN: float = 0.0
    t_of_max: float = 0.0
    max_abs_z_any: float = 0.0

    def sample(self, t, zf, zdf):
        n = self.model.n_agents
        z = np.empty(n)
        zd = np.empty(n)
        fidx = self.model.followers
        z[fidx] = zf
        zd[fidx] = zdf
        for k, prog in self.programs.items():
            z[k] = prog.position(t)
            zd[k] = prog.velocity(t)
        self.times.append(t)
        self.zs.append(z)
        self.zds.append(zd)

    def build(self, stopped_at):
        return Trajectory(
            times=np.asarray(self.times),
            z=np.asarray(self.zs),
            zdot=np.asarray(self.zds),
            max_abs_zN=self.max_abs_zN,
            max_abs_z_any=self.max_abs_z_any,
            stopped_at=stopped_at,
        )


def _energy_matrices(m):
    LS = 0.5 * (m.L_rho + m.L_rho.T)
    return LS


def _settle_state(rule):
    return {"peak": 0.0}


def _should_stop(rule, st, E, t, t_of_max):
    if E > st["peak"]:
        st["peak"] = E
    if E <= rule.energy_drop * st["peak"] and (t - t_of_max) >= rule.plateau_fraction * t:
        return True
    return False


def integrate(
    m: LinearFlockModel,
    init: FlockState,
    leader_program=None,
    dt=0.01,
    horizon=100.0,
    stop_rule=None,
    record_every=None,
) -> Trajectory:
    """Fixed-step RK4 integration of the follower system.

    ``leader_program`` may be a single program, a {leader: program}
    mapping, or None, in which case every leader coasts from its
    initial state (the zero-feedback rule zddot_leader = 0).  The
    trajectory is sampled every ``record_every`` steps (default: thin
    to at most 100k samples); |z| maxima are tracked every step
    regardless.  ``stop_rule`` may be a SettleRule to terminate early.

    Raises IntegrationBlowUpError with the blow-up time if the state
    leaves the representable range.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if init.z.shape[0] != m.n_agents:
        raise ValueError(
            f"state has {init.z.shape[0]} agents, model has {m.n_agents}"
        )
    programs = normalize_programs(m, leader_program, init)
    A = companion_matrix(m)
    _check_step_size(A, dt)

    total_steps = max(1, int(math.ceil(horizon / dt - 1e-12)))
    if record_every is None:
        record_every = max(1, int(math.ceil(total_steps / MAX_RECORDED_SAMPLES)))

    unforced = all_zero(programs)
    if unforced and total_steps >= FAST_PATH_MIN_STEPS:
        return _integrate_blocked(
            m, init, programs, A, dt, total_steps, stop_rule, record_every
        )
    return _integrate_stepwise(
        m, init, programs, A, dt, total_steps, stop_rule, record_every
    )


def _leader_vectors(programs, lidx, t):
    zl = np.array([programs[k].position(t) for k in lidx])
    zdl = np.array([programs[k].velocity(t) for k in lidx])
    return zl, zdl


def _integrate_stepwise(m, init, programs, A, dt, total_steps, stop_rule, record_every):
    fidx = m.followers
    lidx = sorted(m.leaders)
    nf = len(fidx)
    Lff_rho, Lff_r, Lfl_rho, Lfl_r = follower_reduction(m)
    f, g = m.f, m.g
    LS = _energy_matrices(m)
    zN_index = fidx[-1] if fidx else 0

    def deriv(t, y):
        zf, zdf = y[:nf], y[nf:]
        zl, zdl = _leader_vectors(programs, lidx, t)
        acc = f * (Lff_rho @ zf + Lfl_rho @ zl) + g * (Lff_r @ zdf + Lfl_r @ zdl)
        return np.concatenate([zdf, acc])

    rec = _Recorder(model=m, programs=programs, zN_index=zN_index)
    y = np.concatenate([init.z[fidx], init.zdot[fidx]])
    t = 0.0
    rec.sample(t, y[:nf], y[nf:])
    _bump_maxima(rec, t, y[:nf], programs, lidx, nf)

    settle = _settle_state(stop_rule) if isinstance(stop_rule, SettleRule) else None
    check = stop_rule.check_interval if isinstance(stop_rule, SettleRule) else 0

    stopped_at = total_steps * dt
    for i in range(1, total_steps + 1):
        k1 = deriv(t, y)
        k2 = deriv(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = deriv(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = deriv(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = i * dt
        if not np.all(np.isfinite(y)):
            raise IntegrationBlowUpError(t)
        _bump_maxima(rec, t, y[:nf], programs, lidx, nf)
        if i % record_every == 0 or i == total_steps:
            rec.sample(t, y[:nf], y[nf:])
        if settle is not None and i % check == 0:
            E = _full_energy(m, LS, programs, lidx, fidx, t, y, nf)
            if _should_stop(stop_rule, settle, E, t, rec.t_of_max):
                stopped_at = t
                if i % record_every != 0 and i != total_steps:
                    rec.sample(t, y[:nf], y[nf:])
                break
    return rec.build(stopped_at)


def _bump_maxima(rec, t, zf, programs, lidx, nf):
    if nf:
        azN = abs(zf[-1])
        if azN > rec.max_abs_zN:
            rec.max_abs_zN = azN
            rec.t_of_max = t
        m_any = float(np.abs(zf).max())
    else:
        m_any = 0.0
    for k in lidx:
        m_any = max(m_any, abs(programs[k].position(t)))
    if m_any > rec.max_abs_z_any:
        rec.max_abs_z_any = m_any


def _full_energy(m, LS, programs, lidx, fidx, t, y, nf):
    z = np.empty(m.n_agents)
    zd = np.empty(m.n_agents)
    z[fidx] = y[:nf]
    zd[fidx] = y[nf:]
    for k in lidx:
        z[k] = programs[k].position(t)
        zd[k] = programs[k].velocity(t)
    return 0.5 * (zd @ zd - m.f * (z @ (LS @ z)))


def _integrate_blocked(m, init, programs, A, dt, total_steps, stop_rule, record_every):
    """Unforced long-run path: precomputed RK4 transfer applied in blocks.

    Leader signals are identically zero here, so one step is y -> R y.
    A block of 64 consecutive states is produced by a single stacked
    matrix product; maxima are then reduced over the block at full
    resolution.  Identical to the stepwise path up to float
    associativity (~1e-15 relative).
    """
    fidx = m.followers
    lidx = sorted(m.leaders)
    nf = len(fidx)
    block = min(FAST_PATH_BLOCK, total_steps)
    R = _rk4_transfer(A, dt)
    S = np.empty((block, 2 * nf, 2 * nf))
    S[0] = R
    for j in range(1, block):
        S[j] = S[j - 1] @ R
    Sflat = S.reshape(block * 2 * nf, 2 * nf)
    LS = _energy_matrices(m)

    rec = _Recorder(model=m, programs=programs, zN_index=fidx[-1] if fidx else 0)
    y = np.concatenate([init.z[fidx], init.zdot[fidx]])
    rec.sample(0.0, y[:nf], y[nf:])
    _bump_maxima(rec, 0.0, y[:nf], programs, lidx, nf)

    settle = _settle_state(stop_rule) if isinstance(stop_rule, SettleRule) else None
    acc_any = np.abs(y[:nf]).copy() if nf else np.zeros(0)

    stopped_at = total_steps * dt
    steps_done = 0
    while steps_done < total_steps:
        nsteps = min(block, total_steps - steps_done)
        Y = (Sflat @ y).reshape(block, 2 * nf)[:nsteps]
        if not np.isfinite(Y[-1]).all():
            # locate the first bad step inside the block
            bad = np.nonzero(~np.isfinite(Y).all(axis=1))[0][0]
            raise IntegrationBlowUpError((steps_done + bad + 1) * dt)
        zblock = Y[:, :nf]
        azN = np.abs(zblock[:, -1]) if nf else np.zeros(nsteps)
        j = int(azN.argmax()) if nf else 0
        if nf and azN[j] > rec.max_abs_zN:
            rec.max_abs_zN = float(azN[j])
            rec.t_of_max = (steps_done + j + 1) * dt
        if nf:
            np.maximum(acc_any, np.abs(zblock).max(axis=0), out=acc_any)
        # recorded steps are the multiples of record_every inside this block
        first = ((steps_done // record_every) + 1) * record_every
        for step_no in range(first, steps_done + nsteps + 1, record_every):
            i = step_no - steps_done - 1
            rec.sample(step_no * dt, Y[i, :nf], Y[i, nf:])
        if steps_done + nsteps == total_steps and total_steps % record_every != 0:
            rec.sample(total_steps * dt, Y[nsteps - 1, :nf], Y[nsteps - 1, nf:])
        y = Y[nsteps - 1]
        steps_done += nsteps
        t = steps_done * dt
        if settle is not None:
            E = _full_energy(m, LS, programs, lidx, fidx, t, y, nf)
            if _should_stop(stop_rule, settle, E, t, rec.t_of_max):
                stopped_at = t
                if steps_done % record_every != 0 and steps_done != total_steps:
                    rec.sample(t, y[:nf], y[nf:])
                break
    if nf:
        rec.max_abs_z_any = max(rec.max_abs_z_any, float(acc_any.max()))
    return rec.build(stopped_at)


def step_response(
    m: LinearFlockModel,
    v_leader: float,
    dt=0.01,
    horizon=1e6,
    record_every=None,
    stop_rule=SettleRule(),
) -> Trajectory:
    """Leader starts moving at constant velocity; followers start at rest.

    Computed in the leader frame, where the scenario is the impulse
    data z(0) = 0, zdot_follower(0) = -v_leader with the leaders pinned
    at 0; by Galilean invariance this is the same motion, and |z_N(t)|
    is frame-independent up to the uniform drift.  Use galilean_shift
    with V = v_leader to display lab-frame coordinates.

    The default SettleRule plus the 1e6-unit horizon cap let slow
    transients (rho > 1/2) run to their true maximum.
    """
    z0 = np.zeros(m.n_agents)
    zd0 = np.zeros(m.n_agents)
    zd0[m.followers] = -float(v_leader)
    init = FlockState(t=0.0, z=z0, zdot=zd0)
    program = {k: ConstantVelocity(0.0, 0.0) for k in m.leaders}
    return integrate(
        m,
        init,
        leader_program=program,
        dt=dt,
        horizon=horizon,
        stop_rule=stop_rule,
        record_every=record_every,
    )
