"""Nonlinear planar flock with velocity-aligned formation offsets.

Each agent k carries a body-frame formation slot h_k and rotates the
whole template by its own heading theta_k, the direction of its own
velocity.  With masses m_k, cruise gain alpha <= 0 and cruise speed V,
a non-leader obeys

    m_k xddot_k = f * sum_i L_rho[k,i] * (x_i - R(theta_k) h_i)
                + g * sum_i L_r[k,i]   * xdot_i
                + alpha * (1 - V/|xdot_k|) * xdot_k

and leaders follow prescribed smooth programs.  Because rotation
commutes with the zero-row-sum coupling, any rigidly translating
configuration x_k = c + R(theta) h_k with common velocity of magnitude
V along theta is an exact equilibrium, for every theta: the equations
commute with global rotations while each equilibrium locks its
orientation to the direction of travel.

The heading is singular at zero velocity.  The default policy is a
hard error below the speed guard epsilon_v; models built with
freeze_heading = True instead reuse each agent's last valid heading
through momentary stalls.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, IntegrationBlowUpError, SingularityError
from .model import LinearFlockModel

MAX_RECORDED_SAMPLES = 100_000


@dataclass(frozen=True, eq=False)
class PlanarFlockModel:
    """Planar flock: linear coupling structure plus planar extras.

    ``base`` supplies the Laplacian pair, gains and leader set;
    ``formation`` holds per-agent plane offsets h_k (body frame);
    ``masses`` have mean about 1.  alpha <= 0 regulates speed toward V.
    """

    base: LinearFlockModel
    formation: np.ndarray  # (n_agents, 2)
    masses: np.ndarray     # (n_agents,)
    alpha: float = 0.0
    V: float = 0.0
    epsilon_v: float = 1e-6
    freeze_heading: bool = False

    def __post_init__(self):
        formation = np.ascontiguousarray(self.formation, dtype=float)
        masses = np.ascontiguousarray(self.masses, dtype=float)
        n = self.base.n_agents
        if formation.shape != (n, 2):
            raise ConstructionError(
                f"formation must have shape ({n}, 2), got {formation.shape}"
            )
        if masses.shape != (n,):
            raise ConstructionError(f"masses must have shape ({n},), got {masses.shape}")
        if np.any(masses <= 0):
            raise ConstructionError("masses must be positive")
        if self.alpha > 0:
            raise ConstructionError(f"alpha must be <= 0, got {self.alpha!r}")
        if self.epsilon_v <= 0:
            raise ConstructionError(f"epsilon_v must be positive, got {self.epsilon_v!r}")
        formation.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "formation", formation)
        object.__setattr__(self, "masses", masses)

    @property
    def n_agents(self):
        return self.base.n_agents


@dataclass(frozen=True)
class PlanarState:
    t: float
    positions: np.ndarray   # (n_agents, 2)
    velocities: np.ndarray  # (n_agents, 2)

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        v = np.asarray(self.velocities, dtype=float)
        if p.shape != v.shape or p.ndim != 2 or p.shape[1] != 2:
            raise ConstructionError(
                f"positions/velocities must be (n, 2) arrays, got {p.shape} / {v.shape}"
            )
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "velocities", v)


@dataclass
class PlanarTrajectory:
    times: np.ndarray
    positions: np.ndarray   # (n_samples, n_agents, 2)
    velocities: np.ndarray

    def state(self, i) -> PlanarState:
        return PlanarState(
            t=float(self.times[i]),
            positions=self.positions[i],
            velocities=self.velocities[i],
        )


def heading(v, epsilon_v) -> float:
    """Angle of a plane velocity in (-pi, pi]; errors below the speed guard."""
    v = np.asarray(v, dtype=float)
    speed = float(np.hypot(v[0], v[1]))
    if speed < epsilon_v:
        raise SingularityError(speed=speed)
    theta = math.atan2(v[1], v[0])
    return math.pi if theta == -math.pi else theta


def _rotate_rows(theta_c, theta_s, rows):
    """Rotate each 2-vector row by its own angle (given as cos/sin arrays)."""
    out = np.empty_like(rows)
    out[:, 0] = theta_c * rows[:, 0] - theta_s * rows[:, 1]
    out[:, 1] = theta_s * rows[:, 0] + theta_c * rows[:, 1]
    return out


def planar_accel(s: PlanarState, m: PlanarFlockModel, fallback_theta=None) -> np.ndarray:
    """Per-agent plane accelerations; leader rows are zero.

    fallback_theta (per-agent angles) is consulted for stalled agents
    when the model runs with freeze_heading; otherwise a stall raises
    SingularityError naming the agent.
    """
    base = m.base
    X, Vel = s.positions, s.velocities
    acc = np.zeros_like(X)
    fidx = base.followers
    if not fidx:
        return acc
    speeds = np.hypot(Vel[fidx, 0], Vel[fidx, 1])
    stalled = speeds < m.epsilon_v
    if np.any(stalled):
        if not (m.freeze_heading and fallback_theta is not None):
            k = fidx[int(np.nonzero(stalled)[0][0])]
            raise SingularityError(agent=k, t=s.t, speed=float(speeds.min()))

    cos_t = np.empty(len(fidx))
    sin_t = np.empty(len(fidx))
    ok = ~stalled
    cos_t[ok] = Vel[fidx, 0][ok] / speeds[ok]
    sin_t[ok] = Vel[fidx, 1][ok] / speeds[ok]
    if np.any(stalled):
        fb = np.asarray(fallback_theta, dtype=float)[fidx]
        cos_t[stalled] = np.cos(fb[stalled])
        sin_t[stalled] = np.sin(fb[stalled])

    P = base.L_rho @ X          # (n, 2) coupling of positions
    H = base.L_rho @ m.formation
    W = base.L_r @ Vel
    RH = _rotate_rows(cos_t, sin_t, H[fidx])
    term = base.f * (P[fidx] - RH) + base.g * W[fidx]

    # cruise regulation; with frozen headings the speed is clamped at
    # the guard so the term stays finite through a stall
    safe = np.where(stalled, m.epsilon_v, speeds)
    cruise = m.alpha * (1.0 - m.V / safe)[:, None] * Vel[fidx]
    acc[fidx] = (term + cruise) / m.masses[fidx, None]
    return acc


def equilibrium_state(m: PlanarFlockModel, heading_angle: float, speed: float) -> PlanarState:
    """Rigid configuration R(heading) h_k translating at the given speed."""
    if speed < m.epsilon_v:
        raise SingularityError(speed=float(speed))
    c, s_ = math.cos(heading_angle), math.sin(heading_angle)
    pos = _rotate_rows(np.full(m.n_agents, c), np.full(m.n_agents, s_), m.formation)
    vel = np.tile([speed * c, speed * s_], (m.n_agents, 1))
    return PlanarState(t=0.0, positions=pos, velocities=vel)


def formation_error(s: PlanarState, m: PlanarFlockModel) -> float:
    """RMS mismatch between the flock shape and the formation template
    rotated to the mean-velocity heading."""
    vbar = s.velocities.mean(axis=0)
    theta = heading(vbar, m.epsilon_v)
    xbar = s.positions.mean(axis=0)
    hbar = m.formation.mean(axis=0)
    c, s_ = math.cos(theta), math.sin(theta)
    n = m.n_agents
    target = _rotate_rows(np.full(n, c), np.full(n, s_), m.formation - hbar)
    dev = (s.positions - xbar) - target
    return float(np.sqrt(np.mean(np.sum(dev * dev, axis=1))))


class PlanarStraight:
    """x(t) = x0 + t * speed * (cos heading, sin heading)."""

    def __init__(self, x0, speed, heading_angle=0.0):
        self.x0 = np.asarray(x0, dtype=float)
        self.v = speed * np.array([math.cos(heading_angle), math.sin(heading_angle)])

    def position(self, t):
        return self.x0 + self.v * t

    def velocity(self, t):
        return self.v


class HeadingRamp:
    """Constant speed; heading ramps linearly over [t_start, t_start+duration].

    Positions are the exact circular-arc integrals, so velocity is
    continuous everywhere (the path is C1) and no quadrature error
    enters the leader signal.
    """

    def __init__(self, x0, speed, heading0, heading1, t_start, duration):
        if duration <= 0:
            raise ValueError("duration must be positive")
        self.x0 = np.asarray(x0, dtype=float)
        self.speed = float(speed)
        self.h0 = float(heading0)
        self.h1 = float(heading1)
        self.t0 = float(t_start)
        self.T = float(duration)
        self.omega = (self.h1 - self.h0) / self.T
        self._p_t0 = self.position_before(self.t0)
        self._p_t1 = self._arc_position(self.T)

    def _dir(self, h):
        return np.array([math.cos(h), math.sin(h)])

    def position_before(self, t):
        return self.x0 + self.speed * t * self._dir(self.h0)

    def _arc_position(self, tau):
        if self.omega == 0.0:
            return self._p_t0 + self.speed * tau * self._dir(self.h0)
        w = self.omega
        a = self.h0 + w * tau
        dx = (self.speed / w) * (math.sin(a) - math.sin(self.h0))
        dy = -(self.speed / w) * (math.cos(a) - math.cos(self.h0))
        return self._p_t0 + np.array([dx, dy])

    def position(self, t):
        if t < self.t0:
            return self.position_before(t)
        tau = t - self.t0
        if tau < self.T:
            return self._arc_position(tau)
        return self._p_t1 + self.speed * (tau - self.T) * self._dir(self.h1)

    def velocity(self, t):
        if t < self.t0:
            h = self.h0
        elif t - self.t0 < self.T:
            h = self.h0 + self.omega * (t - self.t0)
        else:
            h = self.h1
        return self.speed * self._dir(h)


class WaypointSpline:
    """C1 cubic Hermite path through waypoints (Catmull-Rom tangents).

    Outside the knot range the path continues straight with the
    boundary velocity.
    """

    def __init__(self, times, points):
        t = np.asarray(times, dtype=float)
        p = np.asarray(points, dtype=float)
        if t.ndim != 1 or len(t) < 2 or p.shape != (len(t), 2):
            raise ValueError("need matching times (n,) and points (n, 2), n >= 2")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        self.t = t
        self.p = p
        tang = np.empty_like(p)
        tang[0] = (p[1] - p[0]) / (t[1] - t[0])
        tang[-1] = (p[-1] - p[-2]) / (t[-1] - t[-2])
        for i in range(1, len(t) - 1):
            tang[i] = (p[i + 1] - p[i - 1]) / (t[i + 1] - t[i - 1])
        self.tang = tang

    def _segment(self, t):
        i = int(np.searchsorted(self.t, t, side="right") - 1)
        return min(max(i, 0), len(self.t) - 2)

    def position(self, t):
        if t <= self.t[0]:
            return self.p[0] + (t - self.t[0]) * self.tang[0]
        if t >= self.t[-1]:
            return self.p[-1] + (t - self.t[-1]) * self.tang[-1]
        i = self._segment(t)
        dt = self.t[i + 1] - self.t[i]
        u = (t - self.t[i]) / dt
        h00 = 2 * u**3 - 3 * u**2 + 1
        h10 = u**3 - 2 * u**2 + u
        h01 = -2 * u**3 + 3 * u**2
        h11 = u**3 - u**2
        return (
            h00 * self.p[i]
            + h10 * dt * self.tang[i]
            + h01 * self.p[i + 1]
            + h11 * dt * self.tang[i + 1]
        )

    def velocity(self, t):
        if t <= self.t[0]:
            return self.tang[0].copy()
        if t >= self.t[-1]:
            return self.tang[-1].copy()
        i = self._segment(t)
        dt = self.t[i + 1] - self.t[i]
        u = (t - self.t[i]) / dt
        d00 = (6 * u**2 - 6 * u) / dt
        d10 = 3 * u**2 - 4 * u + 1
        d01 = (-6 * u**2 + 6 * u) / dt
        d11 = 3 * u**2 - 2 * u
        return (
            d00 * self.p[i]
            + d10 * self.tang[i]
            + d01 * self.p[i + 1]
            + d11 * self.tang[i + 1]
        )


def integrate_planar(
    m: PlanarFlockModel,
    init: PlanarState,
    leader_program,
    dt=0.01,
    horizon=100.0,
    record_every=None,
) -> PlanarTrajectory:
    """Fixed-step RK4 on the planar system; leaders follow their programs.

    ``leader_program`` is a single planar program or {leader: program}.
    Raises SingularityError (with time and agent) if a follower stalls
    under the hard-error policy, IntegrationBlowUpError on NaN.
    """
    base = m.base
    n = base.n_agents
    if init.positions.shape != (n, 2):
        raise ValueError(f"init has shape {init.positions.shape}, expected ({n}, 2)")
    fidx = base.followers
    lidx = sorted(base.leaders)
    programs = (
        leader_program
        if isinstance(leader_program, dict)
        else {k: leader_program for k in lidx}
    )
    for k in lidx:
        if k not in programs or programs[k] is None:
            raise ValueError(f"leader {k} has no program")

    nf = len(fidx)
    total_steps = max(1, int(math.ceil(horizon / dt - 1e-12)))
    if record_every is None:
        record_every = max(1, int(math.ceil(total_steps / MAX_RECORDED_SAMPLES)))

    # scratch full state reused across derivative evaluations
    def assemble(t, yf):
        X = np.empty((n, 2))
        Vl = np.empty((n, 2))
        X[fidx] = yf[: 2 * nf].reshape(nf, 2)
        Vl[fidx] = yf[2 * nf :].reshape(nf, 2)
        for k in lidx:
            X[k] = programs[k].position(t)
            Vl[k] = programs[k].velocity(t)
        return X, Vl

    theta_last = np.zeros(n)
    have_theta = False

    def deriv(t, yf):
        X, Vl = assemble(t, yf)
        state = PlanarState(t=t, positions=X, velocities=Vl)
        fb = theta_last if (m.freeze_heading and have_theta) else None
        acc = planar_accel(state, m, fallback_theta=fb)
        return np.concatenate([Vl[fidx].ravel(), acc[fidx].ravel()])

    y = np.concatenate([init.positions[fidx].ravel(), init.velocities[fidx].ravel()])
    times, poss, vels = [], [], []

    def record(t, yf):
        X, Vl = assemble(t, yf)
        times.append(t)
        poss.append(X)
        vels.append(Vl)

    record(0.0, y)
    if m.freeze_heading:
        _refresh_theta(theta_last, init.velocities, fidx, m.epsilon_v)
        have_theta = True

    t = 0.0
    for i in range(1, total_steps + 1):
        try:
            k1 = deriv(t, y)
            k2 = deriv(t + 0.5 * dt, y + 0.5 * dt * k1)
            k3 = deriv(t + 0.5 * dt, y + 0.5 * dt * k2)
            k4 = deriv(t + dt, y + dt * k3)
        except SingularityError as exc:
            raise SingularityError(agent=exc.agent, t=t, speed=exc.speed) from None
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = i * dt
        if not np.all(np.isfinite(y)):
            raise IntegrationBlowUpError(t)
        if m.freeze_heading:
            V_rows = y[2 * nf :].reshape(nf, 2)
            _refresh_theta_followers(theta_last, V_rows, fidx, m.epsilon_v)
        if i % record_every == 0 or i == total_steps:
            record(t, y)
    return PlanarTrajectory(
        times=np.asarray(times),
        positions=np.asarray(poss),
        velocities=np.asarray(vels),
    )


def _refresh_theta(theta, velocities, fidx, eps):
    for k in fidx:
        sp = math.hypot(velocities[k, 0], velocities[k, 1])
        if sp >= eps:
            theta[k] = math.atan2(velocities[k, 1], velocities[k, 0])


def _refresh_theta_followers(theta, v_rows, fidx, eps):
    for j, k in enumerate(fidx):
        sp = math.hypot(v_rows[j, 0], v_rows[j, 1])
        if sp >= eps:
            theta[k] = math.atan2(v_rows[j, 1], v_rows[j, 0])


def hexagon_formation(radius=1.0):
    """Seven slots: one center plus a regular hexagon around it."""
    pts = [np.zeros(2)]
    for j in range(6):
        ang = math.pi / 3.0 * j
        pts.append(radius * np.array([math.cos(ang), math.sin(ang)]))
    return np.asarray(pts)


def sample_masses(n, delta, seed=0):
    """Masses drawn uniformly from [1 - delta, 1 + delta]."""
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    rng = np.random.default_rng(seed)
    return 1.0 + delta * rng.uniform(-1.0, 1.0, size=n)
