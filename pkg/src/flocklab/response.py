"""Steady-state harmonic response of the linear flock.

When every leader oscillates as exp(i*omega*t), the orbit of a
stabilized flock converges to z_k(t) = a_k(omega) exp(i*omega*t) with
a_leader = 1.  Substituting that ansatz into the dynamics and moving
the leader columns to the right-hand side leaves the follower system

    (omega^2 I + f*Lff_rho + i*omega*g*Lff_r) a_f
        = -(f*Lfl_rho + i*omega*g*Lfl_r) 1

solved here by dense partially pivoted LU over the complex numbers.
The sign convention is pinned twice over: the single-follower chain
has the closed form a_1 = (f + i*omega*g)/(f + i*omega*g + omega^2),
and a long time-domain simulation under sinusoidal leader forcing must
reproduce |a_N| and its phase (see the test suite).

As omega -> 0 every a_k -> 1 (the flock follows arbitrarily slow
leaders perfectly); omega = 0 itself is excluded since zero row sums
make the static system singular.  Peaks of |a_N| over omega measure
how violently the tail amplifies leader motion.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ResponseSingularError
from .dynamics import follower_reduction
from .model import LinearFlockModel

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def default_omega_grid(lo=1e-4, hi=1e2, points=2000):
    """Log-spaced frequency grid; the peaks of interest sit at low omega."""
    return np.logspace(np.log10(lo), np.log10(hi), points)


@dataclass
class ResponseTable:
    """Per-frequency complex amplitudes with leader entries pinned at 1.

    ``errors`` collects isolated solver failures keyed by grid index;
    their amplitude rows are NaN.
    """

    omegas: np.ndarray
    amplitudes: np.ndarray  # (n_omega, n_agents) complex
    gains: np.ndarray       # elementwise moduli
    errors: dict = field(default_factory=dict)


def response_at(m: LinearFlockModel, omega: float) -> np.ndarray:
    """Complex amplitude vector a(omega) over all agents.

    Leader entries are exactly 1; follower entries solve the reduced
    system above.  Raises ResponseSingularError at an exactly singular
    frequency (an undamped resonance).
    """
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    fidx = m.followers
    lidx = sorted(m.leaders)
    Lff_rho, Lff_r, Lfl_rho, Lfl_r = follower_reduction(m)
    nf = len(fidx)
    ones = np.ones(len(lidx))
    M = (omega * omega) * np.eye(nf) + m.f * Lff_rho + 1j * omega * m.g * Lff_r
    rhs = -(m.f * (Lfl_rho @ ones) + 1j * omega * m.g * (Lfl_r @ ones))
    try:
        a_f = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise ResponseSingularError(omega) from exc
    a = np.empty(m.n_agents, dtype=complex)
    a[lidx] = 1.0
    a[fidx] = a_f
    return a


def sweep(m: LinearFlockModel, grid) -> ResponseTable:
    """response_at over a positive increasing grid; isolated failures recorded."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty vector")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    amps = np.full((grid.size, m.n_agents), np.nan + 0j, dtype=complex)
    errors = {}
    for i, w in enumerate(grid):
        try:
            amps[i] = response_at(m, float(w))
        except ResponseSingularError as exc:
            errors[i] = str(exc)
    return ResponseTable(
        omegas=grid, amplitudes=amps, gains=np.abs(amps), errors=errors
    )


def _tail_gain(m, fidx):
    zN = fidx[-1]

    def gain(w):
        return abs(response_at(m, w)[zN])

    return gain


def peak_gain(m: LinearFlockModel, grid=None, refine_iters=60):
    """Maximum of |a_N(omega)| for the highest-index follower.

    Coarse grid argmax followed by golden-section refinement inside the
    bracketing interval.  refine_iters = 0 returns the grid argmax
    exactly.  The result never falls below the best evaluated point.
    """
    if grid is None:
        grid = default_omega_grid()
    grid = np.asarray(grid, dtype=float)
    fidx = m.followers
    if not fidx:
        raise ValueError("model has no followers")
    gain = _tail_gain(m, fidx)
    vals = np.array([gain(float(w)) for w in grid])
    j = int(np.nanargmax(vals))
    best_w, best_v = float(grid[j]), float(vals[j])
    if refine_iters <= 0 or grid.size < 2:
        return best_w, best_v

    lo = float(grid[max(j - 1, 0)])
    hi = float(grid[min(j + 1, grid.size - 1)])
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = gain(c), gain(d)
    for _ in range(int(refine_iters)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = gain(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = gain(d)
        x, v = (c, fc) if fc > fd else (d, fd)
        if v > best_v:
            best_w, best_v = float(x), float(v)
    return best_w, best_v
