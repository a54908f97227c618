"""Leader boundary signals for the 1-D linear flock.

A program supplies position and velocity of a leader at arbitrary
times; the integrator samples it at substep times, so both methods
must be consistent (velocity is the derivative of position).
"""

import numpy as np


class ConstantVelocity:
    """z(t) = z0 + v*t.  The unforced leader (zddot = 0) is this program."""

    def __init__(self, z0=0.0, v=0.0):
        self.z0 = float(z0)
        self.v = float(v)

    def position(self, t):
        return self.z0 + self.v * t

    def velocity(self, t):
        return self.v + 0.0 * t

    def is_zero(self):
        return self.z0 == 0.0 and self.v == 0.0


def pinned(z0=0.0):
    """A leader held at a fixed position."""
    return ConstantVelocity(z0, 0.0)


class Sinusoid:
    """z(t) = amplitude * sin(omega*t + phase)."""

    def __init__(self, amplitude=1.0, omega=1.0, phase=0.0):
        self.amplitude = float(amplitude)
        self.omega = float(omega)
        self.phase = float(phase)

    def position(self, t):
        return self.amplitude * np.sin(self.omega * t + self.phase)

    def velocity(self, t):
        return self.amplitude * self.omega * np.cos(self.omega * t + self.phase)

    def is_zero(self):
        return self.amplitude == 0.0


class PiecewiseLinear:
    """Position interpolates (times, values) linearly; flat outside the range."""

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be equal-length vectors")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def position(self, t):
        return np.interp(t, self.times, self.values)

    def velocity(self, t):
        # piecewise-constant slope; held at 0 outside the knot range
        slopes = np.diff(self.values) / np.diff(self.times)
        idx = np.searchsorted(self.times, t, side="right") - 1
        idx = np.clip(idx, 0, len(slopes) - 1)
        v = slopes[idx]
        inside = (t >= self.times[0]) & (t < self.times[-1])
        return np.where(inside, v, 0.0)

    def is_zero(self):
        return not np.any(self.values)


def normalize_programs(model, programs, init):
    """Return {leader: program}, defaulting to coasting from the initial state."""
    table = {}
    for k in sorted(model.leaders):
        if programs is None:
            table[k] = ConstantVelocity(float(init.z[k]), float(init.zdot[k]))
        elif isinstance(programs, dict):
            table[k] = programs.get(k) or ConstantVelocity(
                float(init.z[k]), float(init.zdot[k])
            )
        else:
            table[k] = programs
    return table


def all_zero(table):
    """True when every leader signal vanishes identically (unforced system)."""
    return all(
        getattr(p, "is_zero", lambda: False)() for p in table.values()
    )
