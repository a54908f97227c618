"""SVG plots over the CSV artifacts.

Plots are conveniences layered on the CSV files, never load-bearing:
nothing downstream depends on pixels.  Rendering is deterministic; the
SVG date stamp is suppressed and element ids are salted with a fixed
string so identical CSVs yield identical files.
"""

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "flocklab"

import matplotlib.pyplot as plt

from .csvio import read_response_csv, read_spectrum_csv, read_trajectory_csv


def _save(fig, out_path):
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_space_time(csv_path, out_path, title=None):
    """Line-per-agent space-time diagram: position horizontal, time vertical."""
    times, Z, _ = read_trajectory_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    for k in range(Z.shape[1]):
        ax.plot(Z[:, k], times, lw=0.5, color="k", alpha=0.6)
    ax.set_xlabel("position deviation z")
    ax.set_ylabel("t")
    if title:
        ax.set_title(title)
    ax.set_ylim(times.min(), times.max())
    _save(fig, out_path)


def plot_response(csv_path, out_path, title=None):
    """Tail gain |a_N| against omega on log-log axes."""
    omegas, gains = read_response_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(omegas, gains, lw=0.8, color="k")
    ax.set_xlabel("omega")
    ax.set_ylabel("|a_N(omega)|")
    if title:
        ax.set_title(title)
    _save(fig, out_path)


def plot_spectrum(csv_path, out_path, title=None):
    """Eigenvalues in the complex plane."""
    eigs = read_spectrum_csv(csv_path)
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.scatter(eigs.real, eigs.imag, s=6, color="k")
    ax.axvline(0.0, lw=0.5, color="0.5")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
    _save(fig, out_path)


def plot_planar_paths(ptraj, out_path, title=None):
    """Agent paths in the plane with start/end markers (used by the turn preset)."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    n = ptraj.positions.shape[1]
    for k in range(n):
        ax.plot(ptraj.positions[:, k, 0], ptraj.positions[:, k, 1], lw=0.6)
    ax.scatter(ptraj.positions[0, :, 0], ptraj.positions[0, :, 1], s=10, marker="o")
    ax.scatter(ptraj.positions[-1, :, 0], ptraj.positions[-1, :, 1], s=10, marker="s")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    _save(fig, out_path)


_KINDS = {
    "spacetime": plot_space_time,
    "response": plot_response,
    "spectrum": plot_spectrum,
}


def plot_csv(kind, csv_path, out_path, title=None):
    if kind not in _KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {sorted(_KINDS)}")
    _KINDS[kind](csv_path, out_path, title=title)
    return out_path
