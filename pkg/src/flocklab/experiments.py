"""Configuration-driven experiment runner.

`run` dispatches a validated ExperimentConfig to the owning module,
writes CSV artifacts plus a JSON manifest (inputs echoed, versions,
wall time) into the output directory, and renders SVG plots from the
CSVs.  Runs are deterministic given config and seed: CSVs are
byte-identical across repeats, plots carry no timestamps.

Independent sub-computations (sweep grid chunks, preset members) may
run on a small thread pool; FLOCKLAB_THREADS caps the worker count.
All results land in preallocated slots, so threading never reorders
output.
"""

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ._version import __version__
from .classify import classify, standard_family
from .config import ExperimentConfig
from .csvio import (
    write_classifier_csv,
    write_ledger_csv,
    write_planar_csv,
    write_response_csv,
    write_snapshot_csv,
    write_spectrum_csv,
    write_trajectory_csv,
)
from .dynamics import companion_matrix, eigenvalues, spectral_summary, step_response
from .errors import ConfigError
from .ledger import ledger
from .model import FlockState, StandardExampleParams, build_custom, build_standard_example
from .planar import (
    HeadingRamp,
    PlanarFlockModel,
    equilibrium_state,
    formation_error,
    hexagon_formation,
    integrate_planar,
)
from .plots import plot_planar_paths, plot_response, plot_space_time, plot_spectrum
from .response import ResponseTable, default_omega_grid, sweep

PRESET_RHOS = (0.45, 0.5, 0.55)


def worker_count():
    """Thread-pool width; FLOCKLAB_THREADS overrides the default."""
    env = os.environ.get("FLOCKLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"FLOCKLAB_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError(f"FLOCKLAB_THREADS must be >= 1, got {n}")
        return n
    return min(4, os.cpu_count() or 1)


def build_model(model_cfg):
    """LinearFlockModel from the [model] table (standard or custom)."""
    custom = model_cfg.get("custom")
    if custom is not None:
        def table(rows):
            out = {}
            for row in rows or []:
                if len(row) != 3:
                    raise ConfigError(f"weight rows are [agent, neighbor, weight], got {row!r}")
                a, b, w = int(row[0]), int(row[1]), float(row[2])
                out.setdefault(a, {})[b] = w
            return out

        h = custom.get("h")
        n = int(custom["n"])
        if h is None:
            h = [-float(k) for k in range(n)]
        if len(h) != n:
            raise ConfigError(f"[model.custom].h has {len(h)} entries for n = {n}")
        return build_custom(
            weights_rho=table(custom["weights_rho"]),
            weights_r=table(custom.get("weights_r")),
            leaders=custom["leaders"],
            f=float(custom.get("f", -1.0)),
            g=float(custom.get("g", -2.0)),
            h=np.asarray(h, dtype=float),
        )
    p = standard_params(model_cfg)
    return build_standard_example(p)


def standard_params(model_cfg, N=None):
    rho = float(model_cfg["rho"])
    return StandardExampleParams(
        N=int(model_cfg["n"]) if N is None else N,
        rho=rho,
        r=float(model_cfg.get("r", rho)),
        f=float(model_cfg.get("f", -1.0)),
        g=float(model_cfg.get("g", -2.0)),
    )


def _omega_grid(numeric):
    om = numeric.get("omega", {})
    return default_omega_grid(
        lo=float(om.get("min", 1e-4)),
        hi=float(om.get("max", 1e2)),
        points=int(om.get("points", 2000)),
    )


def parallel_sweep(m, grid, threads=None):
    """sweep() with the grid split across worker threads; same table."""
    threads = worker_count() if threads is None else threads
    grid = np.asarray(grid, dtype=float)
    if threads <= 1 or grid.size < 64:
        return sweep(m, grid)
    chunks = np.array_split(np.arange(grid.size), threads * 4)
    chunks = [c for c in chunks if c.size]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        tables = list(pool.map(lambda c: sweep(m, grid[c]), chunks))
    amps = np.vstack([t.amplitudes for t in tables])
    errors = {}
    for c, t in zip(chunks, tables):
        for i, msg in t.errors.items():
            errors[int(c[0]) + i] = msg
    return ResponseTable(omegas=grid, amplitudes=amps, gains=np.abs(amps), errors=errors)


def _run_step_response(cfg, out):
    m = build_model(cfg.model)
    v = float(cfg.numeric_get("v_leader", 0.1))
    dt = float(cfg.numeric_get("dt", 0.01))
    horizon = float(cfg.numeric_get("horizon", 1000.0))
    rec = cfg.numeric_get("record_every", None)
    traj = step_response(m, v, dt=dt, horizon=horizon, record_every=rec)
    csv = out / "trajectory.csv"
    write_trajectory_csv(csv, traj)
    svg = out / "trajectory.svg"
    plot_space_time(csv, svg, title=f"step response, v = {v:g}")
    return [csv, svg], {
        "max_abs_zN": traj.max_abs_zN,
        "max_abs_z_any": traj.max_abs_z_any,
        "stopped_at": traj.stopped_at,
    }


def _run_frequency_sweep(cfg, out, threads):
    m = build_model(cfg.model)
    grid = _omega_grid(cfg.numeric)
    table = parallel_sweep(m, grid, threads)
    csv = out / "response.csv"
    write_response_csv(csv, table)
    svg = out / "response.svg"
    plot_response(csv, svg, title="tail gain")
    tail = table.gains[:, -1]
    finite = tail[np.isfinite(tail)]
    return [csv, svg], {
        "grid_points": int(grid.size),
        "grid_peak_gain": float(finite.max()) if finite.size else None,
        "solver_failures": len(table.errors),
    }


def _run_spectrum(cfg, out):
    m = build_model(cfg.model)
    eigs = eigenvalues(companion_matrix(m))
    rep = spectral_summary(eigs, float(cfg.numeric_get("near_zero_threshold", 1e-3)))
    csv = out / "spectrum.csv"
    write_spectrum_csv(csv, rep.eigenvalues)
    svg = out / "spectrum.svg"
    plot_spectrum(csv, svg, title="companion spectrum")
    return [csv, svg], {
        "spectral_abscissa": rep.spectral_abscissa,
        "min_abs_real": rep.min_abs_real,
        "min_modulus": rep.min_modulus,
        "near_zero_count": rep.near_zero_count,
        "near_zero_threshold": rep.near_zero_threshold,
    }


def _run_classify(cfg, out):
    rho = float(cfg.model["rho"])
    fam = standard_family(
        rho,
        r=float(cfg.model.get("r", rho)),
        f=float(cfg.model.get("f", -1.0)),
        g=float(cfg.model.get("g", -2.0)),
        N_list=tuple(cfg.numeric_get("N_list", (25, 50, 100))),
    )
    report = classify(
        fam,
        v_leader=float(cfg.numeric_get("v_leader", 0.1)),
        slope_threshold=float(cfg.numeric_get("slope_threshold", 0.01)),
        dt=float(cfg.numeric_get("dt", 0.1)),
        horizon=float(cfg.numeric_get("horizon", 1e6)),
    )
    csv = out / "classifier.csv"
    write_classifier_csv(csv, report)
    return [csv], {
        "verdict": report.verdict,
        "harmonic_slope": report.harmonic.slope,
        "impulse_slope": report.impulse.slope,
        "slope_threshold": report.slope_threshold,
    }


def _run_ledger(cfg, out):
    from .dynamics import integrate
    from .programs import ConstantVelocity

    m = build_model(cfg.model)
    v = float(cfg.numeric_get("v_leader", 0.1))
    dt = float(cfg.numeric_get("dt", 0.01))
    horizon = float(cfg.numeric_get("horizon", 50.0))
    z0 = np.zeros(m.n_agents)
    zd0 = np.zeros(m.n_agents)
    zd0[m.followers] = -v
    traj = integrate(
        m,
        FlockState(t=0.0, z=z0, zdot=zd0),
        leader_program={k: ConstantVelocity(0.0, 0.0) for k in m.leaders},
        dt=dt,
        horizon=horizon,
        record_every=1,
    )
    series = ledger(traj, m)
    csv = out / "ledger.csv"
    write_ledger_csv(csv, series)
    scale = float(np.abs(series.lhs).max())
    worst = float(np.abs(series.residual).max())
    return [csv], {
        "max_abs_lhs": scale,
        "max_abs_residual": worst,
        "relative_residual": worst / scale if scale > 0 else 0.0,
    }


def turn_model(seed=None, mass_delta=0.0):
    """The 7-agent hexagon used by the turn experiment: center leads,
    ring agents attend the leader and their two ring neighbors."""
    weights = {}
    for k in range(1, 7):
        left = 1 + (k - 1 - 1) % 6
        right = 1 + (k - 1 + 1) % 6
        weights[k] = {0: 1.0, left: 0.5, right: 0.5}
    base = build_custom(
        weights_rho=weights,
        weights_r=weights,
        leaders={0},
        f=-1.0,
        g=-2.0,
        h=np.zeros(7),
    )
    masses = np.ones(7)
    if mass_delta > 0.0:
        from .planar import sample_masses

        masses = sample_masses(7, mass_delta, seed=0 if seed is None else seed)
    return PlanarFlockModel(
        base=base,
        formation=hexagon_formation(radius=2.0),
        masses=masses,
        alpha=-0.5,
        V=1.0,
    )


def _run_planar_turn(cfg, out):
    dt = float(cfg.numeric_get("dt", 0.01))
    horizon = float(cfg.numeric_get("horizon", 400.0))
    seed = cfg.numeric_get("seed", None)
    m = turn_model(seed=seed)
    init = equilibrium_state(m, heading_angle=0.0, speed=m.V)
    program = HeadingRamp(
        x0=init.positions[0],
        speed=m.V,
        heading0=0.0,
        heading1=math.pi / 2.0,
        t_start=10.0,
        duration=200.0,
    )
    traj = integrate_planar(m, init, program, dt=dt, horizon=horizon)
    csv = out / "turn.csv"
    write_planar_csv(csv, traj)
    outputs = [csv]
    n_samp = len(traj.times)
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        i = min(int(round(frac * (n_samp - 1))), n_samp - 1)
        snap = out / f"snapshot_t{traj.times[i]:.0f}.csv"
        write_snapshot_csv(snap, traj.state(i))
        outputs.append(snap)
    svg = out / "turn.svg"
    plot_planar_paths(traj, svg, title="turn maneuver")
    outputs.append(svg)
    errs = np.array([formation_error(traj.state(i), m) for i in range(n_samp)])
    mean_v = traj.velocities[-1].mean(axis=0)
    return outputs, {
        "formation_error_initial": float(errs[0]),
        "formation_error_peak": float(errs.max()),
        "formation_error_final": float(errs[-1]),
        "final_mean_heading_deg": float(math.degrees(math.atan2(mean_v[1], mean_v[0]))),
    }


def run(config: ExperimentConfig, threads=None):
    """Execute one experiment; returns (outputs, summary, manifest_path)."""
    t0 = time.perf_counter()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    kind = config.kind
    if kind == "step-response":
        outputs, summary = _run_step_response(config, out)
    elif kind == "frequency-sweep":
        outputs, summary = _run_frequency_sweep(config, out, threads)
    elif kind == "spectrum":
        outputs, summary = _run_spectrum(config, out)
    elif kind == "classify":
        outputs, summary = _run_classify(config, out)
    elif kind == "ledger":
        outputs, summary = _run_ledger(config, out)
    elif kind == "planar-turn":
        outputs, summary = _run_planar_turn(config, out)
    else:  # unreachable after validation
        raise ConfigError(f"unknown experiment kind {kind!r}")

    manifest = {
        "kind": kind,
        "config": {"experiment": {"kind": kind, "out": str(config.out)},
                   "model": config.model, "numeric": config.numeric},
        "flocklab_version": __version__,
        "numpy_version": np.__version__,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "outputs": [p.name for p in outputs],
        "summary": summary,
    }
    manifest_path = out / "manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return outputs, summary, manifest_path


def preset_configs(name, out_dir, scale=100):
    """Experiment configs for the built-in presets."""
    out_dir = Path(out_dir)
    if name == "fig2":
        return [
            ExperimentConfig(
                kind="step-response",
                out=str(out_dir / f"rho{rho:g}"),
                model={"n": scale, "rho": rho, "r": rho},
                numeric={"v_leader": 0.1, "dt": 0.01, "horizon": 1000.0},
            )
            for rho in PRESET_RHOS
        ]
    if name == "fig3":
        return [
            ExperimentConfig(
                kind="frequency-sweep",
                out=str(out_dir / f"rho{rho:g}"),
                model={"n": scale, "rho": rho, "r": rho},
                numeric={},
            )
            for rho in PRESET_RHOS
        ]
    if name == "fig4":
        return [
            ExperimentConfig(
                kind="spectrum",
                out=str(out_dir / f"rho{rho:g}"),
                model={"n": scale, "rho": rho, "r": rho},
                numeric={"near_zero_threshold": 1e-3},
            )
            for rho in PRESET_RHOS
        ]
    if name == "turn":
        return [
            ExperimentConfig(kind="planar-turn", out=str(out_dir), model={}, numeric={})
        ]
    raise ConfigError(f"unknown preset {name!r}; choose fig2, fig3, fig4 or turn")


def run_preset(name, out_dir, scale=100, threads=None):
    """Run a preset's experiments in sequence.

    Figure rendering is not thread-safe, so presets are serialized at
    the experiment level; parallelism lives inside each run (grid
    chunks of a sweep).
    """
    configs = preset_configs(name, out_dir, scale=scale)
    threads = worker_count() if threads is None else threads
    return [run(cfg, threads=threads) for cfg in configs]
