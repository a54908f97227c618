"""CSV schemas for every artifact the experiments emit.

Floats are written with repr() so identical runs produce byte-identical
files.  Readers raise CsvFormatError with the offending row number.
"""

import numpy as np

from .errors import CsvFormatError


def _fmt(x):
    return repr(float(x))


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _read_lines(path):
    try:
        with open(path) as fh:
            return [ln.rstrip("\n") for ln in fh]
    except FileNotFoundError:
        raise CsvFormatError(f"file not found: {path}") from None


def write_trajectory_csv(path, traj):
    """Schema: t,z0,...,zN,zdot0,...,zdotN"""
    n = traj.z.shape[1]
    header = ["t"] + [f"z{k}" for k in range(n)] + [f"zdot{k}" for k in range(n)]
    rows = (
        [_fmt(traj.times[i])]
        + [_fmt(v) for v in traj.z[i]]
        + [_fmt(v) for v in traj.zdot[i]]
        for i in range(len(traj.times))
    )
    _write_rows(path, header, rows)


def read_trajectory_csv(path):
    """Returns (times, Z, ZD); validates the schema row by row."""
    lines = _read_lines(path)
    if not lines or not lines[0]:
        raise CsvFormatError("empty file", row=1)
    header = lines[0].split(",")
    if header[0] != "t" or len(header) < 3 or (len(header) - 1) % 2 != 0:
        raise CsvFormatError(f"not a trajectory header: {lines[0]!r}", row=1)
    n = (len(header) - 1) // 2
    times, Z, ZD = [], [], []
    for rno, ln in enumerate(lines[1:], start=2):
        if not ln:
            continue
        parts = ln.split(",")
        if len(parts) != len(header):
            raise CsvFormatError(
                f"expected {len(header)} fields, got {len(parts)}", row=rno
            )
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise CsvFormatError(str(exc), row=rno) from None
        times.append(vals[0])
        Z.append(vals[1 : 1 + n])
        ZD.append(vals[1 + n :])
    if not times:
        raise CsvFormatError("no data rows", row=2)
    return np.asarray(times), np.asarray(Z), np.asarray(ZD)


def write_spectrum_csv(path, eigs):
    """Schema: re,im"""
    rows = ([_fmt(l.real), _fmt(l.imag)] for l in np.asarray(eigs, dtype=complex))
    _write_rows(path, ["re", "im"], rows)


def read_spectrum_csv(path):
    lines = _read_lines(path)
    if not lines or lines[0].split(",") != ["re", "im"]:
        raise CsvFormatError("not a spectrum header", row=1)
    out = []
    for rno, ln in enumerate(lines[1:], start=2):
        if not ln:
            continue
        parts = ln.split(",")
        if len(parts) != 2:
            raise CsvFormatError(f"expected 2 fields, got {len(parts)}", row=rno)
        try:
            out.append(complex(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise CsvFormatError(str(exc), row=rno) from None
    if not out:
        raise CsvFormatError("no data rows", row=2)
    return np.asarray(out)


def write_response_csv(path, table):
    """Schema: omega,re_a0,im_a0,...,re_aN,im_aN,gain_aN (tail follower gain)"""
    n = table.amplitudes.shape[1]
    header = ["omega"]
    for k in range(n):
        header += [f"re_a{k}", f"im_a{k}"]
    header.append(f"gain_a{n - 1}")
    rows = []
    for i, w in enumerate(table.omegas):
        row = [_fmt(w)]
        for k in range(n):
            a = table.amplitudes[i, k]
            row += [_fmt(a.real), _fmt(a.imag)]
        row.append(_fmt(table.gains[i, n - 1]))
        rows.append(row)
    _write_rows(path, header, rows)


def read_response_csv(path):
    """Returns (omegas, tail_gain) for plotting."""
    lines = _read_lines(path)
    if not lines or not lines[0].startswith("omega,"):
        raise CsvFormatError("not a response header", row=1)
    width = len(lines[0].split(","))
    omegas, gains = [], []
    for rno, ln in enumerate(lines[1:], start=2):
        if not ln:
            continue
        parts = ln.split(",")
        if len(parts) != width:
            raise CsvFormatError(f"expected {width} fields, got {len(parts)}", row=rno)
        try:
            omegas.append(float(parts[0]))
            gains.append(float(parts[-1]))
        except ValueError as exc:
            raise CsvFormatError(str(exc), row=rno) from None
    if not omegas:
        raise CsvFormatError("no data rows", row=2)
    return np.asarray(omegas), np.asarray(gains)


def write_ledger_csv(path, series):
    """Schema: t,lhs,rhs,residual"""
    rows = (
        [_fmt(series.times[i]), _fmt(series.lhs[i]), _fmt(series.rhs[i]), _fmt(series.residual[i])]
        for i in range(len(series.times))
    )
    _write_rows(path, ["t", "lhs", "rhs", "residual"], rows)


def write_classifier_csv(path, report):
    """Schema: N,ln_max_harmonic,ln_max_impulse plus a trailing summary line."""
    rows = [
        [str(n), _fmt(report.harmonic.per_N_values[i]), _fmt(report.impulse.per_N_values[i])]
        for i, n in enumerate(report.harmonic.N_list)
    ]
    with open(path, "w", newline="") as fh:
        fh.write("N,ln_max_harmonic,ln_max_impulse\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
        fh.write(
            f"# harmonic_slope={_fmt(report.harmonic.slope)}"
            f" impulse_slope={_fmt(report.impulse.slope)}"
            f" threshold={_fmt(report.slope_threshold)}"
            f" verdict={report.verdict}\n"
        )


def write_planar_csv(path, ptraj):
    """Schema: t,x0,y0,...,xN,yN,vx0,vy0,...,vxN,vyN"""
    n = ptraj.positions.shape[1]
    header = ["t"]
    header += [f"{c}{k}" for k in range(n) for c in ("x", "y")]
    header += [f"{c}{k}" for k in range(n) for c in ("vx", "vy")]
    rows = (
        [_fmt(ptraj.times[i])]
        + [_fmt(v) for v in ptraj.positions[i].ravel()]
        + [_fmt(v) for v in ptraj.velocities[i].ravel()]
        for i in range(len(ptraj.times))
    )
    _write_rows(path, header, rows)


def write_snapshot_csv(path, state):
    """One flock snapshot: agent,x,y,vx,vy"""
    rows = (
        [str(k)]
        + [_fmt(state.positions[k, 0]), _fmt(state.positions[k, 1])]
        + [_fmt(state.velocities[k, 0]), _fmt(state.velocities[k, 1])]
        for k in range(state.positions.shape[0])
    )
    _write_rows(path, ["agent", "x", "y", "vx", "vy"], rows)
