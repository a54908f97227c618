"""Work-energy bookkeeping along flock trajectories.

Split each Laplacian into its symmetric and antisymmetric parts,
L = L^S + L^A.  Along any solution of zddot = f L_rho z + g L_r zdot
(leaders included via their zero rows, so a coasting leader is just
part of the vector) the mechanical energy

    E(t) = (1/2) [ (zdot, zdot) - f (L_rho^S z, z) ]

changes only through two work terms:

    E(t) = E(0) + g * int_0^t (L_r^S zdot, zdot)
                + f * int_0^t (L_rho^A z, zdot).

The identity is an algebraic consequence of the split; it holds for
every zero-row-sum coupling pair, regardless of topology.  `ledger`
instruments it along a recorded trajectory with trapezoid quadrature
on the sample grid, so the reported residual is pure discretization
error and shrinks ~dt^2 under refinement.  Note the identity as stated
is for unforced dynamics: leaders may coast (zddot = 0) but externally
accelerated leaders inject unaccounted work.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EigensolveError
from .model import LinearFlockModel

SYMMETRY_TOL = 1e-12


@dataclass
class LedgerSeries:
    """Energy ledger sampled along a trajectory; residual = lhs - rhs."""

    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residual: np.ndarray


def split(L):
    """Symmetric/antisymmetric parts: L_S = (L + L^T)/2, L_A = (L - L^T)/2."""
    L = np.asarray(L, dtype=float)
    L_S = 0.5 * (L + L.T)
    L_A = 0.5 * (L - L.T)
    return L_S, L_A


def ledger(traj, m: LinearFlockModel) -> LedgerSeries:
    """Evaluate the work-energy identity on a recorded trajectory.

    The trajectory must carry full states for model ``m`` (all agents,
    leaders included).  Integrals use trapezoid quadrature on the
    recorded grid; run with record_every = 1 when the residual itself
    is the quantity of interest.
    """
    Z = np.asarray(traj.z, dtype=float)
    ZD = np.asarray(traj.zdot, dtype=float)
    t = np.asarray(traj.times, dtype=float)
    if Z.ndim != 2 or Z.shape[1] != m.n_agents:
        raise ValueError(
            f"trajectory has {Z.shape[-1] if Z.ndim == 2 else '?'} agents, "
            f"model has {m.n_agents}"
        )
    LpS, LpA = split(m.L_rho)
    LrS, _ = split(m.L_r)

    lhs = 0.5 * (
        np.einsum("ij,ij->i", ZD, ZD) - m.f * np.einsum("ij,ij->i", Z @ LpS, Z)
    )
    # power terms; note L^A enters as (L_rho^A z, zdot)
    p = m.g * np.einsum("ij,ij->i", ZD @ LrS, ZD) + m.f * np.einsum(
        "ij,ij->i", Z @ LpA.T, ZD
    )
    seg = 0.5 * (p[1:] + p[:-1]) * np.diff(t)
    work = np.concatenate([[0.0], np.cumsum(seg)])
    rhs = lhs[0] + work
    return LedgerSeries(times=t, lhs=lhs, rhs=rhs, residual=lhs - rhs)


def symmetric_spectrum(L_S) -> np.ndarray:
    """Ascending real eigenvalues of a symmetric matrix.

    Uses the symmetric eigensolver (tridiagonalization + implicit QL/QR);
    refuses input whose asymmetry exceeds 1e-12.
    """
    L_S = np.asarray(L_S, dtype=float)
    if L_S.ndim != 2 or L_S.shape[0] != L_S.shape[1]:
        raise EigensolveError(f"matrix must be square, got shape {L_S.shape}")
    asym = float(np.abs(L_S - L_S.T).max()) if L_S.size else 0.0
    if asym > SYMMETRY_TOL:
        raise EigensolveError(
            f"matrix asymmetry {asym:.3e} exceeds tolerance {SYMMETRY_TOL:g}"
        )
    try:
        return np.linalg.eigvalsh(L_S)
    except np.linalg.LinAlgError as exc:
        raise EigensolveError(f"symmetric eigensolver failed: {exc}") from exc
