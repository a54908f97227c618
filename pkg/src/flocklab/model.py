"""Linear flock models on communication Laplacians.

A flock is a set of agents, indexed 0..N, that regulate their motion
using only relative measurements of neighbors.  Writing x_k for the
position of agent k and h_k for its slot in the desired formation, the
deviation coordinates z_k = x_k - h_k obey

    zddot = f * L_rho * z + g * L_r * zdot

where L_rho weighs relative-position measurements and L_r relative
velocity measurements.  Both matrices are "Laplacians" in the flock
sense: every row belonging to an autonomous agent sums to zero, so a
uniform translation or a uniform velocity offset produces no feedback.
As a consequence z(t) = Z + V*t solves the system for any constants
(Z, V); that two-parameter family is the invariance the models are
built around, and `galilean_shift` moves states along it.

Leaders are exempt from feedback.  Their rows are identically zero and
their motion is prescribed externally (boundary data); with no forcing
they coast at constant velocity.

The standard example is a chain of N followers behind a single leader,
agent 0.  Interior follower k splits its position attention between
its forward neighbor k-1 (weight 1-rho) and its backward neighbor k+1
(weight rho); the last agent has nobody behind it and looks only
forward.  Velocity attention uses the weight r in place of rho.  Gains
f < 0, g < 0 make the unforced chain asymptotically stable.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError

# Construction is exact arithmetic on the given decimals; this absorbs
# representation error only.
ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class StandardExampleParams:
    """Parameters of the single-leader nearest-neighbor chain.

    N is the follower count (the model has N+1 agents).  rho and r are
    the backward attention weights for position and velocity and must
    lie strictly inside (0, 1).  The gains default to the reference
    values f = -1, g = -2 used throughout the experiments.
    """

    N: int
    rho: float
    r: float
    f: float = -1.0
    g: float = -2.0

    def __post_init__(self):
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 1):
            raise ConstructionError(f"N must be a positive integer, got {self.N!r}")
        if not 0.0 < self.rho < 1.0:
            raise ConstructionError(f"rho must lie in the open interval (0,1), got {self.rho!r}")
        if not 0.0 < self.r < 1.0:
            raise ConstructionError(f"r must lie in the open interval (0,1), got {self.r!r}")
        if not self.f < 0.0:
            raise ConstructionError(f"f must be negative, got {self.f!r}")
        if not self.g < 0.0:
            raise ConstructionError(f"g must be negative, got {self.g!r}")


@dataclass(frozen=True, eq=False)
class LinearFlockModel:
    """A validated linear flock: Laplacian pair, gains, formation.

    Instances are immutable; the arrays are marked read-only so a model
    can be shared freely across worker threads.
    """

    n_agents: int
    leaders: frozenset
    L_rho: np.ndarray
    L_r: np.ndarray
    f: float
    g: float
    h: np.ndarray

    def __post_init__(self):
        for name in ("L_rho", "L_r", "h"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def followers(self):
        """Non-leader agent indices, ascending."""
        return [k for k in range(self.n_agents) if k not in self.leaders]


@dataclass(frozen=True)
class FlockState:
    """Instantaneous state: time plus per-agent deviation and velocity."""

    t: float
    z: np.ndarray
    zdot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        object.__setattr__(self, "zdot", np.asarray(self.zdot, dtype=float))
        if self.z.shape != self.zdot.shape or self.z.ndim != 1:
            raise ConstructionError(
                f"state arrays must be equal-length vectors, got {self.z.shape} and {self.zdot.shape}"
            )


@dataclass
class ValidationReport:
    """Diagnostic summary produced by `validate` (never raises)."""

    row_sums_rho: np.ndarray
    row_sums_r: np.ndarray
    leader_nonzeros: list = field(default_factory=list)  # (matrix, row, col, value)
    warnings: list = field(default_factory=list)
    well_formed: bool = True


def _standard_laplacian(N, w):
    """Chain Laplacian: interior rows [-(1-w), +1, -w], closing row [-1, +1]."""
    L = np.zeros((N + 1, N + 1))
    for k in range(1, N):
        L[k, k - 1] = -(1.0 - w)
        L[k, k] = 1.0
        L[k, k + 1] = -w
    L[N, N - 1] = -1.0
    L[N, N] = 1.0
    return L


def build_standard_example(p: StandardExampleParams) -> LinearFlockModel:
    """Build the single-leader chain model.

    Row 0 of both Laplacians is zero (agent 0 leads), interior rows
    carry the (1-rho, rho) split, and the last row pins agent N to its
    forward neighbor alone.  Default offsets h_k = -k place the flock
    at unit spacing with the leader rightmost, so a flock of 100
    followers is initially 100 units wide.
    """
    L_rho = _standard_laplacian(p.N, p.rho)
    L_r = _standard_laplacian(p.N, p.r)
    h = -np.arange(p.N + 1, dtype=float)
    return LinearFlockModel(
        n_agents=p.N + 1,
        leaders=frozenset({0}),
        L_rho=L_rho,
        L_r=L_r,
        f=p.f,
        g=p.g,
        h=h,
    )


def build_custom(weights_rho, weights_r, leaders, f, g, h=None) -> LinearFlockModel:
    """Assemble a model from neighbor weight tables.

    ``weights_rho`` and ``weights_r`` map an agent index to a mapping
    {neighbor: weight}; weights are the positive attention coefficients,
    stored as negated off-diagonal entries with the diagonal set to the
    row's weight sum, which enforces the zero row sum exactly.  Rows
    supplied for leaders are ignored (leader rows stay zero).  Every
    non-leader needs at least one position neighbor, otherwise it would
    be uncontrolled; a velocity row may be empty (no damping on that
    agent).

    ``h`` fixes the agent count; when omitted the count is inferred
    from the largest index mentioned and offsets default to -k.
    """
    leaders = frozenset(int(k) for k in leaders)
    if not leaders:
        raise ConstructionError("leaders must be nonempty")

    mentioned = set(leaders)
    for table in (weights_rho, weights_r):
        for k, row in table.items():
            mentioned.add(int(k))
            mentioned.update(int(j) for j in row)
    n = len(h) if h is not None else max(mentioned) + 1
    if n < 2:
        raise ConstructionError("a flock needs at least 2 agents")
    if max(mentioned) >= n:
        raise ConstructionError(
            f"agent index {max(mentioned)} out of range for {n} agents"
        )

    def assemble(table, require_nonempty):
        L = np.zeros((n, n))
        for k, row in table.items():
            k = int(k)
            if k in leaders:
                continue
            for j, w in row.items():
                j = int(j)
                if j == k:
                    raise ConstructionError(f"agent {k} lists itself as a neighbor")
                L[k, j] = -float(w)
            L[k, k] = -L[k].sum()  # diagonal = negated off-diagonal sum
        if require_nonempty:
            for k in range(n):
                if k not in leaders and not np.any(L[k]):
                    raise ConstructionError(
                        f"non-leader agent {k} has no neighbors (uncontrolled)"
                    )
        return L

    L_rho = assemble(weights_rho, require_nonempty=True)
    L_r = assemble(weights_r, require_nonempty=False)
    if h is None:
        h = -np.arange(n, dtype=float)
    return LinearFlockModel(
        n_agents=n,
        leaders=leaders,
        L_rho=L_rho,
        L_r=L_r,
        f=float(f),
        g=float(g),
        h=np.asarray(h, dtype=float),
    )


def validate(m: LinearFlockModel) -> ValidationReport:
    """Check structural invariants; diagnostic only, never raises.

    A model is well-formed iff every non-leader row of both Laplacians
    sums to zero within 1e-12 and every leader row is identically zero.
    Positive gains are flagged as a warning, not an error: the usual
    sign convention f < 0, g < 0 is what stabilizes the standard
    family, but gain design in general is open territory.
    """
    report = ValidationReport(
        row_sums_rho=m.L_rho.sum(axis=1),
        row_sums_r=m.L_r.sum(axis=1),
    )
    for name, L in (("L_rho", m.L_rho), ("L_r", m.L_r)):
        for k in range(m.n_agents):
            if k in m.leaders:
                for j in np.nonzero(L[k])[0]:
                    report.leader_nonzeros.append((name, k, int(j), L[k, j]))
                    report.well_formed = False
            elif abs(L[k].sum()) >= ROW_SUM_TOL:
                report.well_formed = False
    if m.f >= 0 or m.g >= 0:
        report.warnings.append(
            f"gains f = {m.f:g}, g = {m.g:g} are not stabilized by sign convention"
        )
    return report


def galilean_shift(s: FlockState, Z: float, V: float) -> FlockState:
    """Shift a state along the invariant family: z += Z + V*t, zdot += V.

    Because all feedback rows sum to zero, the shifted state produces
    exactly the same accelerations as the original.
    """
    return FlockState(t=s.t, z=s.z + Z + V * s.t, zdot=s.zdot + V)
