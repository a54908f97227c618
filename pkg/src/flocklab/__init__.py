"""flocklab: a numerical laboratory for decentralized flock dynamics.

Linear chain models with leader forcing, frequency-response and
spectral analysis, size-scaling stability classification, an energy
bookkeeping ledger, and a planar orientable-flock integrator, all
driveable from TOML configs via the ``flocklab`` CLI.
"""

from ._version import __version__
from .classify import (
    ClassifierReport,
    ExponentEstimate,
    FamilyParams,
    FlockFamily,
    ScalingFit,
    classify,
    harmonic_exponent,
    impulse_exponent,
    scaling_fit,
    standard_family,
)
from .config import ExperimentConfig, parse_config, validate_config
from .dynamics import (
    SettleRule,
    SpectrumReport,
    Trajectory,
    companion_matrix,
    eigenvalues,
    follower_reduction,
    integrate,
    spectral_summary,
    step_response,
)
from .errors import (
    ConfigError,
    ConstructionError,
    CsvFormatError,
    EigensolveError,
    FlockError,
    IntegrationBlowUpError,
    NotStabilizedError,
    ResponseSingularError,
    SingularityError,
)
from .experiments import run, run_preset, turn_model
from .ledger import LedgerSeries, ledger, split, symmetric_spectrum
from .model import (
    FlockState,
    LinearFlockModel,
    StandardExampleParams,
    ValidationReport,
    build_custom,
    build_standard_example,
    galilean_shift,
    validate,
)
from .planar import (
    HeadingRamp,
    PlanarFlockModel,
    PlanarState,
    PlanarStraight,
    PlanarTrajectory,
    WaypointSpline,
    equilibrium_state,
    formation_error,
    heading,
    hexagon_formation,
    integrate_planar,
    planar_accel,
    sample_masses,
)
from .programs import ConstantVelocity, PiecewiseLinear, Sinusoid
from .response import ResponseTable, default_omega_grid, peak_gain, response_at, sweep

__all__ = [
    "__version__",
    "ClassifierReport",
    "ConfigError",
    "ConstantVelocity",
    "ConstructionError",
    "CsvFormatError",
    "EigensolveError",
    "ExperimentConfig",
    "ExponentEstimate",
    "FamilyParams",
    "FlockError",
    "FlockFamily",
    "FlockState",
    "HeadingRamp",
    "IntegrationBlowUpError",
    "LedgerSeries",
    "LinearFlockModel",
    "NotStabilizedError",
    "PiecewiseLinear",
    "PlanarFlockModel",
    "PlanarState",
    "PlanarStraight",
    "PlanarTrajectory",
    "ResponseSingularError",
    "ResponseTable",
    "ScalingFit",
    "SettleRule",
    "SingularityError",
    "Sinusoid",
    "SpectrumReport",
    "StandardExampleParams",
    "Trajectory",
    "ValidationReport",
    "WaypointSpline",
    "build_custom",
    "build_standard_example",
    "classify",
    "companion_matrix",
    "default_omega_grid",
    "eigenvalues",
    "equilibrium_state",
    "follower_reduction",
    "formation_error",
    "galilean_shift",
    "harmonic_exponent",
    "heading",
    "hexagon_formation",
    "impulse_exponent",
    "integrate",
    "integrate_planar",
    "ledger",
    "parse_config",
    "peak_gain",
    "planar_accel",
    "response_at",
    "run",
    "run_preset",
    "sample_masses",
    "scaling_fit",
    "spectral_summary",
    "split",
    "standard_family",
    "step_response",
    "sweep",
    "symmetric_spectrum",
    "turn_model",
    "validate",
    "validate_config",
]
