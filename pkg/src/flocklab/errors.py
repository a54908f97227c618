"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2,
numeric failures (blow-up, singularities, eigensolver trouble) exit 3.
"""


class FlockError(Exception):
    """Base class for all package errors."""


class ConstructionError(FlockError):
    """A model parameter or weight table violates its domain."""


class ConfigError(FlockError):
    """An experiment configuration fails to parse or validate."""


class CsvFormatError(FlockError):
    """A CSV file does not conform to the expected schema.

    Carries the offending row number when known.
    """

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class IntegrationBlowUpError(FlockError):
    """State became non-finite during integration."""

    def __init__(self, t):
        super().__init__(f"state blew up (NaN or overflow) at t = {t:g}")
        self.t = t


class EigensolveError(FlockError):
    """The dense eigensolver failed to converge.

    ``partial`` holds whatever eigenvalues were recovered (the LAPACK
    drivers used here do not expose partial spectra, so it is usually
    None; the field exists so callers can rely on the attribute).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ResponseSingularError(FlockError):
    """The harmonic-response system is singular at the requested frequency."""

    def __init__(self, omega):
        super().__init__(f"response system is singular at omega = {omega:g}")
        self.omega = omega


class NotStabilizedError(FlockError):
    """A family member has spectrum reaching into the right half-plane."""

    def __init__(self, N, abscissa):
        super().__init__(
            f"family member N = {N} is not stabilized "
            f"(spectral abscissa {abscissa:+.3e})"
        )
        self.N = N
        self.abscissa = abscissa


class SingularityError(FlockError):
    """A heading is requested for a (near-)zero velocity."""

    def __init__(self, agent=None, t=None, speed=None):
        parts = ["heading singularity: speed below epsilon_v"]
        if agent is not None:
            parts.append(f"agent {agent}")
        if t is not None:
            parts.append(f"t = {t:g}")
        if speed is not None:
            parts.append(f"|v| = {speed:.3e}")
        super().__init__(", ".join(parts))
        self.agent = agent
        self.t = t
        self.speed = speed
