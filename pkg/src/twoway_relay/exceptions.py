"""Exception types raised by the beamforming routines."""


class DegenerateChannelError(ValueError):
    """Channel realization is too ill-conditioned for the requested operation."""


class InfeasibleError(RuntimeError):
    """SINR targets cannot be met by any beamformer."""


class SolverError(RuntimeError):
    """Cone solver did not converge or returned a point violating the constraints."""


class ConsistencyError(AssertionError):
    """Two independent computations of the same quantity disagree."""


class ConfigError(ValueError):
    """Invalid scenario configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
