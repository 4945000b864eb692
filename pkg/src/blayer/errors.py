"""Exception hierarchy.

Every error carries the process exit code the command line front end
should use when it escapes a subcommand.
"""


class BlayerError(Exception):
    exit_code = 1


class InvalidProfileError(BlayerError, ValueError):
    exit_code = 3


class GridError(BlayerError, ValueError):
    exit_code = 3


class ConfigurationError(BlayerError, ValueError):
    exit_code = 3


class ResolutionError(BlayerError):
    """Grid too coarse for the boundary layer at frequency k."""
    exit_code = 3

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class SpectralFailure(BlayerError):
    exit_code = 2


class NonConvergence(SpectralFailure):
    pass


class ZeroAverageError(SpectralFailure):
    pass


class DegenerateCurvature(SpectralFailure):
    pass


class InconsistentSpectralInputs(BlayerError):
    """Spectral data that do not satisfy their own defining relations."""
    exit_code = 1


class BlowUpError(BlayerError):
    exit_code = 1

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DemoInfeasible(BlayerError):
    exit_code = 1
