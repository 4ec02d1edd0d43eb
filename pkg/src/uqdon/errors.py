"""Exception hierarchy.

The CLI maps these onto exit codes: ConfigError -> 2, FormatError -> 3,
NumericalError -> 4. Everything derives from UqdonError so callers can
catch library failures with a single except clause.
"""


class UqdonError(Exception):
    """Base class for all library errors."""


class ConfigError(UqdonError):
    """Invalid configuration, architecture, or request (CLI exit code 2)."""


class ShapeError(ConfigError):
    """Array dimensions incompatible with the declared architecture."""


class FormatError(UqdonError):
    """Malformed or incompatible on-disk artifact (CLI exit code 3)."""


class CorruptCheckpointError(FormatError):
    """Checkpoint or dataset file failed its integrity check."""


class NumericalError(UqdonError):
    """Numerical failure during generation or training (CLI exit code 4)."""


class TrainingDivergedError(NumericalError):
    """Non-finite loss or gradient encountered during optimization."""


class SolverUnstableError(NumericalError):
    """A forward solver blew up; retry with a finer time step."""


class NotPositiveDefiniteError(NumericalError):
    """Covariance factorization failed even after jitter escalation."""


class DegenerateTargetError(NumericalError):
    """An output function has zero norm, so relative metrics are undefined."""


class UndefinedCorrelationError(NumericalError):
    """Rank correlation is undefined (a column is constant)."""
