"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to, so library
callers and the command line agree on the failure taxonomy.
"""


class SvddError(Exception):
    exit_code = 1


class DataError(SvddError, ValueError):
    """Input data or configuration violates an invariant."""

    exit_code = 2


class EmptyData(DataError):
    pass


class NonFinite(DataError):
    pass


class BadWeights(DataError):
    pass


class RaggedRows(DataError):
    pass


class MissingWeights(DataError):
    pass


class MissingLabels(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class NotTwoDimensional(DataError):
    pass


class TooFewPoints(DataError):
    pass


class BadBandwidth(DataError):
    pass


class BadParams(DataError):
    pass


class ConfigError(DataError):
    pass


class BandwidthError(SvddError, ArithmeticError):
    """A bandwidth criterion is undefined for this data."""

    exit_code = 3


class DegenerateData(BandwidthError):
    pass


class LogDomain(BandwidthError):
    pass


class SolverError(SvddError):
    exit_code = 4


class Infeasible(SolverError):
    pass


class NoBoundarySV(SolverError):
    pass


class ModelFileError(SvddError):
    exit_code = 5


class AllFailed(SvddError):
    exit_code = 6
