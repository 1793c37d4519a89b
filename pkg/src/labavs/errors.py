"""Exception hierarchy for the labavs package.

Two broad families matter to callers: configuration problems (bad arguments,
unparseable input) and numerical problems that arise from the data itself
(empty kernel windows, rank-deficient local designs, non-convergent solvers).
The CLI maps the former to exit status 2 and the latter to exit status 1.
"""


class LabavsError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(LabavsError):
    """An argument or option is out of its documented domain."""


class DimensionMismatchError(LabavsError):
    """Vectors or arrays that must share a dimension do not."""


class NumericalError(LabavsError):
    """Base class for data-driven numerical failures (CLI exit status 1)."""


class DegenerateNeighborhoodError(NumericalError):
    """A kernel window holds too few points, or the local design is singular.

    Parameters
    ----------
    message : str
    n_in_window : int
        Number of observations with strictly positive kernel weight at the
        query point when the failure occurred.
    """

    def __init__(self, message, n_in_window=0):
        super().__init__(f"{message} ({n_in_window} points in window)")
        self.n_in_window = int(n_in_window)


class DegenerateGridError(NumericalError):
    """The grid cannot be built (zero data range, or absurd point count)."""


class ConvergenceError(NumericalError):
    """An iterative solver hit its iteration cap before its tolerance.

    Carries the final duality gap so callers can judge how close it got.
    """

    def __init__(self, message, gap=float("nan")):
        super().__init__(f"{message} (duality gap {gap:.3g})")
        self.gap = float(gap)


class EvaluationError(NumericalError):
    """A cross-validation or evaluation protocol could not produce a score."""


class ParseError(ConfigurationError):
    """A data file could not be parsed; the message names row and column."""
