"""Exception hierarchy.

Every error raised by the package derives from :class:`DPSeriesError`, and
the ones caused by bad arguments also derive from :class:`ValueError`.
"""


class DPSeriesError(Exception):
    """Base class for all package errors."""


class InvalidSeries(DPSeriesError, ValueError):
    """A count series violates one of its invariants."""


class EmptySeries(InvalidSeries):
    pass


class NegativeValue(InvalidSeries):
    pass


class NonIntegerCount(InvalidSeries):
    pass


class NonIntegerStride(DPSeriesError, ValueError):
    pass


class LengthMismatch(DPSeriesError, ValueError):
    pass


class InvalidSigma(DPSeriesError, ValueError):
    pass


class InvalidKernel(DPSeriesError, ValueError):
    pass


class InvalidParams(DPSeriesError, ValueError):
    pass


class InvalidStats(InvalidParams):
    pass


class AlphaBelowSamplingRate(InvalidParams):
    """The Chernoff tail is only valid for ``alpha**2 >= p``."""


class InvalidEpsilon(InvalidParams):
    pass


class InvalidK(InvalidParams):
    pass


class InvalidC(InvalidParams):
    pass


class Unsatisfiable(DPSeriesError):
    """No parameter in the admissible range meets the requested target."""


class EmptySubsample(DPSeriesError):
    """The Poisson draw kept no time step.

    The draw is independent of the data, so reporting this leaks nothing.
    """


class EmptyDraw(DPSeriesError, ValueError):
    pass


class ParseError(DPSeriesError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GapInIndex(ParseError):
    pass
