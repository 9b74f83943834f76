"""
exception types for scalescope.

every failure the analysis chain can report derives from `ScalescopeError`,
and additionally from the closest builtin so plain `except ValueError` keeps
working for library users.
"""

from __future__ import annotations


class ScalescopeError(Exception):
    """
    base class for all scalescope errors.

    attributes:
        `module: str`
            short name of the pipeline module that raised the error
        `ticker: str | None`
            scrip being processed when the error was raised, if any
        `scale: int | None`
            wavelet scale being processed when the error was raised, if any
    """

    module: str = "scalescope"
    ticker: str | None = None
    scale: int | None = None

    def describe(self) -> str:
        """
        Render the error with its module and ticker/scale context.

        returns: `str`
            e.g. "wavelet: scale 13 outside usable range 1..12 (ticker=IBM, scale=13)"
        """
        context = [
            f"{name}={value}"
            for name, value in (("ticker", self.ticker), ("scale", self.scale))
            if value is not None
        ]
        suffix = f" ({', '.join(context)})" if context else ""
        return f"{self.module}: {self}{suffix}"


class ConfigError(ScalescopeError, ValueError):
    """invalid or unparsable configuration."""

    module = "config"


class IngestError(ScalescopeError, ValueError):
    """fatal price-panel loading failure (missing file, columns, too few tickers)."""

    module = "ingest"


class DegenerateSeriesError(ScalescopeError, ArithmeticError):
    """
    a price series with zero volatility.

    attributes:
        `ticker: str | None`
            offending ticker, when known
    """

    module = "ingest"

    def __init__(self, message: str, ticker: str | None = None) -> None:
        super().__init__(message)
        self.ticker = ticker


class InvalidFilterError(ScalescopeError, ValueError):
    """a daubechies index that is odd or outside 2..20."""

    module = "wavelet"


class SignalSizeError(ScalescopeError, ValueError):
    """a signal shorter than the filter support or too short for the requested depth."""

    module = "wavelet"


class ScaleRangeError(ScalescopeError, ValueError):
    """
    a wavelet scale outside 1..floor(log2 length).

    attributes:
        `scale: int`
            requested scale
        `max_scale: int`
            largest admissible scale for the signal
    """

    module = "wavelet"

    def __init__(self, scale: int, max_scale: int) -> None:
        super().__init__(f"scale {scale} outside usable range 1..{max_scale}")
        self.scale = scale
        self.max_scale = max_scale


class InconsistentDecompositionError(ScalescopeError, ValueError):
    """a decomposition inverted with a different filter or broken level metadata."""

    module = "wavelet"


class InsufficientDataError(ScalescopeError, ValueError):
    """a fluctuation series too short for the requested segment size."""

    module = "mfdfa"


class DegenerateSegmentError(ScalescopeError, ArithmeticError):
    """
    a zero-variance segment met with a negative moment order.

    attributes:
        `segment: int`
            index of the offending segment (forward segments first)
        `s: int`
            segment size
    """

    module = "mfdfa"

    def __init__(self, segment: int, s: int, q: float) -> None:
        super().__init__(f"segment {segment} (s={s}) has zero variance, q={q:g} undefined")
        self.segment = segment
        self.s = s
        self.q = q


class FitRangeError(ScalescopeError, ValueError):
    """fewer than four segment sizes inside the requested fit range."""

    module = "mfdfa"


class GridError(ScalescopeError, ValueError):
    """a q grid that is not uniform or has too few points."""

    module = "mfdfa"


class DegenerateScripError(ScalescopeError, ArithmeticError):
    """
    a zero-variance fluctuation row entering a correlation matrix.

    attributes:
        `ticker: str`
            offending ticker
    """

    module = "rmt"

    def __init__(self, ticker: str) -> None:
        super().__init__(f"fluctuation row for '{ticker}' has zero variance")
        self.ticker = ticker


class EigenSolverError(ScalescopeError, ArithmeticError):
    """jacobi rotations failed to converge within the sweep budget."""

    module = "rmt"


class ConstraintError(ScalescopeError, ValueError):
    """an argument outside an operation's domain, such as marchenko-pastur q < 1."""

    module = "rmt"


class SegmentSizeError(ConstraintError):
    """a segment size outside 4..length / 4."""

    module = "mfdfa"


class UnfoldingError(ScalescopeError, ValueError):
    """an unfolding fit that is ill-conditioned or has too few eigenvalues."""

    module = "rmt"


class GoeFitError(ScalescopeError, RuntimeError):
    """
    a spacing-density fit that diverged or met a degenerate histogram.

    attributes:
        `residual: float | None`
            residual sum of squares at the last iterate, when available
    """

    module = "rmt"

    def __init__(self, message: str, residual: float | None = None) -> None:
        super().__init__(message)
        self.residual = residual


class SynthParameterError(ScalescopeError, ValueError):
    """a synthetic generator called with out-of-range parameters."""

    module = "synth"
