"""Exception hierarchy.

Three families map onto the CLI exit codes: configuration/usage problems (1),
bad or insufficient data (2) and numerical failures (3).
"""


class KinemeError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(KinemeError, ValueError):
    """Invalid parameter or configuration value."""


class DataError(KinemeError, ValueError):
    """Input data violates a precondition."""


class NumericalError(KinemeError, ArithmeticError):
    """An algorithm could not produce a finite, well-defined result."""


# configuration
class InvalidOverlap(ConfigError):
    pass


class RankTooLarge(ConfigError):
    pass


class LossHeadMismatch(ConfigError):
    pass


# data
class SeriesTooShort(DataError):
    pass


class MixedSegmentLength(DataError):
    pass


class EmptyInput(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class NegativeInput(DataError):
    pass


class TooFewPoints(DataError):
    pass


class InsufficientData(DataError):
    pass


class TrackTooShort(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class SymbolOutOfRange(DataError):
    pass


class WidthMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyScores(DataError):
    pass


class TooFewVideos(DataError):
    pass


class ChunkTooShort(DataError):
    pass


class EmptyFile(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, *names):
        self.names = list(names)
        super().__init__(", ".join(self.names))


class MalformedRow(DataError):
    def __init__(self, row, detail=""):
        self.row = row
        msg = f"row {row}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


# numerical
class DegenerateComponent(NumericalError):
    pass


class DegenerateCovariance(NumericalError):
    pass

