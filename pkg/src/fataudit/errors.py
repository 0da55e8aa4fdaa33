"""Exception hierarchy.

Three families map onto the CLI exit codes: :class:`ConfigError` (2),
:class:`DataError` (3) and :class:`AnalysisError` (5).  All of them derive
from :class:`FatAuditError` and from :class:`ValueError`, so callers that
only care about "bad input" can catch the builtin.
"""


class FatAuditError(ValueError):
    """Base class. ``stage`` names the pipeline step that failed, if known."""

    def __init__(self, message="", *, stage=None):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


class ConfigError(FatAuditError):
    """Invalid configuration or parameter value."""


class DataError(FatAuditError):
    """Input data violates a structural or typing requirement."""


class AnalysisError(FatAuditError):
    """An analysis could not be carried out on otherwise valid input."""


# -- data errors ------------------------------------------------------------
class EmptyInput(DataError):
    pass


class RaggedRows(DataError):
    pass


class DuplicateName(DataError):
    pass


class InvalidName(DataError):
    pass


class TypeMismatch(DataError):
    pass


class MissingValue(DataError):
    pass


class UnknownFeature(DataError):
    pass


class NonCategoricalGrouping(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class NotBinary(DataError):
    pass


class UnknownPositiveLabel(DataError):
    pass


class SingleGroup(DataError):
    pass


# -- parameter errors -------------------------------------------------------
class KTooLarge(ConfigError):
    pass


class UnknownMetric(ConfigError):
    pass


class NonPositiveWidth(ConfigError):
    pass


class EmptyRequest(ConfigError):
    pass


# -- analysis errors --------------------------------------------------------
class NoNumericRepresentation(AnalysisError):
    pass


class ShapeMismatch(AnalysisError):
    pass


class DegenerateWeights(AnalysisError):
    pass


class SingularSystem(AnalysisError):
    pass


class NotSupported(AnalysisError):
    """The predictor cannot perform the requested operation."""
