class AnalysisError(Exception):
    """Base class for every failure the analytics services raise on purpose."""


class SchemaError(AnalysisError):
    """The CSV header does not match the assessment schema."""


class EmptyDataError(AnalysisError):
    """A computation was asked for data that is not there (no records, no pairs)."""


class QuarterMismatchError(AnalysisError):
    """A quarter-specific result was used with data from another quarter."""


class ConsistencyError(AnalysisError):
    """A computed identity or bound did not hold."""


class SpecError(AnalysisError):
    """A synthetic cohort spec cannot produce a cohort."""


class ReportError(AnalysisError):
    """Report output could not be written."""
