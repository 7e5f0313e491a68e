"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can emit
structured error JSON without string matching.
"""


class OrbitQSLError(Exception):
    code = "error"


class ValidationError(OrbitQSLError, ValueError):
    code = "validation"


class NotHermitian(ValidationError):
    code = "not_hermitian"


class NotUnitary(ValidationError):
    code = "not_unitary"


class NotPSD(ValidationError):
    code = "not_psd"


class TraceNotOne(ValidationError):
    code = "trace_not_one"


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class BlochOutOfBall(ValidationError):
    code = "bloch_out_of_ball"


class EmptySchedule(ValidationError):
    code = "empty_schedule"


class IncompleteKraus(ValidationError):
    code = "incomplete_kraus"


class ZeroMeanEnergy(ValidationError):
    code = "zero_mean_energy"


class DegenerateSpectrum(ValidationError):
    code = "degenerate_spectrum"


class DegenerateDenominator(ValidationError):
    code = "degenerate_denominator"


class InsufficientSettings(ValidationError):
    code = "insufficient_settings"


class DegenerateFit(ValidationError):
    code = "degenerate_fit"


class ParseError(OrbitQSLError):
    code = "parse_error"
