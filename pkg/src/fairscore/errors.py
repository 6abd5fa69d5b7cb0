"""Exception hierarchy for the fairscore toolkit.

Errors are grouped by where they surface: geometry/sampling preconditions,
dataset/schema problems, and estimator-level contract violations. The CLI
maps these groups onto exit codes (data errors vs computation errors).
"""


class FairscoreError(Exception):
    """Base class for all toolkit errors."""


class DegenerateVector(FairscoreError):
    """A zero (or effectively zero) vector where a direction is required."""


class InvalidRadius(FairscoreError):
    """Negative radius passed to a polar-to-cartesian conversion."""


class InvalidPlane(FairscoreError):
    """Rotation-plane index outside 1..d-1."""


class DimensionMismatch(FairscoreError):
    """Operands whose dimensions do not agree."""


class TooCoarse(FairscoreError):
    """CDF table requested with too few partitions to be trustworthy."""


class InvalidProbability(FairscoreError):
    """Probability argument outside [0, 1]."""


class RegionTooSmall(FairscoreError):
    """Rejection sampling exhausted its try budget.

    Signals the caller to switch to the inverse-CDF sampler, which has no
    acceptance-probability dependence.
    """


class DegenerateExchange(FairscoreError):
    """Ordering-exchange requested for two identical scoring vectors."""


class UnknownGroup(FairscoreError):
    """Fairness constraint references a group absent from the dataset."""


class InvalidConfidence(FairscoreError):
    """Confidence level alpha outside (0, 1)."""


class ReferenceOutsideRegion(FairscoreError):
    """Audited reference function lies outside the region of interest."""


class RegionNotMaterialized(FairscoreError):
    """Arrangement lookup hit a cell that captured no samples."""


class SchemaError(FairscoreError):
    """CSV header does not contain the configured columns."""


class ParseError(FairscoreError):
    """Non-numeric scoring cell; message names the offending row/column."""


class EmptyDataset(FairscoreError):
    """Input file contains a header but no data rows (or nothing at all)."""


class FormatError(FairscoreError):
    """Unsupported report serialization format."""
