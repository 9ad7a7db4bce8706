"""Exception types shared across the package."""


class GlppError(Exception):
    """Base class for every error raised by this library."""


class DimensionError(GlppError):
    """Array shapes or ambient/subspace dimensions are inconsistent."""


class ParameterError(GlppError):
    """A scalar argument is outside its documented range."""


class RankDeficient(GlppError):
    """Input matrix does not carry the rank the operation needs."""


class NormalizationDegenerate(GlppError):
    """QR normalization hit an ill-conditioned triangular factor."""


class SolverFailure(GlppError):
    """The (generalized) eigenvalue solve could not be completed."""


class LengthMismatch(GlppError):
    """Paired sequences differ in length."""


class ParseError(GlppError):
    """An on-disk record is malformed."""


class ValidationError(GlppError):
    """Data violates a documented invariant."""


class VersionError(GlppError):
    """On-disk record carries an unsupported format version."""
