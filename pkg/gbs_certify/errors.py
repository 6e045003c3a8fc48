"""Exceptions raised by gbs_certify.

Every error derives from :class:`GbsCertifyError`, itself a ``ValueError``, so
callers catching ``ValueError`` see all domain failures.
"""


class GbsCertifyError(ValueError):
    """Base class for all domain errors."""


class DimensionError(GbsCertifyError):
    """Matrix or vector dimensions are invalid or disagree."""


class SymmetryError(GbsCertifyError):
    """A matrix that must be symmetric is not."""


class ParameterError(GbsCertifyError):
    """A physical or model parameter is out of range."""


class EncodingInfeasibleError(GbsCertifyError):
    """The requested mean photon number cannot be reached under the squeezing cap."""


class SizeLimitError(GbsCertifyError):
    """An exponential-cost evaluation or an enumeration is too large."""


class OrbitError(GbsCertifyError):
    """An orbit identifier is invalid for its mode count."""


class AssemblyError(GbsCertifyError):
    """Orbit estimates cannot be assembled into a feature vector."""


class SectorMismatchError(GbsCertifyError):
    """Two feature vectors belong to different photon sectors."""


class NormalizationError(GbsCertifyError):
    """A zero feature vector cannot be normalized."""


class DegenerateDatasetError(GbsCertifyError):
    """The data cannot support the requested statistic or training."""


class ProtocolError(GbsCertifyError):
    """The generalization protocol was configured inconsistently."""


class StageDependencyError(GbsCertifyError):
    """An upstream artifact required by a stage is missing."""

    def __init__(self, message: str, missing: str | None = None):
        super().__init__(message)
        self.missing = missing


class ArtifactDigestError(GbsCertifyError):
    """An artifact's embedded config digest does not match the config."""
