"""Exception types shared across the package."""


class CovbandError(Exception):
    """Base class for all covband-specific failures."""


class NotPositiveDefinite(CovbandError):
    """A matrix required to be positive definite failed its Cholesky test."""


class SingularDesign(CovbandError):
    """A regression block in the banded Cholesky fit is (numerically) singular."""


class BandwidthTooLarge(CovbandError):
    """Requested bandwidth exceeds what the sample size supports."""


class InsufficientData(CovbandError):
    """Too few observations for the requested resampling scheme."""


class SpectralDegeneracy(CovbandError):
    """Top eigenvalues are too close for per-eigenvalue projector comparison."""


class ZeroTrace(CovbandError):
    """Variance-captured ratio is undefined for a matrix with trace <= 0."""


class SingularBlock(CovbandError):
    """The conditioning block of a partitioned prediction is not invertible."""


class DataFormatError(CovbandError):
    """A CSV input violates the expected file format."""
