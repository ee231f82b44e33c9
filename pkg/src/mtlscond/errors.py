"""Exception hierarchy shared by every module of the package."""


class MtlsError(Exception):
    """Base class for all errors raised by :mod:`mtlscond`."""


class RankDeficient(MtlsError):
    """``A`` is numerically rank deficient."""


class NonGeneric(MtlsError):
    """The genericity condition fails, so the MTLS solution is not unique."""


class ConsistentSystem(MtlsError):
    """``Ax = b`` is consistent; the residual reflector is undefined."""


class NoConvergence(MtlsError):
    """An SVD failed to converge."""


class SizeOverflow(MtlsError):
    """A dense Kronecker-sized object would exceed the configured cap."""


class DimensionError(MtlsError, ValueError):
    """Inputs have inconsistent or unsupported shapes."""
