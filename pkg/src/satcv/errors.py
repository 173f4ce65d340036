"""Exception hierarchy shared by all modules."""


class SatCVError(Exception):
    """Base class for every error raised by satcv."""


class DomainError(SatCVError, ValueError):
    """A parameter lies outside its physical or mathematical domain."""


class PhysicalityError(SatCVError, ValueError):
    """A covariance matrix or density operator violates the uncertainty relation."""


class UnsupportedConfigurationError(SatCVError, ValueError):
    """The requested combination of options is not modelled."""


class ValidationError(SatCVError, ValueError):
    """Input data (tabulated distributions, configs) failed validation."""


class TruncationError(SatCVError, RuntimeError):
    """A Fock-space operation would push population past the photon cutoff."""


class TruncationWarning(UserWarning):
    """Population beyond the photon cutoff exceeds the configured tolerance."""


class HeraldImpossibleError(SatCVError, RuntimeError):
    """The requested heralding outcome has zero probability."""


class PreconditionError(SatCVError, ValueError):
    """A documented precondition of an operation does not hold."""


class ProtocolError(SatCVError, ValueError):
    """Inconsistent CV-QKD protocol description."""
