"""Exception types raised by the crsp library."""


class CrspError(Exception):
    """Base class for all errors raised by this package."""


class DuplicateWireError(CrspError):
    """Two states being combined share a wire label."""


class UnknownWireError(CrspError):
    """An operation referenced a wire the state does not carry."""


class WireMismatchError(CrspError):
    """Two states cover different wire sets where identical sets are required."""


class DimensionMismatchError(CrspError):
    """An operator or basis has the wrong dimension for its target wires."""


class NotNormalizedError(CrspError):
    """A state vector's norm is too far from 1 to accept."""


class InvalidCoefficientsError(CrspError):
    """Canonical coefficients are negative, out of range, or not normalized."""


class NotRealCoefficientsError(CrspError):
    """A real-coefficient construction was given complex amplitudes."""


class DegenerateTargetError(CrspError):
    """A two-qubit target has no weight in one half of its coefficients."""


class DegenerateSchmidtError(CrspError):
    """A Schmidt pair is too degenerate to build a correction from."""


class NoCorrectionExistsError(CrspError):
    """The measurement outcome admits no unitary correction for this class."""


class ChannelNotControllableError(CrspError):
    """The channel cannot be steered by the controller's measurement."""
