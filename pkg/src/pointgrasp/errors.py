"""Exception types shared across the package."""


class PointGraspError(Exception):
    """Base class for all package-specific errors."""


class EmptySampleDomain(PointGraspError):
    """Surface sampling requested on a mesh with no usable area."""


class NonWatertight(PointGraspError):
    """Mass properties requested on a mesh that does not enclose a volume."""


class DomainError(PointGraspError):
    """An argument is outside the documented domain of an operation."""


class HullFailure(PointGraspError):
    """Convex hull construction did not converge at the configured tolerance."""


class PlacementFailure(PointGraspError):
    """An object could not be placed in the scene within the attempt budget."""


class EmptyCapture(PointGraspError):
    """No valid pixels survived the capture crop."""


class EmptyInput(PointGraspError):
    """An operation that needs at least one point received none."""


class ConfigMismatch(PointGraspError):
    """Network weights or inputs do not match the network configuration."""


class NonFiniteLoss(PointGraspError):
    """Training produced a NaN/inf loss; carries the offending batch id."""

    def __init__(self, message, batch_id=None):
        super().__init__(message)
        self.batch_id = batch_id


class ConfigError(PointGraspError):
    """A config file contains unknown keys or ill-typed values."""
