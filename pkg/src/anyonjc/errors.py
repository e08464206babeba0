"""Exception types raised across the package.

Everything derives from :class:`SimulationError` so callers can catch the
whole family at once; the CLI maps subfamilies onto exit codes.
"""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class UnknownMode(SimulationError, ValueError):
    """A mode id does not exist in the basis at hand."""


class SectorOverflow(SimulationError):
    """An operator element leaves the truncated sector set in strict mode."""


class NoQubit(SimulationError, ValueError):
    """A qubit operator was requested on a basis without the two-level system."""


class NormTooLarge(SimulationError):
    """Matrix exponential argument is outside the supported norm range."""


class BadSubsystem(SimulationError, ValueError):
    """Partial trace asked to keep an invalid subsystem combination."""


class DegenerateCoupling(SimulationError, ValueError):
    """Dressed-state construction with a vanishing coupling and no free-mode flag."""


class WrongExcitation(SimulationError, ValueError):
    """The exchange-statistics factor is only defined for the (0, 0) doublet."""


class BadSolidAngle(SimulationError, ValueError):
    """Solid angle outside [0, 4*pi]."""


class BadTheta(SimulationError, ValueError):
    """Polar angle outside [0, pi], or too few path samples."""


class DegeneratePath(SimulationError, ValueError):
    """Loop vertices that do not define an oriented spherical polygon."""


class BasisMismatch(SimulationError, ValueError):
    """Two objects built over different bases were combined."""


class VanishingOverlap(SimulationError):
    """Consecutive transported states nearly orthogonal; path too coarse."""


class NormDrift(SimulationError):
    """State norm drifted beyond tolerance during time evolution."""


class NonAdiabatic(SimulationError):
    """Leakage out of the followed eigenstate exceeded the threshold."""


class CalibrationAmbiguous(SimulationError):
    """Sign calibration loop produced a phase too small to fix a sign."""


class CycleMismatch(SimulationError):
    """Ramsey wait time is not an integer number of dynamical cycles."""


class TruncationWarning(UserWarning):
    """A truncated series or basis dropped terms above the noise floor."""
