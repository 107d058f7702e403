"""Exception types shared across the package."""


class BeaconPursuitError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(BeaconPursuitError, ValueError):
    """A parameter or input value is outside its admissible domain."""


class DegenerateVector(BeaconPursuitError, ValueError):
    """A vector is too short to normalize reliably."""


class DegenerateFrame(BeaconPursuitError, ValueError):
    """Frame axes are not usable: nearly dependent or far from orthonormal."""


class ConstraintViolation(BeaconPursuitError, ValueError):
    """A geometric consistency constraint is violated beyond tolerance."""


class SingularityAbort(BeaconPursuitError, RuntimeError):
    """An inter-particle separation collapsed below the abort threshold."""


class TooShort(BeaconPursuitError, ValueError):
    """A trajectory does not span the requested analysis window."""


class NotConverged(BeaconPursuitError, RuntimeError):
    """A trajectory did not settle, so steady-state analysis is unavailable."""
