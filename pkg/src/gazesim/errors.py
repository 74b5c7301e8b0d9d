"""Exception types shared across the simulator."""

from __future__ import annotations


class GazeSimError(Exception):
    """Base class for all simulator errors."""


class DegenerateTarget(GazeSimError):
    """Attention target coincides with an eyeball center; gaze direction undefined."""


class SingularSystem(GazeSimError):
    """The damped constraint system is numerically singular (condition number too large)."""


class GazeOffScreenPlane(GazeSimError):
    """An eye's gaze direction is parallel to or points away from the screen plane."""


class MissingMirrorInput(GazeSimError):
    """Mirror expression requested without pupil overlay images."""


class UnknownEntity(GazeSimError):
    """Scene entity id not present in the scene."""


class BehindCamera(GazeSimError):
    """World point projects behind (or too close to) the synthetic camera."""


class UnknownInstruction(GazeSimError):
    """Instruction text does not match any accepted command form."""


class EmptyInput(GazeSimError):
    """An aggregation was requested over zero records."""
