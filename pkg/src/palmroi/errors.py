"""Exception hierarchy for the extraction pipeline.

Every error carries a short ``code`` (the class name) so reports can name
the failure without depending on message wording.
"""


class PalmRoiError(Exception):
    """Base class for all pipeline errors."""

    @property
    def code(self):
        return type(self).__name__


class ConstantImage(PalmRoiError):
    pass


class NoForeground(PalmRoiError):
    pass


class EmptyMask(PalmRoiError):
    pass


class ChainTooShort(PalmRoiError):
    pass


class TooFewFingers(PalmRoiError):
    pass


class NoValleyArc(PalmRoiError):
    pass


class WrongKeyPointCount(PalmRoiError):
    pass


class TooFewValleys(WrongKeyPointCount):
    pass


class DegenerateFrame(PalmRoiError):
    pass


class RoiOutOfImage(PalmRoiError):
    pass


class SideMismatch(PalmRoiError):
    pass


class InvalidParams(PalmRoiError):
    pass


class ConfigError(PalmRoiError):
    pass
