"""Exception types raised across the package."""


class AbstractPoseError(Exception):
    """Base class for all package errors."""


class ConfigError(AbstractPoseError, ValueError):
    pass


class DegenerateCameraError(AbstractPoseError):
    """Look vector parallel to the up seed; no right vector can be formed."""


class DegenerateBoneError(AbstractPoseError):
    pass


class DegenerateOrientationError(AbstractPoseError):
    """Body frame (hips, spine or forward) cannot be built."""


class BehindCameraError(AbstractPoseError):
    def __init__(self, message, part=None):
        super().__init__(message)
        self.part = part


class DegenerateHullError(AbstractPoseError):
    pass


class NoDetectionError(AbstractPoseError):
    pass


class MissingBoneError(AbstractPoseError):
    def __init__(self, bones):
        self.bones = list(bones)
        super().__init__(f"no signal in heatmap channel(s) {self.bones}")


class FormatError(AbstractPoseError, ValueError):
    pass
