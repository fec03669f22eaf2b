"""
Error hierarchy for VoxPath
"""


class VoxPathError(Exception):
    """Base class for all pipeline errors"""


class AudioFormatError(VoxPathError, ValueError):
    """Malformed or truncated audio file"""


class UnsupportedAudioError(VoxPathError, ValueError):
    """Well-formed audio file using a codec the reader does not handle"""


class InsufficientDataError(VoxPathError, ValueError):
    """Input is too short for the requested operation"""


class DegenerateInputError(VoxPathError, ValueError):
    """Input has no usable variation (all zeros, constant, ...)"""


class ParameterError(VoxPathError, ValueError):
    """Invalid parameter value"""


class ExperimentError(VoxPathError, RuntimeError):
    """The classification protocol could not be carried out"""
