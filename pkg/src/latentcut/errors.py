"""Exception types shared across the package.

ConfigError (and argparse usage errors) map to CLI exit code 2; every other
LatentcutError maps to exit code 3.
"""


class LatentcutError(Exception):
    """Base class for package errors."""


class ConfigError(LatentcutError, ValueError):
    """Invalid configuration value, parameter, or config file."""


class ShapeMismatchError(LatentcutError, ValueError):
    """Operands have incompatible dimensions."""


class EmptyMaskError(LatentcutError, RuntimeError):
    """A segmentation produced an all-zero mask."""


class UnknownConditionError(LatentcutError, KeyError):
    """A denoiser was queried with a condition key it has no model for."""


class DegenerateScheduleError(LatentcutError, ValueError):
    """An operation was asked to run at a noise level where it is undefined."""


class ContainerError(LatentcutError, RuntimeError):
    """A tensor container file is malformed or inconsistent."""
