"""Exception types shared across the package."""


class ParaQAError(Exception):
    """Base class for all package errors."""


class EmptyInputError(ParaQAError, ValueError):
    """Raised when text input is empty or whitespace-only."""


class ShapeError(ParaQAError, ValueError):
    """Raised on tensor dimension mismatches."""


class InvalidArgumentError(ParaQAError, ValueError):
    """Raised when an argument violates a documented precondition."""


class NoCandidatesError(ParaQAError, ValueError):
    """Raised when a prediction is requested over an empty candidate set."""


class ConfigError(ParaQAError, ValueError):
    """Raised for invalid experiment configuration, naming the offending field."""


class CheckpointError(ParaQAError, ValueError):
    """Raised when a checkpoint cannot be loaded or does not match the config."""
