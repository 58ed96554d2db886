"""Exception hierarchy shared by every subsystem.

The CLI maps these onto exit codes: usage problems exit 1, data and format
problems exit 2, diverged training exits 3.
"""


class SemstegError(Exception):
    pass


class ConfigurationError(SemstegError, ValueError):
    """Invalid configuration, arguments or dataset."""


class ShapeError(ConfigurationError):
    pass


class UsageError(SemstegError, RuntimeError):
    """API misuse, e.g. backward without a recorded forward."""


class DivergedTrainingError(SemstegError, ArithmeticError):
    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class DegenerateSignalError(SemstegError, ArithmeticError):
    pass


class ContractViolation(SemstegError, ValueError):
    pass


class KnowledgeError(SemstegError, PermissionError):
    """An attacker tried something its knowledge model does not allow."""


class FormatError(SemstegError, ValueError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(FormatError):
    pass


class CheckpointError(FormatError):
    pass


class MagicMismatchError(CheckpointError):
    pass


class TruncatedCheckpointError(CheckpointError):
    pass


class ShapeConflictError(CheckpointError):
    pass


class StageError(SemstegError):
    """Wraps an error raised inside one stage of an experiment."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
