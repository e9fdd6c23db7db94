"""Exception types raised across the package."""


class TopicMineError(Exception):
    """Base class for every error raised by topicmine."""


class AllDocumentsEmpty(TopicMineError):
    pass


class ZeroVector(TopicMineError):
    def __init__(self, index=None, message=None):
        self.index = index
        if message is None:
            message = "zero vector" if index is None else f"zero vector at index {index}"
        super().__init__(message)


class BadK(TopicMineError):
    pass


class LengthMismatch(TopicMineError):
    pass


class ShapeMismatch(TopicMineError):
    pass


class NonNegativityViolation(TopicMineError):
    """A factor picked up a negative entry. Indicates a bug, never expected."""


class SingularSystem(TopicMineError):
    pass


class ConvergenceFailure(TopicMineError):
    def __init__(self, message, iterations=None, converged=None):
        super().__init__(message)
        self.iterations = iterations
        self.converged = converged


class EmptyTopic(TopicMineError):
    pass


class ConfigError(TopicMineError):
    pass


class StageError(TopicMineError):
    """Wraps a failure inside one pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
