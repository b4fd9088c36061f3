class TweetDemogError(Exception):
    """Base class for all errors raised by this package."""


class DataError(TweetDemogError, ValueError):
    """Input data violates a format or invariant."""


class ParameterError(TweetDemogError, ValueError):
    """A configuration value is out of its allowed range."""


class StageError(TweetDemogError):
    """A pipeline stage failed; wraps the underlying cause."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
