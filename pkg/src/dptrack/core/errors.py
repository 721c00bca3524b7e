"""Errors shared by the analysis modules."""


class HypothesisViolated(Exception):
    """A theorem's hypothesis does not hold for the given parameters."""

    pass


class ConfigError(Exception):
    """Invalid run configuration."""

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")
