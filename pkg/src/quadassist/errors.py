"""Exception types shared across the package."""


class QuadAssistError(Exception):
    """Base class for package errors."""


class DecodeError(QuadAssistError):
    """Raised when an input report cannot be decoded into a frame."""


class ConfigError(QuadAssistError):
    """Raised for invalid configuration values (deadzone, caps, tables)."""


class ContractError(QuadAssistError):
    """Raised when a caller violates an operation precondition."""


class ScenarioError(QuadAssistError):
    """Raised when a scenario or model file fails to load or validate."""


class ReplayError(QuadAssistError):
    """Raised when an event log cannot be replayed (version/digest mismatch)."""


class ScoringError(QuadAssistError):
    """Raised when an event log is malformed for scoring."""
