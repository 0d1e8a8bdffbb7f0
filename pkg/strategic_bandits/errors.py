"""
Error types raised across the package.
Controllers let these propagate; the CLI and the HTTP routes translate them.
"""
from typing import Optional


class StrategicBanditError(Exception):
    """Base class for every error raised by this package."""


class InvalidProfile(StrategicBanditError, ValueError):
    """An agent profile is malformed (ids, lengths, negative copy counts)."""


class EmptyStrategy(InvalidProfile):
    """An agent registers no arm at all."""


class InvalidMean(InvalidProfile):
    """A Bernoulli mean lies outside [0, 1]."""


class StaleUpdate(StrategicBanditError):
    """A policy update does not match the pending selection."""


class UnknownArm(StrategicBanditError, KeyError):
    """A history references an arm id the instance does not contain."""


class TooLarge(StrategicBanditError):
    """Exact enumeration would exceed the configured path guard."""


class ConfigError(StrategicBanditError, ValueError):
    """A scenario document or override is invalid."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VerificationFailed(StrategicBanditError):
    """A certificate did not reproduce the expected proneness/proofness claims."""
