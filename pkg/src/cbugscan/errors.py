"""Exception types shared across the framework."""

from __future__ import annotations


class CbugscanError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CbugscanError):
    """Invalid command line, job description, or checker configuration."""


class FrontendError(CbugscanError):
    """Lexical, syntactic, preprocessing, or CFG construction failure."""

    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.message = message
        self.location = location

    def __str__(self) -> str:
        if self.location is not None:
            return f"{self.location}: {self.message}"
        return self.message


class PatternError(CbugscanError):
    """Malformed pattern template or pattern file."""
