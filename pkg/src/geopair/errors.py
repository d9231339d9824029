"""Exception hierarchy shared across the toolkit."""


class GeopairError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(GeopairError):
    """Invalid input data, geometry, or configuration values."""


class ParseError(ValidationError):
    """Malformed input document (GeoJSON, JSONL, config)."""


class ExtentError(ValidationError):
    """Geometry too far from the projection origin for a local planar frame."""


class ConfigError(ValidationError):
    """Missing or inconsistent run configuration (templates, paths, flags)."""


class BackendError(GeopairError):
    """Chat-completion backend failed after exhausting retries."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class CredentialError(BackendError):
    """Backend rejected the request credential; retrying will not help."""
