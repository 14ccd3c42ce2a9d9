"""Custom exceptions used throughout the leodoppler package."""

from os import PathLike
from typing import Any, Optional, Union


class LeoDopplerError(Exception):
    """Base exception for all leodoppler errors.

    All package-specific exceptions inherit from this class, so callers can
    catch every library failure with a single except clause.
    """

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        """Initialize the exception.

        Args:
            message: Human-readable error message
            details: Additional context about the error
        """

        super().__init__(message)
        self.details = details or {}


class ConfigurationError(LeoDopplerError):
    """Raised when there's an error in configuration.

    This includes:
    - Invalid configuration value
    - Missing or unknown configuration key
    - Configuration validation failures
    """

    def __init__(
        self,
        config_key: Optional[str] = None,
        message: Optional[str] = None,
        details: Optional[dict[str, Any]] = None,
    ):
        """Initialize configuration error.

        Args:
            config_key: The configuration key that caused the error
            message: Description of what's wrong. If omitted, config_key is
                treated as the message and the key defaults to "configuration".
            details: Additional context
        """
        if message is None:
            message = config_key or "Invalid configuration"
            config_key = "configuration"
        if config_key is None:
            config_key = "configuration"

        full_message = f"Configuration error for '{config_key}': {message}"
        super().__init__(message=full_message, details=details)
        self.config_key = config_key


class ValidationError(LeoDopplerError):
    """Raised when a domain value violates its invariants.

    Examples:
    - Non-finite position or velocity
    - Measurement sigma not strictly positive
    - Non-static receiver handed to a static solver
    """


class GeometryError(LeoDopplerError):
    """Raised for degenerate receiver/satellite geometry."""

    def __init__(
        self,
        message: str,
        sat_id: Optional[str] = None,
        details: Optional[dict[str, Any]] = None,
    ):
        if sat_id is not None:
            details = details or {}
            details["sat_id"] = sat_id
        super().__init__(message=message, details=details)
        self.sat_id = sat_id


class PairingError(LeoDopplerError):
    """Raised when satellites and measurements are not aligned one-to-one.

    Pairing is on (sat_id, epoch); the offending index is kept in details.
    """

    def __init__(
        self,
        index: int,
        message: Optional[str] = None,
        details: Optional[dict[str, Any]] = None,
    ):
        if message is None:
            message = f"Satellite/measurement pairing mismatch at index {index}"
        details = details or {}
        details["index"] = index
        super().__init__(message=message, details=details)
        self.index = index


class UnderdeterminedError(LeoDopplerError):
    """Raised when fewer measurements than unknowns are supplied."""

    def __init__(
        self,
        count: int,
        required: int = 4,
        details: Optional[dict[str, Any]] = None,
    ):
        message = (
            f"Underdetermined problem: {count} measurements, "
            f"at least {required} required"
        )
        super().__init__(message=message, details=details)
        self.count = count
        self.required = required


class ScalingError(LeoDopplerError):
    """Raised on double scaling or on unscaled data where scaled is required."""


class DimensionError(LeoDopplerError):
    """Raised when matrix or vector dimensions do not match."""


class SolverError(LeoDopplerError):
    """Raised when a numerical solve fails and the failure must propagate.

    Examples:
    - SDP solve failure inside a GWA iteration
    """

    def __init__(
        self,
        message: str,
        status: Optional[str] = None,
        iteration: Optional[int] = None,
        details: Optional[dict[str, Any]] = None,
    ):
        details = details or {}
        if status is not None:
            details["status"] = status
        if iteration is not None:
            details["iteration"] = iteration
        super().__init__(message=message, details=details)
        self.status = status
        self.iteration = iteration


class RecoveryError(LeoDopplerError):
    """Raised when a rank-1 solution cannot be read from a moment matrix."""


class CertificationError(LeoDopplerError):
    """Raised when a certified baseline is required but not available."""


class DatasetError(LeoDopplerError):
    """Raised for dataset parse, join and unit errors.

    The path and 1-based line number are carried when known, so messages
    point at the offending row.
    """

    def __init__(
        self,
        message: str,
        path: Optional[Union[str, PathLike[str]]] = None,
        line: Optional[int] = None,
        details: Optional[dict[str, Any]] = None,
    ):
        details = details or {}
        location = ""
        if path is not None:
            details["path"] = str(path)
            location = str(path)
        if line is not None:
            details["line"] = line
            location = f"{location}:{line}" if location else f"line {line}"
        full_message = f"{location}: {message}" if location else message
        super().__init__(message=full_message, details=details)
        self.path = None if path is None else str(path)
        self.line = line
