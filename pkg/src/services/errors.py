"""Exception hierarchy shared by all lab services.

Every error carries the process exit code the CLI reports for it and a short
machine-readable code written to error.csv.
"""

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_HYPOTHESIS = 2
EXIT_NUMERIC = 3
EXIT_RESOURCE = 4


class LabError(Exception):
    """Base class for all lab failures."""

    exit_code: int = EXIT_INPUT
    code: str = "lab-error"


class InputError(LabError):
    """Raised for malformed input files, configs or catalog names."""

    exit_code = EXIT_INPUT
    code = "invalid-input"


class HypothesisViolatedError(LabError):
    """Raised when a theorem hypothesis or precondition fails on the data."""

    exit_code = EXIT_HYPOTHESIS
    code = "hypothesis-violated"


class NumericError(LabError):
    """Raised when a numerical computation cannot produce a trustworthy value."""

    exit_code = EXIT_NUMERIC
    code = "numeric-error"


class ResourceCapError(LabError):
    """Raised when a configured resource budget is exhausted."""

    exit_code = EXIT_RESOURCE
    code = "resource-cap"
