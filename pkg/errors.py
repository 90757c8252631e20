"""
Exception hierarchy for the DepSMUCE library and CLI.

Every error carries the exit code the command-line front end reports for it,
so data problems can be told apart from configuration problems.
"""


class DepSmuceError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InvalidInputError(DepSmuceError, ValueError):
    """Malformed data, out-of-range indices or an invalid signal."""

    exit_code = 2


class DegenerateDataError(DepSmuceError, ValueError):
    """Data that admits no meaningful estimate (zero variance, too few blocks)."""

    exit_code = 3


class ConfigurationError(DepSmuceError, ValueError):
    """Invalid detector, calibration or environment settings."""

    exit_code = 4


class NonStationaryError(DepSmuceError, ValueError):
    """AR polynomial with a root on or inside the unit circle."""

    exit_code = 4


class UnknownScenarioError(DepSmuceError, KeyError):
    """Scenario name not in the catalogue, or an unreadable scenario file."""

    exit_code = 5

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""
