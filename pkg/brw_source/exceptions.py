"""Exception hierarchy and the CLI exit-code contract."""

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_SOLVER_ERROR = 2


class BRWError(Exception):
    """Base class for every error raised by brw_source."""

    exit_code = EXIT_SOLVER_ERROR


class ConfigError(BRWError):
    """Invalid run configuration or command-line arguments."""

    exit_code = EXIT_CONFIG_ERROR


class MaterialDomainError(BRWError, ValueError):
    """Material model evaluated outside its validity window."""

    def __init__(self, parameter: str, value: float, message: str):
        self.parameter = parameter
        self.value = value
        super().__init__(f"{parameter}={value!r}: {message}")


class ModeNotFoundError(BRWError):
    """No guided mode satisfies the dispersion relation."""


class NoBandgapModeError(ModeNotFoundError):
    """No bandgap-confined (Bragg) mode in the searched interval."""


class GridContractError(BRWError):
    """A sampling grid violates its contract (asymmetric, clipped, uncovered)."""


class ChannelRangeError(BRWError):
    """A WDM channel band falls outside the JSA grid."""

    def __init__(self, n: int, message: str):
        self.n = n
        super().__init__(f"channel {n}: {message}")


class InfeasibleSpaceError(BRWError):
    """The design space yields no solvable stack."""


class PhaseMatchingError(BRWError):
    """No pump wavelength phase-matches the degenerate point in the searched span."""
