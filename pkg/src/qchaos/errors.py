"""Exception types shared by the simulation modules and mapped to CLI exit codes."""


class InvalidConfig(ValueError):
    exit_code = 2


class ResourceLimit(RuntimeError):
    exit_code = 3


class OracleMismatch(AssertionError):
    exit_code = 4


class PureOrbitRegime(ValueError):
    """Raised when the effective chaos-game transform is undefined (sin(Lambda) = 0)."""
