"""Chaos-game dynamics from quantum repeated interactions."""

from qchaos.errors import InvalidConfig, OracleMismatch, PureOrbitRegime, ResourceLimit

__version__ = "0.1.0"

__all__ = ["InvalidConfig", "OracleMismatch", "PureOrbitRegime", "ResourceLimit", "__version__"]
