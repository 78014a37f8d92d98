"""Closed-form reduced dynamics of a fermionic mode under repeated interactions.

A system mode (frequency omega) is coupled for a time tau with strength lambda
to a fresh bath mode prepared empty or occupied. The occupation of the system
then performs the one-dimensional chaos game with weight ``w = sin(lambda*tau)**2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import entr

from qchaos.errors import InvalidConfig
from qchaos.ifs_core import NO_LABEL, Trajectory, linear_orbit, vertex_stream


@dataclass(frozen=True)
class QuantumConfig:
    omega: float
    lam: float
    tau: float = 1.0
    seed: int = 0
    stream: int = 0
    M: int = 2
    # Per-mode frequencies (system first); honoured only by the exact oracle.
    omegas: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidConfig(f"tau must be positive, got {self.tau}")
        for name in ("omega", "lam", "tau"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidConfig(f"{name} must be finite")
        if self.M < 1:
            raise InvalidConfig("M must be at least 1")

    @property
    def w(self) -> float:
        return coupling_weight(self)

    def mode_omega(self, k: int) -> float:
        if self.omegas is not None and k < len(self.omegas):
            return float(self.omegas[k])
        return float(self.omega)


def interaction_unitary(cfg: QuantumConfig) -> np.ndarray:
    """``exp(-i tau T)`` for the two-mode hopping matrix T = [[w, -l], [-l, w]]."""
    theta = cfg.lam * cfg.tau
    c, s = np.cos(theta), np.sin(theta)
    return np.exp(-1j * cfg.omega * cfg.tau) * np.array([[c, 1j * s], [1j * s, c]])


def coupling_weight(cfg: QuantumConfig) -> float:
    return float(np.sin(cfg.lam * cfg.tau) ** 2)


def _check_occupation(N):
    arr = np.asarray(N, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InvalidConfig(f"occupation must lie in [0, 1], got {N}")
    return arr


def step_occupation(N: float, gamma: int, w: float) -> float:
    _check_occupation(N)
    if gamma not in (0, 1):
        raise InvalidConfig(f"fermionic bath label must be 0 or 1, got {gamma}")
    return (1.0 - w) * N + w * gamma


def run_fermion(cfg: QuantumConfig, n: int, forced_gammas: Sequence[int] | None = None) -> Trajectory:
    """Occupation trajectory ``N_0 = 0, N_{k+1} = (1-w) N_k + w gamma_{k+1}``."""
    if cfg.M != 2:
        raise InvalidConfig("the fermionic game uses exactly two bath preparations")
    if forced_gammas is None:
        labels = vertex_stream(cfg.seed, cfg.stream, 2, n)
    else:
        labels = np.asarray(forced_gammas, dtype=np.int64)
        if len(labels) != n:
            raise InvalidConfig(f"forced label sequence has length {len(labels)}, expected {n}")
        if np.any((labels != 0) & (labels != 1)):
            raise InvalidConfig("fermionic labels must be 0 or 1")
    w = cfg.w
    values = linear_orbit(0.0, w * labels.astype(float), 1.0 - w)
    return Trajectory(
        gammas=np.concatenate([[NO_LABEL], labels]),
        values=values,
        meta={"w": w, "seed": cfg.seed, "stream": cfg.stream},
    )


def reduced_density(N: float) -> np.ndarray:
    N = float(_check_occupation(N))
    return np.diag([1.0 - N, N]).astype(complex)


def gaussian_parameter(N):
    """``g = ln((1-N)/N)``; ``+inf`` for the vacuum and ``-inf`` for the filled mode."""
    N = float(_check_occupation(N))
    if N == 0.0:
        return np.inf
    if N == 1.0:
        return -np.inf
    return float(np.log1p(-N) - np.log(N))


def entropy(N):
    """Entanglement entropy of the Gaussian state with occupation ``N`` (vectorised)."""
    N = _check_occupation(N)
    S = entr(N) + entr(1.0 - N)
    return float(S) if S.ndim == 0 else S
