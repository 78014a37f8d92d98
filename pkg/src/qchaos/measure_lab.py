"""Stationary statistics of the one-dimensional game on [0, 1].

Densities are carried as binned probability masses. Bin ``j`` covers
``[j/K, (j+1)/K)``; the last bin is closed at 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qchaos.errors import InvalidConfig
from qchaos.fermion_game import entropy
from qchaos.ifs_core import linear_orbit, vertex_stream

W_C = 1.0 - 1.0 / math.sqrt(2.0)
W_GOLDEN = 1.0 - 2.0 / (1.0 + math.sqrt(5.0))


@dataclass
class DensityGrid:
    masses: np.ndarray
    iterations: int | None = None
    converged: bool | None = None
    l1_change: float | None = None

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.ndim != 1 or len(self.masses) < 1:
            raise InvalidConfig("a density grid needs at least one bin")

    @property
    def K(self) -> int:
        return len(self.masses)

    @property
    def edges(self) -> np.ndarray:
        return np.arange(self.K + 1) / self.K

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.K) + 0.5) / self.K

    @property
    def density(self) -> np.ndarray:
        return self.masses * self.K

    @classmethod
    def uniform(cls, K: int) -> "DensityGrid":
        return cls(np.full(K, 1.0 / K))

    @classmethod
    def point_mass(cls, x: float, K: int) -> "DensityGrid":
        m = np.zeros(K)
        m[bin_index(x, K)] = 1.0
        return cls(m)

    def l1(self, other: "DensityGrid") -> float:
        return float(np.abs(self.masses - other.masses).sum())

    def moment(self, n: int) -> float:
        """Moment of the piecewise-uniform density: exact bin integrals of x**n."""
        e = self.edges
        return float(self.masses @ ((e[1:] ** (n + 1) - e[:-1] ** (n + 1)) * self.K / (n + 1)))


@dataclass
class MomentTable:
    w: float
    moments: np.ndarray


@dataclass
class SpinRepresentation:
    wbar: float
    spins: np.ndarray
    n: int
    value: float
    theta: float


@dataclass
class EntropyBounds:
    w: float
    K: int
    A_K: float
    B_K: float

    @property
    def C_K(self) -> float:
        return 0.5 * (self.A_K + self.B_K)


@dataclass
class MCEstimate:
    mean: float
    stderr: float
    samples: int
    batch_means: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))


def bin_index(x, K: int):
    return np.minimum(np.floor(np.asarray(x, dtype=float) * K).astype(np.int64), K - 1)


def histogram_density(values, K: int, burn_in: int = 0) -> DensityGrid:
    values = np.asarray(values, dtype=float)
    sample = values[burn_in:]
    if sample.size == 0:
        raise InvalidConfig("no samples left after burn-in")
    if sample.min() < 0.0 or sample.max() > 1.0:
        raise InvalidConfig("histogram values must lie in [0, 1]")
    counts = np.bincount(bin_index(sample, K), minlength=K)
    return DensityGrid(counts / sample.size)


def _push_left(masses: np.ndarray, w: float) -> np.ndarray:
    # Image of the piecewise-uniform measure under x -> (1-w) x, rebinned by overlap.
    K = len(masses)
    cdf = np.concatenate([[0.0], np.cumsum(masses)])
    src = np.minimum(np.arange(K + 1) / (K * (1.0 - w)), 1.0)
    F = np.interp(src, np.arange(K + 1) / K, cdf)
    return np.diff(F)


def iterate_density(grid: DensityGrid, w: float) -> DensityGrid:
    """One step of the measure recursion at resolution K.

    The right branch is the mirror image of the left branch applied to the
    mirrored grid, so symmetric grids stay symmetric bit-for-bit.
    """
    m = grid.masses
    left = _push_left(m, w)
    right = _push_left(m[::-1], w)[::-1]
    return DensityGrid(0.5 * (left + right))


def stationary_density(w: float, K: int, tol: float = 1e-12, max_iter: int = 100_000) -> DensityGrid:
    if K < 2:
        raise InvalidConfig("K must be at least 2")
    if not tol > 0:
        raise InvalidConfig("tol must be positive")
    if not 0.0 < w < 1.0:
        raise InvalidConfig(f"w must lie in (0, 1), got {w}")
    grid = DensityGrid.uniform(K)
    change = math.inf
    for it in range(1, max_iter + 1):
        nxt = iterate_density(grid, w)
        change = nxt.l1(grid)
        grid = nxt
        if change <= tol:
            break
    grid.masses /= math.fsum(grid.masses)
    grid.iterations, grid.converged, grid.l1_change = it, change <= tol, change
    return grid


def _wc_cdf(x: np.ndarray) -> np.ndarray:
    c = (1.0 + math.sqrt(2.0)) ** 2 / math.sqrt(2.0)
    a = 1.0 / (1.0 + math.sqrt(2.0))
    b = math.sqrt(2.0) / (1.0 + math.sqrt(2.0))
    x = np.asarray(x, dtype=float)
    rise = 0.5 * c * np.minimum(x, a) ** 2
    plateau = c * a * np.clip(x - a, 0.0, b - a)
    fall = c * (0.5 * (1.0 - b) ** 2 - 0.5 * (1.0 - np.maximum(x, b)) ** 2)
    return rise + plateau + fall


def closed_form_density(w, K: int) -> DensityGrid:
    """Exact bin averages of the known stationary densities (w = 1/2 and w = w_c)."""
    if isinstance(w, str):
        w = {"wc": W_C, "0.5": 0.5}.get(w, w)
    if w == 0.5:
        return DensityGrid.uniform(K)
    if isinstance(w, float) and abs(w - W_C) < 1e-12:
        return DensityGrid(np.diff(_wc_cdf(np.arange(K + 1) / K)))
    raise InvalidConfig(f"no closed form for w={w}; supported: 0.5, wc={W_C!r}")


def moment_table(w: float, K: int) -> MomentTable:
    if not 0.0 < w <= 1.0:
        raise InvalidConfig(f"w must lie in (0, 1], got {w}")
    if K < 1:
        raise InvalidConfig("K must be at least 1")
    wbar = 1.0 - w
    m = np.empty(K + 1)
    m[0] = 1.0
    for n in range(1, K + 1):
        acc = math.fsum(math.comb(n, i) * wbar**i * w ** (n - i) * m[i] for i in range(n))
        m[n] = acc / (2.0 * (1.0 - wbar**n))
    return MomentTable(w=w, moments=m)


def small_x_exponent(w: float) -> float:
    if not 0.0 < w < 1.0:
        raise InvalidConfig(f"w must lie in (0, 1), got {w}")
    return -1.0 - math.log(2.0) / math.log1p(-w)


def gaussian_approximation(w: float) -> tuple[float, float]:
    if not 0.0 < w <= 1.0:
        raise InvalidConfig(f"w must lie in (0, 1], got {w}")
    return 0.5, (w / 2.0) ** 2 / (1.0 - (1.0 - w) ** 2)


def spin_reconstruct(gammas: Sequence[int], w: float) -> SpinRepresentation:
    """Closed-form position after ``n`` steps from 0, given the labels c_0..c_{n-1}."""
    c = np.asarray(gammas, dtype=np.int64)
    if np.any((c != 0) & (c != 1)):
        raise InvalidConfig("labels must be 0 or 1")
    n = len(c)
    wbar = 1.0 - w
    spins = 2 * c[::-1] - 1
    theta = math.fsum(wbar**j * s for j, s in enumerate(spins.tolist()))
    value = (1.0 - wbar**n) / 2.0 + (w / 2.0) * theta
    return SpinRepresentation(wbar=wbar, spins=spins, n=n, value=value, theta=theta)


def _occupations(w: float, n: int, seed: int, stream: int) -> np.ndarray:
    labels = vertex_stream(seed, stream, 2, n)
    return linear_orbit(0.0, w * labels.astype(float), 1.0 - w)


def _batch_means(x: np.ndarray, batches: int) -> np.ndarray:
    usable = len(x) - len(x) % batches
    return x[:usable].reshape(batches, -1).mean(axis=1)


def mc_statistic(w: float, n: int, burn_in: int, fn, seed: int = 0, stream: int = 0,
                 shards: int = 1, threads: int = 1, batches: int = 100) -> MCEstimate:
    """Time average of ``fn(N_k)`` over k > burn_in, with a batch-means standard error.

    Each shard runs an independent trajectory on stream ``stream + i``; shard
    results are combined in stream order, so the value does not depend on
    ``threads``.
    """
    if n <= burn_in:
        raise InvalidConfig("n must exceed burn_in")
    if shards < 1 or batches < 2:
        raise InvalidConfig("need shards >= 1 and batches >= 2")
    per_shard = n // shards
    if per_shard <= burn_in + batches:
        raise InvalidConfig("too few steps per shard")

    def run(i):
        x = _occupations(w, per_shard, seed, stream + i)[burn_in + 1:]
        vals = fn(x)
        return _batch_means(vals, max(2, batches // shards))

    if threads > 1 and shards > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, range(shards)))
    else:
        parts = [run(i) for i in range(shards)]
    bm = np.concatenate(parts)
    return MCEstimate(
        mean=float(bm.mean()),
        stderr=float(bm.std(ddof=1) / math.sqrt(len(bm))),
        samples=shards * (per_shard - burn_in),
        batch_means=bm,
    )


def simulate_histogram(w: float, n: int, K: int, burn_in: int = 1000, seed: int = 0, stream: int = 0,
                       shards: int = 1, threads: int = 1) -> DensityGrid:
    """Empirical density of the occupation trajectory, sharded over streams.

    Integer bin counts are merged exactly, so the result ignores ``threads``.
    """
    if shards < 1:
        raise InvalidConfig("shards must be at least 1")
    per_shard = n // shards
    if per_shard <= burn_in:
        raise InvalidConfig("n must exceed burn_in on every shard")

    def run(i):
        x = _occupations(w, per_shard, seed, stream + i)[burn_in + 1:]
        return np.bincount(bin_index(x, K), minlength=K)

    if threads > 1 and shards > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            counts = sum(ex.map(run, range(shards)))
    else:
        counts = sum(run(i) for i in range(shards))
    return DensityGrid(counts / counts.sum())


def average_entropy_mc(w: float, n: int, burn_in: int = 1000, seed: int = 0, stream: int = 0,
                       shards: int = 1, threads: int = 1) -> MCEstimate:
    return mc_statistic(w, n, burn_in, entropy, seed=seed, stream=stream, shards=shards, threads=threads)


def entropy_from_density(grid: DensityGrid) -> float:
    x = grid.midpoints
    return float(2.0 * grid.masses @ (-x * np.log(x)))


def entropy_truncation(w: float, K: int) -> EntropyBounds:
    if K < 2:
        raise InvalidConfig("truncation order must be at least 2")
    m = moment_table(w, K).moments
    A = math.fsum((m[n] - m[n + 1]) / n for n in range(1, K))
    B = m[1] - math.fsum(m[n] / (n * (n - 1)) for n in range(2, K + 1))
    return EntropyBounds(w=w, K=K, A_K=A, B_K=B)


def approx_entropy(w: float, K: int) -> float:
    """Moment-expansion estimate of the average entropy (equals 2 C_K)."""
    m = moment_table(w, K).moments
    return 1.0 - 2.0 * math.fsum(m[n] / (n * (n - 1)) for n in range(2, K)) - m[K] * (K + 1) / (K * (K - 1))
