"""Classical chaos game: vertex streams, the contraction step, trajectories, prefractals.

Points are stored as float64 pairs; one-dimensional games live on the y = 0 line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import lfilter
from scipy.spatial import cKDTree

from qchaos.errors import InvalidConfig, ResourceLimit

PREFRACTAL_CAP = 10**7
NO_LABEL = -1


@dataclass(frozen=True)
class VertexSet:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = np.column_stack([pts, np.zeros_like(pts)])
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise InvalidConfig("vertices must be a non-empty list of points")
        if not np.all(np.isfinite(pts)):
            raise InvalidConfig("vertex coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @classmethod
    def interval(cls) -> "VertexSet":
        return cls(np.array([0.0, 1.0]))

    @classmethod
    def regular_polygon(cls, M: int = 3) -> "VertexSet":
        theta = 2 * np.pi * np.arange(M) / M
        return cls(np.column_stack([np.cos(theta), np.sin(theta)]))

    def diameter(self) -> float:
        diff = self.points[:, None, :] - self.points[None, :, :]
        return float(np.sqrt((diff**2).sum(-1)).max())


@dataclass(frozen=True)
class ClassicalConfig:
    vertices: VertexSet
    w: float
    x0: tuple[float, float] = (0.0, 0.0)
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not 0.0 < self.w < 1.0:
            raise InvalidConfig(f"w must lie in (0, 1), got {self.w}")
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if x0.shape == (1,):
            x0 = np.array([x0[0], 0.0])
        if x0.shape != (2,) or not np.all(np.isfinite(x0)):
            raise InvalidConfig(f"x0 must be a finite point, got {self.x0}")
        object.__setattr__(self, "x0", (float(x0[0]), float(x0[1])))


@dataclass
class Trajectory:
    """Time-indexed record of labels and tracked values.

    ``gammas[0]`` is ``NO_LABEL``: the initial value was not produced by a step.
    ``values`` has shape (n+1, 2) for planar games, (n+1,) for scalar ones.
    """

    gammas: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.gammas) != len(self.values):
            raise ValueError("gammas and values must have equal length")

    def __len__(self) -> int:
        return len(self.values)


def _generator(seed: int, stream: int) -> np.random.Generator:
    # Philox is counter-based; the stream index enters the key derivation.
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def vertex_stream(seed: int, stream: int, M: int, n: int) -> np.ndarray:
    """Return ``n`` uniform labels in ``{0, ..., M-1}`` for the given (seed, stream)."""
    if M < 1:
        raise InvalidConfig(f"need at least one vertex, got M={M}")
    if n < 0:
        raise InvalidConfig("n must be non-negative")
    if M == 1:
        return np.zeros(n, dtype=np.int64)
    # Generator.integers uses Lemire rejection, so there is no modulo bias.
    return _generator(seed, stream).integers(0, M, size=n, dtype=np.int64)


def step(x, b, w):
    return (1.0 - w) * np.asarray(x, dtype=float) + w * np.asarray(b, dtype=float)


def linear_orbit(start, inputs: np.ndarray, ratio) -> np.ndarray:
    """Iterate ``v[k+1] = ratio * v[k] + inputs[k]`` from ``start``; returns n+1 values.

    The filter evaluates exactly ``ratio*v + u`` per step, so it agrees bit-for-bit
    with a Python loop using the same expression.
    """
    inputs = np.asarray(inputs)
    out = np.empty(len(inputs) + 1, dtype=np.result_type(inputs, ratio, start, float))
    out[0] = start
    if len(inputs):
        out[1:] = lfilter([1.0], [1.0, -ratio], inputs, zi=[ratio * start])[0]
    return out


def run_game(cfg: ClassicalConfig, n: int, gammas: Sequence[int] | None = None) -> Trajectory:
    M = cfg.vertices.M
    if gammas is None:
        labels = vertex_stream(cfg.seed, cfg.stream, M, n)
    else:
        labels = np.asarray(gammas, dtype=np.int64)
        if len(labels) != n:
            raise InvalidConfig(f"forced label sequence has length {len(labels)}, expected {n}")
        if len(labels) and (labels.min() < 0 or labels.max() >= M):
            raise InvalidConfig("forced labels must lie in {0..M-1}")
    targets = cfg.vertices.points[labels]
    w = cfg.w
    values = np.column_stack(
        [linear_orbit(cfg.x0[c], w * targets[:, c], 1.0 - w) for c in range(2)]
    )
    return Trajectory(
        gammas=np.concatenate([[NO_LABEL], labels]),
        values=values,
        meta={"w": w, "seed": cfg.seed, "stream": cfg.stream, "M": M},
    )


def _as_points(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        return np.array([[float(p), 0.0]])
    if p.ndim == 1:
        return p.reshape(1, 2) if p.shape[0] == 2 else np.column_stack([p, np.zeros_like(p)])
    return p


def prefractal_points(vertices: VertexSet, w: float, depth: int, seeds, cap: int = PREFRACTAL_CAP) -> np.ndarray:
    """All images ``f_{j1} o ... o f_{jk}(s)`` of the seed points, shape (M**k * len(seeds), 2)."""
    if depth < 0:
        raise InvalidConfig("depth must be non-negative")
    pts = _as_points(seeds)
    if len(pts) == 0:
        raise InvalidConfig("seed set must be non-empty")
    total = vertices.M**depth * len(pts)
    if total > cap:
        raise ResourceLimit(f"prefractal would hold {total} points (cap {cap})")
    b = vertices.points
    for _ in range(depth):
        pts = ((1.0 - w) * pts[None, :, :] + w * b[:, None, :]).reshape(-1, 2)
    return pts


def attractor_distance(p, vertices: VertexSet, w: float, depth: int, cap: int = PREFRACTAL_CAP):
    """Distance from ``p`` to the depth-``k`` prefractal generated from the vertices.

    Accepts one point or an array of points; an attractor point is within
    ``diameter * (1-w)**depth`` of that prefractal.
    """
    if depth < 1:
        raise InvalidConfig("depth must be at least 1")
    tree = cKDTree(prefractal_points(vertices, w, depth, vertices.points, cap=cap))
    scalar = np.ndim(p) == 0 or (np.ndim(p) == 1 and np.shape(p)[0] == 2)
    dist, _ = tree.query(_as_points(p))
    return float(dist[0]) if scalar else dist


def attractor_tolerance(vertices: VertexSet, w: float, depth: int) -> float:
    return vertices.diameter() * (1.0 - w) ** depth
