"""Objective subaggregation: split a trajectory's reward stream into
partial sums chosen by position (quadtree cells) or by time (windows).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DomainBug, InvalidConfig
from .kernels import impl as _k

SPACE = "space_quadtree"
TIME = "time_windows"
KINDS = (SPACE, TIME)
OBJECTIVE_COUNTS = (1, 4, 16, 64)


class StepRecord(NamedTuple):
    t: int
    pos: tuple[float, float]
    reward: float


@dataclass
class Trajectory:
    """One episode: time indices, positions (L, 2) and per-step rewards."""

    t: np.ndarray
    pos: np.ndarray
    reward: np.ndarray
    bounds: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.t) == 0:
            raise DomainBug("trajectory must contain at least one step")
        if not (len(self.t) == len(self.pos) == len(self.reward)):
            raise DomainBug("trajectory fields have mismatched lengths")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def steps(self) -> Iterator[StepRecord]:
        for t, (x, y), r in zip(self.t, self.pos, self.reward):
            yield StepRecord(int(t), (float(x), float(y)), float(r))

    @property
    def fitness(self) -> float:
        """Left-to-right sum of rewards, the same order the subaggregation
        kernels use, so one objective reproduces it exactly."""
        return float(np.cumsum(self.reward)[-1])


@dataclass
class TrajectoryBatch:
    """Padded trajectories for a whole population.

    ``pos`` is (p, L, 2), ``reward`` is (p, L); row ``i`` is valid up to
    ``length[i]``. ``t0`` is the time index of the first recorded step.
    """

    pos: np.ndarray
    reward: np.ndarray
    length: np.ndarray
    bounds: tuple[float, float, float, float]
    t0: int = 0

    def __len__(self) -> int:
        return self.reward.shape[0]

    def __getitem__(self, i: int) -> Trajectory:
        n = int(self.length[i])
        return Trajectory(np.arange(self.t0, self.t0 + n), self.pos[i, :n].copy(),
                          self.reward[i, :n].copy(), self.bounds)

    @property
    def fitness(self) -> np.ndarray:
        mask = np.arange(self.reward.shape[1])[None, :] < self.length[:, None]
        return np.cumsum(np.where(mask, self.reward, 0.0), axis=1)[:, -1]

    @classmethod
    def from_trajectory(cls, traj: Trajectory) -> "TrajectoryBatch":
        pos = np.asarray(traj.pos, dtype=np.float64)[None]
        reward = np.asarray(traj.reward, dtype=np.float64)[None]
        return cls(pos, reward, np.array([len(traj)]), tuple(traj.bounds), int(traj.t[0]))


@dataclass
class Evaluation:
    """What a domain returns for a population: trajectories, the scalar
    score used by archives, and the 2-D measure of each member."""

    batch: TrajectoryBatch
    scores: np.ndarray
    measures: np.ndarray


@dataclass(frozen=True)
class SubaggSpec:
    kind: str = SPACE
    n: int = 4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"subaggregation kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 1:
            raise InvalidConfig(f"objective count must be >= 1, got {self.n}")
        if self.kind == SPACE:
            quadtree_depth(self.n)

    @property
    def label(self) -> str:
        return f"lex-{self.n}" if self.kind == SPACE else f"lex-{self.n}-time"


def quadtree_depth(n: int) -> int:
    depth = {1: 0, 4: 1, 16: 2, 64: 3}.get(n)
    if depth is None:
        raise InvalidConfig(f"quadtree objective count must be 1, 4, 16 or 64, got {n}")
    return depth


def _check_bounds(bounds):
    x0, y0, x1, y1 = bounds
    if not (x1 > x0 and y1 > y0):
        raise InvalidConfig(f"degenerate bounds {bounds}")


def quadtree_regions(bounds, depth: int) -> list[tuple[float, float, float, float]]:
    """The 4**depth leaf rectangles, row-major with row 0 at the low-y edge.

    Intervals are half-open ``[lo, hi)`` except the last row and column,
    which are closed, so every point of ``bounds`` lands in exactly one.
    """
    if not 0 <= depth <= 3:
        raise InvalidConfig(f"quadtree depth must be in [0, 3], got {depth}")
    _check_bounds(bounds)
    x0, y0, x1, y1 = bounds
    k = 2 ** depth
    xs = np.linspace(x0, x1, k + 1)
    ys = np.linspace(y0, y1, k + 1)
    return [(float(xs[c]), float(ys[r]), float(xs[c + 1]), float(ys[r + 1]))
            for r in range(k) for c in range(k)]


def region_index(pos, bounds, depth: int) -> np.ndarray:
    """Leaf index of each (x, y) in ``pos`` under :func:`quadtree_regions`."""
    pos = np.atleast_2d(np.asarray(pos, dtype=np.float64))
    x0, y0, x1, y1 = bounds
    k = 2 ** depth
    if ((pos[:, 0] < x0) | (pos[:, 0] > x1) | (pos[:, 1] < y0) | (pos[:, 1] > y1)).any():
        raise DomainBug("position outside bounds")
    col = np.minimum(((pos[:, 0] - x0) / (x1 - x0) * k).astype(np.int64), k - 1)
    row = np.minimum(((pos[:, 1] - y0) / (y1 - y0) * k).astype(np.int64), k - 1)
    return row * k + col


def _space_batch(batch: TrajectoryBatch, n: int) -> np.ndarray:
    k = 2 ** quadtree_depth(n)
    _check_bounds(batch.bounds)
    out, bad = _k.space_subagg(np.ascontiguousarray(batch.pos, dtype=np.float64),
                               np.ascontiguousarray(batch.reward, dtype=np.float64),
                               np.asarray(batch.length, dtype=np.int64),
                               np.asarray(batch.bounds, dtype=np.float64), k)
    if bad:
        raise DomainBug(f"{bad} trajectory steps lie outside bounds {batch.bounds}")
    return out


def _time_batch(batch: TrajectoryBatch, n: int) -> np.ndarray:
    if n < 1:
        raise InvalidConfig(f"window count must be >= 1, got {n}")
    shortest = int(np.min(batch.length))
    if n > shortest:
        raise InvalidConfig(f"cannot split a {shortest}-step trajectory into {n} windows")
    return _k.time_subagg(np.ascontiguousarray(batch.reward, dtype=np.float64),
                          np.asarray(batch.length, dtype=np.int64), n)


def subaggregate_batch(batch: TrajectoryBatch, spec: SubaggSpec) -> np.ndarray:
    """Objective matrix of shape (p, spec.n) for a population's trajectories."""
    if spec.kind == SPACE:
        return _space_batch(batch, spec.n)
    return _time_batch(batch, spec.n)


def space_subaggregate(traj: Trajectory, spec: SubaggSpec) -> np.ndarray:
    if spec.kind != SPACE:
        raise InvalidConfig(f"space_subaggregate needs kind={SPACE!r}")
    return _space_batch(TrajectoryBatch.from_trajectory(traj), spec.n)[0]


def time_subaggregate(traj: Trajectory, spec: SubaggSpec) -> np.ndarray:
    if spec.kind != TIME:
        raise InvalidConfig(f"time_subaggregate needs kind={TIME!r}")
    return _time_batch(TrajectoryBatch.from_trajectory(traj), spec.n)[0]


def subaggregate(traj: Trajectory, spec: SubaggSpec) -> np.ndarray:
    return subaggregate_batch(TrajectoryBatch.from_trajectory(traj), spec)[0]
