"""2-D maze with a differential-drive disc robot driven by an MLP policy.

Sensors: three range lasers at -45, 0 and +45 degrees (normalized by the
laser range) and two bumpers at -90 and +90 degrees (contact flags). A step
whose translated disc would touch a wall or the outer bounds keeps its
rotation but not its translation.

Two reward modes share the same dynamics:

* ``deceptive``: ``r_t = d_{t-1} - d_t`` (progress towards the goal). The
  archive score is ``sum(r) - d_0 = -d_T``, so 0 is the optimum.
* ``illumination``: ``r_t = -|a_t|^2`` with ``a_t`` the clipped, scaled
  wheel command; staying still is optimal at 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .archive import MeasureSpec
from .errors import InvalidConfig
from .evo import MlpSpec, as_generator, init_population, mutate_mlp
from .kernels import impl as _k
from .subagg import Evaluation, Trajectory, TrajectoryBatch

DECEPTIVE = "deceptive"
ILLUMINATION = "illumination"
MODES = {DECEPTIVE: 0, ILLUMINATION: 1}

ACTION_SCALE = 0.025
DEFAULT_MAP = "deceptive_maze.map"


@dataclass(frozen=True)
class MazeMap:
    bounds: tuple[float, float, float, float]
    walls: np.ndarray
    start: tuple[float, float, float]
    goal: tuple[float, float]
    goal_radius: float

    @property
    def ray_segments(self) -> np.ndarray:
        """Walls plus the four edges of the bounds, as ray targets."""
        x0, y0, x1, y1 = self.bounds
        box = np.array([[x0, y0, x1, y0], [x1, y0, x1, y1],
                        [x1, y1, x0, y1], [x0, y1, x0, y0]], dtype=np.float64)
        return np.ascontiguousarray(np.vstack([self.walls.reshape(-1, 4), box]))

    @property
    def diagonal(self) -> float:
        x0, y0, x1, y1 = self.bounds
        return math.hypot(x1 - x0, y1 - y0)


@dataclass(frozen=True)
class RobotParams:
    radius: float = 0.015
    laser_range: float = 0.2
    bumper_reach: float = 0.025
    steps: int = 250
    hidden: int = 8

    def __post_init__(self):
        if self.radius <= 0 or self.laser_range <= 0 or self.bumper_reach <= 0:
            raise InvalidConfig("robot radius, laser range and bumper reach must be positive")
        if self.steps < 1:
            raise InvalidConfig(f"episode length must be >= 1, got {self.steps}")


@dataclass
class RobotState:
    x: float
    y: float
    theta: float
    radius: float = 0.015


def parse_map(text: str, source: str = "<map>") -> MazeMap:
    """Parse the line-based map format (``bounds``/``start``/``goal``/``wall``)."""
    bounds = start = goal = None
    walls = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *vals = line.split()
        try:
            nums = [float(v) for v in vals]
        except ValueError:
            raise InvalidConfig(f"{source}:{lineno}: non-numeric value in {raw!r}") from None
        want = {"bounds": 4, "start": 3, "goal": 3, "wall": 4}.get(key)
        if want is None:
            raise InvalidConfig(f"{source}:{lineno}: unknown directive {key!r}")
        if len(nums) != want:
            raise InvalidConfig(f"{source}:{lineno}: {key} takes {want} numbers, got {len(nums)}")
        if key == "bounds":
            bounds = tuple(nums)
        elif key == "start":
            start = tuple(nums)
        elif key == "goal":
            goal = nums
        else:
            walls.append(nums)
    if bounds is None or start is None or goal is None:
        raise InvalidConfig(f"{source}: map needs bounds, start and goal lines")
    x0, y0, x1, y1 = bounds
    if not (x1 > x0 and y1 > y0):
        raise InvalidConfig(f"{source}: degenerate bounds {bounds}")
    for name, (px, py) in (("start", start[:2]), ("goal", goal[:2])):
        if not (x0 < px < x1 and y0 < py < y1):
            raise InvalidConfig(f"{source}: {name} ({px}, {py}) not strictly inside bounds")
    if goal[2] <= 0:
        raise InvalidConfig(f"{source}: goal radius must be positive")
    return MazeMap(bounds, np.array(walls, dtype=np.float64).reshape(-1, 4),
                   start, (goal[0], goal[1]), goal[2])


def load_map(path=None) -> MazeMap:
    """Load a map file; ``None`` loads the bundled deceptive maze."""
    if path is None:
        text = resources.files("lexqd.maps").joinpath(DEFAULT_MAP).read_text()
        return parse_map(text, DEFAULT_MAP)
    path = Path(path)
    return parse_map(path.read_text(), str(path))


def check_start(maze: MazeMap, params: RobotParams) -> None:
    x, y, _ = maze.start
    if _k.collides(x, y, params.radius, maze.walls, np.asarray(maze.bounds, dtype=np.float64)):
        raise InvalidConfig("robot start pose overlaps a wall or the bounds")


def cast_laser(pose, relative_angle: float, maze: MazeMap, laser_range: float = 0.2) -> float:
    """Normalized range in [0, 1] of a ray cast from ``pose``."""
    x, y, theta = pose
    d = _k.cast_ray(float(x), float(y), float(theta + relative_angle), maze.ray_segments,
                    float(laser_range))
    return min(d, laser_range) / laser_range


def step_robot(state: RobotState, raw_action, maze: MazeMap):
    """One step; returns the new state and the executed action ``a_t``."""
    x, y, th, a1, a2 = _k.step_pose(float(state.x), float(state.y), float(state.theta),
                                    float(raw_action[0]), float(raw_action[1]),
                                    float(state.radius), maze.walls,
                                    np.asarray(maze.bounds, dtype=np.float64))
    return RobotState(x, y, th, state.radius), (a1, a2)


def sense(state: RobotState, maze: MazeMap, params: RobotParams) -> np.ndarray:
    out = np.empty(5)
    _k.sense(float(state.x), float(state.y), float(state.theta), maze.ray_segments,
             float(params.laser_range), float(params.bumper_reach), out)
    return out


def rollouts(weights: np.ndarray, maze: MazeMap, mode: str,
             params: RobotParams = RobotParams()) -> tuple[TrajectoryBatch, np.ndarray]:
    """Roll out a batch of policies; returns trajectories and final goal distances."""
    if mode not in MODES:
        raise InvalidConfig(f"reward mode must be one of {tuple(MODES)}, got {mode!r}")
    weights = np.ascontiguousarray(np.atleast_2d(weights), dtype=np.float64)
    pos, reward, final = _k.maze_rollouts(
        weights, int(params.hidden), maze.walls, maze.ray_segments,
        np.asarray(maze.bounds, dtype=np.float64), np.asarray(maze.start, dtype=np.float64),
        np.asarray(maze.goal, dtype=np.float64), float(params.radius),
        float(params.laser_range), float(params.bumper_reach), MODES[mode], int(params.steps))
    length = np.full(weights.shape[0], params.steps, dtype=np.int64)
    return TrajectoryBatch(pos, reward, length, maze.bounds, t0=1), final


def rollout(g, maze: MazeMap, mode: str, T: int = 250, params: RobotParams | None = None) -> Trajectory:
    params = RobotParams(steps=T) if params is None else params
    batch, _ = rollouts(np.asarray(g)[None], maze, mode, params)
    return batch[0]


def maze_measure(traj: Trajectory) -> tuple[float, float]:
    x, y = traj.pos[-1]
    return float(x), float(y)


def start_distance(maze: MazeMap) -> float:
    return math.hypot(maze.start[0] - maze.goal[0], maze.start[1] - maze.goal[1])


def score_floor(maze: MazeMap, mode: str, params: RobotParams) -> float:
    """Lowest attainable archive score in ``mode``."""
    if mode == DECEPTIVE:
        return -maze.diagonal
    return -2.0 * ACTION_SCALE ** 2 * params.steps


@dataclass
class MazeDomain:
    mode: str = DECEPTIVE
    maze: MazeMap = field(default_factory=load_map)
    params: RobotParams = field(default_factory=RobotParams)
    sigma: float = 0.1
    sigma_init: float | None = None
    resolution: tuple[int, int] = (64, 64)
    evaluations: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidConfig(f"reward mode must be one of {tuple(MODES)}, got {self.mode!r}")
        check_start(self.maze, self.params)
        self.genome = MlpSpec(hidden=self.params.hidden, sigma=self.sigma, sigma_init=self.sigma_init)
        self.measure_spec = MeasureSpec(self.maze.bounds, tuple(self.resolution))
        self.score_floor = score_floor(self.maze, self.mode, self.params)
        self.name = f"maze_{self.mode}"

    def init(self, p: int, rng) -> np.ndarray:
        return init_population(self.genome, p, rng).members

    def mutate(self, members: np.ndarray, rng) -> np.ndarray:
        return mutate_mlp(members, self.genome.sigma, as_generator(rng))

    def evaluate(self, members: np.ndarray) -> Evaluation:
        batch, final = rollouts(members, self.maze, self.mode, self.params)
        self.evaluations += len(batch)
        if self.mode == DECEPTIVE:
            scores = -final
        else:
            scores = batch.fitness
        return Evaluation(batch, scores, batch.pos[:, -1].copy())

    def solved(self, score: float) -> bool:
        """Goal reached: final distance within the goal radius."""
        return self.mode == DECEPTIVE and score >= -self.maze.goal_radius
