"""Knight's Tour: replay a move genome from the corner (0, 0) until the
first move that leaves the board or revisits a tile.

Every visited tile, the start included, is one step with reward 1, so the
fitness is the number of tiles visited (1 to 64). Positions are integer
tile coordinates inside :data:`BOARD_BOUNDS`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .archive import MeasureSpec
from .evo import KnightSpec, as_generator, init_population, mutate_knight
from .kernels import impl as _k
from .subagg import Evaluation, Trajectory, TrajectoryBatch

# tile k spans [k - 0.5, k + 0.5), so quadtree cells and archive bins align with tiles
BOARD_BOUNDS = (-0.5, -0.5, 7.5, 7.5)
BOARD_MEASURE = MeasureSpec(BOARD_BOUNDS, (8, 8))
MAX_TOUR = 64


def evaluate_knights(moves: np.ndarray) -> TrajectoryBatch:
    moves = np.ascontiguousarray(np.atleast_2d(moves), dtype=np.int64)
    tiles, lengths = _k.knight_tours(moves)
    reward = (np.arange(tiles.shape[1])[None, :] < lengths[:, None]).astype(np.float64)
    return TrajectoryBatch(tiles.astype(np.float64), reward, lengths, BOARD_BOUNDS, t0=0)


def evaluate_knight(g) -> Trajectory:
    return evaluate_knights(np.asarray(g)[None])[0]


def knight_measure(traj: Trajectory) -> tuple[int, int]:
    x, y = traj.pos[-1]
    return int(x), int(y)


def batch_end_tiles(batch: TrajectoryBatch) -> np.ndarray:
    rows = np.arange(len(batch))
    return batch.pos[rows, batch.length - 1]


@dataclass
class KnightsDomain:
    genome: KnightSpec = field(default_factory=KnightSpec)
    name: str = "knights"
    evaluations: int = 0

    measure_spec = BOARD_MEASURE
    score_floor = 0.0

    def init(self, p: int, rng) -> np.ndarray:
        return init_population(self.genome, p, rng).members

    def mutate(self, members: np.ndarray, rng) -> np.ndarray:
        return mutate_knight(members, self.genome.per_gene_rate, as_generator(rng))

    def evaluate(self, members: np.ndarray) -> Evaluation:
        batch = evaluate_knights(members)
        self.evaluations += len(batch)
        return Evaluation(batch, batch.length.astype(np.float64), batch_end_tiles(batch))
