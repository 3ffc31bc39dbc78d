"""Grid archive over a 2-D measure space, plus Best Score / QD-Score /
Coverage. Used both as the MAP-Elites store and as the statistics archive
for lexicase runs.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainBug, EmptyArchive, InvalidConfig, InvalidInput
from .evo import as_generator

HEATMAP_HEADER = "rows,cols,x_min,y_min,x_max,y_max"
EMPTY_TOKEN = "nan"


class Insert(enum.Enum):
    INSERTED_NEW = "inserted_new"
    REPLACED = "replaced"
    REJECTED = "rejected"


@dataclass(frozen=True)
class MeasureSpec:
    bounds: tuple[float, float, float, float]
    resolution: tuple[int, int]

    def __post_init__(self):
        rows, cols = self.resolution
        if rows < 1 or cols < 1:
            raise InvalidConfig(f"resolution must be positive, got {self.resolution}")
        x0, y0, x1, y1 = self.bounds
        if not (x1 > x0 and y1 > y0):
            raise InvalidConfig(f"degenerate measure bounds {self.bounds}")

    @property
    def n_cells(self) -> int:
        return self.resolution[0] * self.resolution[1]


def measure_to_cell(m, spec: MeasureSpec) -> tuple[int, int]:
    """(row, col) for measure (x, y); row bins y, col bins x.

    Bins are half-open; a measure on the upper edge falls in the last bin.
    """
    cells = measures_to_cells(np.asarray(m, dtype=np.float64)[None], spec)
    return divmod(int(cells[0]), spec.resolution[1])


def measures_to_cells(ms: np.ndarray, spec: MeasureSpec) -> np.ndarray:
    """Flat cell index ``row * cols + col`` for each row of ``ms``."""
    x0, y0, x1, y1 = spec.bounds
    rows, cols = spec.resolution
    x = ms[:, 0]
    y = ms[:, 1]
    outside = ~((x >= x0) & (x <= x1) & (y >= y0) & (y <= y1))
    if outside.any():
        bad = ms[np.argmax(outside)]
        raise DomainBug(f"measure {tuple(bad)} outside archive bounds {spec.bounds}")
    col = np.minimum(((x - x0) / (x1 - x0) * cols).astype(np.int64), cols - 1)
    row = np.minimum(((y - y0) / (y1 - y0) * rows).astype(np.int64), rows - 1)
    return row * cols + col


class Archive:
    """Best-scoring occupant per cell. Ties keep the incumbent."""

    def __init__(self, spec: MeasureSpec, score_floor: float = 0.0):
        self.spec = spec
        self.score_floor = float(score_floor)
        n = spec.n_cells
        self.occupied = np.zeros(n, dtype=bool)
        self.scores = np.full(n, np.nan)
        self.measures = np.full((n, 2), np.nan)
        self.genomes: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.occupied.sum())

    def _ensure_storage(self, genome: np.ndarray):
        if self.genomes is None:
            self.genomes = np.zeros((self.spec.n_cells,) + genome.shape, dtype=genome.dtype)

    def _check_score(self, score):
        if not math.isfinite(score):
            raise DomainBug(f"non-finite score {score}")
        if score < self.score_floor:
            raise DomainBug(f"score {score} below declared floor {self.score_floor}")

    def insert(self, genome, measure, score: float) -> Insert:
        score = float(score)
        self._check_score(score)
        genome = np.asarray(genome)
        row, col = measure_to_cell(measure, self.spec)
        c = row * self.spec.resolution[1] + col
        if self.occupied[c] and not score > self.scores[c]:
            return Insert.REJECTED
        status = Insert.REPLACED if self.occupied[c] else Insert.INSERTED_NEW
        self._ensure_storage(genome)
        self.genomes[c] = genome
        self.scores[c] = score
        self.measures[c] = measure
        self.occupied[c] = True
        return status

    def insert_batch(self, genomes, measures, scores) -> int:
        """Insert rows in index order; same result as repeated :meth:`insert`.

        Returns the number of cells that changed occupant.
        """
        genomes = np.asarray(genomes)
        measures = np.asarray(measures, dtype=np.float64)
        scores = np.asarray(scores, dtype=np.float64)
        if len(scores) == 0:
            return 0
        if not np.isfinite(scores).all() or (scores < self.score_floor).any():
            raise DomainBug("batch contains a non-finite score or one below the floor")
        cells = measures_to_cells(measures, self.spec)
        # per cell: first row attaining the batch maximum
        order = np.lexsort((np.arange(len(cells)), -scores, cells))
        first = np.ones(len(order), dtype=bool)
        first[1:] = cells[order[1:]] != cells[order[:-1]]
        win = order[first]
        wc = cells[win]
        better = ~self.occupied[wc] | (scores[win] > np.where(self.occupied[wc], self.scores[wc], -np.inf))
        win = win[better]
        wc = wc[better]
        self._ensure_storage(genomes[0])
        self.genomes[wc] = genomes[win]
        self.scores[wc] = scores[win]
        self.measures[wc] = measures[win]
        self.occupied[wc] = True
        return int(len(win))

    def select_batch(self, batch: int, rng) -> np.ndarray:
        """``batch`` occupants drawn uniformly, with replacement."""
        if batch < 1:
            raise InvalidConfig(f"batch must be >= 1, got {batch}")
        occ = np.flatnonzero(self.occupied)
        if occ.size == 0:
            raise EmptyArchive("archive is empty; seed it before selecting")
        gen = as_generator(rng)
        return self.genomes[occ[gen.integers(0, occ.size, size=batch)]].copy()

    def qd_score(self) -> float:
        if not self.occupied.any():
            return 0.0
        return float(np.sum(self.scores[self.occupied] - self.score_floor))

    def raw_score_sum(self) -> float:
        return float(np.sum(self.scores[self.occupied])) if self.occupied.any() else 0.0

    def coverage(self) -> float:
        return float(self.occupied.sum()) / self.spec.n_cells

    def best_score(self) -> float:
        if not self.occupied.any():
            raise EmptyArchive("empty archive has no best score")
        return float(np.max(self.scores[self.occupied]))

    def score_grid(self) -> np.ndarray:
        return self.scores.reshape(self.spec.resolution).copy()

    def export_heatmap(self, path) -> Path:
        path = Path(path)
        rows, cols = self.spec.resolution
        x0, y0, x1, y1 = self.spec.bounds
        grid = self.score_grid()
        lines = [HEATMAP_HEADER, ",".join([str(rows), str(cols)] + [repr(float(v)) for v in (x0, y0, x1, y1)])]
        for r in range(rows):
            lines.append(",".join(EMPTY_TOKEN if math.isnan(v) else repr(float(v)) for v in grid[r]))
        path.write_text("\n".join(lines) + "\n")
        return path


def load_heatmap(path) -> tuple[MeasureSpec, np.ndarray]:
    """Parse a heatmap CSV back into its spec and (rows, cols) score grid."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != HEATMAP_HEADER:
        raise InvalidInput(f"{path}: missing heatmap header {HEATMAP_HEADER!r}")
    try:
        head = lines[1].split(",")
        rows, cols = int(head[0]), int(head[1])
        spec = MeasureSpec(tuple(float(v) for v in head[2:6]), (rows, cols))
        grid = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    except (IndexError, ValueError) as exc:
        raise InvalidInput(f"{path}: malformed heatmap ({exc})") from None
    if grid.shape != (rows, cols):
        raise InvalidInput(f"{path}: grid shape {grid.shape} != {(rows, cols)}")
    return spec, grid
