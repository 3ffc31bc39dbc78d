"""Experiment loops (lexicase and MAP-Elites), config parsing and CSV output."""
from __future__ import annotations

import configparser
import csv
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .archive import Archive
from .errors import InvalidConfig, InvalidInput
from .evo import KnightSpec, RngStream
from .knights import KnightsDomain
from .maze import DECEPTIVE, ILLUMINATION, MazeDomain, RobotParams, load_map
from .selection import lexicase_select_parents
from .subagg import KINDS, OBJECTIVE_COUNTS, SPACE, TIME, SubaggSpec, subaggregate_batch

log = logging.getLogger(__name__)

DOMAINS = ("knights", "maze_deceptive", "maze_illumination")
ALGORITHMS = ("lexicase", "map_elites")
METRIC_FIELDS = ("replicate", "generation", "evaluations", "best_score", "qd_score", "coverage")
SUMMARY_METRICS = ("best_score", "qd_score", "coverage")


class MetricsRow(NamedTuple):
    replicate: int
    generation: int
    evaluations: int
    best_score: float
    qd_score: float
    coverage: float


@dataclass
class ExperimentConfig:
    domain: str = "knights"
    algorithm: str = "lexicase"
    subagg: SubaggSpec = field(default_factory=SubaggSpec)
    p: int = 256
    generations: int = 300
    replicates: int = 10
    seed: int = 0
    seeds: tuple[int, ...] | None = None
    knight_rate: float = 2 / 63
    mlp_sigma: float = 0.1
    mlp_sigma_init: float | None = None
    hidden: int = 8
    resolution: tuple[int, int] = (64, 64)
    maze_map: str | None = None
    steps: int = 250
    robot_radius: float = 0.015
    laser_range: float = 0.2
    epsilon: float = 0.0
    out: str | None = None
    name: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.domain not in DOMAINS:
            raise InvalidConfig(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        if self.algorithm not in ALGORITHMS:
            raise InvalidConfig(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.p < 1:
            raise InvalidConfig(f"p must be >= 1, got {self.p}")
        if self.generations < 0:
            raise InvalidConfig(f"generations must be >= 0, got {self.generations}")
        if self.replicates < 1:
            raise InvalidConfig(f"replicates must be >= 1, got {self.replicates}")
        if self.seeds is not None and len(self.seeds) < self.replicates:
            raise InvalidConfig(f"{self.replicates} replicates but only {len(self.seeds)} seeds")
        if self.epsilon < 0:
            raise InvalidConfig("epsilon must be >= 0")
        if self.domain == "knights" and self.algorithm == "lexicase" and self.subagg.kind == TIME:
            # knight tours may be one step long; windows would be empty
            raise InvalidConfig("time-window subaggregation is not defined for knights")

    @property
    def total_evaluations(self) -> int:
        return self.p * (self.generations + 1)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return "me" if self.algorithm == "map_elites" else self.subagg.label

    def replicate_seed(self, i: int) -> int:
        return int(self.seeds[i]) if self.seeds is not None else self.seed + i


def build_domain(config: ExperimentConfig):
    if config.domain == "knights":
        return KnightsDomain(KnightSpec(per_gene_rate=config.knight_rate))
    mode = DECEPTIVE if config.domain == "maze_deceptive" else ILLUMINATION
    params = RobotParams(radius=config.robot_radius, laser_range=config.laser_range,
                         steps=config.steps, hidden=config.hidden)
    return MazeDomain(mode=mode, maze=load_map(config.maze_map), params=params,
                      sigma=config.mlp_sigma, sigma_init=config.mlp_sigma_init,
                      resolution=config.resolution)


def _row(replicate, generation, domain, archive) -> MetricsRow:
    return MetricsRow(replicate, generation, domain.evaluations,
                      archive.best_score(), archive.qd_score(), archive.coverage())


@dataclass
class RunResult:
    rows: list[MetricsRow]
    archive: Archive
    evaluations: int


def run_lexicase(config: ExperimentConfig, replicate: int = 0) -> RunResult:
    """Evolve one population under lexicase selection on subaggregated
    objectives; each generation is also inserted into a statistics archive."""
    if config.algorithm != "lexicase":
        raise InvalidConfig("run_lexicase needs algorithm = lexicase")
    domain = build_domain(config)
    gen = RngStream(config.replicate_seed(replicate)).generator()
    archive = Archive(domain.measure_spec, domain.score_floor)
    p = config.p
    members = domain.init(p, gen)
    rows = []
    for g in range(config.generations + 1):
        ev = domain.evaluate(members)
        archive.insert_batch(members, ev.measures, ev.scores)
        rows.append(_row(replicate, g, domain, archive))
        if g == config.generations:
            break
        objectives = subaggregate_batch(ev.batch, config.subagg)
        parents = lexicase_select_parents(objectives, p, gen, config.epsilon)
        members = domain.mutate(members[parents], gen)
    return RunResult(rows, archive, domain.evaluations)


def run_map_elites(config: ExperimentConfig, replicate: int = 0) -> RunResult:
    """Seed an archive with p random genomes, then per generation mutate a
    uniformly drawn batch of p elites and reinsert them."""
    if config.algorithm != "map_elites":
        raise InvalidConfig("run_map_elites needs algorithm = map_elites")
    domain = build_domain(config)
    gen = RngStream(config.replicate_seed(replicate)).generator()
    archive = Archive(domain.measure_spec, domain.score_floor)
    p = config.p
    members = domain.init(p, gen)
    rows = []
    for g in range(config.generations + 1):
        if g > 0:
            members = domain.mutate(archive.select_batch(p, gen), gen)
        ev = domain.evaluate(members)
        archive.insert_batch(members, ev.measures, ev.scores)
        rows.append(_row(replicate, g, domain, archive))
    return RunResult(rows, archive, domain.evaluations)


def run_replicate(config: ExperimentConfig, replicate: int) -> RunResult:
    fn = run_lexicase if config.algorithm == "lexicase" else run_map_elites
    result = fn(config, replicate)
    if result.evaluations != config.total_evaluations:
        raise RuntimeError(f"evaluation budget drift: {result.evaluations} != {config.total_evaluations}")
    return result


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> list[RunResult]:
    kernels.set_threads(threads)
    results = []
    for r in range(config.replicates):
        res = run_replicate(config, r)
        log.info("%s replicate %d: final best %.6g, coverage %.4f", config.label, r,
                 res.rows[-1].best_score, res.rows[-1].coverage)
        results.append(res)
    return results


# --------------------------------------------------------------------------
# tables


def aggregate_replicates(tables: Sequence[Sequence[MetricsRow]]) -> list[dict]:
    """Per-generation mean and sample std (ddof=1; 0 for one replicate)."""
    if not tables:
        raise InvalidInput("need at least one metrics table")
    gens = [tuple(r.generation for r in t) for t in tables]
    if any(g != gens[0] for g in gens):
        raise InvalidInput("replicate tables have misaligned generation axes")
    out = []
    for i, g in enumerate(gens[0]):
        rec = {"generation": g, "evaluations": tables[0][i].evaluations}
        for m in SUMMARY_METRICS:
            vals = np.array([getattr(t[i], m) for t in tables], dtype=np.float64)
            rec[f"{m}_mean"] = float(vals.mean())
            rec[f"{m}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        out.append(rec)
    return out


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_metrics(rows: Sequence[MetricsRow], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRIC_FIELDS)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def read_metrics(path) -> list[MetricsRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != METRIC_FIELDS:
            raise InvalidInput(f"{path}: unexpected header {reader.fieldnames}")
        return [MetricsRow(int(d["replicate"]), int(d["generation"]), int(d["evaluations"]),
                           float(d["best_score"]), float(d["qd_score"]), float(d["coverage"]))
                for d in reader]


def summary_fields() -> list[str]:
    cols = ["generation", "evaluations"]
    for m in SUMMARY_METRICS:
        cols += [f"{m}_mean", f"{m}_std"]
    return cols


def write_summary(summary: Sequence[dict], path) -> Path:
    path = Path(path)
    cols = summary_fields()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for rec in summary:
            w.writerow([_fmt(rec[c]) for c in cols])
    return path


def split_by_replicate(rows: Sequence[MetricsRow]) -> list[list[MetricsRow]]:
    by = {}
    for r in rows:
        by.setdefault(r.replicate, []).append(r)
    return [by[k] for k in sorted(by)]


def write_outputs(config: ExperimentConfig, results: Sequence[RunResult], out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [r for res in results for r in res.rows]
    paths = {
        "metrics": write_metrics(rows, out / "metrics.csv"),
        "summary": write_summary(aggregate_replicates([res.rows for res in results]), out / "summary.csv"),
        "archive": results[0].archive.export_heatmap(out / "archive.csv"),
    }
    return paths


# --------------------------------------------------------------------------
# config files

def _parse_real(text: str) -> float:
    """A float or an exact fraction such as ``4/63``."""
    return float(Fraction(text.strip()))


_SCHEMA = {
    # section.key -> (field, parser)
    "experiment.domain": ("domain", str),
    "experiment.algorithm": ("algorithm", str),
    "experiment.population": ("p", int),
    "experiment.generations": ("generations", int),
    "experiment.replicates": ("replicates", int),
    "experiment.seed": ("seed", int),
    "experiment.name": ("name", str),
    "experiment.out": ("out", str),
    "mutation.knight_rate": ("knight_rate", _parse_real),
    "mutation.sigma": ("mlp_sigma", _parse_real),
    "mutation.sigma_init": ("mlp_sigma_init", _parse_real),
    "maze.map": ("maze_map", str),
    "maze.steps": ("steps", int),
    "maze.hidden": ("hidden", int),
    "maze.robot_radius": ("robot_radius", _parse_real),
    "maze.laser_range": ("laser_range", _parse_real),
    "selection.epsilon": ("epsilon", _parse_real),
}
_KNOWN_SECTIONS = {"experiment", "subagg", "mutation", "archive", "maze", "selection", "sweep"}


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def load_config(path) -> tuple[ExperimentConfig, dict]:
    """Parse an INI-style config; returns the config and the [sweep] section."""
    path = Path(path)
    if not path.is_file():
        raise InvalidConfig(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise InvalidConfig(f"{path}: {exc}") from None
    unknown = set(cp.sections()) - _KNOWN_SECTIONS
    if unknown:
        raise InvalidConfig(f"{path}: unknown sections {sorted(unknown)}")
    kw = {}
    kind, n = SPACE, 4
    try:
        for section in cp.sections():
            for key, value in cp.items(section):
                full = f"{section}.{key}"
                if full in _SCHEMA:
                    name, parse = _SCHEMA[full]
                    kw[name] = parse(value)
                elif full == "experiment.seeds":
                    kw["seeds"] = _parse_ints(value)
                elif full == "subagg.kind":
                    kind = value.strip()
                elif full == "subagg.objectives":
                    n = int(value)
                elif full == "archive.resolution":
                    res = _parse_ints(value)
                    if len(res) != 2:
                        raise InvalidConfig(f"{path}: archive.resolution needs two integers")
                    kw["resolution"] = res
                elif section == "sweep":
                    continue
                else:
                    raise InvalidConfig(f"{path}: unknown key {full!r}")
        if "maze_map" in kw and not Path(kw["maze_map"]).is_absolute():
            kw["maze_map"] = str((path.parent / kw["maze_map"]).resolve())
        config = ExperimentConfig(subagg=SubaggSpec(kind, n), **kw)
    except ValueError as exc:
        if isinstance(exc, InvalidConfig):
            raise
        raise InvalidConfig(f"{path}: {exc}") from None
    sweep = dict(cp.items("sweep")) if cp.has_section("sweep") else {}
    return config, sweep


def sweep_conditions(config: ExperimentConfig, sweep: dict) -> list[ExperimentConfig]:
    """MAP-Elites plus lexicase at every (kind, objective count) in the grid.

    Time windows skip n = 1, which coincides with the space n = 1 run.
    """
    kinds = tuple(sweep.get("kinds", SPACE if config.domain == "knights" else " ".join(KINDS)).split())
    counts = _parse_ints(sweep.get("objectives", " ".join(map(str, OBJECTIVE_COUNTS))))
    for k in kinds:
        if k not in KINDS:
            raise InvalidConfig(f"sweep kind {k!r} not in {KINDS}")
    out = [replace(config, algorithm="map_elites", name=None)]
    for k in kinds:
        for n in counts:
            if k == TIME and n == 1:
                continue
            out.append(replace(config, algorithm="lexicase", subagg=SubaggSpec(k, n), name=None))
    return out


def mean_final(results: Sequence[RunResult], metric: str = "best_score") -> float:
    return float(np.mean([getattr(r.rows[-1], metric) for r in results]))
