"""Acceptance suite: one test per numbered criterion, each reported in the
"acceptance criteria" section of the pytest summary.

The full-budget runs (knights, deceptive maze) take tens of minutes on one
core; deselect them with ``-m "not acceptance"`` for a quick run.
"""
import math
import re
import time
from dataclasses import replace
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from lexqd.archive import Archive, Insert, MeasureSpec
from lexqd.cli import main
from lexqd.evo import RngStream
from lexqd.knights import KnightsDomain
from lexqd.maze import DECEPTIVE, ILLUMINATION, MazeDomain
from lexqd.runner import (build_domain, load_config, read_metrics, run_replicate, summary_fields,
                          sweep_conditions)
from lexqd.selection import lexicase_select_parents, selection_probability_oracle
from lexqd.subagg import SPACE, TIME, SubaggSpec, subaggregate_batch

pytestmark = pytest.mark.acceptance

SWEEPS = Path(__file__).resolve().parents[1] / "configs" / "sweep"
COUNTS = (1, 4, 16, 64)


def shipped(name: str):
    return load_config(SWEEPS / f"{name}.ini")


@lru_cache(maxsize=None)
def deceptive_finals(kind: str, n: int) -> tuple[float, ...]:
    """Final best scores of the shipped deceptive-maze config, per replicate."""
    base, _ = shipped("maze_deceptive")
    c = replace(base, algorithm="lexicase", subagg=SubaggSpec(kind, n))
    return tuple(run_replicate(c, r).rows[-1].best_score for r in range(c.replicates))


def goal_hits(finals, radius: float) -> int:
    return sum(s >= -radius for s in finals)


# 1 -------------------------------------------------------------------------

def test_c1_partition_identity(criterion):
    t0 = time.perf_counter()
    gen = RngStream(11).generator()
    worst = 0.0
    checked = 0
    domains = [KnightsDomain(), MazeDomain(mode=DECEPTIVE), MazeDomain(mode=ILLUMINATION)]
    for dom in domains:
        members = dom.init(1000, gen)
        if isinstance(dom, MazeDomain):
            members = members * gen.uniform(1, 20, size=(1000, 1))  # vary how far robots travel
        batch = dom.evaluate(members).batch
        f = batch.fitness
        for kind in (SPACE, TIME):
            for n in COUNTS:
                if isinstance(dom, KnightsDomain) and kind == TIME:
                    # windows exist only for tours with at least n tiles
                    keep = batch.length >= n
                    if not keep.any():
                        continue
                    sub = type(batch)(batch.pos[keep], batch.reward[keep], batch.length[keep],
                                      batch.bounds, batch.t0)
                    r = subaggregate_batch(sub, SubaggSpec(kind, n))
                    err = np.abs(r.sum(axis=1) - f[keep])
                else:
                    r = subaggregate_batch(batch, SubaggSpec(kind, n))
                    err = np.abs(r.sum(axis=1) - f)
                worst = max(worst, float(err.max(initial=0.0)))
                checked += 1
    elapsed = time.perf_counter() - t0
    ok = criterion(1, worst <= 1e-9 and elapsed < 10,
                   f"{checked} (domain, kind, n) cases, max |sum R - f| = {worst:.2e}, {elapsed:.1f}s")
    assert ok


# 2 -------------------------------------------------------------------------

def test_c2_lexicase_matches_oracle(criterion):
    t0 = time.perf_counter()
    gen = RngStream(22).generator()
    worst = 0.0
    for _ in range(50):
        p, n = int(gen.integers(1, 9)), int(gen.integers(1, 6))
        m = gen.integers(0, 3, size=(p, n)).astype(np.float64)
        exact = selection_probability_oracle(m)
        draws = lexicase_select_parents(m, 100_000, gen)
        freq = np.bincount(draws, minlength=p) / 100_000
        worst = max(worst, float(np.abs(freq - exact).max()))
    elapsed = time.perf_counter() - t0
    ok = criterion(2, worst <= 0.01 and elapsed < 60,
                   f"50 matrices, max |freq - oracle| = {worst:.4f}, {elapsed:.1f}s")
    assert ok


# 3 -------------------------------------------------------------------------

def test_c3_archive_semantics(criterion):
    spec = MeasureSpec((0.0, 0.0, 1.0, 1.0), (4, 4))
    a = Archive(spec, score_floor=-10.0)
    g = np.zeros(3)
    rules = [
        a.insert(g, (0.1, 0.1), 1.0) == Insert.INSERTED_NEW,
        a.insert(g + 1, (0.15, 0.15), 2.0) == Insert.REPLACED,
        a.insert(g + 2, (0.12, 0.2), 1.5) == Insert.REJECTED,
        a.insert(g + 3, (0.2, 0.1), 2.0) == Insert.REJECTED,
        a.genomes[0][0] == 1.0,
    ]

    gen = RngStream(33).generator()
    big = Archive(MeasureSpec((0.0, 0.0, 1.0, 1.0), (16, 16)), score_floor=-1.0)
    prev = (-math.inf, 0.0, 0.0)
    monotone = True
    for i in range(10_000):
        big.insert(np.array([i]), gen.random(2), float(gen.uniform(-1, 1)))
        cur = (big.best_score(), big.qd_score(), big.coverage())
        monotone &= all(c >= q for c, q in zip(cur, prev))
        prev = cur
    ok = criterion(3, all(rules) and monotone,
                   f"insertion rules {sum(rules)}/{len(rules)}, monotone over 10^4 inserts: {monotone}")
    assert ok


# 4 -------------------------------------------------------------------------

def test_c4_knights_lexicase_beats_map_elites(criterion):
    t0 = time.perf_counter()
    base, sweep = shipped("knights")
    finals = {}
    for c in sweep_conditions(base, sweep):
        if c.label not in ("me", "lex-64"):
            continue
        finals[c.label] = np.mean([run_replicate(c, r).rows[-1].best_score
                                   for r in range(c.replicates)])
    elapsed = time.perf_counter() - t0
    lex, me = finals["lex-64"], finals["me"]
    ok = criterion(4, lex > me and lex >= 40,
                   f"mean final best lex-64 {lex:.1f} vs me {me:.1f} "
                   f"(p={base.p}, G={base.generations}, {base.replicates} reps, {elapsed:.0f}s)")
    assert ok


# 5 -------------------------------------------------------------------------

def test_c5_deceptive_maze_escape(criterion):
    t0 = time.perf_counter()
    base, _ = shipped("maze_deceptive")
    radius = build_domain(base).maze.goal_radius
    lex64 = goal_hits(deceptive_finals(SPACE, 64), radius)
    lex1 = goal_hits(deceptive_finals(SPACE, 1), radius)
    elapsed = time.perf_counter() - t0
    ok = criterion(5, lex64 >= 7 and lex1 <= 3,
                   f"goal reached lex-64 {lex64}/10, lex-1 {lex1}/10 "
                   f"(p={base.p}, G={base.generations}, {elapsed:.0f}s)")
    assert ok


# 6 -------------------------------------------------------------------------

def test_c6_illumination_zero_energy(criterion):
    base, sweep = shipped("maze_illumination")
    bests = {}
    for c in sweep_conditions(replace(base, generations=10), sweep):
        bests[c.label] = [run_replicate(c, r).rows[-1].best_score for r in range(c.replicates)]
    hits = {k: sum(v == 0.0 for v in vs) for k, vs in bests.items()}
    closest = max(max(vs) for vs in bests.values())
    ok = criterion(6, all(h == base.replicates for h in hits.values()),
                   f"replicates with best == 0 by gen 10: {hits}; highest best {closest:.3g}")
    assert ok


# 7 -------------------------------------------------------------------------

def test_c7_knight_full_coverage(criterion):
    base, sweep = shipped("knights")
    full = {}
    for c in sweep_conditions(replace(base, generations=10), sweep):
        full[c.label] = sum(run_replicate(c, r).rows[-1].coverage == 1.0
                            for r in range(c.replicates))
    ok = criterion(7, all(v == base.replicates for v in full.values()),
                   f"replicates at coverage 1.0 by gen 10: {full}")
    assert ok


# 8 -------------------------------------------------------------------------

def _small_copy(src: Path, dst: Path, **values) -> Path:
    text = src.read_text()
    for key, v in values.items():
        text = re.sub(rf"(?m)^{key}\s*=.*$", f"{key} = {v}", text)
    dst.write_text(text)
    return dst


def test_c8_determinism_across_threads(criterion, tmp_path):
    same = []
    for name in ("knights", "maze_deceptive", "maze_illumination"):
        cfg = _small_copy(SWEEPS / f"{name}.ini", tmp_path / f"{name}.ini",
                          population=32, generations=4, replicates=2)
        outs = []
        for i, threads in enumerate((1, 1, 2)):
            out = tmp_path / f"{name}-{i}"
            assert main(["run", str(cfg), "--out", str(out), "--threads", str(threads)]) == 0
            outs.append((out / "metrics.csv").read_bytes())
        same.append(outs[0] == outs[1] == outs[2])
    ok = criterion(8, all(same), f"byte-identical metrics.csv (twice, threads 1 and 2): {same}")
    assert ok


# 9 -------------------------------------------------------------------------

def test_c9_time_ablation_harness(criterion, tmp_path):
    cfgs = tmp_path / "cfgs"
    cfgs.mkdir()
    for name in ("maze_deceptive", "maze_illumination"):
        _small_copy(SWEEPS / f"{name}.ini", cfgs / f"{name}.ini",
                    population=16, generations=3, replicates=2, kinds="time_windows",
                    objectives="4 16 64")
    assert main(["sweep", str(cfgs), "--out", str(tmp_path / "runs")]) == 0
    header = ",".join(summary_fields())
    comparable = True
    found = []
    for name in ("maze_deceptive", "maze_illumination"):
        axes = set()
        for label in ("me", "lex-4-time", "lex-16-time", "lex-64-time"):
            path = tmp_path / "runs" / name / label / "summary.csv"
            found.append(path.is_file())
            if not path.is_file():
                comparable = False
                continue
            lines = path.read_text().splitlines()
            comparable &= lines[0] == header
            axes.add(tuple(ln.split(",")[0:2] for ln in lines[1:]).__repr__())
            read_metrics(path.parent / "metrics.csv")
        comparable &= len(axes) == 1

    base, _ = shipped("maze_deceptive")
    radius = build_domain(base).maze.goal_radius
    hits = goal_hits(deceptive_finals(TIME, 64), radius)
    ok = criterion(9, all(found) and comparable and hits >= 5,
                   f"summaries {sum(found)}/{len(found)} comparable={comparable}; "
                   f"time lex-64 goal reached {hits}/10")
    assert ok
