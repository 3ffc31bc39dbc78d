import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexqd.errors import DomainBug, InvalidConfig
from lexqd.subagg import (SPACE, TIME, SubaggSpec, Trajectory, TrajectoryBatch, quadtree_regions,
                          region_index, space_subaggregate, subaggregate, subaggregate_batch,
                          time_subaggregate)

UNIT = (0.0, 0.0, 1.0, 1.0)
BOARD = (-0.5, -0.5, 7.5, 7.5)


def traj(pos, reward, bounds=UNIT, t0=0):
    pos = np.asarray(pos, dtype=float)
    return Trajectory(np.arange(t0, t0 + len(pos)), pos, np.asarray(reward, dtype=float), bounds)


def brute_space(t: Trajectory, n: int) -> np.ndarray:
    """Reference: test each step against every region rectangle."""
    depth = {1: 0, 4: 1, 16: 2, 64: 3}[n]
    regions = quadtree_regions(t.bounds, depth)
    k = 2 ** depth
    out = np.zeros(n)
    for (x, y), r in zip(t.pos, t.reward):
        hits = []
        for i, (x0, y0, x1, y1) in enumerate(regions):
            col, row = i % k, i // k
            in_x = x0 <= x < x1 or (col == k - 1 and x == x1)
            in_y = y0 <= y < y1 or (row == k - 1 and y == y1)
            if in_x and in_y:
                hits.append(i)
        assert len(hits) == 1
        out[hits[0]] += r
    return out


def brute_time(rewards, n):
    L = len(rewards)
    sizes = [L // n + (1 if i < L % n else 0) for i in range(n)]
    out, i = [], 0
    for s in sizes:
        out.append(sum(rewards[i:i + s]))
        i += s
    return out


def test_board_depth1_gives_four_4x4_quadrants():
    regs = quadtree_regions(BOARD, 1)
    assert regs == [(-0.5, -0.5, 3.5, 3.5), (3.5, -0.5, 7.5, 3.5),
                    (-0.5, 3.5, 3.5, 7.5), (3.5, 3.5, 7.5, 7.5)]


def test_depth0_is_bounds():
    assert quadtree_regions(UNIT, 0) == [UNIT]


def test_depth2_tiles_unit_square():
    regs = quadtree_regions(UNIT, 2)
    assert len(regs) == 16
    areas = [(x1 - x0) * (y1 - y0) for x0, y0, x1, y1 in regs]
    assert np.allclose(areas, 0.0625)
    assert sum(areas) == pytest.approx(1.0)
    # exhaustive grid of probe points lands in exactly one region each
    g = np.linspace(0, 1, 41)
    pts = np.array([(x, y) for x in g for y in g])
    idx = region_index(pts, UNIT, 2)
    for (x, y), i in zip(pts, idx):
        x0, y0, x1, y1 = regs[i]
        assert x0 <= x <= x1 and y0 <= y <= y1


def test_regions_row_major_from_low_y():
    regs = quadtree_regions(UNIT, 1)
    assert regs[1][0] == 0.5 and regs[1][1] == 0.0
    assert regs[2][0] == 0.0 and regs[2][1] == 0.5


@pytest.mark.parametrize("depth", [-1, 4])
def test_bad_depth(depth):
    with pytest.raises(InvalidConfig):
        quadtree_regions(UNIT, depth)


def test_shared_edge_goes_to_upper_region_and_max_edge_closed():
    assert list(region_index([(0.5, 0.5), (1.0, 1.0), (0.0, 0.0), (1.0, 0.0)], UNIT, 1)) == [3, 3, 0, 1]


def test_knight_tour_in_one_quadrant():
    tiles = [(0, 0), (1, 2), (2, 0), (3, 2), (1, 3)]
    t = traj(tiles, np.ones(5), BOARD)
    assert list(space_subaggregate(t, SubaggSpec(SPACE, 4))) == [5.0, 0.0, 0.0, 0.0]


def test_time_windows_direct_arithmetic():
    t = traj(np.full((4, 2), 0.5), [1, 2, 3, 4])
    assert list(time_subaggregate(t, SubaggSpec(TIME, 2))) == [3.0, 7.0]


def test_time_windows_remainder_goes_first():
    t = traj(np.full((7, 2), 0.5), [1, 2, 3, 4, 5, 6, 7])
    assert list(time_subaggregate(t, SubaggSpec(TIME, 3))) == [1 + 2 + 3, 4 + 5, 6 + 7]


def test_time_windows_quarters():
    r = np.arange(1.0, 251.0)
    t = traj(np.full((250, 2), 0.5), r)
    got = time_subaggregate(t, SubaggSpec(TIME, 4))
    # 250 = 63 + 63 + 62 + 62
    assert list(got) == [r[:63].sum(), r[63:126].sum(), r[126:188].sum(), r[188:].sum()]


def test_more_windows_than_steps():
    t = traj(np.full((3, 2), 0.5), [1, 1, 1])
    with pytest.raises(InvalidConfig):
        time_subaggregate(t, SubaggSpec(TIME, 4))


def test_step_outside_bounds_is_domain_bug():
    t = traj([(0.5, 0.5), (1.5, 0.5)], [1, 1])
    with pytest.raises(DomainBug):
        space_subaggregate(t, SubaggSpec(SPACE, 4))


def test_space_counts_must_be_quadtree():
    with pytest.raises(InvalidConfig):
        SubaggSpec(SPACE, 8)
    assert SubaggSpec(TIME, 8).n == 8


def test_kind_checked():
    with pytest.raises(InvalidConfig):
        SubaggSpec("ring", 4)
    with pytest.raises(InvalidConfig):
        time_subaggregate(traj([(0.5, 0.5)], [1]), SubaggSpec(SPACE, 1))


def test_labels():
    assert SubaggSpec(SPACE, 64).label == "lex-64"
    assert SubaggSpec(TIME, 16).label == "lex-16-time"


def test_empty_trajectory_rejected():
    with pytest.raises(DomainBug):
        traj(np.zeros((0, 2)), [])


def test_batch_respects_lengths():
    pos = np.full((2, 4, 2), 0.25)
    reward = np.array([[1.0, 2, 3, 4], [5, 6, 99, 99]])
    b = TrajectoryBatch(pos, reward, np.array([4, 2]), UNIT)
    assert subaggregate_batch(b, SubaggSpec(SPACE, 1))[:, 0].tolist() == [10.0, 11.0]
    assert subaggregate_batch(b, SubaggSpec(TIME, 2)).tolist() == [[3.0, 7.0], [5.0, 6.0]]
    assert b.fitness.tolist() == [10.0, 11.0]
    assert len(b[1]) == 2


finite = st.floats(-1e3, 1e3, allow_nan=False)


@st.composite
def trajectories(draw):
    L = draw(st.integers(1, 80))
    xs = draw(st.lists(st.floats(0, 1), min_size=L, max_size=L))
    ys = draw(st.lists(st.floats(0, 1), min_size=L, max_size=L))
    rs = draw(st.lists(finite, min_size=L, max_size=L))
    return traj(np.column_stack([xs, ys]), rs)


@settings(max_examples=100, deadline=None)
@given(t=trajectories(), n=st.sampled_from([1, 4, 16, 64]))
def test_space_partition_property(t, n):
    got = space_subaggregate(t, SubaggSpec(SPACE, n))
    assert got.sum() == pytest.approx(t.fitness, abs=1e-9, rel=1e-12)
    assert np.allclose(got, brute_space(t, n), atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(t=trajectories(), n=st.sampled_from([1, 4, 16, 64]))
def test_time_partition_property(t, n):
    if n > len(t):
        return
    got = time_subaggregate(t, SubaggSpec(TIME, n))
    assert got.sum() == pytest.approx(t.fitness, abs=1e-9, rel=1e-12)
    assert np.allclose(got, brute_time(list(t.reward), n), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(t=trajectories())
def test_single_objective_equals_fitness_exactly(t):
    assert subaggregate(t, SubaggSpec(SPACE, 1))[0] == t.fitness
    assert subaggregate(t, SubaggSpec(TIME, 1))[0] == t.fitness


@settings(max_examples=30, deadline=None)
@given(depth=st.integers(0, 3))
def test_regions_deterministic(depth):
    assert quadtree_regions(BOARD, depth) == quadtree_regions(BOARD, depth)
