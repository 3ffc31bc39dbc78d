"""Pure-numpy fallback kernels, vectorized across the population axis.

Signatures and return values mirror :mod:`lexqd.kernels.numba_impl`.
Accumulation orders follow the compiled loops, so integer kernels and the
subaggregation sums agree bit-for-bit; the maze rollouts agree to libm
rounding.
"""
import math

import numpy as np

KNIGHT_DX = np.array([1, 2, 2, 1, -1, -2, -2, -1], dtype=np.int64)
KNIGHT_DY = np.array([2, 1, -1, -2, -2, -1, 1, 2], dtype=np.int64)

ACTION_SCALE = 0.025
QUARTER_PI = math.pi / 4.0
HALF_PI = math.pi / 2.0

NAME = "numpy"


def knight_tours(moves):
    moves = np.asarray(moves, dtype=np.int64)
    p, n_moves = moves.shape
    tiles = np.full((p, n_moves + 1, 2), -1, dtype=np.int64)
    lengths = np.ones(p, dtype=np.int64)
    visited = np.zeros((p, 64), dtype=bool)
    visited[:, 0] = True
    tiles[:, 0] = 0
    x = np.zeros(p, dtype=np.int64)
    y = np.zeros(p, dtype=np.int64)
    alive = np.ones(p, dtype=bool)
    rows = np.arange(p)
    for k in range(n_moves):
        nx = x + KNIGHT_DX[moves[:, k]]
        ny = y + KNIGHT_DY[moves[:, k]]
        on_board = (nx >= 0) & (nx <= 7) & (ny >= 0) & (ny <= 7)
        cell = np.where(on_board, nx * 8 + ny, 0)
        ok = alive & on_board & ~visited[rows, cell]
        alive = ok
        if not alive.any():
            break
        idx = rows[ok]
        visited[idx, cell[ok]] = True
        x = np.where(ok, nx, x)
        y = np.where(ok, ny, y)
        tiles[idx, k + 1, 0] = x[ok]
        tiles[idx, k + 1, 1] = y[ok]
        lengths[ok] += 1
    return tiles, lengths


def _bin(v, lo, hi, k):
    c = ((v - lo) / (hi - lo) * k).astype(np.int64)
    return np.minimum(c, k - 1)


def space_subagg(pos, reward, length, bounds, k):
    p, L = reward.shape
    x0, y0, x1, y1 = bounds
    valid = np.arange(L)[None, :] < np.asarray(length)[:, None]
    x = pos[:, :, 0]
    y = pos[:, :, 1]
    inside = (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
    bad = int((valid & ~inside).sum())
    use = valid & inside
    col = _bin(np.where(use, x, x0), x0, x1, k)
    row = _bin(np.where(use, y, y0), y0, y1, k)
    flat = (np.arange(p)[:, None] * (k * k) + row * k + col)[use]
    # bincount walks inputs in C order, matching the per-row t-ascending loop
    out = np.bincount(flat, weights=reward[use], minlength=p * k * k)
    return out.reshape(p, k * k), bad


def time_subagg(reward, length, n):
    p = reward.shape[0]
    out = np.zeros((p, n), dtype=np.float64)
    length = np.asarray(length)
    for L in np.unique(length):
        sel = np.flatnonzero(length == L)
        base, extra = divmod(int(L), n)
        sizes = np.full(n, base)
        sizes[:extra] += 1
        edges = np.concatenate(([0], np.cumsum(sizes)))
        for w in range(n):
            acc = np.zeros(sel.size)
            for t in range(edges[w], edges[w + 1]):
                acc += reward[sel, t]
            out[sel, w] = acc
    return out


def lexicase_select(m, perms, u, epsilon):
    m = np.asarray(m, dtype=np.float64)
    p = m.shape[0]
    count, n = perms.shape
    alive = np.ones((count, p), dtype=bool)
    for j in range(n):
        vals = m[:, perms[:, j]].T
        best = np.where(alive, vals, -np.inf).max(axis=1, keepdims=True)
        alive &= vals >= best - epsilon
    k = alive.sum(axis=1)
    r = np.minimum((u * k).astype(np.int64), k - 1)
    rank = np.cumsum(alive, axis=1)
    return np.argmax(rank > r[:, None], axis=1).astype(np.int64)


# --------------------------------------------------------------------------
# maze


def _ray_dist(x, y, angle, segs, l_max):
    dx = np.cos(angle)[:, None]
    dy = np.sin(angle)[:, None]
    ax = segs[None, :, 0]
    ay = segs[None, :, 1]
    ex = segs[None, :, 2] - ax
    ey = segs[None, :, 3] - ay
    denom = dx * ey - dy * ex
    live = np.abs(denom) >= 1e-12
    safe = np.where(live, denom, 1.0)
    wx = ax - x[:, None]
    wy = ay - y[:, None]
    t = (wx * ey - wy * ex) / safe
    v = (wx * dy - wy * dx) / safe
    hit = live & (t >= 0.0) & (v >= 0.0) & (v <= 1.0)
    return np.minimum(np.where(hit, t, l_max).min(axis=1, initial=l_max), l_max)


def _collides(x, y, rho, walls, bounds):
    out = (x - rho < bounds[0]) | (y - rho < bounds[1])
    out |= (x + rho > bounds[2]) | (y + rho > bounds[3])
    if walls.shape[0] == 0:
        return out
    ax = walls[None, :, 0]
    ay = walls[None, :, 1]
    ex = walls[None, :, 2] - ax
    ey = walls[None, :, 3] - ay
    ll = ex * ex + ey * ey
    px = x[:, None]
    py = y[:, None]
    u = np.where(ll > 0.0,
                 np.clip(((px - ax) * ex + (py - ay) * ey) / np.where(ll > 0.0, ll, 1.0), 0.0, 1.0),
                 0.0)
    qx = ax + u * ex - px
    qy = ay + u * ey - py
    return out | (qx * qx + qy * qy < rho * rho).any(axis=1)


def _step(x, y, theta, raw1, raw2, rho, walls, bounds):
    a1 = np.minimum(np.maximum(raw1, -1.0), 1.0) * ACTION_SCALE
    a2 = np.minimum(np.maximum(raw2, -1.0), 1.0) * ACTION_SCALE
    v = 0.5 * (a1 + a2)
    theta = theta + (a2 - a1) / (2.0 * rho)
    nx = x + v * np.cos(theta)
    ny = y + v * np.sin(theta)
    hit = _collides(nx, ny, rho, walls, bounds)
    return np.where(hit, x, nx), np.where(hit, y, ny), theta, a1, a2


def cast_ray(x, y, angle, segs, l_max):
    return float(_ray_dist(np.array([x]), np.array([y]), np.array([angle]), segs, l_max)[0])


def collides(x, y, rho, walls, bounds):
    return bool(_collides(np.array([x]), np.array([y]), rho, walls, bounds)[0])


def step_pose(x, y, theta, raw1, raw2, rho, walls, bounds):
    out = _step(np.array([x]), np.array([y]), np.array([theta]),
                np.array([raw1]), np.array([raw2]), rho, walls, bounds)
    return tuple(float(o[0]) for o in out)


def _sense(x, y, theta, segs, l_max, bumper_reach):
    inp = np.empty((x.shape[0], 5))
    inp[:, 0] = _ray_dist(x, y, theta - QUARTER_PI, segs, l_max) / l_max
    inp[:, 1] = _ray_dist(x, y, theta, segs, l_max) / l_max
    inp[:, 2] = _ray_dist(x, y, theta + QUARTER_PI, segs, l_max) / l_max
    inp[:, 3] = _ray_dist(x, y, theta - HALF_PI, segs, bumper_reach) < bumper_reach
    inp[:, 4] = _ray_dist(x, y, theta + HALF_PI, segs, bumper_reach) < bumper_reach
    return inp


def sense(x, y, theta, segs, l_max, bumper_reach, out):
    out[:] = _sense(np.array([x]), np.array([y]), np.array([theta]), segs, l_max, bumper_reach)[0]


# numpy's SIMD tanh can differ from libm in the last bit; libm keeps the
# fallback as close as possible to the compiled path (which may still round
# sin/cos of one angle through a fused sincos call)
_libm_tanh = np.frompyfunc(math.tanh, 1, 1)


def _forward(weights, hidden, inp):
    p, n_in = inp.shape
    off_b1 = hidden * n_in
    w1 = weights[:, :off_b1].reshape(p, hidden, n_in)
    acc = weights[:, off_b1:off_b1 + hidden].copy()
    for q in range(n_in):
        acc += w1[:, :, q] * inp[:, q:q + 1]
    h = _libm_tanh(acc).astype(np.float64)
    off_w2 = off_b1 + hidden
    off_b2 = off_w2 + 2 * hidden
    w2 = weights[:, off_w2:off_b2].reshape(p, 2, hidden)
    out = weights[:, off_b2:off_b2 + 2].copy()
    for j in range(hidden):
        out += w2[:, :, j] * h[:, j:j + 1]
    return out


def mlp_forward(w, hidden, inp, out):
    out[:] = _forward(np.asarray(w)[None, :], hidden, np.asarray(inp)[None, :])[0]


def maze_rollouts(weights, hidden, walls, segs, bounds, start, goal,
                  rho, l_max, bumper_reach, mode, steps):
    p = weights.shape[0]
    pos = np.empty((p, steps, 2))
    reward = np.empty((p, steps))
    x = np.full(p, start[0])
    y = np.full(p, start[1])
    th = np.full(p, start[2])
    gx, gy = goal[0], goal[1]
    d_prev = np.hypot(x - gx, y - gy)
    for t in range(steps):
        inp = _sense(x, y, th, segs, l_max, bumper_reach)
        act = _forward(weights, hidden, inp)
        x, y, th, a1, a2 = _step(x, y, th, act[:, 0], act[:, 1], rho, walls, bounds)
        pos[:, t, 0] = x
        pos[:, t, 1] = y
        if mode == 0:
            d = np.hypot(x - gx, y - gy)
            reward[:, t] = d_prev - d
            d_prev = d
        else:
            reward[:, t] = -(a1 * a1 + a2 * a2)
    return pos, reward, np.hypot(x - gx, y - gy)
