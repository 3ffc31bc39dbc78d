"""Numba-compiled hot loops.

Every function here has a twin with the same signature in
:mod:`lexqd.kernels.numpy_impl`. Randomness never enters a kernel: callers
pre-draw permutations and uniforms so both backends consume identical inputs.
"""
import math

import numpy as np
from numba import njit, prange

KNIGHT_DX = np.array([1, 2, 2, 1, -1, -2, -2, -1], dtype=np.int64)
KNIGHT_DY = np.array([2, 1, -1, -2, -2, -1, 1, 2], dtype=np.int64)

ACTION_SCALE = 0.025
QUARTER_PI = math.pi / 4.0
HALF_PI = math.pi / 2.0

NAME = "numba"


# --------------------------------------------------------------------------
# knight's tour


@njit(parallel=True, cache=True)
def knight_tours(moves):
    """Replay move sequences from (0, 0); returns (tiles, lengths).

    ``tiles[i, :lengths[i]]`` are the visited (file, rank) pairs in order,
    the rest is -1.
    """
    p, n_moves = moves.shape
    tiles = np.full((p, n_moves + 1, 2), -1, dtype=np.int64)
    lengths = np.empty(p, dtype=np.int64)
    for i in prange(p):
        visited = np.zeros(64, dtype=np.bool_)
        x = 0
        y = 0
        visited[0] = True
        tiles[i, 0, 0] = 0
        tiles[i, 0, 1] = 0
        n = 1
        for k in range(n_moves):
            m = moves[i, k]
            nx = x + KNIGHT_DX[m]
            ny = y + KNIGHT_DY[m]
            if nx < 0 or nx > 7 or ny < 0 or ny > 7:
                break
            cell = nx * 8 + ny
            if visited[cell]:
                break
            visited[cell] = True
            x = nx
            y = ny
            tiles[i, n, 0] = x
            tiles[i, n, 1] = y
            n += 1
        lengths[i] = n
    return tiles, lengths


# --------------------------------------------------------------------------
# subaggregation


@njit(cache=True)
def _bin(v, lo, hi, k):
    c = int((v - lo) / (hi - lo) * k)
    if c >= k:
        c = k - 1
    return c


@njit(parallel=True, cache=True)
def space_subagg(pos, reward, length, bounds, k):
    """Sum rewards per cell of a k-by-k grid over ``bounds``.

    Returns ``(objectives, n_outside)``; cells are indexed ``row * k + col``
    with row along y. Steps outside bounds are skipped and counted.
    """
    p = pos.shape[0]
    out = np.zeros((p, k * k), dtype=np.float64)
    bad = np.zeros(p, dtype=np.int64)
    x0, y0, x1, y1 = bounds[0], bounds[1], bounds[2], bounds[3]
    for i in prange(p):
        for t in range(length[i]):
            x = pos[i, t, 0]
            y = pos[i, t, 1]
            if not (x >= x0 and x <= x1 and y >= y0 and y <= y1):
                bad[i] += 1
                continue
            col = _bin(x, x0, x1, k)
            row = _bin(y, y0, y1, k)
            out[i, row * k + col] += reward[i, t]
    return out, bad.sum()


@njit(parallel=True, cache=True)
def time_subagg(reward, length, n):
    """Sum rewards over ``n`` contiguous, near-equal windows per row."""
    p = reward.shape[0]
    out = np.zeros((p, n), dtype=np.float64)
    for i in prange(p):
        L = length[i]
        base = L // n
        extra = L - base * n
        t = 0
        for w in range(n):
            size = base + 1 if w < extra else base
            acc = 0.0
            for _ in range(size):
                acc += reward[i, t]
                t += 1
            out[i, w] = acc
    return out


# --------------------------------------------------------------------------
# lexicase


@njit(parallel=True, cache=True)
def lexicase_select(m, perms, u, epsilon):
    """One selection per row of ``perms``; ``u`` breaks residual ties."""
    p, _ = m.shape
    count, n = perms.shape
    out = np.empty(count, dtype=np.int64)
    for s in prange(count):
        pool = np.arange(p)
        k = p
        for j in range(n):
            if k == 1:
                break
            obj = perms[s, j]
            best = -np.inf
            for i in range(k):
                v = m[pool[i], obj]
                if v > best:
                    best = v
            thr = best - epsilon
            kk = 0
            for i in range(k):
                c = pool[i]
                if m[c, obj] >= thr:
                    pool[kk] = c
                    kk += 1
            k = kk
        if k == 1:
            out[s] = pool[0]
        else:
            r = int(u[s] * k)
            if r >= k:
                r = k - 1
            out[s] = pool[r]
    return out


# --------------------------------------------------------------------------
# maze


@njit(cache=True)
def cast_ray(x, y, angle, segs, l_max):
    """Distance from (x, y) along ``angle`` to the nearest segment, capped."""
    dx = math.cos(angle)
    dy = math.sin(angle)
    best = l_max
    for s in range(segs.shape[0]):
        ax = segs[s, 0]
        ay = segs[s, 1]
        ex = segs[s, 2] - ax
        ey = segs[s, 3] - ay
        denom = dx * ey - dy * ex
        if abs(denom) < 1e-12:
            continue
        wx = ax - x
        wy = ay - y
        t = (wx * ey - wy * ex) / denom
        v = (wx * dy - wy * dx) / denom
        if t >= 0.0 and v >= 0.0 and v <= 1.0 and t < best:
            best = t
    return best


@njit(cache=True)
def collides(x, y, rho, walls, bounds):
    if x - rho < bounds[0] or y - rho < bounds[1]:
        return True
    if x + rho > bounds[2] or y + rho > bounds[3]:
        return True
    r2 = rho * rho
    for s in range(walls.shape[0]):
        ax = walls[s, 0]
        ay = walls[s, 1]
        ex = walls[s, 2] - ax
        ey = walls[s, 3] - ay
        ll = ex * ex + ey * ey
        u = 0.0
        if ll > 0.0:
            u = ((x - ax) * ex + (y - ay) * ey) / ll
            if u < 0.0:
                u = 0.0
            elif u > 1.0:
                u = 1.0
        qx = ax + u * ex - x
        qy = ay + u * ey - y
        if qx * qx + qy * qy < r2:
            return True
    return False


@njit(cache=True)
def step_pose(x, y, theta, raw1, raw2, rho, walls, bounds):
    """Clip, scale and apply one differential-drive step.

    Returns ``(x, y, theta, a1, a2)``; translation is dropped on collision.
    """
    a1 = min(max(raw1, -1.0), 1.0) * ACTION_SCALE
    a2 = min(max(raw2, -1.0), 1.0) * ACTION_SCALE
    v = 0.5 * (a1 + a2)
    theta = theta + (a2 - a1) / (2.0 * rho)
    nx = x + v * math.cos(theta)
    ny = y + v * math.sin(theta)
    if not collides(nx, ny, rho, walls, bounds):
        x = nx
        y = ny
    return x, y, theta, a1, a2


@njit(cache=True)
def sense(x, y, theta, segs, l_max, bumper_reach, out):
    out[0] = cast_ray(x, y, theta - QUARTER_PI, segs, l_max) / l_max
    out[1] = cast_ray(x, y, theta, segs, l_max) / l_max
    out[2] = cast_ray(x, y, theta + QUARTER_PI, segs, l_max) / l_max
    out[3] = 1.0 if cast_ray(x, y, theta - HALF_PI, segs, bumper_reach) < bumper_reach else 0.0
    out[4] = 1.0 if cast_ray(x, y, theta + HALF_PI, segs, bumper_reach) < bumper_reach else 0.0


@njit(cache=True)
def mlp_forward(w, hidden, inp, out):
    n_in = inp.shape[0]
    h = np.empty(hidden)
    off_b1 = hidden * n_in
    for j in range(hidden):
        acc = w[off_b1 + j]
        for q in range(n_in):
            acc += w[j * n_in + q] * inp[q]
        h[j] = math.tanh(acc)
    off_w2 = off_b1 + hidden
    n_out = out.shape[0]
    off_b2 = off_w2 + n_out * hidden
    for o in range(n_out):
        acc = w[off_b2 + o]
        for j in range(hidden):
            acc += w[off_w2 + o * hidden + j] * h[j]
        out[o] = acc


@njit(parallel=True, cache=True)
def maze_rollouts(weights, hidden, walls, segs, bounds, start, goal,
                  rho, l_max, bumper_reach, mode, steps):
    """Roll out one MLP policy per row of ``weights``.

    ``mode`` 0 = deceptive (progress towards goal), 1 = illumination
    (negative squared executed action). Returns ``(pos, reward, final_dist)``.
    """
    p = weights.shape[0]
    pos = np.empty((p, steps, 2))
    reward = np.empty((p, steps))
    final = np.empty(p)
    gx = goal[0]
    gy = goal[1]
    for i in prange(p):
        w = weights[i]
        inp = np.empty(5)
        act = np.empty(2)
        x = start[0]
        y = start[1]
        th = start[2]
        d_prev = math.hypot(x - gx, y - gy)
        for t in range(steps):
            sense(x, y, th, segs, l_max, bumper_reach, inp)
            mlp_forward(w, hidden, inp, act)
            x, y, th, a1, a2 = step_pose(x, y, th, act[0], act[1], rho, walls, bounds)
            pos[i, t, 0] = x
            pos[i, t, 1] = y
            if mode == 0:
                d = math.hypot(x - gx, y - gy)
                reward[i, t] = d_prev - d
                d_prev = d
            else:
                reward[i, t] = -(a1 * a1 + a2 * a2)
        final[i] = math.hypot(x - gx, y - gy)
    return pos, reward, final
