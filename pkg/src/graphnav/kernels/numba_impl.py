"""Numba-jitted versions of the hot geometry and DTW kernels.

Same formulas as numpy_impl.py, written as scalar loops for @njit.
Importing this module requires numba; kernels/__init__.py guards that.
"""

import numpy as np
from numba import njit

_EPS = 1e-9


@njit(cache=True)
def ray_hit(ox, oy, dx, dy, walls, max_dist):
    best = max_dist
    for i in range(walls.shape[0]):
        ex = walls[i, 2] - walls[i, 0]
        ey = walls[i, 3] - walls[i, 1]
        denom = dx * ey - dy * ex
        if abs(denom) <= _EPS:
            continue
        wx = walls[i, 0] - ox
        wy = walls[i, 1] - oy
        t = (wx * ey - wy * ex) / denom
        s = (wx * dy - wy * dx) / denom
        if t > _EPS and 0.0 <= s <= 1.0 and t < best:
            best = t
    return best


@njit(cache=True)
def ray_hits(ox, oy, angles, walls, max_dist):
    out = np.empty(angles.shape[0], dtype=np.float64)
    for i in range(angles.shape[0]):
        out[i] = ray_hit(ox, oy, np.cos(angles[i]), np.sin(angles[i]), walls, max_dist)
    return out


@njit(cache=True)
def segment_blocked(ax, ay, bx, by, walls):
    dx = bx - ax
    dy = by - ay
    for i in range(walls.shape[0]):
        ex = walls[i, 2] - walls[i, 0]
        ey = walls[i, 3] - walls[i, 1]
        denom = dx * ey - dy * ex
        if abs(denom) <= _EPS:
            continue
        wx = walls[i, 0] - ax
        wy = walls[i, 1] - ay
        t = (wx * ey - wy * ex) / denom
        s = (wx * dy - wy * dx) / denom
        if _EPS < t < 1.0 - _EPS and _EPS < s < 1.0 - _EPS:
            return True
    return False


@njit(cache=True)
def dtw_cost(path_a, path_b):
    n = path_a.shape[0]
    m = path_b.shape[0]
    acc = np.full((n + 1, m + 1), np.inf, dtype=np.float64)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dx = path_b[j - 1, 0] - path_a[i - 1, 0]
            dy = path_b[j - 1, 1] - path_a[i - 1, 1]
            cost = np.sqrt(dx * dx + dy * dy)
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = cost + best
    return acc[n, m]
