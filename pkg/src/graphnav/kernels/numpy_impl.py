"""Pure-numpy reference implementations of the geometry and DTW kernels.

These are the fallback path when numba is unavailable or disabled via
GRAPHNAV_NUMBA=0. The numba versions in numba_impl.py compute the same
quantities with the same formulas; tests assert the two backends agree.
"""

import numpy as np

_EPS = 1e-9


def ray_hit(ox, oy, dx, dy, walls, max_dist):
    """Distance along the unit ray (dx, dy) from (ox, oy) to the nearest wall.

    walls is an (n, 4) float array of segments [x1, y1, x2, y2]. Returns
    max_dist when no wall is hit within that range.
    """
    if walls.shape[0] == 0:
        return float(max_dist)
    ex = walls[:, 2] - walls[:, 0]
    ey = walls[:, 3] - walls[:, 1]
    wx = walls[:, 0] - ox
    wy = walls[:, 1] - oy
    denom = dx * ey - dy * ex
    ok = np.abs(denom) > _EPS
    denom = np.where(ok, denom, 1.0)
    t = (wx * ey - wy * ex) / denom
    s = (wx * dy - wy * dx) / denom
    hit = ok & (t > _EPS) & (s >= 0.0) & (s <= 1.0)
    if not hit.any():
        return float(max_dist)
    return float(min(t[hit].min(), max_dist))


def ray_hits(ox, oy, angles, walls, max_dist):
    """ray_hit for a batch of ray headings; returns an array of distances."""
    out = np.empty(len(angles), dtype=np.float64)
    for i, a in enumerate(angles):
        out[i] = ray_hit(ox, oy, np.cos(a), np.sin(a), walls, max_dist)
    return out


def segment_blocked(ax, ay, bx, by, walls):
    """True when the open segment a-b properly crosses any wall interior.

    Touching a wall endpoint or sliding along a wall line does not count;
    door openings are gaps in the wall list, so paths through them pass.
    """
    if walls.shape[0] == 0:
        return False
    dx = bx - ax
    dy = by - ay
    ex = walls[:, 2] - walls[:, 0]
    ey = walls[:, 3] - walls[:, 1]
    wx = walls[:, 0] - ax
    wy = walls[:, 1] - ay
    denom = dx * ey - dy * ex
    ok = np.abs(denom) > _EPS
    denom = np.where(ok, denom, 1.0)
    t = (wx * ey - wy * ex) / denom
    s = (wx * dy - wy * dx) / denom
    hit = ok & (t > _EPS) & (t < 1.0 - _EPS) & (s > _EPS) & (s < 1.0 - _EPS)
    return bool(hit.any())


def dtw_cost(path_a, path_b):
    """Total dynamic-time-warping cost between two 2-D point sequences.

    Standard monotone alignment (match / insert / delete) with Euclidean
    point-pair costs, computed by exact dynamic programming.
    """
    n = path_a.shape[0]
    m = path_b.shape[0]
    acc = np.full((n + 1, m + 1), np.inf, dtype=np.float64)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        dx = path_b[:, 0] - path_a[i - 1, 0]
        dy = path_b[:, 1] - path_a[i - 1, 1]
        cost_row = np.sqrt(dx * dx + dy * dy)
        for j in range(1, m + 1):
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = cost_row[j - 1] + best
    return float(acc[n, m])
