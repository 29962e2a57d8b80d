"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` exactly in semantics.  They are used when the
compiled extension is unavailable or when ``BIOLIDAR_SLAM_PURE_PYTHON`` is
set, and serve as the reference side of the backend equivalence tests.
"""

import math

import numpy as np

_EPS_T = 1e-12


def raycast(segs, ox, oy, angles, range_max):
    """Distance along each beam to the nearest segment, ``inf`` if none
    lies within ``range_max``."""
    segs = np.asarray(segs, dtype=np.float64)
    angles = np.asarray(angles, dtype=np.float64)
    dx = np.cos(angles)[:, None]
    dy = np.sin(angles)[:, None]
    px, py = segs[:, 0][None, :], segs[:, 1][None, :]
    ex = (segs[:, 2] - segs[:, 0])[None, :]
    ey = (segs[:, 3] - segs[:, 1])[None, :]
    wx, wy = px - ox, py - oy
    denom = dx * ey - dy * ex
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (wx * ey - wy * ex) / denom
        u = (wx * dy - wy * dx) / denom
    ok = (denom != 0.0) & (t > _EPS_T) & (u >= 0.0) & (u <= 1.0)
    t = np.where(ok, t, np.inf)
    best = t.min(axis=1) if t.shape[1] else np.full(angles.shape, np.inf)
    return np.where(best <= range_max, best, np.inf)


def _bresenham_cells(x0, y0, x1, y1, w, h):
    """Flat indices of traversed cells (excluding the endpoint) and the
    endpoint flat indices of rays that end inside the grid."""
    x1 = np.asarray(x1, dtype=np.int64)
    y1 = np.asarray(y1, dtype=np.int64)
    n = x1.size
    adx = np.abs(x1 - x0)
    ady = -np.abs(y1 - y0)
    sx = np.where(x0 < x1, 1, -1)
    sy = np.where(y0 < y1, 1, -1)
    err = adx + ady
    x = np.full(n, x0, dtype=np.int64)
    y = np.full(n, y0, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    ended = np.zeros(n, dtype=bool)
    traversed = []
    while active.any():
        inside = (x >= 0) & (x < w) & (y >= 0) & (y < h)
        # rays leaving the grid are truncated at the border
        active &= inside
        at_end = active & (x == x1) & (y == y1)
        ended |= at_end
        active &= ~at_end
        if not active.any():
            break
        traversed.append(x[active] * h + y[active])
        e2 = 2 * err
        mx = active & (e2 >= ady)
        my = active & (e2 <= adx)
        err = err + np.where(mx, ady, 0) + np.where(my, adx, 0)
        x = x + np.where(mx, sx, 0)
        y = y + np.where(my, sy, 0)
    trav = np.concatenate(traversed) if traversed else np.empty(0, np.int64)
    ends = x1[ended] * h + y1[ended]
    return trav, ends


def bresenham_update(grid, x0, y0, x1, y1, hit, miss, lmin, lmax):
    """Add ``miss`` to every cell traversed by the rays from ``(x0, y0)`` to
    each ``(x1[k], y1[k])`` and ``hit`` to every endpoint cell.

    Each cell receives at most one update per call; an endpoint of any ray
    takes precedence over traversal.  Results are clamped to
    ``[lmin, lmax]``.  ``grid`` is modified in place.
    """
    w, h = grid.shape
    trav, ends = _bresenham_cells(int(x0), int(y0), x1, y1, w, h)
    flat = grid.reshape(-1)
    hits = np.unique(ends)
    misses = np.setdiff1d(np.unique(trav), hits, assume_unique=True)
    flat[misses] = np.clip(flat[misses] + miss, lmin, lmax)
    flat[hits] = np.clip(flat[hits] + hit, lmin, lmax)


def sample_bilinear(grid, u, v):
    """Bilinear interpolation of ``logistic(grid)`` at fractional cell
    coordinates ``(u, v)`` (integers are cell centres).

    Returns ``(value, d_value/du, d_value/dv)``; queries whose 2x2 stencil
    leaves the grid return zeros.
    """
    w, h = grid.shape
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    i0 = np.floor(u)
    j0 = np.floor(v)
    ok = (i0 >= 0) & (i0 <= w - 2) & (j0 >= 0) & (j0 <= h - 2)
    i = np.where(ok, i0, 0).astype(np.int64)
    j = np.where(ok, j0, 0).astype(np.int64)
    fx = u - i0
    fy = v - j0
    p00 = 1.0 / (1.0 + np.exp(-grid[i, j]))
    p10 = 1.0 / (1.0 + np.exp(-grid[i + 1, j]))
    p01 = 1.0 / (1.0 + np.exp(-grid[i, j + 1]))
    p11 = 1.0 / (1.0 + np.exp(-grid[i + 1, j + 1]))
    val = ((1.0 - fy) * ((1.0 - fx) * p00 + fx * p10)
           + fy * ((1.0 - fx) * p01 + fx * p11))
    du = (1.0 - fy) * (p10 - p00) + fy * (p11 - p01)
    dv = (1.0 - fx) * (p01 - p00) + fx * (p11 - p10)
    zero = np.zeros_like(u)
    return np.where(ok, val, zero), np.where(ok, du, zero), np.where(ok, dv, zero)


def _wrap(a):
    r = a - 2.0 * math.pi * math.floor((a + math.pi) / (2.0 * math.pi))
    if r >= math.pi:
        r -= 2.0 * math.pi
    elif r < -math.pi:
        r += 2.0 * math.pi
    return r


def relax_sweep(pose, frm, to, delta, inc_ptr, inc_edge, a, corrected, normalize):
    """One in-place Gauss-Seidel sweep of experience-map relaxation.

    Node ``i`` moves by ``a * sum(residuals)`` over its incident edges,
    divided by ``max(1, a * degree)`` when ``normalize`` is set so a single
    node update never overshoots its local optimum.
    """
    n = pose.shape[0]
    P = pose.tolist()
    D = np.asarray(delta).tolist()
    F = np.asarray(frm).tolist()
    T = np.asarray(to).tolist()
    ptr = np.asarray(inc_ptr).tolist()
    inc = np.asarray(inc_edge).tolist()
    for i in range(n):
        lo, hi = ptr[i], ptr[i + 1]
        if lo == hi:
            continue
        pi = P[i]
        cx = cy = ct = 0.0
        for k in range(lo, hi):
            e = inc[k]
            d = D[e]
            if F[e] == i:
                pj = P[T[e]]
                cx += pj[0] - pi[0] - d[0]
                cy += pj[1] - pi[1] - d[1]
                ct += _wrap(pj[2] - pi[2] - d[2])
            else:
                pk = P[F[e]]
                if corrected:
                    cx += pk[0] - pi[0] + d[0]
                    cy += pk[1] - pi[1] + d[1]
                    ct += _wrap(pk[2] - pi[2] + d[2])
                else:
                    cx += pk[0] - pi[0] - d[0]
                    cy += pk[1] - pi[1] - d[1]
                    ct += _wrap(pk[2] - pi[2] - d[2])
        scale = a
        if normalize:
            scale = a / max(1.0, a * (hi - lo))
        P[i] = [pi[0] + scale * cx, pi[1] + scale * cy, _wrap(pi[2] + scale * ct)]
    pose[:, :] = np.asarray(P, dtype=np.float64).reshape(n, 3)
