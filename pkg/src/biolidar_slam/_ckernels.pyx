# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; semantics match ``_pykernels`` one for one."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, floor, INFINITY, M_PI

cnp.import_array()

cdef double EPS_T = 1e-12


def raycast(const double[:, ::1] segs, double ox, double oy, const double[::1] angles,
            double range_max):
    cdef Py_ssize_t n = angles.shape[0]
    cdef Py_ssize_t m = segs.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t b, s
    cdef double dx, dy, ex, ey, wx, wy, denom, t, u, best
    for b in range(n):
        dx = cos(angles[b])
        dy = sin(angles[b])
        best = INFINITY
        for s in range(m):
            ex = segs[s, 2] - segs[s, 0]
            ey = segs[s, 3] - segs[s, 1]
            wx = segs[s, 0] - ox
            wy = segs[s, 1] - oy
            denom = dx * ey - dy * ex
            if denom == 0.0:
                continue
            t = (wx * ey - wy * ex) / denom
            u = (wx * dy - wy * dx) / denom
            if t > EPS_T and u >= 0.0 and u <= 1.0 and t < best:
                best = t
        out[b] = best if best <= range_max else INFINITY
    return out_arr


def bresenham_update(double[:, ::1] grid, long x0, long y0,
                     const long[::1] x1, const long[::1] y1,
                     double hit, double miss, double lmin, double lmax):
    cdef Py_ssize_t w = grid.shape[0]
    cdef Py_ssize_t h = grid.shape[1]
    cdef Py_ssize_t n = x1.shape[0]
    # 0 untouched, 1 traversed, 2 endpoint
    mark_arr = np.zeros((w, h), dtype=np.uint8)
    cdef unsigned char[:, ::1] mark = mark_arr
    touched_arr = np.empty(64, dtype=np.int64)
    cdef long[::1] touched = touched_arr
    cdef Py_ssize_t nt = 0
    cdef Py_ssize_t k
    cdef long x, y, tx, ty, adx, ady, sx, sy, err, e2
    cdef double val
    for k in range(n):
        tx = x1[k]
        ty = y1[k]
        adx = tx - x0 if tx >= x0 else x0 - tx
        ady = -(ty - y0 if ty >= y0 else y0 - ty)
        sx = 1 if x0 < tx else -1
        sy = 1 if y0 < ty else -1
        err = adx + ady
        x = x0
        y = y0
        while True:
            if x < 0 or x >= w or y < 0 or y >= h:
                break
            if x == tx and y == ty:
                if mark[x, y] == 0:
                    if nt == touched.shape[0]:
                        touched_arr = np.concatenate((touched_arr, np.empty_like(touched_arr)))
                        touched = touched_arr
                    touched[nt] = x * h + y
                    nt += 1
                mark[x, y] = 2
                break
            if mark[x, y] == 0:
                if nt == touched.shape[0]:
                    touched_arr = np.concatenate((touched_arr, np.empty_like(touched_arr)))
                    touched = touched_arr
                touched[nt] = x * h + y
                nt += 1
                mark[x, y] = 1
            e2 = 2 * err
            if e2 >= ady:
                err += ady
                x += sx
            if e2 <= adx:
                err += adx
                y += sy
    for k in range(nt):
        x = touched[k] // h
        y = touched[k] % h
        if mark[x, y] == 2:
            val = grid[x, y] + hit
        else:
            val = grid[x, y] + miss
        if val < lmin:
            val = lmin
        elif val > lmax:
            val = lmax
        grid[x, y] = val


def sample_bilinear(const double[:, ::1] grid, const double[::1] u,
                    const double[::1] v):
    cdef Py_ssize_t w = grid.shape[0]
    cdef Py_ssize_t h = grid.shape[1]
    cdef Py_ssize_t n = u.shape[0]
    val_arr = np.zeros(n, dtype=np.float64)
    du_arr = np.zeros(n, dtype=np.float64)
    dv_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] val = val_arr
    cdef double[::1] du = du_arr
    cdef double[::1] dv = dv_arr
    cdef Py_ssize_t k, i, j
    cdef double i0, j0, fx, fy, p00, p10, p01, p11
    for k in range(n):
        i0 = floor(u[k])
        j0 = floor(v[k])
        if not (i0 >= 0 and i0 <= w - 2 and j0 >= 0 and j0 <= h - 2):
            continue
        i = <Py_ssize_t>i0
        j = <Py_ssize_t>j0
        fx = u[k] - i0
        fy = v[k] - j0
        p00 = 1.0 / (1.0 + exp(-grid[i, j]))
        p10 = 1.0 / (1.0 + exp(-grid[i + 1, j]))
        p01 = 1.0 / (1.0 + exp(-grid[i, j + 1]))
        p11 = 1.0 / (1.0 + exp(-grid[i + 1, j + 1]))
        val[k] = ((1.0 - fy) * ((1.0 - fx) * p00 + fx * p10)
                  + fy * ((1.0 - fx) * p01 + fx * p11))
        du[k] = (1.0 - fy) * (p10 - p00) + fy * (p11 - p01)
        dv[k] = (1.0 - fx) * (p01 - p00) + fx * (p11 - p10)
    return val_arr, du_arr, dv_arr


cdef inline double _wrap(double a) nogil:
    cdef double r = a - 2.0 * M_PI * floor((a + M_PI) / (2.0 * M_PI))
    if r >= M_PI:
        r -= 2.0 * M_PI
    elif r < -M_PI:
        r += 2.0 * M_PI
    return r


def relax_sweep(double[:, ::1] pose, const long[::1] frm, const long[::1] to,
                const double[:, ::1] delta, const long[::1] inc_ptr,
                const long[::1] inc_edge, double a, bint corrected,
                bint normalize):
    cdef Py_ssize_t n = pose.shape[0]
    cdef Py_ssize_t i, k, e, lo, hi
    cdef long o
    cdef double cx, cy, ct, scale, sgn
    for i in range(n):
        lo = inc_ptr[i]
        hi = inc_ptr[i + 1]
        if lo == hi:
            continue
        cx = 0.0
        cy = 0.0
        ct = 0.0
        for k in range(lo, hi):
            e = inc_edge[k]
            if frm[e] == i:
                o = to[e]
                cx += pose[o, 0] - pose[i, 0] - delta[e, 0]
                cy += pose[o, 1] - pose[i, 1] - delta[e, 1]
                ct += _wrap(pose[o, 2] - pose[i, 2] - delta[e, 2])
            else:
                o = frm[e]
                sgn = 1.0 if corrected else -1.0
                cx += pose[o, 0] - pose[i, 0] + sgn * delta[e, 0]
                cy += pose[o, 1] - pose[i, 1] + sgn * delta[e, 1]
                ct += _wrap(pose[o, 2] - pose[i, 2] + sgn * delta[e, 2])
        scale = a
        if normalize:
            scale = a / (a * (hi - lo) if a * (hi - lo) > 1.0 else 1.0)
        pose[i, 0] = pose[i, 0] + scale * cx
        pose[i, 1] = pose[i, 1] + scale * cy
        pose[i, 2] = _wrap(pose[i, 2] + scale * ct)
