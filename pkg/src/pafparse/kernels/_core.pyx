# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled mirrors of the kernels in ``fallback``.

Semantics are documented once, in the fallback module. Expression order is
kept identical so the two backends agree bit-for-bit on comparisons and to
within floating-point noise on arithmetic (the build disables FP contraction).
"""

import numpy as np

from libc.math cimport ceil, exp, floor, sqrt


cdef double NEG_INF = -float("inf")


def gaussian_peaks(double[:, ::1] out, double[::1] xs, double[::1] ys,
                   double sigma, double cutoff):
    cdef Py_ssize_t height = out.shape[0]
    cdef Py_ssize_t width = out.shape[1]
    cdef double inv_s2 = 1.0 / (sigma * sigma)
    cdef double c2 = cutoff * cutoff
    cdef Py_ssize_t k, px, py, x0, x1, y0, y1
    cdef double x, y, dx, dy, d2, val
    for k in range(xs.shape[0]):
        x = xs[k]
        y = ys[k]
        x0 = <Py_ssize_t>ceil(x - cutoff)
        x1 = <Py_ssize_t>floor(x + cutoff)
        y0 = <Py_ssize_t>ceil(y - cutoff)
        y1 = <Py_ssize_t>floor(y + cutoff)
        if x0 < 0:
            x0 = 0
        if y0 < 0:
            y0 = 0
        if x1 > width - 1:
            x1 = width - 1
        if y1 > height - 1:
            y1 = height - 1
        for py in range(y0, y1 + 1):
            dy = py - y
            for px in range(x0, x1 + 1):
                dx = px - x
                d2 = dx * dx + dy * dy
                if d2 <= c2:
                    val = exp(-d2 * inv_s2)
                    if val > out[py, px]:
                        out[py, px] = val


def limb_band_field(double[:, ::1] sum_x, double[:, ::1] sum_y,
                    int[:, ::1] count,
                    double[::1] ax, double[::1] ay,
                    double[::1] bx, double[::1] by, double halfwidth):
    cdef Py_ssize_t height = sum_x.shape[0]
    cdef Py_ssize_t width = sum_x.shape[1]
    cdef Py_ssize_t k, px, py, x0, xe, y0, ye
    cdef double x1, y1, x2, y2, dx, dy, length, vx, vy
    cdef double lo, hi, ddx, ddy, along, across
    for k in range(ax.shape[0]):
        x1 = ax[k]
        y1 = ay[k]
        x2 = bx[k]
        y2 = by[k]
        dx = x2 - x1
        dy = y2 - y1
        length = sqrt(dx * dx + dy * dy)
        vx = dx / length
        vy = dy / length
        lo = x1 if x1 < x2 else x2
        hi = x1 if x1 > x2 else x2
        x0 = <Py_ssize_t>ceil(lo - halfwidth)
        xe = <Py_ssize_t>floor(hi + halfwidth)
        lo = y1 if y1 < y2 else y2
        hi = y1 if y1 > y2 else y2
        y0 = <Py_ssize_t>ceil(lo - halfwidth)
        ye = <Py_ssize_t>floor(hi + halfwidth)
        if x0 < 0:
            x0 = 0
        if y0 < 0:
            y0 = 0
        if xe > width - 1:
            xe = width - 1
        if ye > height - 1:
            ye = height - 1
        for py in range(y0, ye + 1):
            ddy = py - y1
            for px in range(x0, xe + 1):
                ddx = px - x1
                along = vx * ddx + vy * ddy
                if along < 0.0 or along > length:
                    continue
                across = -vy * ddx + vx * ddy
                if across < 0.0:
                    across = -across
                if across <= halfwidth:
                    sum_x[py, px] += vx
                    sum_y[py, px] += vy
                    count[py, px] += 1


cdef inline double _pix(double[:, ::1] v, Py_ssize_t y, Py_ssize_t x,
                        Py_ssize_t height, Py_ssize_t width, double fill) noexcept:
    if y < 0 or y >= height or x < 0 or x >= width:
        return fill
    return v[y, x]


cdef inline bint _is_peak(double[:, ::1] v, Py_ssize_t y, Py_ssize_t x,
                          Py_ssize_t height, Py_ssize_t width,
                          double threshold) noexcept:
    cdef double c = v[y, x]
    if c <= threshold:
        return 0
    # Strictly above earlier neighbors, at least the later ones, so exactly
    # the first pixel of a plateau (smallest y, then x) survives.
    if not (c > _pix(v, y - 1, x - 1, height, width, NEG_INF)
            and c > _pix(v, y - 1, x, height, width, NEG_INF)
            and c > _pix(v, y - 1, x + 1, height, width, NEG_INF)
            and c > _pix(v, y, x - 1, height, width, NEG_INF)):
        return 0
    if not (c >= _pix(v, y, x + 1, height, width, NEG_INF)
            and c >= _pix(v, y + 1, x - 1, height, width, NEG_INF)
            and c >= _pix(v, y + 1, x, height, width, NEG_INF)
            and c >= _pix(v, y + 1, x + 1, height, width, NEG_INF)):
        return 0
    return 1


def local_maxima(double[:, ::1] values, double threshold):
    cdef Py_ssize_t height = values.shape[0]
    cdef Py_ssize_t width = values.shape[1]
    cdef Py_ssize_t y, x
    cdef Py_ssize_t n = 0
    cdef long long[::1] ys_v
    cdef long long[::1] xs_v
    for y in range(height):
        for x in range(width):
            if _is_peak(values, y, x, height, width, threshold):
                n += 1
    ys = np.empty(n, dtype=np.int64)
    xs = np.empty(n, dtype=np.int64)
    ys_v = ys
    xs_v = xs
    n = 0
    for y in range(height):
        for x in range(width):
            if _is_peak(values, y, x, height, width, threshold):
                ys_v[n] = y
                xs_v[n] = x
                n += 1
    return ys, xs


cdef inline double _bilin(double[:, ::1] g, double x, double y,
                          Py_ssize_t height, Py_ssize_t width) noexcept:
    cdef double x0f = floor(x)
    cdef double y0f = floor(y)
    cdef Py_ssize_t x0 = <Py_ssize_t>x0f
    cdef Py_ssize_t y0 = <Py_ssize_t>y0f
    cdef double fx = x - x0f
    cdef double fy = y - y0f
    return ((1.0 - fx) * (1.0 - fy) * _pix(g, y0, x0, height, width, 0.0)
            + fx * (1.0 - fy) * _pix(g, y0, x0 + 1, height, width, 0.0)
            + (1.0 - fx) * fy * _pix(g, y0 + 1, x0, height, width, 0.0)
            + fx * fy * _pix(g, y0 + 1, x0 + 1, height, width, 0.0))


cdef inline double _nearest(double[:, ::1] g, double x, double y,
                            Py_ssize_t height, Py_ssize_t width) noexcept:
    cdef Py_ssize_t ix = <Py_ssize_t>floor(x + 0.5)
    cdef Py_ssize_t iy = <Py_ssize_t>floor(y + 0.5)
    return _pix(g, iy, ix, height, width, 0.0)


def sample_plane(double[:, ::1] grid, double[::1] px, double[::1] py,
                 bint bilinear):
    cdef Py_ssize_t height = grid.shape[0]
    cdef Py_ssize_t width = grid.shape[1]
    cdef Py_ssize_t n = px.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t i
    if bilinear:
        for i in range(n):
            out_v[i] = _bilin(grid, px[i], py[i], height, width)
    else:
        for i in range(n):
            out_v[i] = _nearest(grid, px[i], py[i], height, width)
    return out


def sample_line_integrals(double[:, ::1] field_x, double[:, ::1] field_y,
                          double[::1] ax, double[::1] ay,
                          double[::1] bx, double[::1] by,
                          Py_ssize_t num_samples, bint bilinear):
    cdef Py_ssize_t height = field_x.shape[0]
    cdef Py_ssize_t width = field_x.shape[1]
    cdef Py_ssize_t n = ax.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t i, s
    cdef double dx, dy, length, ux, uy, u, x, y, vx, vy, acc
    for i in range(n):
        dx = bx[i] - ax[i]
        dy = by[i] - ay[i]
        length = sqrt(dx * dx + dy * dy)
        ux = dx / length
        uy = dy / length
        acc = 0.0
        for s in range(num_samples):
            u = s / <double>(num_samples - 1)
            x = (1.0 - u) * ax[i] + u * bx[i]
            y = (1.0 - u) * ay[i] + u * by[i]
            if bilinear:
                vx = _bilin(field_x, x, y, height, width)
                vy = _bilin(field_y, x, y, height, width)
            else:
                vx = _nearest(field_x, x, y, height, width)
                vy = _nearest(field_y, x, y, height, width)
            acc += vx * ux + vy * uy
        out_v[i] = acc / num_samples
    return out
