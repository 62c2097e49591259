"""Vectorized numpy implementations of the per-pixel hot loops.

This module defines the reference semantics; the compiled extension in
``_core`` mirrors it operation for operation so both backends agree to
floating-point noise (and bit-exactly for the pure-comparison kernels).
All image planes are C-contiguous float64 arrays indexed [y, x].
"""

import numpy as np

# Neighbor offsets that precede / follow a pixel in row-major order. A local
# maximum must beat earlier neighbors strictly and later ones weakly, so one
# pixel per plateau survives: the lexicographically smallest (y, x).
_EARLIER = ((-1, -1), (-1, 0), (-1, 1), (0, -1))
_LATER = ((0, 1), (1, -1), (1, 0), (1, 1))


def gaussian_peaks(out, xs, ys, sigma, cutoff):
    """Max-composite a truncated Gaussian bump at each (x, y) into ``out``."""
    height, width = out.shape
    inv_s2 = 1.0 / (sigma * sigma)
    c2 = cutoff * cutoff
    for x, y in zip(xs, ys):
        x0 = max(int(np.ceil(x - cutoff)), 0)
        x1 = min(int(np.floor(x + cutoff)), width - 1)
        y0 = max(int(np.ceil(y - cutoff)), 0)
        y1 = min(int(np.floor(y + cutoff)), height - 1)
        if x0 > x1 or y0 > y1:
            continue
        gx = np.arange(x0, x1 + 1, dtype=np.float64) - x
        gy = np.arange(y0, y1 + 1, dtype=np.float64) - y
        d2 = gx[None, :] * gx[None, :] + gy[:, None] * gy[:, None]
        patch = np.where(d2 <= c2, np.exp(-d2 * inv_s2), 0.0)
        window = out[y0 : y1 + 1, x0 : x1 + 1]
        np.maximum(window, patch, out=window)


def limb_band_field(sum_x, sum_y, count, ax, ay, bx, by, halfwidth):
    """Accumulate unit limb vectors over each segment's rectangular band.

    A pixel p belongs to segment k when its along-limb coordinate lies in
    [0, length] and its perpendicular offset within ``halfwidth``. Belonging
    pixels add the segment's unit vector to (sum_x, sum_y) and bump count.
    """
    height, width = sum_x.shape
    for k in range(len(ax)):
        x1, y1, x2, y2 = ax[k], ay[k], bx[k], by[k]
        dx = x2 - x1
        dy = y2 - y1
        length = np.sqrt(dx * dx + dy * dy)
        vx = dx / length
        vy = dy / length
        x0 = max(int(np.ceil(min(x1, x2) - halfwidth)), 0)
        xe = min(int(np.floor(max(x1, x2) + halfwidth)), width - 1)
        y0 = max(int(np.ceil(min(y1, y2) - halfwidth)), 0)
        ye = min(int(np.floor(max(y1, y2) + halfwidth)), height - 1)
        if x0 > xe or y0 > ye:
            continue
        px = np.arange(x0, xe + 1, dtype=np.float64) - x1
        py = np.arange(y0, ye + 1, dtype=np.float64) - y1
        along = vx * px[None, :] + vy * py[:, None]
        across = -vy * px[None, :] + vx * py[:, None]
        member = (along >= 0.0) & (along <= length) & (np.abs(across) <= halfwidth)
        sub = (slice(y0, ye + 1), slice(x0, xe + 1))
        sum_x[sub][member] += vx
        sum_y[sub][member] += vy
        count[sub][member] += 1


def local_maxima(values, threshold):
    """Return (ys, xs) of 8-neighborhood peaks above ``threshold``.

    Off-grid neighbors count as -inf. Results are in row-major scan order.
    """
    height, width = values.shape
    padded = np.full((height + 2, width + 2), -np.inf)
    padded[1:-1, 1:-1] = values
    center = padded[1:-1, 1:-1]
    ok = center > threshold
    for dy, dx in _EARLIER:
        ok &= center > padded[1 + dy : 1 + dy + height, 1 + dx : 1 + dx + width]
    for dy, dx in _LATER:
        ok &= center >= padded[1 + dy : 1 + dy + height, 1 + dx : 1 + dx + width]
    ys, xs = np.nonzero(ok)
    return ys.astype(np.int64), xs.astype(np.int64)


def _gather(grid, yy, xx):
    height, width = grid.shape
    inside = (xx >= 0) & (xx < width) & (yy >= 0) & (yy < height)
    vals = grid[np.clip(yy, 0, height - 1), np.clip(xx, 0, width - 1)]
    return np.where(inside, vals, 0.0)


def sample_plane(grid, px, py, bilinear):
    """Sample a plane at continuous points; outside the grid reads as zero."""
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    if not bilinear:
        xx = np.floor(px + 0.5).astype(np.int64)
        yy = np.floor(py + 0.5).astype(np.int64)
        return _gather(grid, yy, xx)
    x0f = np.floor(px)
    y0f = np.floor(py)
    fx = px - x0f
    fy = py - y0f
    x0 = x0f.astype(np.int64)
    y0 = y0f.astype(np.int64)
    # Corner order fixed to match the compiled kernel's summation order.
    return (
        (1.0 - fx) * (1.0 - fy) * _gather(grid, y0, x0)
        + fx * (1.0 - fy) * _gather(grid, y0, x0 + 1)
        + (1.0 - fx) * fy * _gather(grid, y0 + 1, x0)
        + fx * fy * _gather(grid, y0 + 1, x0 + 1)
    )


def sample_line_integrals(field_x, field_y, ax, ay, bx, by, num_samples, bilinear):
    """Mean of field-dotted-with-unit-direction over uniform segment samples.

    Samples include both endpoints: u = i / (num_samples - 1). Callers must
    exclude zero-length segments.
    """
    ax = np.asarray(ax, dtype=np.float64)
    ay = np.asarray(ay, dtype=np.float64)
    bx = np.asarray(bx, dtype=np.float64)
    by = np.asarray(by, dtype=np.float64)
    dx = bx - ax
    dy = by - ay
    length = np.sqrt(dx * dx + dy * dy)
    ux = dx / length
    uy = dy / length
    u = np.arange(num_samples, dtype=np.float64) / (num_samples - 1)
    px = (1.0 - u)[None, :] * ax[:, None] + u[None, :] * bx[:, None]
    py = (1.0 - u)[None, :] * ay[:, None] + u[None, :] * by[:, None]
    vx = sample_plane(field_x, px, py, bilinear)
    vy = sample_plane(field_y, px, py, bilinear)
    dots = vx * ux[:, None] + vy * uy[:, None]
    return dots.sum(axis=1) / num_samples
