"""Pure Python / numpy implementations of the hot kernels.

Every function here has a twin of the same name and signature in
``_ckernels.pyx``; the two must agree bit for bit. Arrays are C-contiguous
``uint8`` masks of shape ``(height, width)`` holding 0 or 1.
"""
import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state):
    """Advance a splitmix64 state; return ``(new_state, output)``."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def xoshiro_seed(seed):
    """Four xoshiro256** state words drawn from splitmix64(seed)."""
    state = seed & MASK64
    words = []
    for _ in range(4):
        state, out = splitmix64(state)
        words.append(out)
    return words


def uniform_doubles(seed, n):
    """``n`` doubles in [0, 1) from xoshiro256** seeded by splitmix64."""
    s0, s1, s2, s3 = xoshiro_seed(seed)
    out = np.empty(n, dtype=np.float64)
    scale = 2.0 ** -53
    for i in range(n):
        r = (s1 * 5) & MASK64
        r = ((r << 7) | (r >> 57)) & MASK64
        r = (r * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        out[i] = (r >> 11) * scale
    return out


def _first_column(edge, width):
    # smallest c with c + 0.5 >= edge, exact under float rounding
    c = math.ceil(edge - 0.5)
    while c - 0.5 >= edge:
        c -= 1
    while c + 0.5 < edge:
        c += 1
    return min(max(c, 0), width)


def rasterize_polygon(xs, ys, width, height):
    """Even-odd fill sampled at pixel centers."""
    out = np.zeros((height, width), dtype=np.uint8)
    n = len(xs)
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    y_lo = max(0, math.floor(min(ys)) - 1)
    y_hi = min(height, math.ceil(max(ys)) + 1)
    for row in range(y_lo, y_hi):
        yc = row + 0.5
        crossings = []
        j = n - 1
        for i in range(n):
            yi, yj = ys[i], ys[j]
            if (yi > yc) != (yj > yc):
                crossings.append(xs[i] + (yc - yi) * (xs[j] - xs[i]) / (yj - yi))
            j = i
        crossings.sort()
        for k in range(0, len(crossings) - 1, 2):
            c0 = _first_column(crossings[k], width)
            c1 = _first_column(crossings[k + 1], width)
            if c1 > c0:
                out[row, c0:c1] = 1
    return out


def _shifted(mask):
    """The 3x3 neighborhood of every pixel as views into a zero-padded copy."""
    h, w = mask.shape
    padded = np.zeros((h + 2, w + 2), dtype=np.uint8)
    padded[1:-1, 1:-1] = mask
    return {(dy, dx): padded[1 + dy:h + 1 + dy, 1 + dx:w + 1 + dx]
            for dy in (-1, 0, 1) for dx in (-1, 0, 1)}


def _offsets(cross):
    if cross:
        return [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)]
    return [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]


def erode(mask, cross):
    views = _shifted(mask)
    out = np.ones(mask.shape, dtype=np.uint8)
    for off in _offsets(cross):
        out &= views[off]
    return out


def dilate(mask, cross):
    views = _shifted(mask)
    out = np.zeros(mask.shape, dtype=np.uint8)
    for off in _offsets(cross):
        out |= views[off]
    return out


def label8(mask):
    """8-connected component labels numbered 1.. in raster order of first pixel."""
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    m = mask.tolist()
    lab = labels.tolist()
    count = 0
    for y0 in range(h):
        for x0 in range(w):
            if not m[y0][x0] or lab[y0][x0]:
                continue
            count += 1
            lab[y0][x0] = count
            stack = [(y0, x0)]
            while stack:
                y, x = stack.pop()
                for ny in (y - 1, y, y + 1):
                    if ny < 0 or ny >= h:
                        continue
                    row_m, row_l = m[ny], lab[ny]
                    for nx in (x - 1, x, x + 1):
                        if 0 <= nx < w and row_m[nx] and not row_l[nx]:
                            row_l[nx] = count
                            stack.append((ny, nx))
    if count:
        labels[:] = lab
    return labels, count
