# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``; results are bit-identical."""
import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, floor
from libc.stdint cimport uint8_t, int32_t, int64_t, uint64_t
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _splitmix(uint64_t* state) nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


def uniform_doubles(seed, Py_ssize_t n):
    cdef uint64_t st = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t s0 = _splitmix(&st)
    cdef uint64_t s1 = _splitmix(&st)
    cdef uint64_t s2 = _splitmix(&st)
    cdef uint64_t s3 = _splitmix(&st)
    cdef uint64_t r, t
    cdef double scale = 1.0 / 9007199254740992.0
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            r = _rotl(s1 * 5, 7) * 9
            t = s1 << 17
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = _rotl(s3, 45)
            o[i] = <double>(r >> 11) * scale
    return out


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double x = (<double*>a)[0]
    cdef double y = (<double*>b)[0]
    return (x > y) - (x < y)


cdef inline Py_ssize_t _first_column(double edge, Py_ssize_t width) nogil:
    cdef double cf = ceil(edge - 0.5)
    while cf - 0.5 >= edge:
        cf -= 1.0
    while cf + 0.5 < edge:
        cf += 1.0
    if cf < 0:
        return 0
    if cf > width:
        return width
    return <Py_ssize_t>cf


def rasterize_polygon(xs_in, ys_in, Py_ssize_t width, Py_ssize_t height):
    cdef double[::1] xs = np.ascontiguousarray(xs_in, dtype=np.float64)
    cdef double[::1] ys = np.ascontiguousarray(ys_in, dtype=np.float64)
    out = np.zeros((height, width), dtype=np.uint8)
    cdef uint8_t[:, ::1] o = out
    cdef Py_ssize_t n = xs.shape[0]
    cdef double ymin = ys[0], ymax = ys[0]
    cdef Py_ssize_t i, j, k, row, c, c0, c1, y_lo, y_hi, nc
    cdef double yc, yi, yj
    for i in range(n):
        if ys[i] < ymin:
            ymin = ys[i]
        if ys[i] > ymax:
            ymax = ys[i]
    y_lo = <Py_ssize_t>floor(ymin) - 1
    y_hi = <Py_ssize_t>ceil(ymax) + 1
    if y_lo < 0:
        y_lo = 0
    if y_hi > height:
        y_hi = height
    cdef double* cross = <double*>malloc((n + 1) * sizeof(double))
    if cross == NULL:
        raise MemoryError()
    try:
        with nogil:
            for row in range(y_lo, y_hi):
                yc = row + 0.5
                nc = 0
                j = n - 1
                for i in range(n):
                    yi = ys[i]
                    yj = ys[j]
                    if (yi > yc) != (yj > yc):
                        cross[nc] = xs[i] + (yc - yi) * (xs[j] - xs[i]) / (yj - yi)
                        nc += 1
                    j = i
                qsort(cross, nc, sizeof(double), _cmp_double)
                k = 0
                while k + 1 < nc:
                    c0 = _first_column(cross[k], width)
                    c1 = _first_column(cross[k + 1], width)
                    for c in range(c0, c1):
                        o[row, c] = 1
                    k += 2
    finally:
        free(cross)
    return out


cdef object _morph(cnp.ndarray mask_in, bint cross, bint is_erode):
    # pad with background, then combine shifted rows; the inner loops are
    # branch-free so the C compiler can vectorize them
    cdef const uint8_t[:, ::1] m = np.ascontiguousarray(mask_in, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    out = np.zeros((h, w), dtype=np.uint8)
    if h == 0 or w == 0:
        return out
    padded = np.zeros((h + 2, w + 2), dtype=np.uint8)
    rows = np.zeros((h + 2, w), dtype=np.uint8)
    cdef uint8_t[:, ::1] p = padded
    cdef uint8_t[:, ::1] r = rows
    cdef uint8_t[:, ::1] o = out
    cdef Py_ssize_t y, x
    cdef uint8_t *a
    cdef uint8_t *b
    cdef uint8_t *c
    cdef uint8_t *d
    cdef const uint8_t *src
    with nogil:
        for y in range(h):
            src = &m[y, 0]
            a = &p[y + 1, 1]
            for x in range(w):
                a[x] = src[x] != 0
        if cross:
            for y in range(h):
                a = &p[y, 1]
                b = &p[y + 1, 0]
                c = &p[y + 2, 1]
                d = &o[y, 0]
                if is_erode:
                    for x in range(w):
                        d[x] = a[x] & b[x] & b[x + 1] & b[x + 2] & c[x]
                else:
                    for x in range(w):
                        d[x] = a[x] | b[x] | b[x + 1] | b[x + 2] | c[x]
        else:
            for y in range(h + 2):
                a = &p[y, 0]
                d = &r[y, 0]
                if is_erode:
                    for x in range(w):
                        d[x] = a[x] & a[x + 1] & a[x + 2]
                else:
                    for x in range(w):
                        d[x] = a[x] | a[x + 1] | a[x + 2]
            for y in range(h):
                a = &r[y, 0]
                b = &r[y + 1, 0]
                c = &r[y + 2, 0]
                d = &o[y, 0]
                if is_erode:
                    for x in range(w):
                        d[x] = a[x] & b[x] & c[x]
                else:
                    for x in range(w):
                        d[x] = a[x] | b[x] | c[x]
    return out


def erode(mask, cross):
    return _morph(mask, cross, True)


def dilate(mask, cross):
    return _morph(mask, cross, False)


def label8(mask_in):
    cdef const uint8_t[:, ::1] m = np.ascontiguousarray(mask_in, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    labels = np.zeros((h, w), dtype=np.int32)
    cdef int32_t[:, ::1] lab = labels
    cdef int64_t* stack = <int64_t*>malloc((h * w + 1) * sizeof(int64_t))
    if stack == NULL:
        raise MemoryError()
    cdef Py_ssize_t y0, x0, y, x, ny, nx, top
    cdef int64_t p
    cdef int32_t count = 0
    try:
        with nogil:
            for y0 in range(h):
                for x0 in range(w):
                    if m[y0, x0] == 0 or lab[y0, x0] != 0:
                        continue
                    count += 1
                    lab[y0, x0] = count
                    top = 0
                    stack[top] = y0 * w + x0
                    top += 1
                    while top > 0:
                        top -= 1
                        p = stack[top]
                        y = p // w
                        x = p % w
                        for ny in range(y - 1, y + 2):
                            if ny < 0 or ny >= h:
                                continue
                            for nx in range(x - 1, x + 2):
                                if nx < 0 or nx >= w:
                                    continue
                                if m[ny, nx] != 0 and lab[ny, nx] == 0:
                                    lab[ny, nx] = count
                                    stack[top] = ny * w + nx
                                    top += 1
    finally:
        free(stack)
    return labels, int(count)
