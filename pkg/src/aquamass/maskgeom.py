"""Binary mask geometry: rasterization, morphology, contours and area estimates.

Monte Carlo sampling uses xoshiro256** seeded through splitmix64 so every
implementation can reproduce the same points from the same seed:

* splitmix64: ``state += 0x9E3779B97F4A7C15; z = state;
  z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB;
  return z ^ z>>31`` (all arithmetic mod 2**64).
* The four xoshiro256** state words are the first four splitmix64 outputs
  starting from ``state = seed mod 2**64``.
* Each draw is ``(next() >> 11) * 2**-53``, a double in [0, 1).
* Sample ``i`` uses draws ``2i`` and ``2i + 1`` for x and y:
  ``x = x0 + (x1 - x0) * u``.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateGeometry, DomainError

DEFAULT_SAMPLES = 100

# clockwise in image coordinates (y grows downward), starting west
_MOORE = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))


@dataclass(frozen=True, eq=False)
class BitMask:
    """Immutable row-major bit grid; ``bits[y, x]`` is 1 for object pixels."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("mask must be two-dimensional")
        if arr.size and arr.max() > 1:
            arr = (arr != 0).astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def zeros(cls, width, height):
        return cls(np.zeros((height, width), dtype=np.uint8))

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def height(self):
        return self.bits.shape[0]

    def __eq__(self, other):
        if not isinstance(other, BitMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.bits.shape, self.bits.tobytes()))

    def __contains__(self, point):
        x, y = point
        return 0 <= x < self.width and 0 <= y < self.height and bool(self.bits[y, x])

    def issubset(self, other):
        return not np.any(self.bits & (1 - other.bits))

    def __invert__(self):
        return BitMask(1 - self.bits)


@dataclass(frozen=True)
class McEstimate:
    area: float
    hits: int
    samples: int
    std_error: float
    seed: int


def _vertices(polygon):
    return getattr(polygon, "vertices", polygon)


def rasterize(polygon, width, height, warn=True):
    """Set every pixel whose center lies inside ``polygon`` (even-odd rule).

    ``polygon`` is a PolygonInstance, BoxInstance or a sequence of (x, y)
    vertices. Emits :class:`DegenerateGeometry` when nothing is covered,
    unless ``warn`` is false (callers then check ``pixel_count`` themselves).
    """
    if width <= 0 or height <= 0:
        raise DomainError("width and height must be positive")
    verts = _vertices(polygon)
    xs = np.array([float(v[0]) for v in verts])
    ys = np.array([float(v[1]) for v in verts])
    bits = kernels.rasterize_polygon(xs, ys, int(width), int(height))
    mask = BitMask(bits)
    if warn and pixel_count(mask) == 0:
        warnings.warn("polygon covers no pixel centers", DegenerateGeometry, stacklevel=2)
    return mask


def pixel_count(mask):
    return int(np.count_nonzero(mask.bits))


def morph(mask, op, element="square", iterations=1):
    """Binary erode/dilate/open/close with a 3x3 element; outside the image is background."""
    if iterations < 1:
        raise DomainError("iterations must be >= 1")
    if element not in ("square", "cross"):
        raise DomainError(f"unknown structuring element {element!r}")
    cross = element == "cross"

    def repeat(fn, bits):
        for _ in range(iterations):
            bits = fn(bits, cross)
        return bits

    bits = mask.bits
    if op == "erode":
        bits = repeat(kernels.erode, bits)
    elif op == "dilate":
        bits = repeat(kernels.dilate, bits)
    elif op == "open":
        bits = repeat(kernels.dilate, repeat(kernels.erode, bits))
    elif op == "close":
        bits = repeat(kernels.erode, repeat(kernels.dilate, bits))
    else:
        raise DomainError(f"unknown morphological operation {op!r}")
    return BitMask(bits)


def _trace(bits, start):
    h, w = bits.shape

    def on(x, y):
        return 0 <= x < w and 0 <= y < h and bits[y, x]

    def step(cur, back):
        cx, cy = cur
        bdir = _MOORE.index((back[0] - cx, back[1] - cy))
        prev = back
        for k in range(1, 9):
            dx, dy = _MOORE[(bdir + k) % 8]
            cand = (cx + dx, cy + dy)
            if on(*cand):
                return cand, prev
            prev = cand
        return None, None

    # the start is the first pixel of its component in raster order, so west is background
    second, back = step(start, (start[0] - 1, start[1]))
    if second is None:
        return [start]
    points = [start]
    cur = second
    # the state after start -> second is fully determined by that move, so seeing
    # the move again means the boundary is closed
    for _ in range(4 * bits.size + 8):
        nxt, nback = step(cur, back)
        if cur == start and nxt == second:
            return points
        points.append(cur)
        cur, back = nxt, nback
    raise RuntimeError("contour tracing did not terminate")


def contours(mask):
    """Outer boundary of each 8-connected component, traced clockwise.

    Tracing is Moore-neighbor border following from the top-left-most pixel
    of each component (index 0 of its contour). It stops when the first move
    out of the start pixel is about to repeat, so pixels on one-pixel-wide
    parts of the boundary are listed once per pass.
    """
    labels, count = kernels.label8(mask.bits)
    if count == 0:
        return []
    labs, first = np.unique(labels.ravel(), return_index=True)
    starts = sorted(int(i) for i, lab in zip(first, labs) if lab != 0)
    w = mask.width
    # no other component can touch an 8-neighbor, so trace on the full mask
    return [_trace(mask.bits, (idx % w, idx // w)) for idx in starts]


def mc_area(inside, rect, samples=DEFAULT_SAMPLES, seed=0, vectorized=None):
    """Estimate the area of a region by uniform rejection sampling.

    ``inside(x, y)`` is called once per sample, unless the predicate is
    vectorized (``vectorized=True`` or an ``inside.vectorized`` attribute), in
    which case it receives coordinate arrays and returns a boolean array.
    """
    x0, y0, x1, y1 = (float(v) for v in rect)
    if not (x1 > x0 and y1 > y0):
        raise DomainError(f"degenerate sampling rectangle {rect}")
    if samples < 1:
        raise DomainError("samples must be >= 1")
    if vectorized is None:
        vectorized = getattr(inside, "vectorized", False)
    u = kernels.uniform_doubles(seed, 2 * samples)
    xs = x0 + (x1 - x0) * u[0::2]
    ys = y0 + (y1 - y0) * u[1::2]
    if vectorized:
        hits = int(np.count_nonzero(np.asarray(inside(xs, ys), dtype=bool)))
    else:
        hits = sum(1 for x, y in zip(xs.tolist(), ys.tolist()) if inside(x, y))
    rect_area = (x1 - x0) * (y1 - y0)
    p = hits / samples
    return McEstimate(
        area=rect_area * hits / samples,
        hits=hits,
        samples=samples,
        std_error=rect_area * math.sqrt(p * (1.0 - p) / samples),
        seed=seed,
    )


class MaskMembership:
    """Vectorized predicate: is the point inside a set pixel of ``mask``."""

    vectorized = True

    def __init__(self, mask):
        self.bits = mask.bits

    def __call__(self, xs, ys):
        h, w = self.bits.shape
        ix = np.floor(xs).astype(np.int64)
        iy = np.floor(ys).astype(np.int64)
        ok = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
        out = np.zeros(ix.shape, dtype=bool)
        out[ok] = self.bits[iy[ok], ix[ok]] != 0
        return out


class DiskMembership:
    vectorized = True

    def __init__(self, radius, cx=0.0, cy=0.0):
        self.radius, self.cx, self.cy = radius, cx, cy

    def __call__(self, xs, ys):
        return (xs - self.cx) ** 2 + (ys - self.cy) ** 2 <= self.radius ** 2


class PolygonMembership:
    """Even-odd point-in-polygon test over coordinate arrays."""

    vectorized = True

    def __init__(self, polygon):
        verts = _vertices(polygon)
        self.xs = [float(v[0]) for v in verts]
        self.ys = [float(v[1]) for v in verts]

    def __call__(self, px, py):
        inside = np.zeros(np.shape(px), dtype=bool)
        n = len(self.xs)
        j = n - 1
        for i in range(n):
            xi, yi, xj, yj = self.xs[i], self.ys[i], self.xs[j], self.ys[j]
            if yi != yj:
                straddle = (yi > py) != (yj > py)
                xint = xi + (py - yi) * (xj - xi) / (yj - yi)
                inside ^= straddle & (px < xint)
            j = i
        return inside


def analytic_area(shape, *dims):
    """Closed-form area of ``"rectangle"`` (w, h) or ``"circle"`` (r)."""
    if any(not d > 0 for d in dims):
        raise DomainError(f"dimensions must be positive, got {dims}")
    if shape == "rectangle":
        w, h = dims
        return w * h
    if shape == "circle":
        (r,) = dims
        return math.pi * r * r
    raise DomainError(f"unknown shape {shape!r}")
