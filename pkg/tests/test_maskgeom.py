import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aquamass import maskgeom
from aquamass.annotio import BoxInstance, PolygonInstance
from aquamass.errors import DegenerateGeometry, DomainError
from aquamass.maskgeom import BitMask
from oracles import border_pixels, components8, dilate_ref, erode_ref, raster_by_centers

masks = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=st.integers(0, 1))


def block(w, h, x0, y0, bw, bh):
    bits = np.zeros((h, w), dtype=np.uint8)
    bits[y0:y0 + bh, x0:x0 + bw] = 1
    return BitMask(bits)


# -- BitMask ------------------------------------------------------------------

def test_bitmask_is_read_only():
    m = BitMask(np.ones((2, 3)))
    assert (m.width, m.height) == (3, 2)
    with pytest.raises(ValueError):
        m.bits[0, 0] = 0


def test_bitmask_value_semantics():
    a = BitMask(np.eye(3))
    b = BitMask(np.eye(3) * 255)
    assert a == b and hash(a) == hash(b)
    assert (1, 1) in a and (1, 0) not in a and (5, 5) not in a
    assert a.issubset(BitMask(np.ones((3, 3))))
    assert maskgeom.pixel_count(~a) == 6


# -- rasterize ----------------------------------------------------------------

def test_rasterize_rectangle_example(backend):
    m = maskgeom.rasterize([(1, 1), (5, 1), (5, 3), (1, 3)], 8, 8)
    assert maskgeom.pixel_count(m) == 8
    assert m.bits[1:3, 1:5].all()


@pytest.mark.parametrize("w,h", [(1, 1), (7, 3), (16, 16)])
def test_rasterize_full_frame(backend, w, h):
    m = maskgeom.rasterize(BoxInstance(0, "x", (0, 0, w, h)), w, h)
    assert maskgeom.pixel_count(m) == w * h


def test_rasterize_collinear_warns(backend):
    with pytest.warns(DegenerateGeometry):
        m = maskgeom.rasterize([(0, 0), (2, 2), (4, 4)], 8, 8)
    assert maskgeom.pixel_count(m) == 0


def test_rasterize_quiet_mode(backend):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        maskgeom.rasterize([(0, 0), (2, 2), (4, 4)], 8, 8, warn=False)


def test_rasterize_rejects_bad_size():
    with pytest.raises(DomainError):
        maskgeom.rasterize([(0, 0), (1, 0), (0, 1)], 0, 4)


def test_rasterize_self_intersecting_even_odd(backend):
    # a bow-tie: the two lobes are inside, the crossing point splits them
    verts = [(0, 0), (10, 10), (10, 0), (0, 10)]
    m = maskgeom.rasterize(PolygonInstance(0, "x", tuple(verts)), 10, 10)
    np.testing.assert_array_equal(m.bits, raster_by_centers(verts, 10, 10))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 15.9), st.floats(0.1, 11.9)), min_size=3, max_size=7),
       st.integers(-3, 3), st.integers(-3, 3))
def test_rasterize_translation_equivariant(verts, dx, dy):
    w, h = 24, 20
    base = maskgeom.rasterize([(x + 4, y + 4) for x, y in verts], w, h, warn=False)
    moved = maskgeom.rasterize([(x + 4 + dx, y + 4 + dy) for x, y in verts], w, h, warn=False)
    np.testing.assert_array_equal(np.roll(base.bits, (dy, dx), axis=(0, 1)), moved.bits)


# -- pixel_count --------------------------------------------------------------

def test_pixel_count_examples():
    assert maskgeom.pixel_count(BitMask.zeros(5, 4)) == 0
    assert maskgeom.pixel_count(BitMask(np.ones((4, 4)))) == 16


# -- morphology ---------------------------------------------------------------

def test_isolated_pixel_erodes_away(backend):
    m = block(5, 5, 2, 2, 1, 1)
    assert maskgeom.pixel_count(maskgeom.morph(m, "erode", "square")) == 0


def test_block_dilate_cross_grows_plus_shape(backend):
    # union of crosses on the 9 seeds: the 5x5 square minus its corners
    m = block(9, 9, 3, 3, 3, 3)
    out = maskgeom.morph(m, "dilate", "cross")
    assert maskgeom.pixel_count(out) == 21
    np.testing.assert_array_equal(out.bits, dilate_ref(m.bits, True))
    assert out.bits[2, 2] == 0 and out.bits[2, 3] == 1


def test_cross_seed_dilate_cross_gives_diamond(backend):
    bits = np.zeros((9, 9), dtype=np.uint8)
    bits[4, 3:6] = 1
    bits[3:6, 4] = 1
    out = maskgeom.morph(BitMask(bits), "dilate", "cross")
    assert maskgeom.pixel_count(out) == 13


@pytest.mark.parametrize("element", ["square", "cross"])
@pytest.mark.parametrize("op", ["erode", "dilate"])
def test_morph_matches_set_oracle(backend, op, element):
    rng = np.random.default_rng(3)
    ref = erode_ref if op == "erode" else dilate_ref
    for _ in range(40):
        bits = (rng.random((int(rng.integers(1, 10)), int(rng.integers(1, 10)))) < 0.6).astype(np.uint8)
        got = maskgeom.morph(BitMask(bits), op, element)
        np.testing.assert_array_equal(got.bits, ref(bits, element == "cross"))


def test_open_close_composition(backend):
    rng = np.random.default_rng(8)
    bits = (rng.random((12, 12)) < 0.5).astype(np.uint8)
    m = BitMask(bits)
    for element in ("square", "cross"):
        c = element == "cross"
        assert maskgeom.morph(m, "open", element).bits.tolist() == dilate_ref(erode_ref(bits, c), c).tolist()
        assert maskgeom.morph(m, "close", element).bits.tolist() == erode_ref(dilate_ref(bits, c), c).tolist()


def test_iterations_repeat(backend):
    m = block(11, 11, 5, 5, 1, 1)
    twice = maskgeom.morph(m, "dilate", "square", iterations=2)
    assert maskgeom.pixel_count(twice) == 25


@pytest.mark.parametrize("kwargs", [{"op": "blur"}, {"op": "erode", "element": "disk"},
                                    {"op": "erode", "iterations": 0}])
def test_morph_rejects_bad_args(kwargs):
    with pytest.raises(DomainError):
        maskgeom.morph(BitMask.zeros(3, 3), **kwargs)


@settings(max_examples=150, deadline=None)
@given(masks, st.sampled_from(["square", "cross"]))
def test_morph_properties(bits, element):
    m = BitMask(bits)
    eroded = maskgeom.morph(m, "erode", element)
    dilated = maskgeom.morph(m, "dilate", element)
    assert eroded.issubset(m) and m.issubset(dilated)
    closed = maskgeom.morph(m, "close", element)
    assert maskgeom.morph(closed, "close", element) == closed
    opened = maskgeom.morph(m, "open", element)
    assert maskgeom.morph(opened, "open", element) == opened


@settings(max_examples=100, deadline=None)
@given(masks, st.sampled_from(["square", "cross"]))
def test_erode_dilate_duality_on_interior(bits, element):
    bits = bits.copy()
    bits[0, :] = bits[-1, :] = 0
    bits[:, 0] = bits[:, -1] = 0
    m = BitMask(bits)
    assert maskgeom.morph(m, "erode", element) == ~maskgeom.morph(~m, "dilate", element)


# -- contours -----------------------------------------------------------------

def test_contours_empty_and_single():
    assert maskgeom.contours(BitMask.zeros(4, 4)) == []
    assert maskgeom.contours(block(4, 4, 2, 1, 1, 1)) == [[(2, 1)]]


def test_contour_3x3_block_hand_trace(backend):
    got = maskgeom.contours(block(5, 5, 1, 1, 3, 3))
    assert got == [[(1, 1), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (1, 2)]]


def test_contour_of_line_revisits_pixels():
    # a 1-pixel-wide bar is walked out and back
    got = maskgeom.contours(block(5, 3, 1, 1, 3, 1))
    assert got == [[(1, 1), (2, 1), (3, 1), (2, 1)]]


def test_contours_one_per_component_in_raster_order(backend):
    bits = np.zeros((8, 8), dtype=np.uint8)
    bits[5:7, 1:3] = 1
    bits[1, 5] = 1
    bits[2, 6] = 1       # diagonal neighbor: same component
    bits[0:2, 0:2] = 1
    out = maskgeom.contours(BitMask(bits))
    assert [c[0] for c in out] == [(0, 0), (5, 1), (1, 5)]
    assert out[1] == [(5, 1), (6, 2)]


@settings(max_examples=120, deadline=None)
@given(masks)
def test_contour_properties(bits):
    m = BitMask(bits)
    out = maskgeom.contours(m)
    comps = components8(bits)
    assert len(out) == len(comps)
    border = border_pixels(bits)
    for contour, comp in zip(out, comps):
        assert contour[0] == min(comp, key=lambda p: (p[1], p[0]))
        assert set(contour) <= border & comp
        closed = contour + contour[:1]
        for (x0, y0), (x1, y1) in zip(closed, closed[1:]):
            assert max(abs(x1 - x0), abs(y1 - y0)) <= 1


@settings(max_examples=60, deadline=None)
@given(masks)
def test_contour_visits_every_outer_border_pixel_of_filled_shapes(bits):
    # fill holes so the outer boundary is the whole border
    m = maskgeom.morph(BitMask(bits), "close", "square")
    filled = m.bits
    for contour, comp in zip(maskgeom.contours(m), components8(filled)):
        outside = _outside_background(filled)
        expected = {p for p in comp if _touches(p, outside, filled.shape)}
        assert set(contour) == expected


def _outside_background(bits):
    # background pixels 4-connected to the image frame
    h, w = bits.shape
    seen = set()
    todo = [(x, y) for x in range(w) for y in (0, h - 1)] + [(x, y) for y in range(h) for x in (0, w - 1)]
    todo = [p for p in todo if not bits[p[1], p[0]]]
    seen.update(todo)
    while todo:
        x, y = todo.pop()
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            n = (x + dx, y + dy)
            if 0 <= n[0] < w and 0 <= n[1] < h and n not in seen and not bits[n[1], n[0]]:
                seen.add(n)
                todo.append(n)
    return seen


def _touches(p, outside, shape):
    h, w = shape
    x, y = p
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nx, ny = x + dx, y + dy
        if not (0 <= nx < w and 0 <= ny < h) or (nx, ny) in outside:
            return True
    return False


# -- Monte Carlo ----------------------------------------------------------------

def test_mc_always_true_and_false(backend):
    full = maskgeom.mc_area(lambda x, y: True, (0, 0, 3, 2), samples=50, seed=9)
    assert full.area == 6.0 and full.std_error == 0.0 and full.hits == 50
    empty = maskgeom.mc_area(lambda x, y: False, (-1, -1, 1, 1), samples=50, seed=9)
    assert empty.area == 0.0 and empty.std_error == 0.0


def test_mc_invariants_and_determinism(backend):
    a = maskgeom.mc_area(maskgeom.DiskMembership(1.0), (-1, -1, 1, 1), samples=1000, seed=42)
    b = maskgeom.mc_area(maskgeom.DiskMembership(1.0), (-1, -1, 1, 1), samples=1000, seed=42)
    assert a == b
    p = a.hits / a.samples
    assert a.area == 4.0 * a.hits / a.samples
    assert a.std_error == pytest.approx(4.0 * math.sqrt(p * (1 - p) / 1000), rel=1e-15)


def test_mc_scalar_and_vectorized_agree():
    disk = maskgeom.DiskMembership(1.0)
    vec = maskgeom.mc_area(disk, (-1, -1, 1, 1), samples=2000, seed=5)
    scalar = maskgeom.mc_area(lambda x, y: x * x + y * y <= 1.0, (-1, -1, 1, 1), samples=2000, seed=5)
    assert vec == scalar


def test_mc_default_is_one_hundred_samples():
    assert maskgeom.mc_area(lambda x, y: True, (0, 0, 1, 1)).samples == 100


@pytest.mark.parametrize("rect,samples", [((0, 0, 0, 1), 10), ((0, 0, 1, 1), 0), ((1, 0, 0, 1), 10)])
def test_mc_rejects_bad_args(rect, samples):
    with pytest.raises(DomainError):
        maskgeom.mc_area(lambda x, y: True, rect, samples=samples)


def test_mc_mask_membership_converges(backend):
    mask = maskgeom.rasterize([(2, 3), (25, 5), (20, 28), (6, 22)], 32, 32)
    count = maskgeom.pixel_count(mask)
    inside = maskgeom.MaskMembership(mask)
    within = 0
    for seed in range(100):
        est = maskgeom.mc_area(inside, (0, 0, 32, 32), samples=4000, seed=seed)
        within += abs(est.area - count) <= 3 * est.std_error
    assert within >= 99


def test_polygon_membership_matches_raster():
    verts = [(2.2, 3.1), (25.7, 5.3), (20.1, 28.9), (6.4, 22.2)]
    xs, ys = np.meshgrid(np.arange(32) + 0.5, np.arange(32) + 0.5)
    got = maskgeom.PolygonMembership(verts)(xs, ys)
    np.testing.assert_array_equal(got.astype(np.uint8), raster_by_centers(verts, 32, 32))


# -- analytic -----------------------------------------------------------------

def test_analytic_area_examples():
    assert maskgeom.analytic_area("rectangle", 4, 2.5) == 10
    assert maskgeom.analytic_area("circle", 1) == math.pi
    with pytest.raises(DomainError):
        maskgeom.analytic_area("rectangle", 0, 3)
    with pytest.raises(DomainError):
        maskgeom.analytic_area("hexagon", 1)
