"""Backend selection for the hot kernels.

The compiled extension is used when it was built and importable; otherwise
the numpy fallback is used. Setting ``AQUAMASS_PURE_PYTHON=1`` forces the
fallback, which is how the test suite checks the two agree.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("AQUAMASS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

uniform_doubles = _impl.uniform_doubles
rasterize_polygon = _impl.rasterize_polygon
erode = _impl.erode
dilate = _impl.dilate
label8 = _impl.label8

__all__ = ["BACKEND", "uniform_doubles", "rasterize_polygon", "erode", "dilate", "label8"]
