import json
from types import SimpleNamespace

import pytest

from aquamass import _pykernels, kernels

KERNEL_NAMES = ("uniform_doubles", "rasterize_polygon", "erode", "dilate", "label8")


def available_backends():
    names = ["python"]
    try:
        from aquamass import _ckernels  # noqa: F401
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


@pytest.fixture(params=available_backends())
def backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    if request.param == "python":
        for name in KERNEL_NAMES:
            monkeypatch.setattr(kernels, name, getattr(_pykernels, name))
    else:
        from aquamass import _ckernels
        for name in KERNEL_NAMES:
            monkeypatch.setattr(kernels, name, getattr(_ckernels, name))
    return request.param


def frame(frame_id, instances, width=64, height=48):
    return {"frame_id": frame_id, "width": width, "height": height, "instances": instances}


def box(name, bbox, score=None, class_id=0):
    d = {"class_id": class_id, "class_name": name, "bbox": list(bbox)}
    if score is not None:
        d["score"] = score
    return d


def poly(name, points, score=None, class_id=0):
    d = {"class_id": class_id, "class_name": name, "polygon": [list(p) for p in points]}
    if score is not None:
        d["score"] = score
    return d


def dump_frames(path, frames):
    path.write_text(json.dumps({"frames": frames}), encoding="utf-8")
    return path


CONFIG_TEMPLATE = """
seed = {seed}

[paths]
frames = "frames.json"
out_dir = "{out}"

[camera]
sensor_mm = 6.4
pixels = 1600
focal_mm = 8.0
distance_m = 2.0

[estimate]
timestamp_utc = "2024-05-01T12:00:00Z"
{estimate_extra}

[class_alias]
Trash = "Plastic bags"
Crab = "Food containers"
Fish = "Wood"
"""


def sample_frames():
    return [
        frame("f0", [box("Trash", (4, 4, 20, 14), 0.9), poly("Fish", [(30, 5), (50, 8), (40, 30)], 0.8)]),
        frame("f1", [box("Crab", (10, 10, 22, 22), 0.75)]),
        frame("f2", []),
    ]


@pytest.fixture
def pipeline_dir(tmp_path):
    """A directory with frames.json and a config.toml writer."""
    dump_frames(tmp_path / "frames.json", sample_frames())

    def write_config(seed=7, out="out", estimate_extra="", name="config.toml"):
        path = tmp_path / name
        path.write_text(CONFIG_TEMPLATE.format(seed=seed, out=out, estimate_extra=estimate_extra),
                        encoding="utf-8")
        return path

    return SimpleNamespace(dir=tmp_path, write_config=write_config)
