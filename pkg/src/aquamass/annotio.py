"""Readers and writers for frames files, PGM mask rasters and JSON-lines records.

Frames file (UTF-8 JSON, shared by ground truth and predictions)::

    {"frames": [{"frame_id": "f0", "width": 640, "height": 480,
                 "instances": [{"class_id": 0, "class_name": "Trash",
                                "polygon": [[x, y], ...],      # or "bbox": [x0, y0, x1, y1]
                                "score": 0.93}]}]}              # predictions only

Mask rasters are binary PGM (``P5``, maxval 255) with 0 for background and
255 for object pixels.
"""
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ParseError, ValidationError
from .records import FrameRecord

GROUND_TRUTH = "ground_truth"
PREDICTIONS = "predictions"


@dataclass(frozen=True)
class PolygonInstance:
    class_id: int
    class_name: str
    vertices: tuple
    score: float = None

    def bounds(self):
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))


@dataclass(frozen=True)
class BoxInstance:
    class_id: int
    class_name: str
    bbox: tuple
    score: float = None

    @property
    def vertices(self):
        x0, y0, x1, y1 = self.bbox
        return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))

    def bounds(self):
        return self.bbox


@dataclass(frozen=True)
class FrameAnnotations:
    frame_id: str
    width: int
    height: int
    instances: tuple = ()


@dataclass(frozen=True)
class MaskRaster:
    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"mask dimensions must be positive, got {self.width}x{self.height}")
        if len(self.pixels) != self.width * self.height:
            raise ValidationError(
                f"mask has {len(self.pixels)} bytes, expected {self.width * self.height}")
        bad = set(self.pixels) - {0, 255}
        if bad:
            raise ValidationError(f"mask pixel values must be 0 or 255, found {min(bad)}")

    def to_array(self):
        """Logical (height, width) uint8 array of 0/1."""
        arr = np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width)
        return (arr == 255).astype(np.uint8)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        h, w = arr.shape
        return cls(w, h, (arr.astype(bool).astype(np.uint8) * 255).tobytes())


# -- frames files -------------------------------------------------------------

def _is_number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        return False
    try:
        return math.isfinite(v)
    except OverflowError:  # integer too large for a double
        return False


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _decode(data):
    if isinstance(data, str):
        text = data
    else:
        try:
            text = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8: {exc.reason}", offset=exc.start) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno, offset=offset) from exc
    except RecursionError as exc:
        raise ParseError("JSON nested too deeply") from exc


def _parse_instance(raw, index, frame_id, width, height, kind):
    def fail(msg):
        raise ValidationError(msg, frame_id=frame_id, instance_index=index)

    if not isinstance(raw, dict):
        fail("instance must be an object")
    class_id = raw.get("class_id")
    class_name = raw.get("class_name")
    if not _is_int(class_id) or class_id < 0:
        fail("class_id must be a non-negative integer")
    if not isinstance(class_name, str) or not class_name:
        fail("class_name must be a non-empty string")

    score = raw.get("score")
    if kind == GROUND_TRUTH and "score" in raw:
        fail("ground-truth instances must not carry a score")
    if kind == PREDICTIONS:
        if "score" not in raw:
            fail("prediction instances must carry a score")
        if not _is_number(score) or not 0.0 <= score <= 1.0:
            fail(f"score must be a number in [0, 1], got {score!r}")
        score = float(score)

    has_poly, has_box = "polygon" in raw, "bbox" in raw
    if has_poly == has_box:
        fail("instance needs exactly one of 'polygon' or 'bbox'")

    if has_poly:
        poly = raw["polygon"]
        if not isinstance(poly, list) or len(poly) < 3:
            fail("polygon needs at least 3 vertices")
        verts = []
        for k, pt in enumerate(poly):
            if not (isinstance(pt, list) and len(pt) == 2 and all(_is_number(c) for c in pt)):
                fail(f"vertex {k} must be a pair of finite numbers")
            x, y = float(pt[0]), float(pt[1])
            if not (0.0 <= x <= width and 0.0 <= y <= height):
                fail(f"vertex {k} ({pt[0]}, {pt[1]}) is out of bounds for {width}x{height} image")
            verts.append((x, y))
        return PolygonInstance(class_id, class_name, tuple(verts), score)

    box = raw["bbox"]
    if not (isinstance(box, list) and len(box) == 4 and all(_is_number(c) for c in box)):
        fail("bbox must be four finite numbers")
    x0, y0, x1, y1 = (float(c) for c in box)
    if not (x0 < x1 and y0 < y1):
        fail("bbox needs x_min < x_max and y_min < y_max")
    if not (0.0 <= x0 and 0.0 <= y0 and x1 <= width and y1 <= height):
        fail(f"bbox {box} is out of bounds for {width}x{height} image")
    return BoxInstance(class_id, class_name, (x0, y0, x1, y1), score)


def _parse_frame(raw, index, kind):
    if not isinstance(raw, dict):
        raise ValidationError(f"frame {index} must be an object")
    frame_id = raw.get("frame_id")
    if not isinstance(frame_id, str) or not frame_id:
        raise ValidationError(f"frame {index} has no string frame_id")
    width, height = raw.get("width"), raw.get("height")
    if not (_is_int(width) and _is_int(height) and width > 0 and height > 0):
        raise ValidationError("width and height must be positive integers", frame_id=frame_id)
    instances = raw.get("instances")
    if not isinstance(instances, list):
        raise ValidationError("instances must be a list", frame_id=frame_id)
    parsed = tuple(_parse_instance(inst, i, frame_id, width, height, kind)
                   for i, inst in enumerate(instances))
    return FrameAnnotations(frame_id, width, height, parsed)


def load_frames(data, kind, collect_errors=False):
    """Parse a frames document from bytes or text.

    With ``collect_errors`` a frame that fails validation is dropped and its
    error appended to the returned list instead of aborting the whole file.
    Returns ``(frames, errors)``.
    """
    if kind not in (GROUND_TRUTH, PREDICTIONS):
        raise ValueError(f"kind must be {GROUND_TRUTH!r} or {PREDICTIONS!r}")
    doc = _decode(data)
    if not isinstance(doc, dict) or not isinstance(doc.get("frames"), list):
        raise ValidationError("top level must be an object with a 'frames' list")
    frames, errors, seen = [], [], set()
    for index, raw in enumerate(doc["frames"]):
        try:
            frame = _parse_frame(raw, index, kind)
            if frame.frame_id in seen:
                raise ValidationError("duplicate frame_id", frame_id=frame.frame_id)
        except ValidationError as exc:
            if not collect_errors:
                raise
            errors.append(exc)
            continue
        seen.add(frame.frame_id)
        frames.append(frame)
    return frames, errors


def parse_frames(path, kind):
    with open(path, "rb") as fh:
        data = fh.read()
    frames, _ = load_frames(data, kind)
    return frames


def frames_to_dict(frames):
    out = []
    for frame in frames:
        instances = []
        for inst in frame.instances:
            d = {"class_id": inst.class_id, "class_name": inst.class_name}
            if isinstance(inst, PolygonInstance):
                d["polygon"] = [list(v) for v in inst.vertices]
            else:
                d["bbox"] = list(inst.bbox)
            if inst.score is not None:
                d["score"] = inst.score
            instances.append(d)
        out.append({"frame_id": frame.frame_id, "width": frame.width,
                    "height": frame.height, "instances": instances})
    return {"frames": out}


def write_frames(frames, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(frames_to_dict(frames), fh, ensure_ascii=False, indent=1)
        fh.write("\n")


# -- PGM mask rasters ---------------------------------------------------------

def decode_pgm(data):
    data = bytes(data)
    if data[:2] != b"P5":
        raise FormatError(f"not a binary PGM (magic {data[:2]!r}, expected b'P5')")
    fields, pos = [], 2
    while len(fields) < 3:
        if pos >= len(data):
            raise FormatError("truncated PGM header")
        ch = data[pos:pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        else:
            start = pos
            while pos < len(data) and data[pos:pos + 1].isdigit():
                pos += 1
            if pos == start:
                raise FormatError(f"unexpected byte {ch!r} in PGM header")
            fields.append(int(data[start:pos]))
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("PGM header must end with a single whitespace byte")
    pos += 1
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"PGM maxval must be 255, got {maxval}")
    if width <= 0 or height <= 0:
        raise FormatError(f"PGM dimensions must be positive, got {width}x{height}")
    pixels = data[pos:pos + width * height]
    if len(pixels) != width * height:
        raise FormatError(f"PGM pixel data truncated: {len(pixels)} of {width * height} bytes")
    return MaskRaster(width, height, pixels)


def encode_pgm(mask):
    return b"P5\n%d %d\n255\n" % (mask.width, mask.height) + bytes(mask.pixels)


def read_mask_raster(path):
    with open(path, "rb") as fh:
        return decode_pgm(fh.read())


def write_mask_raster(mask, path):
    # re-run the invariant checks before anything touches disk
    mask = MaskRaster(mask.width, mask.height, bytes(mask.pixels))
    with open(path, "wb") as fh:
        fh.write(encode_pgm(mask))


# -- frame records ------------------------------------------------------------

def dumps_record(record):
    return json.dumps(record.to_dict(), ensure_ascii=False)


def write_frame_records(records, path):
    """Write one JSON object per line, in input order."""
    for rec in records:
        rec.validate()
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps_record(rec))
            fh.write("\n")
    os.replace(tmp, path)


def read_frame_records(path):
    records = []
    with open(path, "rb") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise ParseError(f"bad record on line {lineno}: {exc}", line=lineno, column=1,
                                 offset=None) from exc
            records.append(FrameRecord.from_dict(doc))
    return records
