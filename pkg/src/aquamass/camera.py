"""Pixel-to-physical conversion under a flat-scene pinhole model.

The per-pixel ground footprint is ``(sensor_mm / pixels) * (distance_m / focal_mm)``
meters: sensor size and focal length share millimeters so their ratio is
dimensionless, and the result carries the unit of the distance.

A mask's physical area is ``pixel_size ** 2 * pixel_count``. The squared
term assumes square pixels; multiplying a length per pixel by a pixel count
would give a length, not an area.
"""
import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class CameraModel:
    sensor_mm: float
    pixels: int
    focal_mm: float
    distance_m: float

    def __post_init__(self):
        for name in ("sensor_mm", "pixels", "focal_mm", "distance_m"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"camera {name} must be a positive finite number, got {value!r}")

    @classmethod
    def from_config(cls, section):
        """Build from a mapping with keys ``sensor_mm``, ``pixels``, ``focal_mm``, ``distance_m``."""
        try:
            return cls(float(section["sensor_mm"]), int(section["pixels"]),
                       float(section["focal_mm"]), float(section["distance_m"]))
        except KeyError as exc:
            raise DomainError(f"camera config is missing {exc.args[0]!r}") from None


def pixel_size(cam):
    """Meters per pixel on the object plane."""
    return (cam.sensor_mm / cam.pixels) * (cam.distance_m / cam.focal_mm)


def mask_physical_area(pixel_count, cam):
    """Square meters covered by ``pixel_count`` pixels."""
    if pixel_count < 0:
        raise DomainError("pixel_count must be non-negative")
    size = pixel_size(cam)
    return size * size * pixel_count


def frame_total_area(instance_areas):
    areas = list(instance_areas)
    if any(a < 0 for a in areas):
        raise DomainError("instance areas must be non-negative")
    # fsum is exactly rounded, so the total does not depend on instance order
    return math.fsum(areas)
