"""Per-frame estimation output, shared by the estimator, the serializer and the pipeline."""
import math
from dataclasses import dataclass, field

from .errors import ValidationError

INSTANCE_KEYS = ("class_name", "pixel_count", "area_m2", "volume_cm3", "density_g_cm3", "mass_g")
RECORD_KEYS = ("frame_id", "timestamp_utc", "instances", "total_area_m2", "total_mass_g")


@dataclass(frozen=True)
class InstanceEstimate:
    class_name: str
    pixel_count: int
    area_m2: float
    volume_cm3: float
    density_g_cm3: float
    mass_g: float
    # not part of the wire format, so excluded from equality
    method: str = field(default="prior", compare=False)

    def validate(self):
        values = (self.pixel_count, self.area_m2, self.volume_cm3, self.density_g_cm3, self.mass_g)
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ValidationError(f"negative or non-finite quantity in estimate for {self.class_name!r}")
        if self.mass_g != self.volume_cm3 * self.density_g_cm3:
            raise ValidationError(f"mass_g != volume_cm3 * density_g_cm3 for {self.class_name!r}")

    def to_dict(self):
        return {key: getattr(self, key) for key in INSTANCE_KEYS}

    @classmethod
    def from_dict(cls, d):
        try:
            est = cls(
                class_name=str(d["class_name"]),
                pixel_count=int(d["pixel_count"]),
                area_m2=float(d["area_m2"]),
                volume_cm3=float(d["volume_cm3"]),
                density_g_cm3=float(d["density_g_cm3"]),
                mass_g=float(d["mass_g"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad instance estimate: {exc}") from exc
        est.validate()
        return est


@dataclass(frozen=True)
class FrameRecord:
    frame_id: str
    timestamp_utc: str
    instances: tuple = ()
    total_area_m2: float = 0.0
    total_mass_g: float = 0.0

    def validate(self):
        for inst in self.instances:
            inst.validate()
        if self.total_area_m2 < 0 or self.total_mass_g < 0:
            raise ValidationError("negative frame total", frame_id=self.frame_id)

    def to_dict(self):
        return {
            "frame_id": self.frame_id,
            "timestamp_utc": self.timestamp_utc,
            "instances": [inst.to_dict() for inst in self.instances],
            "total_area_m2": self.total_area_m2,
            "total_mass_g": self.total_mass_g,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            rec = cls(
                frame_id=str(d["frame_id"]),
                timestamp_utc=str(d["timestamp_utc"]),
                instances=tuple(InstanceEstimate.from_dict(i) for i in d["instances"]),
                total_area_m2=float(d["total_area_m2"]),
                total_mass_g=float(d["total_mass_g"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad frame record: {exc}") from exc
        rec.validate()
        return rec
