"""Pipeline configuration, read from a TOML file.

Relative paths are resolved against the config file's directory. Example::

    seed = 7

    [paths]
    frames = "frames.json"
    out_dir = "out"

    [camera]
    sensor_mm = 6.4
    pixels = 1600
    focal_mm = 8.0
    distance_m = 2.0

    [class_alias]
    Trash = "Plastic bags"
"""
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..camera import CameraModel
from ..errors import DomainError, ValidationError
from ..evalmetrics import parse_operating_point
from ..hydro import DEFAULT_CD, FluidEnvironment, MotorSpec, MotorState
from ..massmodel import METHODS

ENDPOINT_ENV = "AQUAMASS_ENDPOINT"
MORPH_OPS = ("none", "erode", "dilate", "open", "close")
AREA_MODES = ("pixels", "monte_carlo")
DEFAULT_FLUID = {"rho": 1025.0, "v": 0.5, "L": 0.3, "mu": 1.08e-3, "turbulence_intensity": 0.0}
DEFAULT_MOTOR = {"k": 1.0, "k_prime": 0.5, "radius": 0.5, "I": 2.0, "V": 12.0, "omega": 4.0}


@dataclass(frozen=True)
class PipelineConfig:
    frames: Path = None
    out_dir: Path = Path("out")
    priors: Path = None
    frames_kind: str = "predictions"
    camera: CameraModel = None
    fluid: FluidEnvironment = field(default_factory=lambda: FluidEnvironment(**DEFAULT_FLUID))
    motor: MotorSpec = field(default_factory=lambda: MotorSpec(1.0, 0.5, 0.5))
    motor_state: MotorState = field(default_factory=lambda: MotorState(2.0, 12.0, 4.0))
    cd: float = DEFAULT_CD
    method: str = "prior"
    area_mode: str = "pixels"
    mc_samples: int = 100
    workers: int = 1
    timestamp_utc: str = None
    morph_op: str = "close"
    morph_element: str = "square"
    morph_iterations: int = 1
    class_alias: dict = field(default_factory=dict)
    operating_point: str = "f1max"
    iou_kind: str = "box"
    predictions: Path = None
    ground_truth: Path = None
    pca_k: int = None
    pca_standardize: bool = False
    endpoint: str = None
    telemetry_mode: str = "http"
    telemetry_sink: Path = None
    device_id: str = "auv-01"
    seed: int = 0

    def with_overrides(self, seed=None, out_dir=None):
        changes = {}
        if seed is not None:
            changes["seed"] = check_seed(seed)
        if out_dir is not None:
            changes["out_dir"] = Path(out_dir)
        return replace(self, **changes)

    def check_inputs(self):
        """Every referenced input file must exist before a run starts."""
        for name in ("frames", "priors"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ValidationError(f"config {name} file not found: {path}")
        if self.frames is None:
            raise ValidationError("config has no paths.frames")
        if self.camera is None:
            raise ValidationError("config has no [camera] section")


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, int) or not -(2 ** 63) <= seed < 2 ** 64:
        raise ValidationError(f"seed must be a 64-bit integer, got {seed!r}")
    return seed


def resolve_endpoint(configured):
    return os.environ.get(ENDPOINT_ENV) or configured


def _choice(value, allowed, name):
    if value not in allowed:
        raise ValidationError(f"{name} must be one of {', '.join(allowed)}; got {value!r}")
    return value


def from_dict(doc, base_dir=Path(".")):
    base_dir = Path(base_dir)

    def path(section, key):
        value = doc.get(section, {}).get(key)
        if value in (None, ""):
            return None
        p = Path(value)
        return p if p.is_absolute() else base_dir / p

    known = {"seed", "paths", "camera", "fluid", "motor", "drag", "estimate", "morphology",
             "metrics", "pca", "telemetry", "class_alias"}
    unknown = set(doc) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")

    est = doc.get("estimate", {})
    morph = doc.get("morphology", {})
    metrics = doc.get("metrics", {})
    tele = doc.get("telemetry", {})
    pca_cfg = doc.get("pca", {})
    fluid = {**DEFAULT_FLUID, **doc.get("fluid", {})}
    motor = {**DEFAULT_MOTOR, **doc.get("motor", {})}
    try:
        cam = CameraModel.from_config(doc["camera"]) if "camera" in doc else None
        fluid_env = FluidEnvironment(float(fluid["rho"]), float(fluid["v"]), float(fluid["L"]),
                                     float(fluid["mu"]), float(fluid["turbulence_intensity"]))
        motor_spec = MotorSpec(float(motor["k"]), float(motor["k_prime"]), float(motor["radius"]))
        motor_state = MotorState(float(motor["I"]), float(motor["V"]), float(motor["omega"]))
    except (DomainError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad physical parameter: {exc}") from None

    aliases = doc.get("class_alias", {})
    if not all(isinstance(k, str) and isinstance(v, str) for k, v in aliases.items()):
        raise ValidationError("class_alias entries must map names to prior names")

    op = metrics.get("operating_point", "f1max")
    parse_operating_point(op)
    samples = int(est.get("samples", 100))
    if samples < 1:
        raise ValidationError("estimate.samples must be >= 1")
    iterations = int(morph.get("iterations", 1))
    if iterations < 1:
        raise ValidationError("morphology.iterations must be >= 1")

    return PipelineConfig(
        frames=path("paths", "frames"),
        out_dir=path("paths", "out_dir") or base_dir / "out",
        priors=path("paths", "priors"),
        frames_kind=_choice(doc.get("paths", {}).get("frames_kind", "predictions"),
                            ("predictions", "ground_truth"), "paths.frames_kind"),
        camera=cam,
        fluid=fluid_env,
        motor=motor_spec,
        motor_state=motor_state,
        cd=float(doc.get("drag", {}).get("cd", DEFAULT_CD)),
        method=_choice(est.get("method", "prior"), METHODS, "estimate.method"),
        area_mode=_choice(est.get("area", "pixels"), AREA_MODES, "estimate.area"),
        mc_samples=samples,
        workers=max(1, int(est.get("workers", 1))),
        timestamp_utc=est.get("timestamp_utc"),
        morph_op=_choice(morph.get("op", "close"), MORPH_OPS, "morphology.op"),
        morph_element=_choice(morph.get("element", "square"), ("square", "cross"), "morphology.element"),
        morph_iterations=iterations,
        class_alias=dict(aliases),
        operating_point=op,
        iou_kind=_choice(metrics.get("iou_kind", "box"), ("box", "mask"), "metrics.iou_kind"),
        predictions=path("metrics", "predictions"),
        ground_truth=path("metrics", "ground_truth"),
        pca_k=pca_cfg.get("k"),
        pca_standardize=bool(pca_cfg.get("standardize", False)),
        endpoint=tele.get("endpoint") or None,
        telemetry_mode=_choice(tele.get("mode", "http"), ("http", "file"), "telemetry.mode"),
        telemetry_sink=path("telemetry", "sink"),
        device_id=str(tele.get("device_id", "auv-01")),
        seed=check_seed(doc.get("seed", 0)),
    )


def load_config(path):
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return from_dict(doc, path.parent)
