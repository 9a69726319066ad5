"""Volume, density and mass of segmented debris from a per-class prior table."""
import csv
import io
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from types import MappingProxyType

from . import camera
from .errors import UnknownClassError, ValidationError
from .records import FrameRecord, InstanceEstimate

PRIOR_HEADER = ["class_name", "a_cm", "b_cm", "c_cm", "volume_cm3", "density_g_cm3", "shape"]
SHAPES = ("box", "cylinder", "irregular")
BOX_VOLUME_TOLERANCE_CM3 = 1.0
METHODS = ("prior", "area_scaled")


@dataclass(frozen=True)
class DebrisPrior:
    class_name: str
    dims_cm: tuple
    volume_cm3: float
    density_g_cm3: float
    shape: str = "box"

    @property
    def footprint_m2(self):
        a, b, _ = self.dims_cm
        return a * b * 1e-4

    @property
    def mass_g(self):
        return self.volume_cm3 * self.density_g_cm3


class PriorDatabase:
    """Read-only mapping from class name to :class:`DebrisPrior`, plus aliases."""

    def __init__(self, priors, aliases=None):
        self._priors = MappingProxyType(dict(priors))
        self._aliases = MappingProxyType(dict(aliases or {}))
        for alias, target in self._aliases.items():
            if target not in self._priors:
                raise ValidationError(f"alias {alias!r} points at unknown prior {target!r}")

    def with_aliases(self, aliases):
        merged = dict(self._aliases)
        merged.update(aliases)
        return PriorDatabase(self._priors, merged)

    @property
    def aliases(self):
        return self._aliases

    def __getitem__(self, name):
        return self._priors[name]

    def __contains__(self, name):
        return name in self._priors

    def __iter__(self):
        return iter(self._priors)

    def __len__(self):
        return len(self._priors)

    def values(self):
        return self._priors.values()

    def resolve(self, class_name):
        if class_name in self._priors:
            return self._priors[class_name]
        target = self._aliases.get(class_name)
        if target is not None:
            return self._priors[target]
        raise UnknownClassError(class_name, list(self._priors) + list(self._aliases))


def _parse_priors(text, source):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError(f"{source}: empty priors file") from None
    if [h.strip() for h in header] != PRIOR_HEADER:
        raise ValidationError(f"{source}: header must be {','.join(PRIOR_HEADER)}")
    priors = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(PRIOR_HEADER):
            raise ValidationError(f"{source}:{lineno}: expected {len(PRIOR_HEADER)} columns")
        name = row[0].strip()
        try:
            a, b, c, vol, dens = (float(v) for v in row[1:6])
        except ValueError as exc:
            raise ValidationError(f"{source}:{lineno}: {exc}") from None
        shape = row[6].strip()
        if not name:
            raise ValidationError(f"{source}:{lineno}: empty class_name")
        if name in priors:
            raise ValidationError(f"{source}:{lineno}: duplicate class_name {name!r}")
        if not all(math.isfinite(v) and v > 0 for v in (a, b, c, vol, dens)):
            raise ValidationError(f"{source}:{lineno}: dimensions, volume and density must be positive")
        if shape not in SHAPES:
            raise ValidationError(f"{source}:{lineno}: shape must be one of {SHAPES}")
        if shape == "box" and abs(a * b * c - vol) > BOX_VOLUME_TOLERANCE_CM3:
            raise ValidationError(
                f"{source}:{lineno}: box volume {vol} disagrees with {a}x{b}x{c} = {a * b * c}")
        priors[name] = DebrisPrior(name, (a, b, c), vol, dens, shape)
    return priors


def load_priors(path=None, aliases=None):
    """Load a priors CSV; with no path, the bundled seven-class table."""
    if path is None:
        text = resources.files("aquamass").joinpath("data/priors.csv").read_text(encoding="utf-8")
        source = "priors.csv"
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
        source = str(path)
    return PriorDatabase(_parse_priors(text, source), aliases)


def estimate_instance(class_name, pixel_count, cam, db, method="prior", area_m2=None):
    """Mass estimate for one segmented instance.

    ``prior`` takes the class volume as is. ``area_scaled`` multiplies it by
    the ratio of the observed footprint to the prior's a x b footprint.
    ``area_m2`` overrides the pixel-count area (used for Monte Carlo areas).
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    prior = db.resolve(class_name)
    if area_m2 is None:
        area_m2 = camera.mask_physical_area(pixel_count, cam)
    if method == "prior":
        volume = prior.volume_cm3
    else:
        volume = prior.volume_cm3 * (area_m2 / prior.footprint_m2)
    return InstanceEstimate(
        class_name=class_name,
        pixel_count=int(pixel_count),
        area_m2=area_m2,
        volume_cm3=volume,
        density_g_cm3=prior.density_g_cm3,
        mass_g=volume * prior.density_g_cm3,
        method=method,
    )


def utc_timestamp(moment):
    if isinstance(moment, str):
        return moment
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def system_clock():
    return datetime.now(timezone.utc)


def frame_record(frame, masks, cam, db, clock=system_clock, method="prior", areas_m2=None):
    """Estimate every instance of a frame and total them.

    ``masks`` holds one BitMask (or a plain pixel count) per instance, in
    instance order.
    """
    if len(masks) != len(frame.instances):
        raise ValidationError(
            f"got {len(masks)} masks for {len(frame.instances)} instances", frame_id=frame.frame_id)
    estimates = []
    for i, (inst, mask) in enumerate(zip(frame.instances, masks)):
        count = mask if isinstance(mask, int) else int(mask.bits.sum())
        area = None if areas_m2 is None else areas_m2[i]
        estimates.append(estimate_instance(inst.class_name, count, cam, db, method, area_m2=area))
    return FrameRecord(
        frame_id=frame.frame_id,
        timestamp_utc=utc_timestamp(clock()),
        instances=tuple(estimates),
        total_area_m2=camera.frame_total_area(e.area_m2 for e in estimates),
        total_mass_g=math.fsum(e.mass_g for e in estimates),
    )
