"""End-to-end estimation: parse, rasterize, refine, estimate, check feasibility, log."""
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .. import annotio, camera, hydro, maskgeom, massmodel
from .._pykernels import MASK64, splitmix64
from ..errors import AquamassError
from .report import render_report

log = logging.getLogger(__name__)


@dataclass
class EstimateResult:
    records: list
    summary: dict
    errors: list = field(default_factory=list)

    @property
    def partial(self):
        return bool(self.errors)


def derive_seed(seed, *keys):
    """Independent per-item seed from the run seed (splitmix64 chained over keys)."""
    state = seed & MASK64
    for key in keys:
        _, state = splitmix64(state ^ (key & MASK64))
    return state


def _sampling_rect(inst, width, height):
    x0, y0, x1, y1 = inst.bounds()
    return (max(0, math.floor(x0) - 1), max(0, math.floor(y0) - 1),
            min(width, math.ceil(x1) + 1), min(height, math.ceil(y1) + 1))


def _clock_for(config):
    if config.timestamp_utc:
        stamp = massmodel.utc_timestamp(config.timestamp_utc)
        return lambda: stamp
    return massmodel.system_clock


def process_frame(frame, index, config, db, clock):
    """Return ``(record, feasibility, notes)`` for one frame; raises on failure."""
    notes = []
    masks, areas = [], None
    if config.area_mode == "monte_carlo":
        areas = []
    px_area = camera.pixel_size(config.camera) ** 2
    for i, inst in enumerate(frame.instances):
        mask = maskgeom.rasterize(inst, frame.width, frame.height, warn=False)
        if maskgeom.pixel_count(mask) == 0:
            notes.append(f"instance {i}: degenerate geometry, no pixels covered")
        elif config.morph_op != "none":
            mask = maskgeom.morph(mask, config.morph_op, config.morph_element, config.morph_iterations)
        masks.append(mask)
        if areas is not None:
            rect = _sampling_rect(inst, frame.width, frame.height)
            if rect[2] > rect[0] and rect[3] > rect[1] and maskgeom.pixel_count(mask):
                est = maskgeom.mc_area(maskgeom.MaskMembership(mask), rect,
                                       config.mc_samples, derive_seed(config.seed, index, i))
                areas.append(est.area * px_area)
            else:
                areas.append(0.0)
    record = massmodel.frame_record(frame, masks, config.camera, db, clock, config.method, areas)
    verdict = hydro.feasibility(record, config.fluid, config.motor, config.motor_state, config.cd)
    return record, verdict, notes


def _summarize(config, outcomes, errors, n_frames):
    records = [o[0] for o in outcomes]
    by_class = {}
    for rec in records:
        for inst in rec.instances:
            entry = by_class.setdefault(inst.class_name, {"count": 0, "mass": [], "area": []})
            entry["count"] += 1
            entry["mass"].append(inst.mass_g)
            entry["area"].append(inst.area_m2)
    frames = []
    for rec, verdict, notes in outcomes:
        frames.append({"frame_id": rec.frame_id, **verdict.to_dict(), "notes": notes})
    margins = [f["margin_n"] for f in frames]
    summary = {
        "frames_total": n_frames,
        "frames_ok": len(records),
        "frames_failed": len(errors),
        "total_area_m2": math.fsum(r.total_area_m2 for r in records),
        "total_mass_g": math.fsum(r.total_mass_g for r in records),
        "mass_by_class": [
            {"class_name": name, "count": e["count"],
             "total_mass_g": math.fsum(e["mass"]), "total_area_m2": math.fsum(e["area"])}
            for name, e in sorted(by_class.items())
        ],
        "feasibility": {
            "verdict": "feasible" if all(f["verdict"] == "feasible" for f in frames) else "infeasible",
            "min_margin_n": min(margins) if margins else None,
            "frames": frames,
        },
        "estimate": {"method": config.method, "area": config.area_mode, "seed": config.seed,
                     "morphology": config.morph_op},
        "errors": errors,
    }
    if errors:
        summary["note"] = "totals exclude failed frames"
    return summary


def run_estimate(config, clock=None, write=True):
    """Run the estimation pipeline; a failing frame is recorded and skipped."""
    config.check_inputs()
    clock = clock or _clock_for(config)
    with open(config.frames, "rb") as fh:
        frames, parse_errors = annotio.load_frames(fh.read(), config.frames_kind, collect_errors=True)
    errors = [{"frame_id": e.frame_id, "error": str(e)} for e in parse_errors]
    db = massmodel.load_priors(config.priors, config.class_alias)

    def work(item):
        index, frame = item
        try:
            return index, process_frame(frame, index, config, db, clock), None
        except AquamassError as exc:
            return index, None, {"frame_id": frame.frame_id, "error": str(exc)}

    items = list(enumerate(frames))
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(work, items))
    else:
        results = [work(item) for item in items]

    outcomes = []
    for _, outcome, err in results:
        if err is not None:
            log.warning("frame %s failed: %s", err["frame_id"], err["error"])
            errors.append(err)
        else:
            outcomes.append(outcome)
    n_frames = len(frames) + len(parse_errors)
    summary = _summarize(config, outcomes, errors, n_frames)
    records = [o[0] for o in outcomes]
    if write:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        annotio.write_frame_records(records, out / "records.jsonl")
        with open(out / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        render_report(records, None, out, summary=summary)
    return EstimateResult(records, summary, errors)
