"""Detection and segmentation quality metrics.

Matching is greedy by descending score (ties keep input order): each
prediction takes the unmatched same-class ground truth with the highest IoU
at or above the threshold. Precision/recall points are taken at every
distinct score, so tied predictions enter the curve together. AP is the
all-point interpolated area under that curve: the precision envelope is made
non-increasing, and every true positive contributes ``1 / n_gt`` of recall at
the envelope's height. The sum is accumulated in exact rationals and rounded
once, so AP does not depend on summation order.
"""
import json
import math
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import annotio, maskgeom
from .errors import DomainError, SkippedClass, ValidationError

COCO_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
TABLE_COLUMNS = ("Class", "Images", "Labels", "P", "R", "mAP@.5", "mAP@.5:95")


@dataclass(frozen=True)
class MatchConfig:
    iou_thresholds: tuple = COCO_THRESHOLDS
    iou_kind: str = "box"
    operating_point: str = "f1max"

    def __post_init__(self):
        ts = tuple(float(t) for t in self.iou_thresholds)
        if not ts or any(not 0 < t <= 1 for t in ts):
            raise ValidationError("IoU thresholds must lie in (0, 1]")
        if list(ts) != sorted(set(ts)):
            raise ValidationError("IoU thresholds must be sorted ascending and unique")
        if self.iou_kind not in ("box", "mask"):
            raise ValidationError("iou_kind must be 'box' or 'mask'")
        parse_operating_point(self.operating_point)
        object.__setattr__(self, "iou_thresholds", ts)


def f1_score(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class ClassMetrics:
    class_name: str
    n_images: int
    n_labels: int
    precision: float
    recall: float
    ap_50: float
    ap_50_95: float
    f1: float = None

    def __post_init__(self):
        if self.f1 is None:
            object.__setattr__(self, "f1", f1_score(self.precision, self.recall))


@dataclass(frozen=True)
class MetricsSummary:
    per_class: tuple
    all_row: ClassMetrics
    miou: float = None
    title: str = ""

    def to_dict(self):
        return {
            "title": self.title,
            "per_class": [asdict(c) for c in self.per_class],
            "all": asdict(self.all_row),
            "miou": self.miou,
        }

    @classmethod
    def from_dict(cls, d):
        per_class = tuple(ClassMetrics(**c) for c in d["per_class"])
        return cls(per_class, ClassMetrics(**d["all"]), d.get("miou"), d.get("title", ""))

    def table(self):
        return format_table(self)


def parse_operating_point(spec):
    if spec == "f1max":
        return None
    if isinstance(spec, str) and spec.startswith("fixed:"):
        try:
            cutoff = float(spec[len("fixed:"):])
        except ValueError:
            cutoff = math.nan
        if 0.0 <= cutoff <= 1.0:
            return cutoff
    raise ValidationError(f"operating point must be 'f1max' or 'fixed:<score>', got {spec!r}")


# -- IoU ----------------------------------------------------------------------

def box_iou(a, b):
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if union <= 0:
        raise DomainError("IoU of two empty boxes is undefined")
    return inter / union


def mask_iou(a, b):
    bits_a = a.bits if hasattr(a, "bits") else np.asarray(a)
    bits_b = b.bits if hasattr(b, "bits") else np.asarray(b)
    if bits_a.shape != bits_b.shape:
        raise DomainError(f"mask sizes differ: {bits_a.shape} vs {bits_b.shape}")
    a_on, b_on = bits_a != 0, bits_b != 0
    union = int(np.count_nonzero(a_on | b_on))
    if union == 0:
        raise DomainError("IoU of two empty masks is undefined")
    return int(np.count_nonzero(a_on & b_on)) / union


def iou(a, b, kind="box"):
    if kind == "box":
        return box_iou(a, b)
    if kind == "mask":
        return mask_iou(a, b)
    raise DomainError(f"unknown IoU kind {kind!r}")


# -- matching and AP ----------------------------------------------------------

@dataclass(frozen=True)
class Detection:
    """A scored prediction reduced to what matching needs."""

    class_name: str
    score: float
    region: object      # bbox tuple or BitMask
    image: str = ""


@dataclass(frozen=True)
class Truth:
    class_name: str
    region: object
    image: str = ""


def _rank(preds):
    return sorted(range(len(preds)), key=lambda i: -preds[i].score)


def match_detections(preds, gts, threshold, kind="box"):
    """Greedy one-to-one matching; returns ``(pred, gt_or_None, iou)`` in rank order."""
    used = set()
    out = []
    for i in _rank(preds):
        p = preds[i]
        best, best_iou = None, -1.0
        for j, g in enumerate(gts):
            if j in used or g.class_name != p.class_name or g.image != p.image:
                continue
            try:
                v = iou(p.region, g.region, kind)
            except DomainError:
                # two empty masks never overlap
                v = 0.0
            if v >= threshold and v > best_iou:
                best, best_iou = j, v
        if best is None:
            out.append((p, None, 0.0))
        else:
            used.add(best)
            out.append((p, gts[best], best_iou))
    return out


def pr_points(matches, n_gt):
    """(score, tp, fp, precision, recall) at each distinct score cutoff."""
    points = []
    tp = fp = 0
    for k, (pred, gt, _) in enumerate(matches):
        if gt is None:
            fp += 1
        else:
            tp += 1
        last = k + 1 == len(matches) or matches[k + 1][0].score != pred.score
        if last:
            points.append((pred.score, tp, fp, tp / (tp + fp), tp / n_gt if n_gt else 0.0))
    return points


def ap_from_matches(matches, n_gt):
    if n_gt <= 0:
        raise DomainError("AP needs at least one ground truth")
    points = pr_points(matches, n_gt)
    if not points:
        return 0.0
    envelope = [Fraction(tp, tp + fp) for _, tp, fp, _, _ in points]
    for i in range(len(envelope) - 2, -1, -1):
        envelope[i] = max(envelope[i], envelope[i + 1])
    total = Fraction(0)
    prev_tp = 0
    for (_, tp, _, _, _), h in zip(points, envelope):
        total += h * (tp - prev_tp)
        prev_tp = tp
    return float(total / n_gt)


def average_precision(preds, gts, threshold=0.5, kind="box"):
    """AP of ``preds`` against ``gts`` (single class, or matched within class)."""
    if not gts:
        raise DomainError("AP needs at least one ground truth")
    return ap_from_matches(match_detections(preds, gts, threshold, kind), len(gts))


def operating_point(matches, n_gt, cutoff=None):
    """Precision and recall at ``cutoff``, or at the F1-maximizing cutoff."""
    points = pr_points(matches, n_gt)
    if cutoff is not None:
        kept = [pt for pt in points if pt[0] >= cutoff]
        if not kept:
            return 0.0, 0.0
        return kept[-1][3], kept[-1][4]
    best = (0.0, 0.0)
    best_f1 = -1.0
    for _, _, _, p, r in points:
        f = f1_score(p, r)
        if f > best_f1:
            best, best_f1 = (p, r), f
    return best


# -- file-level summary -------------------------------------------------------

def _region(inst, frame, kind, cache):
    if kind == "box":
        return tuple(inst.bounds())
    key = id(inst)
    if key not in cache:
        cache[key] = maskgeom.rasterize(inst, frame.width, frame.height, warn=False)
    return cache[key]


def _collect(frames, kind, cache, scored):
    items = []
    for frame in frames:
        for inst in frame.instances:
            region = _region(inst, frame, kind, cache)
            if scored:
                items.append(Detection(inst.class_name, inst.score, region, frame.frame_id))
            else:
                items.append(Truth(inst.class_name, region, frame.frame_id))
    return items


def summarize_frames(pred_frames, gt_frames, config=None, title=""):
    config = config or MatchConfig()
    gt_ids = [f.frame_id for f in gt_frames]
    pred_ids = [f.frame_id for f in pred_frames]
    if set(gt_ids) != set(pred_ids):
        missing = sorted(set(gt_ids) ^ set(pred_ids))
        raise ValidationError(f"frame_id mismatch between predictions and ground truth: {missing[:5]}")
    for a, b in zip(sorted(gt_frames, key=lambda f: f.frame_id), sorted(pred_frames, key=lambda f: f.frame_id)):
        if (a.width, a.height) != (b.width, b.height):
            raise ValidationError("image size differs between files", frame_id=a.frame_id)
    cutoff = parse_operating_point(config.operating_point)
    cache = {}
    preds = _collect(pred_frames, config.iou_kind, cache, scored=True)
    gts = _collect(gt_frames, config.iou_kind, cache, scored=False)
    n_images = len(gt_frames)

    classes = sorted({g.class_name for g in gts} | {p.class_name for p in preds})
    per_class = []
    matched_ious = []
    for name in classes:
        cls_gts = [g for g in gts if g.class_name == name]
        cls_preds = [p for p in preds if p.class_name == name]
        if not cls_gts:
            warnings.warn(f"class {name!r} has no ground truth; skipped", SkippedClass, stacklevel=2)
            continue
        aps = []
        p50 = r50 = 0.0
        for t in config.iou_thresholds:
            matches = match_detections(cls_preds, cls_gts, t, config.iou_kind)
            aps.append(ap_from_matches(matches, len(cls_gts)))
            if t == 0.5:
                p50, r50 = operating_point(matches, len(cls_gts), cutoff)
                matched_ious.extend(v for _, g, v in matches if g is not None)
        ap50 = aps[config.iou_thresholds.index(0.5)] if 0.5 in config.iou_thresholds else math.nan
        per_class.append(ClassMetrics(name, n_images, len(cls_gts), p50, r50, ap50, math.fsum(aps) / len(aps)))

    all_row = aggregate(per_class, n_images)
    miou = math.fsum(matched_ious) / len(matched_ious) if matched_ious else 0.0
    return MetricsSummary(tuple(per_class), all_row, miou, title)


def aggregate(per_class, n_images):
    """Unweighted class mean; F1 is recomputed from the mean P and R."""
    if not per_class:
        return ClassMetrics("All", n_images, 0, 0.0, 0.0, 0.0, 0.0)

    def mean(attr):
        return math.fsum(getattr(c, attr) for c in per_class) / len(per_class)

    return ClassMetrics("All", n_images, sum(c.n_labels for c in per_class),
                        mean("precision"), mean("recall"), mean("ap_50"), mean("ap_50_95"))


def summarize(preds_file, gts_file, config=None):
    preds = annotio.parse_frames(preds_file, annotio.PREDICTIONS)
    gts = annotio.parse_frames(gts_file, annotio.GROUND_TRUTH)
    return summarize_frames(preds, gts, config)


# -- output -------------------------------------------------------------------

def fmt(value):
    """Three-decimal rendering without trailing zeros: 1 -> '1', 0.94 -> '0.94'."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    return f"{round(float(value), 3):g}"


def table_rows(summary):
    rows = []
    for c in (summary.all_row, *summary.per_class):
        rows.append((c.class_name, str(c.n_images), str(c.n_labels), fmt(c.precision),
                     fmt(c.recall), fmt(c.ap_50), fmt(c.ap_50_95)))
    return rows


def format_table(summary):
    rows = [TABLE_COLUMNS, *table_rows(summary)]
    widths = [max(len(r[i]) for r in rows) for i in range(len(TABLE_COLUMNS))]
    lines = [" | ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_metrics(summary, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary.to_dict(), fh, indent=2)
        fh.write("\n")


def read_metrics(path):
    with open(path, encoding="utf-8") as fh:
        return MetricsSummary.from_dict(json.load(fh))


# -- published benchmark tables ------------------------------------------------

def _benchmarks():
    from importlib import resources

    text = resources.files("aquamass").joinpath("data/benchmarks.json").read_text(encoding="utf-8")
    return {b["id"]: b for b in json.loads(text)["benchmarks"]}


def benchmark_ids():
    return sorted(_benchmarks())


def load_benchmark(benchmark_id):
    """A published YOLO results table as a MetricsSummary (display only, no mIoU)."""
    tables = _benchmarks()
    if benchmark_id not in tables:
        raise KeyError(f"unknown benchmark {benchmark_id!r}; available: {', '.join(sorted(tables))}")
    entry = tables[benchmark_id]
    rows = [ClassMetrics(**r) for r in entry["rows"]]
    all_rows = [r for r in rows if r.class_name == "All"]
    per_class = tuple(r for r in rows if r.class_name != "All")
    return MetricsSummary(per_class, all_rows[0], None, entry["title"])
