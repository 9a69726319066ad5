"""Command-line entry point.

Exit codes: 0 success, 1 partial or runtime failure, 2 usage error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from .. import annotio, evalmetrics, features, maskgeom
from ..errors import AquamassError
from . import config as cfgmod
from .estimate import run_estimate
from .report import render_report
from .telemetry import push_telemetry


def _common():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="pipeline config (TOML)")
    parent.add_argument("--seed", type=int, help="64-bit seed, overrides the config")
    parent.add_argument("--out", type=Path, help="output directory, overrides the config")
    parent.add_argument("-v", "--verbose", action="store_true")
    return parent


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="aquamass", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    sub.add_parser("estimate", parents=[common], help="estimate debris area and mass per frame")

    p = sub.add_parser("evaluate", parents=[common], help="detection metrics for predictions vs ground truth")
    p.add_argument("--predictions", type=Path)
    p.add_argument("--ground-truth", type=Path)
    p.add_argument("--iou-kind", choices=("box", "mask"))
    p.add_argument("--operating-point", help="f1max or fixed:<score>")

    p = sub.add_parser("mc-area", parents=[common], help="Monte Carlo area of a shape or mask")
    p.add_argument("--shape", help="circle:R | rect:W,H | polygon:x0,y0,x1,y1,...")
    p.add_argument("--mask", type=Path, help="binary PGM mask instead of a shape")
    p.add_argument("--samples", type=int, default=maskgeom.DEFAULT_SAMPLES)

    p = sub.add_parser("pca", parents=[common], help="principal components of a CSV feature matrix")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--standardize", action="store_true", default=None)

    p = sub.add_parser("report", parents=[common], help="render the static report site")
    p.add_argument("--records", type=Path)
    p.add_argument("--metrics", type=Path, action="append", default=[])
    p.add_argument("--benchmark", action="append", default=[],
                   help=f"published table to include: {', '.join(evalmetrics.benchmark_ids())}")

    p = sub.add_parser("push", parents=[common], help="send frame records to the telemetry endpoint")
    p.add_argument("--records", type=Path, required=True)
    p.add_argument("--endpoint", help="URL (http mode) or sink path (file mode)")
    p.add_argument("--mode", choices=("http", "file"))
    p.add_argument("--device-id")
    return parser


def _load_config(args, required=False):
    if args.config is None:
        if required:
            raise AquamassError("--config is required for this command")
        return None
    return cfgmod.load_config(args.config).with_overrides(seed=args.seed, out_dir=args.out)


def cmd_estimate(args):
    cfg = _load_config(args, required=True)
    result = run_estimate(cfg)
    s = result.summary
    print(f"frames ok {s['frames_ok']}/{s['frames_total']}  total area {s['total_area_m2']:.6g} m2  "
          f"total mass {s['total_mass_g']:.6g} g  feasibility {s['feasibility']['verdict']}")
    print(f"records written to {Path(cfg.out_dir) / 'records.jsonl'}")
    for err in result.errors:
        print(f"frame {err['frame_id']} failed: {err['error']}", file=sys.stderr)
    return 1 if result.partial else 0


def cmd_evaluate(args):
    cfg = _load_config(args)
    preds = args.predictions or (cfg and cfg.predictions)
    gts = args.ground_truth or (cfg and cfg.ground_truth)
    if not preds or not gts:
        raise AquamassError("evaluate needs --predictions and --ground-truth (or [metrics] in the config)")
    match = evalmetrics.MatchConfig(
        iou_kind=args.iou_kind or (cfg.iou_kind if cfg else "box"),
        operating_point=args.operating_point or (cfg.operating_point if cfg else "f1max"),
    )
    summary = evalmetrics.summarize(preds, gts, match)
    print(summary.table(), end="")
    print(f"F1 {evalmetrics.fmt(summary.all_row.f1)}  mIoU {evalmetrics.fmt(summary.miou)}")
    out = args.out or (cfg.out_dir if cfg else None)
    if out:
        out.mkdir(parents=True, exist_ok=True)
        evalmetrics.write_metrics(summary, out / "metrics.json")
        (out / "metrics.txt").write_text(summary.table(), encoding="utf-8")
    return 0


def _parse_shape(spec):
    kind, _, rest = spec.partition(":")
    try:
        nums = [float(v) for v in rest.split(",")] if rest else []
    except ValueError:
        raise AquamassError(f"bad shape {spec!r}") from None
    if kind == "circle" and len(nums) == 1 and nums[0] > 0:
        r = nums[0]
        return maskgeom.DiskMembership(r), (-r, -r, r, r), maskgeom.analytic_area("circle", r)
    if kind == "rect" and len(nums) == 2:
        w, h = nums
        exact = maskgeom.analytic_area("rectangle", w, h)
        return (lambda xs, ys: (xs >= 0) & (ys >= 0)), (0.0, 0.0, w, h), exact
    if kind == "polygon" and len(nums) >= 6 and len(nums) % 2 == 0:
        verts = list(zip(nums[0::2], nums[1::2]))
        xs, ys = nums[0::2], nums[1::2]
        return maskgeom.PolygonMembership(verts), (min(xs), min(ys), max(xs), max(ys)), None
    raise AquamassError(f"bad shape {spec!r}; use circle:R, rect:W,H or polygon:x0,y0,...")


def cmd_mc_area(args):
    if (args.shape is None) == (args.mask is None):
        raise AquamassError("give exactly one of --shape or --mask")
    seed = args.seed if args.seed is not None else 0
    cfgmod.check_seed(seed)
    if args.shape:
        inside, rect, exact = _parse_shape(args.shape)
    else:
        mask = maskgeom.BitMask(annotio.read_mask_raster(args.mask).to_array())
        inside, rect = maskgeom.MaskMembership(mask), (0, 0, mask.width, mask.height)
        exact = maskgeom.pixel_count(mask)
    est = maskgeom.mc_area(inside, rect, args.samples, seed, vectorized=True)
    out = {"area": est.area, "std_error": est.std_error, "hits": est.hits,
           "samples": est.samples, "seed": est.seed, "rect": list(rect)}
    if exact is not None:
        out["exact"] = exact
    print(json.dumps(out))
    return 0


def cmd_pca(args):
    cfg = _load_config(args)
    data = features.read_matrix_csv(args.input)
    k = args.k or (cfg.pca_k if cfg and cfg.pca_k else None)
    standardize = args.standardize if args.standardize is not None else bool(cfg and cfg.pca_standardize)
    result = features.pca(data, k, standardize=standardize)
    print("component  eigenvalue  explained")
    for i, (ev, r) in enumerate(zip(result.eigenvalues, result.explained_ratio), start=1):
        print(f"PC{i:<8} {ev:<11.6g} {r:.4f}")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        features.write_matrix_csv(features.project(data, result), args.out / "projection.csv")
        doc = {"features": list(data.col_names), "mean": result.mean.tolist(),
               "scale": result.scale.tolist(), "eigenvalues": result.eigenvalues.tolist(),
               "explained_ratio": result.explained_ratio.tolist(),
               "components": result.components.T.tolist()}
        with open(args.out / "pca.json", "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_report(args):
    cfg = _load_config(args)
    records_path = args.records or (cfg and Path(cfg.out_dir) / "records.jsonl")
    records = annotio.read_frame_records(records_path) if records_path else []
    metrics = [evalmetrics.read_metrics(p) for p in args.metrics]
    try:
        metrics += [evalmetrics.load_benchmark(b) for b in args.benchmark]
    except KeyError as exc:
        raise AquamassError(exc.args[0]) from None
    if not records and not metrics:
        raise AquamassError("nothing to report: give --records, --metrics or --benchmark")
    out = args.out or (cfg.out_dir if cfg else Path("report"))
    html_path, _ = render_report(records, metrics, out)
    print(f"report written to {html_path}")
    return 0


def cmd_push(args):
    cfg = _load_config(args)
    mode = args.mode or (cfg.telemetry_mode if cfg else "http")
    if mode == "http":
        endpoint = cfgmod.resolve_endpoint(args.endpoint or (cfg.endpoint if cfg else None))
    else:
        endpoint = args.endpoint or (cfg.telemetry_sink if cfg else None)
    device = args.device_id or (cfg.device_id if cfg else "auv-01")
    records = annotio.read_frame_records(args.records)
    report = push_telemetry(records, endpoint, mode, device_id=device)
    doc = report.to_dict()
    print(f"delivered {doc['delivered']}/{len(report.entries)} envelopes to {endpoint}")
    for e in report.failed:
        print(f"envelope {e.sequence_number} ({e.frame_id}) failed after {e.attempts} attempts: {e.detail}",
              file=sys.stderr)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        with open(args.out / "delivery.json", "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return 0 if report.ok else 1


COMMANDS = {
    "estimate": cmd_estimate,
    "evaluate": cmd_evaluate,
    "mc-area": cmd_mc_area,
    "pca": cmd_pca,
    "report": cmd_report,
    "push": cmd_push,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (AquamassError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
