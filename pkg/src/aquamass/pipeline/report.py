"""Static monitoring site: ``index.html`` (self-contained) plus ``report.json``."""
import json
import math
from html import escape
from pathlib import Path

from ..evalmetrics import MetricsSummary, TABLE_COLUMNS, fmt, table_rows

SCHEMA_ID = "aquamass.report/1"

_CSS = """
body { font-family: system-ui, sans-serif; margin: 0; background: #f4f7fb; color: #10233a; }
main { max-width: 1080px; margin: 1.5rem auto; padding: 0 1rem; }
section { background: #fff; border: 1px solid #d7e0ec; border-radius: 10px; padding: 0.8rem 1.1rem; margin-bottom: 1rem; }
h1 { font-size: 1.5rem; } h2 { font-size: 1.1rem; margin: 0.2rem 0 0.6rem; }
table { border-collapse: collapse; width: 100%; font-size: 0.9rem; }
th, td { border-bottom: 1px solid #e3e9f2; padding: 0.3rem 0.5rem; text-align: left; }
td.num, th.num { text-align: right; font-variant-numeric: tabular-nums; }
.cards { display: flex; flex-wrap: wrap; gap: 0.7rem; }
.card { border: 1px solid #d7e0ec; border-radius: 8px; padding: 0.5rem 0.8rem; min-width: 150px; }
.card .label { font-size: 0.75rem; color: #55657a; text-transform: uppercase; }
.card .value { font-size: 1.25rem; font-weight: 600; }
.bad { color: #b42318; } .ok { color: #17803d; }
"""


def _num(value, digits=6):
    if value is None:
        return "-"
    if isinstance(value, int):
        return str(value)
    return f"{value:.{digits}g}"


def _table(headers, rows, numeric=()):
    head = "".join(
        f'<th class="num">{escape(h)}</th>' if i in numeric else f"<th>{escape(h)}</th>"
        for i, h in enumerate(headers))
    body = []
    for row in rows:
        cells = "".join(
            f'<td class="num">{escape(str(c))}</td>' if i in numeric else f"<td>{escape(str(c))}</td>"
            for i, c in enumerate(row))
        body.append(f"<tr>{cells}</tr>")
    return f"<table><thead><tr>{head}</tr></thead><tbody>{''.join(body)}</tbody></table>"


def bar_chart_svg(labels, values, unit="g", width=640, bar_height=22):
    """Horizontal bar chart as inline SVG markup."""
    if not labels:
        return ""
    label_w, pad = 170, 8
    height = len(labels) * (bar_height + pad) + pad
    top = max(values) or 1.0
    span = width - label_w - 110
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" role="img" aria-label="mass by class">']
    for i, (label, value) in enumerate(zip(labels, values)):
        y = pad + i * (bar_height + pad)
        w = max(1.0, span * value / top) if value > 0 else 0.0
        parts.append(f'<text x="{label_w - 6}" y="{y + bar_height * 0.7:.1f}" text-anchor="end" '
                     f'font-size="12">{escape(label)}</text>')
        parts.append(f'<rect x="{label_w}" y="{y}" width="{w:.2f}" height="{bar_height}" fill="#2f6fb0"/>')
        parts.append(f'<text x="{label_w + w + 6:.2f}" y="{y + bar_height * 0.7:.1f}" font-size="12">'
                     f'{escape(_num(value, 5))} {escape(unit)}</text>')
    parts.append("</svg>")
    return "".join(parts)


def _mass_by_class(records):
    by_class = {}
    for rec in records:
        for inst in rec.instances:
            entry = by_class.setdefault(inst.class_name, [0, [], []])
            entry[0] += 1
            entry[1].append(inst.mass_g)
            entry[2].append(inst.area_m2)
    return [{"class_name": name, "count": e[0], "total_mass_g": math.fsum(e[1]),
             "total_area_m2": math.fsum(e[2])} for name, e in sorted(by_class.items())]


def _metrics_section(summary):
    title = summary.title or "Detection metrics"
    html = [f"<section><h2>{escape(title)}</h2>",
            _table(TABLE_COLUMNS, table_rows(summary), numeric=range(1, 7))]
    extra = [f"F1 (All): {fmt(summary.all_row.f1)}"]
    if summary.miou is not None:
        extra.append(f"mIoU: {fmt(summary.miou)}")
    html.append(f"<p>{escape(' · '.join(extra))}</p></section>")
    return "".join(html)


def build_report(records, metrics=(), summary=None):
    """The report.json document."""
    records = list(records)
    summary = summary or {}
    totals = {
        "frames": len(records),
        "instances": sum(len(r.instances) for r in records),
        "total_area_m2": math.fsum(r.total_area_m2 for r in records),
        "total_mass_g": math.fsum(r.total_mass_g for r in records),
    }
    doc = {
        "schema": SCHEMA_ID,
        "totals": totals,
        "mass_by_class": _mass_by_class(records),
        "frames": [r.to_dict() for r in records],
        "metrics": [m.to_dict() for m in metrics],
        "errors": list(summary.get("errors", [])),
    }
    if "feasibility" in summary:
        fz = summary["feasibility"]
        doc["feasibility"] = {"verdict": fz["verdict"], "min_margin_n": fz["min_margin_n"]}
    return doc


def render_html(doc):
    totals = doc["totals"]
    cards = [("Frames", totals["frames"]), ("Instances", totals["instances"]),
             ("Total area (m²)", _num(totals["total_area_m2"])),
             ("Total mass (g)", _num(totals["total_mass_g"]))]
    fz = doc.get("feasibility")
    out = ["<!doctype html>", '<html lang="en"><head><meta charset="utf-8">',
           "<title>Debris mass estimation report</title>", f"<style>{_CSS}</style></head>",
           "<body><main><section><h1>Debris mass estimation report</h1><div class=\"cards\">"]
    for label, value in cards:
        out.append(f'<div class="card"><div class="label">{escape(label)}</div>'
                   f'<div class="value">{escape(str(value))}</div></div>')
    if fz:
        cls = "ok" if fz["verdict"] == "feasible" else "bad"
        out.append(f'<div class="card"><div class="label">Tow feasibility</div>'
                   f'<div class="value {cls}">{escape(fz["verdict"])}</div></div>')
    out.append("</div></section>")

    classes = doc["mass_by_class"]
    if classes:
        out.append("<section><h2>Mass by class</h2>")
        out.append(bar_chart_svg([c["class_name"] for c in classes], [c["total_mass_g"] for c in classes]))
        out.append(_table(("Class", "Instances", "Area (m²)", "Mass (g)"),
                          [(c["class_name"], c["count"], _num(c["total_area_m2"]), _num(c["total_mass_g"]))
                           for c in classes], numeric=(1, 2, 3)))
        out.append("</section>")

    if doc["frames"]:
        out.append("<section><h2>Frames</h2>")
        out.append(_table(("Frame", "Timestamp (UTC)", "Instances", "Area (m²)", "Mass (g)"),
                          [(f["frame_id"], f["timestamp_utc"], len(f["instances"]),
                            _num(f["total_area_m2"]), _num(f["total_mass_g"])) for f in doc["frames"]],
                          numeric=(2, 3, 4)))
        out.append("</section>")

    for m in doc["metrics"]:
        out.append(_metrics_section(MetricsSummary.from_dict(m)))

    if doc["errors"]:
        out.append('<section><h2 class="bad">Failed frames (excluded from totals)</h2>')
        out.append(_table(("Frame", "Error"), [(e.get("frame_id") or "?", e["error"]) for e in doc["errors"]]))
        out.append("</section>")
    out.append("</main></body></html>\n")
    return "\n".join(out)


def render_report(records, metrics, out_dir, summary=None):
    """Write ``index.html`` and ``report.json`` into ``out_dir``; returns both paths."""
    if metrics is None:
        metrics = []
    elif isinstance(metrics, MetricsSummary):
        metrics = [metrics]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = build_report(records, metrics, summary)
    html_path, json_path = out_dir / "index.html", out_dir / "report.json"
    html_path.write_text(render_html(doc), encoding="utf-8")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    return html_path, json_path
