"""CSV and Markdown tables for grid results and representation records.

Every file is a pure function of its inputs: no timestamps, no host names,
fixed float formatting. Wall times of grid cells go to their own file so that
``grid.csv`` stays byte-identical between reruns.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .grid import GridCellResult, average_by
from .measure import BenchRecord

GRID_HEADER = ["id", "seed", "lr", "L", "loss", "psnr_db", "diverged"]
AVERAGE_HEADER = ["lr", "L", "loss", "psnr_db", "psnr_of_mean_loss_db", "count", "diverged"]
TIMING_HEADER = ["id", "wall_time_s"]
SIZE_HEADER = ["representation", "file", "bytes", "size_mb"]
TIME_HEADER = ["representation", "build_time_s", "steps", "psnr_db", "ssim", "error"]

RESULTS_JSON = "grid_results.json"
RECORDS_JSON = "bench_records.json"


def fmt(x, places: int = 4) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{places}f}"
    return "0." + "0" * places if s == "-0." + "0" * places else s


def fmt_lr(lr: float) -> str:
    return f"{lr:g}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def grid_rows(results) -> list:
    return [[r.id, r.seed, fmt_lr(r.lr), r.n_freqs, fmt(r.loss), fmt(r.psnr_db), int(r.diverged)]
            for r in results]


def average_rows(results) -> list:
    if not results:
        return []
    return [[fmt_lr(a["lr"]), a["n_freqs"], fmt(a["loss"]), fmt(a["psnr_db"]),
             fmt(a["psnr_of_mean_loss_db"]), a["count"], a["diverged"]] for a in average_by(results)]


def size_rows(records) -> list:
    rows = []
    for r in records:
        if not r.files:
            rows.append([r.name, "", "", fmt(r.size_mb)])
        for name, n in sorted(r.files.items()):
            rows.append([r.name, name, n, fmt(n / 1e6)])
    return rows


def time_rows(records) -> list:
    rows = []
    for r in records:
        steps = ";".join(f"{k}={fmt(v, 3)}" for k, v in r.steps.items())
        q = r.quality
        rows.append([r.name, fmt(r.build_time_s, 3), steps, fmt(q.psnr_db) if q else "",
                     fmt(q.ssim) if q else "", r.error or ""])
    return rows


def _md_table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines)


def summary_markdown(results, records) -> str:
    parts = ["# Benchmark summary", ""]
    parts += ["## Grid search", "", _md_table(GRID_HEADER, grid_rows(results)), ""]
    parts += ["## Averages over seeds", "", _md_table(AVERAGE_HEADER, average_rows(results)), ""]
    parts += ["## Serialized size", "", _md_table(SIZE_HEADER, size_rows(records)), ""]
    parts += ["## Build time", "", _md_table(TIME_HEADER, time_rows(records)), ""]
    return "\n".join(parts)


def emit_report(results, records, out) -> dict:
    """Write the report files into directory ``out``; returns name -> path."""
    results, records = list(results), list(records)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "grid.csv": _csv_text(GRID_HEADER, grid_rows(results)),
        "grid_average.csv": _csv_text(AVERAGE_HEADER, average_rows(results)),
        "grid_timing.csv": _csv_text(TIMING_HEADER, [[r.id, fmt(r.wall_time_s, 3)] for r in results]),
        "sizes.csv": _csv_text(SIZE_HEADER, size_rows(records)),
        "times.csv": _csv_text(TIME_HEADER, time_rows(records)),
        "summary.md": summary_markdown(results, records),
    }
    written = {}
    for name, text in files.items():
        path = out / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written[name] = path
    return written


def _dump(objs, path) -> None:
    Path(path).write_text(json.dumps([o.to_dict() for o in objs], indent=1, allow_nan=True) + "\n",
                          encoding="utf-8")


def save_results(results, path) -> None:
    _dump(results, path)


def save_records(records, path) -> None:
    _dump(records, path)


def load_results(path) -> list:
    return [GridCellResult.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]


def load_records(path) -> list:
    return [BenchRecord.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]
