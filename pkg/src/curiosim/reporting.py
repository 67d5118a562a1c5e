"""Text outputs: grid CSVs, 16-bit ASCII PGM heatmaps, learning curves, summary tables."""

from __future__ import annotations

import csv
import enum
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from curiosim.experiment import STD_CONVENTION, VISIT_CONVENTION, AggregateResult

PathLike = Union[str, os.PathLike]

PGM_MAXVAL = 65535
PGM_MIDGRAY = 32768

CESSATION_NOTE = (
    "Under the cessation ablation the inducing cell's value after the t=0 update is "
    "alpha*(1-gamma_curious^4)/(1-gamma_curious) = 0.034390 with default parameters; "
    "a printed value of 0.315 for this quantity is not reproducible from those parameters."
)


class ReportError(OSError):
    pass


class Scale(enum.Enum):
    LINEAR = "linear"
    LOG10 = "log10"


@dataclass(frozen=True)
class HeatmapOptions:
    scale: Scale = Scale.LINEAR
    floor: float = 1e-6
    invert: bool = False  # False: dark = low

    def __post_init__(self):
        if self.floor <= 0:
            raise ValueError("log floor must be strictly positive")

    def transform(self, grid: np.ndarray) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        if self.scale is Scale.LOG10:
            return np.log10(np.maximum(grid, self.floor))
        return grid


def _check_path(path: PathLike) -> Path:
    if path is None or str(path) == "":
        raise ReportError("output path must not be empty")
    return Path(path)


def _write_text(path: PathLike, text: str) -> None:
    p = _check_path(path)
    try:
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {p}: {exc.strerror or exc}") from exc


def format_number(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9f}"


def grid_to_csv(grid) -> str:
    a = np.asarray(grid)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D grid, got shape {a.shape}")
    integral = np.issubdtype(a.dtype, np.integer)
    lines = []
    for row in a:
        lines.append(",".join(str(int(v)) if integral else f"{float(v):.9f}" for v in row))
    return "\n".join(lines) + "\n"


def export_grid_csv(grid, path: PathLike) -> None:
    """One grid row per line, row 0 first; floats with nine decimals."""
    _write_text(path, grid_to_csv(grid))


def read_grid_csv(path: PathLike) -> np.ndarray:
    return np.loadtxt(_check_path(path), delimiter=",", ndmin=2)


def heatmap_pixels(grid, options: HeatmapOptions = HeatmapOptions()) -> np.ndarray:
    vals = options.transform(grid)
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        return np.full(vals.shape, PGM_MIDGRAY, dtype=np.int64)
    pix = np.rint((vals - lo) / (hi - lo) * PGM_MAXVAL).astype(np.int64)
    if options.invert:
        pix = PGM_MAXVAL - pix
    return pix


def export_heatmap_pgm(grid, options: HeatmapOptions, path: PathLike) -> None:
    pix = heatmap_pixels(grid, options)
    rows, cols = pix.shape
    body = "\n".join(" ".join(str(v) for v in row) for row in pix)
    _write_text(path, f"P2\n{cols} {rows}\n{PGM_MAXVAL}\n{body}\n")


def read_pgm(path: PathLike) -> np.ndarray:
    """Parse an ASCII (P2) PGM, honouring ``#`` comments."""
    tokens = []
    with open(_check_path(path), encoding="ascii") as fh:
        for line in fh:
            tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise ValueError(f"{path} is not an ASCII PGM")
    width, height, maxval = (int(t) for t in tokens[1:4])
    data = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    if data.size != width * height or data.min(initial=0) < 0 or data.max(initial=0) > maxval:
        raise ValueError(f"{path}: pixel data does not match header")
    return data.reshape(height, width)


def curves_to_csv(result: AggregateResult) -> str:
    """Long form: ``t, cell_row, cell_col, mean, std``."""
    out = io.StringIO()
    out.write("t,cell_row,cell_col,mean,std\n")
    steps = result.mean_curves.shape[0]
    for k, (r, c) in enumerate(result.tracked_cells):
        m = result.mean_curves[:, k]
        s = result.std_curves[:, k]
        for t in range(steps):
            out.write(f"{t},{r},{c},{m[t]:.9f},{s[t]:.9f}\n")
    return out.getvalue()


def export_curves_csv(result: AggregateResult, path: PathLike) -> None:
    _write_text(path, curves_to_csv(result))


def per_trial_csv(result: AggregateResult) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trial", "target_visits", "first_visits", "subsequent_visits",
                "inducing_visits", "inducing_value", "v_argmax_row", "v_argmax_col"])
    for i in range(result.trials):
        am = result.per_trial_v_argmax[i]
        w.writerow([i, result.per_trial_target_visits[i], result.per_trial_first_visits[i],
                    result.per_trial_subsequent_visits[i], result.per_trial_inducing_visits[i],
                    format_number(result.per_trial_inducing_value[i]), am[0], am[1]])
    return out.getvalue()


SUMMARY_COLUMNS = ["name", "scenario", "variant", "trials", "steps",
                   "target_visits_mean", "target_visits_std",
                   "first_visits_mean", "first_visits_std",
                   "subsequent_visits_mean", "subsequent_visits_std"]


def summary_rows(results: Mapping[str, AggregateResult]) -> list[dict]:
    if not results:
        raise ValueError("summary table needs at least one result")
    rows = []
    for name, r in results.items():
        rows.append({
            "name": name,
            "scenario": r.spec.scenario,
            "variant": r.spec.variant,
            "trials": r.trials,
            "steps": r.steps,
            "target_visits_mean": r.target_visit_mean,
            "target_visits_std": r.target_visit_std,
            "first_visits_mean": r.first_visit_mean,
            "first_visits_std": r.first_visit_std,
            "subsequent_visits_mean": r.subsequent_visit_mean,
            "subsequent_visits_std": r.subsequent_visit_std,
        })
    return rows


def summary_table(results: Mapping[str, AggregateResult]) -> tuple[str, str]:
    """Per-variant target-visit statistics as (aligned text, CSV)."""
    rows = summary_rows(results)

    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in rows:
        w.writerow([format_number(row[c]) if isinstance(row[c], float) else row[c]
                    for c in SUMMARY_COLUMNS])

    width = max(len(r["name"]) for r in rows)
    lines = [f"{'experiment':<{width}}  {'target visits':>17}  {'first':>15}  {'subsequent':>17}",
             "-" * (width + 57)]
    for r in rows:
        lines.append(
            f"{r['name']:<{width}}  "
            f"{r['target_visits_mean']:>8.1f} ± {r['target_visits_std']:<6.1f}  "
            f"{r['first_visits_mean']:>7.1f} ± {r['first_visits_std']:<5.1f}  "
            f"{r['subsequent_visits_mean']:>8.1f} ± {r['subsequent_visits_std']:<6.1f}")
    first = rows[0]
    lines.append("")
    lines.append(f"{first['trials']} trials x {first['steps']} steps; std: {STD_CONVENTION}")
    return "\n".join(lines) + "\n", out.getvalue()


def metadata(result: AggregateResult, **extra) -> dict:
    from curiosim import __version__

    meta = {
        "code_version": __version__,
        "experiment": result.spec.to_dict(),
        "name": result.name,
        "std_convention": STD_CONVENTION,
        "visit_count_convention": VISIT_CONVENTION,
        "curve_convention": "curves[t] is the value after the update at timestep t",
        "tracked_cells": [list(map(int, p)) for p in result.tracked_cells],
        "notes": [CESSATION_NOTE],
    }
    meta.update(extra)
    return meta


def write_metadata(result: AggregateResult, path: PathLike, **extra) -> None:
    _write_text(path, json.dumps(metadata(result, **extra), indent=2, sort_keys=True) + "\n")


def write_result(result: AggregateResult, out_dir: PathLike) -> Path:
    """Write every text artifact of one experiment into ``out_dir``."""
    out = _check_path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc

    export_grid_csv(result.mean_visits, out / "visits.csv")
    export_grid_csv(result.std_visits, out / "visits_std.csv")
    export_grid_csv(result.mean_v, out / "v_final.csv")
    export_grid_csv(result.std_v, out / "v_final_std.csv")
    export_grid_csv(result.example_visits, out / "trial0_visits.csv")
    export_grid_csv(result.example_v, out / "trial0_v_final.csv")
    export_curves_csv(result, out / "curves.csv")
    _write_text(out / "per_trial.csv", per_trial_csv(result))

    linear = HeatmapOptions()
    log = HeatmapOptions(scale=Scale.LOG10)
    export_heatmap_pgm(result.mean_visits, linear, out / "visits.pgm")
    export_heatmap_pgm(result.mean_v, linear, out / "v_final.pgm")
    export_heatmap_pgm(result.mean_visits, log, out / "visits_log.pgm")
    export_heatmap_pgm(result.mean_v, log, out / "v_final_log.pgm")

    text, table = summary_table({result.name: result})
    _write_text(out / "summary.txt", text)
    _write_text(out / "summary.csv", table)
    write_metadata(result, out / "metadata.json")
    return out
