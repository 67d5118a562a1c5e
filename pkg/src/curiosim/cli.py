"""Command-line entry point: ``curiosim {run,reproduce,list,report}``."""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from curiosim import __version__, figures, reporting
from curiosim.agent import VARIANTS, UnknownVariantError
from curiosim.experiment import (
    GEOMETRY_SCENARIOS,
    PRIMARY_MODIFICATIONS,
    AggregateResult,
    experiment_spec,
    run_experiment,
)
from curiosim.gridworld import SCENARIOS, JunctionTeleport, UnknownScenarioError, make_scenario

log = logging.getLogger("curiosim")

DEFAULTS = {"trials": 30, "steps": 5000, "seed": 0, "scenario": "primary", "variant": "original"}
CONFIG_KEYS = {"scenario": str, "variant": str, "trials": int, "steps": int, "seed": int,
               "out": str, "snapshot_every": int}

FIG13_ORDER = ["primary-ablate-directedness", "primary-ablate-cessation",
               "primary-ablate-voluntary", "primary-ablate-aversive",
               "primary-positive-quality", "primary-original"]

FIGURE_SETS = {
    "fig3": ["primary-original"],
    "fig4": ["primary-original"],
    "fig12": FIG13_ORDER,
    "fig13": FIG13_ORDER,
    "fig14": ["primary-ablate-directedness"],
    "geometry": [f"{s}-original" for s in GEOMETRY_SCENARIOS],
    "suite": [f"{s}-original" for s in GEOMETRY_SCENARIOS]
             + [f"primary-{v}" for v in PRIMARY_MODIFICATIONS],
}


class CliError(Exception):
    pass


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; keys mirror the long flags (dashes or underscores)."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[run]\n" + fh.read())
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    except configparser.Error as exc:
        raise CliError(f"malformed config file {path}: {exc}") from exc
    values = {}
    for key, raw in parser["run"].items():
        norm = key.replace("-", "_")
        if norm not in CONFIG_KEYS:
            raise CliError(f"unknown key {key!r} in config file {path}")
        try:
            values[norm] = CONFIG_KEYS[norm](raw)
        except ValueError:
            raise CliError(f"bad value {raw!r} for {key!r} in config file {path}") from None
    return values


def _resolve(args: argparse.Namespace, keys) -> dict:
    # flags > config file > defaults
    config = read_config(args.config) if getattr(args, "config", None) else {}
    merged = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
        elif key in config:
            merged[key] = config[key]
        else:
            merged[key] = DEFAULTS.get(key)
    return merged


def _prepare_out(path) -> Path:
    if not path:
        raise CliError("--out is required")
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(f"output directory {out} is not writable: {exc.strerror or exc}") from exc
    return out


def _suite_spec(name: str, trials: int, steps: int, seed: int, snapshot_every=None):
    scenario, variant = name.split("-", 1)
    spec = experiment_spec(scenario, variant, trials, steps, seed)
    if snapshot_every:
        spec = replace(spec, snapshot_every=snapshot_every)
    return spec


def _write_all(result: AggregateResult, out: Path, draw: bool, **meta) -> None:
    reporting.write_result(result, out)
    reporting.write_metadata(result, out / "metadata.json", **meta)
    if result.example_snapshots:
        frames = out / "frames"
        frames.mkdir(exist_ok=True)
        for t, v in result.example_snapshots:
            reporting.export_grid_csv(v, frames / f"trial0_v_t{t:05d}.csv")
    if draw:
        figures.render_run(out, result.mean_v, result.mean_visits, result.mean_curves,
                           result.std_curves, result.tracked_cells, label=result.name,
                           example_v=result.example_v, example_visits=result.example_visits)


def cmd_run(args) -> int:
    opts = _resolve(args, ["scenario", "variant", "trials", "steps", "seed", "out", "snapshot_every"])
    try:
        make_scenario(opts["scenario"])
    except UnknownScenarioError as exc:
        raise CliError(f"--scenario: {exc}") from None
    if opts["variant"] not in VARIANTS:
        raise CliError(f"--variant: unknown variant {opts['variant']!r}; "
                       f"expected one of {', '.join(VARIANTS)}")
    out = _prepare_out(opts["out"])
    spec = _suite_spec(f"{opts['scenario']}-{opts['variant']}", opts["trials"], opts["steps"],
                       opts["seed"], opts["snapshot_every"])
    log.info("running %s-%s: %d trials x %d steps, seed %d", spec.scenario, spec.variant,
             spec.trials, spec.steps, spec.base_seed)
    result = run_experiment(spec)
    _write_all(result, out, not args.no_figures, command="run")
    text, _ = reporting.summary_table({result.name: result})
    print(text, end="")
    print(f"outputs written to {out}")
    return 0


def cmd_reproduce(args) -> int:
    opts = _resolve(args, ["trials", "steps", "seed", "out"])
    out = _prepare_out(opts["out"])
    names = FIGURE_SETS[args.figure]
    results = {}
    for name in names:
        spec = _suite_spec(name, opts["trials"], opts["steps"], opts["seed"])
        log.info("running %s", name)
        result = run_experiment(spec, name=name)
        _write_all(result, out / name, not args.no_figures, command=f"reproduce {args.figure}")
        results[name] = result

    text, table = reporting.summary_table(results)
    (out / "summary.txt").write_text(text, encoding="utf-8")
    (out / "summary.csv").write_text(table, encoding="utf-8")

    if args.figure in ("fig13", "suite") and not args.no_figures:
        rows = reporting.summary_rows(results)
        figures.plot_target_visit_bars(
            [r["name"] for r in rows], [r["target_visits_mean"] for r in rows],
            [r["target_visits_std"] for r in rows], out / "target_visits.png",
            firsts=[r["first_visits_mean"] for r in rows],
            title="visits to generated targets")
    if args.figure == "fig14":
        per_trial = results["primary-ablate-directedness"].per_trial_target_visits
        counts = np.bincount(per_trial)
        hist = "target_visits,trials\n" + "".join(f"{k},{n}\n" for k, n in enumerate(counts))
        (out / "histogram.csv").write_text(hist, encoding="utf-8")
        if not args.no_figures:
            figures.plot_target_visit_histogram(per_trial, out / "histogram.png",
                                                "directedness ablation: target visits per trial")
    print(text, end="")
    print(f"outputs written to {out}")
    return 0


def cmd_list(args) -> int:
    print("scenarios:")
    for name in SCENARIOS:
        d = make_scenario(name)
        if isinstance(d.top_edge, JunctionTeleport):
            edge = f"junction {tuple(d.top_edge.junction)}"
        else:
            edge = "cylinder"
        print(f"  {name:<18} {d.rows}x{d.cols}, {edge}, inducing {tuple(d.inducing_pos)}, "
              f"targets ({d.target_row},{d.target_col_min})-({d.target_row},{d.target_col_max})")
    print("variants:")
    for v in VARIANTS:
        print(f"  {v}")
    print("reproducible figures:")
    for fig, names in FIGURE_SETS.items():
        print(f"  {fig:<9} {', '.join(names)}")
    return 0


def _read_curves(path: Path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    cells = []
    for r, c in data[:, 1:3].astype(int):
        if not cells or cells[-1] != (r, c):
            cells.append((r, c))
    steps = len(data) // len(cells)
    mean = data[:, 3].reshape(len(cells), steps).T
    std = data[:, 4].reshape(len(cells), steps).T
    return cells, mean, std


def cmd_report(args) -> int:
    src = Path(args.in_dir)
    needed = ["v_final.csv", "visits.csv", "curves.csv"]
    missing = [n for n in needed if not (src / n).is_file()]
    if missing:
        raise CliError(f"--in {src}: missing {', '.join(missing)}")
    out = _prepare_out(args.out)
    mean_v = reporting.read_grid_csv(src / "v_final.csv")
    mean_visits = reporting.read_grid_csv(src / "visits.csv")
    cells, mean_c, std_c = _read_curves(src / "curves.csv")
    linear = reporting.HeatmapOptions()
    logscale = reporting.HeatmapOptions(scale=reporting.Scale.LOG10)
    reporting.export_heatmap_pgm(mean_v, linear, out / "v_final.pgm")
    reporting.export_heatmap_pgm(mean_visits, linear, out / "visits.pgm")
    reporting.export_heatmap_pgm(mean_v, logscale, out / "v_final_log.pgm")
    reporting.export_heatmap_pgm(mean_visits, logscale, out / "visits_log.pgm")
    example_v = example_visits = None
    if (src / "trial0_v_final.csv").is_file():
        example_v = reporting.read_grid_csv(src / "trial0_v_final.csv")
    if (src / "trial0_visits.csv").is_file():
        example_visits = reporting.read_grid_csv(src / "trial0_visits.csv")
    figures.render_run(out, mean_v, mean_visits, mean_c, std_c, cells, label=src.name,
                       example_v=example_v, example_visits=example_visits)
    print(f"figures written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curiosim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_scenario: bool):
        if with_scenario:
            p.add_argument("--scenario", help=f"one of {', '.join(SCENARIOS)} (default primary)")
            p.add_argument("--variant", help=f"one of {', '.join(VARIANTS)} (default original)")
        p.add_argument("--trials", type=int, help="trials per experiment (default 30)")
        p.add_argument("--steps", type=int, help="timesteps per trial (default 5000)")
        p.add_argument("--seed", type=int, help="base seed (default 0)")
        p.add_argument("--out", help="output directory (required)")
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    run = sub.add_parser("run", help="run one scenario/variant experiment")
    common(run, True)
    run.add_argument("--snapshot-every", type=int, dest="snapshot_every",
                     help="also dump trial 0's value function every N steps")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("reproduce", help="run the experiments behind one figure")
    rep.add_argument("figure", choices=sorted(FIGURE_SETS))
    common(rep, False)
    rep.set_defaults(func=cmd_reproduce)

    lst = sub.add_parser("list", help="list scenarios, variants and figures")
    lst.set_defaults(func=cmd_list)

    report = sub.add_parser("report", help="redraw figures and heatmaps from a run directory")
    report.add_argument("--in", dest="in_dir", required=True)
    report.add_argument("--out", required=True)
    report.set_defaults(func=cmd_report)
    return parser


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        for key in ("trials", "steps"):
            if getattr(args, key, None) is not None and getattr(args, key) <= 0:
                raise CliError(f"--{key} must be positive, got {getattr(args, key)}")
        return args.func(args)
    except (CliError, UnknownScenarioError, UnknownVariantError, reporting.ReportError,
            ValueError) as exc:
        print(f"curiosim: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())
