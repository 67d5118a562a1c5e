import json

import numpy as np
import pytest

from curiosim.experiment import experiment_spec, run_experiment
from curiosim.reporting import (
    PGM_MAXVAL,
    PGM_MIDGRAY,
    HeatmapOptions,
    ReportError,
    Scale,
    curves_to_csv,
    export_grid_csv,
    export_heatmap_pgm,
    grid_to_csv,
    heatmap_pixels,
    read_grid_csv,
    read_pgm,
    summary_rows,
    summary_table,
    write_result,
)

LOG = HeatmapOptions(scale=Scale.LOG10, floor=1e-6)


@pytest.fixture(scope="module")
def result():
    return run_experiment(experiment_spec("primary", trials=3, steps=300))


def test_integer_grid_csv():
    assert grid_to_csv(np.array([[0, 1], [2, 3]])) == "0,1\n2,3\n"


def test_float_grid_csv():
    assert grid_to_csv(np.array([[0.03439]])) == "0.034390000\n"


def test_empty_path_rejected():
    with pytest.raises(ReportError):
        export_grid_csv(np.zeros((2, 2)), "")


def test_csv_round_trip(tmp_path):
    grid = np.random.default_rng(0).normal(size=(11, 11))
    export_grid_csv(grid, tmp_path / "g.csv")
    np.testing.assert_allclose(read_grid_csv(tmp_path / "g.csv"), grid, atol=1e-9)


def test_unwritable_path(tmp_path):
    with pytest.raises(ReportError):
        export_grid_csv(np.zeros((2, 2)), tmp_path / "missing" / "g.csv")


def test_constant_grid_is_mid_gray():
    assert (heatmap_pixels(np.zeros((3, 4))) == PGM_MIDGRAY).all()


def test_linear_extremes():
    pix = heatmap_pixels(np.array([[0.0, 10.0], [5.0, 0.0]]))
    assert pix[0, 0] == 0 and pix[0, 1] == PGM_MAXVAL and pix[1, 0] == 32768


def test_log_extremes():
    pix = heatmap_pixels(np.array([[1e-9, 1.0]]), LOG)
    assert pix.tolist() == [[0, PGM_MAXVAL]]


def test_log_floor_clamps_non_positive():
    assert (heatmap_pixels(np.array([[0.0, -3.0]]), LOG) == PGM_MIDGRAY).all()


def test_invert():
    pix = heatmap_pixels(np.array([[0.0, 1.0]]), HeatmapOptions(invert=True))
    assert pix.tolist() == [[PGM_MAXVAL, 0]]


def test_floor_must_be_positive():
    with pytest.raises(ValueError):
        HeatmapOptions(floor=0.0)


def test_pgm_header_and_round_trip(tmp_path):
    grid = np.arange(12, dtype=float).reshape(3, 4)
    export_heatmap_pgm(grid, HeatmapOptions(), tmp_path / "h.pgm")
    lines = (tmp_path / "h.pgm").read_text().splitlines()
    assert lines[:3] == ["P2", "4 3", "65535"]
    np.testing.assert_array_equal(read_pgm(tmp_path / "h.pgm"), heatmap_pixels(grid))


def test_read_pgm_rejects_bad_files(tmp_path):
    (tmp_path / "x.pgm").write_text("P5\n1 1\n255\n0\n")
    with pytest.raises(ValueError):
        read_pgm(tmp_path / "x.pgm")
    (tmp_path / "y.pgm").write_text("P2\n2 2\n255\n0 1 2\n")
    with pytest.raises(ValueError):
        read_pgm(tmp_path / "y.pgm")


def test_curves_csv_long_form(result):
    lines = curves_to_csv(result).splitlines()
    assert lines[0] == "t,cell_row,cell_col,mean,std"
    assert len(lines) == 1 + 300 * 10
    t, r, c, *_ = lines[1].split(",")
    assert (t, r, c) == ("0", "5", "5")


def test_summary_rows(result):
    rows = summary_rows({"a": result, "b": result})
    assert [r["name"] for r in rows] == ["a", "b"]
    assert rows[0]["target_visits_mean"] == pytest.approx(np.mean(result.per_trial_target_visits))
    text, table = summary_table({"a": result})
    assert "a" in text and table.splitlines()[0].startswith("name,scenario,variant")


def test_summary_needs_results():
    with pytest.raises(ValueError):
        summary_rows({})


def test_write_result(result, tmp_path):
    out = write_result(result, tmp_path / "run")
    for name in ["visits.csv", "visits_std.csv", "v_final.csv", "v_final_std.csv", "curves.csv",
                 "per_trial.csv", "visits.pgm", "v_final.pgm", "visits_log.pgm", "v_final_log.pgm",
                 "summary.txt", "summary.csv", "metadata.json"]:
        assert (out / name).is_file(), name
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["experiment"]["trials"] == 3
    assert meta["experiment"]["config"]["alpha"] == 0.01
    assert "ddof=1" in meta["std_convention"]
    visits = read_grid_csv(out / "visits.csv")
    assert visits.sum() == pytest.approx(300)
