import json
import os
import subprocess
import sys

import pytest

from curiosim.cli import dispatch, read_config

SMALL = ["--trials", "2", "--steps", "200", "--no-figures"]


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert dispatch(["run", "--scenario", "primary", "--seed", "42", "--out", str(out), *SMALL]) == 0
    for name in ["visits.csv", "v_final.csv", "curves.csv", "visits.pgm", "v_final.pgm",
                 "visits_log.pgm", "v_final_log.pgm", "metadata.json", "summary.csv"]:
        assert (out / name).is_file(), name
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["experiment"]["base_seed"] == 42
    assert "primary-original" in capsys.readouterr().out


def test_run_with_figures(tmp_path):
    out = tmp_path / "figs"
    assert dispatch(["run", "--trials", "1", "--steps", "100", "--out", str(out)]) == 0
    assert (out / "v_final.png").is_file() and (out / "curves.png").is_file()


@pytest.mark.parametrize("flag,value", [("--scenario", "bogus"), ("--variant", "nonsense")])
def test_bad_choice_names_the_argument(tmp_path, capsys, flag, value):
    code = dispatch(["run", flag, value, "--out", str(tmp_path), *SMALL])
    assert code != 0
    err = capsys.readouterr().err
    assert value in err and flag in err


def test_non_positive_trials_rejected(tmp_path, capsys):
    assert dispatch(["run", "--trials", "0", "--out", str(tmp_path)]) != 0
    assert "--trials" in capsys.readouterr().err


def test_missing_out(capsys):
    assert dispatch(["run", *SMALL]) != 0
    assert "--out" in capsys.readouterr().err


def test_unknown_subcommand():
    assert dispatch(["frobnicate"]) == 2


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_out(tmp_path, capsys):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    try:
        assert dispatch(["run", "--out", str(locked / "x"), *SMALL]) != 0
    finally:
        locked.chmod(0o700)
    assert "not writable" in capsys.readouterr().err


def test_out_path_is_a_file(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert dispatch(["run", "--out", str(blocker / "sub"), *SMALL]) != 0
    assert "not writable" in capsys.readouterr().err


def test_reruns_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert dispatch(["run", "--seed", "7", "--out", str(tmp_path / d), *SMALL]) == 0
    for name in ["visits.csv", "v_final.csv", "curves.csv", "per_trial.csv", "v_final.pgm"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_reproduce_fig13(tmp_path):
    out = tmp_path / "fig13"
    assert dispatch(["reproduce", "fig13", "--out", str(out), *SMALL]) == 0
    rows = (out / "summary.csv").read_text().splitlines()
    assert len(rows) == 1 + 6
    assert {r.split(",")[2] for r in rows[1:]} == {
        "original", "ablate-directedness", "ablate-cessation", "ablate-voluntary",
        "ablate-aversive", "positive-quality"}
    assert (out / "primary-ablate-voluntary" / "v_final.csv").is_file()


def test_reproduce_fig14_histogram(tmp_path):
    out = tmp_path / "fig14"
    assert dispatch(["reproduce", "fig14", "--out", str(out), *SMALL]) == 0
    lines = (out / "histogram.csv").read_text().splitlines()
    assert lines[0] == "target_visits,trials"
    assert sum(int(l.split(",")[1]) for l in lines[1:]) == 2


def test_list(capsys):
    assert dispatch(["list"]) == 0
    out = capsys.readouterr().out
    assert "wide_no_junction" in out and "ablate-cessation" in out


def test_report_redraws(tmp_path):
    run_dir = tmp_path / "run"
    assert dispatch(["run", "--out", str(run_dir), *SMALL]) == 0
    fig_dir = tmp_path / "figs"
    assert dispatch(["report", "--in", str(run_dir), "--out", str(fig_dir)]) == 0
    assert (fig_dir / "curves.png").is_file()
    assert (fig_dir / "v_final.pgm").read_bytes() == (run_dir / "v_final.pgm").read_bytes()


def test_report_missing_inputs(tmp_path, capsys):
    assert dispatch(["report", "--in", str(tmp_path), "--out", str(tmp_path / "o")]) != 0
    assert "missing" in capsys.readouterr().err


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"trials = 2\nsteps = 150\nseed = 3\nout = {tmp_path / 'cfgrun'}\n")
    assert read_config(str(cfg))["steps"] == 150
    assert dispatch(["run", "--config", str(cfg), "--steps", "120", "--no-figures"]) == 0
    meta = json.loads((tmp_path / "cfgrun" / "metadata.json").read_text())
    assert meta["experiment"]["steps"] == 120  # flag wins
    assert meta["experiment"]["trials"] == 2 and meta["experiment"]["base_seed"] == 3


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert dispatch(["run", "--config", str(bad), "--out", str(tmp_path)]) != 0
    assert "colour" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "curiosim", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "primary" in proc.stdout
