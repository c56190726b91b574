"""CLI behaviour and exit-code contract: 0 ok, 1 property failure, 2 usage."""

import os

import pytest

from coda.cli import main
from conftest import model_path, shipped_model_path


def test_validate_ok_exits_zero(capsys):
    assert main(["validate", model_path("wm1")]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_invalid_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.coda"
    bad.write_text("model b component A { var x: GHOST = 1 "
                   "operation e kind E { } }")
    assert main(["validate", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "unresolved-name" in err


def test_missing_file_is_a_usage_error():
    assert main(["validate", "/nonexistent/x.coda"]) == 2


def test_simulate_writes_a_trace(tmp_path, capsys):
    out = tmp_path / "t.trace"
    rc = main(["simulate", model_path("wm1"),
               "--scenario", shipped_model_path("wm1_start.scn"),
               "-o", str(out)])
    assert rc == 0
    text = out.read_text()
    assert "fire WM.start p=QUICK" in text
    assert text.endswith("\n")


def test_check_flawed_model_exits_one_with_counterexample(tmp_path, capsys):
    out = tmp_path / "ce.trace"
    rc = main(["check", model_path("wm2_flawed"), "--max-time", "30",
               "--env-bound", "2", "--stop-at-first", "-o", str(out)])
    assert rc == 1
    assert "violated" in capsys.readouterr().out
    assert "assumeLocked" in out.read_text()


def test_check_clean_model_exits_zero(capsys):
    rc = main(["check", model_path("wm0"), "--max-time", "6"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "holds-within-bounds" in out
    assert "full coverage" in out


def test_emit_writes_two_files(tmp_path, capsys):
    rc = main(["emit", model_path("wm1"), "-o", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "wm1.ctx.eventb").exists()
    assert (tmp_path / "wm1.mch.eventb").exists()
    machine = (tmp_path / "wm1.mch.eventb").read_text()
    assert "REFINES wm0_mch" in machine  # the refines clause is honoured


def test_record_and_compare_round_trip(tmp_path, capsys):
    golden = tmp_path / "wm1.golden"
    rc = main(["record", model_path("wm1"),
               "--scenario", shipped_model_path("wm1_start.scn"),
               "-o", str(golden)])
    assert rc == 0
    rc = main(["compare", model_path("wm1"),
               "--scenario", shipped_model_path("wm1_start.scn"),
               "--golden", str(golden)])
    assert rc == 0
    assert "pass" in capsys.readouterr().out


def test_compare_divergence_exits_one(tmp_path, capsys):
    golden = tmp_path / "wm1.golden"
    main(["record", model_path("wm1"),
          "--scenario", shipped_model_path("wm1_start.scn"),
          "-o", str(golden)])
    text = golden.read_text().replace("CP.display=RUNNING",
                                      "CP.display=WAITING")
    golden.write_text(text)
    rc = main(["compare", model_path("wm1"),
               "--scenario", shipped_model_path("wm1_start.scn"),
               "--golden", str(golden)])
    assert rc == 1
    assert "divergence" in capsys.readouterr().out


def test_projected_compare(tmp_path, capsys):
    golden = tmp_path / "wm1.golden"
    main(["record", model_path("wm1"),
          "--scenario", shipped_model_path("wm1_start.scn"),
          "-o", str(golden)])
    rc = main(["compare", model_path("wm2"),
               "--scenario", shipped_model_path("wm2_run.scn"),
               "--golden", str(golden), "--project-refinement"])
    assert rc == 0


def test_refine_subcommand(capsys):
    rc = main(["refine", model_path("wm1"), "--max-time", "6",
               "--env-bound", "1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "holds-within-bounds" in out
    assert "not a proof" in out


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2
