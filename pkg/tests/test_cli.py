import csv
import io
import json

import numpy as np
import pytest
from PIL import Image

import lfsweep as lf
from lfsweep.cli import main
from lfsweep.interlace import CalibrationProfile, save_calibration


def test_render_quilt_writes_png_and_sidecar(tmp_path, capsys):
    out = tmp_path / "quilt.png"
    rc = main([
        "render-quilt", "--scene", "synthetic:single", "--n-chunk", "4",
        "--views", "3", "--res", "48", "--out", str(out),
    ])
    assert rc == 0
    assert out.exists() and out.with_suffix(".json").exists()
    img = Image.open(out)
    assert img.size == (3 * 48, 48)
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["display_config"]["n_chunk"] == 4


def test_render_baseline_and_file_compare(tmp_path, capsys):
    a = tmp_path / "sweep.png"
    b = tmp_path / "base.png"
    common = ["--scene", "synthetic:single", "--n-chunk", "4", "--views", "3", "--res", "48"]
    assert main(["render-quilt", *common, "--out", str(a)]) == 0
    assert main(["render-baseline", *common, "--out", str(b)]) == 0
    report = tmp_path / "cmp.json"
    assert main(["compare", "--a", str(a), "--b", str(b), "--out", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["mean_psnr"] > 25.0
    out = capsys.readouterr().out
    assert "mean: psnr" in out


def test_compare_scene_mode(capsys):
    rc = main(["compare", "--scene", "synthetic:single", "--n-chunk", "4",
               "--views", "3", "--res", "48"])
    assert rc == 0
    assert "mean: psnr" in capsys.readouterr().out


def test_compare_requires_inputs(capsys):
    assert main(["compare"]) == 2


def test_ablate_writes_reports(tmp_path, capsys):
    stem = tmp_path / "report"
    rc = main([
        "ablate", "--scene", "synthetic:depth-ramp", "--views", "3", "--res", "48",
        "--n-chunk-grid", "4,8", "--out", str(stem),
    ])
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "report.csv").read_text())))
    assert len(rows) == 2
    assert float(rows[1]["psnr"]) >= float(rows[0]["psnr"]) - 0.2


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    rc = main([
        "bench", "--scene", "synthetic:single", "--n-chunk", "4", "--res", "48",
        "--view-counts", "1,3", "--repeats", "1", "--out", str(out),
    ])
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["views_x"] for r in rows] == ["1", "3"]


def test_interlace_command(tmp_path, capsys):
    quilt = tmp_path / "q.png"
    main(["render-quilt", "--scene", "synthetic:single", "--n-chunk", "4",
          "--views", "3", "--res", "32", "--out", str(quilt)])
    cal_path = tmp_path / "cal.json"
    save_calibration(
        CalibrationProfile(panel_w=96, panel_h=64, pitch=13.7, slant=-0.1,
                           center=0.25, total_views=3),
        cal_path,
    )
    out = tmp_path / "base.png"
    rc = main(["interlace", "--quilt", str(quilt), "--calibration", str(cal_path),
               "--out", str(out)])
    assert rc == 0
    assert Image.open(out).size == (96, 64)


def test_display_config_file_flag(tmp_path, capsys):
    cfg_path = tmp_path / "d.cfg"
    lf.save_display_config(lf.DisplayConfig(views_x=3, res_x=32, res_y=32, n_chunk=4), cfg_path)
    out = tmp_path / "q.png"
    rc = main(["render-quilt", "--scene", "synthetic:single",
               "--display-config", str(cfg_path), "--out", str(out)])
    assert rc == 0
    assert Image.open(out).size == (96, 32)


def test_missing_scene_file_reports_error(tmp_path, capsys):
    rc = main(["render-quilt", "--scene", str(tmp_path / "none.ply"), "--out",
               str(tmp_path / "q.png")])
    assert rc == 2
    assert "error" in capsys.readouterr().err
