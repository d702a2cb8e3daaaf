import csv
import io
import json

import numpy as np
import pytest

import lfsweep as lf
from lfsweep.ablation import benchmark, benchmark_rows_to_csv, benchmark_views_sweep, run_ablation


@pytest.fixture(scope="module")
def small_cfg():
    return lf.DisplayConfig(views_x=3, res_x=48, res_y=48, n_chunk=8)


@pytest.fixture(scope="module")
def small_scene():
    return lf.generate_synthetic("depth-ramp", seed=2)


def test_single_config_grid_one_row(small_scene, small_cfg):
    report = run_ablation(small_scene, small_cfg)
    assert len(report.rows) == 1
    row = report.rows[0]
    assert not row.failed
    assert row.psnr is not None and row.psnr > 10.0
    assert 0.0 <= row.ssim <= 1.0


def test_speedup_column_recomputable(small_scene, small_cfg):
    report = run_ablation(small_scene, small_cfg, {"n_chunk": [4, 8]})
    for row in report.rows:
        assert row.speedup == row.render_ms_baseline / row.render_ms_quilt


def test_failed_row_marked_not_raised(small_scene, small_cfg):
    report = run_ablation(small_scene, small_cfg, {"n_chunk": [8, 0]})
    ok = [r for r in report.rows if not r.failed]
    bad = [r for r in report.rows if r.failed]
    assert len(ok) == 1 and len(bad) == 1
    assert "n_chunk" in bad[0].error
    assert bad[0].psnr is None


def test_report_serialization_round_trip(tmp_path, small_scene, small_cfg):
    report = run_ablation(small_scene, small_cfg, {"plane_precision": ["u8", "f32"]})
    stem = tmp_path / "report"
    report.save(stem)
    doc = json.loads((tmp_path / "report.json").read_text())
    assert len(doc["rows"]) == 2
    rows = list(csv.DictReader(io.StringIO((tmp_path / "report.csv").read_text())))
    assert len(rows) == 2
    assert {r["plane_precision"] for r in rows} == {"u8", "f32"}
    for parsed, orig in zip(rows, report.rows):
        assert float(parsed["psnr"]) == pytest.approx(orig.psnr)


def test_unknown_knob_rejected(small_scene, small_cfg):
    with pytest.raises(ValueError):
        run_ablation(small_scene, small_cfg, {"chunkiness": [3]})


def test_ablation_deterministic_metrics(small_scene, small_cfg):
    a = run_ablation(small_scene, small_cfg, {"n_chunk": [8]})
    b = run_ablation(small_scene, small_cfg, {"n_chunk": [8]})
    assert a.rows[0].psnr == b.rows[0].psnr
    assert a.rows[0].ssim == b.rows[0].ssim


def test_benchmark_row_fields(small_scene, small_cfg):
    row = benchmark(small_scene, small_cfg, repeats=1)
    assert row.baseline_ms > 0 and row.quilt_ms > 0
    assert row.speedup == row.baseline_ms / row.quilt_ms
    assert row.plane_memory_bytes == 8 * 48 * 48 * 4


def test_benchmark_rejects_zero_repeats(small_scene, small_cfg):
    with pytest.raises(ValueError):
        benchmark(small_scene, small_cfg, repeats=0)


def test_benchmark_views_sweep_csv(small_scene, small_cfg):
    rows = benchmark_views_sweep(small_scene, small_cfg, [1, 3], repeats=1)
    assert [r.views_x for r in rows] == [1, 3]
    text = benchmark_rows_to_csv(rows)
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert len(parsed) == 2
    assert float(parsed[1]["baseline_ms"]) > 0


def test_extreme_views_score_at_most_central(small_scene):
    # wider angles stray further from the plane approximation
    cfg = lf.DisplayConfig(views_x=9, res_x=96, res_y=96, n_chunk=16)
    from lfsweep.metrics import compare_quilts
    from lfsweep.pipeline import render_baseline_quilt, render_sweep_quilt

    sweep, _ = render_sweep_quilt(small_scene, cfg)
    baseline, _ = render_baseline_quilt(small_scene, cfg)
    rows = compare_quilts(sweep, baseline)["per_view"]
    by_col = {r["view_col"]: r["psnr"] for r in rows}
    extremes = 0.5 * (by_col[1] + by_col[9])
    assert extremes <= by_col[5]


def test_single_view_has_no_sharing_to_exploit(small_scene, small_cfg):
    # with one view the shared plane pass is pure overhead, so the speedup
    # must stay below the multi-view case
    single = benchmark(small_scene, small_cfg.with_overrides(views_x=1), repeats=3)
    many = benchmark(small_scene, small_cfg.with_overrides(views_x=9), repeats=3)
    assert single.speedup < many.speedup
