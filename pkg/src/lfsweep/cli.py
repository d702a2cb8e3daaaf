"""Command line interface: render, compare, ablate, interlace, bench, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .ablation import benchmark_rows_to_csv, benchmark_views_sweep, run_ablation
from .config import DisplayConfig, load_display_config
from .geometry import CameraPose
from .interlace import interlace, load_calibration
from .metrics import compare_quilts
from .pipeline import render_baseline_quilt, render_sweep_quilt
from .scene import SceneSource
from .swizzle import load_quilt_mosaic


def _add_common(parser: argparse.ArgumentParser, scene: bool = True) -> None:
    if scene:
        parser.add_argument("--scene", required=True,
                            help="scene spec: path to .ply/.lfvox or synthetic:<name>")
        parser.add_argument("--seed", type=int, default=0, help="seed for synthetic scenes")
    parser.add_argument("--display-config", help="display config file (key = value)")
    parser.add_argument("--n-chunk", type=int, help="override chunk count")
    parser.add_argument("--plane-scale", type=float, help="override plane resolution scale")
    parser.add_argument("--interp", choices=["nearest", "bilinear"], help="override plane sampling")
    parser.add_argument("--precision", choices=["u8", "f32"], help="override plane storage")
    parser.add_argument("--views", type=int, help="override horizontal view count")
    parser.add_argument("--res", type=int, help="override per-view resolution (square)")


def _config_from_args(args) -> DisplayConfig:
    cfg = load_display_config(args.display_config) if args.display_config else DisplayConfig()
    overrides = {}
    if getattr(args, "n_chunk", None) is not None:
        overrides["n_chunk"] = args.n_chunk
    if getattr(args, "plane_scale", None) is not None:
        overrides["plane_scale"] = args.plane_scale
    if getattr(args, "interp", None) is not None:
        overrides["interp"] = args.interp
    if getattr(args, "precision", None) is not None:
        overrides["plane_precision"] = args.precision
    if getattr(args, "views", None) is not None:
        overrides["views_x"] = args.views
    if getattr(args, "res", None) is not None:
        overrides["res_x"] = args.res
        overrides["res_y"] = args.res
    return cfg.with_overrides(**overrides) if overrides else cfg


def _load_scene(args):
    return SceneSource.parse(args.scene, seed=args.seed).load()


def _cmd_render_quilt(args) -> int:
    cfg = _config_from_args(args)
    scene = _load_scene(args)
    quilt, stats = render_sweep_quilt(scene, cfg, CameraPose.identity())
    out = Path(args.out)
    sidecar = quilt.save(out)
    print(f"wrote {out} (+{sidecar.name}); {stats.total_s * 1e3:.1f} ms, "
          f"planes {stats.plane_memory_bytes / 1e6:.1f} MB")
    return 0


def _cmd_render_baseline(args) -> int:
    cfg = _config_from_args(args)
    scene = _load_scene(args)
    quilt, stats = render_baseline_quilt(scene, cfg, CameraPose.identity())
    out = Path(args.out)
    sidecar = quilt.save(out)
    print(f"wrote {out} (+{sidecar.name}); {stats.total_s * 1e3:.1f} ms")
    return 0


def _cmd_compare(args) -> int:
    if args.a and args.b:
        views_a, _ = load_quilt_mosaic(args.a)
        views_b, _ = load_quilt_mosaic(args.b)
        from .metrics import compare_view_arrays

        result = compare_view_arrays(views_a, views_b)
    else:
        if not args.scene:
            print("error: provide either --scene or both --a and --b", file=sys.stderr)
            return 2
        cfg = _config_from_args(args)
        scene = _load_scene(args)
        sweep, _ = render_sweep_quilt(scene, cfg, CameraPose.identity())
        baseline, _ = render_baseline_quilt(scene, cfg, CameraPose.identity())
        result = compare_quilts(sweep, baseline)
    for row in result["per_view"]:
        print(f"view ({row['view_col']},{row['view_row']}): "
              f"psnr {row['psnr']:.2f} dB  ssim {row['ssim']:.4f}")
    print(f"mean: psnr {result['mean_psnr']:.2f} dB  ssim {result['mean_ssim']:.4f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2)
        print(f"wrote {args.out}")
    return 0


def _parse_list(text, cast):
    return [cast(v) for v in text.split(",") if v]


def _cmd_ablate(args) -> int:
    cfg = _config_from_args(args)
    scene = _load_scene(args)
    grid = {}
    if args.n_chunk_grid:
        grid["n_chunk"] = _parse_list(args.n_chunk_grid, int)
    if args.plane_scale_grid:
        grid["plane_scale"] = _parse_list(args.plane_scale_grid, float)
    if args.interp_grid:
        grid["interp"] = _parse_list(args.interp_grid, str)
    if args.precision_grid:
        grid["plane_precision"] = _parse_list(args.precision_grid, str)
    report = run_ablation(scene, cfg, grid, repeats=args.repeats,
                          include_filter_ablation=args.filter_ablation)
    report.save(args.out)
    print(report.to_csv())
    print(f"wrote {args.out}.csv and {args.out}.json")
    return 0


def _cmd_interlace(args) -> int:
    views, cfg = load_quilt_mosaic(args.quilt)
    cal = load_calibration(args.calibration)
    flat = views.reshape(-1, cfg.res_y, cfg.res_x, 3)
    base = interlace(flat, cal)
    from PIL import Image

    Image.fromarray(base).save(args.out)
    print(f"wrote {args.out} ({cal.panel_w}x{cal.panel_h}, {cal.total_views} views)")
    return 0


def _cmd_bench(args) -> int:
    cfg = _config_from_args(args)
    scene = _load_scene(args)
    counts = _parse_list(args.view_counts, int) if args.view_counts else [cfg.views_x]
    rows = benchmark_views_sweep(scene, cfg, counts, repeats=args.repeats)
    csv_text = benchmark_rows_to_csv(rows)
    print(csv_text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        print(f"wrote {args.out}")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    cfg = _config_from_args(args)
    scene = _load_scene(args)
    static = args.viewer_dir if args.viewer_dir else None
    print(f"serving on http://{args.host}:{args.port} (ctrl-c to stop)")
    serve(scene, cfg, host=args.host, port=args.port, static_dir=static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lfsweep",
                                     description="plane-sweep light field quilt renderer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render-quilt", help="render a quilt via the plane-sweep path")
    _add_common(p)
    p.add_argument("--out", required=True, help="output quilt PNG")
    p.set_defaults(fn=_cmd_render_quilt)

    p = sub.add_parser("render-baseline", help="render a quilt view-by-view (oracle)")
    _add_common(p)
    p.add_argument("--out", required=True, help="output quilt PNG")
    p.set_defaults(fn=_cmd_render_baseline)

    p = sub.add_parser("compare", help="PSNR/SSIM of plane-sweep vs baseline (or two quilt PNGs)")
    _add_common(p, scene=False)
    p.add_argument("--scene", help="scene spec (omit when comparing two PNGs)")
    p.add_argument("--seed", type=int, default=0, help="seed for synthetic scenes")
    p.add_argument("--a", help="first quilt PNG (with sidecar)")
    p.add_argument("--b", help="second quilt PNG (with sidecar)")
    p.add_argument("--out", help="write JSON report here")
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("ablate", help="sweep knobs and report quality/timing")
    _add_common(p)
    p.add_argument("--n-chunk-grid", help="comma list, e.g. 16,32,64,128")
    p.add_argument("--plane-scale-grid", help="comma list, e.g. 1,2")
    p.add_argument("--interp-grid", help="comma list, e.g. nearest,bilinear")
    p.add_argument("--precision-grid", help="comma list, e.g. u8,f32")
    p.add_argument("--filter-ablation", action="store_true",
                   help="also run with the non-adaptive filter")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", required=True, help="report stem (writes .csv and .json)")
    p.set_defaults(fn=_cmd_ablate)

    p = sub.add_parser("interlace", help="interleave a quilt PNG into a panel base image")
    p.add_argument("--quilt", required=True, help="quilt PNG (sidecar JSON required)")
    p.add_argument("--calibration", required=True, help="calibration JSON")
    p.add_argument("--out", required=True, help="output base image PNG")
    p.set_defaults(fn=_cmd_interlace)

    p = sub.add_parser("bench", help="time plane-sweep vs per-view baseline")
    _add_common(p)
    p.add_argument("--view-counts", help="comma list of quilt view counts, e.g. 9,25,45")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out", help="write CSV here")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("serve", help="run the interactive render service")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--viewer-dir", help="serve a built viewer bundle from this directory")
    p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
