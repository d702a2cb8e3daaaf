import math

import mpmath
import numpy as np
import pytest

import lfsweep as lf
from lfsweep import CameraPose, DisplayConfig
from lfsweep.chunking import build_partition
from lfsweep.geometry import reference_camera
from lfsweep.raster import (
    BASE_FILTER_STRENGTH,
    adaptive_filter_strength,
    camera_for_view,
    dump_planes,
    lowpass_planes,
    project_gaussian,
    rasterize_chunks,
    reference_render_camera,
    render_perspective,
)
from lfsweep.geometry import quilt_view_params
from lfsweep.scene import GaussianScene, generate_synthetic


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def single_gaussian(depth=2.0, scale=0.1, opacity=0.8, color=(0.9, 0.45, 0.3)):
    c = (np.array(color) - 0.5) / 0.28209479177387814
    return GaussianScene(
        position=np.array([[0.0, 0.0, depth]], np.float32),
        log_scale=np.full((1, 3), np.log(scale), np.float32),
        rotation=np.array([[1.0, 0.0, 0.0, 0.0]], np.float32),
        opacity_logit=np.array([np.log(opacity / (1 - opacity))], np.float32),
        sh_coeffs=c.reshape(1, 1, 3).astype(np.float32),
    )


def center_camera(res=65, fov_deg=60.0):
    cfg = DisplayConfig(res_x=res, res_y=res, fov_x=math.radians(fov_deg),
                        fov_y=math.radians(fov_deg), views_x=1, view_angle_x=0.0,
                        view_angle_y=0.0)
    return camera_for_view(cfg, CameraPose.identity(), quilt_view_params(cfg, 1))


# ----------------------------------------------------------- projection


def test_project_gaussian_on_axis_isotropic():
    camera = center_camera()
    sigma, depth = 0.05, 2.0
    scene = single_gaussian(depth=depth, scale=sigma)
    splat = project_gaussian(camera, scene, 0, filter_strength=0.0)
    f = camera.focal_px_x
    expected = (f * sigma / depth) ** 2
    np.testing.assert_allclose(splat.covariance, expected * np.eye(2), rtol=1e-5)
    # on the optical axis the mean lands at the image center (corner-origin)
    np.testing.assert_allclose(splat.mean, [camera.width / 2] * 2, atol=1e-4)


def test_project_gaussian_std_halves_with_depth():
    camera = center_camera()
    near = project_gaussian(camera, single_gaussian(depth=1.5, scale=0.05), 0, filter_strength=0.0)
    far = project_gaussian(camera, single_gaussian(depth=3.0, scale=0.05), 0, filter_strength=0.0)
    np.testing.assert_allclose(
        np.sqrt(np.diag(near.covariance)), 2.0 * np.sqrt(np.diag(far.covariance)), rtol=1e-5
    )


def test_project_gaussian_behind_camera_skipped():
    camera = center_camera()
    assert project_gaussian(camera, single_gaussian(depth=-1.0), 0) is None


def test_project_gaussian_compensation_reduces_alpha():
    camera = center_camera()
    scene = single_gaussian(scale=0.002, opacity=0.9)  # tiny: dilation dominates
    splat = project_gaussian(camera, scene, 0)
    raw = sigmoid(float(scene.opacity_logit[0]))
    assert splat.opacity < raw
    cov_raw = project_gaussian(camera, scene, 0, filter_strength=0.0).covariance
    comp = math.sqrt(np.linalg.det(cov_raw) / np.linalg.det(cov_raw + 0.3 * np.eye(2)))
    assert splat.opacity == pytest.approx(raw * comp, rel=1e-5)


# ------------------------------------------------------ filter strength


def test_adaptive_filter_identity_case():
    cfg = DisplayConfig(view_angle_x=0.0, view_angle_y=0.0, plane_scale=1.0)
    ref = reference_camera(cfg, CameraPose.identity())
    assert adaptive_filter_strength(cfg, ref) == pytest.approx(0.3, abs=1e-12)


def test_adaptive_filter_scale_squared():
    cfg = DisplayConfig(view_angle_x=0.0, view_angle_y=0.0, plane_scale=2.0)
    ref = reference_camera(cfg, CameraPose.identity())
    assert adaptive_filter_strength(cfg, ref) == pytest.approx(1.2, abs=1e-12)


def test_adaptive_filter_matches_high_precision_formula():
    mpmath.mp.dps = 40
    rng = np.random.default_rng(31)
    for _ in range(25):
        cfg = DisplayConfig(
            d_focal=float(rng.uniform(0.5, 4.0)),
            fov_x=float(rng.uniform(0.4, 2.0)),
            view_angle_x=float(rng.uniform(0.0, 1.4)),
            view_angle_y=0.0,
            plane_scale=float(rng.uniform(0.5, 3.0)),
        )
        ref = reference_camera(cfg, CameraPose.identity())
        d, df = mpmath.mpf(cfg.d_focal), mpmath.mpf(ref.d_forward)
        ratio = d * mpmath.tan(mpmath.mpf(cfg.fov_x) / 2) / (
            (d - df) * mpmath.tan(mpmath.mpf(ref.fov_x_ref) / 2)
        )
        want = float(mpmath.mpf("0.3") * (ratio * mpmath.mpf(cfg.plane_scale)) ** 2)
        assert adaptive_filter_strength(cfg, ref) == pytest.approx(want, rel=1e-10)
        # the construction makes the pixel-size ratio collapse to plane_scale
        assert adaptive_filter_strength(cfg, ref) == pytest.approx(
            0.3 * cfg.plane_scale**2, rel=1e-9
        )


# ------------------------------------------------------------ rendering


def test_render_empty_scene_black():
    camera = center_camera(res=32)
    scene = GaussianScene(
        np.zeros((0, 3), np.float32), np.zeros((0, 3), np.float32),
        np.zeros((0, 4), np.float32), np.zeros(0, np.float32), np.zeros((0, 1, 3), np.float32),
    )
    color, trans = render_perspective(scene, camera)
    assert np.all(color == 0.0)
    assert np.all(trans == 1.0)


def test_render_single_center_alpha():
    # odd resolution puts a pixel center exactly on the optical axis;
    # filter strength 0 isolates the raw splat formula
    camera = center_camera(res=65)
    opacity = 0.8
    scene = single_gaussian(opacity=opacity, scale=0.15)
    color, trans = render_perspective(scene, camera, filter_strength=0.0)
    center = camera.height // 2
    assert 1.0 - trans[center, center] == pytest.approx(opacity, abs=1e-6)


def test_render_two_gaussians_composite_alpha():
    camera = center_camera(res=65)
    a, b = 0.6, 0.3
    one = single_gaussian(opacity=a, scale=0.15)
    two = GaussianScene(
        position=np.repeat(one.position, 2, axis=0),
        log_scale=np.repeat(one.log_scale, 2, axis=0),
        rotation=np.repeat(one.rotation, 2, axis=0),
        opacity_logit=np.array(
            [np.log(a / (1 - a)), np.log(b / (1 - b))], np.float32
        ),
        sh_coeffs=np.repeat(one.sh_coeffs, 2, axis=0),
    )
    color, trans = render_perspective(two, camera, filter_strength=0.0)
    center = camera.height // 2
    assert 1.0 - trans[center, center] == pytest.approx(a + b - a * b, abs=1e-6)


def test_render_transmittance_conservation(ramp_scene):
    cfg = DisplayConfig()
    camera = camera_for_view(cfg, CameraPose.identity(), quilt_view_params(cfg, 5))
    color, trans = render_perspective(ramp_scene, camera)
    assert np.all(trans >= 0.0) and np.all(trans <= 1.0)
    # premultiplied color can never exceed the deposited alpha mass
    assert np.all(color.max(axis=2) <= 1.0 - trans + 1e-5)


def test_render_deterministic(ramp_scene):
    cfg = DisplayConfig()
    camera = camera_for_view(cfg, CameraPose.identity(), quilt_view_params(cfg, 2))
    c1, t1 = render_perspective(ramp_scene, camera)
    c2, t2 = render_perspective(ramp_scene, camera)
    assert np.array_equal(c1, c2) and np.array_equal(t1, t2)


# ----------------------------------------------------------- plane path


def test_rasterize_chunks_single_gaussian_one_plane(cfg):
    scene = generate_synthetic("single")
    ref = reference_camera(cfg, CameraPose.identity())
    part = build_partition(scene, ref, 4)
    planes = rasterize_chunks(scene, ref, part, cfg.with_overrides(n_chunk=4))
    assert planes.nonempty.sum() == 1
    occupied = [k for k in range(4) if planes.nonempty[k]]
    for k in range(4):
        color, trans = planes.plane_f32(k)
        if k in occupied:
            assert (trans < 1.0).any()
        else:
            assert np.all(trans == 1.0) and np.all(color == 0.0)


def test_single_chunk_plane_equals_perspective_render():
    # with no viewing cone the sweep camera IS the base camera and the
    # adaptive strength equals the hard-coded one; the only difference is
    # the u8 quantization of the plane
    cfg = DisplayConfig(view_angle_x=0.0, view_angle_y=0.0, n_chunk=1, plane_scale=1.0)
    scene = generate_synthetic("depth-ramp", seed=5)
    ref = reference_camera(cfg, CameraPose.identity())
    part = build_partition(scene, ref, 1)
    planes = rasterize_chunks(scene, ref, part, cfg)
    camera = reference_render_camera(cfg, ref)
    want_color, want_trans = render_perspective(scene, camera, indices=part.members[0])
    got_color, got_trans = planes.plane_f32(0)
    assert np.abs(got_color - np.clip(want_color, 0, 1)).max() <= 1.0 / 255.0 + 1e-6
    assert np.abs(got_trans - want_trans).max() <= 1.0 / 255.0 + 1e-6


def test_single_chunk_equivalence_wide_cone_explicit_filter():
    # with a viewing cone the plane path uses the adaptive strength; the
    # perspective oracle reproduces it when given the same filter and
    # base-camera color directions (degree-0 scene: direction-free)
    cfg = DisplayConfig(n_chunk=1, plane_scale=2.0)
    scene = generate_synthetic("depth-ramp", seed=6)
    scene = GaussianScene(scene.position, scene.log_scale, scene.rotation,
                          scene.opacity_logit, scene.sh_coeffs[:, :1, :])
    ref = reference_camera(cfg, CameraPose.identity())
    part = build_partition(scene, ref, 1)
    planes = rasterize_chunks(scene, ref, part, cfg)
    camera = reference_render_camera(cfg, ref)
    want_color, want_trans = render_perspective(
        scene, camera, indices=part.members[0], filter_strength=planes.filter_strength
    )
    got_color, got_trans = planes.plane_f32(0)
    assert np.abs(got_color - np.clip(want_color, 0, 1)).max() <= 1.0 / 255.0 + 1e-6
    assert np.abs(got_trans - want_trans).max() <= 1.0 / 255.0 + 1e-6


def test_chunk_planes_ignore_occlusion(cfg, ramp_scene):
    # plane alpha mass can only exceed the occlusion-aware baseline's
    ref = reference_camera(cfg, CameraPose.identity())
    part = build_partition(ramp_scene, ref, cfg.n_chunk)
    planes = rasterize_chunks(ramp_scene, ref, part, cfg)
    camera = reference_render_camera(cfg, ref)
    _, trans = render_perspective(ramp_scene, camera)
    baseline_occupied = (trans < 0.999).sum()
    per_plane = sum(
        (planes.plane_f32(k)[1] < 0.999).sum() for k in range(planes.n_planes)
    )
    assert per_plane >= baseline_occupied


def test_rasterize_chunks_deterministic(cfg, ramp_scene):
    ref = reference_camera(cfg, CameraPose.identity())
    part = build_partition(ramp_scene, ref, cfg.n_chunk)
    p1 = rasterize_chunks(ramp_scene, ref, part, cfg)
    p2 = rasterize_chunks(ramp_scene, ref, part, cfg)
    assert np.array_equal(p1.packed, p2.packed)


def test_plane_memory_accounting(cfg, ramp_scene):
    ref = reference_camera(cfg, CameraPose.identity())
    part = build_partition(ramp_scene, ref, cfg.n_chunk)
    planes = rasterize_chunks(ramp_scene, ref, part, cfg)
    wp, hp = planes.grid
    assert planes.memory_bytes() == cfg.n_chunk * hp * wp * 4 * 1
    planes_f32 = rasterize_chunks(ramp_scene, ref, part, cfg.with_overrides(plane_precision="f32"))
    assert planes_f32.memory_bytes() == cfg.n_chunk * hp * wp * 4 * 4


# -------------------------------------------------------------- lowpass


def _impulse_stack():
    color = np.zeros((1, 33, 33, 3), np.float32)
    trans = np.ones((1, 33, 33), np.float32)
    color[0, 16, 16] = 1.0
    trans[0, 16, 16] = 0.0
    from lfsweep.raster import PlaneStack

    return PlaneStack.from_components(color, trans, [2.0], "f32")


def test_lowpass_sigma_zero_identity():
    planes = _impulse_stack()
    before = planes.packed.copy()
    lowpass_planes(planes, 0.0)
    assert np.array_equal(planes.packed, before)


def test_lowpass_impulse_preserves_mass():
    planes = _impulse_stack()
    lowpass_planes(planes, 1.5)
    color, trans = planes.plane_f32(0)
    # discrete gaussian kernel sums to one: total mass is conserved
    assert color[..., 0].sum() == pytest.approx(1.0, abs=1e-6)
    assert (1.0 - trans).sum() == pytest.approx(1.0, abs=1e-6)


def test_lowpass_constant_plane_unchanged():
    color = np.full((1, 17, 17, 3), 0.25, np.float32)
    trans = np.full((1, 17, 17), 0.5, np.float32)
    from lfsweep.raster import PlaneStack

    planes = PlaneStack.from_components(color, trans, [2.0], "u8")
    lowpass_planes(planes, 2.0)
    c, t = planes.plane_f32(0)
    assert np.abs(c - 0.25).max() <= 1.0 / 255.0
    assert np.abs(t - 0.5).max() <= 1.0 / 255.0


def test_lowpass_rejects_negative_sigma():
    with pytest.raises(ValueError):
        lowpass_planes(_impulse_stack(), -1.0)


# ---------------------------------------------------------------- voxels


def test_voxel_render_center_alpha():
    # a single voxel straight ahead: center pixel alpha is the analytic
    # slab opacity 1 - exp(-sigma * size) (axial ray, |d_cam| = 1)
    from lfsweep.scene import VoxelScene

    size, sigma = 0.2, 8.0
    scene = VoxelScene(
        grid_origin=np.array([-size / 2, -size / 2, 2.0]),
        voxel_size=size,
        indices=np.array([[0, 0, 0]]),
        density=np.array([sigma]),
        rgb=np.array([[1.0, 0.5, 0.25]]),
    )
    camera = center_camera(res=65)
    color, trans = render_perspective(scene, camera)
    center = camera.height // 2
    want = 1.0 - math.exp(-sigma * size)
    assert 1.0 - trans[center, center] == pytest.approx(want, abs=1e-5)
    np.testing.assert_allclose(
        color[center, center], want * np.array([1.0, 0.5, 0.25]), atol=1e-5
    )


def test_voxel_grid_scene_renders_and_chunks(cfg):
    scene = generate_synthetic("grid")
    ref = reference_camera(cfg, CameraPose.identity())
    part = build_partition(scene, ref, 8)
    planes = rasterize_chunks(scene, ref, part, cfg.with_overrides(n_chunk=8))
    assert planes.nonempty.any()
    total_alpha = sum((1.0 - planes.plane_f32(k)[1]).sum() for k in range(8))
    assert total_alpha > 0


def test_dump_planes_writes_files(tmp_path, cfg, single_scene):
    ref = reference_camera(cfg, CameraPose.identity())
    part = build_partition(single_scene, ref, 2)
    planes = rasterize_chunks(single_scene, ref, part, cfg.with_overrides(n_chunk=2))
    dump_planes(planes, tmp_path)
    assert (tmp_path / "planes.json").exists()
    assert (tmp_path / "plane_000_color.png").exists()
    assert (tmp_path / "plane_001_trans.png").exists()
